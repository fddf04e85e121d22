"""Deterministic CSV and SVG emission for grid results.

File contents are a pure function of the GridResult: floats are printed at
17 significant digits in the CSVs, and the heatmaps are written by hand
(no plotting library) so that repeated invocations produce byte-identical
output.
"""

from __future__ import annotations

from itertools import combinations
from pathlib import Path

from .bench import GridResult

CELLS_HEADER = (
    "scenario,dim,rho,filter,n_particles,steps,runs,"
    "rmse_mean,rmse_std,degenerate_steps,likelihood_evals,seed"
)
WINPROB_HEADER = "dim,rho,filter_a,filter_b,p_a_less_b"

# Diverging ramp anchored at win probability 0.5.
_LOW = (33, 102, 172)  # deep blue at p = 0
_MID = (247, 247, 247)  # near-white at p = 0.5
_HIGH = (178, 24, 43)  # deep red at p = 1


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def render_cells_csv(result: GridResult) -> str:
    lines = [CELLS_HEADER]
    for c in result.cells:
        lines.append(
            ",".join(
                [
                    c.scenario,
                    str(c.dim),
                    _fmt(c.rho),
                    c.filter_id,
                    str(c.n_particles),
                    str(c.steps),
                    str(c.runs),
                    _fmt(c.rmse_mean),
                    _fmt(c.rmse_std),
                    str(c.degenerate_steps),
                    str(c.likelihood_evals),
                    str(c.seed),
                ]
            )
        )
    return "\n".join(lines) + "\n"


def render_winprob_csv(result: GridResult) -> str:
    lines = [WINPROB_HEADER]
    for w in result.win_probabilities:
        lines.append(
            ",".join(
                [str(w.dim), _fmt(w.rho), w.filter_a, w.filter_b, _fmt(w.p_a_less_b)]
            )
        )
    return "\n".join(lines) + "\n"


def _ramp(p: float) -> str:
    p = min(max(p, 0.0), 1.0)
    if p <= 0.5:
        lo, hi, t = _LOW, _MID, p / 0.5
    else:
        lo, hi, t = _MID, _HIGH, (p - 0.5) / 0.5
    rgb = tuple(round(a + t * (b - a)) for a, b in zip(lo, hi))
    return "#{:02x}{:02x}{:02x}".format(*rgb)


def render_heatmap_svg(result: GridResult, filter_a: str, filter_b: str) -> str:
    """Win-probability heatmap P(rmse[a] < rmse[b]) over (dim, rho)."""
    cfg = result.config
    table = {
        (w.dim, w.rho): w.p_a_less_b
        for w in result.win_probabilities
        if w.filter_a == filter_a and w.filter_b == filter_b
    }
    cell, left, top, bottom = 54, 70, 46, 58
    width = left + cell * len(cfg.rhos) + 20
    height = top + cell * len(cfg.dims) + bottom
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'font-family="sans-serif" font-size="12">',
        f'<text x="{left}" y="22" font-size="14">'
        f"P(rmse[{filter_a}] &lt; rmse[{filter_b}])</text>",
    ]
    for i, dim in enumerate(cfg.dims):
        y = top + i * cell
        parts.append(
            f'<text x="{left - 8}" y="{y + cell / 2 + 4:.0f}" text-anchor="end">{dim}</text>'
        )
        for j, rho in enumerate(cfg.rhos):
            x = left + j * cell
            p = table[(dim, rho)]
            parts.append(
                f'<rect x="{x}" y="{y}" width="{cell}" height="{cell}" '
                f'fill="{_ramp(p)}" stroke="#555555"/>'
            )
            parts.append(
                f'<text x="{x + cell / 2:.0f}" y="{y + cell / 2 + 4:.0f}" '
                f'text-anchor="middle">{p:.3f}</text>'
            )
    for j, rho in enumerate(cfg.rhos):
        x = left + j * cell
        parts.append(
            f'<text x="{x + cell / 2:.0f}" y="{top + cell * len(cfg.dims) + 18}" '
            f'text-anchor="middle">{rho:.2g}</text>'
        )
    parts.append(
        f'<text x="{left + cell * len(cfg.rhos) / 2:.0f}" '
        f'y="{height - 16}" text-anchor="middle">correlation rho</text>'
    )
    parts.append(
        f'<text x="16" y="{top + cell * len(cfg.dims) / 2:.0f}" text-anchor="middle" '
        f'transform="rotate(-90 16 {top + cell * len(cfg.dims) / 2:.0f})">dimension D</text>'
    )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def artifact_files(result: GridResult) -> dict[str, str]:
    """Filename -> content for everything a grid sweep emits.

    cells.csv is always present; the win-probability table and one heatmap
    per filter pair appear only when the sweep compared at least two
    filters.
    """
    files = {"cells.csv": render_cells_csv(result)}
    if result.win_probabilities:
        files["winprob.csv"] = render_winprob_csv(result)
        for fa, fb in combinations(result.config.filters, 2):
            files[f"winprob_{fa}_vs_{fb}.svg"] = render_heatmap_svg(result, fa, fb)
    return files


def write_artifacts(files: dict[str, str], out_dir) -> list[Path]:
    """Write named artifact contents into ``out_dir`` (created if missing)."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc}") from exc
    written = []
    for name, content in files.items():
        path = out / name
        try:
            path.write_text(content, encoding="utf-8", newline="")
        except OSError as exc:
            raise OSError(f"cannot write {path}: {exc}") from exc
        written.append(path)
    return written


def emit_results(result: GridResult, out_dir) -> list[Path]:
    """Render and write all artifacts for a grid result."""
    return write_artifacts(artifact_files(result), out_dir)
