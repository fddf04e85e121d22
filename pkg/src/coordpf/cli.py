"""Thin command-line client for the benchmark service.

Every command builds a request, sends it to the FastAPI app (in-process by
default, or to ``--server URL``), and formats the response. No environment
variables are consulted; all inputs arrive via flags or the config file.
"""

from __future__ import annotations

import asyncio
import dataclasses
import json

import click
import httpx

from .bench import load_config

_FILTER_CLI_NAMES = {"pf": "pf", "cpf-exact": "cpf_exact", "cpf-dirac": "cpf_dirac"}
_FILTER_CHOICE = click.Choice(sorted(_FILTER_CLI_NAMES))


def _post(path: str, payload: dict, server: str | None) -> dict:
    try:
        if server:
            with httpx.Client(base_url=server, timeout=None) as client:
                response = client.post(path, json=payload)
        else:
            response = asyncio.run(_post_in_process(path, payload))
    except httpx.HTTPError as exc:
        raise click.ClickException(f"service request failed: {exc}") from exc
    if response.status_code != 200:
        raise click.ClickException(_describe_error(response))
    return response.json()


async def _post_in_process(path: str, payload: dict) -> httpx.Response:
    from .service import create_app

    transport = httpx.ASGITransport(app=create_app())
    async with httpx.AsyncClient(
        transport=transport, base_url="http://bench.internal", timeout=None
    ) as client:
        return await client.post(path, json=payload)


def _describe_error(response: httpx.Response) -> str:
    try:
        detail = response.json().get("detail")
    except ValueError:
        detail = response.text
    if isinstance(detail, list):  # pydantic validation report
        detail = "; ".join(
            f"{'.'.join(str(p) for p in item.get('loc', []))}: {item.get('msg')}"
            for item in detail
        )
    return f"request rejected ({response.status_code}): {detail}"


def _common_options(command):
    for option in reversed(
        [
            click.option("--particles", type=int, default=2000, show_default=True,
                         help="Particle budget n_pf before parity."),
            click.option("--steps", type=int, default=100, show_default=True),
            click.option("--runs", type=int, default=10, show_default=True),
            click.option("--seed", type=int, default=0, show_default=True),
            click.option("--no-budget-parity", is_flag=True,
                         help="Give the CPF the full n_pf particles."),
            click.option("--no-intra-resample", is_flag=True,
                         help="Disable resampling between dimension updates."),
            click.option("--ess-fraction", type=float, default=0.5, show_default=True),
            click.option("--resampler", type=click.Choice(["multinomial", "systematic"]),
                         default="systematic", show_default=True),
            click.option("--dimension-order", type=click.Choice(["identity", "random"]),
                         default="identity", show_default=True),
            click.option("--server", default=None,
                         help="Service URL; omit to run in process."),
        ]
    ):
        command = option(command)
    return command


def _options_payload(particles, steps, runs, seed, no_budget_parity,
                     no_intra_resample, ess_fraction, resampler, dimension_order):
    return {
        "n_pf": particles,
        "steps": steps,
        "runs": runs,
        "master_seed": seed,
        "budget_parity": not no_budget_parity,
        "intra_step_resampling": not no_intra_resample,
        "ess_fraction": ess_fraction,
        "resampler": resampler,
        "dimension_order": dimension_order,
    }


def _write_artifacts(artifacts: dict, out_dir) -> None:
    from .reporting import write_artifacts

    paths = write_artifacts(artifacts, out_dir)
    for path in paths:
        click.echo(f"wrote {path}")


def _echo_cells(cells: list[dict]) -> None:
    for c in cells:
        click.echo(
            f"{c['scenario']} dim={c['dim']} rho={c['rho']:g} {c['filter']}: "
            f"rmse {c['rmse_mean']:.4f} +- {c['rmse_std']:.4f} "
            f"(N={c['n_particles']}, evals={c['likelihood_evals']}, "
            f"degenerate={c['degenerate_steps']})"
        )


@click.group()
def main():
    """Benchmark grids for the particle and coordinate particle filters."""


@main.command()
@click.option("--config", "config_path", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="TOML experiment config.")
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
@click.option("--workers", type=int, default=1, show_default=True,
              help="Parallel worker processes for independent cells.")
@click.option("--server", default=None, help="Service URL; omit to run in process.")
def grid(config_path, out_dir, workers, server):
    """Run the full (dimension x correlation x filter) sweep from a config file."""
    try:
        cfg = load_config(config_path)
    except (ValueError, OSError, TypeError) as exc:
        raise click.ClickException(f"bad config {config_path}: {exc}") from exc
    payload = dataclasses.asdict(cfg)
    payload["workers"] = workers
    data = _post("/grid", payload, server)
    _echo_cells(data["cells"])
    _write_artifacts(data["artifacts"], out_dir)


@main.command()
@click.option("--dim", type=int, required=True)
@click.option("--rho", type=float, required=True)
@click.option("--filter", "filter_name", type=_FILTER_CHOICE, required=True)
@click.option("--scenario", type=click.Choice(["equicorrelated", "block"]),
              default="equicorrelated", show_default=True)
@click.option("--block-size", type=int, default=6, show_default=True)
@_common_options
def cell(dim, rho, filter_name, scenario, block_size, server, **options):
    """Run a single benchmark cell and print its statistics as JSON."""
    payload = {
        "dim": dim,
        "rho": rho,
        "filter": _FILTER_CLI_NAMES[filter_name],
        "scenario": scenario,
        "block_size": block_size,
        **_options_payload(**options),
    }
    data = _post("/cell", payload, server)
    click.echo(json.dumps(data, indent=2, sort_keys=True))


@main.command()
@click.option("--k", "object_counts", type=int, multiple=True,
              default=(1, 3, 6, 9, 12), show_default=True,
              help="Object counts to sweep; dimension is k * block-size.")
@click.option("--block-size", type=int, default=6, show_default=True)
@click.option("--block-rho", type=float, default=0.5, show_default=True)
@click.option("--filter", "filter_names", type=_FILTER_CHOICE, multiple=True,
              default=("pf", "cpf-dirac"), show_default=True)
@click.option("--out", "out_dir", default=None, type=click.Path(file_okay=False),
              help="Write cells.csv/winprob.csv/heatmaps here.")
@click.option("--workers", type=int, default=1, show_default=True)
@_common_options
def blocks(object_counts, block_size, block_rho, filter_names, out_dir,
           workers, server, **options):
    """Scaling sweep over independently moving objects (block covariance)."""
    payload = {
        "dims": [k * block_size for k in object_counts],
        "rhos": [block_rho],
        "filters": [_FILTER_CLI_NAMES[f] for f in filter_names],
        "scenario": "block",
        "block_size": block_size,
        "block_rho": block_rho,
        "workers": workers,
        **_options_payload(**options),
    }
    data = _post("/grid", payload, server)
    _echo_cells(data["cells"])
    if out_dir is not None:
        _write_artifacts(data["artifacts"], out_dir)


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
def serve(host, port):
    """Run the benchmark service with uvicorn."""
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=host, port=port)


if __name__ == "__main__":
    main()
