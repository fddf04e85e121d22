"""Benchmark harness: grid sweeps, RMSE statistics, win probabilities.

A sweep runs every (dimension, correlation, filter) cell of an
ExperimentConfig. Each cell simulates ``runs`` independent ground-truth
trajectories, filters them, and aggregates the per-run RMSE (computed over
time steps within a run; mean and standard deviation taken across runs).
Filters are compared per cell by fitting a Gaussian to each filter's RMSE
statistics and computing the probability that one error is below the other.

Budget parity equalizes likelihood evaluations between the filters by
giving the coordinate filter n_pf / D particles (floored, at least two).
The coordinate filter actually spends N * (D + 1) evaluations per step,
one extra per particle for its time update; parity follows the N * D
convention and the honest counts are reported in the cell statistics.

Every cell derives its simulation and filtering streams from the master
seed and the cell's own (dimension, correlation, run, filter) coordinates,
so a sweep is reproducible cell by cell under any parallel schedule, and
the two filters of a pair see identical ground-truth data.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from itertools import permutations

import numpy as np
import tomli

from .filters import FilterConfig, run_filter
from .linear_gaussian import LinearGaussianModel, block_covariance, build_covariance
from .sampling import RESAMPLERS, SeedSpec

FILTER_IDS = ("pf", "cpf_exact", "cpf_dirac")
SCENARIOS = ("equicorrelated", "block")

# (algorithm, partial kind) per public filter id
_FILTER_ALGOS = {
    "pf": ("pf", "dirac"),
    "cpf_exact": ("cpf", "exact"),
    "cpf_dirac": ("cpf", "dirac"),
}

# stream-path roots under the master seed
_SIM = 0
_FILT = 1

DEFAULT_DIMS = (1, 2, 5, 10, 15, 20, 25)
DEFAULT_RHOS = (0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)


@dataclass(frozen=True)
class ExperimentConfig:
    """Full description of a benchmark sweep; a pure value object."""

    dims: tuple[int, ...] = DEFAULT_DIMS
    rhos: tuple[float, ...] = DEFAULT_RHOS
    filters: tuple[str, ...] = ("pf", "cpf_exact", "cpf_dirac")
    n_pf: int = 2000
    budget_parity: bool = True
    steps: int = 100
    runs: int = 10
    master_seed: int = 0
    scenario: str = "equicorrelated"
    block_size: int = 6
    block_rho: float = 0.5
    ess_fraction: float = 0.5
    resampler: str = "systematic"
    intra_step_resampling: bool = True
    dimension_order: str = "identity"

    def __post_init__(self):
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        object.__setattr__(self, "rhos", tuple(float(r) for r in self.rhos))
        object.__setattr__(self, "filters", tuple(str(f) for f in self.filters))
        if not self.dims or any(d < 1 for d in self.dims):
            raise ValueError("dims must be a non-empty list of positive integers")
        if not self.rhos or any(not 0.0 <= r < 1.0 for r in self.rhos):
            raise ValueError("rhos must be a non-empty list of values in [0, 1)")
        if not self.filters or any(f not in FILTER_IDS for f in self.filters):
            raise ValueError(f"filters must be a non-empty subset of {FILTER_IDS}")
        if len(set(self.filters)) != len(self.filters):
            raise ValueError("filters must not repeat")
        if self.steps < 1:
            raise ValueError("steps must be >= 1")
        if self.runs < 2:
            raise ValueError("runs must be >= 2 (the error variance needs it)")
        if self.n_pf < 1:
            raise ValueError("n_pf must be >= 1")
        if self.budget_parity and self.n_pf < 2 * max(self.dims):
            raise ValueError(
                "with budget parity n_pf must be at least 2 * max(dims) "
                f"({2 * max(self.dims)}), got {self.n_pf}"
            )
        if self.scenario not in SCENARIOS:
            raise ValueError(f"scenario must be one of {SCENARIOS}")
        if self.scenario == "block":
            if self.block_size < 1:
                raise ValueError("block_size must be >= 1")
            bad = [d for d in self.dims if d % self.block_size]
            if bad:
                raise ValueError(
                    f"block scenario needs dims divisible by block_size; offending {bad}"
                )
            if not 0.0 <= self.block_rho < 1.0:
                raise ValueError("block_rho must lie in [0, 1)")
        if not 0.0 < self.ess_fraction <= 1.0:
            raise ValueError("ess_fraction must lie in (0, 1]")
        if self.resampler not in RESAMPLERS:
            raise ValueError(f"unknown resampler {self.resampler!r}")
        if self.dimension_order not in ("identity", "random"):
            raise ValueError("dimension_order must be 'identity' or 'random'")

    def particles_for(self, filter_id: str, dim: int) -> int:
        """Particle budget for one filter at one dimension."""
        if filter_id == "pf" or not self.budget_parity:
            return self.n_pf
        return max(2, self.n_pf // dim)

    def filter_config(self, filter_id: str, dim: int) -> FilterConfig:
        _, partial_kind = _FILTER_ALGOS[filter_id]
        return FilterConfig(
            n_particles=self.particles_for(filter_id, dim),
            ess_fraction=self.ess_fraction,
            resampler=self.resampler,
            dimension_order=self.dimension_order,
            intra_step_resampling=self.intra_step_resampling,
            partial_kind=partial_kind,
        )


def load_config(path) -> ExperimentConfig:
    """Parse a flat TOML config file; unknown keys are an error."""
    with open(path, "rb") as fh:
        raw = tomli.load(fh)
    known = {f.name for f in fields(ExperimentConfig)}
    unknown = sorted(set(raw) - known)
    if unknown:
        raise ValueError(f"unknown config keys: {', '.join(unknown)}")
    return ExperimentConfig(**raw)


@dataclass(frozen=True)
class CellStatistics:
    """Aggregated outcome of one (scenario, dim, rho, filter) cell."""

    scenario: str
    dim: int
    rho: float
    filter_id: str
    n_particles: int
    steps: int
    runs: int
    rmse_mean: float
    rmse_std: float
    rmse_per_run: tuple[float, ...]
    degenerate_steps: int
    likelihood_evals: int
    seed: int


@dataclass(frozen=True)
class WinProbability:
    dim: int
    rho: float
    filter_a: str
    filter_b: str
    p_a_less_b: float


@dataclass(frozen=True)
class GridResult:
    config: ExperimentConfig
    cells: tuple[CellStatistics, ...]
    win_probabilities: tuple[WinProbability, ...] = field(default_factory=tuple)


def rmse(estimates: np.ndarray, truth: np.ndarray) -> float:
    """Root mean, over time steps, of the squared Euclidean state error."""
    estimates = np.atleast_2d(np.asarray(estimates, dtype=float))
    truth = np.atleast_2d(np.asarray(truth, dtype=float))
    if estimates.shape != truth.shape:
        raise ValueError(
            f"estimate/truth shape mismatch: {estimates.shape} vs {truth.shape}"
        )
    return float(np.sqrt(np.mean(np.sum((estimates - truth) ** 2, axis=1))))


def prob_smaller_error(a: CellStatistics, b: CellStatistics) -> float:
    """P(error_a < error_b) under independent Gaussian fits to the two
    filters' RMSE statistics; a step function when both spreads are zero."""
    var = a.rmse_std**2 + b.rmse_std**2
    if var == 0.0:
        if a.rmse_mean < b.rmse_mean:
            return 1.0
        if a.rmse_mean > b.rmse_mean:
            return 0.0
        return 0.5
    z = (b.rmse_mean - a.rmse_mean) / math.sqrt(var)
    return 0.5 * (1.0 + math.erf(z / math.sqrt(2.0)))


def _rho_key(rho: float) -> int:
    return int(round(rho * 10**6))


def _build_model(cfg: ExperimentConfig, dim: int, rho: float) -> LinearGaussianModel:
    if cfg.scenario == "block":
        num_blocks, rem = divmod(dim, cfg.block_size)
        if rem:
            raise ValueError(f"dim {dim} is not a multiple of block_size {cfg.block_size}")
        return LinearGaussianModel(block_covariance(num_blocks, cfg.block_size, rho))
    return LinearGaussianModel(build_covariance(dim, rho))


def block_scaling_scenario(cfg: ExperimentConfig, num_objects: int) -> LinearGaussianModel:
    """Model for tracking ``num_objects`` independent block_size-dof objects:
    block-diagonal observation covariance, zero correlation across blocks."""
    if num_objects < 1:
        raise ValueError("num_objects must be >= 1")
    return LinearGaussianModel(
        block_covariance(num_objects, cfg.block_size, cfg.block_rho)
    )


def run_cell(cfg: ExperimentConfig, dim: int, rho: float, filter_id: str) -> CellStatistics:
    """Simulate, filter, and aggregate one cell of the grid.

    Ground truth for run r depends only on (master_seed, dim, rho, r), so
    every filter of the cell sees the same data. Degenerate steps are kept
    in the statistics with their full RMSE, never dropped.
    """
    if filter_id not in _FILTER_ALGOS:
        raise ValueError(f"unknown filter {filter_id!r}")
    model = _build_model(cfg, dim, rho)
    algorithm, _ = _FILTER_ALGOS[filter_id]
    filter_cfg = cfg.filter_config(filter_id, dim)
    rho_key = _rho_key(rho)
    filter_enum = FILTER_IDS.index(filter_id)

    per_run = []
    degenerate = 0
    evals = 0
    for r in range(cfg.runs):
        sim_seed = SeedSpec(cfg.master_seed, (_SIM, dim, rho_key, r))
        truth, observations = model.simulate(cfg.steps, None, sim_seed)
        filt_seed = SeedSpec(cfg.master_seed, (_FILT, dim, rho_key, r, filter_enum))
        run = run_filter(model, observations, filter_cfg, filt_seed, algorithm)
        per_run.append(rmse(run.estimates, truth))
        degenerate += run.final_state.degenerate_steps
        evals += run.final_state.likelihood_eval_count

    per_run_arr = np.asarray(per_run)
    return CellStatistics(
        scenario=cfg.scenario,
        dim=dim,
        rho=rho,
        filter_id=filter_id,
        n_particles=filter_cfg.n_particles,
        steps=cfg.steps,
        runs=cfg.runs,
        rmse_mean=float(per_run_arr.mean()),
        rmse_std=float(per_run_arr.std(ddof=1)),
        rmse_per_run=tuple(per_run),
        degenerate_steps=degenerate,
        likelihood_evals=evals,
        seed=cfg.master_seed,
    )


def _run_cell_args(args) -> CellStatistics:
    return run_cell(*args)


def grid_sweep(cfg: ExperimentConfig, workers: int = 1) -> GridResult:
    """Run every (dim, rho, filter) cell and fill the win-probability table.

    Cells are independent; with ``workers`` > 1 they run in a process pool.
    Results are assembled in deterministic grid order regardless of
    completion order, so the output is a pure function of the config.
    """
    tasks = [
        (cfg, dim, rho, filter_id)
        for dim in cfg.dims
        for rho in cfg.rhos
        for filter_id in cfg.filters
    ]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            cells = tuple(pool.map(_run_cell_args, tasks))
    else:
        cells = tuple(_run_cell_args(t) for t in tasks)

    by_cell = {(c.dim, c.rho, c.filter_id): c for c in cells}
    wins = []
    for dim in cfg.dims:
        for rho in cfg.rhos:
            for fa, fb in permutations(cfg.filters, 2):
                wins.append(
                    WinProbability(
                        dim=dim,
                        rho=rho,
                        filter_a=fa,
                        filter_b=fb,
                        p_a_less_b=prob_smaller_error(
                            by_cell[(dim, rho, fa)], by_cell[(dim, rho, fb)]
                        ),
                    )
                )
    return GridResult(config=cfg, cells=cells, win_probabilities=tuple(wins))
