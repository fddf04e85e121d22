"""Bootstrap particle filter and its dimension-recursive variant.

Both filters share the same proposal: process noise is drawn from its
standard-normal prior (per time step for the PF, per coordinate for the
CPF), so every weight update reduces to a likelihood ratio and the
proposal-correction factor is identically one.

The PF advances a step in one shot: propagate, re-weight by the full
likelihood, resample when the effective sample size drops below the
configured fraction.

The CPF splits the same update into D + 1 stages. The time update folds
the new measurement into the weights through the empty-prefix partial
likelihood, without drawing any noise. Each dimension update then samples
one noise coordinate and multiplies the weights by the ratio of partial
likelihoods at the extended and previous prefix, optionally resampling in
between. The intermediate partials cancel telescopically, so with
intra-step resampling disabled the completed step reproduces the PF's
weights exactly, whichever partial-likelihood provider is used; with it
enabled, unpromising particles are discarded before their remaining
coordinates are ever sampled.

Every step function is pure: it returns a fresh FilterState and never
mutates its inputs. Per-particle weight arithmetic never produces NaN; a
particle whose weight hits exact zero stays at zero until resampled away.
If an update zeroes out the entire ensemble the update is reverted, a
DegenerateEnsembleWarning is emitted, and the step is counted as
degenerate instead of aborting the run.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np

from .sampling import (
    LOG_ZERO,
    DegenerateEnsembleError,
    DegenerateEnsembleWarning,
    RESAMPLERS,
    SeedSpec,
    WeightedParticles,
    effective_sample_size,
    normalize_log_weights,
)
from .ssm import StateSpaceModel, pad_noise

# Stream-path tags appended to a step's SeedSpec.
_NOISE = 0
_RESAMPLE = 1
_INTRA = 2
_ORDER = 3

PARTIAL_KINDS = ("exact", "dirac")


@dataclass(frozen=True)
class FilterConfig:
    """Knobs shared by both filters.

    ``ess_fraction`` is the resampling threshold: resample whenever
    ESS < ess_fraction * N. Setting it to 1.0 resamples after every
    informative update. ``dimension_order`` is "identity", "random"
    (a fresh permutation each step), or an explicit permutation; the
    remaining CPF-only fields are ignored by the PF.
    """

    n_particles: int
    ess_fraction: float = 0.5
    resampler: str = "systematic"
    dimension_order: str | tuple[int, ...] = "identity"
    intra_step_resampling: bool = True
    partial_kind: str = "dirac"

    def __post_init__(self):
        if self.n_particles < 1:
            raise ValueError("n_particles must be >= 1")
        if not 0.0 < self.ess_fraction <= 1.0:
            raise ValueError("ess_fraction must lie in (0, 1]")
        if self.resampler not in RESAMPLERS:
            raise ValueError(f"unknown resampler {self.resampler!r}")
        if self.partial_kind not in PARTIAL_KINDS:
            raise ValueError(f"unknown partial_kind {self.partial_kind!r}")
        order = self.dimension_order
        if isinstance(order, str):
            if order not in ("identity", "random"):
                raise ValueError(f"unknown dimension_order {order!r}")
        else:
            order = tuple(int(i) for i in order)
            if sorted(order) != list(range(len(order))):
                raise ValueError("dimension_order must be a permutation of 0..D-1")
            object.__setattr__(self, "dimension_order", order)


@dataclass(frozen=True)
class FilterState:
    """Ensemble plus step and likelihood-evaluation bookkeeping."""

    particles: WeightedParticles
    time_index: int = 0
    likelihood_eval_count: int = 0
    degenerate_steps: int = 0


def init_filter(model: StateSpaceModel, cfg: FilterConfig, seed: SeedSpec) -> FilterState:
    """Fresh ensemble drawn from the standard-normal initial belief."""
    n = cfg.n_particles
    states = seed.generator().standard_normal((n, model.state_dim))
    particles = WeightedParticles(states, np.full(n, -math.log(n)))
    return FilterState(particles)


def _reweight(
    particles: WeightedParticles, increment: np.ndarray
) -> tuple[WeightedParticles, bool]:
    """Apply a log-weight increment and renormalize.

    Zero-weight particles stay at zero regardless of the increment. If the
    whole ensemble lands on zero the increment is dropped (weights revert)
    and the update is flagged degenerate.
    """
    old = particles.log_weights
    alive = old > LOG_ZERO
    new = np.where(alive, old + increment, LOG_ZERO)
    try:
        return normalize_log_weights(replace(particles, log_weights=new)), False
    except DegenerateEnsembleError:
        warnings.warn(
            "weight update zeroed every particle; reverting to previous weights",
            DegenerateEnsembleWarning,
            stacklevel=3,
        )
        return particles, True


def _maybe_resample(
    particles: WeightedParticles, cfg: FilterConfig, seed: SeedSpec
) -> WeightedParticles:
    if effective_sample_size(particles) < cfg.ess_fraction * particles.n:
        return RESAMPLERS[cfg.resampler](particles, seed)
    return particles


def _resolve_order(
    cfg: FilterConfig, dim: int, seed: SeedSpec | None = None
) -> tuple[int, ...]:
    order = cfg.dimension_order
    if order == "identity":
        return tuple(range(dim))
    if order == "random":
        if seed is None:
            raise ValueError("random dimension order needs a seed")
        return tuple(seed.child(_ORDER).generator().permutation(dim))
    if len(order) != dim:
        raise ValueError(f"dimension_order has length {len(order)}, expected {dim}")
    return order


def pf_step(
    state: FilterState,
    model: StateSpaceModel,
    y: np.ndarray,
    cfg: FilterConfig,
    seed: SeedSpec,
    noise: np.ndarray | None = None,
) -> FilterState:
    """One bootstrap-filter step: propagate, re-weight, resample on demand.

    ``noise`` overrides the prior draw with a recorded (N, D) block, which
    is how the shared-stream comparison against the CPF is driven.
    """
    particles = state.particles
    if particles.prefix_values is not None:
        raise ValueError("ensemble carries an unabsorbed noise prefix")
    n, dim = particles.n, model.state_dim
    if noise is None:
        noise = seed.child(_NOISE).generator().standard_normal((n, dim))
    else:
        noise = np.asarray(noise, dtype=float)
        if noise.shape != (n, dim):
            raise ValueError(f"noise must have shape {(n, dim)}")
    moved = WeightedParticles(model.propagate(particles.states, noise), particles.log_weights)
    increment = model.log_likelihood(y, moved.states)
    reweighted, degenerate = _reweight(moved, increment)
    final = _maybe_resample(reweighted, cfg, seed.child(_RESAMPLE))
    return FilterState(
        particles=final,
        time_index=state.time_index + 1,
        likelihood_eval_count=state.likelihood_eval_count + n,
        degenerate_steps=state.degenerate_steps + int(degenerate),
    )


def cpf_time_update(
    state: FilterState,
    model: StateSpaceModel,
    y: np.ndarray,
    cfg: FilterConfig,
    seed: SeedSpec | None = None,
) -> FilterState:
    """Fold the new measurement into the weights at the empty prefix.

    No noise is drawn; each particle's weight is multiplied by the partial
    likelihood of the observation given its previous state alone. Without
    a seed the optional ESS-triggered resample is skipped.
    """
    particles = state.particles
    if particles.prefix_values is not None:
        raise ValueError("previous step's noise prefix was never absorbed")
    provider = model.partial_provider(cfg.partial_kind)
    n = particles.n
    empty = np.empty((n, 0))
    partial0 = np.asarray(provider.eval_batch(y, particles.states, empty, ()), dtype=float)
    staged = WeightedParticles(
        states=particles.states,
        log_weights=particles.log_weights,
        prefix_values=empty,
        prefix_dims=(),
        partial_cache=np.where(np.isfinite(partial0), partial0, LOG_ZERO),
    )
    reweighted, degenerate = _reweight(staged, partial0)
    if cfg.intra_step_resampling and seed is not None:
        reweighted = _maybe_resample(reweighted, cfg, seed.child(_INTRA, 0))
    return FilterState(
        particles=reweighted,
        time_index=state.time_index,
        likelihood_eval_count=state.likelihood_eval_count + n,
        degenerate_steps=state.degenerate_steps + int(degenerate),
    )


def _partial_increment(new: np.ndarray, cache: np.ndarray) -> np.ndarray:
    """Log-ratio of consecutive partial likelihoods, NaN-free.

    A particle whose new partial vanishes gets a zero weight; a particle
    whose cached value is already zero is dead, so its ratio is moot and
    pinned to 0 to keep the arithmetic finite.
    """
    if np.isnan(new).any():
        raise ValueError("partial log-likelihood returned NaN")
    both = np.isfinite(new) & np.isfinite(cache)
    out = np.where(new == LOG_ZERO, LOG_ZERO, 0.0)
    np.subtract(new, cache, out=out, where=both)
    return out


def cpf_dimension_update(
    state: FilterState,
    model: StateSpaceModel,
    y: np.ndarray,
    d: int,
    cfg: FilterConfig,
    seed: SeedSpec,
    coord: int | None = None,
    noise: np.ndarray | None = None,
) -> FilterState:
    """Sample noise coordinate ``d`` (1-based) and re-weight by the ratio
    of partial likelihoods at the extended and previous prefix.

    With the prior as proposal the correction factor is one, so the ratio
    is the whole increment. ``coord`` names the state coordinate this
    update fills; by default it is position d-1 of the configured order.
    ``noise`` overrides the (N,) prior draw for shared-stream comparisons.
    """
    particles = state.particles
    if particles.prefix_values is None:
        raise ValueError("dimension update before time update")
    if particles.prefix_length != d - 1:
        raise ValueError(
            f"update {d} expects prefix length {d - 1}, found {particles.prefix_length}"
        )
    n, dim = particles.n, model.state_dim
    if not 1 <= d <= dim:
        raise ValueError(f"dimension index {d} outside 1..{dim}")
    if coord is None:
        coord = _resolve_order(cfg, dim)[d - 1]
    if coord in particles.prefix_dims:
        raise ValueError(f"coordinate {coord} already filled")
    if noise is None:
        noise = seed.child(_NOISE, d).generator().standard_normal(n)
    else:
        noise = np.asarray(noise, dtype=float).reshape(n)

    values = np.column_stack([particles.prefix_values, noise])
    dims = particles.prefix_dims + (int(coord),)
    provider = model.partial_provider(cfg.partial_kind)
    new_partial = np.asarray(provider.eval_batch(y, particles.states, values, dims), dtype=float)
    cache = particles.partial_cache
    if cache is None:
        raise ValueError("dimension update requires the partial cache set by the time update")
    increment = _partial_increment(new_partial, cache)
    staged = WeightedParticles(
        states=particles.states,
        log_weights=particles.log_weights,
        prefix_values=values,
        prefix_dims=dims,
        partial_cache=np.where(np.isfinite(new_partial), new_partial, cache),
    )
    reweighted, degenerate = _reweight(staged, increment)
    if cfg.intra_step_resampling:
        reweighted = _maybe_resample(reweighted, cfg, seed.child(_INTRA, d))
    return FilterState(
        particles=reweighted,
        time_index=state.time_index,
        likelihood_eval_count=state.likelihood_eval_count + n,
        degenerate_steps=state.degenerate_steps + int(degenerate),
    )


def cpf_step(
    state: FilterState,
    model: StateSpaceModel,
    y: np.ndarray,
    cfg: FilterConfig,
    seed: SeedSpec,
    noise: np.ndarray | None = None,
) -> FilterState:
    """One full CPF step: time update, D dimension updates, absorption.

    After the last coordinate the accumulated noise is pushed through the
    process map, the prefixes are cleared, and the ensemble goes through
    the same end-of-step ESS resampling gate as the PF (the between-step
    resample is part of the step, independent of intra_step_resampling).
    Costs exactly N * (D + 1) likelihood evaluations.
    """
    dim = model.state_dim
    order = _resolve_order(cfg, dim, seed)
    if noise is not None:
        noise = np.asarray(noise, dtype=float)
        if noise.shape != (state.particles.n, dim):
            raise ValueError(f"noise must have shape {(state.particles.n, dim)}")
    st = cpf_time_update(state, model, y, cfg, seed=seed)
    for idx, coord in enumerate(order, start=1):
        column = None if noise is None else noise[:, coord]
        st = cpf_dimension_update(st, model, y, idx, cfg, seed, coord=coord, noise=column)
    parts = st.particles
    full_noise = pad_noise(parts.prefix_values, parts.prefix_dims, dim)
    absorbed = WeightedParticles(
        model.propagate(parts.states, full_noise), parts.log_weights
    )
    final = _maybe_resample(absorbed, cfg, seed.child(_RESAMPLE))
    return FilterState(
        particles=final,
        time_index=state.time_index + 1,
        likelihood_eval_count=st.likelihood_eval_count,
        degenerate_steps=st.degenerate_steps,
    )


def estimate_mean(state: FilterState) -> np.ndarray:
    """Weighted posterior-mean estimate of the current state."""
    particles = state.particles
    return particles.weights() @ particles.states


@dataclass(frozen=True)
class FilterRun:
    """Posterior-mean trajectory plus the final filter state."""

    estimates: np.ndarray
    final_state: FilterState


def run_filter(
    model: StateSpaceModel,
    observations: np.ndarray,
    cfg: FilterConfig,
    seed: SeedSpec,
    algorithm: str = "pf",
) -> FilterRun:
    """Drive a filter over an observation sequence.

    ``algorithm`` is "pf" or "cpf". Initialization and each step consume
    disjoint child streams of ``seed``, so runs are reproducible under any
    scheduling.
    """
    if algorithm not in ("pf", "cpf"):
        raise ValueError(f"unknown algorithm {algorithm!r}")
    step = pf_step if algorithm == "pf" else cpf_step
    observations = np.atleast_2d(np.asarray(observations, dtype=float))
    state = init_filter(model, cfg, seed.child(0))
    estimates = np.empty((observations.shape[0], model.state_dim))
    for t, y in enumerate(observations):
        state = step(state, model, y, cfg, seed.child(1, t))
        estimates[t] = estimate_mean(state)
    return FilterRun(estimates=estimates, final_state=state)
