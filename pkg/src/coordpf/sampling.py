"""Random-number streams, log-weight bookkeeping, and resampling.

All weights are carried as natural logarithms. A weight of exactly zero is
represented by the sentinel ``LOG_ZERO`` (``-inf``); any arithmetic that
would produce a NaN is a contract violation, never a legitimate state.

Randomness is drawn from counter-based Philox streams keyed by a
``SeedSpec``: a master seed plus an integer stream path. Identical
(master_seed, stream_path) pairs reproduce identical streams no matter in
which order, or on how many workers, they are consumed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

LOG_ZERO = -math.inf

# Tolerance on |logsumexp| used when an operation requires normalized weights.
_NORMALIZED_ATOL = 1e-8


class DegenerateEnsembleError(RuntimeError):
    """Every particle in the ensemble carries zero weight."""


class DegenerateEnsembleWarning(UserWarning):
    """A weight update zeroed out the whole ensemble and was reverted."""


@dataclass(frozen=True)
class SeedSpec:
    """Key for a deterministic random stream.

    ``stream_path`` is a tuple of small non-negative integers identifying
    where in the experiment hierarchy the stream lives (cell, run, time
    step, ...). Child streams are derived by appending path elements, so
    any two distinct paths yield statistically independent streams.
    """

    master_seed: int
    stream_path: tuple[int, ...] = ()

    def __post_init__(self):
        if not 0 <= self.master_seed < 2**64:
            raise ValueError("master_seed must fit in 64 unsigned bits")
        path = tuple(int(i) for i in self.stream_path)
        if any(i < 0 or i >= 2**32 for i in path):
            raise ValueError("stream_path elements must fit in 32 unsigned bits")
        object.__setattr__(self, "stream_path", path)

    def child(self, *indices: int) -> "SeedSpec":
        """Derive the sub-stream at the given path suffix."""
        return replace(self, stream_path=self.stream_path + tuple(indices))

    def generator(self) -> np.random.Generator:
        """Fresh counter-based generator positioned at the stream's origin."""
        seq = np.random.SeedSequence(
            entropy=self.master_seed, spawn_key=self.stream_path
        )
        return np.random.Generator(np.random.Philox(seq))


def draw_standard_normal(seed: SeedSpec, count: int) -> np.ndarray:
    """Draw ``count`` independent N(0, 1) variates from the stream."""
    if count < 1:
        raise ValueError("count must be >= 1")
    return seed.generator().standard_normal(count)


def logsumexp(values: np.ndarray) -> float:
    """Stable log(sum(exp(values))); returns LOG_ZERO for an all--inf input."""
    values = np.asarray(values, dtype=float)
    m = np.max(values)
    if m == LOG_ZERO:
        return LOG_ZERO
    return float(m + np.log(np.sum(np.exp(values - m))))


@dataclass(frozen=True)
class WeightedParticles:
    """A particle ensemble with log-weights.

    ``states`` has shape (N, D) and ``log_weights`` shape (N,). While a
    dimension-recursive step is in flight the ensemble additionally carries
    the current step's noise prefixes: ``prefix_values`` holds the filled
    noise coordinates, one row per particle, and ``prefix_dims`` names the
    state coordinates those columns belong to (shared by all particles).
    ``partial_cache`` memoizes each particle's most recent finite partial
    log-likelihood so the next dimension update only pays one evaluation.
    """

    states: np.ndarray
    log_weights: np.ndarray
    prefix_values: np.ndarray | None = None
    prefix_dims: tuple[int, ...] | None = None
    partial_cache: np.ndarray | None = None

    def __post_init__(self):
        states = np.atleast_2d(np.asarray(self.states, dtype=float))
        log_weights = np.asarray(self.log_weights, dtype=float)
        if states.shape[0] != log_weights.shape[0] or states.shape[0] < 1:
            raise ValueError("states and log_weights must share a length N >= 1")
        if np.isnan(states).any() or np.isnan(log_weights).any():
            raise ValueError("NaN entries are not permitted in an ensemble")
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "log_weights", log_weights)
        if self.prefix_values is not None:
            pv = np.asarray(self.prefix_values, dtype=float)
            dims = tuple(self.prefix_dims or ())
            if pv.ndim != 2 or pv.shape != (states.shape[0], len(dims)):
                raise ValueError("prefix_values must be (N, d) matching prefix_dims")
            object.__setattr__(self, "prefix_values", pv)
            object.__setattr__(self, "prefix_dims", dims)

    @property
    def n(self) -> int:
        return self.states.shape[0]

    @property
    def state_dim(self) -> int:
        return self.states.shape[1]

    @property
    def prefix_length(self) -> int:
        return 0 if self.prefix_values is None else self.prefix_values.shape[1]

    def noise_prefixes(self):
        """Per-particle prefix view (list of NoisePrefix); None when no step is in flight."""
        if self.prefix_values is None:
            return None
        from .ssm import NoisePrefix

        return [
            NoisePrefix(filled=row.copy(), dims=self.prefix_dims)
            for row in self.prefix_values
        ]

    def weights(self) -> np.ndarray:
        """Linear-domain weights; exact zeros for LOG_ZERO entries."""
        return np.exp(self.log_weights)


def normalize_log_weights(p: WeightedParticles) -> WeightedParticles:
    """Rescale log-weights so that logsumexp(log_weights) == 0.

    Raises DegenerateEnsembleError when every weight is LOG_ZERO.
    """
    total = logsumexp(p.log_weights)
    if total == LOG_ZERO:
        raise DegenerateEnsembleError("all particle weights are zero")
    return replace(p, log_weights=p.log_weights - total)


def _require_normalized(p: WeightedParticles, op: str) -> None:
    total = logsumexp(p.log_weights)
    if not abs(total) <= _NORMALIZED_ATOL:
        raise ValueError(f"{op} requires normalized weights (logsumexp={total:g})")


def effective_sample_size(p: WeightedParticles) -> float:
    """ESS = 1 / sum(w_i^2) for normalized weights; lies in [1, N]."""
    _require_normalized(p, "effective_sample_size")
    return float(np.exp(-logsumexp(2.0 * p.log_weights)))


def _take(p: WeightedParticles, idx: np.ndarray) -> WeightedParticles:
    """Select ancestors ``idx`` and reset to uniform weights."""
    n = idx.size
    uniform = np.full(n, -math.log(n))
    return WeightedParticles(
        states=p.states[idx],
        log_weights=uniform,
        prefix_values=None if p.prefix_values is None else p.prefix_values[idx],
        prefix_dims=p.prefix_dims,
        partial_cache=None if p.partial_cache is None else p.partial_cache[idx],
    )


def multinomial_resample(
    p: WeightedParticles, seed: SeedSpec, count: int | None = None
) -> WeightedParticles:
    """Redraw ``count`` particles (default N) with replacement, each with
    probability equal to its weight. Noise prefixes travel with their
    particles; output weights are uniform."""
    _require_normalized(p, "multinomial_resample")
    cdf = np.cumsum(p.weights())
    cdf[-1] = 1.0
    u = seed.generator().random(p.n if count is None else count)
    return _take(p, np.searchsorted(cdf, u, side="right"))


def systematic_resample(
    p: WeightedParticles, seed: SeedSpec, count: int | None = None
) -> WeightedParticles:
    """Low-variance resampling on a jittered uniform grid.

    Each particle's copy count is floor(count * w_i) or ceil(count * w_i).
    """
    _require_normalized(p, "systematic_resample")
    n = p.n if count is None else count
    cdf = np.cumsum(p.weights())
    cdf[-1] = 1.0
    u = (seed.generator().random() + np.arange(n)) / n
    return _take(p, np.searchsorted(cdf, u, side="right"))


RESAMPLERS = {
    "multinomial": multinomial_resample,
    "systematic": systematic_resample,
}
