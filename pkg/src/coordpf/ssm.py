"""Noise-driven state-space models and partial likelihoods.

A model is a pair of maps

    x_t = g(x_{t-1}, v_t)        process, driven by N(0, I) noise
    y_t ~ p(y_t | x_t)           measurement, exposed only as a log-density

together with a *partial* likelihood: the marginal density of the current
observation given only the first ``d`` coordinates of the current step's
process noise,

    p(y | x_prev, v[0:d]) = integral over the remaining D-d noise
    coordinates of p(y | g(x_prev, v)) under their standard-normal prior.

The dimension-recursive filter consumes partial likelihoods one coordinate
at a time. Most models cannot marginalize the remaining noise in closed
form; the Dirac provider below approximates the integral by pinning every
unsampled coordinate to zero, which is exact at d = D for any model.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np


@dataclass(frozen=True)
class NoisePrefix:
    """The first ``d`` coordinates of one time step's process noise.

    ``filled`` holds the already-sampled values; ``dims`` names the state
    coordinates they belong to, in the order they were sampled. ``dims``
    defaults to the identity order (coordinates 0..d-1). ``d == 0`` is the
    empty prefix used by the time update.
    """

    filled: np.ndarray = field(default_factory=lambda: np.empty(0))
    dims: tuple[int, ...] | None = None

    def __post_init__(self):
        filled = np.asarray(self.filled, dtype=float).reshape(-1)
        if not np.isfinite(filled).all():
            raise ValueError("noise prefix entries must be finite")
        dims = tuple(range(filled.size)) if self.dims is None else tuple(self.dims)
        if len(dims) != filled.size:
            raise ValueError("dims must name one coordinate per filled entry")
        if len(set(dims)) != len(dims):
            raise ValueError("dims must be distinct coordinates")
        object.__setattr__(self, "filled", filled)
        object.__setattr__(self, "dims", dims)

    @property
    def d(self) -> int:
        return self.filled.size


EMPTY_PREFIX = NoisePrefix()


def pad_noise(prefix_values: np.ndarray, dims: tuple[int, ...], state_dim: int) -> np.ndarray:
    """Place prefix columns at their coordinates, zeros elsewhere.

    ``prefix_values`` has shape (N, d); the result has shape (N, state_dim).
    """
    values = np.atleast_2d(np.asarray(prefix_values, dtype=float))
    out = np.zeros((values.shape[0], state_dim))
    if dims:
        out[:, list(dims)] = values
    return out


class PartialLikelihoodProvider:
    """Evaluates log p(y | x_prev, noise prefix).

    ``kind`` is "exact" when the remaining-noise integral is solved in
    closed form and "dirac" for the pin-to-zero approximation. At d = D
    both must reproduce the full likelihood of the propagated state
    bit-exactly.
    """

    kind: str = "dirac"

    def eval_batch(
        self,
        y: np.ndarray,
        x_prev: np.ndarray,
        prefix_values: np.ndarray,
        dims: tuple[int, ...],
    ) -> np.ndarray:
        """Vectorized evaluation: x_prev (N, D), prefix_values (N, d) -> (N,)."""
        raise NotImplementedError

    def eval(self, y: np.ndarray, x_prev: np.ndarray, prefix: NoisePrefix) -> float:
        """Single-particle evaluation."""
        out = self.eval_batch(
            np.asarray(y, dtype=float),
            np.atleast_2d(np.asarray(x_prev, dtype=float)),
            prefix.filled.reshape(1, -1),
            prefix.dims,
        )
        return float(out[0])


class DiracPartial(PartialLikelihoodProvider):
    """Partial likelihood with the unsampled noise pinned to exactly zero:

        log p(y | x_prev, v[0:d]) ~= log p(y | g(x_prev, pad(v[0:d], 0))).

    Applicable to any model; exact once the prefix covers every coordinate.
    """

    kind = "dirac"

    def __init__(self, model: "StateSpaceModel"):
        self._model = model

    def eval_batch(self, y, x_prev, prefix_values, dims):
        noise = pad_noise(prefix_values, dims, self._model.state_dim)
        propagated = self._model.process(x_prev, noise)
        return self._model.loglik(y, propagated)


class StateSpaceModel:
    """A noise-driven dynamical system with a log-density measurement model.

    ``process(x, v)`` must be a pure function accepting either a single
    state of shape (D,) or a batch of shape (N, D), broadcasting over the
    batch axis; likewise ``loglik(y, x)`` returns a scalar or an (N,)
    array of log-densities. Measurement noise never appears explicitly;
    models expose p(y | x) directly.
    """

    def __init__(
        self,
        state_dim: int,
        obs_dim: int,
        process: Callable[[np.ndarray, np.ndarray], np.ndarray],
        loglik: Callable[[np.ndarray, np.ndarray], np.ndarray],
        exact_partial: PartialLikelihoodProvider | None = None,
    ):
        if state_dim < 1 or obs_dim < 1:
            raise ValueError("state and observation dimensions must be >= 1")
        self.state_dim = int(state_dim)
        self.obs_dim = int(obs_dim)
        self.process = process
        self.loglik = loglik
        self._partials = {"dirac": DiracPartial(self)}
        if exact_partial is not None:
            self._partials["exact"] = exact_partial

    def propagate(self, x: np.ndarray, v: np.ndarray) -> np.ndarray:
        """Apply the process map g(x, v); pure and deterministic."""
        x = np.asarray(x, dtype=float)
        v = np.asarray(v, dtype=float)
        if x.shape[-1] != self.state_dim or v.shape[-1] != self.state_dim:
            raise ValueError(
                f"state/noise length must be {self.state_dim}, "
                f"got {x.shape[-1]} and {v.shape[-1]}"
            )
        return self.process(x, v)

    def log_likelihood(self, y: np.ndarray, x: np.ndarray) -> np.ndarray:
        """log p(y | x); LOG_ZERO marks an exactly-impossible observation."""
        y = np.asarray(y, dtype=float)
        x = np.asarray(x, dtype=float)
        if y.shape[-1] != self.obs_dim:
            raise ValueError(f"observation length must be {self.obs_dim}")
        if x.shape[-1] != self.state_dim:
            raise ValueError(f"state length must be {self.state_dim}")
        if not (np.isfinite(y).all() and np.isfinite(x).all()):
            raise ValueError("log_likelihood requires finite inputs")
        return self.loglik(y, x)

    def partial_provider(self, kind: str) -> PartialLikelihoodProvider:
        try:
            return self._partials[kind]
        except KeyError:
            raise ValueError(
                f"model has no {kind!r} partial likelihood "
                f"(available: {sorted(self._partials)})"
            ) from None

    def dirac_partial_loglik(
        self, y: np.ndarray, x_prev: np.ndarray, prefix: NoisePrefix
    ) -> float:
        """Dirac-approximate partial log-likelihood for one particle."""
        if prefix.d > self.state_dim:
            raise ValueError("prefix longer than the state dimension")
        return self._partials["dirac"].eval(y, x_prev, prefix)
