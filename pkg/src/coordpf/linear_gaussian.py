"""Random-walk linear-Gaussian system with correlated observation noise.

The process is x_t = x_{t-1} + v_t with v_t ~ N(0, I); the observation is
y_t ~ N(x_t, Q). Q is either the equicorrelated matrix Q(D, rho) with unit
diagonal and constant off-diagonal rho, whose spectrum is known in closed
form, or a block-diagonal composition of such matrices.

Because the process is additive, marginalizing any subset of the current
step's noise coordinates stays Gaussian: leaving coordinates U unsampled
just adds unit variance on the diagonal at U. That gives the closed-form
partial likelihood

    p(y | x_prev, v[dims]) = N(y | x_prev + pad(v), Q + diag(1_U)).

A Kalman filter over the same system serves as the exact posterior oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .sampling import SeedSpec
from .ssm import PartialLikelihoodProvider, StateSpaceModel, pad_noise

_LOG_2PI = math.log(2.0 * math.pi)


def gaussian_loglik(
    y: np.ndarray, means: np.ndarray, chol: np.ndarray, log_det: float
) -> np.ndarray:
    """log N(y | mean_i, C) for each row of ``means``, via the Cholesky of C."""
    means = np.asarray(means, dtype=float)
    batched = means.ndim == 2
    diff = np.atleast_2d(y - means)
    z = scipy.linalg.solve_triangular(chol, diff.T, lower=True, check_finite=False)
    quad = np.sum(z * z, axis=0)
    out = -0.5 * (chol.shape[0] * _LOG_2PI + log_det + quad)
    return out if batched else float(out[0])


class ObservationCovariance:
    """An SPD observation covariance with cached Cholesky factor.

    The factor is computed once and shared by simulation and density
    evaluation. When the spectrum is known a priori it is stored and used
    for the log-determinant; otherwise the determinant comes from the
    factor's diagonal.
    """

    def __init__(self, matrix: np.ndarray, eigenvalues: np.ndarray | None = None):
        matrix = np.asarray(matrix, dtype=float)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ValueError("covariance must be a square matrix")
        if not np.allclose(matrix, matrix.T, atol=1e-12):
            raise ValueError("covariance must be symmetric")
        self.matrix = matrix
        self.dim = matrix.shape[0]
        try:
            self.cholesky = np.linalg.cholesky(matrix)
        except np.linalg.LinAlgError as exc:
            raise ValueError("covariance must be positive definite") from exc
        if eigenvalues is not None:
            self.eigenvalues = np.asarray(eigenvalues, dtype=float)
            self.log_det = float(np.sum(np.log(self.eigenvalues)))
        else:
            self.eigenvalues = None
            self.log_det = float(2.0 * np.sum(np.log(np.diag(self.cholesky))))


class CorrelatedCovariance(ObservationCovariance):
    """Equicorrelated covariance: unit diagonal, constant off-diagonal rho.

    Eigenvalues are exactly 1 - rho with multiplicity D - 1 plus the single
    spike (D - 1) rho + 1, stored bulk-first.
    """

    def __init__(self, dim: int, rho: float):
        if dim < 1:
            raise ValueError("dimension must be >= 1")
        if not 0.0 <= rho < 1.0:
            raise ValueError(
                f"rho must lie in [0, 1); got {rho!r} (rho = 1 is singular)"
            )
        matrix = np.full((dim, dim), float(rho))
        np.fill_diagonal(matrix, 1.0)
        eigenvalues = np.concatenate(
            [np.full(dim - 1, 1.0 - rho), [(dim - 1) * rho + 1.0]]
        )
        super().__init__(matrix, eigenvalues=eigenvalues)
        self.rho = float(rho)


def build_covariance(dim: int, rho: float) -> CorrelatedCovariance:
    """The equicorrelated observation covariance Q(dim, rho)."""
    return CorrelatedCovariance(dim, rho)


def block_covariance(
    num_blocks: int, block_size: int, rho: float
) -> ObservationCovariance:
    """Block-diagonal covariance: ``num_blocks`` independent equicorrelated
    blocks of size ``block_size`` with within-block correlation ``rho``."""
    if num_blocks < 1 or block_size < 1:
        raise ValueError("num_blocks and block_size must be >= 1")
    block = CorrelatedCovariance(block_size, rho)
    matrix = scipy.linalg.block_diag(*([block.matrix] * num_blocks))
    eigenvalues = np.tile(block.eigenvalues, num_blocks)
    return ObservationCovariance(matrix, eigenvalues=eigenvalues)


class ExactLinearGaussianPartial(PartialLikelihoodProvider):
    """Closed-form partial likelihood for the additive random-walk model.

    Cholesky factors of Q + diag(1_unfilled) are cached per filled-coordinate
    set; with a fixed exploration order a time step touches only D + 1 sets.
    """

    kind = "exact"

    def __init__(self, covariance: ObservationCovariance, max_cached: int = 512):
        self._cov = covariance
        self._cache: dict[tuple[int, ...], tuple[np.ndarray, float]] = {}
        self._max_cached = max(max_cached, 2 * covariance.dim + 2)

    def _factor(self, dims: tuple[int, ...]) -> tuple[np.ndarray, float]:
        key = tuple(sorted(dims))
        if len(key) == self._cov.dim:
            # Fully filled: reuse the model's own factor so the value agrees
            # bit-exactly with the full likelihood.
            return self._cov.cholesky, self._cov.log_det
        hit = self._cache.get(key)
        if hit is None:
            unfilled = np.ones(self._cov.dim)
            unfilled[list(key)] = 0.0
            matrix = self._cov.matrix + np.diag(unfilled)
            chol = np.linalg.cholesky(matrix)
            log_det = float(2.0 * np.sum(np.log(np.diag(chol))))
            hit = (chol, log_det)
            if len(self._cache) >= self._max_cached:
                self._cache.clear()
            self._cache[key] = hit
        return hit

    def eval_batch(self, y, x_prev, prefix_values, dims):
        means = x_prev + pad_noise(prefix_values, dims, self._cov.dim)
        chol, log_det = self._factor(dims)
        return gaussian_loglik(y, means, chol, log_det)


class LinearGaussianModel(StateSpaceModel):
    """x_t = x_{t-1} + v_t, y_t ~ N(x_t, Q); observation dim equals state dim."""

    def __init__(self, covariance: ObservationCovariance):
        self.covariance = covariance

        def process(x, v):
            return x + v

        def loglik(y, x):
            return gaussian_loglik(y, x, covariance.cholesky, covariance.log_det)

        super().__init__(
            state_dim=covariance.dim,
            obs_dim=covariance.dim,
            process=process,
            loglik=loglik,
            exact_partial=ExactLinearGaussianPartial(covariance),
        )

    @classmethod
    def equicorrelated(cls, dim: int, rho: float) -> "LinearGaussianModel":
        return cls(build_covariance(dim, rho))

    def simulate(
        self, num_steps: int, x0: np.ndarray | None, seed: SeedSpec
    ) -> tuple[np.ndarray, np.ndarray]:
        """Ground-truth trajectory and observations for t = 1..num_steps.

        Observation noise is drawn through the Cholesky factor of Q.
        Returns (states, observations), each of shape (num_steps, D).
        """
        if num_steps < 1:
            raise ValueError("num_steps must be >= 1")
        dim = self.state_dim
        x0 = np.zeros(dim) if x0 is None else np.asarray(x0, dtype=float)
        process_noise = seed.child(0).generator().standard_normal((num_steps, dim))
        obs_noise = seed.child(1).generator().standard_normal((num_steps, dim))
        states = x0 + np.cumsum(process_noise, axis=0)
        observations = states + obs_noise @ self.covariance.cholesky.T
        return states, observations


def simulate(
    model: LinearGaussianModel, num_steps: int, x0, seed: SeedSpec
) -> tuple[np.ndarray, np.ndarray]:
    return model.simulate(num_steps, x0, seed)


@dataclass(frozen=True)
class KalmanBelief:
    """Gaussian belief over the current state."""

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "mean", np.asarray(self.mean, dtype=float))
        object.__setattr__(self, "cov", np.asarray(self.cov, dtype=float))
        if not np.allclose(self.cov, self.cov.T, atol=1e-12):
            raise ValueError("belief covariance must be symmetric")


def initial_belief(dim: int) -> KalmanBelief:
    """Standard-normal belief, the filters' common starting point."""
    return KalmanBelief(np.zeros(dim), np.eye(dim))


def kalman_predict(belief: KalmanBelief) -> KalmanBelief:
    """Push the belief through the random walk: mean unchanged, plus-I covariance."""
    return KalmanBelief(belief.mean, belief.cov + np.eye(belief.mean.size))


def kalman_update(
    belief: KalmanBelief, y: np.ndarray, model: LinearGaussianModel
) -> KalmanBelief:
    """Condition a predicted belief on y ~ N(x, Q).

    A zero predicted covariance gives zero gain: the measurement is
    ignored. The posterior covariance is symmetrized to stop round-off
    drift over long runs.
    """
    y = np.asarray(y, dtype=float)
    innovation_cov = belief.cov + model.covariance.matrix
    try:
        factor = scipy.linalg.cho_factor(innovation_cov)
    except scipy.linalg.LinAlgError as exc:
        raise ArithmeticError("innovation covariance is numerically singular") from exc
    gain = scipy.linalg.cho_solve(factor, belief.cov).T
    mean = belief.mean + gain @ (y - belief.mean)
    cov = (np.eye(model.state_dim) - gain) @ belief.cov
    cov = 0.5 * (cov + cov.T)
    return KalmanBelief(mean, cov)


def kalman_step(
    belief: KalmanBelief, y: np.ndarray, model: LinearGaussianModel
) -> KalmanBelief:
    """One predict-update cycle of the exact posterior recursion."""
    return kalman_update(kalman_predict(belief), y, model)


def kalman_filter(
    model: LinearGaussianModel,
    observations: np.ndarray,
    belief: KalmanBelief | None = None,
) -> tuple[np.ndarray, KalmanBelief]:
    """Run the oracle over an observation sequence; returns the posterior
    means, one row per time step, and the final belief."""
    observations = np.atleast_2d(np.asarray(observations, dtype=float))
    belief = initial_belief(model.state_dim) if belief is None else belief
    means = np.empty_like(observations)
    for t, y in enumerate(observations):
        belief = kalman_step(belief, y, model)
        means[t] = belief.mean
    return means, belief
