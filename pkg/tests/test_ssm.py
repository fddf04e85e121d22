"""Model abstraction: propagation, likelihoods, and Dirac partials."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coordpf.linear_gaussian import LinearGaussianModel
from coordpf.ssm import EMPTY_PREFIX, NoisePrefix, StateSpaceModel, pad_noise

LOG_2PI = math.log(2 * math.pi)


def quadratic_model(dim=1):
    """Toy nonlinear model: g(x, v) = x^2 + v, y ~ N(x, I)."""
    return StateSpaceModel(
        state_dim=dim,
        obs_dim=dim,
        process=lambda x, v: x**2 + v,
        loglik=lambda y, x: -0.5 * np.sum((y - x) ** 2, axis=-1) - dim / 2 * LOG_2PI,
    )


class TestPropagate:
    def test_random_walk_adds_noise(self):
        m = LinearGaussianModel.equicorrelated(2, 0.0)
        np.testing.assert_array_equal(
            m.propagate(np.array([0.0, 0.0]), np.array([1.0, 0.0])), [1.0, 0.0]
        )

    def test_zero_noise_fixed_point(self):
        m = LinearGaussianModel.equicorrelated(2, 0.0)
        np.testing.assert_array_equal(
            m.propagate(np.array([2.5, -1.0]), np.zeros(2)), [2.5, -1.0]
        )

    def test_nonlinear_process(self):
        m = quadratic_model()
        np.testing.assert_array_equal(m.propagate(np.array([2.0]), np.array([3.0])), [7.0])

    def test_dimension_mismatch(self):
        m = LinearGaussianModel.equicorrelated(2, 0.0)
        with pytest.raises(ValueError):
            m.propagate(np.zeros(3), np.zeros(2))

    def test_pure(self):
        m = quadratic_model()
        x, v = np.array([1.5]), np.array([-0.5])
        np.testing.assert_array_equal(m.propagate(x, v), m.propagate(x, v))


class TestLogLikelihood:
    def test_standard_normal_at_mode(self):
        m = LinearGaussianModel.equicorrelated(1, 0.0)
        assert m.log_likelihood(np.zeros(1), np.zeros(1)) == pytest.approx(
            -0.9189385332046727, rel=1e-12
        )

    def test_unit_deviation(self):
        m = LinearGaussianModel.equicorrelated(1, 0.0)
        assert m.log_likelihood(np.ones(1), np.zeros(1)) == pytest.approx(
            -1.4189385332046727, rel=1e-12
        )

    def test_correlated_normalizer(self):
        # det Q(3, 0.4) = 0.6 * 0.6 * 1.8 = 0.648 from the closed-form
        # spectrum; at y = x only the normalizer remains.
        m = LinearGaussianModel.equicorrelated(3, 0.4)
        x = np.array([0.3, -1.2, 4.0])
        expected = -0.5 * math.log((2 * math.pi) ** 3 * 0.648)
        assert m.log_likelihood(x, x) == pytest.approx(expected, rel=1e-12)
        assert expected == pytest.approx(-2.539883308299087, rel=1e-12)

    def test_batched_matches_single(self):
        m = LinearGaussianModel.equicorrelated(3, 0.5)
        rng = np.random.default_rng(0)
        xs = rng.normal(size=(5, 3))
        y = rng.normal(size=3)
        batch = m.log_likelihood(y, xs)
        singles = [m.log_likelihood(y, x) for x in xs]
        # batched and single solves may take different BLAS paths
        np.testing.assert_allclose(batch, singles, rtol=1e-14)

    def test_non_finite_inputs_rejected(self):
        m = LinearGaussianModel.equicorrelated(1, 0.0)
        with pytest.raises(ValueError):
            m.log_likelihood(np.array([np.inf]), np.zeros(1))

    def test_never_nan_far_in_the_tail(self):
        m = LinearGaussianModel.equicorrelated(1, 0.0)
        val = m.log_likelihood(np.array([1e8]), np.zeros(1))
        assert np.isfinite(val) and val < -1e15


class TestNoisePrefix:
    def test_empty_prefix(self):
        assert EMPTY_PREFIX.d == 0
        assert EMPTY_PREFIX.dims == ()

    def test_identity_dims_default(self):
        p = NoisePrefix(np.array([0.1, 0.2]))
        assert p.dims == (0, 1)

    def test_dims_length_mismatch(self):
        with pytest.raises(ValueError):
            NoisePrefix(np.array([1.0]), dims=(0, 1))

    def test_duplicate_dims(self):
        with pytest.raises(ValueError):
            NoisePrefix(np.array([1.0, 2.0]), dims=(0, 0))

    def test_pad_noise_routes_columns(self):
        out = pad_noise(np.array([[5.0, 7.0]]), (2, 0), 4)
        np.testing.assert_array_equal(out, [[7.0, 0.0, 5.0, 0.0]])


class TestDiracPartial:
    def test_full_prefix_equals_propagated_likelihood_bit_exact(self):
        for model in (LinearGaussianModel.equicorrelated(3, 0.4), quadratic_model(3)):
            rng = np.random.default_rng(1)
            x_prev = rng.normal(size=3)
            noise = rng.normal(size=3)
            y = rng.normal(size=3)
            via_partial = model.dirac_partial_loglik(y, x_prev, NoisePrefix(noise))
            direct = model.log_likelihood(y, model.propagate(x_prev, noise))
            assert via_partial == direct

    def test_partial_prefix_pads_zeros(self):
        m = LinearGaussianModel.equicorrelated(2, 0.3)
        y = np.array([0.4, -0.2])
        val = m.dirac_partial_loglik(y, np.zeros(2), NoisePrefix(np.array([1.0])))
        assert val == m.log_likelihood(y, np.array([1.0, 0.0]))

    def test_empty_prefix_uncorrelated_origin(self):
        m = LinearGaussianModel.equicorrelated(2, 0.0)
        val = m.dirac_partial_loglik(np.zeros(2), np.zeros(2), EMPTY_PREFIX)
        assert val == pytest.approx(-math.log(2 * math.pi), rel=1e-12)

    def test_prefix_longer_than_state_rejected(self):
        m = LinearGaussianModel.equicorrelated(2, 0.0)
        with pytest.raises(ValueError):
            m.dirac_partial_loglik(np.zeros(2), np.zeros(2), NoisePrefix(np.zeros(3)))

    @given(st.integers(min_value=0, max_value=10**6))
    @settings(deadline=None, max_examples=40)
    def test_padding_consistency_property(self, case):
        # Any model, any full prefix: the Dirac partial at d = D must agree
        # exactly (no tolerance) with likelihood-after-propagation.
        rng = np.random.default_rng(case)
        dim = int(rng.integers(1, 6))
        model = quadratic_model(dim) if case % 2 else LinearGaussianModel.equicorrelated(
            dim, float(rng.uniform(0, 0.9))
        )
        x_prev = rng.normal(size=dim)
        noise = rng.normal(size=dim)
        y = rng.normal(size=dim)
        perm = tuple(rng.permutation(dim))
        prefix = NoisePrefix(noise[list(perm)], dims=perm)
        lhs = model.partial_provider("dirac").eval(y, x_prev, prefix)
        rhs = model.log_likelihood(y, model.propagate(x_prev, noise))
        assert lhs == rhs

    def test_unknown_partial_kind(self):
        with pytest.raises(ValueError):
            quadratic_model().partial_provider("exact")
        with pytest.raises(ValueError):
            quadratic_model().partial_provider("cubic")
