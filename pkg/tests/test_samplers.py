import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from w2lab.samplers import (
    LatticeSpec,
    SamplerInvariantError,
    corrupt_bound,
    lattice_distance,
    make_lattice_custom,
    make_rademacher_product,
    make_scaled_basis,
    make_sphere_uniform,
    require_lattice_support,
    validate_sampler,
)


class TestRademacher:
    def test_d1_support(self, rng):
        s = make_rademacher_product(1, 1.0)
        assert s.bound == 1.0
        draws = s.draw(rng, size=1000)
        assert set(np.unique(draws)) == {-1.0, 1.0}

    def test_d4_norm_forced(self, rng):
        s = make_rademacher_product(4, 1.0)
        assert s.bound == pytest.approx(2.0)
        norms = np.linalg.norm(s.draw(rng, size=500), axis=1)
        assert np.allclose(norms, 2.0)

    def test_d2_covariance_mc(self, rng):
        s = make_rademacher_product(2, 1.0)
        m = 10**6
        draws = s.draw(rng, size=m)
        emp = draws.T @ draws / m
        se = 1.0 / math.sqrt(m)  # entries of products are +-1
        assert np.all(np.abs(emp - np.eye(2)) < 5 * se)

    def test_enumeration(self):
        s = make_rademacher_product(3, 0.5)
        assert len(s.outcomes) == 8
        assert np.allclose(s.probs, 1 / 8)
        assert np.allclose(np.abs(s.outcomes), 0.5)


class TestScaledBasis:
    def test_d1_reduces_to_rademacher(self, rng):
        s = make_scaled_basis(1, 2.0)
        assert set(np.unique(s.draw(rng, size=500))) == {-2.0, 2.0}

    def test_d3_identity_covariance(self):
        s = make_scaled_basis(3, math.sqrt(3.0))
        assert np.allclose(s.cov.variances, 1.0)
        assert s.bound == pytest.approx(math.sqrt(3.0))

    def test_d5_axis_frequencies(self, rng):
        s = make_scaled_basis(5, 1.0)
        m = 10**5
        draws = s.draw(rng, size=m)
        hits = (draws != 0).sum(axis=0) / m
        se = math.sqrt(0.2 * 0.8 / m)
        assert np.all(np.abs(hits - 0.2) < 5 * se)

    def test_norm_always_beta(self, rng):
        s = make_scaled_basis(4, 1.5)
        norms = np.linalg.norm(s.draw(rng, size=2000), axis=1)
        assert np.allclose(norms, 1.5)


class TestDrawSum:
    def test_matches_chunked_sum_moments(self, rng):
        s = make_scaled_basis(2, 1.0)
        n, m = 50, 200000
        fast = s.draw_sum(n, m, rng)
        assert fast.shape == (m, 2)
        # mean 0, covariance n * Sigma, within 5 SE
        se = math.sqrt(n * 0.5) / math.sqrt(m)
        assert np.all(np.abs(fast.mean(axis=0)) < 5 * se)
        emp_var = (fast**2).mean(axis=0)
        se_var = (fast**2).std(axis=0, ddof=1) / math.sqrt(m)
        assert np.all(np.abs(emp_var - n * 0.5) < 5 * se_var)

    def test_rademacher_sum_stays_on_lattice(self, rng):
        s = make_rademacher_product(2, 1.0)
        n = 37
        sn = s.draw_sum(n, 5000, rng) / math.sqrt(n)
        step = 1.0 / math.sqrt(n)
        resid = np.abs(sn / step - np.round(sn / step))
        assert float(resid.max()) < 1e-12

    def test_continuous_fallback(self, rng):
        s = make_sphere_uniform(3, 1.0)
        total = s.draw_sum(10, 100, rng)
        assert total.shape == (100, 3)
        assert np.all(np.linalg.norm(total, axis=1) <= 10.0 + 1e-9)


class TestValidate:
    def test_rademacher_max_norm_exact(self, rng):
        rep = validate_sampler(make_rademacher_product(1, 1.0), 10**4, rng)
        assert rep.max_norm == 1.0
        assert rep.ok

    def test_scaled_basis_mean_within_se(self, rng):
        rep = validate_sampler(make_scaled_basis(4, 2.0), 10**6, rng)
        assert np.all(np.abs(rep.mean) <= 5 * rep.mean_se)
        assert rep.ok

    def test_corrupted_bound_raises(self, rng):
        bad = corrupt_bound(make_scaled_basis(2, 2.0), 0.5)
        with pytest.raises(SamplerInvariantError):
            validate_sampler(bad, 10**4, rng)

    def test_requires_enough_draws(self, rng):
        with pytest.raises(ValueError):
            validate_sampler(make_rademacher_product(1, 1.0), 100, rng)


class TestLatticeDistance:
    def test_on_lattice_zero(self):
        spec = LatticeSpec(0.5, 2)
        assert lattice_distance(np.array([1.0, -1.5]), spec) == 0.0

    def test_cell_boundary_midpoint(self):
        assert lattice_distance(np.array([0.5]), LatticeSpec(1.0, 1)) == 0.5

    def test_2d_example_vs_bruteforce(self):
        spec = LatticeSpec(1.0, 2)
        x = np.array([0.3, 0.4])
        # oracle: the 9 nearest lattice points
        cands = [
            np.hypot(x[0] - i, x[1] - j)
            for i in (-1, 0, 1)
            for j in (-1, 0, 1)
        ]
        assert lattice_distance(x, spec) == pytest.approx(min(cands))
        assert lattice_distance(x, spec) == pytest.approx(0.5)

    @given(
        st.integers(1, 3),
        st.floats(0.1, 3.0),
        st.lists(st.floats(-5, 5), min_size=3, max_size=3),
    )
    def test_cell_diameter_bound(self, d, ell, coords):
        spec = LatticeSpec(ell, d)
        x = np.array(coords[:d])
        assert lattice_distance(x, spec) <= ell * math.sqrt(d) / 2 + 1e-12

    def test_batch_shape(self, rng):
        spec = LatticeSpec(1.0, 3)
        pts = rng.normal(size=(50, 3))
        assert lattice_distance(pts, spec).shape == (50,)


class TestLatticeSupport:
    def test_scaled_basis_accepted(self):
        spec = require_lattice_support(make_scaled_basis(2, 1.0))
        assert spec.spacing == 1.0

    def test_rademacher_d2_rejected(self):
        # corners (+-1, +-1) have norm sqrt(2) = beta but are not in sqrt(2)*Z^2
        with pytest.raises(ValueError):
            require_lattice_support(make_rademacher_product(2, 1.0))

    def test_rademacher_d1_accepted(self):
        assert require_lattice_support(make_rademacher_product(1, 1.0)).spacing == 1.0

    def test_continuous_rejected(self):
        with pytest.raises(ValueError):
            require_lattice_support(make_sphere_uniform(2, 1.0))


class TestCustomLattice:
    def test_asymmetric_two_point(self):
        s = make_lattice_custom(np.array([[-1.0], [2.0]]),
                                np.array([2 / 3, 1 / 3]))
        assert s.bound == 2.0
        assert s.cov.variances[0] == pytest.approx(2.0)

    def test_mean_zero_enforced(self):
        with pytest.raises(ValueError):
            make_lattice_custom(np.array([[1.0], [2.0]]), np.array([0.5, 0.5]))

    def test_diagonal_covariance_enforced(self):
        outs = np.array([[1.0, 1.0], [-1.0, -1.0]])
        with pytest.raises(ValueError):
            make_lattice_custom(outs, np.array([0.5, 0.5]))

    def test_unequal_variances_canonicalized(self):
        outs = np.array([[1.0, 2.0], [1.0, -2.0], [-1.0, 2.0], [-1.0, -2.0]])
        s = make_lattice_custom(outs, np.full(4, 0.25))
        # canonical frame puts the larger-variance axis first
        assert s.cov.sigmas[0] == pytest.approx(2.0)
        assert np.allclose(np.abs(s.outcomes[:, 0]), 2.0)


class TestSphere:
    def test_norms_and_cov(self, rng):
        s = make_sphere_uniform(3, 2.0)
        draws = s.draw(rng, size=10**5)
        assert np.allclose(np.linalg.norm(draws, axis=1), 2.0)
        emp = (draws**2).mean(axis=0)
        assert np.all(np.abs(emp - 4.0 / 3.0) < 0.02)
        assert not s.enumerable
