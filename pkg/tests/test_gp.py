import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from greenspline import gp
from greenspline.errors import NumericalError, ValidationError
from greenspline.kernels import SYMMETRIC_IDS, get_kernel, gram
from greenspline.numerics import RandomSource
from greenspline.spline import DataSet, fit
from greenspline.verify import mc_deviation, monte_carlo_covariances, random_dataset

COUNT = 100_000


class TestFiniteDim:
    def test_brownian_triple(self):
        s, t = 0.3, 0.6
        gv = gp.finite_dim("mixed", [s, t, 1.0])
        np.testing.assert_array_equal(gv.cov, [[s, s, s], [s, t, t], [s, t, 1.0]])
        np.testing.assert_array_equal(gv.mean, 0.0)

    def test_dirichlet(self):
        np.testing.assert_array_equal(gp.finite_dim("dirichlet", [0.25, 0.5]).cov, [[0.1875, 0.125], [0.125, 0.25]])

    @pytest.mark.parametrize("kid", SYMMETRIC_IDS)
    def test_single_variance_nonnegative(self, kid):
        assert gp.finite_dim(kid, [0.37]).cov[0, 0] >= 0

    def test_unsorted_grid_allowed(self):
        gv = gp.finite_dim("mixed", [0.6, 0.2])
        np.testing.assert_array_equal(gv.cov, [[0.6, 0.2], [0.2, 0.2]])

    def test_duplicates(self):
        with pytest.raises(ValidationError):
            gp.finite_dim("mixed", [0.2, 0.2])

    def test_heaviside_rejected(self):
        with pytest.raises(ValidationError):
            gp.finite_dim("heaviside_first_order", [0.2])

    def test_scale(self):
        np.testing.assert_allclose(gp.finite_dim("mixed", [0.5], scale=3.0).cov, [[1.5]])


class TestCondition:
    def test_bridge_from_bm(self):
        post = gp.condition(gp.finite_dim("mixed", [0.25, 0.5, 1.0]), [2], [0.0])
        np.testing.assert_allclose(post.cov, [[0.1875, 0.125], [0.125, 0.25]], atol=1e-15)
        np.testing.assert_array_equal(post.mean, 0.0)
        np.testing.assert_array_equal(post.grid, [0.25, 0.5])

    def test_nonzero_value(self):
        # E[x(s) | x(1) = a] = s a for Brownian motion
        post = gp.condition(gp.finite_dim("mixed", [0.25, 0.5, 1.0]), [2], [2.0])
        np.testing.assert_allclose(post.mean, [0.5, 1.0], atol=1e-15)

    def test_empty(self):
        joint = gp.finite_dim("mixed", [0.25, 0.5])
        post = gp.condition(joint, [], [])
        np.testing.assert_array_equal(post.cov, joint.cov)
        np.testing.assert_array_equal(post.mean, joint.mean)

    def test_all(self):
        post = gp.condition(gp.finite_dim("mixed", [0.25, 0.5]), [0, 1], [1.0, 2.0])
        assert len(post) == 0 and post.cov.shape == (0, 0)

    def test_degenerate(self):
        with pytest.raises(NumericalError):
            gp.condition(gp.finite_dim("mixed", [0.0, 0.5]), [0], [0.0])

    def test_bad_indices(self):
        joint = gp.finite_dim("mixed", [0.25, 0.5])
        with pytest.raises(ValidationError):
            gp.condition(joint, [0, 0], [1.0, 1.0])
        with pytest.raises(ValidationError):
            gp.condition(joint, [5], [1.0])
        with pytest.raises(ValidationError):
            gp.condition(joint, [0], [1.0, 2.0])

    def test_bridge_identity_random(self):
        rng = np.random.default_rng(4)
        for _ in range(20):
            g = np.sort(rng.choice(np.arange(1, 1000), size=int(rng.integers(1, 15)), replace=False)) / 1000.0
            post = gp.condition(gp.finite_dim("mixed", np.append(g, 1.0)), [g.size], [0.0])
            np.testing.assert_allclose(post.cov, gram("dirichlet", g), rtol=0, atol=1e-12)

    def test_tower_property(self):
        # conditioning on A then on B equals conditioning on A and B jointly
        g = np.array([0.1, 0.3, 0.5, 0.7, 0.9])
        joint = gp.finite_dim("dirichlet_zero_mean", g)
        once = gp.condition(joint, [1, 3], [0.2, -0.1])
        first = gp.condition(joint, [1], [0.2])
        twice = gp.condition(first, [2], [-0.1])  # index of 0.7 after removing 0.3
        np.testing.assert_allclose(twice.mean, once.mean, rtol=0, atol=1e-12)
        np.testing.assert_allclose(twice.cov, once.cov, rtol=0, atol=1e-12)
        np.testing.assert_array_equal(twice.grid, once.grid)

    def test_reconditioning_pinned_variable_is_degenerate(self):
        # after conditioning, the observed value is fixed: a second conditioning on
        # it (carried as a zero-variance coordinate) is refused
        g = np.array([0.2, 0.6])
        post = gp.condition(gp.finite_dim("mixed", g), [1], [0.5])
        carried = gp.GaussianVector(g, np.r_[post.mean, 0.5], np.pad(post.cov, ((0, 1), (0, 1))))
        with pytest.raises(NumericalError):
            gp.condition(carried, [1], [0.5])

    @settings(max_examples=40, deadline=None)
    @given(
        st.sampled_from(SYMMETRIC_IDS),
        st.lists(st.integers(1, 99), min_size=2, max_size=12, unique=True),
        st.data(),
    )
    def test_conditional_psd(self, kid, ticks, data):
        g = np.sort(ticks) / 100.0
        joint = gp.finite_dim(kid, g)
        free = np.flatnonzero(np.diag(joint.cov) > gp.DEGENERATE_TOL)
        if free.size == 0:
            return
        k = data.draw(st.integers(1, free.size))
        obs = data.draw(st.permutations(free.tolist()))[:k]
        try:
            post = gp.condition(joint, obs, np.zeros(len(obs)))
        except NumericalError:
            return  # rank-deficient polynomial kernels beyond jitter
        if len(post):
            assert np.linalg.eigvalsh(post.cov).min() >= -1e-10


class TestIncrement:
    @pytest.mark.parametrize("eps", [0.5, 0.1, 0.01])
    def test_bm_unchanged(self, eps):
        g = np.sort(np.random.default_rng(1).random(10)) * (1 - eps)
        diff = gp.condition_on_increment("mixed", g, eps).cov - gp.finite_dim("mixed", g).cov
        assert np.max(np.abs(diff)) <= 1e-14

    def test_bm_example(self):
        np.testing.assert_allclose(
            gp.condition_on_increment("mixed", [0.25, 0.5], 0.1).cov, gp.finite_dim("mixed", [0.25, 0.5]).cov, atol=1e-14
        )

    @pytest.mark.parametrize("eps", [0.5, 0.2, 0.05])
    def test_bridge_downdate_formula(self, eps):
        s, t = 0.2, 0.4
        expected = gp.finite_dim("dirichlet", [s, t]).cov - eps / (1 - eps) * np.array([[s * s, s * t], [s * t, t * t]])
        np.testing.assert_allclose(gp.condition_on_increment("dirichlet", [s, t], eps).cov, expected, atol=1e-14)

    def test_bridge_small_eps(self):
        g = [0.3, 0.7]
        np.testing.assert_allclose(
            gp.condition_on_increment("dirichlet", g, 1e-6).cov, gp.finite_dim("dirichlet", g).cov, atol=1e-5
        )

    @pytest.mark.parametrize("kid", ["dirichlet", "mixed_zero_mean", "balanced_periodic", "odd"])
    def test_matches_general_conditioning(self, kid):
        # independent route: linear map to (x(grid), (x(1) - x(1 - eps)) / eps), then Schur complement
        eps = 0.15
        g = np.array([0.1, 0.4, 0.8])
        pts = np.r_[g, 1.0, 1.0 - eps]
        full = gp.finite_dim(kid, pts).cov
        a = np.zeros((g.size + 1, pts.size))
        a[: g.size, : g.size] = np.eye(g.size)
        a[-1, -2], a[-1, -1] = 1 / eps, -1 / eps
        joint = gp.GaussianVector(np.r_[g, 2.0], np.zeros(g.size + 1), a @ full @ a.T)
        post = gp.condition(joint, [g.size], [0.0])
        np.testing.assert_allclose(gp.condition_on_increment(kid, g, eps).cov, post.cov, rtol=0, atol=1e-12)

    def test_degenerate_increment(self):
        with pytest.raises(NumericalError):
            gp.condition_on_increment("odd", [0.2], 0.5)  # x(1) = x(1/2) = 0 almost surely

    def test_grid_range(self):
        with pytest.raises(ValidationError):
            gp.condition_on_increment("mixed", [0.95], 0.1)


class TestSampling:
    def test_deterministic(self):
        g = np.linspace(0, 1, 11)
        a = gp.sample_paths("mixed", g, 5, RandomSource(9))
        b = gp.sample_paths("mixed", g, 5, RandomSource(9))
        np.testing.assert_array_equal(a, b)

    @pytest.mark.parametrize("kid", SYMMETRIC_IDS)
    def test_zero_mean(self, kid):
        g = np.linspace(0, 1, 11)
        paths = gp.sample_paths(kid, g, COUNT, RandomSource(17))
        var = np.diag(gp.finite_dim(kid, g).cov)
        assert np.all(np.abs(paths.mean(axis=0)) <= 4 * np.sqrt(var / COUNT) + 1e-12)

    def test_pins_exact(self):
        paths = gp.sample_paths("dirichlet", np.linspace(0, 1, 5), 10, RandomSource(1))
        np.testing.assert_array_equal(paths[:, [0, -1]], 0.0)

    def test_polynomial_paths_are_quadratic(self):
        # the rank-one Gram is factorized with diagonal jitter j, which adds
        # independent N(0, j) noise; paths are quadratic up to a few sqrt(j)
        from greenspline.numerics import SpdMatrix

        g = np.linspace(0, 1, 9)
        jitter = SpdMatrix(gram("poly2_bridge", g[1:-1])).jitter_applied
        assert jitter > 0
        paths = gp.sample_paths("poly2_bridge", g, 20, RandomSource(2))
        for p in paths:
            fitted = np.polyval(np.polyfit(g, p, 2), g)
            assert np.max(np.abs(fitted - p)) <= 6 * np.sqrt(jitter)

    def test_bm_cholesky_covariance(self):
        g = np.linspace(0.05, 1, 20)
        paths = gp.sample_paths("mixed", g, COUNT, RandomSource(3))
        err = np.max(np.abs(paths.T @ paths / COUNT - np.minimum.outer(g, g)))
        assert err <= 0.015

    def test_bm_increments_covariance(self):
        g = np.linspace(0.05, 1, 20)
        paths = gp.sample_bm_increments(g, COUNT, RandomSource(3))
        err = np.max(np.abs(paths.T @ paths / COUNT - np.minimum.outer(g, g)))
        assert err <= 0.015

    def test_samplers_agree(self):
        g = np.linspace(0.05, 1, 20)
        a = gp.sample_paths("mixed", g, COUNT, RandomSource(5))
        b = gp.sample_bm_increments(g, COUNT, RandomSource(6))
        # difference of two independent estimates: sqrt(2) times one standard error
        tol = 3 * np.sqrt(2) * np.sqrt(2.0 / COUNT)
        assert np.max(np.abs(a.T @ a - b.T @ b)) / COUNT <= tol

    def test_increments_origin(self):
        np.testing.assert_array_equal(gp.sample_bm_increments([0.0], 100, RandomSource(1)), 0.0)

    def test_increments_variance_half(self):
        x = gp.sample_bm_increments([0.25, 0.5], COUNT, RandomSource(8))[:, 1]
        assert abs(x.var() - 0.5) <= 0.01

    def test_increments_unsorted(self):
        with pytest.raises(ValidationError):
            gp.sample_bm_increments([0.5, 0.2], 10, RandomSource(1))

    def test_count_positive(self):
        with pytest.raises(ValidationError):
            gp.sample_paths("mixed", [0.5], 0, RandomSource(1))


@pytest.fixture(scope="module")
def mc():
    return {name: (emp, target) for name, emp, target in monte_carlo_covariances(0, COUNT)}


@pytest.mark.parametrize("name", ["bm_cholesky", "bm_increments", "bridge", "reverse", "tied_sum"])
def test_monte_carlo_three_se(mc, name):
    err, tol = mc_deviation(*mc[name], COUNT, 3.0)
    assert err <= tol


def test_monte_carlo_independent_sum(mc):
    # unit variance on all 441 entries: simultaneous bound at 4 standard errors
    err, tol = mc_deviation(*mc["independent_sum"], COUNT, 4.0)
    assert err <= tol


def test_monte_carlo_targets_by_hand():
    # analytic targets at one pair, expanded by hand
    s, t = 0.2, 0.7
    assert min(s, t) - s * t == pytest.approx(0.06)
    assert 1 - max(s, t) == pytest.approx(0.3)
    tied = min(s, t) + min(s, 1 - t) + min(t, 1 - s) + min(1 - s, 1 - t)
    assert tied == pytest.approx(0.2 + 0.2 + 0.7 + 0.3)


class TestTransforms:
    g = np.linspace(0, 1, 5)

    def test_bridge(self):
        x = np.arange(5.0)[None, :]
        np.testing.assert_allclose(gp.transform_paths(x, self.g, "bridge"), x - 4 * self.g)

    def test_reverse(self):
        x = np.arange(5.0)[None, :]
        np.testing.assert_array_equal(gp.transform_paths(x, self.g, "reverse"), x[:, ::-1])

    def test_tied_sum(self):
        x = np.arange(5.0)[None, :]
        np.testing.assert_array_equal(gp.transform_paths(x, self.g, "tied_sum"), np.full((1, 5), 4.0))

    def test_independent_sum(self):
        x, y = np.arange(5.0)[None, :], 10 * np.arange(5.0)[None, :]
        np.testing.assert_array_equal(gp.transform_paths(x, self.g, "independent_sum", y), x + y[:, ::-1])

    def test_asymmetric_grid(self):
        with pytest.raises(ValidationError):
            gp.transform_paths(np.zeros((1, 3)), [0.0, 0.2, 1.0], "reverse")

    def test_bridge_needs_one(self):
        with pytest.raises(ValidationError):
            gp.transform_paths(np.zeros((1, 2)), [0.0, 0.5], "bridge")

    def test_unknown(self):
        with pytest.raises(ValidationError):
            gp.transform_paths(np.zeros((1, 5)), self.g, "shift")

    def test_independent_sum_needs_other(self):
        with pytest.raises(ValidationError):
            gp.transform_paths(np.zeros((1, 5)), self.g, "independent_sum")


class TestMap:
    def test_single(self):
        est = gp.map_estimate(gp.GpPrior("dirichlet"), DataSet([0.5], [1.0]), 4.0, [0.5])
        np.testing.assert_allclose(est, [0.5], atol=1e-15)
        assert fit("dirichlet", DataSet([0.5], [1.0]), 0.25).evaluate(0.5) == pytest.approx(est[0], abs=1e-15)

    def test_zero_data(self):
        est = gp.map_estimate(gp.GpPrior("mixed"), DataSet([0.2, 0.6], [0.0, 0.0]), 2.0, np.linspace(0, 1, 7))
        np.testing.assert_array_equal(est, 0.0)

    def test_boundary_pin(self):
        est = gp.map_estimate(gp.GpPrior("dirichlet"), DataSet([0.2, 0.6], [1.0, 2.0]), 2.0, [0.0, 1.0])
        np.testing.assert_array_equal(est, 0.0)

    @pytest.mark.parametrize("scale", [0.01, 1.0, 50.0])
    def test_scale_invariant(self, scale):
        d = DataSet([0.2, 0.5, 0.9], [1.0, -0.5, 0.25])
        grid = np.linspace(0, 1, 11)
        ref = fit("mixed_zero_mean", d, 0.5).evaluate_grid(grid)
        np.testing.assert_allclose(gp.map_estimate(gp.GpPrior("mixed_zero_mean", scale), d, 2.0, grid), ref, atol=1e-10)

    def test_bad_tau(self):
        with pytest.raises(ValidationError):
            gp.map_estimate(gp.GpPrior("mixed"), DataSet([0.5], [1.0]), 0.0, [0.5])

    def test_bad_scale(self):
        with pytest.raises(ValidationError):
            gp.GpPrior("mixed", 0.0)

    @pytest.mark.parametrize("kid", SYMMETRIC_IDS)
    def test_spline_equivalence(self, kid):
        rng = np.random.default_rng(99)
        grid = np.linspace(0, 1, 101)
        for _ in range(50):
            d = random_dataset(rng)
            for lam in (0.01, 0.1, 1.0):
                est = gp.map_estimate(gp.GpPrior(kid), d, 1.0 / lam, grid)
                np.testing.assert_allclose(est, fit(kid, d, lam).evaluate_grid(grid), rtol=0, atol=1e-10)
