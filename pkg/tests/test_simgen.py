import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from depthstat.errors import DivergentSeriesError
from depthstat.funcspace import make_grid
from depthstat.simgen import (
    BASIS_KINDS,
    SHAPES,
    EigenProfile,
    alternative_mean,
    basis_system,
    draw_scores,
    eigenvalues_from_decay,
    kl_sample,
    make_fofr_scenario,
    two_sample_scenario,
)


class TestEigenvalues:
    def test_a_2_5(self):
        g = eigenvalues_from_decay(2.5, 20)
        assert g[0] == pytest.approx(2.68297, abs=1e-5)
        assert g[1] == pytest.approx(0.68297, abs=1e-5)
        assert g[2] == pytest.approx(0.32942, abs=1e-5)
        assert g[19] > 0

    def test_matches_zeta(self):
        from scipy.special import zeta

        for a in (2.5, 3.5, 5.0):
            assert eigenvalues_from_decay(a, 1)[0] == pytest.approx(2 * zeta(a), rel=1e-13)

    @pytest.mark.parametrize("a", [2.0, 1.5, -1.0])
    def test_divergent(self, a):
        with pytest.raises(DivergentSeriesError):
            eigenvalues_from_decay(a)

    @settings(max_examples=20)
    @given(st.floats(2.05, 10.0))
    def test_decreasing_positive_gaps(self, a):
        g = eigenvalues_from_decay(a, 20)
        assert np.all(g > 0)
        assert np.all(np.diff(g) < 0)
        np.testing.assert_allclose(-np.diff(g), 2 * np.arange(1, 20, dtype=float) ** -a, rtol=1e-9, atol=1e-15)

    def test_profile(self):
        p = EigenProfile(3.5, 7)
        assert len(p.eigenvalues) == 7


class TestBasis:
    @pytest.mark.parametrize("kind", BASIS_KINDS)
    @pytest.mark.parametrize("p", [50, 200])
    def test_orthonormal(self, kind, p):
        g = make_grid(p)
        b = basis_system(kind, 20, g)
        v = b.functions
        assert len(b) == 20
        assert np.max(np.abs((v * g.weights) @ v.T - np.eye(20))) < 1e-8

    @pytest.mark.parametrize("kind", ["mono", "cheb", "spl"])
    def test_orthonormal_tight(self, kind, grid50):
        v = basis_system(kind, 20, grid50).functions
        assert np.max(np.abs((v * grid50.weights) @ v.T - np.eye(20))) < 1e-10

    def test_tri_formulas(self, grid50):
        t = grid50.points
        v = basis_system("tri", 3, grid50).functions
        np.testing.assert_array_equal(v[0], np.ones(50))
        np.testing.assert_allclose(v[1], np.sqrt(2) * np.sin(2 * np.pi * t), atol=1e-15)
        np.testing.assert_allclose(v[2], np.sqrt(2) * np.cos(2 * np.pi * t), atol=1e-15)

    def test_mono_first_function(self, grid50):
        t = grid50.points
        v = basis_system("mono", 2, grid50).functions
        np.testing.assert_allclose(v[0], t / np.sqrt(np.dot(grid50.weights, t * t)), atol=1e-14)

    def test_mono_second_function_fine_grid(self):
        # t^2 minus its projection on t: <t^2, t> / <t, t> = (1/4) / (1/3)
        g = make_grid(4001)
        t = g.points
        v = basis_system("mono", 2, g).functions[1]
        ref = t * t - 0.75 * t
        ref = ref / np.sqrt(np.dot(g.weights, ref * ref))
        np.testing.assert_allclose(v, ref, atol=1e-5)

    def test_unknown(self, grid50):
        with pytest.raises(ValueError):
            basis_system("fourier", 3, grid50)

    def test_indexing(self, grid50):
        b = basis_system("tri", 3, grid50)
        assert b[1].grid is grid50


class TestScores:
    def test_ne_moments(self):
        s = draw_scores("NE", 100000, 1, np.random.default_rng(0))[:, 0]
        assert abs(s.mean()) < 0.02
        assert abs(s.var() - 1) < 0.05

    def test_n1_is_standard_normal(self):
        s = draw_scores("N1", 100000, 2, np.random.default_rng(0))
        assert abs(s.mean()) < 0.02 and abs(s.var() - 1) < 0.02

    def test_shared_latent(self):
        rng = np.random.default_rng(0)
        s = draw_scores("NN", 20000, 2, rng)
        # the squared scores are positively correlated because the latent factor is shared
        assert np.corrcoef(s[:, 0] ** 2, s[:, 1] ** 2)[0, 1] > 0.2

    def test_unknown(self):
        with pytest.raises(ValueError):
            draw_scores("T3", 2, 2, np.random.default_rng(0))


class TestKL:
    def test_zero_scores_reproduce_mean(self, grid50):
        mu = alternative_mean("Wig", 1.0, grid50)
        s = kl_sample(mu, EigenProfile(2.5), basis_system("tri", 20, grid50), "NN", 4, None, scores=np.zeros((4, 20)))
        np.testing.assert_array_equal(s.values, np.tile(mu.values, (4, 1)))

    def test_n1_leading_eigenvalue(self, grid50):
        from depthstat.funcspace import covariance_eig, sample_mean

        prof = EigenProfile(2.5)
        s = kl_sample(grid50.constant(0.0), prof, basis_system("tri", 20, grid50), "N1", 2000, np.random.default_rng(1))
        lam = covariance_eig(s, sample_mean(s)).eigenvalues[0]
        assert abs(lam - prof.eigenvalues[0]) < 0.1 * prof.eigenvalues[0]

    def test_n1_trace(self, grid50):
        prof = EigenProfile(2.5)
        s = kl_sample(grid50.constant(0.0), prof, basis_system("tri", 20, grid50), "N1", 5000, np.random.default_rng(2))
        c = s.values - s.values.mean(axis=0)
        trace = np.dot(grid50.weights, (c * c).mean(axis=0))
        assert abs(trace - prof.eigenvalues.sum()) < 0.05 * prof.eigenvalues.sum()

    def test_basis_too_small(self, grid50):
        with pytest.raises(ValueError):
            kl_sample(grid50.constant(0.0), EigenProfile(2.5), basis_system("tri", 5, grid50), "NN", 2,
                      np.random.default_rng(0))


class TestShapes:
    def test_examples(self):
        g = make_grid(21)
        t = list(np.round(g.points, 12))
        lin = alternative_mean("Lin", 1.0, g).values
        assert lin[t.index(0.5)] == 0.0 and lin[0] == -1.0
        jump = alternative_mean("Jump", 1.0, g).values
        assert jump[t.index(0.1)] == -1.0 and jump[t.index(0.5)] == 1.0
        peak = alternative_mean("Peak", 1.0, g).values
        assert peak[t.index(0.3)] == -1.0 and peak[t.index(0.1)] == 1.0
        assert np.all(alternative_mean("Mag", 0.5, g).values == 0.5)

    @pytest.mark.parametrize("shape", SHAPES)
    def test_null_scaling(self, shape, grid50):
        assert np.all(alternative_mean(shape, 0.0, grid50).values == 0.0)

    def test_cubic_energy(self):
        g = make_grid(4001)
        v = alternative_mean("Cub", 1.0, g).values
        # 432 * integral of t^2 (t - 1/2)^2 (t - 1)^2 over [0, 1] = 432 / 840
        assert np.dot(g.weights, v * v) == pytest.approx(18 / 35, rel=1e-5)
        assert v[0] == 0.0 and abs(v[-1]) < 1e-12

    def test_validation(self, grid50):
        with pytest.raises(ValueError):
            alternative_mean("Sine", 1.0, grid50)
        with pytest.raises(ValueError):
            alternative_mean("Lin", 1.5, grid50)


class TestTwoSampleScenario:
    def test_sizes_and_mean(self, grid50):
        d = two_sample_scenario(grid50, 50, "Mag", 1.0, "N1", rng=np.random.default_rng(0))
        assert (d.n1, d.n2) == (25, 25)
        big = two_sample_scenario(grid50, 4000, "Mag", 1.0, "N1", rng=np.random.default_rng(0))
        diff = big.group2.values.mean(axis=0) - big.group1.values.mean(axis=0)
        assert abs(np.dot(grid50.weights, diff) - 1.0) < 0.15

    def test_unequal_options(self, grid50):
        d = two_sample_scenario(grid50, 40, "Lin", 0.0, "NE", eigenvalues="unequal", eigenfunctions="unequal",
                                rng=np.random.default_rng(1))
        assert d.group1.values.shape == (20, 50)


class TestFoFRScenario:
    def test_signs(self, grid50):
        sc = make_fofr_scenario(grid50, rng=np.random.default_rng(0))
        s = sc.slope.coef / (2.0 * np.arange(1, 11, dtype=float) ** -1.5)
        np.testing.assert_allclose(np.abs(s), 1.0, rtol=1e-15)

    @settings(max_examples=25)
    @given(st.integers(0, 2**31))
    def test_null_identity_on_coordinates(self, seed):
        sc = make_fofr_scenario(make_grid(50), c=0.0, rng=np.random.default_rng(seed))
        # x0 only has mono coordinates 1..J0, the slope only reads J0+1..2J0
        assert np.all(sc.x0_coords[sc.slope.J0:] == 0.0)
        assert np.all(sc.slope.apply_to_mono_coordinates(sc.x0_coords) == 0.0)

    def test_null_identity_numerically(self, grid50):
        sc = make_fofr_scenario(grid50, c=0.0, rng=np.random.default_rng(3))
        assert np.max(np.abs(sc.slope.apply_values(sc.data.x0.values))) < 1e-10

    def test_noiseless_null_predicts_zero(self, grid50):
        from depthstat.fofr import fpcr_fit

        sc = make_fofr_scenario(grid50, c=0.0, n=200, rng=np.random.default_rng(4), noise=False)
        fit = fpcr_fit(sc.data.X, sc.data.Y, 20)  # full rank: exact recovery
        x0c = sc.data.x0.values
        pred = fit.apply(x0c + fit.xbar)
        assert np.sqrt(np.dot(grid50.weights, pred**2)) < 1e-10 * np.sqrt(np.dot(grid50.weights, x0c**2))

    def test_alternative_is_nonzero(self, grid50):
        sc = make_fofr_scenario(grid50, c=1.0, rng=np.random.default_rng(3))
        assert np.max(np.abs(sc.slope.apply_values(sc.data.x0.values))) > 1e-3

    def test_shapes(self, grid50):
        sc = make_fofr_scenario(grid50, n=30, rng=np.random.default_rng(0))
        assert sc.data.n == 30 and sc.data.Y.values.shape == (30, 50)
