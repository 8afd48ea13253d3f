import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from depthstat.depth import DepthSpec
from depthstat.errors import DegenerateDataError, InsufficientSampleError, UsageError
from depthstat.funcspace import FunctionalSample, make_grid
from depthstat.rng import stream
from depthstat.simgen import two_sample_scenario
from depthstat.twosample import (
    TWO_SAMPLE_METHODS,
    TwoSampleData,
    _bootstrap_groups,
    default_depth_spec,
    pointwise_F,
    residual_bootstrap_two,
    two_sample_statistic,
    two_sample_test,
    two_sample_tests,
)


def constants(grid, cs):
    return FunctionalSample(grid, np.array([[c] * grid.size for c in cs], dtype=float))


@pytest.fixture
def null_data(grid50):
    return two_sample_scenario(grid50, 30, "Cub", 0.0, "NN", rng=np.random.default_rng(11))


class TestStatistic:
    def test_constants(self, grid50):
        d = TwoSampleData(constants(grid50, [0, 2]), constants(grid50, [1, 3]))
        np.testing.assert_array_equal(two_sample_statistic(d).values, -np.ones(50))

    def test_identical_groups(self, grid50, rng):
        g = FunctionalSample(grid50, rng.standard_normal((4, 50)))
        np.testing.assert_array_equal(two_sample_statistic(TwoSampleData(g, g)).values, np.zeros(50))

    def test_mean_shift(self, grid50, rng):
        x = rng.standard_normal((2, 50))
        delta = np.sin(3 * grid50.points)
        d = TwoSampleData(FunctionalSample(grid50, x + delta), FunctionalSample(grid50, x))
        np.testing.assert_allclose(two_sample_statistic(d).values, delta, atol=1e-14)

    def test_needs_two_per_group(self, grid50):
        with pytest.raises(InsufficientSampleError):
            TwoSampleData(constants(grid50, [0]), constants(grid50, [1, 2]))

    def test_from_labeled(self, grid50):
        s = FunctionalSample(grid50, np.zeros((5, 50)), labels=("a", "b", "a", "b", "b"))
        d = TwoSampleData.from_labeled(s)
        assert (d.n1, d.n2) == (2, 3)
        with pytest.raises(UsageError):
            TwoSampleData.from_labeled(FunctionalSample(grid50, np.zeros((3, 50)), labels=("a", "b", "c")))


class TestBootstrap:
    def test_constant_groups_give_zero(self, grid50):
        d = TwoSampleData(constants(grid50, [1, 1, 1]), constants(grid50, [5, 5]))
        ens = residual_bootstrap_two(d, 20, 0)
        assert np.all(ens.statistics.values == 0.0)

    def test_residuals_center(self, null_data):
        for g in (null_data.group1.values, null_data.group2.values):
            assert np.max(np.abs((g - g.mean(axis=0)).sum(axis=0))) < 1e-12

    def test_residual_identity_bit_exact(self, null_data):
        # the emitted statistic equals factor * (mean e*_1 - mean e*_2) computed from the same draws
        d = null_data
        B = 30
        direct = residual_bootstrap_two(d, B, 4).statistics.values
        rng = stream(4, "boot")
        # residuals are formed after expressing both groups relative to the first curve of group 1
        x1 = d.group1.values - d.group1.values[0]
        x2 = d.group2.values - d.group1.values[0]
        r1 = x1 - x1.mean(axis=0)
        r2 = x2 - x2.mean(axis=0)
        i1 = rng.integers(0, d.n1, size=(B, d.n1))
        i2 = rng.integers(0, d.n2, size=(B, d.n2))
        g1, g2 = _bootstrap_groups(d, B, stream(4, "boot"))
        np.testing.assert_array_equal(g1, r1[i1])
        np.testing.assert_array_equal(g2, r2[i2])
        np.testing.assert_array_equal(direct, d.scale * (r1[i1].mean(axis=1) - r2[i2].mean(axis=1)))
        # same as resampling whole groups around the pooled mean, up to rounding
        pooled = (d.n1 * d.group1.values.mean(axis=0) + d.n2 * d.group2.values.mean(axis=0)) / (d.n1 + d.n2)
        raw1 = d.group1.values - d.group1.values.mean(axis=0)
        raw2 = d.group2.values - d.group2.values.mean(axis=0)
        via_groups = d.scale * ((pooled + raw1[i1]).mean(axis=1) - (pooled + raw2[i2]).mean(axis=1))
        np.testing.assert_allclose(direct, via_groups, atol=1e-12)

    def test_ensemble_mean_small(self, grid50):
        d = two_sample_scenario(grid50, 50, "Cub", 0.0, "NN", rng=np.random.default_rng(5))
        ens = residual_bootstrap_two(d, 1000, 1).statistics.values
        mean = ens.mean(axis=0)
        # per-point bootstrap sd is O(1); the mean of 1000 draws is O(1000^-1/2)
        assert np.sqrt(np.dot(grid50.weights, mean**2)) < 4 * np.sqrt(np.dot(grid50.weights, ens.var(axis=0))) / np.sqrt(1000)

    def test_deterministic(self, null_data):
        a = residual_bootstrap_two(null_data, 10, 3).statistics.values
        b = residual_bootstrap_two(null_data, 10, 3).statistics.values
        np.testing.assert_array_equal(a, b)

    def test_B_positive(self, null_data):
        with pytest.raises(ValueError):
            residual_bootstrap_two(null_data, 0, 3)


class TestPointwiseF:
    def test_constants(self, grid50):
        d = TwoSampleData(constants(grid50, [0, 2]), constants(grid50, [1, 3]))
        np.testing.assert_allclose(pointwise_F(d).values, 0.5, atol=1e-15)

    def test_identical_groups(self, grid50, rng):
        g = FunctionalSample(grid50, rng.standard_normal((3, 50)))
        np.testing.assert_allclose(pointwise_F(TwoSampleData(g, g)).values, 0.0, atol=1e-12)

    def test_scale_invariance(self, null_data, grid50):
        d2 = TwoSampleData(FunctionalSample(grid50, 2 * null_data.group1.values),
                           FunctionalSample(grid50, 2 * null_data.group2.values))
        # scaling by a power of two is exact in floating point
        np.testing.assert_array_equal(pointwise_F(d2).values, pointwise_F(null_data).values)

    def test_degenerate(self, grid50):
        with pytest.raises(DegenerateDataError):
            pointwise_F(TwoSampleData(constants(grid50, [1, 1]), constants(grid50, [2, 2])))
        with pytest.raises(DegenerateDataError):
            pointwise_F(TwoSampleData(constants(grid50, [1, 1]), constants(grid50, [1, 1])))

    def test_zero_over_zero_points(self):
        g = make_grid(3)
        a = np.array([[0.0, 1.0, 5.0], [0.0, 2.0, 5.0]])
        b = np.array([[0.0, 3.0, 6.0], [0.0, 4.0, 7.0]])
        f = pointwise_F(TwoSampleData(FunctionalSample(g, a), FunctionalSample(g, b)))
        assert f.values[0] == 0.0 and f.values[1] > 0


class TestTests:
    def test_all_methods(self, null_data):
        reps = two_sample_tests(null_data, TWO_SAMPLE_METHODS, 50, rng=2)
        assert [r.method for r in reps] == list(TWO_SAMPLE_METHODS)
        for r in reps:
            assert 0 <= r.pvalue <= 1 and r.B == 50 and r.seed == 2

    def test_single_matches_batch(self, null_data):
        batch = two_sample_tests(null_data, ["KD", "L2", "RHD", "FMAX"], 40, rng=7)
        for r in batch:
            single = two_sample_test(null_data, r.method, 40, rng=7)
            assert single.to_dict() == r.to_dict()

    def test_unknown_method(self, null_data):
        with pytest.raises(UsageError):
            two_sample_tests(null_data, ["XYZ"], 10)

    def test_spec_kind_mismatch(self, null_data):
        with pytest.raises(UsageError):
            two_sample_tests(null_data, ["KD"], 10, specs={"KD": DepthSpec("ITD")})

    def test_default_specs(self):
        assert default_depth_spec("KD").quantile_u == 0.01
        assert default_depth_spec("RHD").quantile_u == 0.1
        assert default_depth_spec("RHD", "fofr").quantile_u == 0.001

    def test_identical_groups_not_rejected(self, grid50, rng):
        g = FunctionalSample(grid50, rng.standard_normal((10, 50)))
        for r in two_sample_tests(TwoSampleData(g, g), ["KD", "ITD", "IFD", "RHD", "L2", "SUP"], 100, rng=1):
            assert r.pvalue > 0.05, r.method

    @given(st.integers(0, 2**16), st.integers(-8, 8), st.integers(2, 9), st.integers(2, 9))
    def test_shift_invariance_bit_exact(self, seed, k, n1, n2):
        g = make_grid(9)
        rng = np.random.default_rng(seed)
        a = rng.integers(-16, 16, (n1, 9)) / 4.0
        b = rng.integers(-16, 16, (n2, 9)) / 4.0
        c = rng.integers(-16, 16, 9) / 2.0 + k
        d0 = TwoSampleData(FunctionalSample(g, a), FunctionalSample(g, b))
        d1 = TwoSampleData(FunctionalSample(g, a + c), FunctionalSample(g, b + c))
        np.testing.assert_array_equal(two_sample_statistic(d0).values, two_sample_statistic(d1).values)
        e0 = residual_bootstrap_two(d0, 25, seed).statistics.values
        e1 = residual_bootstrap_two(d1, 25, seed).statistics.values
        np.testing.assert_array_equal(e0, e1)
        m = list(TWO_SAMPLE_METHODS)
        try:
            np.testing.assert_array_equal(pointwise_F(d0).values, pointwise_F(d1).values)
        except DegenerateDataError:
            # tiny integer groups can have a mean gap over zero variance; the shifted data must agree
            with pytest.raises(DegenerateDataError):
                pointwise_F(d1)
            m = [x for x in m if not x.startswith("F")]
        r0 = [r.to_dict() for r in two_sample_tests(d0, m, 25, rng=seed)]
        r1 = [r.to_dict() for r in two_sample_tests(d1, m, 25, rng=seed)]
        assert r0 == r1

    def test_group_reversal(self, null_data):
        rev = TwoSampleData(null_data.group2, null_data.group1)
        np.testing.assert_allclose(two_sample_statistic(rev).values, -two_sample_statistic(null_data).values,
                                   atol=1e-12)

    def test_negation_symmetry_of_depth_pvalues(self, null_data):
        from depthstat.inference import BootstrapEnsemble, depth_pvalue

        ens = residual_bootstrap_two(null_data, 60, 3)
        neg = BootstrapEnsemble(FunctionalSample(ens.statistics.grid, -ens.statistics.values))
        obs = two_sample_statistic(null_data)
        for kind in ("KD", "ITD", "IFD"):
            spec = DepthSpec(kind, 0.05)
            assert depth_pvalue(obs, ens, spec).pvalue == depth_pvalue(obs * -1.0, neg, spec).pvalue
