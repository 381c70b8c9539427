import numpy as np
import pytest

from conftest import make_affine_dataset
from novas import (
    Dataset,
    ModelSpec,
    SubsetCandidate,
    WeightFn,
    cv_score,
    generate,
    grid_scores,
    relative_gain,
    select_bandwidth,
    standardize,
)
from novas.errors import ZeroPreviousScore
from novas.smoothing import BandwidthGrid
from oracles import naive_cv_score

# Naive-oracle score for the seeded d=1 comparison below (n=50, subset {2},
# bandwidth 0.8 * 50^(-1/5)).
D1_ORACLE_SCORE = 41.37521973040231


def _sine_dataset(seed=23, n=50):
    rng = np.random.default_rng(seed)
    x = rng.uniform(-1, 1, (n, 3))
    y = np.sin(2.0 * x[:, 0]) + 0.1 * rng.normal(size=n)
    return standardize(Dataset(x, y))


class TestCvScore:
    def test_constant_response_scores_zero(self):
        rng = np.random.default_rng(0)
        base = standardize(Dataset(rng.uniform(-1, 1, (60, 2)), np.zeros(60)))
        ds = Dataset(base.x, np.full(60, 2.5), standardized=True)
        assert cv_score(ds, (1, 2), 0.7) <= 1e-12 * 60

    def test_all_excluding_box_scores_exactly_zero(self):
        ds = _sine_dataset()
        weight = WeightFn("box", lower=50.0, upper=60.0)  # excludes every row
        assert cv_score(ds, (1,), 0.5, weight) == 0.0

    def test_matches_naive_oracle_d1(self):
        ds = _sine_dataset()
        h = BandwidthGrid().bandwidths(50, 1)[2]
        mine = cv_score(ds, (2,), h)
        oracle = naive_cv_score(ds, (2,), h)
        assert oracle == pytest.approx(D1_ORACLE_SCORE, rel=1e-9)
        assert mine == pytest.approx(oracle, rel=1e-9)

    def test_scale_equivariance(self):
        ds = _sine_dataset(seed=5)
        c = 3.7
        scaled = Dataset(ds.x, c * ds.y, standardized=True)
        s1 = cv_score(ds, (1, 2), 0.6)
        s2 = cv_score(scaled, (1, 2), 0.6)
        assert s2 == pytest.approx(c * c * s1, rel=1e-9)

    def test_weight_domination(self):
        ds = _sine_dataset(seed=8)
        narrow = WeightFn("box", lower=-0.5, upper=0.5)
        wide = WeightFn("box", lower=-2.0, upper=2.0)
        h = 0.5
        s_narrow = cv_score(ds, (1,), h, narrow)
        s_wide = cv_score(ds, (1,), h, wide)
        s_unit = cv_score(ds, (1,), h)
        assert 0.0 <= s_narrow <= s_wide <= s_unit

    def test_nonnegative(self):
        ds = standardize(generate(ModelSpec("m3", n=40, p=4, seed=6)))
        for h in BandwidthGrid().bandwidths(40, 2):
            assert cv_score(ds, (2, 4), h) >= 0.0


class TestWeightFn:
    def test_unknown_kind_rejected(self):
        with pytest.raises(ValueError):
            WeightFn("triangle")

    def test_box_needs_bounds(self):
        with pytest.raises(ValueError):
            WeightFn("box")

    def test_unit_returns_none(self):
        ds = _sine_dataset()
        assert WeightFn("unit").values(ds, (1,)) is None

    def test_box_indicator(self):
        ds = _sine_dataset()
        w = WeightFn("box", lower=0.0, upper=10.0).values(ds, (1,))
        np.testing.assert_array_equal(w, (ds.x[:, 0] >= 0).astype(float))

    def test_box_per_covariate_bounds(self):
        ds = _sine_dataset()
        lower = np.array([-10.0, 0.0, -10.0])
        upper = np.full(3, 10.0)
        w = WeightFn("box", lower=lower, upper=upper).values(ds, (2, 3))
        np.testing.assert_array_equal(w, (ds.x[:, 1] >= 0).astype(float))


class TestSelectBandwidth:
    def test_singleton_grid_returned(self):
        ds = _sine_dataset()
        grid = BandwidthGrid((1.1,))
        h, score = select_bandwidth(ds, (1,), grid)
        assert h == pytest.approx(1.1 * 50 ** (-0.2))
        assert score == cv_score(ds, (1,), h)

    def test_noise_scores_worse_than_signal(self):
        rng = np.random.default_rng(31)
        x = rng.uniform(-1, 1, (120, 3))
        g = (x ** 2).sum(axis=1)
        y_signal = g + 0.05 * rng.normal(size=120)
        y_noise = rng.normal(size=120) * g.std()
        ds_signal = standardize(Dataset(x, y_signal))
        ds_noise = Dataset(ds_signal.x, y_noise, standardized=True)
        _, s_signal = select_bandwidth(ds_signal, (1, 2, 3))
        _, s_noise = select_bandwidth(ds_noise, (1, 2, 3))
        assert s_noise >= s_signal

    def test_affine_response_scores_tiny_everywhere(self):
        ds = make_affine_dataset(seed=3, n=100, d=2)
        hs, scores = grid_scores(ds, (1, 2))
        assert np.all(scores < 1e-10 * 100)

    def test_exact_ties_resolve_to_smallest_bandwidth(self):
        rng = np.random.default_rng(14)
        base = standardize(Dataset(rng.uniform(-1, 1, (40, 2)), np.zeros(40)))
        ds = Dataset(base.x, np.zeros(40), standardized=True)
        h, score = select_bandwidth(ds, (1,))
        assert score == 0.0
        assert h == BandwidthGrid().bandwidths(40, 1)[0]


class TestRelativeGain:
    def test_halving(self):
        assert relative_gain(10.0, 5.0) == 0.5

    def test_no_gain(self):
        assert relative_gain(10.0, 10.0) == 0.0

    def test_reference_stage_transition(self):
        # First-to-second stage improvement 6.83 -> 5.22
        assert relative_gain(6.83, 5.22) == pytest.approx(0.23572, abs=1e-4)

    def test_negative_when_worse(self):
        assert relative_gain(2.0, 3.0) == -0.5

    def test_zero_previous_raises(self):
        with pytest.raises(ZeroPreviousScore):
            relative_gain(0.0, 1.0)


class TestSubsetCandidate:
    def test_orders_enforced(self):
        with pytest.raises(ValueError):
            SubsetCandidate((3, 1), 1.0, 0.5)
        with pytest.raises(ValueError):
            SubsetCandidate((), 1.0, 0.5)

    def test_sort_key_breaks_ties_by_size_then_lex(self):
        a = SubsetCandidate((1, 2), 1.0, 0.5)
        b = SubsetCandidate((3,), 1.0, 0.5)
        c = SubsetCandidate((2,), 1.0, 0.5)
        assert sorted([a, b, c], key=SubsetCandidate.sort_key) == [c, b, a]
