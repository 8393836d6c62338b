import math
from fractions import Fraction

import numpy as np
import pytest

from npcpt import (
    FullEdfCost,
    LinearTrendCost,
    QuantileEdfCost,
    QuantileGrid,
    TimeSeries,
    default_n_quantiles,
    linear_trend_rss,
    segment_edf_loglik,
)

ALL_COSTS = [QuantileEdfCost, FullEdfCost, LinearTrendCost]


class TestSegmentEdfLoglik:
    def test_symmetric_half(self):
        # F = 0.5 on a length-4 segment -> 4 log(1/2)
        out = segment_edf_loglik([1.0, 2.0, 3.0, 4.0], 0, 4, 2.5)
        assert out == pytest.approx(-2.772588722239781, abs=1e-12)

    def test_degenerate_cdf_values(self):
        # F in {0, 1} contributes nothing under the 0 log 0 convention
        assert segment_edf_loglik([1.0, 2.0], 0, 2, -5.0) == 0.0
        assert segment_edf_loglik([1.0, 2.0], 0, 2, 99.0) == 0.0

    def test_bounds(self):
        rng = np.random.default_rng(3)
        x = rng.normal(size=60)
        for _ in range(200):
            u = rng.integers(0, 59)
            v = rng.integers(u + 1, 61)
            t = rng.normal()
            val = segment_edf_loglik(x, u, v, t)
            assert -(v - u) * math.log(2) - 1e-12 <= val <= 0.0

    def test_empty_range_rejected(self):
        with pytest.raises(ValueError):
            segment_edf_loglik([1.0, 2.0], 1, 1, 0.0)


class TestQuantileGrid:
    @pytest.mark.parametrize("n,expected", [(500, 25), (1000, 28), (2000, 31), (5000, 35)])
    def test_default_count_rule(self, n, expected):
        assert default_n_quantiles(n) == expected

    def test_levels_symmetric_and_tail_heavy(self):
        ts = TimeSeries(np.random.default_rng(0).normal(size=200))
        grid = QuantileGrid.from_series(ts, 21)
        p = grid.levels
        assert np.all(np.diff(p) > 0)
        np.testing.assert_allclose(p + p[::-1], 1.0, atol=1e-12)
        gaps = np.diff(p)
        # tail spacing tighter than central spacing on both sides
        assert gaps[0] < gaps[len(gaps) // 2]
        assert gaps[-1] < gaps[len(gaps) // 2]

    def test_full_grid_spans_extreme_quantiles(self):
        n = 64
        ts = TimeSeries(np.random.default_rng(1).normal(size=n))
        grid = QuantileGrid.from_series(ts, n)
        assert grid.levels[0] == pytest.approx(1.0 / (2 * n), rel=0.15)
        assert grid.levels[-1] == pytest.approx((2 * n - 1.0) / (2 * n), rel=0.01)
        assert grid.thresholds[0] == ts.sorted_values[0]
        assert grid.thresholds[-1] == ts.sorted_values[-1]
        assert np.all(np.diff(grid.thresholds) >= 0)

    def test_thresholds_are_data_values(self):
        ts = TimeSeries(np.random.default_rng(2).normal(size=37))
        grid = QuantileGrid.from_series(ts, 9)
        assert all(t in ts.values for t in grid.thresholds)

    def test_weight(self):
        ts = TimeSeries(np.arange(10.0))
        grid = QuantileGrid.from_series(ts, 4)
        assert grid.weight == pytest.approx(2 * math.log(19) / 4)

    def test_count_out_of_range_rejected(self):
        ts = TimeSeries(np.arange(5.0))
        with pytest.raises(ValueError):
            QuantileGrid.from_series(ts, 0)
        with pytest.raises(ValueError):
            QuantileGrid.from_series(ts, 6)


class TestQuantileEdfCost:
    def test_two_block_oracle_values(self):
        # frozen from a direct evaluation of the K-term cost formula
        cost = QuantileEdfCost(n_quantiles=3).fit([0.0] * 4 + [10.0] * 4)
        assert cost.segment_cost(0, 8) == pytest.approx(24.365308823548865, rel=1e-12)
        assert cost.segment_cost(0, 4) == pytest.approx(10.011079262446879, rel=1e-12)
        assert cost.segment_cost(4, 8) == pytest.approx(5.0055396312234395, rel=1e-12)
        gap = cost.segment_cost(0, 8) - cost.segment_cost(0, 4) - cost.segment_cost(4, 8)
        assert gap == pytest.approx(9.348689929878546, rel=1e-9)
        assert gap > 0

    def test_zero_when_cdf_degenerate_at_all_thresholds(self):
        # thresholds land on the extreme values; the middle segment sits
        # strictly between them, so its CDF is 0 or 1 at every threshold
        x = [0.0] * 5 + [5.0] * 5 + [10.0] * 5
        cost = QuantileEdfCost(n_quantiles=2).fit(x)
        assert set(cost.grid_.thresholds) == {0.0, 10.0}
        assert cost.segment_cost(5, 10) == 0.0

    def test_default_quantile_count_resolved_at_fit(self):
        cost = QuantileEdfCost().fit(np.random.default_rng(0).normal(size=500))
        assert cost.n_quantiles_ == 25

    def test_requires_fit(self):
        with pytest.raises(RuntimeError):
            QuantileEdfCost(5).segment_cost(0, 1)

    def test_invalid_range(self):
        cost = QuantileEdfCost(3).fit(np.arange(8.0))
        for u, v in ((3, 3), (5, 2), (-1, 4), (0, 9)):
            with pytest.raises(ValueError):
                cost.segment_cost(u, v)


class TestFullEdfCost:
    def test_matches_handwritten_sum(self):
        rng = np.random.default_rng(7)
        x = rng.normal(size=12)
        cost = FullEdfCost().fit(x)
        n = len(x)
        for u, v in ((0, 12), (3, 9), (11, 12)):
            total = 0.0
            for r, t in enumerate(np.sort(x), start=1):
                total += -segment_edf_loglik(x, u, v, t) / ((r - 0.5) * (n - r + 0.5))
            assert cost.segment_cost(u, v) == pytest.approx(n * total, rel=1e-12)

    def test_ties_contribute_once_per_rank(self):
        x = [1.0, 1.0, 2.0]
        cost = FullEdfCost().fit(x)
        total = 0.0
        for r, t in enumerate([1.0, 1.0, 2.0], start=1):
            total += -segment_edf_loglik(x, 0, 2, t) / ((r - 0.5) * (3 - r + 0.5))
        assert cost.segment_cost(0, 2) == pytest.approx(3 * total, rel=1e-12)


class TestLinearTrendCost:
    def test_collinear_points_cost_zero(self):
        y = 2.0 * np.arange(20.0) + 1.0
        cost = LinearTrendCost().fit(y)
        assert cost.segment_cost(0, 20) == pytest.approx(0.0, abs=1e-9)
        assert cost.segment_cost(5, 11) == pytest.approx(0.0, abs=1e-9)

    def test_two_points_fit_exactly(self):
        cost = LinearTrendCost().fit([3.0, -7.0, 12.0])
        assert cost.segment_cost(0, 2) == pytest.approx(0.0, abs=1e-12)
        assert cost.segment_cost(1, 3) == pytest.approx(0.0, abs=1e-12)

    def test_single_point_costs_zero(self):
        cost = LinearTrendCost().fit([3.0, -7.0, 12.0])
        assert cost.segment_cost(1, 2) == 0.0

    def test_matches_polyfit_residual(self):
        rng = np.random.default_rng(11)
        y = rng.normal(size=50)
        cost = LinearTrendCost().fit(y)
        for u, v in ((0, 50), (10, 30), (47, 50)):
            xs = np.arange(u, v)
            coeffs = np.polyfit(xs, y[u:v], 1)
            rss = float(np.sum((y[u:v] - np.polyval(coeffs, xs)) ** 2))
            assert cost.segment_cost(u, v) == pytest.approx(rss, rel=1e-8, abs=1e-10)

    def test_min_segment_length_default(self):
        assert LinearTrendCost.min_segment_length == 2
        assert QuantileEdfCost.min_segment_length == 1
        assert FullEdfCost.min_segment_length == 1


def _fit(model_cls, x):
    if model_cls is QuantileEdfCost:
        return QuantileEdfCost(n_quantiles=min(12, len(x))).fit(x)
    return model_cls().fit(x)


@pytest.mark.parametrize("model_cls", ALL_COSTS)
class TestSharedCostProperties:
    def test_nonnegative(self, model_cls):
        rng = np.random.default_rng(17)
        x = rng.normal(size=80)
        cost = _fit(model_cls, x)
        starts = rng.integers(0, 79, size=300)
        ends = starts + rng.integers(1, 10, size=300)
        ends = np.minimum(ends, 80)
        assert np.all(cost.segment_costs(starts, ends) >= 0.0)

    def test_subadditive(self, model_cls):
        rng = np.random.default_rng(23)
        for trial in range(5):
            x = rng.normal(size=rng.integers(20, 200))
            cost = _fit(model_cls, x)
            n = len(x)
            u = rng.integers(0, n - 2, size=200)
            v = u + 1 + rng.integers(0, np.maximum(n - u - 2, 1), size=200)
            v = np.minimum(v, n - 1)
            t = v + 1 + rng.integers(0, np.maximum(n - v - 1, 1), size=200)
            t = np.minimum(t, n)
            whole = cost.segment_costs(u, t)
            split = cost.segment_costs(u, v) + cost.segment_costs(v, t)
            assert np.all(whole >= split - 1e-9)

    def test_prefix_tables_match_from_scratch(self, model_cls):
        rng = np.random.default_rng(29)
        x = rng.normal(size=60)
        cost = _fit(model_cls, x)
        refit = _fit(model_cls, x)  # independent tables, same data
        for _ in range(50):
            u = int(rng.integers(0, 59))
            v = int(rng.integers(u + 1, 61))
            a = cost.segment_cost(u, v)
            b = refit.segment_cost(u, v)
            assert a == pytest.approx(b, rel=1e-9, abs=1e-12)


class TestLinearCostExactArithmetic:
    def test_prefix_equals_direct_on_integer_data(self):
        # integer-valued observations keep every moment sum exactly
        # representable, so the prefix-difference path and the from-scratch
        # path feed identical numbers to the same closed form
        rng = np.random.default_rng(31)
        y = rng.integers(-50, 50, size=300).astype(float)
        cost = LinearTrendCost().fit(y)
        for _ in range(200):
            u = int(rng.integers(0, 299))
            v = int(rng.integers(u + 1, 301))
            assert cost.segment_cost(u, v) == linear_trend_rss(y, u, v)

    def test_float_path_tracks_exact_rationals(self):
        rng = np.random.default_rng(37)
        y = rng.normal(size=40)
        cost = LinearTrendCost().fit(y)
        for u, v in ((0, 40), (3, 17), (20, 23)):
            ys = [Fraction(val) for val in y[u:v]]
            xs = [Fraction(i) for i in range(u, v)]
            m = Fraction(v - u)
            sx, sy = sum(xs), sum(ys)
            sxx = sum(a * a for a in xs)
            sxy = sum(a * b for a, b in zip(xs, ys))
            syy = sum(b * b for b in ys)
            sxx_c = sxx - sx * sx / m
            exact = (syy - sy * sy / m) - (sxy - sx * sy / m) ** 2 / sxx_c
            assert cost.segment_cost(u, v) == pytest.approx(float(exact), rel=1e-9, abs=1e-9)
