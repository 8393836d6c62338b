import numpy as np
import pytest

from npcpt import EmpiricalCdf, TimeSeries, check_series, empirical_cdf


class TestCheckSeries:
    def test_accepts_lists_and_columns(self):
        assert check_series([1, 2, 3]).tolist() == [1.0, 2.0, 3.0]
        assert check_series(np.array([[1.0], [2.0]])).shape == (2,)

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError, match="non-finite"):
            check_series([1.0, np.nan, 2.0])
        with pytest.raises(ValueError, match="non-finite"):
            check_series([np.inf])

    def test_rejects_empty_and_2d(self):
        with pytest.raises(ValueError):
            check_series([])
        with pytest.raises(ValueError):
            check_series(np.zeros((3, 2)))

    def test_result_is_readonly(self):
        x = check_series([1.0, 2.0])
        with pytest.raises(ValueError):
            x[0] = 5.0


class TestTimeSeries:
    def test_sorted_values_is_permutation(self):
        ts = TimeSeries([3.0, 1.0, 2.0, 1.0])
        assert ts.n == 4
        assert ts.sorted_values.tolist() == [1.0, 1.0, 2.0, 3.0]

    def test_immutable(self):
        ts = TimeSeries([1.0, 2.0])
        with pytest.raises(ValueError):
            ts.values[0] = 9.0

    def test_quantile_is_realized_value(self):
        ts = TimeSeries([10.0, 20.0, 30.0, 40.0])
        rng = np.random.default_rng(0)
        for p in rng.uniform(0.001, 0.999, 50):
            assert ts.empirical_quantile(p) in ts.values

    def test_quantile_extremes(self):
        ts = TimeSeries(np.arange(100.0))
        assert ts.empirical_quantile(1e-9) == 0.0
        assert ts.empirical_quantile(1.0) == 99.0


class TestEmpiricalCdf:
    def test_mid_value_with_tie(self):
        # one value below t plus half weight on the tie, over 3 points
        assert empirical_cdf([1.0, 2.0, 3.0], 2.0) == (1 + 0.5) / 3

    def test_all_ties(self):
        assert empirical_cdf([5.0, 5.0, 5.0, 5.0], 5.0) == 0.5

    def test_above_all_data(self):
        assert empirical_cdf([1.0, 2.0, 3.0, 4.0], 10.0) == 1.0

    def test_subrange(self):
        # range covering values [2, 3] only
        assert empirical_cdf([1.0, 2.0, 3.0, 4.0], 2.5, start=1, end=3) == 0.5

    def test_empty_range_rejected(self):
        ts = TimeSeries([1.0, 2.0])
        with pytest.raises(ValueError, match="range"):
            EmpiricalCdf(ts, 1, 1)

    def test_bounds_and_monotonicity(self):
        rng = np.random.default_rng(42)
        for _ in range(20):
            x = rng.choice([0.0, 1.0, 2.5, 7.0], size=rng.integers(1, 30))
            cdf = TimeSeries(x).cdf()
            ts = np.sort(rng.uniform(-1, 8, 25))
            vals = cdf(ts)
            assert np.all(vals >= 0.0) and np.all(vals <= 1.0)
            assert np.all(np.diff(vals) >= 0.0)

    def test_vectorized_matches_scalar(self):
        x = [0.0, 1.0, 1.0, 3.0]
        cdf = TimeSeries(x).cdf()
        ts = [-1.0, 0.0, 1.0, 2.0, 3.5]
        assert cdf(np.array(ts)).tolist() == [cdf(t) for t in ts]
