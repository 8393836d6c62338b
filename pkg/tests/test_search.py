import numpy as np
import pytest

from npcpt import (
    FullEdfCost,
    LinearTrendCost,
    QuantileEdfCost,
    Segmentation,
    brute_force,
    optimal_partitioning,
    pelt,
    segment_neighbourhood,
    sic_select,
)

ALL_COSTS = [QuantileEdfCost, FullEdfCost, LinearTrendCost]


def _fit(model_cls, x):
    if model_cls is QuantileEdfCost:
        return QuantileEdfCost(n_quantiles=min(12, len(x))).fit(x)
    return model_cls().fit(x)


def _step_series(rng=None, n=100, level=10.0):
    rng = rng or np.random.default_rng(0)
    x = np.zeros(n)
    x[n // 2 :] = level
    return x + 0.5 * rng.normal(size=n)


class TestSegmentationType:
    def test_validates_ordering(self):
        with pytest.raises(ValueError):
            Segmentation(n=10, changepoints=[5, 5], total_cost=0.0)
        with pytest.raises(ValueError):
            Segmentation(n=10, changepoints=[0], total_cost=0.0)
        with pytest.raises(ValueError):
            Segmentation(n=10, changepoints=[10], total_cost=0.0)

    def test_segments_and_penalized_cost(self):
        seg = Segmentation(n=10, changepoints=[3, 7], total_cost=5.0)
        assert seg.m == 2
        assert seg.segments() == [(0, 3), (3, 7), (7, 10)]
        assert seg.penalized_cost(2.0) == 9.0


class TestPelt:
    def test_constant_series_no_changepoints(self):
        cost = QuantileEdfCost(10).fit(np.full(100, 5.0))
        for penalty in (0.1, 1.0, 25.0):
            seg, _ = pelt(cost, penalty)
            assert seg.m == 0

    def test_step_series_single_split_oracle(self):
        # exhaustive scan over single-split positions picks the same cut,
        # and brute force over 0-2 changepoints confirms m=1
        x = np.concatenate([np.zeros(50), np.full(50, 10.0)])
        cost = QuantileEdfCost(28).fit(x)
        penalty = 3 * np.log(100)
        seg, _ = pelt(cost, penalty)
        assert seg.changepoints.tolist() == [50]

        splits = [
            cost.segment_cost(0, v) + cost.segment_cost(v, 100) for v in range(1, 100)
        ]
        assert int(np.argmin(splits)) + 1 == 50
        best_single = min(splits) + penalty
        no_split = cost.segment_cost(0, 100)
        best_double = min(
            cost.segment_cost(0, a) + cost.segment_cost(a, b) + cost.segment_cost(b, 100)
            for a in range(1, 99)
            for b in range(a + 1, 100)
        ) + 2 * penalty
        assert best_single < no_split
        assert best_single < best_double

    def test_huge_penalty_dominates(self):
        rng = np.random.default_rng(5)
        cost = QuantileEdfCost(15).fit(rng.normal(size=120) + np.repeat([0, 8, -3], 40))
        seg, _ = pelt(cost, 1e12)
        assert seg.m == 0

    def test_negative_penalty_rejected(self):
        cost = QuantileEdfCost(5).fit(np.arange(10.0))
        with pytest.raises(ValueError, match="penalty"):
            pelt(cost, -1.0)

    def test_short_series_warns(self):
        cost = LinearTrendCost().fit([4.0])
        with pytest.warns(UserWarning, match="shorter"):
            seg, _ = pelt(cost, 1.0)
        assert seg.m == 0
        assert seg.warning is not None
        assert seg.total_cost == cost.segment_cost(0, 1)

    def test_min_segment_length_respected(self):
        rng = np.random.default_rng(9)
        x = rng.normal(size=60) + np.repeat([0.0, 6.0, -6.0], 20)
        cost = QuantileEdfCost(12).fit(x)
        for min_len in (1, 5, 11):
            seg, _ = pelt(cost, 2.0, min_segment_length=min_len)
            lengths = np.diff(seg.boundaries())
            assert np.all(lengths >= min_len)

    def test_total_cost_matches_recomputation(self):
        rng = np.random.default_rng(13)
        x = rng.normal(size=150) + np.repeat([0, 4, 0], 50)
        cost = QuantileEdfCost(20).fit(x)
        seg, _ = pelt(cost, 5.0)
        bounds = seg.boundaries()
        direct = sum(cost.segment_cost(a, b) for a, b in zip(bounds[:-1], bounds[1:]))
        assert seg.total_cost == pytest.approx(direct, rel=1e-9)

    def test_penalty_monotonicity(self):
        rng = np.random.default_rng(21)
        x = rng.normal(size=200) + np.repeat([0, 3, -2, 5, 0], 40)
        cost = QuantileEdfCost(21).fit(x)
        counts = [pelt(cost, p)[0].m for p in np.linspace(0.05, 40.0, 25)]
        assert all(a >= b for a, b in zip(counts[:-1], counts[1:]))


class TestSolverTrace:
    def test_f_values_satisfy_recursion(self):
        rng = np.random.default_rng(2)
        x = rng.normal(size=80) + np.repeat([0, 5], 40)
        cost = QuantileEdfCost(10).fit(x)
        penalty = 4.0
        seg, trace = pelt(cost, penalty)
        f = np.concatenate(([0.0], trace.f_values))
        assert np.all(np.isfinite(trace.f_values))
        # each step's value is achievable by some admissible predecessor
        for v in range(1, 81):
            candidates = [
                f[u] + cost.segment_cost(u, v) + penalty for u in range(v)
            ]
            assert f[v] == pytest.approx(min(candidates), rel=1e-9)

    def test_pruning_happens_on_strong_change(self):
        x = _step_series(np.random.default_rng(3))
        cost = QuantileEdfCost(14).fit(x)
        _, trace = pelt(cost, 3 * np.log(len(x)))
        assert trace.pruned_total > 0
        unpruned_sizes = np.arange(1, len(x) + 1)
        assert np.any(trace.candidate_set_sizes < unpruned_sizes)

    def test_candidate_sets_grow_sublinearly_on_step_trains(self):
        from npcpt import generate_step_train

        means = []
        sizes = (500, 1000, 2000)
        for n in sizes:
            series, _ = generate_step_train(n, segment_length=100, seed=4)
            cost = QuantileEdfCost().fit(series)
            _, trace = pelt(cost, 3 * np.log(n))
            means.append(trace.candidate_set_sizes.mean())
        slope = np.polyfit(np.log(sizes), np.log(means), 1)[0]
        assert slope < 0.5


class TestOptimalPartitioning:
    def test_single_point(self):
        cost = QuantileEdfCost(1).fit([7.0])
        seg = optimal_partitioning(cost, 1.0)
        assert seg.m == 0
        assert seg.total_cost == cost.segment_cost(0, 1)

    @pytest.mark.parametrize("model_cls", ALL_COSTS)
    def test_matches_pelt_on_random_series(self, model_cls):
        rng = np.random.default_rng(31)
        for trial in range(8):
            n = int(rng.integers(30, 200))
            x = rng.normal(size=n)
            cuts = rng.integers(1, n, size=rng.integers(0, 4))
            for c in cuts:
                x[c:] += rng.normal() * 4
            cost = _fit(model_cls, x)
            penalty = float(rng.uniform(0.5, 20.0))
            seg_p, _ = pelt(cost, penalty)
            seg_o = optimal_partitioning(cost, penalty)
            assert seg_p.changepoints.tolist() == seg_o.changepoints.tolist()
            assert seg_p.total_cost == pytest.approx(seg_o.total_cost, rel=1e-9)


class TestSegmentNeighbourhood:
    def test_zero_changepoints_entry(self):
        rng = np.random.default_rng(41)
        x = rng.normal(size=50)
        cost = QuantileEdfCost(8).fit(x)
        results = segment_neighbourhood(cost, 3)
        assert results[0].m == 0
        assert results[0].total_cost == pytest.approx(cost.segment_cost(0, 50), rel=1e-12)

    def test_step_series_m1(self):
        x = np.concatenate([np.zeros(50), np.full(50, 10.0)])
        cost = QuantileEdfCost(28).fit(x)
        results = segment_neighbourhood(cost, 2)
        one = next(s for s in results if s.m == 1)
        assert one.changepoints.tolist() == [50]

    def test_costs_non_increasing_in_m(self):
        rng = np.random.default_rng(43)
        x = rng.normal(size=90) + np.repeat([0, 2, -1], 30)
        cost = QuantileEdfCost(12).fit(x)
        results = segment_neighbourhood(cost, 8)
        costs = [s.total_cost for s in results]
        assert all(a >= b - 1e-9 for a, b in zip(costs[:-1], costs[1:]))

    def test_restricted_positions(self):
        x = np.concatenate([np.zeros(40), np.full(40, 9.0)])
        cost = QuantileEdfCost(10).fit(x)
        results = segment_neighbourhood(cost, 2, positions=[10, 40, 70])
        for seg in results:
            assert set(seg.changepoints.tolist()) <= {10, 40, 70}
        one = next(s for s in results if s.m == 1)
        assert one.changepoints.tolist() == [40]

    def test_max_changepoints_validation(self):
        cost = QuantileEdfCost(3).fit(np.arange(10.0))
        with pytest.raises(ValueError):
            segment_neighbourhood(cost, 10)
        with pytest.raises(ValueError):
            segment_neighbourhood(cost, -1)


class TestSicSelect:
    def _dummy(self, m, cost):
        cps = list(range(1, m + 1))
        return Segmentation(n=100, changepoints=cps, total_cost=cost)

    def test_zero_penalty_takes_largest_m(self):
        entries = [self._dummy(m, 100.0 - m) for m in range(5)]
        assert sic_select(entries, 0.0).m == 4

    def test_huge_penalty_takes_m0(self):
        entries = [self._dummy(m, 100.0 - m) for m in range(5)]
        assert sic_select(entries, 1e9).m == 0

    def test_arithmetic_example(self):
        costs = [10.0, 4.0, 3.5, 3.4]
        entries = [self._dummy(m, c) for m, c in enumerate(costs)]
        assert sic_select(entries, 1.0).m == 1

    def test_ties_prefer_smaller_m(self):
        entries = [self._dummy(0, 10.0), self._dummy(1, 9.0)]
        assert sic_select(entries, 1.0).m == 0

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            sic_select([], 1.0)


class TestBruteForce:
    def test_single_point(self):
        cost = QuantileEdfCost(1).fit([2.0])
        assert brute_force(cost, 0.5).m == 0

    def test_two_blocks(self):
        cost = QuantileEdfCost(4).fit([0.0, 0.0, 9.0, 9.0])
        seg = brute_force(cost, 0.01)
        assert seg.changepoints.tolist() == [2]

    def test_refuses_large_n(self):
        cost = QuantileEdfCost(4).fit(np.arange(17.0))
        with pytest.raises(ValueError, match="limited"):
            brute_force(cost, 1.0)

    @pytest.mark.parametrize("model_cls", ALL_COSTS)
    def test_pelt_matches_brute_force(self, model_cls):
        rng = np.random.default_rng(53)
        for trial in range(50):
            n = int(rng.integers(2, 13))
            x = rng.normal(size=n)
            if rng.random() < 0.5 and n > 3:
                x[n // 2 :] += 5
            cost = _fit(model_cls, x)
            penalty = float(rng.uniform(0.05, 8.0))
            seg_b = brute_force(cost, penalty)
            seg_p, _ = pelt(cost, penalty)
            assert seg_p.changepoints.tolist() == seg_b.changepoints.tolist()
            assert seg_p.total_cost == pytest.approx(seg_b.total_cost, rel=1e-9, abs=1e-12)
