"""Optimal-partitioning solvers over a fitted segment cost model.

* :func:`pelt` -- penalized partitioning with lossless candidate pruning.
* :func:`optimal_partitioning` -- the same recursion without pruning; used as
  the pruning-correctness oracle.
* :func:`segment_neighbourhood` -- best segmentation for every changepoint
  count up to a cap, optionally restricted to a candidate position set.
* :func:`sic_select` -- pick a changepoint count from such a sequence by
  penalized cost.
* :func:`brute_force` -- exhaustive reference for tiny inputs.

Changepoints follow the prefix-length convention: changepoint ``tau`` means
the cut falls between ``values[tau - 1]`` and ``values[tau]``, so a
segmentation with changepoints ``tau_1 < ... < tau_m`` has segments
``values[0:tau_1], values[tau_1:tau_2], ..., values[tau_m:n]``.

Each solver run is sequential, but runs over the same fitted (immutable) cost
model may execute concurrently.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .costs import BaseCost

#: relative slack in the pruning inequality, so float noise around an exact
#: tie cannot leave a dead candidate alive (or prune a strictly better one).
PRUNE_RTOL = 1e-12

#: relative slack for recognizing equal-cost minimizers: mathematically tied
#: segmentations can differ by a few ulps once forward accumulation orders
#: differ, and tie-breaking must still engage on them.
TIE_RTOL = 1e-10


@dataclass(frozen=True, eq=False)
class Segmentation:
    """A changepoint set together with its penalty-free total segment cost.

    ``total_cost`` is the sum of per-segment costs recomputed from the cost
    model, with no penalty terms included.
    """

    n: int
    changepoints: np.ndarray
    total_cost: float
    warning: str | None = None

    def __post_init__(self):
        cpts = np.array(self.changepoints, dtype=int)
        cpts.flags.writeable = False
        object.__setattr__(self, "changepoints", cpts)
        if cpts.size and (
            cpts[0] <= 0 or cpts[-1] >= self.n or np.any(np.diff(cpts) <= 0)
        ):
            raise ValueError(
                "changepoints must be strictly increasing and interior to (0, n)"
            )

    @property
    def m(self) -> int:
        """Number of changepoints."""
        return int(self.changepoints.size)

    def boundaries(self) -> np.ndarray:
        """Segment boundaries including both endpoints: ``[0, tau_1, ..., n]``."""
        return np.concatenate(([0], self.changepoints, [self.n]))

    def segments(self) -> list[tuple[int, int]]:
        """Half-open ``(start, end)`` index pairs, one per segment."""
        b = self.boundaries()
        return list(zip(b[:-1].tolist(), b[1:].tolist()))

    def penalized_cost(self, penalty: float) -> float:
        """``total_cost + m * penalty``."""
        return self.total_cost + self.m * penalty

    def __repr__(self) -> str:
        return (
            f"Segmentation(n={self.n}, m={self.m}, "
            f"changepoints={self.changepoints.tolist()}, "
            f"total_cost={self.total_cost:.6g})"
        )


@dataclass(frozen=True, eq=False)
class SolverTrace:
    """Per-step diagnostics of one partitioning run.

    ``f_values[v - 1]`` is the optimal penalized objective for the prefix
    ``values[0:v]`` (one penalty per segment); ``candidate_set_sizes[v - 1]``
    counts the candidate segment starts retained after step ``v``.
    """

    candidate_set_sizes: np.ndarray
    f_values: np.ndarray
    pruned_total: int


def _recomputed_total(cost: BaseCost, changepoints: np.ndarray, n: int) -> float:
    bounds = np.concatenate(([0], changepoints, [n]))
    return float(cost.segment_costs(bounds[:-1], bounds[1:]).sum())


def _degenerate_result(cost: BaseCost, note: str) -> tuple[Segmentation, SolverTrace]:
    warnings.warn(note, stacklevel=3)
    seg = Segmentation(
        n=cost.n_,
        changepoints=np.empty(0, dtype=int),
        total_cost=cost.segment_cost(0, cost.n_),
        warning=note,
    )
    trace = SolverTrace(
        candidate_set_sizes=np.empty(0, dtype=int),
        f_values=np.empty(0),
        pruned_total=0,
    )
    return seg, trace


def _solve_partition(
    cost: BaseCost,
    penalty: float,
    min_segment_length: int | None,
    prune: bool,
) -> tuple[Segmentation, SolverTrace]:
    cost._check_fitted()
    if penalty < 0:
        raise ValueError(f"penalty must be nonnegative, got {penalty}")
    min_len = (
        cost.min_segment_length if min_segment_length is None else int(min_segment_length)
    )
    if min_len < 1:
        raise ValueError(f"min_segment_length must be positive, got {min_len}")
    n = cost.n_
    if n < min_len:
        return _degenerate_result(
            cost, f"series of length {n} is shorter than min_segment_length={min_len}"
        )

    # f[v] = best sum of (segment cost + penalty) over admissible
    # segmentations of values[0:v]; one penalty per segment, so f[n] exceeds
    # the m * penalty convention by exactly one penalty.
    f = np.full(n + 1, np.inf)
    f[0] = 0.0
    prev = np.zeros(n + 1, dtype=int)
    candidates = np.array([0], dtype=int)
    sizes = np.zeros(n, dtype=int)
    pruned_total = 0

    for v in range(1, n + 1):
        if v < min_len:
            sizes[v - 1] = candidates.size
            continue
        # Candidates closer than min_len to v are deferred: not evaluable yet
        # and never subject to pruning. `candidates` stays sorted, so the
        # evaluable prefix is found by bisection.
        n_eval = int(np.searchsorted(candidates, v - min_len, side="right"))
        evaluable = candidates[:n_eval]
        seg_costs = cost.segment_costs(evaluable, np.full(n_eval, v, dtype=int))
        totals = f[evaluable] + seg_costs + penalty
        best_value = float(totals.min())
        # smallest start among (near-)tied minimizers; evaluable is ascending
        best = int(np.argmax(totals <= best_value + TIE_RTOL * abs(best_value)))
        f[v] = best_value
        prev[v] = evaluable[best]
        if prune:
            keep = (totals - penalty) < f[v] - PRUNE_RTOL * abs(f[v])
            # The minimizer itself is only at the pruning boundary when the
            # penalty is ~0; keep it so future steps always have an evaluable
            # candidate (keeping extra candidates never costs optimality).
            keep[best] = True
            pruned_total += n_eval - int(np.count_nonzero(keep))
            candidates = np.concatenate(
                (evaluable[keep], candidates[n_eval:], [v])
            )
        else:
            candidates = np.append(candidates, v)
        sizes[v - 1] = candidates.size

    cpts = []
    v = n
    while prev[v] > 0:
        cpts.append(prev[v])
        v = prev[v]
    changepoints = np.array(cpts[::-1], dtype=int)

    seg = Segmentation(
        n=n,
        changepoints=changepoints,
        total_cost=_recomputed_total(cost, changepoints, n),
    )
    trace = SolverTrace(
        candidate_set_sizes=sizes,
        f_values=f[1:],
        pruned_total=pruned_total,
    )
    return seg, trace


def pelt(
    cost: BaseCost,
    penalty: float,
    min_segment_length: int | None = None,
) -> tuple[Segmentation, SolverTrace]:
    """Exact penalized partitioning with pruning.

    Minimizes the sum of segment costs plus ``penalty`` per segment over all
    segmentations whose segments are at least ``min_segment_length`` long
    (defaulting to the cost model's own minimum). A candidate start ``u`` is
    permanently discarded at step ``v`` once
    ``f(u) + cost(u, v) >= f(v)``, which cannot exclude any future optimum
    because the costs are subadditive; the result is therefore identical to
    :func:`optimal_partitioning`.

    Returns the optimal :class:`Segmentation` and a :class:`SolverTrace`.
    A series shorter than ``min_segment_length`` yields a no-changepoint
    result carrying a warning.
    """
    return _solve_partition(cost, penalty, min_segment_length, prune=True)


def optimal_partitioning(
    cost: BaseCost,
    penalty: float,
    min_segment_length: int | None = None,
) -> Segmentation:
    """The :func:`pelt` recursion without pruning (quadratic-time oracle)."""
    seg, _ = _solve_partition(cost, penalty, min_segment_length, prune=False)
    return seg


def segment_neighbourhood(
    cost: BaseCost,
    max_changepoints: int,
    min_segment_length: int | None = None,
    positions=None,
) -> list[Segmentation]:
    """Best segmentation for each changepoint count ``m = 0..max_changepoints``.

    Dynamic program over segment ends; with all positions admissible it costs
    O(max_changepoints * n^2) cost lookups. Costs are non-increasing in ``m``
    since every m-changepoint segmentation is also feasible with one more cut.

    Parameters
    ----------
    cost : BaseCost
        Fitted cost model.
    max_changepoints : int
        Largest changepoint count to solve for; must be < n.
    min_segment_length : int or None
        Defaults to the cost model's minimum.
    positions : array-like or None
        Optional sorted set of admissible changepoint locations (interior
        indices). ``None`` admits every interior index.

    Returns
    -------
    list of Segmentation
        One entry per feasible ``m``, in increasing order of ``m``. Counts
        that cannot be realized (too few admissible positions, or segments
        would fall below the minimum length) are omitted.
    """
    cost._check_fitted()
    n = cost.n_
    max_changepoints = int(max_changepoints)
    if not 0 <= max_changepoints < n:
        raise ValueError(
            f"max_changepoints must be in [0, n) = [0, {n}), got {max_changepoints}"
        )
    min_len = (
        cost.min_segment_length if min_segment_length is None else int(min_segment_length)
    )
    if positions is None:
        interior = np.arange(1, n, dtype=int)
    else:
        interior = np.unique(np.asarray(positions, dtype=int))
        if interior.size and (interior[0] < 1 or interior[-1] >= n):
            raise ValueError("candidate positions must lie strictly inside (0, n)")
    grid = np.concatenate(([0], interior, [n]))
    g = grid.size

    c = cost.segment_cost_matrix(grid, min_len)

    # best[m][j]: optimal cost of segmenting values[0:grid[j]] with exactly m
    # cuts, all placed on the grid. back[m][j]: grid index of the last cut.
    best = np.full((max_changepoints + 1, g), np.inf)
    back = np.zeros((max_changepoints + 1, g), dtype=int)
    best[0] = c[0]  # one segment; c[0, 0] is +inf, so grid point 0 stays unreachable
    for m in range(1, max_changepoints + 1):
        stacked = best[m - 1][:, None] + c
        back[m] = np.argmin(stacked, axis=0)
        best[m] = stacked[back[m], np.arange(g)]

    results = []
    last = g - 1
    for m in range(max_changepoints + 1):
        if not np.isfinite(best[m][last]):
            continue
        cuts = []
        j = last
        for level in range(m, 0, -1):
            j = int(back[level][j])
            cuts.append(int(grid[j]))
        changepoints = np.array(cuts[::-1], dtype=int)
        results.append(
            Segmentation(
                n=n,
                changepoints=changepoints,
                total_cost=_recomputed_total(cost, changepoints, n),
            )
        )
    return results


def sic_select(candidates: list[Segmentation], penalty: float) -> Segmentation:
    """Pick the candidate minimizing ``total_cost + m * penalty``.

    Ties break toward fewer changepoints. Candidates are typically the output
    of :func:`segment_neighbourhood`.
    """
    if not candidates:
        raise ValueError("no candidate segmentations to select from")
    if penalty < 0:
        raise ValueError(f"penalty must be nonnegative, got {penalty}")
    ordered = sorted(candidates, key=lambda s: s.m)
    best = ordered[0]
    best_value = best.penalized_cost(penalty)
    for seg in ordered[1:]:
        value = seg.penalized_cost(penalty)
        if value < best_value:
            best, best_value = seg, value
    return best


#: enumeration cap for the exhaustive reference solver
BRUTE_FORCE_MAX_N = 16


def brute_force(
    cost: BaseCost,
    penalty: float,
    min_segment_length: int | None = None,
) -> Segmentation:
    """Exhaustive minimizer of the penalized cost over all 2^(n-1) segmentations.

    Ties break by fewest changepoints, then by lexicographically smallest
    changepoint vector. Refuses series longer than ``BRUTE_FORCE_MAX_N``.
    """
    cost._check_fitted()
    if penalty < 0:
        raise ValueError(f"penalty must be nonnegative, got {penalty}")
    n = cost.n_
    if n > BRUTE_FORCE_MAX_N:
        raise ValueError(
            f"brute force enumeration is limited to n <= {BRUTE_FORCE_MAX_N}, got n={n}"
        )
    min_len = (
        cost.min_segment_length if min_segment_length is None else int(min_segment_length)
    )
    if n < min_len:
        seg, _ = _degenerate_result(
            cost, f"series of length {n} is shorter than min_segment_length={min_len}"
        )
        return seg

    pair_cost = np.full((n + 1, n + 1), np.inf)
    for v in range(1, n + 1):
        starts = np.arange(0, v, dtype=int)
        pair_cost[:v, v] = cost.segment_costs(starts, np.full(v, v, dtype=int))

    best_value = np.inf
    best_rank: tuple[int, tuple[int, ...]] | None = None
    best_cuts: tuple[int, ...] = ()
    for mask in range(1 << (n - 1)):
        cuts = tuple(i + 1 for i in range(n - 1) if (mask >> i) & 1)
        bounds = (0,) + cuts + (n,)
        if any(b - a < min_len for a, b in zip(bounds[:-1], bounds[1:])):
            continue
        value = sum(pair_cost[a, b] for a, b in zip(bounds[:-1], bounds[1:]))
        value += len(cuts) * penalty
        slack = TIE_RTOL * abs(best_value) if np.isfinite(best_value) else 0.0
        if value < best_value - slack:
            best_value, best_rank, best_cuts = value, (len(cuts), cuts), cuts
        elif value <= best_value + slack and (len(cuts), cuts) < best_rank:
            best_rank, best_cuts = (len(cuts), cuts), cuts
            best_value = min(best_value, value)

    changepoints = np.array(best_cuts, dtype=int)
    return Segmentation(
        n=n,
        changepoints=changepoints,
        total_cost=_recomputed_total(cost, changepoints, n),
    )
