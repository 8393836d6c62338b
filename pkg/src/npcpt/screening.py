"""Candidate thinning via windowed two-sample distribution statistics.

A sliding window of length ``2 * half_window`` is centered at each admissible
split point; the two halves are compared with a Cramer-von Mises statistic and
only positions that are local maxima of the statistic within ``half_window``
survive. Restricting the fixed-count search to the survivors trades accuracy
for speed: the survivor set usually misses some optimal cut locations, which
is exactly the effect the benchmark suite quantifies.

Statistic evaluations at distinct centers are independent, so callers may
parallelize over centers if they wish; this implementation is sequential.
"""

from __future__ import annotations

import warnings

import numpy as np

from .costs import BaseCost
from .search import Segmentation, segment_neighbourhood
from .series import as_series


def default_half_window(n: int) -> int:
    """Default thinning half-window: ``ceil((log n)^(3/2) / 2)``."""
    if n < 1:
        raise ValueError("n must be positive")
    return int(np.ceil(np.log(n) ** 1.5 / 2.0))


def _pooled_cvm(left: np.ndarray, right: np.ndarray) -> float:
    # sum of squared empirical-CDF gaps over the pooled sample (with half
    # weight on ties), scaled by N1*N2/(N1+N2)^2
    n1, n2 = left.size, right.size
    left_sorted = np.sort(left)
    right_sorted = np.sort(right)
    pooled = np.concatenate((left_sorted, right_sorted))
    f1 = (
        np.searchsorted(left_sorted, pooled, side="left")
        + 0.5
        * (
            np.searchsorted(left_sorted, pooled, side="right")
            - np.searchsorted(left_sorted, pooled, side="left")
        )
    ) / n1
    f2 = (
        np.searchsorted(right_sorted, pooled, side="left")
        + 0.5
        * (
            np.searchsorted(right_sorted, pooled, side="right")
            - np.searchsorted(right_sorted, pooled, side="left")
        )
    ) / n2
    return float(n1 * n2 / (n1 + n2) ** 2 * np.sum((f1 - f2) ** 2))


def cvm_statistic(series, center: int, half_window: int) -> float:
    """Two-sample Cramer-von Mises statistic around a split point.

    Compares the ``half_window`` observations ending at ``center`` against the
    next ``half_window`` observations. Both empirical CDFs are evaluated at
    every pooled sample point with half weight on ties, and the sum of squared
    gaps is scaled by ``N1 N2 / (N1 + N2)^2``. Identical halves score 0;
    larger values indicate a stronger distributional change at ``center``.

    Requires ``half_window <= center <= n - half_window``.
    """
    series = as_series(series)
    h = int(half_window)
    if h < 1:
        raise ValueError(f"half_window must be positive, got {half_window}")
    if not h <= center <= series.n - h:
        raise ValueError(
            f"center must lie in [{h}, {series.n - h}] for half_window={h}, "
            f"got {center}"
        )
    x = series.values
    return _pooled_cvm(x[center - h : center], x[center : center + h])


def screen_candidates(series, half_window: int | None = None) -> np.ndarray:
    """Split positions whose window statistic is locally maximal.

    Position ``u`` survives unless some position within ``half_window`` of it
    scores strictly higher, or ties it from the left (exact ties keep only the
    leftmost position). Positions closer than ``half_window`` to either end of
    the series are never candidates, since the window statistic is undefined
    there. Returns an empty array (with a warning) when the series cannot fit
    a single full window.
    """
    series = as_series(series)
    n = series.n
    h = default_half_window(n) if half_window is None else int(half_window)
    if h < 1:
        raise ValueError(f"half_window must be positive, got {half_window}")
    if n < 2 * h:
        warnings.warn(
            f"series of length {n} is shorter than one full window (2 * {h}); "
            "no candidate positions"
        )
        return np.empty(0, dtype=int)

    centers = np.arange(h, n - h + 1)
    stats = np.array([cvm_statistic(series, int(c), h) for c in centers])

    retained = []
    for i, c in enumerate(centers):
        lo = np.searchsorted(centers, c - h, side="left")
        hi = np.searchsorted(centers, c + h, side="right")
        window = stats[lo:hi]
        if np.any(window > stats[i]):
            continue
        ties = np.flatnonzero(window == stats[i])
        if centers[lo + ties[0]] < c:
            continue
        retained.append(int(c))
    return np.array(retained, dtype=int)


def screened_segment_neighbourhood(
    cost: BaseCost,
    max_changepoints: int,
    half_window: int | None = None,
    min_segment_length: int | None = None,
) -> list[Segmentation]:
    """Fixed-count search restricted to locally CvM-maximal candidates.

    Equivalent to :func:`npcpt.search.segment_neighbourhood` with ``positions``
    set to :func:`screen_candidates` of the fitted series. Because the
    feasible set only shrinks, each returned cost is at least the cost of the
    unrestricted search at the same changepoint count.
    """
    cost._check_fitted()
    candidates = screen_candidates(cost.series_, half_window)
    return segment_neighbourhood(
        cost,
        max_changepoints,
        min_segment_length=min_segment_length,
        positions=candidates,
    )
