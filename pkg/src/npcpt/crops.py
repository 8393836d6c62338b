"""Penalty-range sweeping and elbow utilities.

:func:`crops_sweep` recovers every optimal segmentation across a continuous
penalty interval from a small number of solver runs: the penalized cost of a
fixed segmentation is linear in the penalty with slope equal to its
changepoint count, so the optimal solutions form the lower envelope of lines
with integer slopes, and adjacent pieces of the envelope meet at crossing
penalties that are computable from unpenalized costs alone. Solutions whose
counts differ by more than one are probed at that crossing; counts that
differ by exactly one cannot hide anything between them (no line with a
fractional slope exists), so such pairs resolve without another run.

The expensive precomputation lives in the fitted cost model and is shared by
every run; the dynamic programs themselves are not shared across penalties.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .costs import BaseCost
from .search import Segmentation, pelt

#: relative tolerance for treating two equal-count solutions as the same
#: (guards against endless subdivision on floating-point cost noise)
MERGE_RTOL = 1e-9


@dataclass(frozen=True)
class PathEntry:
    """One piece of the penalty path.

    ``segmentation`` is optimal for every penalty in
    ``[penalty_low, penalty_high)`` (the final entry's interval is closed on
    the right).
    """

    penalty_low: float
    penalty_high: float
    segmentation: Segmentation

    @property
    def m(self) -> int:
        return self.segmentation.m

    @property
    def unpenalized_cost(self) -> float:
        return self.segmentation.total_cost


@dataclass(frozen=True)
class PenaltyPath:
    """Sweep result: penalty intervals mapped to their optimal segmentations.

    Entries are ordered by penalty; changepoint counts are non-increasing
    along the path, and the intervals partition the swept range.
    """

    entries: tuple[PathEntry, ...]
    pelt_call_count: int

    @property
    def penalty_min(self) -> float:
        return self.entries[0].penalty_low

    @property
    def penalty_max(self) -> float:
        return self.entries[-1].penalty_high

    def entry_at(self, penalty: float) -> PathEntry:
        """The path entry whose interval covers ``penalty``."""
        if not self.penalty_min <= penalty <= self.penalty_max:
            raise ValueError(
                f"penalty {penalty} outside swept range "
                f"[{self.penalty_min}, {self.penalty_max}]"
            )
        for entry in self.entries:
            if penalty < entry.penalty_high:
                return entry
        return self.entries[-1]

    def segmentation_for(self, m: int) -> Segmentation:
        """The stored segmentation with exactly ``m`` changepoints."""
        for entry in self.entries:
            if entry.m == m:
                return entry.segmentation
        raise KeyError(f"no segmentation with {m} changepoints on the path")


def _same_solution(a: Segmentation, b: Segmentation) -> bool:
    if a.m != b.m:
        return False
    scale = max(abs(a.total_cost), abs(b.total_cost), 1.0)
    return abs(a.total_cost - b.total_cost) <= MERGE_RTOL * scale


def crops_sweep(
    cost: BaseCost,
    penalty_min: float,
    penalty_max: float,
    min_segment_length: int | None = None,
) -> PenaltyPath:
    """All optimal segmentations for penalties in ``[penalty_min, penalty_max]``.

    Runs the pruned solver at both endpoints and subdivides at crossing
    penalties until no interval can contain an undiscovered segmentation.
    Uses at most ``m(penalty_min) - m(penalty_max) + 2`` solver runs.

    Parameters
    ----------
    cost : BaseCost
        Fitted cost model (shared across all runs).
    penalty_min, penalty_max : float
        Swept range; requires ``0 <= penalty_min < penalty_max``.
    min_segment_length : int or None
        Passed through to :func:`npcpt.search.pelt`.
    """
    if penalty_min < 0:
        raise ValueError(f"penalty_min must be nonnegative, got {penalty_min}")
    if not penalty_min < penalty_max:
        raise ValueError(
            f"need penalty_min < penalty_max, got [{penalty_min}, {penalty_max}]"
        )

    calls = 0

    def run(penalty: float) -> Segmentation:
        nonlocal calls
        calls += 1
        seg, _ = pelt(cost, penalty, min_segment_length)
        return seg

    low = run(penalty_min)
    high = run(penalty_max)

    # One representative per changepoint count; among equal counts the cheaper
    # one dominates at every penalty.
    found: dict[int, Segmentation] = {}

    def record(seg: Segmentation) -> None:
        kept = found.get(seg.m)
        if kept is None or seg.total_cost < kept.total_cost:
            found[seg.m] = seg

    record(low)
    record(high)

    stack = [(penalty_min, low, penalty_max, high)]
    while stack:
        lo_pen, lo_seg, hi_pen, hi_seg = stack.pop()
        if lo_seg.m <= hi_seg.m + 1:
            # Identical counts, or counts one apart: the crossing penalty is
            # determined by the two costs and nothing can lie in between.
            continue
        cross = (hi_seg.total_cost - lo_seg.total_cost) / (lo_seg.m - hi_seg.m)
        if not lo_pen < cross <= hi_pen:
            # Degenerate float geometry; treat the interval as resolved.
            continue
        probe = run(cross)
        record(probe)
        if _same_solution(probe, hi_seg) or _same_solution(probe, lo_seg):
            continue
        if not hi_seg.m < probe.m < lo_seg.m:
            # Count outside the open gap: float noise at the crossing; the
            # interval holds nothing new.
            continue
        stack.append((lo_pen, lo_seg, cross, probe))
        stack.append((cross, probe, hi_pen, hi_seg))

    # Assemble the path as the exact lower envelope of the recorded cost
    # lines (penalized cost is linear in the penalty with slope m). Walking
    # the envelope drops any recorded solution that never wins an interval.
    solutions = [found[m] for m in sorted(found)]
    entries: list[PathEntry] = []
    boundary = penalty_min
    current = min(
        solutions, key=lambda s: (s.penalized_cost(penalty_min), s.m)
    )
    while True:
        crossings = [
            ((s.total_cost - current.total_cost) / (current.m - s.m), s)
            for s in solutions
            if s.m < current.m
        ]
        viable = [(c, s) for c, s in crossings if boundary < c <= penalty_max]
        if not viable:
            entries.append(PathEntry(boundary, penalty_max, current))
            break
        next_cross = min(c for c, _ in viable)
        entries.append(PathEntry(boundary, next_cross, current))
        boundary = next_cross
        # Among lines meeting at this crossing, the flattest wins beyond it.
        current = min((s for c, s in viable if c == next_cross), key=lambda s: s.m)

    return PenaltyPath(entries=tuple(entries), pelt_call_count=calls)


def elbow_curve(path: PenaltyPath) -> list[tuple[int, float]]:
    """Changepoint count versus unpenalized cost along a penalty path.

    Sorted by count ascending; costs are strictly decreasing (an entry whose
    cost does not improve on the previous, smaller count collapses into it).
    """
    if not path.entries:
        raise ValueError("empty penalty path")
    by_m: dict[int, float] = {}
    for entry in path.entries:
        cost = entry.unpenalized_cost
        if entry.m not in by_m or cost < by_m[entry.m]:
            by_m[entry.m] = cost
    points: list[tuple[int, float]] = []
    for m in sorted(by_m):
        if points and by_m[m] >= points[-1][1]:
            continue
        points.append((m, by_m[m]))
    return points


def suggest_elbow(curve: list[tuple[int, float]]) -> int | None:
    """Changepoint count at the sharpest bend of the cost curve.

    Scores each interior point by the drop in slope across it (a discrete
    curvature over possibly non-consecutive counts), normalized by the curve's
    total cost span so the choice is scale-free. Ties go to the smallest
    count. The curve itself remains the primary output; this is only a
    suggestion. Returns ``None`` for curves with fewer than 3 points.
    """
    if len(curve) < 3:
        return None
    ms = np.array([p[0] for p in curve], dtype=float)
    cs = np.array([p[1] for p in curve], dtype=float)
    span = cs[0] - cs[-1]
    if span <= 0:
        span = 1.0
    slopes = (cs[:-1] - cs[1:]) / (ms[1:] - ms[:-1])
    curvature = (slopes[:-1] - slopes[1:]) / span
    return int(ms[1:-1][int(np.argmax(curvature))])
