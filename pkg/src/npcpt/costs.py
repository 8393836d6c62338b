"""Segment cost models over a fixed univariate series.

Each model is fit once to a full series, precomputing prefix tables, and then
prices arbitrary contiguous segments ``values[start:end]``:

* :class:`QuantileEdfCost` -- empirical-CDF log-likelihood summed over a small
  set of quantile thresholds, O(K) per segment after O(nK) setup.
* :class:`FullEdfCost` -- the same likelihood integrated over every data value
  with rank-based weights, O(n) per segment after O(n^2) setup.
* :class:`LinearTrendCost` -- residual sum of squares of a least-squares line,
  O(1) per segment after O(n) setup.

All three costs are nonnegative and subadditive (splitting a segment never
increases total cost), which is what the pruned search in :mod:`npcpt.search`
relies on. Fitted models are immutable, so concurrent cost evaluations are
safe without locking.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .series import TimeSeries, as_series

try:
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    _HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        return wrap


def default_n_quantiles(n: int) -> int:
    """Default threshold count for :class:`QuantileEdfCost`: ``ceil(4 log n)``."""
    if n < 1:
        raise ValueError("n must be positive")
    return max(1, int(np.ceil(4.0 * np.log(n))))


def _loglik_terms(f: np.ndarray) -> np.ndarray:
    """Elementwise ``f log f + (1-f) log(1-f)`` with the ``0 log 0 = 0`` limit.

    Input must lie in [0, 1]; output lies in [-log 2, 0].
    """
    tiny = np.finfo(float).tiny
    g = 1.0 - f
    return f * np.log(np.clip(f, tiny, None)) + g * np.log(np.clip(g, tiny, None))


def segment_edf_loglik(series, start: int, end: int, t: float) -> float:
    """Binomial log-likelihood of a segment's empirical CDF at threshold ``t``.

    Returns ``(end - start) * [F log F + (1 - F) log(1 - F)]`` where ``F`` is
    the empirical CDF of ``values[start:end]`` evaluated at ``t`` with half
    weight on ties. Always in ``[-(end - start) * log 2, 0]``.
    """
    series = as_series(series)
    f = series.cdf(start, end)(t)
    return float((end - start) * _loglik_terms(np.asarray(f)))


def _halfcount_table(values: np.ndarray, thresholds: np.ndarray) -> np.ndarray:
    """Prefix table ``T[i, k] = #{j < i: x_j < t_k} + 0.5 * #{j < i: x_j = t_k}``.

    Entries are multiples of 0.5 not exceeding n, so the float64 cumulative
    sums are exact and segment counts recovered by subtraction match a direct
    count bit for bit.
    """
    marks = (values[:, None] < thresholds[None, :]).astype(float)
    marks += 0.5 * (values[:, None] == thresholds[None, :])
    table = np.zeros((values.size + 1, thresholds.size))
    np.cumsum(marks, axis=0, out=table[1:])
    return table


@dataclass(frozen=True)
class QuantileGrid:
    """Evaluation thresholds for the quantile-approximated distribution cost.

    Probability levels are symmetric about 0.5 and packed toward both tails,
    running from roughly ``1/(2n)`` up to ``(2n-1)/(2n)``; thresholds are the
    matching empirical quantiles (always realized data values). ``weight``
    scales the sum over thresholds so the cost magnitude is insensitive to
    the number of thresholds.
    """

    levels: np.ndarray
    thresholds: np.ndarray
    weight: float

    def __post_init__(self):
        self.levels.flags.writeable = False
        self.thresholds.flags.writeable = False

    @property
    def n_quantiles(self) -> int:
        return int(self.levels.size)

    @classmethod
    def from_series(cls, series, n_quantiles: int) -> "QuantileGrid":
        """Build the grid for a series.

        Levels are ``p_k = 1 / (1 + (2n-1) exp(-c (2k-1) / K))`` for
        ``k = 1..K`` with ``c = log(2n-1)``, and the weight is ``2c / K``.
        Requires ``1 <= n_quantiles <= n``.
        """
        series = as_series(series)
        n = series.n
        k_count = int(n_quantiles)
        if not 1 <= k_count <= n:
            raise ValueError(
                f"n_quantiles must be in [1, {n}], got {n_quantiles}"
            )
        scale = np.log(2.0 * n - 1.0)
        k = np.arange(1, k_count + 1)
        levels = 1.0 / (1.0 + (2.0 * n - 1.0) * np.exp(-scale * (2 * k - 1) / k_count))
        thresholds = np.atleast_1d(series.empirical_quantile(levels))
        return cls(levels=levels, thresholds=thresholds, weight=2.0 * scale / k_count)


class BaseCost:
    """Shared fit/validate machinery for segment cost models.

    Subclasses implement ``_precompute`` and ``segment_costs``. After
    ``fit``, ``segment_cost(u, v)`` prices ``values[u:v]`` for any
    ``0 <= u < v <= n``.
    """

    #: smallest segment length the model is meant to price
    min_segment_length = 1

    def fit(self, values) -> "BaseCost":
        """Precompute prefix tables for a series; returns self."""
        series = as_series(values)
        self.series_ = series
        self.n_ = series.n
        self._precompute(series)
        return self

    def _precompute(self, series: TimeSeries) -> None:
        raise NotImplementedError

    def _check_fitted(self) -> None:
        if not hasattr(self, "n_"):
            raise RuntimeError(
                f"{type(self).__name__} must be fit to a series before pricing segments"
            )

    def _check_ranges(self, starts: np.ndarray, ends: np.ndarray) -> None:
        if starts.shape != ends.shape:
            raise ValueError("starts and ends must have matching shapes")
        if starts.size and (
            starts.min() < 0 or ends.max() > self.n_ or np.any(starts >= ends)
        ):
            raise ValueError(
                f"segment bounds must satisfy 0 <= start < end <= {self.n_}"
            )

    def segment_costs(self, starts, ends) -> np.ndarray:
        """Vectorized segment costs for paired ``starts``/``ends`` arrays."""
        raise NotImplementedError

    def segment_cost(self, start: int, end: int) -> float:
        """Cost of the single segment ``values[start:end]``."""
        out = self.segment_costs(
            np.asarray([start], dtype=int), np.asarray([end], dtype=int)
        )
        return float(out[0])

    def segment_cost_matrix(self, positions, min_segment_length: int = 1) -> np.ndarray:
        """Dense lookup ``C[i, j] = cost(positions[i], positions[j])``.

        Pairs that are out of order or shorter than ``min_segment_length``
        hold +inf. Used by the fixed-count dynamic programs, which price
        every admissible pair at once; subclasses may override with a faster
        batch kernel.
        """
        self._check_fitted()
        positions = np.asarray(positions, dtype=int)
        g = positions.size
        out = np.full((g, g), np.inf)
        for j in range(1, g):
            end = positions[j]
            valid = np.flatnonzero(positions[:j] <= end - min_segment_length)
            if valid.size:
                out[valid, j] = self.segment_costs(
                    positions[valid], np.full(valid.size, end, dtype=int)
                )
        return out

    def get_params(self, deep: bool = True) -> dict:
        return {}

    def __repr__(self) -> str:
        params = ", ".join(f"{k}={v!r}" for k, v in self.get_params().items())
        return f"{type(self).__name__}({params})"


class QuantileEdfCost(BaseCost):
    """Distribution-free segment cost from the empirical CDF at K thresholds.

    The cost of a segment is ``weight * sum_k -L_k`` where ``L_k`` is the
    binomial log-likelihood of the segment's empirical CDF at threshold
    ``t_k`` (see :func:`segment_edf_loglik`) and the thresholds are tail-heavy
    empirical quantiles of the whole series. One evaluation costs O(K) after
    an O(nK) precomputation pass.

    Parameters
    ----------
    n_quantiles : int or None
        Number of thresholds. ``None`` resolves to ``ceil(4 log n)`` at fit
        time, which keeps per-segment work logarithmic in the series length.
    """

    def __init__(self, n_quantiles: int | None = None):
        self.n_quantiles = n_quantiles

    def get_params(self, deep: bool = True) -> dict:
        return {"n_quantiles": self.n_quantiles}

    def _precompute(self, series: TimeSeries) -> None:
        resolved = (
            default_n_quantiles(series.n)
            if self.n_quantiles is None
            else int(self.n_quantiles)
        )
        self.grid_ = QuantileGrid.from_series(series, resolved)
        self.n_quantiles_ = self.grid_.n_quantiles
        self._table = _halfcount_table(series.values, self.grid_.thresholds)

    def segment_costs(self, starts, ends) -> np.ndarray:
        self._check_fitted()
        starts = np.asarray(starts, dtype=int)
        ends = np.asarray(ends, dtype=int)
        self._check_ranges(starts, ends)
        lengths = (ends - starts).astype(float)
        f = (self._table[ends] - self._table[starts]) / lengths[:, None]
        return self.grid_.weight * lengths * -_loglik_terms(f).sum(axis=1)


@njit(cache=True)
def _edf_matrix_kernel(table, weights, xlogx_halves, positions, min_len, out):
    # cost(u, v) = len*log(len)*sum(w) - sum_r w_r * (g(c_r) + g(len - c_r))
    # with g(t) = t log t and c_r the half-weighted count below threshold r;
    # counts are exact multiples of 0.5, so 2*c indexes the g lookup exactly
    g = positions.shape[0]
    n_thresholds = table.shape[1]
    weight_total = 0.0
    for r in range(n_thresholds):
        weight_total += weights[r]
    for j in range(1, g):
        v = positions[j]
        for i in range(j):
            u = positions[i]
            length = v - u
            if length < min_len:
                continue
            acc = 0.0
            for r in range(n_thresholds):
                doubled = int(2.0 * (table[v, r] - table[u, r]))
                acc += weights[r] * (
                    xlogx_halves[doubled] + xlogx_halves[2 * length - doubled]
                )
            out[i, j] = length * np.log(length) * weight_total - acc


class FullEdfCost(BaseCost):
    """Empirical-CDF likelihood cost integrated over every data value.

    This is the exhaustive objective that :class:`QuantileEdfCost`
    approximates: thresholds are all n order statistics of the series, the
    term at rank ``r`` is weighted by ``1/((r - 0.5)(n - r + 0.5))``, and the
    total is scaled by ``n``. Tied data values contribute one term per rank.
    O(n) per segment after an O(n^2) precomputation; the prefix table holds
    n(n+1) floats, so this model is intended for series up to a few thousand
    points.
    """

    def _precompute(self, series: TimeSeries) -> None:
        n = series.n
        ranks = np.arange(1, n + 1, dtype=float)
        self._rank_weights = n / ((ranks - 0.5) * (n - ranks + 0.5))
        self._table = _halfcount_table(series.values, series.sorted_values)

    def segment_costs(self, starts, ends) -> np.ndarray:
        self._check_fitted()
        starts = np.asarray(starts, dtype=int)
        ends = np.asarray(ends, dtype=int)
        self._check_ranges(starts, ends)
        lengths = (ends - starts).astype(float)
        f = (self._table[ends] - self._table[starts]) / lengths[:, None]
        return lengths * -(_loglik_terms(f) @ self._rank_weights)

    def segment_cost_matrix(self, positions, min_segment_length: int = 1) -> np.ndarray:
        """Batch kernel for the O(n^2)-pair lookup the fixed-count search needs.

        With numba available this runs a compiled single-pass kernel (a few
        nanoseconds per (pair, threshold) term instead of large numpy
        temporaries); values agree with :meth:`segment_costs` to ~1e-13
        relative, differing only in summation order. Falls back to the
        generic implementation otherwise.
        """
        if not _HAVE_NUMBA:
            return super().segment_cost_matrix(positions, min_segment_length)
        self._check_fitted()
        positions = np.asarray(positions, dtype=np.int64)
        halves = np.arange(2 * self.n_ + 1, dtype=float) / 2.0
        with np.errstate(divide="ignore", invalid="ignore"):
            xlogx_halves = np.where(halves > 0, halves * np.log(halves), 0.0)
        out = np.full((positions.size, positions.size), np.inf)
        _edf_matrix_kernel(
            self._table,
            self._rank_weights,
            xlogx_halves,
            positions,
            int(min_segment_length),
            out,
        )
        return out


def _rss_from_sums(m, sx, sxx, sy, sxy, syy) -> np.ndarray:
    """Residual sum of squares of a least-squares line, from raw moment sums.

    ``m`` is the point count and the remaining arguments are sums of x, x^2,
    y, x*y and y^2 over the segment. Single-point segments get 0 (a line fits
    them exactly in the limit). Rounding can push the algebraic result a hair
    negative, so the output is clipped at 0.
    """
    m = np.asarray(m, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        sxx_c = sxx - sx * sx / m
        sxy_c = sxy - sx * sy / m
        syy_c = syy - sy * sy / m
        rss = syy_c - sxy_c * sxy_c / sxx_c
    rss = np.where(m < 2, 0.0, rss)
    return np.maximum(rss, 0.0)


def linear_trend_rss(values, start: int, end: int) -> float:
    """From-scratch line-fit residual for ``values[start:end]``.

    Computes the moment sums directly over the slice (no prefix tables) and
    shares the closed form with :class:`LinearTrendCost`, so on integer-valued
    data the two paths agree exactly.
    """
    series = as_series(values)
    if not 0 <= start < end <= series.n:
        raise ValueError(f"invalid segment [{start}, {end}) for n={series.n}")
    x = np.arange(start, end, dtype=float)
    y = series.values[start:end]
    out = _rss_from_sums(
        end - start,
        x.sum(),
        (x * x).sum(),
        y.sum(),
        (x * y).sum(),
        (y * y).sum(),
    )
    return float(out)


class LinearTrendCost(BaseCost):
    """Least-squares straight-line residual cost for each segment.

    Gaussian change-in-slope model: the cost of ``values[u:v]`` is the
    residual sum of squares of the best line in the observation index,
    ``min over (a, b) of sum (y_i - a - b i)^2``. Evaluation is O(1) via
    prefix sums of ``(x, x^2, y, xy, y^2)``. A line needs two points, so the
    default minimum segment length is 2; shorter segments price at 0.
    """

    min_segment_length = 2

    def _precompute(self, series: TimeSeries) -> None:
        x = np.arange(series.n, dtype=float)
        y = series.values
        self._prefix = {
            "sx": _prefixed(x),
            "sxx": _prefixed(x * x),
            "sy": _prefixed(y),
            "sxy": _prefixed(x * y),
            "syy": _prefixed(y * y),
        }

    def segment_costs(self, starts, ends) -> np.ndarray:
        self._check_fitted()
        starts = np.asarray(starts, dtype=int)
        ends = np.asarray(ends, dtype=int)
        self._check_ranges(starts, ends)
        p = self._prefix
        return _rss_from_sums(
            ends - starts,
            p["sx"][ends] - p["sx"][starts],
            p["sxx"][ends] - p["sxx"][starts],
            p["sy"][ends] - p["sy"][starts],
            p["sxy"][ends] - p["sxy"][starts],
            p["syy"][ends] - p["syy"][starts],
        )


def _prefixed(x: np.ndarray) -> np.ndarray:
    out = np.zeros(x.size + 1)
    np.cumsum(x, out=out[1:])
    return out
