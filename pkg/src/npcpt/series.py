"""Univariate series container and empirical distribution helpers."""

from __future__ import annotations

import numpy as np


def check_series(values, min_length: int = 1) -> np.ndarray:
    """Validate an observation sequence and return it as a read-only float array.

    Accepts any array-like of shape ``(n,)`` or ``(n, 1)``. Non-finite entries
    (NaN, +/-inf) are rejected outright rather than dropped.

    Parameters
    ----------
    values : array-like
        Ordered observations.
    min_length : int
        Smallest admissible number of observations.

    Returns
    -------
    np.ndarray
        1-D float64 copy with ``writeable=False``.
    """
    x = np.asarray(values, dtype=float)
    if x.ndim == 2 and x.shape[1] == 1:
        x = x[:, 0]
    if x.ndim != 1:
        raise ValueError(f"expected a univariate series, got shape {x.shape}")
    if x.size < min_length:
        raise ValueError(
            f"series has {x.size} observations, need at least {min_length}"
        )
    if not np.all(np.isfinite(x)):
        first_bad = int(np.flatnonzero(~np.isfinite(x))[0])
        raise ValueError(f"non-finite observation at position {first_bad}")
    x = x.copy()
    x.flags.writeable = False
    return x


class TimeSeries:
    """Ordered univariate observations with cached order statistics.

    Instances are immutable after construction, so they can be shared freely
    across threads and across cost models.

    Attributes
    ----------
    values : np.ndarray
        The observations, in their original order (read-only).
    n : int
        Number of observations.
    sorted_values : np.ndarray
        The order statistics of ``values`` (read-only).
    """

    def __init__(self, values):
        self.values = check_series(values)
        self.n = int(self.values.size)
        self.sorted_values = np.sort(self.values)
        self.sorted_values.flags.writeable = False

    def __len__(self) -> int:
        return self.n

    def __repr__(self) -> str:
        return f"TimeSeries(n={self.n})"

    def empirical_quantile(self, p):
        """Left-continuous empirical quantile(s).

        Returns the smallest order statistic carrying at least fraction ``p``
        of the sample, i.e. ``sorted_values[ceil(p * n) - 1]`` with the rank
        clamped into ``[1, n]``. Quantiles are therefore always realized data
        values, which keeps downstream tie counting exact.
        """
        p = np.asarray(p, dtype=float)
        ranks = np.clip(np.ceil(p * self.n).astype(int), 1, self.n)
        out = self.sorted_values[ranks - 1]
        return out if out.ndim else float(out)

    def cdf(self, start: int = 0, end: int | None = None) -> "EmpiricalCdf":
        """Empirical CDF of the slice ``values[start:end]``."""
        return EmpiricalCdf(self, start, end)


def as_series(values) -> TimeSeries:
    """Coerce an array-like (or pass through a TimeSeries) to TimeSeries."""
    return values if isinstance(values, TimeSeries) else TimeSeries(values)


class EmpiricalCdf:
    """Empirical CDF of a contiguous slice, with half weight on ties.

    ``F(t) = (#{x_j < t} + 0.5 * #{x_j = t}) / (end - start)`` over the slice
    ``series.values[start:end]``. Values lie in ``[0, 1]`` and are
    non-decreasing in ``t``. Queries cost ``O(log(end - start))`` after the
    slice is sorted once at construction.
    """

    def __init__(self, series: TimeSeries, start: int = 0, end: int | None = None):
        series = as_series(series)
        end = series.n if end is None else int(end)
        start = int(start)
        if not 0 <= start < end <= series.n:
            raise ValueError(
                f"empty or invalid range [{start}, {end}) for n={series.n}"
            )
        self.series = series
        self.start = start
        self.end = end
        self._sorted_slice = np.sort(series.values[start:end])

    @property
    def denominator(self) -> int:
        """Number of observations the CDF is taken over."""
        return self.end - self.start

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        below = np.searchsorted(self._sorted_slice, t, side="left")
        up_to = np.searchsorted(self._sorted_slice, t, side="right")
        out = (below + 0.5 * (up_to - below)) / self.denominator
        return out if out.ndim else float(out)


def empirical_cdf(series, t, start: int = 0, end: int | None = None):
    """One-shot empirical CDF evaluation; see :class:`EmpiricalCdf`."""
    return EmpiricalCdf(as_series(series), start, end)(t)
