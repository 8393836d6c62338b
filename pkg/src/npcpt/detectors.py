"""Estimators wrapping the solvers in scikit-learn's fit/predict conventions.

Both detectors are transductive: ``fit(X)`` segments ``X`` itself and exposes
the result through fitted attributes; ``predict`` returns per-observation
segment labels for the fitted series. Parameters follow the usual
``get_params``/``set_params``/``clone`` protocol, so the detectors compose
with scikit-learn tooling.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator

from .costs import BaseCost, FullEdfCost, LinearTrendCost, QuantileEdfCost
from .crops import crops_sweep, elbow_curve, suggest_elbow
from .search import pelt
from .series import check_series

COST_KINDS = {
    "quantile-edf": QuantileEdfCost,
    "full-edf": FullEdfCost,
    "linear-trend": LinearTrendCost,
}


def _build_cost(kind, n_quantiles) -> BaseCost:
    if isinstance(kind, BaseCost):
        return kind
    if kind not in COST_KINDS:
        raise ValueError(
            f"cost must be a BaseCost or one of {sorted(COST_KINDS)}, got {kind!r}"
        )
    if kind == "quantile-edf":
        return QuantileEdfCost(n_quantiles=n_quantiles)
    return COST_KINDS[kind]()


def _resolve_penalty(penalty, n: int) -> float:
    """Accept a float or the symbolic forms ``logn``/``2logn``/``3logn``."""
    if isinstance(penalty, str):
        symbolic = {"logn": 1.0, "2logn": 2.0, "3logn": 3.0}
        if penalty not in symbolic:
            raise ValueError(
                f"symbolic penalty must be one of {sorted(symbolic)}, got {penalty!r}"
            )
        return symbolic[penalty] * float(np.log(n))
    return float(penalty)


class PeltDetector(BaseEstimator):
    """Changepoint detection by penalized, pruned optimal partitioning.

    Parameters
    ----------
    cost : str or BaseCost, default="quantile-edf"
        Segment cost model: ``"quantile-edf"``, ``"full-edf"``,
        ``"linear-trend"``, or an unfitted :class:`~npcpt.costs.BaseCost`.
    n_quantiles : int or None
        Threshold count for the quantile cost (``None``: ``ceil(4 log n)``).
    penalty : float, str or None
        Per-changepoint penalty; symbolic ``"logn"``/``"2logn"``/``"3logn"``
        are evaluated against the fitted length. ``None`` uses ``3 log n``.
    min_segment_length : int or None
        ``None`` defers to the cost model's own minimum.

    Attributes
    ----------
    changepoints_ : np.ndarray
        Detected changepoints (prefix-length convention).
    labels_ : np.ndarray
        Segment index of every observation.
    segmentation_ : Segmentation
        Full result including the unpenalized total cost.
    trace_ : SolverTrace
        Per-step solver diagnostics.
    penalty_ : float
        The resolved numeric penalty.

    Examples
    --------
    >>> import numpy as np
    >>> x = np.r_[np.zeros(30), np.full(30, 5.0)]
    >>> PeltDetector(penalty="2logn").fit(x).changepoints_
    array([30])
    """

    def __init__(
        self,
        cost: str | BaseCost = "quantile-edf",
        n_quantiles: int | None = None,
        penalty=None,
        min_segment_length: int | None = None,
    ):
        self.cost = cost
        self.n_quantiles = n_quantiles
        self.penalty = penalty
        self.min_segment_length = min_segment_length

    def fit(self, X, y=None) -> "PeltDetector":
        """Segment ``X`` (1-D array-like); returns self."""
        x = check_series(X)
        self.cost_ = _build_cost(self.cost, self.n_quantiles).fit(x)
        self.penalty_ = (
            _resolve_penalty("3logn", x.size)
            if self.penalty is None
            else _resolve_penalty(self.penalty, x.size)
        )
        self.segmentation_, self.trace_ = pelt(
            self.cost_, self.penalty_, self.min_segment_length
        )
        self.changepoints_ = self.segmentation_.changepoints
        bounds = self.segmentation_.boundaries()
        self.labels_ = np.repeat(
            np.arange(len(bounds) - 1), np.diff(bounds)
        )
        return self

    def predict(self, X=None) -> np.ndarray:
        """Per-observation segment labels of the fitted series."""
        if not hasattr(self, "labels_"):
            raise RuntimeError("fit the detector before calling predict")
        if X is not None and len(np.asarray(X)) != self.labels_.size:
            raise ValueError(
                "predict is transductive: pass the fitted series (or nothing)"
            )
        return self.labels_

    def fit_predict(self, X, y=None) -> np.ndarray:
        return self.fit(X).predict()


class CropsDetector(BaseEstimator):
    """Penalty-range sweep with an automatic elbow suggestion.

    Sweeps the penalized solver over ``[penalty_min, penalty_max]``, exposing
    the full penalty path plus the cost-versus-count curve, and picks a
    working segmentation at the curve's sharpest bend (falling back to the
    lowest-penalty entry when the curve is too short to bend).

    Attributes
    ----------
    path_ : PenaltyPath
    elbow_curve_ : list of (m, cost)
    suggested_m_ : int or None
    changepoints_ : np.ndarray
        Changepoints of the suggested segmentation.
    labels_ : np.ndarray
    """

    def __init__(
        self,
        cost: str | BaseCost = "quantile-edf",
        n_quantiles: int | None = None,
        penalty_min: float = 0.0,
        penalty_max: float | None = None,
        min_segment_length: int | None = None,
    ):
        self.cost = cost
        self.n_quantiles = n_quantiles
        self.penalty_min = penalty_min
        self.penalty_max = penalty_max
        self.min_segment_length = min_segment_length

    def fit(self, X, y=None) -> "CropsDetector":
        x = check_series(X)
        high = (
            10.0 * float(np.log(x.size))
            if self.penalty_max is None
            else float(self.penalty_max)
        )
        self.cost_ = _build_cost(self.cost, self.n_quantiles).fit(x)
        self.path_ = crops_sweep(
            self.cost_, float(self.penalty_min), high, self.min_segment_length
        )
        self.elbow_curve_ = elbow_curve(self.path_)
        self.suggested_m_ = suggest_elbow(self.elbow_curve_)
        counts = [entry.m for entry in self.path_.entries]
        pick = self.suggested_m_ if self.suggested_m_ in counts else counts[0]
        segmentation = self.path_.segmentation_for(pick)
        self.changepoints_ = segmentation.changepoints
        bounds = segmentation.boundaries()
        self.labels_ = np.repeat(np.arange(len(bounds) - 1), np.diff(bounds))
        return self

    def predict(self, X=None) -> np.ndarray:
        """Per-observation segment labels at the suggested changepoint count."""
        if not hasattr(self, "labels_"):
            raise RuntimeError("fit the detector before calling predict")
        if X is not None and len(np.asarray(X)) != self.labels_.size:
            raise ValueError(
                "predict is transductive: pass the fitted series (or nothing)"
            )
        return self.labels_

    def fit_predict(self, X, y=None) -> np.ndarray:
        return self.fit(X).predict()
