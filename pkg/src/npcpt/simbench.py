"""Seeded simulation benchmarks: generators, accuracy metrics, and a runner.

Three standard test signals are provided. Model 1 is a step signal with 11
mean changes; Model 2 combines mean shifts with noise-scale switches; Model 3
changes the error distribution itself (skewness/kurtosis) between segments.
``run_benchmark`` replays a detection method over seeded replications and
reports true/false positive rates and solver wall time.

Replications use independent counter-based RNG substreams derived from
``(seed, replication)``, so results are reproducible and order-independent;
the runner itself executes sequentially.

Reports are written as CSV (one row per replication) plus a JSON summary;
benchmark configurations load from plain ``key = value`` text files.
"""

from __future__ import annotations

import csv
import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .costs import (
    FullEdfCost,
    LinearTrendCost,
    QuantileEdfCost,
    default_n_quantiles,
)
from .screening import default_half_window, screened_segment_neighbourhood
from .search import pelt, segment_neighbourhood, sic_select
from .series import TimeSeries

MODEL1_FRACTIONS = (
    0.10, 0.13, 0.15, 0.23, 0.25, 0.40, 0.44, 0.65, 0.76, 0.78, 0.81,
)
MODEL1_JUMPS = (
    2.01, -2.51, 1.51, -2.01, 2.51, -2.11, 1.05, 2.16, -1.56, 2.56, -2.11,
)
MODEL2_FRACTIONS = (0.20, 0.40, 0.65, 0.85)
MODEL2_JUMPS = (3.0, 0.0, -2.0, 0.0)
MODEL2_NOISE_FACTORS = (1.0, 5.0, 1.0, 0.25)
MODEL3_FRACTIONS = (0.20, 0.50, 0.75)

ERROR_DISTS = ("normal", "t3", "stdchisq1", "stdchisq3")
METHODS = ("np-pelt+", "np-pelt-full", "nmcd", "nmcd+", "linear-pelt")

#: default noise scale for Models 1-2 (jump sizes are a few noise sd's)
DEFAULT_SIGMA = 0.5


def default_penalty(n: int) -> float:
    """Default per-changepoint penalty for the penalized solvers: ``3 log n``."""
    return 3.0 * float(np.log(n))


def default_sic_penalty(n: int) -> float:
    """Default count-selection penalty for the fixed-count searches."""
    return 3.0 * float(np.log(n))


@dataclass(frozen=True)
class SimSpec:
    """One simulation scenario.

    ``error_dist`` and ``sigma`` apply to Models 1-2 only; Model 3 draws each
    segment from its own fixed distribution.
    """

    model_id: int
    n: int
    error_dist: str = "normal"
    sigma: float = DEFAULT_SIGMA
    seed: int = 0

    def __post_init__(self):
        if self.model_id not in (1, 2, 3):
            raise ValueError(
                f"model_id must be one of (1, 2, 3), got {self.model_id}"
            )
        if self.n < 2:
            raise ValueError(f"n must be at least 2, got {self.n}")
        if self.error_dist not in ERROR_DISTS:
            raise ValueError(
                f"error_dist must be one of {ERROR_DISTS}, got {self.error_dist!r}"
            )
        if self.sigma <= 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")


def _substream(seed: int, replicate: int) -> np.random.Generator:
    # counter-based generator; (seed, replicate) picks a reproducible substream
    return np.random.Generator(
        np.random.Philox(np.random.SeedSequence(seed, spawn_key=(replicate,)))
    )


def _standardized_chisq(rng: np.random.Generator, df: int, size: int) -> np.ndarray:
    return (rng.chisquare(df, size) - df) / np.sqrt(2.0 * df)


def _draw_errors(rng: np.random.Generator, dist: str, size: int) -> np.ndarray:
    if dist == "normal":
        return rng.standard_normal(size)
    if dist == "t3":
        return rng.standard_t(3, size)
    if dist == "stdchisq1":
        return _standardized_chisq(rng, 1, size)
    if dist == "stdchisq3":
        return _standardized_chisq(rng, 3, size)
    raise ValueError(f"error_dist must be one of {ERROR_DISTS}, got {dist!r}")


def _changepoint_indices(fractions, n: int) -> np.ndarray:
    cpts = np.floor(np.asarray(fractions) * n).astype(int)
    if np.unique(cpts).size != cpts.size or cpts[0] < 1 or cpts[-1] >= n:
        raise ValueError(
            f"n={n} is too short: changepoint indices {cpts.tolist()} "
            "must be distinct and interior"
        )
    return cpts


def _step_signal(cpts: np.ndarray, jumps, n: int) -> np.ndarray:
    # mean jumps by jumps[j] from index cpts[j] onward, so cpts[j] counts the
    # observations before the change (last index of the old segment is
    # cpts[j] - 1 zero-based)
    mean = np.zeros(n)
    for tau, jump in zip(cpts, jumps):
        mean[tau:] += jump
    return mean


def generate(spec: SimSpec, replicate: int = 0) -> tuple[TimeSeries, np.ndarray]:
    """Simulate one series; deterministic in ``(spec.seed, replicate)``.

    Returns the series and the true changepoints as integer indices
    ``floor(fraction * n)`` in the prefix-length convention used by the
    solvers.
    """
    rng = _substream(spec.seed, replicate)
    n = spec.n
    if spec.model_id == 1:
        cpts = _changepoint_indices(MODEL1_FRACTIONS, n)
        x = _step_signal(cpts, MODEL1_JUMPS, n)
        x += spec.sigma * _draw_errors(rng, spec.error_dist, n)
    elif spec.model_id == 2:
        cpts = _changepoint_indices(MODEL2_FRACTIONS, n)
        x = _step_signal(cpts, MODEL2_JUMPS, n)
        scale = np.ones(n)
        for tau, factor in zip(cpts, MODEL2_NOISE_FACTORS):
            scale[tau:] *= factor
        x += spec.sigma * scale * _draw_errors(rng, spec.error_dist, n)
    else:
        cpts = _changepoint_indices(MODEL3_FRACTIONS, n)
        bounds = np.concatenate(([0], cpts, [n]))
        pieces = []
        for i, (lo, hi) in enumerate(zip(bounds[:-1], bounds[1:])):
            size = hi - lo
            if i == 1:
                pieces.append(_standardized_chisq(rng, 3, size))
            elif i == 2:
                pieces.append(_standardized_chisq(rng, 1, size))
            else:
                pieces.append(rng.standard_normal(size))
        x = np.concatenate(pieces)
    return TimeSeries(x), cpts


def generate_step_train(
    n: int,
    segment_length: int = 100,
    sigma: float = DEFAULT_SIGMA,
    seed: int = 0,
    replicate: int = 0,
) -> tuple[TimeSeries, np.ndarray]:
    """Step signal whose changepoint count grows linearly with ``n``.

    Changes fall every ``segment_length`` observations and the jump sizes
    cycle through the Model 1 magnitudes. Used for scaling and pruning
    studies, where the fixed-fraction models would keep the count constant.
    """
    if segment_length < 1 or n < segment_length:
        raise ValueError("need 1 <= segment_length <= n")
    cpts = np.arange(segment_length, n, segment_length, dtype=int)
    jumps = [MODEL1_JUMPS[i % len(MODEL1_JUMPS)] for i in range(cpts.size)]
    x = _step_signal(cpts, jumps, n)
    rng = _substream(seed, replicate)
    x = x + sigma * rng.standard_normal(n)
    return TimeSeries(x), cpts


def tp_fp(
    true_cpts, est_cpts, tolerance: int = 0
) -> tuple[float, float]:
    """Proportions of recovered true changepoints and of spurious estimates.

    Matching is one-to-one and greedy, nearest pairs first; an estimate
    within ``tolerance`` indices of an unmatched true changepoint claims it.
    With ``tolerance=0`` this reduces to exact set membership. Returns
    ``(true_positive_rate, false_positive_rate)``.

    Conventions for empty inputs: no true changepoints and no estimates is a
    perfect result ``(1.0, 0.0)``; estimates against an empty truth give
    ``(nan, 1.0)`` since the true-positive rate is undefined; an empty
    estimate set has ``fp = 0.0``.
    """
    true_cpts = np.asarray(true_cpts, dtype=int)
    est_cpts = np.asarray(est_cpts, dtype=int)
    if tolerance < 0:
        raise ValueError(f"tolerance must be nonnegative, got {tolerance}")
    for name, arr in (("true_cpts", true_cpts), ("est_cpts", est_cpts)):
        if arr.size > 1 and np.any(np.diff(arr) <= 0):
            raise ValueError(f"{name} must be strictly increasing")

    if true_cpts.size == 0:
        if est_cpts.size == 0:
            return 1.0, 0.0
        return float("nan"), 1.0
    if est_cpts.size == 0:
        return 0.0, 0.0

    gaps = np.abs(true_cpts[:, None] - est_cpts[None, :])
    pairs = [
        (int(gaps[i, j]), i, j)
        for i in range(true_cpts.size)
        for j in range(est_cpts.size)
        if gaps[i, j] <= tolerance
    ]
    pairs.sort()
    used_true: set[int] = set()
    used_est: set[int] = set()
    matched = 0
    for _, i, j in pairs:
        if i in used_true or j in used_est:
            continue
        used_true.add(i)
        used_est.add(j)
        matched += 1
    return matched / true_cpts.size, (est_cpts.size - matched) / est_cpts.size


def _run_np_pelt(series: TimeSeries, params: dict) -> np.ndarray:
    cost = QuantileEdfCost(n_quantiles=params.get("n_quantiles")).fit(series)
    penalty = params.get("penalty")
    penalty = default_penalty(series.n) if penalty is None else float(penalty)
    seg, _ = pelt(cost, penalty, params.get("min_segment_length"))
    return seg.changepoints


def _run_np_pelt_full(series: TimeSeries, params: dict) -> np.ndarray:
    cost = FullEdfCost().fit(series)
    penalty = params.get("penalty")
    penalty = default_penalty(series.n) if penalty is None else float(penalty)
    seg, _ = pelt(cost, penalty, params.get("min_segment_length"))
    return seg.changepoints


def _run_linear_pelt(series: TimeSeries, params: dict) -> np.ndarray:
    cost = LinearTrendCost().fit(series)
    penalty = params.get("penalty")
    penalty = default_penalty(series.n) if penalty is None else float(penalty)
    seg, _ = pelt(cost, penalty, params.get("min_segment_length"))
    return seg.changepoints


def _sic_params(series: TimeSeries, params: dict) -> tuple[int, float]:
    max_cpts = int(params.get("max_changepoints") or 20)
    sic_penalty = params.get("sic_penalty")
    sic_penalty = (
        default_sic_penalty(series.n) if sic_penalty is None else float(sic_penalty)
    )
    return max_cpts, sic_penalty


def _run_nmcd(series: TimeSeries, params: dict) -> np.ndarray:
    cost = FullEdfCost().fit(series)
    max_cpts, sic_penalty = _sic_params(series, params)
    candidates = segment_neighbourhood(
        cost, max_cpts, params.get("min_segment_length")
    )
    return sic_select(candidates, sic_penalty).changepoints


def _run_nmcd_plus(series: TimeSeries, params: dict) -> np.ndarray:
    cost = FullEdfCost().fit(series)
    max_cpts, sic_penalty = _sic_params(series, params)
    candidates = screened_segment_neighbourhood(
        cost,
        max_cpts,
        half_window=params.get("half_window"),
        min_segment_length=params.get("min_segment_length"),
    )
    return sic_select(candidates, sic_penalty).changepoints


_METHOD_RUNNERS = {
    "np-pelt+": _run_np_pelt,
    "np-pelt-full": _run_np_pelt_full,
    "nmcd": _run_nmcd,
    "nmcd+": _run_nmcd_plus,
    "linear-pelt": _run_linear_pelt,
}


def run_method(method: str, series: TimeSeries, **params) -> np.ndarray:
    """Run one detection method; returns the estimated changepoints."""
    if method not in _METHOD_RUNNERS:
        raise ValueError(
            f"unknown method {method!r}; valid methods: {', '.join(METHODS)}"
        )
    return _METHOD_RUNNERS[method](series, params)


@dataclass
class BenchReport:
    """Per-replication accuracy and timing for one (scenario, method) pair."""

    spec: SimSpec
    method: str
    reps: int
    tolerance: int
    params: dict = field(default_factory=dict)
    tp: np.ndarray = field(default_factory=lambda: np.empty(0))
    fp: np.ndarray = field(default_factory=lambda: np.empty(0))
    seconds: np.ndarray = field(default_factory=lambda: np.empty(0))
    m_est: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=int))

    def _agg(self, arr: np.ndarray) -> tuple[float, float]:
        mean = float(np.nanmean(arr))
        sd = float(np.nanstd(arr, ddof=1)) if arr.size > 1 else 0.0
        return mean, sd

    @property
    def mean_tp(self) -> float:
        return self._agg(self.tp)[0]

    @property
    def mean_fp(self) -> float:
        return self._agg(self.fp)[0]

    @property
    def mean_seconds(self) -> float:
        return self._agg(self.seconds)[0]

    def summary(self) -> dict:
        """Aggregate means and sample standard deviations."""
        tp_mean, tp_sd = self._agg(self.tp)
        fp_mean, fp_sd = self._agg(self.fp)
        sec_mean, sec_sd = self._agg(self.seconds)
        return {
            "model_id": self.spec.model_id,
            "n": self.spec.n,
            "error_dist": self.spec.error_dist,
            "sigma": self.spec.sigma,
            "seed": self.spec.seed,
            "method": self.method,
            "reps": self.reps,
            "tolerance": self.tolerance,
            "mean_tp": tp_mean,
            "sd_tp": tp_sd,
            "mean_fp": fp_mean,
            "sd_fp": fp_sd,
            "mean_seconds": sec_mean,
            "sd_seconds": sec_sd,
        }

    def write_csv(self, path) -> None:
        """One row per replication: rep, tp, fp, seconds, n_changepoints."""
        with open(path, "w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(["rep", "tp", "fp", "seconds", "n_changepoints"])
            for rep in range(self.reps):
                writer.writerow(
                    [
                        rep,
                        repr(float(self.tp[rep])),
                        repr(float(self.fp[rep])),
                        repr(float(self.seconds[rep])),
                        int(self.m_est[rep]),
                    ]
                )

    def write_summary_json(self, path) -> None:
        with open(path, "w") as handle:
            json.dump(self.summary(), handle, indent=2, sort_keys=True)
            handle.write("\n")


def run_benchmark(
    spec: SimSpec,
    method: str,
    reps: int,
    tolerance: int = 0,
    **params,
) -> BenchReport:
    """Replay ``method`` over ``reps`` seeded replications of ``spec``.

    Wall time is measured around the detection call only (cost model fitting
    included, data generation excluded). Accuracy uses :func:`tp_fp` at the
    given matching ``tolerance``.
    """
    if method not in _METHOD_RUNNERS:
        raise ValueError(
            f"unknown method {method!r}; valid methods: {', '.join(METHODS)}"
        )
    if reps < 1:
        raise ValueError(f"reps must be positive, got {reps}")
    report = BenchReport(
        spec=spec,
        method=method,
        reps=reps,
        tolerance=tolerance,
        params=dict(params),
        tp=np.zeros(reps),
        fp=np.zeros(reps),
        seconds=np.zeros(reps),
        m_est=np.zeros(reps, dtype=int),
    )
    runner = _METHOD_RUNNERS[method]
    for rep in range(reps):
        series, true_cpts = generate(spec, rep)
        start = time.perf_counter()
        est = runner(series, params)
        report.seconds[rep] = time.perf_counter() - start
        report.tp[rep], report.fp[rep] = tp_fp(true_cpts, est, tolerance)
        report.m_est[rep] = est.size
    return report


# -- plain-text configuration ------------------------------------------------

_CONFIG_KEYS = {
    "model": int,
    "n": int,
    "error": str,
    "sigma": float,
    "seed": int,
    "method": str,
    "reps": int,
    "tolerance": int,
    "penalty": float,
    "n_quantiles": int,
    "k": int,
    "max_changepoints": int,
    "sic_penalty": float,
    "half_window": int,
    "min_segment_length": int,
}


def load_config(path) -> dict:
    """Parse a ``key = value`` benchmark config file.

    Blank lines and ``#`` comments are ignored. ``k`` is accepted as an alias
    for ``n_quantiles``.
    """
    path = Path(path)
    raw: dict[str, str] = {}
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ValueError(
                f"{path}:{lineno}: expected 'key = value', got {line.rstrip()!r}"
            )
        key, value = (part.strip() for part in stripped.split("=", 1))
        key = key.lower()
        if key not in _CONFIG_KEYS:
            raise ValueError(
                f"{path}:{lineno}: unknown key {key!r}; valid keys: "
                f"{', '.join(sorted(_CONFIG_KEYS))}"
            )
        raw[key] = value

    parsed: dict = {}
    for key, value in raw.items():
        try:
            parsed[key] = _CONFIG_KEYS[key](value)
        except ValueError as exc:
            raise ValueError(f"{path}: bad value for {key!r}: {value!r}") from exc
    if "k" in parsed:
        parsed.setdefault("n_quantiles", parsed.pop("k"))
    return parsed


def benchmark_from_config(config: dict, seed_override: int | None = None) -> BenchReport:
    """Build and run a benchmark from a parsed config mapping.

    Required keys: ``model``, ``n``, ``method``, ``reps``. ``seed_override``
    takes precedence over the config's ``seed``.
    """
    for required in ("model", "n", "method", "reps"):
        if required not in config:
            raise ValueError(f"config is missing required key {required!r}")
    model = config["model"]
    if model not in (1, 2, 3):
        raise ValueError(f"model must be one of (1, 2, 3), got {model}")
    method = str(config["method"]).lower()
    if method not in METHODS:
        raise ValueError(
            f"unknown method {config['method']!r}; valid methods: {', '.join(METHODS)}"
        )
    reps = config["reps"]
    if reps < 1:
        raise ValueError(f"reps must be positive, got {reps}")
    error = config.get("error", "normal")
    if error not in ERROR_DISTS:
        raise ValueError(
            f"unknown error {error!r}; valid errors: {', '.join(ERROR_DISTS)}"
        )
    spec = SimSpec(
        model_id=model,
        n=config["n"],
        error_dist=error,
        sigma=config.get("sigma", DEFAULT_SIGMA),
        seed=seed_override if seed_override is not None else config.get("seed", 0),
    )
    params = {
        key: config[key]
        for key in (
            "penalty",
            "n_quantiles",
            "max_changepoints",
            "sic_penalty",
            "half_window",
            "min_segment_length",
        )
        if key in config
    }
    return run_benchmark(
        spec, method, reps, tolerance=config.get("tolerance", 0), **params
    )
