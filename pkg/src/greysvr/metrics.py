"""Forecast accuracy metrics and model-vs-model comparison summaries."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError

#: Metric names in reporting order.  mse/mae are errors (lower is better),
#: ds/scc are scores (higher is better).
METRIC_NAMES = ("mse", "mae", "ds", "scc")
ERROR_METRICS = frozenset({"mse", "mae"})


@dataclass(frozen=True)
class EvalReport:
    """Accuracy of one prediction series against its observations.

    ``scc`` is None when the squared correlation is undefined, i.e. when
    either series is constant.
    """

    n: int
    mse: float
    mae: float
    ds: float
    scc: float | None

    def metric(self, name: str) -> float | None:
        if name not in METRIC_NAMES:
            raise KeyError(name)
        return getattr(self, name)


def _paired(observed, predicted) -> tuple[np.ndarray, np.ndarray]:
    y = np.asarray(observed, dtype=float)
    p = np.asarray(predicted, dtype=float)
    if y.ndim != 1 or p.ndim != 1 or y.shape != p.shape:
        raise DataError(f"observed/predicted shape mismatch: {y.shape} vs {p.shape}")
    if y.size == 0:
        raise DataError("empty series")
    if not (np.all(np.isfinite(y)) and np.all(np.isfinite(p))):
        raise DataError("non-finite values in metric input")
    return y, p


def mse(observed, predicted) -> float:
    y, p = _paired(observed, predicted)
    return float(np.mean((y - p) ** 2))


def mae(observed, predicted) -> float:
    y, p = _paired(observed, predicted)
    return float(np.mean(np.abs(y - p)))


def directional_symmetry(observed, predicted) -> float:
    """Percentage of steps whose predicted move matches the observed sign.

    A step counts as correct when the product of the observed and predicted
    one-step changes is >= 0, so flat predictions are never penalized.
    Needs at least two points.
    """
    y, p = _paired(observed, predicted)
    if y.size < 2:
        raise DataError("directional symmetry needs at least 2 points")
    d = (np.diff(y) * np.diff(p)) >= 0.0
    return 100.0 * float(np.mean(d))


def squared_correlation(observed, predicted) -> float | None:
    """Squared Pearson correlation, or None when either series is constant."""
    y, p = _paired(observed, predicted)
    n = y.size
    sy, sp = y.sum(), p.sum()
    var_y = n * float(y @ y) - sy * sy
    var_p = n * float(p @ p) - sp * sp
    if var_y <= 0.0 or var_p <= 0.0:
        return None
    cov = n * float(y @ p) - sy * sp
    return cov * cov / (var_y * var_p)


def evaluate(observed, predicted) -> EvalReport:
    """All four metrics for one observed/predicted pair."""
    y, p = _paired(observed, predicted)
    return EvalReport(
        n=int(y.size),
        mse=mse(y, p),
        mae=mae(y, p),
        ds=directional_symmetry(y, p),
        scc=squared_correlation(y, p),
    )


@dataclass(frozen=True)
class ComparisonSummary:
    """How model ``a`` fares against model ``b`` across a set of stocks.

    ``wins[m]`` counts stocks where a is strictly better on metric m;
    ``counted[m]`` is the number of stocks where m was defined for both
    models (only scc can be undefined); ``mean_improvement_pct[m]`` averages
    the per-stock relative improvement of a over b, in percent, or is None
    when no stock had the metric defined.
    """

    n_stocks: int
    wins: dict[str, int]
    counted: dict[str, int]
    mean_improvement_pct: dict[str, float | None]


def _improvement_pct(metric: str, a: float, b: float) -> float:
    # Errors improve when they shrink, scores when they grow.
    if metric in ERROR_METRICS:
        return 100.0 * (b - a) / b
    return 100.0 * (a - b) / b


def compare(a: list[EvalReport], b: list[EvalReport]) -> ComparisonSummary:
    """Per-metric win counts and mean improvement of ``a`` over ``b``.

    Reports are paired elementwise (one pair per stock).  Pairs where a
    metric is undefined for either side are excluded from that metric's
    count and improvement average.
    """
    if len(a) != len(b):
        raise DataError(f"report lists differ in length: {len(a)} vs {len(b)}")
    if not a:
        raise DataError("nothing to compare")
    wins = {m: 0 for m in METRIC_NAMES}
    counted = {m: 0 for m in METRIC_NAMES}
    gains: dict[str, list[float]] = {m: [] for m in METRIC_NAMES}
    for ra, rb in zip(a, b):
        for m in METRIC_NAMES:
            va, vb = ra.metric(m), rb.metric(m)
            if va is None or vb is None:
                continue
            counted[m] += 1
            better = va < vb if m in ERROR_METRICS else va > vb
            if better:
                wins[m] += 1
            if vb != 0.0:
                gains[m].append(_improvement_pct(m, va, vb))
    mean_gain = {
        m: (float(np.mean(v)) if v else None) for m, v in gains.items()
    }
    return ComparisonSummary(
        n_stocks=len(a), wins=wins, counted=counted, mean_improvement_pct=mean_gain
    )
