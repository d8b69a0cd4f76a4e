"""Outlier clamping and range scaling.

Both transforms are fitted on one sample (typically the training block) and
can then be applied to any other sample drawn from the same series, so test
data never influences the fitted parameters.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError


@dataclass(frozen=True)
class MadClampParams:
    """Median / median-absolute-deviation window for outlier clamping."""

    median: float
    mad: float
    k: float

    @property
    def lower(self) -> float:
        return self.median - self.k * self.mad

    @property
    def upper(self) -> float:
        return self.median + self.k * self.mad


@dataclass(frozen=True)
class RangeParams:
    """Observed min/max used to scale a series onto [-1, 1]."""

    lo: float
    hi: float


def _as_1d_float(x, name: str = "x") -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1:
        raise DataError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if arr.size == 0:
        raise DataError(f"{name} is empty")
    if not np.all(np.isfinite(arr)):
        raise DataError(f"{name} contains non-finite values")
    return arr


def fit_mad_clamp(x, k: float = 5.0) -> MadClampParams:
    """Fit median +- k*MAD clamp bounds on ``x``."""
    arr = _as_1d_float(x)
    if k <= 0:
        raise DataError(f"clamp width k must be positive, got {k}")
    med = float(np.median(arr))
    mad = float(np.median(np.abs(arr - med)))
    return MadClampParams(median=med, mad=mad, k=k)


def apply_mad_clamp(x, params: MadClampParams) -> np.ndarray:
    arr = _as_1d_float(x)
    return np.clip(arr, params.lower, params.upper)


def mad_clamp(x, k: float = 5.0) -> tuple[np.ndarray, MadClampParams]:
    """Clamp ``x`` to median +- k*MAD and return (clamped, fitted params)."""
    params = fit_mad_clamp(x, k)
    return apply_mad_clamp(x, params), params


def fit_range(x) -> RangeParams:
    """Fit min/max scaling bounds on ``x``; constant input is rejected."""
    arr = _as_1d_float(x)
    lo = float(np.min(arr))
    hi = float(np.max(arr))
    if hi == lo:
        raise DataError(f"constant column (all values equal {lo}); cannot range-scale")
    return RangeParams(lo=lo, hi=hi)


def apply_range(x, params: RangeParams) -> np.ndarray:
    """Map ``x`` onto [-1, 1] using fitted bounds (values outside may exceed it)."""
    arr = _as_1d_float(x)
    return 2.0 * (arr - params.lo) / (params.hi - params.lo) - 1.0


def invert_range(x, params: RangeParams) -> np.ndarray:
    """Undo :func:`apply_range`, mapping [-1, 1] back to original units."""
    arr = _as_1d_float(x)
    return (arr + 1.0) / 2.0 * (params.hi - params.lo) + params.lo


def range_normalize(x) -> tuple[np.ndarray, RangeParams]:
    """Scale ``x`` onto [-1, 1] and return (scaled, fitted params)."""
    params = fit_range(x)
    return apply_range(x, params), params
