"""Grey correlation analysis.

Measures how closely each candidate factor series tracks a reference series
and converts the resulting relational degrees into normalized per-feature
weights.  All series are compared pointwise, so inputs should share a scale
(range-normalize first when they do not).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError

#: Default resolution coefficient of the relational coefficient.
DEFAULT_TAU = 0.5

_OPERATORS = ("none", "initial-value", "mean")


@dataclass(frozen=True)
class GreyWeights:
    """Relational degrees per factor and their sum-to-one normalization."""

    degrees: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        self.degrees.setflags(write=False)
        self.weights.setflags(write=False)


def apply_initial_operator(series, mode: str = "none") -> np.ndarray:
    """Rescale a series by its first value or mean before comparison.

    ``none`` returns the input unchanged; ``initial-value`` divides by the
    first element; ``mean`` divides by the arithmetic mean.
    """
    arr = np.asarray(series, dtype=float)
    if mode not in _OPERATORS:
        raise DataError(f"unknown initial operator {mode!r}; expected one of {_OPERATORS}")
    if mode == "none":
        return arr.copy()
    denom = arr.flat[0] if mode == "initial-value" else arr.mean()
    if denom == 0:
        raise DataError(f"initial operator {mode!r} undefined: divisor is zero")
    return arr / denom


def grey_relational_coefficients(reference, factors, tau: float = DEFAULT_TAU) -> np.ndarray:
    """Pointwise relational coefficients of each factor against the reference.

    Args:
        reference: shape (n,) series the factors are compared to.
        factors: shape (n, m) matrix, one factor per column.
        tau: resolution coefficient in (0, 1].

    Returns:
        Array of shape (m, n); every entry lies in (0, 1].
    """
    ref = np.asarray(reference, dtype=float)
    fac = np.asarray(factors, dtype=float)
    if fac.ndim == 1:
        fac = fac[:, None]
    if ref.ndim != 1 or fac.ndim != 2 or fac.shape[0] != ref.shape[0]:
        raise DataError(
            f"shape mismatch: reference {ref.shape}, factors {fac.shape}"
        )
    if ref.size == 0:
        raise DataError("empty reference series")
    if not (0.0 < tau <= 1.0):
        raise DataError(f"resolution coefficient must be in (0, 1], got {tau}")
    if not (np.all(np.isfinite(ref)) and np.all(np.isfinite(fac))):
        raise DataError("non-finite values in grey-correlation input")

    # Force row-major layout so the per-factor reductions downstream sum in
    # the same order no matter how the caller's array was laid out.
    delta = np.ascontiguousarray(np.abs(fac.T - ref[None, :]))
    d_max = delta.max()
    if d_max == 0.0:
        # Every factor coincides with the reference: perfect relation.
        return np.ones_like(delta)
    d_min = delta.min()
    return (d_min + tau * d_max) / (delta + tau * d_max)


def grey_relational_degrees(reference, factors, tau: float = DEFAULT_TAU) -> np.ndarray:
    """Mean relational coefficient per factor, shape (m,), values in (0, 1]."""
    return grey_relational_coefficients(reference, factors, tau).mean(axis=1)


def normalize_weights(degrees) -> GreyWeights:
    """Scale relational degrees so the weights sum to one."""
    deg = np.asarray(degrees, dtype=float)
    if deg.ndim != 1 or deg.size == 0:
        raise DataError(f"degrees must be a non-empty vector, got shape {deg.shape}")
    if np.any(deg <= 0) or not np.all(np.isfinite(deg)):
        raise DataError("relational degrees must be positive and finite")
    return GreyWeights(degrees=deg.copy(), weights=deg / deg.sum())


def grey_weights(
    reference,
    factors,
    tau: float = DEFAULT_TAU,
    operator: str = "none",
) -> GreyWeights:
    """Relational degrees plus normalized weights in one call.

    The optional initial operator is applied to the reference and to each
    factor column before the comparison.
    """
    ref = apply_initial_operator(np.asarray(reference, dtype=float), operator)
    fac = np.asarray(factors, dtype=float)
    if fac.ndim == 1:
        fac = fac[:, None]
    if operator != "none":
        fac = np.column_stack([apply_initial_operator(fac[:, j], operator) for j in range(fac.shape[1])])
    degrees = grey_relational_degrees(ref, fac, tau)
    return normalize_weights(degrees)
