"""Dual-solver backends and the shared post-processing they feed.

Two interchangeable implementations exist: a Cython extension (built at
install time) and a pure-numpy fallback.  The compiled one is used when
present unless the ``GREYSVR_PURE`` environment variable is set to a
non-empty value.  Both produce bitwise identical results on the same
problem; ``tests/test_solver_backends.py`` enforces that.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from ..errors import DataError
from . import pure
from .pure import LazyRbfRows

try:
    from . import _speedups
except ImportError:  # extension not built; pure fallback only
    _speedups = None

HAVE_COMPILED = _speedups is not None


def active_backend() -> str:
    """Name of the backend that will actually run: compiled or pure."""
    if os.environ.get("GREYSVR_PURE"):
        return "pure"
    return "compiled" if HAVE_COMPILED else "pure"


@dataclass(frozen=True)
class SolverResult:
    """Converged dual state plus the bias derived from it."""

    alpha: np.ndarray
    alpha_star: np.ndarray
    beta: np.ndarray
    bias: float
    iterations: int
    violation: float
    converged: bool
    backend: str


def _bias_from_state(alpha, alpha_star, beta, u, y, c, eps, tol) -> float:
    resid = y - u
    unbounded = (np.abs(beta) > tol) & (np.abs(beta) < c - tol)
    if np.any(unbounded):
        b = np.where(beta > 0.0, resid - eps, resid + eps)[unbounded]
        return float(b.mean())
    # All coefficients at a bound (or zero): take the midpoint of the
    # interval every optimality condition leaves open for the bias.
    score_up = np.concatenate([
        np.where(alpha < c, resid - eps, -np.inf),
        np.where(alpha_star > 0.0, resid + eps, -np.inf),
    ])
    score_low = np.concatenate([
        np.where(alpha > 0.0, resid - eps, np.inf),
        np.where(alpha_star < c, resid + eps, np.inf),
    ])
    lo = float(score_up.max())
    hi = float(score_low.min())
    if lo == -np.inf:
        return hi
    if hi == np.inf:
        return lo
    return (lo + hi) / 2.0


def solve_dual(rows, diag, y, c, eps, tol, max_iter, backend: str | None = None) -> SolverResult:
    """Run the selected backend and post-process its raw dual state.

    ``rows`` is a materialized kernel matrix or a lazy row provider; the
    compiled backend requires the former.  Post-processing cancels the
    overlap of the two dual sides (so alpha[i] * alpha_star[i] = 0 holds
    pairwise) and computes the bias; both steps are backend-independent.
    """
    if backend is None:
        backend = active_backend()
    if backend == "compiled":
        if not HAVE_COMPILED:
            raise DataError("compiled solver backend requested but not built")
        if not isinstance(rows, np.ndarray):
            raise DataError("compiled solver backend needs a materialized kernel matrix")
        K = np.ascontiguousarray(rows)
        out = _speedups.solve(K, np.ascontiguousarray(diag),
                              np.ascontiguousarray(y), c, eps, tol, max_iter)
    elif backend == "pure":
        out = pure.solve(rows, diag, y, c, eps, tol, max_iter)
    else:
        raise DataError(f"unknown solver backend {backend!r}")

    alpha, alpha_star, beta, u, iterations, violation, converged = out
    overlap = np.minimum(alpha, alpha_star)
    alpha = alpha - overlap
    alpha_star = alpha_star - overlap
    beta = alpha - alpha_star
    bias = _bias_from_state(alpha, alpha_star, beta, u, y, c, eps, tol)
    return SolverResult(
        alpha=alpha, alpha_star=alpha_star, beta=beta, bias=bias,
        iterations=iterations, violation=violation, converged=converged,
        backend=backend,
    )
