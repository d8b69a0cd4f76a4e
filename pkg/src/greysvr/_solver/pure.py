"""Pure-numpy dual solver for epsilon-tube support vector regression.

Two-coordinate ascent on the box-constrained dual with the working pair
chosen by maximal constraint violation.  The compiled backend in
``_speedups.pyx`` mirrors this file operation for operation (same update
order, same tie-breaks, same rounding sequence), so both produce bitwise
identical iterates; keep the two in sync when touching either.

State per training row r: alpha[r], alpha_star[r] in [0, C] are the two
dual sides, beta = alpha - alpha_star, and u = K @ beta is maintained
incrementally.  Candidate scores are (y - u) -/+ epsilon on the alpha /
alpha-star side; optimality is reached when the best raisable score exceeds
the best lowerable score by at most ``tol``.
"""

from __future__ import annotations

from collections import OrderedDict

import numpy as np

#: Curvature floor for degenerate (duplicate-row) working pairs.
QUAD_FLOOR = 1e-12


class LazyRbfRows:
    """Kernel rows computed on demand with a small FIFO cache.

    Used instead of a materialized kernel matrix when the training set is
    too large to cache; values are identical to the materialized ones.
    """

    def __init__(self, X: np.ndarray, gamma: float, max_rows: int = 64):
        self._X = X
        self._gamma = gamma
        self._sqnorm = np.einsum("ij,ij->i", X, X)
        self._cache: OrderedDict[int, np.ndarray] = OrderedDict()
        self._max_rows = max_rows

    @property
    def diag(self) -> np.ndarray:
        return np.ones(self._X.shape[0])

    def __getitem__(self, r: int) -> np.ndarray:
        row = self._cache.get(r)
        if row is None:
            d = self._sqnorm + self._sqnorm[r] - 2.0 * (self._X @ self._X[r])
            np.maximum(d, 0.0, out=d)
            row = np.exp(-self._gamma * d)
            row[r] = 1.0
            if len(self._cache) >= self._max_rows:
                self._cache.popitem(last=False)
            self._cache[r] = row
        return row


def solve(rows, diag, y, c, eps, tol, max_iter):
    """Maximize the dual; returns (alpha, alpha_star, beta, u, iterations,
    violation, converged).

    ``rows`` is anything indexable to a kernel row (a materialized matrix
    or :class:`LazyRbfRows`); ``diag`` its diagonal.
    """
    n = y.shape[0]
    alpha = np.zeros(n)
    alpha_star = np.zeros(n)
    beta = np.zeros(n)
    u = np.zeros(n)
    it = 0
    converged = False

    while True:
        resid = y - u
        # Candidate scores; ineligible entries are masked with infinities so
        # argmax/argmin keep the lowest eligible index on ties.
        score_up = np.concatenate([
            np.where(alpha < c, resid - eps, -np.inf),
            np.where(alpha_star > 0.0, resid + eps, -np.inf),
        ])
        score_low = np.concatenate([
            np.where(alpha > 0.0, resid - eps, np.inf),
            np.where(alpha_star < c, resid + eps, np.inf),
        ])
        i = int(np.argmax(score_up))
        j = int(np.argmin(score_low))
        violation = float(score_up[i] - score_low[j])
        if violation <= tol:
            converged = True
            break
        if it >= max_iter:
            break
        it += 1

        ri = i if i < n else i - n
        rj = j if j < n else j - n
        row_i = rows[ri]
        row_j = rows[rj]
        # The pair moves beta[ri] up and beta[rj] down by the same step, so
        # the curvature lives in kernel-row space regardless of which dual
        # side each index came from.
        quad = diag[ri] + diag[rj] - 2.0 * row_i[rj]
        if quad < QUAD_FLOOR:
            quad = QUAD_FLOOR
        step = violation / quad
        cap_i = (c - alpha[ri]) if i < n else alpha_star[ri]
        cap_j = alpha[rj] if j < n else (c - alpha_star[rj])
        if cap_i < step:
            step = cap_i
        if cap_j < step:
            step = cap_j

        bi_old = beta[ri]
        bj_old = beta[rj]
        # Snap to the exact bound when the step is box-limited so box
        # membership is exact, not within rounding.
        if i < n:
            alpha[ri] = c if step == cap_i else alpha[ri] + step
        else:
            alpha_star[ri] = 0.0 if step == cap_i else alpha_star[ri] - step
        if j < n:
            alpha[rj] = 0.0 if step == cap_j else alpha[rj] - step
        else:
            alpha_star[rj] = c if step == cap_j else alpha_star[rj] + step
        beta[ri] = alpha[ri] - alpha_star[ri]
        beta[rj] = alpha[rj] - alpha_star[rj]
        dbi = beta[ri] - bi_old
        dbj = beta[rj] - bj_old
        u += dbi * row_i + dbj * row_j

    return alpha, alpha_star, beta, u, it, violation, converged
