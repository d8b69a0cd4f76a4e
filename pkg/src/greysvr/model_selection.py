"""Data splitting and hyperparameter grid search.

The sample layout is fixed by convention: the first 1/20 of a series (in
time order) estimates grey-correlation weights, the remainder splits 4:1
into train and a chronologically last test block, and k-fold
cross-validation shuffles only inside the training block.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from .errors import ConvergenceError, DataError, GreysvrError
from .svr import DEFAULT_MAX_ITER, DEFAULT_TOL, Hyperparams, predict, train_svr


@dataclass(frozen=True)
class SplitPlan:
    """Fractions and fold settings governing every split in a run."""

    weight_fraction: float = 1.0 / 20.0
    train_fraction: float = 4.0 / 5.0
    k: int = 10
    seed: int = 0

    def __post_init__(self):
        if not (0.0 < self.weight_fraction < 1.0):
            raise DataError(f"weight_fraction must be in (0, 1), got {self.weight_fraction}")
        if not (0.0 < self.train_fraction < 1.0):
            raise DataError(f"train_fraction must be in (0, 1), got {self.train_fraction}")
        if self.k < 2:
            raise DataError(f"k must be at least 2, got {self.k}")


def chronological_split(n: int, plan: SplitPlan) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Index arrays (weight, train, test); contiguous, time-ordered, test last."""
    n_weight = math.floor(n * plan.weight_fraction)
    rest = n - n_weight
    n_train = math.floor(rest * plan.train_fraction)
    n_test = rest - n_train
    if min(n_weight, n_train, n_test) < 2:
        raise DataError(
            f"{n} samples split into {n_weight}/{n_train}/{n_test}; "
            "every segment needs at least 2"
        )
    return (
        np.arange(0, n_weight),
        np.arange(n_weight, n_weight + n_train),
        np.arange(n_weight + n_train, n),
    )


def kfold_split(n: int, k: int, seed: int) -> list[np.ndarray]:
    """Random disjoint folds covering 0..n-1, sizes differing by at most 1."""
    if k < 2:
        raise DataError(f"k must be at least 2, got {k}")
    if n < k:
        raise DataError(f"cannot split {n} samples into {k} folds")
    order = np.random.default_rng(seed).permutation(n)
    return [np.sort(fold) for fold in np.array_split(order, k)]


def _log2_range(lo: int, hi: int) -> tuple[float, ...]:
    return tuple(float(2.0 ** p) for p in range(lo, hi + 1))


@dataclass(frozen=True)
class Grid:
    """Candidate values for each hyperparameter; defaults are powers of two."""

    c_values: tuple[float, ...] = field(default_factory=lambda: _log2_range(-2, 8))
    gamma_values: tuple[float, ...] = field(default_factory=lambda: _log2_range(-10, 0))
    epsilon_values: tuple[float, ...] = field(default_factory=lambda: _log2_range(-10, -2))

    def __post_init__(self):
        for name in ("c_values", "gamma_values", "epsilon_values"):
            vals = tuple(float(v) for v in getattr(self, name))
            if not vals:
                raise DataError(f"{name} is empty")
            if any(v <= 0 or not np.isfinite(v) for v in vals):
                raise DataError(f"{name} must contain positive finite values")
            object.__setattr__(self, name, vals)

    def triples(self) -> list[Hyperparams]:
        return [
            Hyperparams(c=c, gamma=g, epsilon=e)
            for c, g, e in product(self.c_values, self.gamma_values, self.epsilon_values)
        ]


def _cv_mse(X, y, hyper, folds, weights, tol, max_iter) -> float | None:
    """Mean held-out MSE across folds, or None if any fold fails to train."""
    n = len(y)
    fold_errors = []
    for fold in folds:
        mask = np.ones(n, dtype=bool)
        mask[fold] = False
        try:
            model = train_svr(X[mask], y[mask], hyper, weights, tol=tol, max_iter=max_iter)
        except GreysvrError:
            return None
        resid = predict(model, X[fold]) - y[fold]
        fold_errors.append(float(np.mean(resid * resid)))
    return float(np.mean(fold_errors))


def grid_search(
    X,
    y,
    grid: Grid,
    plan: SplitPlan,
    weights=None,
    *,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    workers: int = 1,
) -> tuple[Hyperparams, float]:
    """Pick the grid triple with minimum cross-validated MSE.

    Ties prefer smaller C, then smaller gamma, then larger epsilon (the
    flatter model).  A triple whose folds fail to train is skipped; if every
    triple fails, a :class:`ConvergenceError` is raised.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    folds = kfold_split(len(y), plan.k, plan.seed)
    triples = grid.triples()

    def score(hyper: Hyperparams) -> float | None:
        return _cv_mse(X, y, hyper, folds, weights, tol, max_iter)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            errors = list(pool.map(score, triples))
    else:
        errors = [score(h) for h in triples]

    best: tuple | None = None
    for hyper, err in zip(triples, errors):
        if err is None:
            continue
        key = (err, hyper.c, hyper.gamma, -hyper.epsilon)
        if best is None or key < best[0]:
            best = (key, hyper, err)
    if best is None:
        raise ConvergenceError("every grid cell failed to train")
    return best[1], best[2]
