"""Shared experiment plumbing: dataset preparation and model evaluation.

One :class:`PreparedDataset` bundles everything a single instrument needs
for a fair weighted-vs-unweighted comparison: the chronological split, the
preprocessing parameters fitted on pre-test rows only, the normalized
feature/target arrays, and the grey-correlation weights estimated on the
leading weight block.  Screening, tuning, and the pipeline all consume the
same object so every code path agrees on what "the training data" means.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from .errors import DataError
from .gca import DEFAULT_TAU, GreyWeights, grey_weights
from .market_data import FactorMatrix
from .metrics import EvalReport, evaluate
from .model_selection import Grid, SplitPlan, chronological_split, grid_search
from .preprocess import (
    MadClampParams,
    RangeParams,
    apply_mad_clamp,
    apply_range,
    fit_mad_clamp,
    fit_range,
    invert_range,
)
from .svr import DEFAULT_MAX_ITER, DEFAULT_TOL, Hyperparams, SvrModel, predict, train_svr

DEFAULT_CLAMP_K = 5.0


def derive_seed(root: int, *parts) -> int:
    """A reproducible sub-seed for one named consumer of the run seed.

    Hashing (root, parts) keeps every random decision in a run traceable to
    the single configured seed without correlated streams.
    """
    h = hashlib.sha256(str(int(root)).encode())
    for part in parts:
        h.update(b"/")
        h.update(str(part).encode())
    return int.from_bytes(h.digest()[:8], "big")


@dataclass(frozen=True)
class PreparedDataset:
    """One instrument's matrix, split, preprocessing, and grey weights."""

    matrix: FactorMatrix
    weight_idx: np.ndarray
    train_idx: np.ndarray
    test_idx: np.ndarray
    clamp: tuple[MadClampParams, ...]
    factor_range: tuple[RangeParams, ...]
    target_range: RangeParams
    features: np.ndarray  # normalized, full length
    target: np.ndarray    # normalized, full length
    weights: GreyWeights

    def __post_init__(self):
        for name in ("weight_idx", "train_idx", "test_idx", "features", "target"):
            getattr(self, name).setflags(write=False)

    @property
    def train_features(self) -> np.ndarray:
        return self.features[self.train_idx]

    @property
    def train_target(self) -> np.ndarray:
        return self.target[self.train_idx]

    @property
    def test_features(self) -> np.ndarray:
        return self.features[self.test_idx]

    @property
    def observed_test(self) -> np.ndarray:
        """Raw (denormalized) close on the test dates."""
        return self.matrix.target[self.test_idx]

    @property
    def test_dates(self):
        return tuple(self.matrix.dates[i] for i in self.test_idx)


def normalize_columns(
    matrix: FactorMatrix, fit_rows: np.ndarray, clamp_k: float = DEFAULT_CLAMP_K
) -> tuple[np.ndarray, tuple[MadClampParams, ...], tuple[RangeParams, ...]]:
    """Clamp and range-normalize every factor column.

    Parameters are fitted on ``fit_rows`` only and then applied to the whole
    column, so later rows never influence the transform.
    """
    cols = []
    clamps = []
    ranges = []
    for j, name in enumerate(matrix.factor_names):
        raw = matrix.values[:, j]
        try:
            cp = fit_mad_clamp(raw[fit_rows], k=clamp_k)
            clamped = apply_mad_clamp(raw, cp)
            rp = fit_range(clamped[fit_rows])
        except DataError as exc:
            raise DataError(f"factor {name}: {exc}") from None
        cols.append(apply_range(clamped, rp))
        clamps.append(cp)
        ranges.append(rp)
    features = np.column_stack(cols) if cols else np.empty((matrix.n_samples, 0))
    return features, tuple(clamps), tuple(ranges)


def prepare_dataset(
    matrix: FactorMatrix,
    plan: SplitPlan,
    tau: float = DEFAULT_TAU,
    clamp_k: float = DEFAULT_CLAMP_K,
) -> PreparedDataset:
    """Split, normalize, and weight one instrument's factor matrix.

    The chronological split runs first; clamp and range parameters are
    fitted on the weight+train rows (everything before the test block), the
    target is range-normalized the same way (never clamped, so evaluation
    can invert it exactly), and the grey weights come from the leading
    weight block alone.
    """
    if matrix.n_factors == 0:
        raise DataError("factor matrix has no columns")
    weight_idx, train_idx, test_idx = chronological_split(matrix.n_samples, plan)
    fit_rows = np.concatenate([weight_idx, train_idx])

    features, clamps, ranges = normalize_columns(matrix, fit_rows, clamp_k)
    try:
        target_range = fit_range(matrix.target[fit_rows])
    except DataError as exc:
        raise DataError(f"target: {exc}") from None
    target = apply_range(matrix.target, target_range)

    weights = grey_weights(target[weight_idx], features[weight_idx], tau=tau)
    return PreparedDataset(
        matrix=matrix,
        weight_idx=weight_idx,
        train_idx=train_idx,
        test_idx=test_idx,
        clamp=clamps,
        factor_range=ranges,
        target_range=target_range,
        features=features,
        target=target,
        weights=weights,
    )


@dataclass(frozen=True)
class ModelOutcome:
    """A trained model plus its raw-scale test predictions and accuracy."""

    model: SvrModel
    predicted: np.ndarray  # raw price scale, test block
    report: EvalReport


def train_and_evaluate(
    prep: PreparedDataset,
    hyper: Hyperparams,
    weighted: bool,
    *,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> ModelOutcome:
    """Train on the train block, predict the test block, score raw prices."""
    model = train_svr(
        prep.train_features,
        prep.train_target,
        hyper,
        weights=prep.weights.weights if weighted else None,
        tol=tol,
        max_iter=max_iter,
    )
    predicted = invert_range(predict(model, prep.test_features), prep.target_range)
    report = evaluate(prep.observed_test, predicted)
    return ModelOutcome(model=model, predicted=predicted, report=report)


def tune(
    prep: PreparedDataset,
    grid: Grid,
    plan: SplitPlan,
    weighted: bool,
    *,
    kfold_seed: int | None = None,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    workers: int = 1,
) -> tuple[Hyperparams, float]:
    """Grid-search hyperparameters on the train block by k-fold CV."""
    cv_plan = plan if kfold_seed is None else SplitPlan(
        weight_fraction=plan.weight_fraction,
        train_fraction=plan.train_fraction,
        k=plan.k,
        seed=kfold_seed,
    )
    return grid_search(
        prep.train_features,
        prep.train_target,
        grid,
        cv_plan,
        weights=prep.weights.weights if weighted else None,
        tol=tol,
        max_iter=max_iter,
        workers=workers,
    )


def pre_test_view(matrix: FactorMatrix, plan: SplitPlan) -> FactorMatrix:
    """The weight+train rows of a matrix, i.e. everything screening may see."""
    weight_idx, train_idx, _ = chronological_split(matrix.n_samples, plan)
    return matrix.take(np.concatenate([weight_idx, train_idx]))

