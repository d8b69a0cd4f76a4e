"""Epsilon-tube support vector regression with optional per-feature weights.

Training solves the standard RBF-kernel dual; the feature-weighted variant
rescales every coordinate by the square root of its weight before the
kernel sees it, which reproduces the weighted squared distance
sum_k w_k (x_ik - x_jk)^2 inside the RBF exponent.  Feature weights come
from grey correlation analysis (:mod:`greysvr.gca`) but any positive vector
works.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _solver
from .errors import ConvergenceError, DataError
from .gca import GreyWeights
from .preprocess import MadClampParams, RangeParams

MODEL_FORMAT = "greysvr-model/1"

#: Kernel matrices are cached in full up to this many training rows; larger
#: problems recompute rows on demand.
KERNEL_CACHE_LIMIT = 4000

DEFAULT_TOL = 1e-3
DEFAULT_MAX_ITER = 10_000_000


@dataclass(frozen=True)
class Hyperparams:
    """Penalty C, RBF width gamma, and tube half-width epsilon."""

    c: float
    gamma: float
    epsilon: float

    def __post_init__(self):
        for name in ("c", "gamma", "epsilon"):
            v = getattr(self, name)
            if not np.isfinite(v):
                raise DataError(f"hyperparameter {name} must be finite, got {v}")
        if self.c <= 0:
            raise DataError(f"penalty c must be positive, got {self.c}")
        if self.gamma <= 0:
            raise DataError(f"gamma must be positive, got {self.gamma}")
        if self.epsilon < 0:
            raise DataError(f"epsilon must be non-negative, got {self.epsilon}")


@dataclass(frozen=True)
class SvrModel:
    """A trained regressor: weight-embedded support vectors, their dual
    coefficients, the bias, and the preprocessing parameters needed to map
    raw inputs into model space (when trained through the pipeline)."""

    hyper: Hyperparams
    support_vectors: np.ndarray  # (n_sv, n_features), already embedded
    dual_coeffs: np.ndarray      # (n_sv,)
    bias: float
    feature_weights: np.ndarray | None = None
    feature_names: tuple[str, ...] | None = None
    feature_clamp: tuple[MadClampParams, ...] | None = None
    feature_range: tuple[RangeParams, ...] | None = None
    target_range: RangeParams | None = None
    # Training-time metadata: positions of the support vectors in the
    # training set.  Not serialized; None after loading from disk.
    sv_indices: np.ndarray | None = None

    def __post_init__(self):
        if self.support_vectors.ndim != 2:
            raise DataError("support_vectors must be a 2-D array")
        if len(self.dual_coeffs) != len(self.support_vectors):
            raise DataError("one dual coefficient per support vector required")
        self.support_vectors.setflags(write=False)
        self.dual_coeffs.setflags(write=False)
        if self.feature_weights is not None:
            if len(self.feature_weights) != self.n_features:
                raise DataError("feature_weights length must match feature count")
            self.feature_weights.setflags(write=False)

    @property
    def n_features(self) -> int:
        return self.support_vectors.shape[1]

    @property
    def n_support(self) -> int:
        return self.support_vectors.shape[0]

    def predict(self, X) -> np.ndarray:
        return predict(self, X)


def _as_matrix(X, n_features: int | None = None) -> np.ndarray:
    arr = np.asarray(X, dtype=float)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2:
        raise DataError(f"expected a sample-by-feature matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DataError("non-finite values in feature matrix")
    if n_features is not None and arr.shape[1] != n_features:
        raise DataError(f"expected {n_features} features, got {arr.shape[1]}")
    return arr


def _weight_vector(w, n_features: int) -> np.ndarray:
    vec = w.weights if isinstance(w, GreyWeights) else np.asarray(w, dtype=float)
    if vec.ndim != 1 or vec.shape[0] != n_features:
        raise DataError(f"need {n_features} feature weights, got shape {vec.shape}")
    if np.any(vec <= 0) or not np.all(np.isfinite(vec)):
        raise DataError("feature weights must be positive and finite")
    return vec


def rbf_kernel(a, b, gamma: float) -> float:
    """exp(-gamma * squared distance) between two feature vectors."""
    av = np.asarray(a, dtype=float)
    bv = np.asarray(b, dtype=float)
    if av.shape != bv.shape or av.ndim != 1:
        raise DataError(f"vector shape mismatch: {av.shape} vs {bv.shape}")
    d = av - bv
    return float(np.exp(-gamma * float(d @ d)))


def rbf_kernel_matrix(A, B=None, gamma: float = 1.0) -> np.ndarray:
    """All-pairs RBF kernel; with B omitted, the exact-unit-diagonal Gram
    matrix of A against itself."""
    A = _as_matrix(A)
    sq_a = np.einsum("ij,ij->i", A, A)
    if B is None:
        d = sq_a[:, None] + sq_a[None, :] - 2.0 * (A @ A.T)
        np.maximum(d, 0.0, out=d)
        K = np.exp(-gamma * d)
        np.fill_diagonal(K, 1.0)
        return K
    B = _as_matrix(B, A.shape[1])
    sq_b = np.einsum("ij,ij->i", B, B)
    d = sq_a[:, None] + sq_b[None, :] - 2.0 * (A @ B.T)
    np.maximum(d, 0.0, out=d)
    return np.exp(-gamma * d)


def weighted_embed(x, w) -> np.ndarray:
    """Scale each coordinate by sqrt(w_k); accepts a vector or a row matrix."""
    arr = np.asarray(x, dtype=float)
    vec = _weight_vector(w, arr.shape[-1])
    return arr * np.sqrt(vec)


def train_svr(
    X,
    y,
    hyper: Hyperparams,
    weights=None,
    *,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    cache_limit: int = KERNEL_CACHE_LIMIT,
    backend: str | None = None,
) -> SvrModel:
    """Fit the dual and keep only rows with a nonzero coefficient.

    Raises :class:`ConvergenceError` (carrying the achieved violation) if the
    optimality gap is still above ``tol`` after ``max_iter`` pair updates.
    """
    X = _as_matrix(X)
    yv = np.asarray(y, dtype=float)
    if yv.ndim != 1 or yv.shape[0] != X.shape[0]:
        raise DataError(f"target shape {yv.shape} does not match {X.shape[0]} samples")
    if X.shape[0] == 0:
        raise DataError("no training samples")
    if not np.all(np.isfinite(yv)):
        raise DataError("non-finite values in target")

    w_vec = None
    Xe = X.copy()
    if weights is not None:
        w_vec = _weight_vector(weights, X.shape[1])
        Xe = Xe * np.sqrt(w_vec)

    n = Xe.shape[0]
    if n <= cache_limit:
        rows = rbf_kernel_matrix(Xe, gamma=hyper.gamma)
        diag = np.ones(n)
    else:
        provider = _solver.LazyRbfRows(Xe, hyper.gamma)
        rows, diag = provider, provider.diag
        backend = "pure"  # lazy rows are only wired into the pure backend

    result = _solver.solve_dual(
        rows, diag, yv, hyper.c, hyper.epsilon, tol, max_iter, backend=backend
    )
    if not result.converged:
        raise ConvergenceError(
            f"dual optimality gap {result.violation:.3e} still above tolerance "
            f"{tol:.3e} after {result.iterations} updates",
            violation=result.violation,
        )

    sv = result.beta != 0.0
    return SvrModel(
        hyper=hyper,
        support_vectors=Xe[sv].copy(),
        dual_coeffs=result.beta[sv].copy(),
        bias=result.bias,
        feature_weights=None if w_vec is None else w_vec.copy(),
        sv_indices=np.nonzero(sv)[0],
    )


def predict(model: SvrModel, X) -> np.ndarray:
    """Kernel expansion over the support vectors, in normalized target units.

    ``X`` is raw (unembedded) feature rows; the model applies its own weight
    embedding.  Returns one value per row.
    """
    Xq = _as_matrix(X, model.n_features)
    if model.feature_weights is not None:
        Xq = Xq * np.sqrt(model.feature_weights)
    if model.n_support == 0:
        return np.full(Xq.shape[0], model.bias)
    K = rbf_kernel_matrix(Xq, model.support_vectors, model.hyper.gamma)
    return K @ model.dual_coeffs + model.bias


def dual_objective(X, y, hyper: Hyperparams, beta) -> float:
    """Dual objective value at ``beta``; test/diagnostic instrumentation.

    ``beta`` must be feasible: each entry in [-C, C] and summing to zero
    within 1e-8.
    """
    X = _as_matrix(X)
    yv = np.asarray(y, dtype=float)
    bv = np.asarray(beta, dtype=float)
    if bv.shape != yv.shape or bv.shape[0] != X.shape[0]:
        raise DataError("beta/target/sample shapes disagree")
    slack = 1e-12 * max(1.0, hyper.c)
    if np.any(np.abs(bv) > hyper.c + slack):
        raise DataError("infeasible beta: outside the [-C, C] box")
    if abs(float(bv.sum())) > 1e-8:
        raise DataError("infeasible beta: does not sum to zero")
    K = rbf_kernel_matrix(X, gamma=hyper.gamma)
    return float(-0.5 * bv @ K @ bv + yv @ bv - hyper.epsilon * np.abs(bv).sum())


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def dumps_model(model: SvrModel) -> str:
    """Serialize to the versioned flat text format (bit round-trips)."""
    lines = [MODEL_FORMAT]
    lines.append(f"hyper {_fmt(model.hyper.c)} {_fmt(model.hyper.gamma)} {_fmt(model.hyper.epsilon)}")
    lines.append(f"bias {_fmt(model.bias)}")
    lines.append(f"features {model.n_features}")
    if model.feature_names is not None:
        for name in model.feature_names:
            if not name or any(ch.isspace() for ch in name):
                raise DataError(f"feature name {name!r} not serializable")
        lines.append("names " + " ".join(model.feature_names))
    if model.feature_weights is not None:
        lines.append("weights " + " ".join(_fmt(w) for w in model.feature_weights))
    if model.feature_clamp is not None:
        lines.append(f"clamp {len(model.feature_clamp)}")
        for p in model.feature_clamp:
            lines.append(f"{_fmt(p.median)} {_fmt(p.mad)} {_fmt(p.k)}")
    if model.feature_range is not None:
        lines.append(f"feature_range {len(model.feature_range)}")
        for p in model.feature_range:
            lines.append(f"{_fmt(p.lo)} {_fmt(p.hi)}")
    if model.target_range is not None:
        lines.append(f"target_range {_fmt(model.target_range.lo)} {_fmt(model.target_range.hi)}")
    lines.append(f"support_vectors {model.n_support}")
    for coef, row in zip(model.dual_coeffs, model.support_vectors):
        lines.append(" ".join([_fmt(coef)] + [_fmt(v) for v in row]))
    lines.append("end")
    return "\n".join(lines) + "\n"


def save_model(model: SvrModel, path) -> None:
    with open(path, "w") as fh:
        fh.write(dumps_model(model))


def _parse_floats(tokens, count: int, where: str) -> list[float]:
    if len(tokens) != count:
        raise DataError(f"model file: {where}: expected {count} numbers, got {len(tokens)}")
    try:
        return [float(t) for t in tokens]
    except ValueError as exc:
        raise DataError(f"model file: {where}: {exc}") from None


def loads_model(text: str) -> SvrModel:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != MODEL_FORMAT:
        head = lines[0] if lines else "<empty>"
        raise DataError(f"model file: unsupported format header {head!r}")
    fields: dict = {}
    pos = 1

    def take() -> str:
        nonlocal pos
        if pos >= len(lines):
            raise DataError("model file: truncated before 'end'")
        line = lines[pos]
        pos += 1
        return line

    while True:
        line = take()
        if line == "end":
            break
        key, _, rest = line.partition(" ")
        tokens = rest.split()
        if key == "hyper":
            c, g, e = _parse_floats(tokens, 3, "hyper")
            fields["hyper"] = Hyperparams(c=c, gamma=g, epsilon=e)
        elif key == "bias":
            fields["bias"] = _parse_floats(tokens, 1, "bias")[0]
        elif key == "features":
            fields["n_features"] = int(tokens[0])
        elif key == "names":
            fields["feature_names"] = tuple(tokens)
        elif key == "weights":
            fields["feature_weights"] = np.array(
                _parse_floats(tokens, fields.get("n_features", len(tokens)), "weights")
            )
        elif key == "clamp":
            count = int(tokens[0])
            fields["feature_clamp"] = tuple(
                MadClampParams(*_parse_floats(take().split(), 3, "clamp row"))
                for _ in range(count)
            )
        elif key == "feature_range":
            count = int(tokens[0])
            fields["feature_range"] = tuple(
                RangeParams(*_parse_floats(take().split(), 2, "feature_range row"))
                for _ in range(count)
            )
        elif key == "target_range":
            lo, hi = _parse_floats(tokens, 2, "target_range")
            fields["target_range"] = RangeParams(lo=lo, hi=hi)
        elif key == "support_vectors":
            count = int(tokens[0])
            m = fields.get("n_features")
            if m is None:
                raise DataError("model file: 'features' must precede 'support_vectors'")
            coeffs = np.empty(count)
            vecs = np.empty((count, m))
            for s in range(count):
                nums = _parse_floats(take().split(), m + 1, f"support vector {s}")
                coeffs[s] = nums[0]
                vecs[s] = nums[1:]
            fields["dual_coeffs"] = coeffs
            fields["support_vectors"] = vecs
        else:
            raise DataError(f"model file: unknown key {key!r}")

    for required in ("hyper", "bias", "n_features", "support_vectors"):
        if required not in fields:
            raise DataError(f"model file: missing {required!r}")
    n_features = fields.pop("n_features")
    model = SvrModel(**fields)
    if model.n_features != n_features:
        raise DataError("model file: feature count disagrees with support vectors")
    return model


def load_model(path) -> SvrModel:
    with open(path) as fh:
        return loads_model(fh.read())
