"""Two-stage factor screening.

Stage one ranks every factor by its mean grey relational degree against the
close price across all stocks and splits the set at a threshold: factors at
or above it are *basic* (kept outright), the rest are *observed* and go to
stage two.  Stage two evaluates each observed factor by adding it to the
basic set on small random samples of stocks and comparing weighted against
unweighted training; factors that repeatedly fail to help are eliminated,
the rest are promoted to basic.

Both stages take raw (already lagged, if desired) factor matrices and do
their own per-stock normalization on pre-test rows, so no information from
the evaluation block leaks into the screening decision.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from math import ceil

import numpy as np

from .errors import ConvergenceError, DataError, GreysvrError
from .experiment import (
    DEFAULT_CLAMP_K,
    derive_seed,
    prepare_dataset,
    train_and_evaluate,
)
from .gca import DEFAULT_TAU, grey_relational_degrees
from .metrics import ERROR_METRICS, METRIC_NAMES
from .model_selection import Grid, SplitPlan
from .svr import DEFAULT_MAX_ITER, DEFAULT_TOL, predict, train_svr

DEFAULT_THRESHOLD = 0.6
DEFAULT_FRACTION = 0.1
DEFAULT_REPEATS = 3

#: Search grid used while screening.  Each variant is tuned on this small
#: grid before the comparison; a single shared triple would handicap one
#: side, because the weighted kernel contracts distances by roughly the
#: factor count and so wants a larger gamma than the plain kernel.
SCREENING_GRID = Grid(
    c_values=(8.0,),
    gamma_values=(0.25, 1.0, 4.0, 16.0, 64.0),
    epsilon_values=(0.015625,),
)


@dataclass(frozen=True)
class EliminationRule:
    """When does an observed factor get eliminated.

    A repeat votes to eliminate when at least ``metrics_below`` of the four
    win counts fall below half (rounded up) of the stocks evaluated in that
    repeat; the factor is eliminated when at least ``repeats_required``
    repeats vote that way.
    """

    metrics_below: int = 3
    repeats_required: int = 2

    def __post_init__(self):
        if not (1 <= self.metrics_below <= len(METRIC_NAMES)):
            raise DataError(f"metrics_below must be in 1..4, got {self.metrics_below}")
        if self.repeats_required < 1:
            raise DataError(f"repeats_required must be >= 1, got {self.repeats_required}")


@dataclass(frozen=True)
class PreliminaryResult:
    """Stage-one output: mean degree per factor and the threshold split."""

    degrees: dict[str, float]
    threshold: float
    basic: tuple[str, ...]
    observed: tuple[str, ...]


@dataclass(frozen=True)
class RepeatOutcome:
    """One repeat of one observed factor's random evaluation."""

    repeat: int
    stock_ids: tuple[str, ...]
    wins: dict[str, int]
    evaluated: int
    half: int
    vote_eliminate: bool
    abort_reason: str | None = None


@dataclass(frozen=True)
class FactorVerdict:
    factor: str
    repeats: tuple[RepeatOutcome, ...]
    eliminated: bool


@dataclass(frozen=True)
class ScreeningReport:
    """Full screening outcome; ``final_basic`` is what modeling should use."""

    degrees: dict[str, float]
    threshold: float
    basic: tuple[str, ...]
    observed: tuple[str, ...]
    verdicts: tuple[FactorVerdict, ...]
    eliminated: tuple[str, ...]
    kept: tuple[str, ...]
    final_basic: tuple[str, ...]
    rule: EliminationRule = field(default_factory=EliminationRule)

    def __post_init__(self):
        if set(self.kept) | set(self.eliminated) != set(self.observed):
            raise DataError("kept/eliminated do not partition the observed set")
        if set(self.kept) & set(self.eliminated):
            raise DataError("a factor cannot be both kept and eliminated")
        if self.final_basic != self.basic + self.kept:
            raise DataError("final_basic must be basic followed by kept factors")

    def to_dict(self) -> dict:
        return {
            "degrees": {k: float(v) for k, v in self.degrees.items()},
            "threshold": self.threshold,
            "basic": list(self.basic),
            "observed": list(self.observed),
            "eliminated": list(self.eliminated),
            "kept": list(self.kept),
            "final_basic": list(self.final_basic),
            "rule": {
                "metrics_below": self.rule.metrics_below,
                "repeats_required": self.rule.repeats_required,
            },
            "verdicts": [
                {
                    "factor": v.factor,
                    "eliminated": v.eliminated,
                    "repeats": [
                        {
                            "repeat": r.repeat,
                            "stocks": list(r.stock_ids),
                            "wins": dict(r.wins),
                            "evaluated": r.evaluated,
                            "half": r.half,
                            "vote_eliminate": r.vote_eliminate,
                            "abort_reason": r.abort_reason,
                        }
                        for r in v.repeats
                    ],
                }
                for v in self.verdicts
            ],
        }


def _shared_factor_order(stocks) -> tuple[str, ...]:
    if not stocks:
        raise DataError("no stocks to screen")
    order = tuple(stocks[0].factor_names)
    for i, s in enumerate(stocks[1:], start=1):
        if set(s.factor_names) != set(order):
            raise DataError(
                f"stock {i} factor set {sorted(s.factor_names)} differs "
                f"from {sorted(order)}"
            )
    return order


def _aligned(stock, order):
    return stock if tuple(stock.factor_names) == order else stock.with_factors(order)


def preliminary_screen(
    stocks,
    threshold: float = DEFAULT_THRESHOLD,
    *,
    tau: float = DEFAULT_TAU,
    plan: SplitPlan = SplitPlan(),
    clamp_k: float = DEFAULT_CLAMP_K,
) -> PreliminaryResult:
    """Stage one: average grey degree per factor across stocks.

    Degrees are computed on each stock's normalized pre-test rows; factors
    whose cross-stock mean reaches ``threshold`` become basic, the rest are
    observed and await stage two.
    """
    order = _shared_factor_order(stocks)
    per_stock = []
    for stock in stocks:
        prep = prepare_dataset(_aligned(stock, order), plan, tau, clamp_k)
        rows = np.concatenate([prep.weight_idx, prep.train_idx])
        per_stock.append(
            grey_relational_degrees(prep.target[rows], prep.features[rows], tau)
        )
    mean_deg = np.mean(np.vstack(per_stock), axis=0)
    degrees = {name: float(d) for name, d in zip(order, mean_deg)}
    basic = tuple(n for n in order if degrees[n] >= threshold)
    observed = tuple(n for n in order if degrees[n] < threshold)
    return PreliminaryResult(
        degrees=degrees, threshold=threshold, basic=basic, observed=observed
    )


def _holdout_tune(prep, grid, weighted, tol, max_iter):
    """Pick a grid triple by a single chronological holdout on the train block.

    Screening scores every candidate on many (factor, stock) pairs, so it
    trades the pipeline's k-fold search for one ordered 4:1 split.  Ties and
    failures follow the same rules as the full grid search.
    """
    X = prep.train_features
    y = prep.train_target
    cut = (len(y) * 4) // 5
    if cut < 2 or len(y) - cut < 1:
        raise DataError(f"train block too small to tune on: {len(y)} rows")
    weights = prep.weights.weights if weighted else None
    best = None
    for hyper in grid.triples():
        try:
            model = train_svr(X[:cut], y[:cut], hyper, weights, tol=tol, max_iter=max_iter)
        except GreysvrError:
            continue
        resid = predict(model, X[cut:]) - y[cut:]
        err = float(np.mean(resid * resid))
        key = (err, hyper.c, hyper.gamma, -hyper.epsilon)
        if best is None or key < best[0]:
            best = (key, hyper)
    if best is None:
        raise ConvergenceError("every grid cell failed to train")
    return best[1]


def _evaluate_stock(stock, factor, basic, plan, tau, clamp_k, grid, tol, max_iter):
    """FWSVR-vs-cSVR per-metric win flags for one stock and candidate set."""
    fm = _aligned(stock, tuple(basic) + (factor,))
    prep = prepare_dataset(fm, plan, tau, clamp_k)
    reports = {}
    for weighted in (False, True):
        hyper = _holdout_tune(prep, grid, weighted, tol, max_iter)
        reports[weighted] = train_and_evaluate(
            prep, hyper, weighted=weighted, tol=tol, max_iter=max_iter
        ).report
    flags = {}
    for m in METRIC_NAMES:
        va = reports[True].metric(m)
        vb = reports[False].metric(m)
        if va is None or vb is None:
            flags[m] = False
            continue
        flags[m] = va < vb if m in ERROR_METRICS else va > vb
    return flags


def random_screen(
    observed,
    basic,
    stocks,
    fraction: float = DEFAULT_FRACTION,
    repeats: int = DEFAULT_REPEATS,
    seed: int = 0,
    *,
    stock_ids=None,
    grid: Grid = SCREENING_GRID,
    rule: EliminationRule = EliminationRule(),
    plan: SplitPlan = SplitPlan(),
    tau: float = DEFAULT_TAU,
    clamp_k: float = DEFAULT_CLAMP_K,
    degrees: dict[str, float] | None = None,
    threshold: float = DEFAULT_THRESHOLD,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    workers: int = 1,
) -> ScreeningReport:
    """Stage two: evaluate each observed factor on random stock samples.

    For every observed factor and repeat, a fresh sample of
    ``ceil(fraction * len(stocks))`` stocks is drawn without replacement;
    on each, the basic set plus the candidate is trained weighted and
    unweighted (each tuned on ``grid``) and per-metric wins are counted.
    The verdict follows ``rule``; a training failure aborts that repeat
    (recorded, no vote).  Deterministic for a given seed.
    """
    observed = tuple(observed)
    basic = tuple(basic)
    if not (0.0 < fraction <= 1.0):
        raise DataError(f"fraction must be in (0, 1], got {fraction}")
    if repeats < 1:
        raise DataError(f"repeats must be >= 1, got {repeats}")

    stocks = list(stocks)
    if stock_ids is None:
        stock_ids = tuple(f"stock{i:02d}" for i in range(len(stocks)))
    else:
        stock_ids = tuple(stock_ids)
        if len(stock_ids) != len(stocks):
            raise DataError("stock_ids length must match stocks")

    verdicts = []
    if observed and not stocks:
        raise DataError("no stocks to screen")
    n_sampled = ceil(fraction * len(stocks)) if stocks else 0
    if observed and n_sampled > len(stocks):
        raise DataError("sample larger than the stock universe")

    pool = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        for factor in observed:
            outcomes = []
            for rep in range(repeats):
                rng = np.random.default_rng(derive_seed(seed, "screen", factor, rep))
                picked = np.sort(rng.choice(len(stocks), size=n_sampled, replace=False))
                ids = tuple(stock_ids[i] for i in picked)

                def job(i):
                    try:
                        return _evaluate_stock(
                            stocks[i], factor, basic, plan, tau, clamp_k,
                            grid, tol, max_iter,
                        )
                    except GreysvrError as exc:
                        return f"{stock_ids[i]}: {exc}"

                results = list(pool.map(job, picked)) if pool else [job(i) for i in picked]
                abort = next((r for r in results if isinstance(r, str)), None)
                if abort is not None:
                    outcomes.append(RepeatOutcome(
                        repeat=rep, stock_ids=ids,
                        wins={m: 0 for m in METRIC_NAMES},
                        evaluated=0, half=ceil(n_sampled / 2),
                        vote_eliminate=False, abort_reason=abort,
                    ))
                    continue

                wins = {m: sum(r[m] for r in results) for m in METRIC_NAMES}
                half = ceil(n_sampled / 2)
                below = sum(wins[m] < half for m in METRIC_NAMES)
                outcomes.append(RepeatOutcome(
                    repeat=rep, stock_ids=ids, wins=wins,
                    evaluated=n_sampled, half=half,
                    vote_eliminate=below >= rule.metrics_below,
                ))
            eliminated = sum(o.vote_eliminate for o in outcomes) >= rule.repeats_required
            verdicts.append(FactorVerdict(
                factor=factor, repeats=tuple(outcomes), eliminated=eliminated
            ))
    finally:
        if pool is not None:
            pool.shutdown()

    eliminated_names = tuple(v.factor for v in verdicts if v.eliminated)
    kept = tuple(v.factor for v in verdicts if not v.eliminated)
    return ScreeningReport(
        degrees=dict(degrees) if degrees else {},
        threshold=threshold,
        basic=basic,
        observed=observed,
        verdicts=tuple(verdicts),
        eliminated=eliminated_names,
        kept=kept,
        final_basic=basic + kept,
        rule=rule,
    )


def screen(
    stocks,
    *,
    stock_ids=None,
    threshold: float = DEFAULT_THRESHOLD,
    fraction: float = DEFAULT_FRACTION,
    repeats: int = DEFAULT_REPEATS,
    seed: int = 0,
    grid: Grid = SCREENING_GRID,
    rule: EliminationRule = EliminationRule(),
    plan: SplitPlan = SplitPlan(),
    tau: float = DEFAULT_TAU,
    clamp_k: float = DEFAULT_CLAMP_K,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    workers: int = 1,
) -> ScreeningReport:
    """Both screening stages in one call."""
    prelim = preliminary_screen(
        stocks, threshold, tau=tau, plan=plan, clamp_k=clamp_k
    )
    return random_screen(
        prelim.observed,
        prelim.basic,
        stocks,
        fraction,
        repeats,
        seed,
        stock_ids=stock_ids,
        grid=grid,
        rule=rule,
        plan=plan,
        tau=tau,
        clamp_k=clamp_k,
        degrees=prelim.degrees,
        threshold=threshold,
        tol=tol,
        max_iter=max_iter,
        workers=workers,
    )
