"""Seeded synthetic market data.

Three generators share one construction: a geometric-random-walk close
price plus factor columns that are noisy multiplicative copies of it.  How
tightly a factor tracks the close (its noise amplitude) controls both its
grey relational degree and its usefulness to a regressor, which makes the
planted structure recoverable by the screening and comparison machinery.

``screening_universe`` additionally plants distractor factors that track
the close only during the leading weight-estimation block and then turn
into independent walks: weight estimation overrates them, so the weighted
model underperforms whenever one is included, and stage-two screening has
something real to eliminate.
"""

from __future__ import annotations

import csv
from datetime import date, timedelta
from math import floor
from pathlib import Path

import numpy as np

from .errors import DataError
from .experiment import derive_seed
from .market_data import FactorMatrix
from .model_selection import SplitPlan

SIGNAL_NOISE = (0.008, 0.01, 0.012)
#: Shelf count shared by the genuine screening factors.  A common grid caps
#: the factors' joint resolution: averaging them recovers the shelf value
#: more precisely but never what happens inside a shelf.
SIGNAL_LEVELS = 8
#: Fraction of a distractor's encoded position that restates the close's
#: overall level (redundant with the genuine factors) rather than the
#: position inside the current shelf (which only the distractor carries).
TRAITOR_MIX = 0.3
#: Two-point tracking error of the signal factors inside the weight block,
#: as a fraction of the early mean price.  Every early deviation has the
#: same absolute size, which parks the signals' weight-block grey degrees
#: on the coefficient floor and makes the weighting step markedly fuzzier
#: than the training block.
WEIGHT_BLOCK_NOISE = 0.05

#: Rank offsets of the two spurious screening factors' mirror maps, as
#: fractions of the fitted-row count.  Distinct offsets keep the two
#: distractors from being copies of each other.
TRAITOR_SHIFTS = (0.0, 0.07)

#: Weight-block step of a spurious factor, as a fraction of the signal step.
TRAITOR_WB_FRACTION = 0.0
#: Per-series factor noise amplitudes for the comparison universe: one
#: near-perfect factor through one that is mostly noise.
RELEVANCE_LADDER = (0.003, 0.02, 0.08, 0.3)


def _dates(n: int, start: date = date(2015, 1, 1)) -> tuple[date, ...]:
    return tuple(start + timedelta(days=i) for i in range(n))


def _close_path(rng, n: int, sigma: float = 0.015) -> np.ndarray:
    p0 = rng.uniform(8.0, 60.0)
    steps = rng.normal(0.0, sigma, size=n - 1)
    return p0 * np.exp(np.concatenate([[0.0], np.cumsum(steps)]))


def _reflecting_path(rng, n: int, sigma: float = 0.07, span: float = 0.3) -> np.ndarray:
    """Log-price random walk reflected inside a fixed band.

    Bounded excursions keep every block of rows on one stationary
    distribution, so robust per-column statistics fitted on early rows
    stay valid for the whole series and the evaluation block never
    extrapolates, while the steps themselves stay independent.
    """
    p0 = rng.uniform(8.0, 60.0)
    x = np.empty(n)
    while True:
        x[0] = rng.uniform(-span, span)
        steps = rng.normal(0.0, sigma, size=n - 1)
        for t in range(1, n):
            y = x[t - 1] + steps[t - 1]
            if y > span:
                y = 2.0 * span - y
            elif y < -span:
                y = -2.0 * span - y
            x[t] = y
        # Redraw the rare path that hugs one wall; every series should
        # sweep most of the band so structure dominates tracking noise.
        if x.max() - x.min() >= 1.5 * span:
            return p0 * np.exp(x)


def _tracking_factor(rng, close: np.ndarray, noise: float) -> np.ndarray:
    return close * (1.0 + noise * rng.normal(size=close.shape[0]))


def screening_universe(
    seed: int = 42,
    n_stocks: int = 20,
    n_days: int = 420,
    plan: SplitPlan = SplitPlan(),
) -> tuple[tuple[str, ...], list[FactorMatrix]]:
    """Stocks with three genuine factors and two planted distractors.

    The distractors (``noise1``, ``noise2``) mimic the close inside the
    weight block (first ``plan.weight_fraction`` of rows) and are
    independent geometric walks afterwards.
    """
    if n_days < 40:
        raise DataError(f"need at least 40 days, got {n_days}")
    n_weight = floor(n_days * plan.weight_fraction)
    ids = tuple(f"syn{i:03d}" for i in range(n_stocks))
    dates = _dates(n_days)
    matrices = []
    for i in range(n_stocks):
        rng = np.random.default_rng(derive_seed(seed, "screening", i))
        close = _reflecting_path(rng, n_days)
        n_fit = n_weight + floor((n_days - n_weight) * plan.train_fraction)
        order = np.argsort(close[:n_fit], kind="stable")
        sorted_fit = close[:n_fit][order]
        rank = np.empty(n_fit, dtype=np.intp)
        rank[order] = np.arange(n_fit)
        qgrid = (np.arange(n_fit) + 0.5) / n_fit
        quant = np.interp(close, sorted_fit, qgrid)
        cols = {}
        common = rng.normal(size=n_days)
        wb_step = WEIGHT_BLOCK_NOISE * close[:n_weight].mean()
        fit_span = sorted_fit[-1] - sorted_fit[0]
        # Each signal factor reports the close coarsened onto a shelf grid:
        # the value at the midpoint of the occupied quantile bin.  Shelves
        # cap what the genuine factors can resolve, so any model that wants
        # the residual fine structure has to borrow it from other columns,
        # and the tiny tracking errors share a common component so no
        # linear blend can average them away.
        for k, (levels, a) in enumerate(zip(SIGNAL_LEVELS, SIGNAL_NOISE)):
            e = 0.8 * common + 0.6 * rng.normal(size=n_days)
            shelf = (np.clip(np.floor(quant * levels), 0, levels - 1) + 0.5) / levels
            sig = np.interp(shelf, qgrid, sorted_fit) + a * fit_span * e
            flips = rng.choice((-1.0, 1.0), size=n_weight)
            sig[:n_weight] = close[:n_weight] + wb_step * flips
            # Keep every factor on the close's own trading range so all
            # columns share one normalization scale.
            cols[f"sig{k + 1}"] = np.clip(sig, sorted_fit[0], sorted_fit[-1])
        for j, shift in enumerate(TRAITOR_SHIFTS):
            # A spurious correlate: copies the close through the weight
            # block, then reports the close's mirror image within its own
            # trading range (low days read high and vice versa).  Every
            # later value is one of the close's own, so robust location and
            # scale statistics cannot tell it from a genuine factor, yet
            # most rows sit far from the close in distribution, which keeps
            # the grey degree low.  Inside the evaluation block the mirror
            # is dropped and the column reports the close straight, so the
            # inverse association learned in training points at the wrong
            # end of the range exactly where models are scored, and the
            # pull a model feels grows with the attention its kernel pays
            # the column.
            jitter = np.rint(0.005 * n_fit * rng.normal(size=n_days - n_weight))
            test_rank = np.clip(np.rint(quant[n_fit:] * n_fit - 0.5), 0, n_fit - 1)
            src = np.concatenate([n_fit - 1 - rank[n_weight:n_fit], test_rank])
            idx = np.clip(src + round(shift * n_fit) + jitter, 0, n_fit - 1).astype(np.intp)
            distractor = np.empty(n_days)
            wb_flips = rng.choice((-1.0, 1.0), size=n_weight)
            distractor[:n_weight] = close[:n_weight] + TRAITOR_WB_FRACTION * wb_step * wb_flips
            distractor[n_weight:] = sorted_fit[idx]
            cols[f"noise{j + 1}"] = distractor
        names = tuple(cols)
        values = np.column_stack([cols[n] for n in names])
        matrices.append(FactorMatrix(dates, names, values, close.copy()))
    return ids, matrices


def comparison_universe(
    seed: int = 7,
    n_series: int = 30,
    n_days: int = 240,
) -> tuple[tuple[str, ...], list[FactorMatrix]]:
    """Series whose factors span a fixed ladder of planted relevance.

    Every series carries one factor per rung of ``RELEVANCE_LADDER`` (order
    shuffled per series, amplitudes jittered +/-20%), so per-feature
    weighting always has a meaningful spread to exploit.
    """
    ids = tuple(f"cmp{i:03d}" for i in range(n_series))
    dates = _dates(n_days)
    matrices = []
    for i in range(n_series):
        rng = np.random.default_rng(derive_seed(seed, "comparison", i))
        close = _close_path(rng, n_days)
        amps = np.array(RELEVANCE_LADDER) * rng.uniform(0.8, 1.2, size=len(RELEVANCE_LADDER))
        rng.shuffle(amps)
        names = tuple(f"f{k + 1}" for k in range(len(amps)))
        values = np.column_stack([
            _tracking_factor(rng, close, a) for a in amps
        ])
        matrices.append(FactorMatrix(dates, names, values, close.copy()))
    return ids, matrices


def _bars_from_close(rng, close: np.ndarray):
    """Consistent OHLCV arrays around a given close path."""
    n = close.shape[0]
    prev = np.concatenate([[close[0]], close[:-1]])
    open_ = prev * (1.0 + rng.uniform(-0.005, 0.005, size=n))
    body_hi = np.maximum(open_, close)
    body_lo = np.minimum(open_, close)
    high = body_hi * (1.0 + rng.uniform(0.0, 0.01, size=n))
    low = body_lo * (1.0 - rng.uniform(0.0, 0.01, size=n))
    volume = np.round(rng.lognormal(11.0, 0.4, size=n))
    amount = volume * close
    return open_, high, low, volume, amount


def write_universe(
    out_dir,
    kind: str = "demo",
    seed: int = 42,
    n_stocks: int = 4,
    n_days: int = 200,
) -> Path:
    """Write a CSV universe plus a ready-to-run config file.

    ``kind``: ``demo`` (bars + two exogenous tracking factors per stock),
    ``screening`` (the screening universe, as bars + factor files), or
    ``comparison``.  Returns the path of the written config.
    """
    out = Path(out_dir)
    if kind not in ("demo", "screening", "comparison"):
        raise DataError(f"unknown universe kind {kind!r}")
    data_dir = out / "data"
    extra_dir = out / "factors"
    data_dir.mkdir(parents=True, exist_ok=True)
    extra_dir.mkdir(parents=True, exist_ok=True)

    if kind == "screening":
        ids, matrices = screening_universe(seed, n_stocks=n_stocks, n_days=n_days)
    elif kind == "comparison":
        ids, matrices = comparison_universe(seed, n_series=n_stocks, n_days=n_days)
    else:
        ids, matrices = _demo_matrices(seed, n_stocks, n_days)

    for sid, fm in zip(ids, matrices):
        rng = np.random.default_rng(derive_seed(seed, "bars", sid))
        close = fm.target
        open_, high, low, volume, amount = _bars_from_close(rng, close)
        float_shares = float(np.round(rng.uniform(5e7, 5e8)))
        with open(data_dir / f"{sid}.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["date", "open", "high", "low", "close",
                        "volume", "amount", "float_shares"])
            for t, d in enumerate(fm.dates):
                w.writerow([
                    d.isoformat(),
                    f"{open_[t]:.6f}", f"{high[t]:.6f}", f"{low[t]:.6f}",
                    f"{close[t]:.6f}", f"{volume[t]:.0f}",
                    f"{amount[t]:.2f}", f"{float_shares:.0f}",
                ])
        for name in fm.factor_names:
            col = fm.column(name)
            with open(extra_dir / f"{sid}.{name}.csv", "w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(["date", "value"])
                for d, v in zip(fm.dates, col):
                    w.writerow([d.isoformat(), f"{v:.8f}"])

    config_path = out / "run.conf"
    grid_lines = (
        "c_values = 0.5, 2, 8\n"
        "gamma_values = 2^-6, 2^-3, 1\n"
        "epsilon_values = 2^-8, 2^-5\n"
    )
    config_path.write_text(
        "# generated synthetic universe\n"
        f"data_dir = {data_dir}\n"
        f"extra_dir = {extra_dir}\n"
        f"out_dir = {out / 'out'}\n"
        f"seed = {seed}\n"
        "mode = compare\n"
        "technical = off\n"
        "indicators = off\n"
        "screening = off\n"
        "lag_all = on\n"
        "k = 5\n"
        + grid_lines
    )
    return config_path


def _demo_matrices(seed, n_stocks, n_days):
    ids = tuple(f"demo{i:02d}" for i in range(n_stocks))
    dates = _dates(n_days)
    matrices = []
    for i in range(n_stocks):
        rng = np.random.default_rng(derive_seed(seed, "demo", i))
        close = _close_path(rng, n_days)
        names = ("sig1", "sig2")
        values = np.column_stack([
            _tracking_factor(rng, close, 0.004),
            _tracking_factor(rng, close, 0.05),
        ])
        matrices.append(FactorMatrix(dates, names, values, close.copy()))
    return ids, matrices
