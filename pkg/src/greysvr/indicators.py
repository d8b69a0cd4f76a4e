"""Sentiment indicators built from daily bars and factor-return panels.

Five indicators are produced: X31 trailing-mean turnover rate, X32 average
idiosyncratic volatility from a rolling three-factor regression, X33 the AR
popularity ratio, X34 ADTM open-price momentum, and X35 on-balance volume.
A window "ending at t" always includes day t itself, so the first defined
date is the one with a full window of history behind it.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from datetime import date

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import DataError
from .market_data import NamedSeries, OhlcvSeries, _parse_date, _parse_float

PANEL_COLUMNS = ("date", "r_i", "r_m", "r_f", "hml", "smb")


@dataclass(frozen=True)
class IndicatorSeries(NamedSeries):
    """A computed indicator; dates where the value is undefined are listed
    separately instead of carrying a sentinel."""

    window: int = 1
    undefined_dates: tuple[date, ...] = ()


@dataclass(frozen=True)
class FactorReturnsPanel:
    """Per-date instrument return, market return, risk-free rate, HML, SMB."""

    dates: tuple[date, ...]
    r_i: np.ndarray
    r_m: np.ndarray
    r_f: np.ndarray
    hml: np.ndarray
    smb: np.ndarray

    def __post_init__(self):
        n = len(self.dates)
        for name in ("r_i", "r_m", "r_f", "hml", "smb"):
            arr = getattr(self, name)
            if len(arr) != n:
                raise DataError(f"panel column {name} has {len(arr)} rows, expected {n}")
            arr.setflags(write=False)

    def __len__(self) -> int:
        return len(self.dates)


def load_factor_panel(path) -> FactorReturnsPanel:
    """Load a ``date,r_i,r_m,r_f,hml,smb`` CSV."""
    path = str(path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        if tuple(h.strip() for h in header) != PANEL_COLUMNS:
            raise DataError(f"{path}: expected header {','.join(PANEL_COLUMNS)!r}")
        rows = []
        for i, record in enumerate(reader, start=1):
            if len(record) != 6:
                raise DataError(f"{path}: row {i}: expected 6 fields, got {len(record)}")
            d = _parse_date(record[0], path, i)
            nums = [_parse_float(record[j], path, i, PANEL_COLUMNS[j]) for j in range(1, 6)]
            rows.append((d, i, nums))
    if not rows:
        raise DataError(f"{path}: no data rows")
    rows.sort(key=lambda r: r[0])
    for (d1, _, _), (d2, i2, _) in zip(rows, rows[1:]):
        if d1 == d2:
            raise DataError(f"{path}: row {i2}: duplicate date {d2.isoformat()}")
    data = np.array([r[2] for r in rows], dtype=float)
    return FactorReturnsPanel(
        dates=tuple(r[0] for r in rows),
        r_i=data[:, 0].copy(), r_m=data[:, 1].copy(), r_f=data[:, 2].copy(),
        hml=data[:, 3].copy(), smb=data[:, 4].copy(),
    )


def ols(X, y) -> tuple[np.ndarray, np.ndarray]:
    """Least-squares fit without intercept.

    Returns (coeffs, residuals) with residuals = y - X @ coeffs.  The design
    matrix must be strictly tall and of full column rank (singular values
    below 1e-10 of the largest count as zero).
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or y.ndim != 1 or X.shape[0] != y.shape[0]:
        raise DataError(f"design/response shape mismatch: {X.shape} vs {y.shape}")
    if X.shape[0] <= X.shape[1]:
        raise DataError(f"need more rows than columns, got {X.shape}")
    coeffs, _, rank, _ = np.linalg.lstsq(X, y, rcond=1e-10)
    if rank < X.shape[1]:
        raise DataError(f"design matrix is rank deficient ({rank} < {X.shape[1]})")
    return coeffs, y - X @ coeffs


def _check_window(n: int, window: int, need: int, what: str):
    if window < 1:
        raise DataError(f"{what}: window must be >= 1, got {window}")
    if n < need:
        raise DataError(f"{what}: need at least {need} rows for window {window}, got {n}")


def turnover_rate(series: OhlcvSeries, window: int = 20) -> IndicatorSeries:
    """X31: trailing-window mean of daily volume / float shares."""
    if series.float_shares is None:
        raise DataError(f"{series.instrument_id}: float_shares column required for turnover")
    _check_window(len(series), window, window, "turnover_rate")
    daily = series.volume / series.float_shares
    values = sliding_window_view(daily, window).mean(axis=1)
    return IndicatorSeries(
        name="X31", dates=series.dates[window - 1:], values=values, window=window
    )


def ivr(panel: FactorReturnsPanel, window: int = 20, aggregate: str = "mean-abs") -> IndicatorSeries:
    """X32: rolling no-intercept regression of excess return on the three
    factors; each date aggregates the window's residuals.

    ``aggregate`` is ``mean-abs`` (default) or ``std``.
    """
    if aggregate not in ("mean-abs", "std"):
        raise DataError(f"unknown ivr aggregate {aggregate!r}")
    if window < 4:
        raise DataError(f"ivr: window must exceed the 3 regressors, got {window}")
    _check_window(len(panel), window, window, "ivr")
    excess = panel.r_i - panel.r_f
    design = np.column_stack([panel.r_m - panel.r_f, panel.hml, panel.smb])
    values = np.empty(len(panel) - window + 1)
    for t in range(window - 1, len(panel)):
        lo = t - window + 1
        _, resid = ols(design[lo:t + 1], excess[lo:t + 1])
        values[t - window + 1] = np.abs(resid).mean() if aggregate == "mean-abs" else resid.std()
    return IndicatorSeries(
        name="X32", dates=panel.dates[window - 1:], values=values, window=window
    )


def ar_index(series: OhlcvSeries, window: int = 26) -> IndicatorSeries:
    """X33: window sum of (high - open) over window sum of (open - low).

    Dates whose denominator is zero are reported in ``undefined_dates`` and
    carry no value.
    """
    _check_window(len(series), window, window, "ar_index")
    up = sliding_window_view(series.high - series.open, window).sum(axis=1)
    down = sliding_window_view(series.open - series.low, window).sum(axis=1)
    dates = series.dates[window - 1:]
    defined = down != 0.0
    values = up[defined] / down[defined]
    return IndicatorSeries(
        name="X33",
        dates=tuple(d for d, ok in zip(dates, defined) if ok),
        values=values,
        window=window,
        undefined_dates=tuple(d for d, ok in zip(dates, defined) if not ok),
    )


def adtm(series: OhlcvSeries, window: int = 23) -> IndicatorSeries:
    """X34: window-summed open-price momentum, normalized into [-1, 1].

    Per day (needs the previous open): DTM = 0 when open <= prev open, else
    max(high - open, open - prev open); DBM = 0 when open >= prev open, else
    max(open - low, open - prev open).  With STM/SBM the window sums, ADTM
    is (STM-SBM)/STM when STM > SBM, (STM-SBM)/SBM when STM < SBM, else 0.
    """
    _check_window(len(series), window, window + 1, "adtm")
    prev = series.open[:-1]
    cur = series.open[1:]
    dtm = np.where(cur <= prev, 0.0, np.maximum(series.high[1:] - cur, cur - prev))
    dbm = np.where(cur >= prev, 0.0, np.maximum(cur - series.low[1:], cur - prev))
    stm = sliding_window_view(dtm, window).sum(axis=1)
    sbm = sliding_window_view(dbm, window).sum(axis=1)
    values = np.zeros_like(stm)
    gt = stm > sbm
    lt = stm < sbm
    values[gt] = (stm[gt] - sbm[gt]) / stm[gt]
    values[lt] = (stm[lt] - sbm[lt]) / sbm[lt]
    return IndicatorSeries(
        name="X34", dates=series.dates[window:], values=values, window=window
    )


def obv(series: OhlcvSeries, anchor: str = "open") -> IndicatorSeries:
    """X35: on-balance volume, seeded with the first day's volume.

    The sign of each day's volume contribution compares today's price anchor
    to yesterday's: +1 when today >= yesterday, -1 otherwise.  The anchor is
    the opening price by default; ``anchor="close"`` switches to the more
    conventional close-based variant.
    """
    if anchor not in ("open", "close"):
        raise DataError(f"unknown obv anchor {anchor!r}")
    if len(series) < 1:
        raise DataError("obv needs at least one bar")
    ref = series.open if anchor == "open" else series.close
    sgn = np.where(ref[1:] >= ref[:-1], 1.0, -1.0)
    steps = np.concatenate([[series.volume[0]], sgn * series.volume[1:]])
    return IndicatorSeries(
        name="X35", dates=series.dates, values=np.cumsum(steps), window=1
    )
