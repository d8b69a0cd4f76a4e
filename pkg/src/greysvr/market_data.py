"""CSV market-data ingestion and date-aligned factor assembly.

The on-disk format is one CSV per instrument with the header
``date,open,high,low,close,volume,amount`` and an optional trailing
``float_shares`` column.  Exogenous series use ``date,value``.  All loaders
raise :class:`~greysvr.errors.DataError` with the offending data row number
(1-based, header excluded) so a bad file can be fixed by line.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from datetime import date

import numpy as np

from .errors import DataError

OHLCV_COLUMNS = ("date", "open", "high", "low", "close", "volume", "amount")


def _read_only(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class OhlcvSeries:
    """Daily bars for one instrument, dates strictly increasing."""

    instrument_id: str
    dates: tuple[date, ...]
    open: np.ndarray
    high: np.ndarray
    low: np.ndarray
    close: np.ndarray
    volume: np.ndarray
    amount: np.ndarray
    float_shares: np.ndarray | None = None

    def __post_init__(self):
        for name in ("open", "high", "low", "close", "volume", "amount"):
            _read_only(getattr(self, name))
        if self.float_shares is not None:
            _read_only(self.float_shares)

    def __len__(self) -> int:
        return len(self.dates)

    @property
    def suspension_mask(self) -> np.ndarray:
        """True on zero-volume (suspension) days."""
        return self.volume == 0.0


@dataclass(frozen=True)
class NamedSeries:
    """A single named factor series on its own date axis."""

    name: str
    dates: tuple[date, ...]
    values: np.ndarray

    def __post_init__(self):
        if len(self.dates) != len(self.values):
            raise DataError(
                f"{self.name}: {len(self.dates)} dates vs {len(self.values)} values"
            )
        _read_only(self.values)

    def __len__(self) -> int:
        return len(self.dates)


@dataclass(frozen=True)
class FactorMatrix:
    """Row-aligned factor columns plus the close-price target."""

    dates: tuple[date, ...]
    factor_names: tuple[str, ...]
    values: np.ndarray  # shape (n_samples, n_factors)
    target: np.ndarray  # shape (n_samples,)

    def __post_init__(self):
        n, m = self.values.shape
        if n != len(self.dates) or n != len(self.target) or m != len(self.factor_names):
            raise DataError("factor matrix dimensions disagree")
        _read_only(self.values)
        _read_only(self.target)

    @property
    def n_samples(self) -> int:
        return self.values.shape[0]

    @property
    def n_factors(self) -> int:
        return self.values.shape[1]

    def column(self, name: str) -> np.ndarray:
        return self.values[:, self.factor_names.index(name)]

    def with_factors(self, names) -> "FactorMatrix":
        """Column subset in the given order."""
        names = tuple(names)
        missing = [n for n in names if n not in self.factor_names]
        if missing:
            raise DataError(f"unknown factor(s): {', '.join(missing)}")
        idx = [self.factor_names.index(n) for n in names]
        return FactorMatrix(self.dates, names, self.values[:, idx].copy(), self.target.copy())

    def take(self, indices) -> "FactorMatrix":
        idx = np.asarray(indices, dtype=int)
        return FactorMatrix(
            tuple(self.dates[i] for i in idx),
            self.factor_names,
            self.values[idx].copy(),
            self.target[idx].copy(),
        )


def _parse_date(raw: str, path: str, row: int) -> date:
    try:
        return date.fromisoformat(raw.strip())
    except ValueError:
        raise DataError(f"{path}: row {row}: bad date {raw!r}") from None


def _parse_float(raw: str, path: str, row: int, col: str) -> float:
    try:
        value = float(raw)
    except ValueError:
        raise DataError(f"{path}: row {row}: bad number {raw!r} in column {col}") from None
    if not np.isfinite(value):
        raise DataError(f"{path}: row {row}: non-finite value in column {col}")
    return value


def load_ohlcv(path, instrument_id: str | None = None) -> OhlcvSeries:
    """Load and validate one instrument's bars.

    Rows are sorted by date; duplicate dates, non-positive prices, and bars
    with high/low inconsistent with open/close are rejected.  Zero-volume
    rows are kept and flagged via :attr:`OhlcvSeries.suspension_mask`.
    """
    path = str(path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        header = tuple(h.strip() for h in header)
        has_float_shares = header == OHLCV_COLUMNS + ("float_shares",)
        if not has_float_shares and header != OHLCV_COLUMNS:
            raise DataError(
                f"{path}: bad header {','.join(header)!r}; "
                f"expected {','.join(OHLCV_COLUMNS)}[,float_shares]"
            )
        width = len(header)
        rows = []
        for i, record in enumerate(reader, start=1):
            if len(record) != width:
                raise DataError(f"{path}: row {i}: expected {width} fields, got {len(record)}")
            d = _parse_date(record[0], path, i)
            nums = [_parse_float(record[j], path, i, header[j]) for j in range(1, width)]
            rows.append((d, i, nums))

    if not rows:
        raise DataError(f"{path}: no data rows")
    rows.sort(key=lambda r: r[0])
    for (d1, _, _), (d2, i2, _) in zip(rows, rows[1:]):
        if d1 == d2:
            raise DataError(f"{path}: row {i2}: duplicate date {d2.isoformat()}")

    dates = tuple(r[0] for r in rows)
    data = np.array([r[2] for r in rows], dtype=float)
    o, h, l, c, v, a = (data[:, j] for j in range(6))
    fs = data[:, 6] if has_float_shares else None

    for col, name in ((o, "open"), (h, "high"), (l, "low"), (c, "close")):
        bad = np.nonzero(col <= 0)[0]
        if bad.size:
            row = rows[bad[0]][1]
            raise DataError(f"{path}: row {row}: non-positive {name} price")
    bad = np.nonzero(h < np.maximum(o, c))[0]
    if bad.size:
        row = rows[bad[0]][1]
        raise DataError(f"{path}: row {row}: high below max(open, close)")
    bad = np.nonzero(l > np.minimum(o, c))[0]
    if bad.size:
        row = rows[bad[0]][1]
        raise DataError(f"{path}: row {row}: low above min(open, close)")
    for col, name in ((v, "volume"), (a, "amount")):
        bad = np.nonzero(col < 0)[0]
        if bad.size:
            row = rows[bad[0]][1]
            raise DataError(f"{path}: row {row}: negative {name}")
    if fs is not None:
        bad = np.nonzero(fs <= 0)[0]
        if bad.size:
            row = rows[bad[0]][1]
            raise DataError(f"{path}: row {row}: non-positive float_shares")

    if instrument_id is None:
        stem = path.rsplit("/", 1)[-1]
        instrument_id = stem[:-4] if stem.endswith(".csv") else stem
    return OhlcvSeries(
        instrument_id=instrument_id,
        dates=dates,
        open=o.copy(), high=h.copy(), low=l.copy(), close=c.copy(),
        volume=v.copy(), amount=a.copy(),
        float_shares=None if fs is None else fs.copy(),
    )


def load_value_series(path, name: str) -> NamedSeries:
    """Load a ``date,value`` CSV as one named series."""
    path = str(path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        if tuple(h.strip() for h in header) != ("date", "value"):
            raise DataError(f"{path}: expected header 'date,value'")
        rows = []
        for i, record in enumerate(reader, start=1):
            if len(record) != 2:
                raise DataError(f"{path}: row {i}: expected 2 fields, got {len(record)}")
            rows.append((_parse_date(record[0], path, i), i,
                         _parse_float(record[1], path, i, "value")))
    if not rows:
        raise DataError(f"{path}: no data rows")
    rows.sort(key=lambda r: r[0])
    for (d1, _, _), (d2, i2, _) in zip(rows, rows[1:]):
        if d1 == d2:
            raise DataError(f"{path}: row {i2}: duplicate date {d2.isoformat()}")
    return NamedSeries(
        name=name,
        dates=tuple(r[0] for r in rows),
        values=np.array([r[2] for r in rows], dtype=float),
    )


def drop_suspensions(series: OhlcvSeries) -> OhlcvSeries:
    """Remove zero-volume days, keeping everything else intact."""
    keep = ~series.suspension_mask
    if np.all(keep):
        return series
    idx = np.nonzero(keep)[0]
    return OhlcvSeries(
        instrument_id=series.instrument_id,
        dates=tuple(series.dates[i] for i in idx),
        open=series.open[idx].copy(), high=series.high[idx].copy(),
        low=series.low[idx].copy(), close=series.close[idx].copy(),
        volume=series.volume[idx].copy(), amount=series.amount[idx].copy(),
        float_shares=None if series.float_shares is None else series.float_shares[idx].copy(),
    )


def build_technical_factors(
    series: OhlcvSeries, index: NamedSeries | None = None
) -> list[NamedSeries]:
    """Raw technical factor set for one instrument.

    X11 daily high, X12 daily low, X13 volume, X14 amount, X15 previous
    close (defined from the second bar on), and X16 the market index level
    when an index series is supplied.
    """
    if len(series) < 2:
        raise DataError(f"{series.instrument_id}: need at least 2 bars, got {len(series)}")
    out = [
        NamedSeries("X11", series.dates, series.high.copy()),
        NamedSeries("X12", series.dates, series.low.copy()),
        NamedSeries("X13", series.dates, series.volume.copy()),
        NamedSeries("X14", series.dates, series.amount.copy()),
        NamedSeries("X15", series.dates[1:], series.close[:-1].copy()),
    ]
    if index is not None:
        out.append(NamedSeries("X16", index.dates, index.values.copy()))
    return out


def align(series: OhlcvSeries, factors) -> FactorMatrix:
    """Intersect all date axes and assemble the factor matrix.

    Column order follows the order factors are given in; the target column
    is the instrument's close on the shared dates.
    """
    factors = list(factors)
    names = [f.name for f in factors]
    if len(set(names)) != len(names):
        raise DataError(f"duplicate factor names: {names}")
    common = set(series.dates)
    for f in factors:
        common &= set(f.dates)
    if not common:
        raise DataError(
            f"{series.instrument_id}: no common dates across close and {len(factors)} factor(s)"
        )
    shared = sorted(common)
    pos = {d: i for i, d in enumerate(series.dates)}
    target = np.array([series.close[pos[d]] for d in shared], dtype=float)
    cols = []
    for f in factors:
        fpos = {d: i for i, d in enumerate(f.dates)}
        cols.append([f.values[fpos[d]] for d in shared])
    values = np.array(cols, dtype=float).T.reshape(len(shared), len(factors))
    return FactorMatrix(tuple(shared), tuple(names), values, target)


def lag_features(matrix: FactorMatrix) -> FactorMatrix:
    """Shift every factor back one trading day so row t predicts close(t+1).

    The first row is dropped; the target stays on its own date.
    """
    if matrix.n_samples < 2:
        raise DataError("need at least 2 rows to lag")
    return FactorMatrix(
        matrix.dates[1:],
        matrix.factor_names,
        matrix.values[:-1].copy(),
        matrix.target[1:].copy(),
    )
