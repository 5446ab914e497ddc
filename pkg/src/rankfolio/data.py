"""Daily close-price matrices: loading, validation, returns, summary stats.

The on-disk format is a plain CSV with a ``date`` column (ISO-8601) followed
by one column per asset symbol. Prices must be strictly positive and finite
and every row must be complete; rows may arrive out of order and are sorted,
but duplicate dates are an error.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path

import numpy as np

# Prices are serialized with up to 12 significant digits, which round-trips
# any value that itself came from a 12-digit CSV.
PRICE_FORMAT = "%.12g"


@dataclass(frozen=True)
class PriceMatrix:
    """T dates by n assets of daily close prices.

    Row i of ``prices`` holds the closes for ``dates[i]``. Day indices used
    throughout the library are 1-based: day t corresponds to row t-1.
    """

    dates: tuple[date, ...]
    assets: tuple[str, ...]
    prices: np.ndarray = field(repr=False)

    def __post_init__(self):
        prices = np.asarray(self.prices, dtype=np.float64)
        dates = tuple(self.dates)
        assets = tuple(self.assets)
        if prices.ndim != 2:
            raise ValueError("prices must be a 2-d array")
        if len(dates) != prices.shape[0]:
            raise ValueError(
                f"got {len(dates)} dates for {prices.shape[0]} price rows"
            )
        if len(assets) != prices.shape[1]:
            raise ValueError(
                f"got {len(assets)} asset names for {prices.shape[1]} price columns"
            )
        if len(set(assets)) != len(assets):
            raise ValueError("duplicate asset names")
        for i in range(1, len(dates)):
            if dates[i] <= dates[i - 1]:
                raise ValueError(
                    f"dates not strictly increasing at {dates[i].isoformat()}"
                )
        if prices.size and not np.isfinite(prices).all():
            raise ValueError("prices contain non-finite values")
        if prices.size and (prices <= 0).any():
            raise ValueError("prices must be strictly positive")
        prices.flags.writeable = False
        object.__setattr__(self, "prices", prices)
        object.__setattr__(self, "dates", dates)
        object.__setattr__(self, "assets", assets)

    @property
    def num_days(self) -> int:
        return self.prices.shape[0]

    @property
    def num_assets(self) -> int:
        return self.prices.shape[1]

    def day_of(self, d: date) -> int:
        """1-based day index of calendar date ``d`` (exact match required)."""
        try:
            return self.dates.index(d) + 1
        except ValueError:
            raise ValueError(f"date {d.isoformat()} not in price matrix") from None


def load_csv(path: str | Path) -> PriceMatrix:
    """Read a price matrix from ``path``.

    Raises ValueError with the offending line number and column name for
    malformed headers, ragged rows, unparseable numbers, non-positive or
    non-finite prices, and duplicate dates. Rows are sorted by date.
    """
    path = Path(path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty file") from None
        header = [cell.strip() for cell in header]
        if not header or header[0] != "date":
            raise ValueError(f"{path}: line 1: first column must be 'date'")
        assets = header[1:]
        if not assets:
            raise ValueError(f"{path}: line 1: no asset columns")
        if len(set(assets)) != len(assets):
            raise ValueError(f"{path}: line 1: duplicate asset columns")

        rows: list[tuple[date, list[float]]] = []
        for lineno, cells in enumerate(reader, start=2):
            if not cells or (len(cells) == 1 and not cells[0].strip()):
                continue
            if len(cells) != len(header):
                raise ValueError(
                    f"{path}: line {lineno}: expected {len(header)} fields, got {len(cells)}"
                )
            try:
                day = date.fromisoformat(cells[0].strip())
            except ValueError:
                raise ValueError(
                    f"{path}: line {lineno}: bad date {cells[0]!r}"
                ) from None
            values = []
            for sym, cell in zip(assets, cells[1:]):
                try:
                    value = float(cell)
                except ValueError:
                    raise ValueError(
                        f"{path}: line {lineno}, column {sym}: bad number {cell!r}"
                    ) from None
                if not math.isfinite(value):
                    raise ValueError(
                        f"{path}: line {lineno}, column {sym}: non-finite price {cell!r}"
                    )
                if value <= 0:
                    raise ValueError(
                        f"{path}: line {lineno}, column {sym}: non-positive price {value}"
                    )
                values.append(value)
            rows.append((day, values))

    if not rows:
        raise ValueError(f"{path}: no data rows")
    rows.sort(key=lambda item: item[0])
    for (d1, _), (d2, _) in zip(rows, rows[1:]):
        if d1 == d2:
            raise ValueError(f"{path}: duplicate date {d1.isoformat()}")
    dates = tuple(r[0] for r in rows)
    prices = np.array([r[1] for r in rows], dtype=np.float64)
    return PriceMatrix(dates=dates, assets=tuple(assets), prices=prices)


def write_csv(matrix: PriceMatrix, path: str | Path) -> None:
    """Write ``matrix`` to ``path`` in the load_csv format (12 significant digits)."""
    path = Path(path)
    with open(path, "w", newline="") as fh:
        fh.write("date," + ",".join(matrix.assets) + "\n")
        for i, d in enumerate(matrix.dates):
            cells = [PRICE_FORMAT % p for p in matrix.prices[i]]
            fh.write(d.isoformat() + "," + ",".join(cells) + "\n")


def returns_at(matrix: PriceMatrix, t: int) -> np.ndarray:
    """Simple returns of day t, r_t[j] = p[t+1, j] / p[t, j] - 1 (1-based days).

    Valid for 1 <= t <= T-1; the result spans the move from day t to day t+1.
    """
    if not 1 <= t <= matrix.num_days - 1:
        raise ValueError(
            f"day index {t} out of range 1..{matrix.num_days - 1}"
        )
    return matrix.prices[t] / matrix.prices[t - 1] - 1.0


def all_returns(matrix: PriceMatrix) -> np.ndarray:
    """(T-1) x n matrix of daily simple returns; row i is returns_at(matrix, i+1)."""
    if matrix.num_days < 2:
        raise ValueError("need at least 2 days of prices")
    return matrix.prices[1:] / matrix.prices[:-1] - 1.0


def summary_stats(matrix: PriceMatrix) -> dict[str, dict[str, float]]:
    """Descriptive statistics of each asset's daily returns.

    Returns a mapping ``{symbol: {count, mean, std, min, 25%, 50%, 75%, max}}``.
    std is the sample standard deviation (divisor count-1); quantiles use
    linear interpolation. Requires at least two days of prices.
    """
    rets = all_returns(matrix)
    out: dict[str, dict[str, float]] = {}
    for j, sym in enumerate(matrix.assets):
        col = rets[:, j]
        count = col.size
        mean = float(col.mean())
        if count >= 2:
            std = float(math.sqrt(((col - mean) ** 2).sum() / (count - 1)))
        else:
            std = float("nan")
        q25, q50, q75 = (float(q) for q in np.percentile(col, [25.0, 50.0, 75.0]))
        out[sym] = {
            "count": float(count),
            "mean": mean,
            "std": std,
            "min": float(col.min()),
            "25%": q25,
            "50%": q50,
            "75%": q75,
            "max": float(col.max()),
        }
    return out
