"""Shared fixtures: synthetic price matrices with known seeds."""

from datetime import date, timedelta

import numpy as np
import pytest

from rankfolio.data import PriceMatrix


def make_prices(num_days: int, num_assets: int, seed: int = 0,
                drift: float = 0.0005, vol: float = 0.02) -> PriceMatrix:
    """Geometric random walk prices, strictly positive, seeded."""
    rng = np.random.default_rng(seed)
    rets = rng.normal(drift, vol, size=(num_days - 1, num_assets))
    rets = np.clip(rets, -0.5, 0.5)
    prices = np.vstack([np.ones(num_assets), np.cumprod(1.0 + rets, axis=0)])
    prices *= 100.0
    start = date(2023, 1, 1)
    dates = tuple(start + timedelta(days=i) for i in range(num_days))
    assets = tuple(f"A{i:02d}" for i in range(num_assets))
    return PriceMatrix(dates=dates, assets=assets, prices=prices)


@pytest.fixture
def prices_small() -> PriceMatrix:
    return make_prices(60, 3, seed=7)


@pytest.fixture
def prices_mid() -> PriceMatrix:
    return make_prices(160, 5, seed=11)


@pytest.fixture
def csv_small(tmp_path, prices_small):
    from rankfolio.data import write_csv
    path = tmp_path / "prices.csv"
    write_csv(prices_small, path)
    return path
