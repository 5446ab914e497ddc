"""Price matrix loading, validation, and return extraction."""

from datetime import date

import numpy as np
import pytest

from rankfolio.data import (PriceMatrix, all_returns, load_csv, returns_at,
                            summary_stats, write_csv)

from conftest import make_prices


def test_roundtrip(tmp_path, prices_mid):
    path = tmp_path / "p.csv"
    write_csv(prices_mid, path)
    loaded = load_csv(path)
    assert loaded.assets == prices_mid.assets
    assert loaded.dates == prices_mid.dates
    # 12 significant digits survive a write/read cycle for these magnitudes
    np.testing.assert_allclose(loaded.prices, prices_mid.prices, rtol=1e-11)


def test_load_sorts_rows_by_date(tmp_path):
    path = tmp_path / "p.csv"
    path.write_text(
        "date,X,Y\n"
        "2024-01-03,3,30\n"
        "2024-01-01,1,10\n"
        "2024-01-02,2,20\n"
    )
    pm = load_csv(path)
    assert [d.day for d in pm.dates] == [1, 2, 3]
    np.testing.assert_array_equal(pm.prices[:, 0], [1.0, 2.0, 3.0])


@pytest.mark.parametrize("cell,fragment", [
    ("abc", "bad number"),
    ("nan", "non-finite"),
    ("inf", "non-finite"),
    ("-3", "non-positive"),
    ("0", "non-positive"),
])
def test_load_rejects_bad_cells(tmp_path, cell, fragment):
    path = tmp_path / "p.csv"
    path.write_text(f"date,X,Y\n2024-01-01,5,{cell}\n")
    with pytest.raises(ValueError, match=fragment):
        load_csv(path)


def test_load_reports_line_and_column(tmp_path):
    path = tmp_path / "p.csv"
    path.write_text("date,X,Y\n2024-01-01,5,6\n2024-01-02,5,oops\n")
    with pytest.raises(ValueError, match=r"line 3.*column Y"):
        load_csv(path)


def test_load_rejects_duplicate_dates(tmp_path):
    path = tmp_path / "p.csv"
    path.write_text("date,X\n2024-01-01,5\n2024-01-01,6\n")
    with pytest.raises(ValueError, match="duplicate"):
        load_csv(path)


def test_load_rejects_duplicate_assets(tmp_path):
    path = tmp_path / "p.csv"
    path.write_text("date,X,X\n2024-01-01,5,6\n")
    with pytest.raises(ValueError, match="duplicate"):
        load_csv(path)


def test_load_rejects_ragged_row(tmp_path):
    path = tmp_path / "p.csv"
    path.write_text("date,X,Y\n2024-01-01,5\n")
    with pytest.raises(ValueError, match="line 2"):
        load_csv(path)


def test_load_rejects_empty(tmp_path):
    path = tmp_path / "p.csv"
    path.write_text("")
    with pytest.raises(ValueError):
        load_csv(path)
    path.write_text("date,X\n")
    with pytest.raises(ValueError):
        load_csv(path)


def test_matrix_validation_rejects_unsorted_dates():
    with pytest.raises(ValueError):
        PriceMatrix(
            dates=(date(2024, 1, 2), date(2024, 1, 1)),
            assets=("X",),
            prices=np.array([[1.0], [2.0]]),
        )


def test_prices_are_read_only(prices_small):
    with pytest.raises(ValueError):
        prices_small.prices[0, 0] = 5.0


def test_returns_at_contract():
    prices = np.array([[100.0, 50.0], [110.0, 45.0], [99.0, 54.0]])
    pm = PriceMatrix(
        dates=(date(2024, 1, 1), date(2024, 1, 2), date(2024, 1, 3)),
        assets=("X", "Y"),
        prices=prices,
    )
    # day t return compares price rows t and t-1 (1-based day indexing)
    np.testing.assert_allclose(returns_at(pm, 1), [0.10, -0.10])
    np.testing.assert_allclose(returns_at(pm, 2), [-0.10, 0.20])
    for bad in (0, 3, -1):
        with pytest.raises(ValueError):
            returns_at(pm, bad)


def test_all_returns_matches_returns_at(prices_small):
    rets = all_returns(prices_small)
    assert rets.shape == (prices_small.num_days - 1, prices_small.num_assets)
    for t in range(1, prices_small.num_days):
        np.testing.assert_array_equal(rets[t - 1], returns_at(prices_small, t))


def test_summary_stats_against_numpy(prices_small):
    stats = summary_stats(prices_small)
    rets = all_returns(prices_small)
    for j, sym in enumerate(prices_small.assets):
        col = rets[:, j]
        s = stats[sym]
        assert s["count"] == col.size
        assert s["mean"] == pytest.approx(col.mean())
        assert s["std"] == pytest.approx(col.std(ddof=1))
        assert s["min"] == col.min()
        assert s["max"] == col.max()
        assert s["50%"] == pytest.approx(np.percentile(col, 50))


def test_day_of(prices_small):
    assert prices_small.day_of(prices_small.dates[0]) == 1
    assert prices_small.day_of(prices_small.dates[-1]) == prices_small.num_days
    with pytest.raises(ValueError):
        prices_small.day_of(date(1999, 1, 1))


def test_make_prices_deterministic():
    a = make_prices(30, 3, seed=5)
    b = make_prices(30, 3, seed=5)
    np.testing.assert_array_equal(a.prices, b.prices)
