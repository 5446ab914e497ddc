"""Optional remote fetcher for daily close prices.

Talks to a CoinGecko-compatible JSON API (``/coins/{id}/market_chart/range``
returning ``{"prices": [[ms_timestamp, price], ...]}``) and writes one CSV
per asset in the load_csv format. Nothing else in the package depends on
this module or on the network.
"""

from __future__ import annotations

import logging
import os
import time
from datetime import date, datetime, timezone
from pathlib import Path

import requests

from .data import PriceMatrix, write_csv

DEFAULT_BASE_URL = "https://api.coingecko.com/api/v3"
BASE_URL_ENV = "RANKFOLIO_API_BASE"

log = logging.getLogger(__name__)


class Fetcher:
    """Sequential price-history downloader with rate limiting and retries.

    ``delay`` is the minimum spacing in seconds between any two HTTP requests
    issued through one Fetcher (public APIs rate-limit aggressively). Retries
    cover transport errors and 5xx responses with doubling backoff; a 404 is
    treated as an unknown asset and never retried.
    """

    def __init__(self, base_url: str | None = None, delay: float = 1.2,
                 retries: int = 3, backoff: float = 1.0, timeout: float = 30.0):
        if retries < 1:
            raise ValueError("retries must be >= 1")
        if delay < 0 or backoff < 0:
            raise ValueError("delay and backoff must be non-negative")
        self.base_url = (base_url or os.environ.get(BASE_URL_ENV)
                         or DEFAULT_BASE_URL).rstrip("/")
        self.delay = delay
        self.retries = retries
        self.backoff = backoff
        self.timeout = timeout
        self._last_request = 0.0

    def _wait_turn(self):
        now = time.monotonic()
        remaining = self.delay - (now - self._last_request)
        if self._last_request > 0 and remaining > 0:
            time.sleep(remaining)

    def _get_json(self, url: str, params: dict, what: str) -> dict:
        last_error = ""
        for attempt in range(self.retries):
            if attempt > 0:
                log.warning("retrying %s (attempt %d): %s",
                            what, attempt + 1, last_error)
                time.sleep(self.backoff * 2 ** (attempt - 1))
            self._wait_turn()
            try:
                response = requests.get(url, params=params, timeout=self.timeout)
            except requests.RequestException as exc:
                self._last_request = time.monotonic()
                last_error = str(exc)
                continue
            self._last_request = time.monotonic()
            if response.status_code == 404:
                raise ValueError(f"unknown asset: {what}")
            if response.ok:
                return response.json()
            last_error = f"HTTP {response.status_code}"
            if response.status_code < 500 and response.status_code != 429:
                break
        raise RuntimeError(f"fetch of {what} failed after retries: {last_error}")

    def fetch_history(self, asset_id: str, start: date, end: date,
                      out_path: str | Path, symbol: str | None = None) -> Path:
        """Download [start, end] daily closes for one asset to a CSV.

        The CSV column is named ``symbol`` (default: the asset id). When the
        payload holds several points for one UTC day the last wins. Writing
        is atomic enough for reruns: the file is fully rewritten each time,
        and nothing is written on failure.
        """
        if end < start:
            raise ValueError("end date before start date")
        url = f"{self.base_url}/coins/{asset_id}/market_chart/range"
        params = {
            "vs_currency": "usd",
            "from": int(datetime(start.year, start.month, start.day,
                                 tzinfo=timezone.utc).timestamp()),
            "to": int(datetime(end.year, end.month, end.day, 23, 59, 59,
                               tzinfo=timezone.utc).timestamp()),
        }
        payload = self._get_json(url, params, asset_id)
        points = payload.get("prices") or []
        if not points:
            raise ValueError(f"no price data returned for {asset_id}")
        by_day: dict[date, float] = {}
        for stamp_ms, price in points:
            day = datetime.fromtimestamp(stamp_ms / 1000.0,
                                         tz=timezone.utc).date()
            by_day[day] = float(price)
        days = sorted(by_day)
        matrix = PriceMatrix(
            dates=tuple(days),
            assets=(symbol or asset_id,),
            prices=[[by_day[d]] for d in days],
        )
        out_path = Path(out_path)
        write_csv(matrix, out_path)
        log.info("wrote %d days of %s to %s", len(days), asset_id, out_path)
        return out_path


def fetch_history(asset_id: str, start: date, end: date,
                  out_path: str | Path, **fetcher_kwargs) -> Path:
    """One-shot convenience wrapper around Fetcher.fetch_history."""
    return Fetcher(**fetcher_kwargs).fetch_history(asset_id, start, end, out_path)
