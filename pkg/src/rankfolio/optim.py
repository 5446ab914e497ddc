"""Shared numerical solvers: simplex projection, log-optimal weights, L1-median."""

from __future__ import annotations

import warnings

import numpy as np

# Floor applied to portfolio relatives inside the log objective so a stray
# non-positive entry cannot produce -inf mid line search.
RELATIVE_FLOOR = 1e-12


def project_to_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection of ``v`` onto the probability simplex.

    Sort-and-threshold algorithm; exact up to float roundoff for any finite
    input, including points already on the simplex (returned unchanged).
    """
    v = np.asarray(v, dtype=np.float64)
    n = v.size
    u = np.sort(v)[::-1]
    css = np.cumsum(u)
    idx = np.arange(1, n + 1)
    rho = np.nonzero(u * idx > (css - 1.0))[0][-1]
    theta = (css[rho] - 1.0) / (rho + 1.0)
    return np.maximum(v - theta, 0.0)


def _log_wealth(relatives: np.ndarray, w: np.ndarray) -> float:
    port = relatives @ w
    return float(np.log(np.maximum(port, RELATIVE_FLOOR)).sum())


def _ascend(relatives: np.ndarray, w: np.ndarray, tol: float,
            max_iter: int) -> tuple[np.ndarray, float]:
    """Projected gradient ascent with backtracking from start point ``w``."""
    fw = _log_wealth(relatives, w)
    step = 1.0
    for _ in range(max_iter):
        port = np.maximum(relatives @ w, RELATIVE_FLOOR)
        grad = (relatives / port[:, None]).sum(axis=0)
        # backtrack until the projected step improves the objective
        improved = False
        while step >= 1e-18:
            cand = project_to_simplex(w + step * grad)
            fc = _log_wealth(relatives, cand)
            if fc > fw:
                improved = True
                break
            step *= 0.5
        if not improved:
            break
        moved = float(np.linalg.norm(cand - w))
        w, fw = cand, fc
        step *= 2.0
        if moved < tol:
            break
    return w, fw


def log_optimal_portfolio(relatives: np.ndarray, tol: float = 1e-10,
                          max_iter: int = 10_000) -> np.ndarray:
    """Weights maximizing sum(log(relatives @ w)) over the simplex.

    ``relatives`` is an m x n matrix of per-day price relatives (gross
    returns, strictly positive under valid data). Deterministic: projected
    gradient ascent from the uniform start, stopping when the projected step
    norm falls below ``tol`` or after ``max_iter`` iterations. Single-asset
    corners are checked explicitly so the result never trails a pure asset.
    """
    relatives = np.asarray(relatives, dtype=np.float64)
    if relatives.ndim != 2:
        raise ValueError("relatives must be a 2-d matrix")
    m, n = relatives.shape
    if m < 1:
        raise ValueError("need at least one row of relatives")
    if n == 1:
        return np.ones(1)

    w, fw = _ascend(relatives, np.full(n, 1.0 / n), tol, max_iter)

    corner_f = np.log(np.maximum(relatives, RELATIVE_FLOOR)).sum(axis=0)
    best = int(np.argmax(corner_f))
    if corner_f[best] > fw:
        # the ascent stalled short of a dominating corner; restart there
        corner = np.zeros(n)
        corner[best] = 1.0
        w2, fw2 = _ascend(relatives, corner, tol, max_iter)
        if fw2 > fw:
            w, fw = w2, fw2

    if (np.maximum(relatives @ w, RELATIVE_FLOOR) <= RELATIVE_FLOOR).any():
        warnings.warn(
            "log-optimal solution sits on the relative floor; "
            "input rows contain non-positive entries",
            RuntimeWarning,
            stacklevel=2,
        )
    return w


def geometric_median(points: np.ndarray, tol: float = 1e-9,
                     max_iter: int = 200) -> np.ndarray:
    """L1-median (spatial median) of the rows of ``points``.

    Modified Weiszfeld iteration started at the centroid, with the standard
    correction when an iterate coincides with a data point. For two points
    the centroid start resolves the degenerate segment to its midpoint.
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[0] < 1:
        raise ValueError("points must be a non-empty 2-d array")
    y = pts.mean(axis=0)
    for _ in range(max_iter):
        diff = pts - y
        dist = np.linalg.norm(diff, axis=1)
        coincident = dist < 1e-12
        if coincident.any():
            others = ~coincident
            if not others.any():
                return y
            inv = 1.0 / dist[others]
            t_point = (pts[others] * inv[:, None]).sum(axis=0) / inv.sum()
            r_vec = (diff[others] * inv[:, None]).sum(axis=0)
            r = float(np.linalg.norm(r_vec))
            eta = float(coincident.sum())
            if r <= eta:
                return y
            y_next = max(0.0, 1.0 - eta / r) * t_point + min(1.0, eta / r) * y
        else:
            inv = 1.0 / dist
            y_next = (pts * inv[:, None]).sum(axis=0) / inv.sum()
        if float(np.linalg.norm(y_next - y)) < tol:
            return y_next
        y = y_next
    return y
