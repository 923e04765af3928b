"""Scalar root and maximum search on bounded intervals."""

import math

import numpy as np

from .params import NumericError

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def bisect_increasing(g, lo, hi, max_iter=200, xtol=1e-12):
    """Root of a nondecreasing g with g(lo) <= 0 <= g(hi).

    Iterates until the bracket is below ``xtol`` and no longer shrinks in floating
    point, so the returned point is as close to the root as doubles allow.
    """
    g_lo, g_hi = g(lo), g(hi)
    if g_lo > 0 or g_hi < 0:
        raise NumericError(f"root not bracketed: g({lo})={g_lo}, g({hi})={g_hi}")
    if g_lo == 0:
        return lo
    if g_hi == 0:
        return hi
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        g_mid = g(mid)
        if g_mid == 0:
            return mid
        if g_mid < 0:
            lo = mid
        else:
            hi = mid
    if hi - lo > xtol:
        raise NumericError(f"bisection stopped with bracket width {hi - lo}")
    return 0.5 * (lo + hi)


def golden_max(fn, lo, hi, tol=1e-6, max_iter=200):
    """Maximize a unimodal fn on [lo, hi]; returns (x, fn(x))."""
    a, b = lo, hi
    x1 = b - _INV_PHI * (b - a)
    x2 = a + _INV_PHI * (b - a)
    f1, f2 = fn(x1), fn(x2)
    for _ in range(max_iter):
        if b - a <= tol:
            break
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + _INV_PHI * (b - a)
            f2 = fn(x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - _INV_PHI * (b - a)
            f1 = fn(x1)
    return (x1, f1) if f1 >= f2 else (x2, f2)


def grid_then_golden(fn, lo, hi, n_grid, tol=1e-6):
    """Grid search followed by golden refinement around the best grid cell.

    Guards against local maxima when unimodality is not guaranteed.  Returns the
    best (x, fn(x)) seen, endpoints included.
    """
    xs = np.linspace(lo, hi, n_grid)
    vals = np.array([fn(x) for x in xs])
    i = int(np.argmax(vals))
    best_x, best_v = float(xs[i]), float(vals[i])
    left, right = xs[max(i - 1, 0)], xs[min(i + 1, n_grid - 1)]
    if right > left:
        x, v = golden_max(fn, float(left), float(right), tol=tol)
        if v > best_v:
            best_x, best_v = x, v
    return best_x, best_v
