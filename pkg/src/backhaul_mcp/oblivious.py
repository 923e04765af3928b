"""Achievable rates with oblivious (compress-and-forward) cell-sites.

The infinite-N rate is F(r*) where r* solves F(r*) = C - r*.  Closed forms exist
for the soft-handoff Gaussian model and for the large-K fading regimes; the
finite-N rate is obtained by brute-force subset minimization.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
from scipy import optimize

from .channel_models import build_matrix
from .params import (
    Channel,
    Model,
    MonteCarloCfg,
    StructureError,
    SystemParams,
    UnsupportedCase,
    ValidationError,
    power_fraction,
)
from .rate_functions import (
    RateFunctional,
    f_sh_gaussian,
    functional_for,
    r_sh_tdma_rayleigh,
    FunctionalKind,
)
from .search import bisect_increasing, golden_max

MAX_ENUM_CELLS = 16


@dataclass(frozen=True)
class RateResult:
    rate: float
    r_star: float
    residual: float = 0.0
    uncertainty: float = 0.0


@dataclass(frozen=True)
class RegionResult:
    sum_rate: float
    minimizing_subset: frozenset
    r_used: float


def _slope(f, r, h=1e-4):
    lo = max(r - h, 0.0)
    return (f(r + h) - f(lo)) / (r + h - lo)


def solve_fixed_point(f: RateFunctional, c: Union[SystemParams, float],
                      method: str = "bisect") -> RateResult:
    """Solve F(r) = C - r on [0, C].

    G(r) = F(r) + r - C is strictly increasing with G(0) = -C and G(C) = F(C) >= 0,
    so the root is unique and bisection always converges.  ``method="brent"`` is a
    faster bracketing alternative for inner loops.  For a Monte Carlo F the root
    of the sample mean is returned and its standard error is mapped through the
    local slope.
    """
    if isinstance(c, SystemParams):
        c = c.c_backhaul
    if c < 0:
        raise ValidationError(f"backhaul capacity must be >= 0, got {c}")
    if c == 0:
        return RateResult(0.0, 0.0)
    g = lambda x: f(x) + x - c
    if method == "bisect":
        r = bisect_increasing(g, 0.0, float(c))
    elif method == "brent":
        r = _brent_root(g, float(c))
    else:
        raise ValidationError(f"unknown root method {method!r}")
    rate = f(r)
    uncertainty = 0.0
    if f.stochastic:
        uncertainty = f.std_err(r) / (1.0 + max(_slope(f, r), 0.0))
    return RateResult(rate, r, abs(rate - (c - r)), uncertainty)


def _brent_root(g, c):
    g_c = g(c)
    if g_c <= 0.0:
        return c
    return optimize.brentq(g, 0.0, c, xtol=1e-14, maxiter=200)


def rate_single_user(p: float, c: float) -> float:
    """log2(1 + p (1 - 2^-c) / (1 + p 2^-c)): one user, one agent, Gaussian."""
    if p < 0 or c < 0:
        raise ValidationError("p and c must be nonnegative")
    if math.isinf(c):
        return math.log2(1.0 + p)
    q = 2.0 ** -c
    return math.log2(1.0 + p * power_fraction(c) / (1.0 + p * q))


def _result(rate, c, f=None):
    # closed forms can round a hair outside [0, C]
    rate = min(max(rate, 0.0), c)
    r_star = c - rate
    residual = 0.0 if f is None else abs(f(r_star) - rate)
    return RateResult(rate, r_star, residual)


def rate_sh_gaussian_closed(params: SystemParams) -> RateResult:
    """Soft-handoff Gaussian oblivious rate from the '+' root of the fixed-point quadratic."""
    c, p, a2 = params.c_backhaul, params.p, params.alpha**2
    q = 2.0 ** -c
    num = 1.0 + (1.0 + a2) * p + 2.0 * a2 * q * p * p + math.sqrt(
        1.0 + 2.0 * (1.0 + a2) * p + ((1.0 - a2) ** 2 + 4.0 * a2 * q) * p * p)
    den = 2.0 * (1.0 + q * p) * (1.0 + a2 * q * p)
    return _result(math.log2(num / den), c, lambda r: f_sh_gaussian(r, params))


def rate_wyner_fading_largek(params: SystemParams) -> RateResult:
    """Wyner Rayleigh WB oblivious rate for K -> inf; an upper bound for finite K."""
    return _result(rate_single_user(params.array_gain * params.p, params.c_backhaul),
                   params.c_backhaul)


def rate_sh_fading_upper(params: SystemParams) -> RateResult:
    """Upper bound on the SH Rayleigh WB oblivious rate for K users per cell."""
    c, p, a2 = params.c_backhaul, params.p, params.alpha**2
    k = params.k_eff
    inv_k = 0.0 if math.isinf(k) else 1.0 / k
    q = 2.0 ** -c
    s = 1.0 + p * (1.0 + a2)
    num = s + 2.0 * p * p * a2 * q * inv_k + math.sqrt(
        max(s * s - 4.0 * p * p * a2 * (1.0 - q) * inv_k, 0.0))
    den = 2.0 * (1.0 + p * (1.0 + a2) * q + p * p * a2 * q * q * inv_k)
    return _result(math.log2(num / den), c)


def rate_sh_tdma_rayleigh_limited(params: SystemParams) -> RateResult:
    """SH, Rayleigh, TDMA, alpha = 1: solved numerically on the exact two-tap ISI rate."""
    if params.model is not Model.SOFT_HANDOFF or params.alpha != 1.0:
        raise UnsupportedCase("the exact TDMA Rayleigh rate is known only for SH at alpha = 1")
    f = RateFunctional(FunctionalKind.SH_TDMA_RAYLEIGH_EXACT, r_sh_tdma_rayleigh, params.p)
    return solve_fixed_point(f, params.c_backhaul)


def oblivious_rate(params: SystemParams, mc: Optional[MonteCarloCfg] = None,
                   method: str = "auto") -> RateResult:
    """Infinite-N oblivious rate, through a closed form whenever one exists."""
    if method == "auto":
        if params.channel is Channel.GAUSSIAN and params.model is Model.SOFT_HANDOFF:
            return rate_sh_gaussian_closed(params)
        if params.fading and params.large_k:
            if params.model is Model.WYNER:
                return rate_wyner_fading_largek(params)
            return rate_sh_fading_upper(params)
    return solve_fixed_point(functional_for(params, mc, method), params.c_backhaul)


# -- finite N ------------------------------------------------------------------

def is_consecutive(subset, n_cells: int) -> bool:
    """True if ``subset`` is a run of consecutive indices modulo n_cells."""
    s = set(subset)
    if len(s) in (0, n_cells):
        return True
    starts = sum(1 for j in s if (j - 1) % n_cells not in s)
    return starts == 1


def _normalized_gram(params, n_cells):
    if params.channel is not Channel.GAUSSIAN:
        raise UnsupportedCase("finite-N region evaluation is implemented for Gaussian channels")
    k = 1 if params.large_k else int(params.k_eff)
    h = build_matrix(params.with_(k_users=k), n_cells, seed=0)
    return h.gram().real / k


def _logdet_batch(mats):
    sign, logdet = np.linalg.slogdet(mats)
    return logdet / math.log(2.0)


def subset_values(n_cells: int, params: SystemParams, r: float, subsets: str = "all"):
    """Per-cell objective |S|(C-r) + log2 det(I + P(1-2^-r) G[S^c, S^c]) for each S.

    Returns (list of frozensets, array of values / N).  ``subsets="consecutive"``
    enumerates only runs {0, ..., s-1}; for the Gaussian circulant the value of a
    run depends on its length alone.
    """
    if n_cells > MAX_ENUM_CELLS and subsets == "all":
        raise StructureError(f"full subset enumeration limited to {MAX_ENUM_CELLS} cells")
    c = params.c_backhaul
    if not 0.0 <= r <= c:
        raise ValidationError(f"r must lie in [0, C], got {r}")
    gram = _normalized_gram(params, n_cells)
    p_eff = params.p * power_fraction(r)
    cells = range(n_cells)
    out_sets, out_vals = [], []
    for size in range(n_cells + 1):
        if subsets == "all":
            group = [frozenset(s) for s in itertools.combinations(cells, size)]
        elif subsets == "consecutive":
            group = [frozenset(range(size))]
        else:
            raise ValidationError(f"unknown subset mode {subsets!r}")
        n_keep = n_cells - size
        if n_keep == 0:
            logdets = np.zeros(len(group))
        else:
            idx = np.array([[j for j in cells if j not in s] for s in group])
            sub = gram[idx[:, :, None], idx[:, None, :]]
            logdets = _logdet_batch(np.eye(n_keep) + p_eff * sub)
        out_sets.extend(group)
        out_vals.append((size * (c - r) + logdets) / n_cells)
    return out_sets, np.concatenate(out_vals)


def region_finite_n(n_cells: int, params: SystemParams, r: float, subsets: str = "all",
                    tie_tol: float = 1e-9) -> RegionResult:
    """Minimize the cut objective over subsets S at a fixed compression parameter r.

    Ties within ``tie_tol`` go to the smallest subset, then the lexicographically
    smallest sorted index tuple.
    """
    sets, vals = subset_values(n_cells, params, r, subsets)
    best = float(np.min(vals))
    tied = [s for s, v in zip(sets, vals) if v <= best + tie_tol]
    choice = min(tied, key=lambda s: (len(s), sorted(s)))
    return RegionResult(best, choice, r)


def rate_finite_n(n_cells: int, params: SystemParams, subsets: str = "auto") -> RateResult:
    """max over r in [0, C] of the finite-N region value (concave in r)."""
    c = params.c_backhaul
    if c == 0:
        return RateResult(0.0, 0.0)
    if subsets == "auto":
        subsets = "all" if n_cells <= MAX_ENUM_CELLS else "consecutive"
    r, val = golden_max(lambda x: region_finite_n(n_cells, params, x, subsets).sum_rate,
                        0.0, c, tol=1e-9)
    return RateResult(val, r)
