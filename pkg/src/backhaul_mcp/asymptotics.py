"""Low- and high-SNR characterizations and the cut-set bound.

Low-SNR behaviour is summarized by the pair (Eb/N0_min, S0): the rate is roughly
``S0 / (10 log10 2) * (Eb/N0|dB - Eb/N0_min|dB)`` bits.  Eb/N0 at SNR P and rate R
bits is P / R (unit noise, complex channel use).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Optional

import numpy as np

from .oblivious import oblivious_rate
from .params import Channel, Model, Protocol, SystemParams, ValidationError
from .rate_functions import functional_for, upper_functional
from .search import bisect_increasing

LN2 = math.log(2.0)
DB_PER_DOUBLING = 10.0 * math.log10(2.0)


def db(x: float) -> float:
    return 10.0 * math.log10(x)


def from_db(x_db: float) -> float:
    return 10.0 ** (x_db / 10.0)


@dataclass(frozen=True)
class LowSnrChar:
    eb_n0_min: float
    s0: float

    @property
    def eb_n0_min_db(self) -> float:
        return db(self.eb_n0_min)


@dataclass(frozen=True)
class DecLowSnrChar:
    base: LowSnrChar
    r_m: float
    r_tilde_m: float
    lambda_o: float


@dataclass(frozen=True)
class HighSnrChar:
    s_inf: float
    l_inf: float


def _inv_k(params):
    k = params.k_eff
    return 0.0 if math.isinf(k) else 1.0 / k


def lowsnr_unlimited(params: SystemParams) -> LowSnrChar:
    """(Eb/N0_min, S0) of the unlimited-backhaul per-cell sum-rate."""
    a2 = params.alpha**2
    gain = params.array_gain
    if params.channel is Channel.GAUSSIAN:
        if params.model is Model.WYNER:
            return LowSnrChar(LN2 / gain, 2.0 * gain**2 / (1.0 + 12.0 * a2 + 6.0 * a2 * a2))
        return LowSnrChar(LN2 / gain, 2.0 * gain**2 / (1.0 + 4.0 * a2 + a2 * a2))
    return LowSnrChar(LN2 / gain, 2.0 / (1.0 + _inv_k(params)))


def lowsnr_oblivious(base: LowSnrChar, c: float) -> LowSnrChar:
    """Low-SNR pair with oblivious cell-sites and backhaul ``c`` bits.

    Raises ValidationError for c = 0, where no finite energy per bit suffices.
    """
    if c < 0 or math.isnan(c):
        raise ValidationError(f"backhaul capacity must be >= 0, got {c}")
    if c == 0:
        raise ValidationError("Eb/N0_min is infinite with zero backhaul capacity")
    if math.isinf(c):
        return base
    q = 2.0 ** -c
    frac = -math.expm1(-c * LN2)
    return LowSnrChar(base.eb_n0_min / frac, base.s0 / (1.0 + base.s0 * q / frac))


def lowsnr_local_decode(params: SystemParams) -> LowSnrChar:
    """Low-SNR pair of the local decoding rate at beta = 0."""
    a2 = params.alpha**2
    # E(|a|^2/K)^2 = 1 + 1/K adds 1/K to the curvature under Rayleigh fading
    extra = 0.0 if params.channel is Channel.GAUSSIAN else _inv_k(params)
    spread = 4.0 * a2 if params.model is Model.WYNER else 2.0 * a2
    return LowSnrChar(LN2, 2.0 / (1.0 + spread + extra))


def solve_r_tilde_m(params: SystemParams) -> float:
    """Root of 2^-r (1 + r ln 2) = rhs; rhs is the interference share of the array gain.

    Wyner: 2a^2 / (1 + 2a^2).  Soft handoff: a^2 / (1 + a^2).  Returns inf at
    alpha = 0.
    """
    if params.alpha == 0.0:
        return math.inf
    gain = params.array_gain
    rhs = (gain - 1.0) / gain

    # decreasing in r, from 1 at r = 0 towards 0
    def g(r):
        return rhs - 2.0 ** -r * (1.0 + r * LN2)

    hi = 1.0
    while g(hi) < 0:
        hi *= 2.0
    return bisect_increasing(g, 0.0, hi)


def _combine(lam, d, obl):
    if lam >= 1.0:
        return d
    if lam <= 0.0:
        return obl
    inv_e = lam / d.eb_n0_min + (1.0 - lam) / obl.eb_n0_min
    e = 1.0 / inv_e
    denom = lam / (d.s0 * d.eb_n0_min**2) + (1.0 - lam) / (obl.s0 * obl.eb_n0_min**2)
    return LowSnrChar(e, e**-2 / denom)


def lowsnr_dec(params: SystemParams) -> DecLowSnrChar:
    """Low-SNR pair of time-sharing between local decoding and oblivious processing."""
    c = params.c_backhaul
    r_tilde = solve_r_tilde_m(params)
    r_m = max(c, r_tilde)
    d = lowsnr_local_decode(params)
    if math.isinf(r_m):
        return DecLowSnrChar(d, r_m, r_tilde, 1.0)
    lam = 1.0 - c / r_m
    obl = lowsnr_oblivious(lowsnr_unlimited(params), r_m)
    return DecLowSnrChar(_combine(lam, d, obl), r_m, r_tilde, lam)


def affine_lowsnr_curve(char: LowSnrChar, eb_n0_db_grid: Iterable[float]) -> np.ndarray:
    """Affine spectral efficiency at each Eb/N0 (dB), clamped at zero."""
    grid = np.asarray(list(eb_n0_db_grid), dtype=float)
    rate = char.s0 / DB_PER_DOUBLING * (grid - char.eb_n0_min_db)
    return np.maximum(rate, 0.0)


def exact_lowsnr_curve(rate_fn: Callable[[float], float], p_grid: Iterable[float]):
    """Parametric (Eb/N0 dB, R) pairs traced by rate_fn over ``p_grid``.

    Points with zero rate have no finite Eb/N0 and are dropped.
    """
    out = []
    for p in p_grid:
        rate = rate_fn(float(p))
        if rate > 0.0:
            out.append((db(p / rate), rate))
    return out


def highsnr_params(params: SystemParams, p_probe_db: float = 80.0) -> HighSnrChar:
    """S_inf = 1 and L_inf measured as log2 P - R(P) at a very high P."""
    p = from_db(p_probe_db)
    rate = functional_for(params.with_(p=p)).unlimited
    return HighSnrChar(1.0, math.log2(p) - rate)


@dataclass(frozen=True)
class ScalingRow:
    p_db: float
    c_bits: float
    unlimited: float
    oblivious: float

    @property
    def gap(self) -> float:
        return self.unlimited - self.oblivious


def _default_theta(p):
    return math.log2(math.log2(p))


def highsnr_scaling_check(params: SystemParams, p_grid_db: Iterable[float],
                          theta: Optional[Callable[[float], float]] = None,
                          s_inf: Optional[float] = None,
                          l_inf: Optional[float] = None) -> list[ScalingRow]:
    """Rates with backhaul scaled as C(P) = S_inf (log2 P - L_inf) + theta(P).

    S_inf and L_inf default to :func:`highsnr_params`; theta defaults to
    log2 log2 P.
    """
    theta = theta or _default_theta
    if s_inf is None or l_inf is None:
        hs = highsnr_params(params)
        s_inf = hs.s_inf if s_inf is None else s_inf
        l_inf = hs.l_inf if l_inf is None else l_inf
    rows = []
    for p_db in p_grid_db:
        p = from_db(p_db)
        c = max(s_inf * (math.log2(p) - l_inf) + theta(p), 0.0)
        q = params.with_(p=p, c_backhaul=c)
        rows.append(ScalingRow(p_db, c, functional_for(q).unlimited, oblivious_rate(q).rate))
    return rows


def cutset_bound_flagged(params: SystemParams) -> tuple[float, bool]:
    """min{C, R_unlimited} and whether R_unlimited was replaced by an upper bound.

    Finite-K fading has no closed-form unlimited rate except SH TDMA at alpha = 1;
    there the deterministic upper bound of :func:`upper_functional` is used.
    """
    c = params.c_backhaul
    exact = (params.channel is Channel.GAUSSIAN or params.large_k
             or (params.model is Model.SOFT_HANDOFF and params.protocol is Protocol.TDMA
                 and params.alpha == 1.0))
    if exact:
        return min(c, functional_for(params).unlimited), False
    return min(c, upper_functional(params).unlimited), True


def cutset_bound(params: SystemParams) -> float:
    return cutset_bound_flagged(params)[0]
