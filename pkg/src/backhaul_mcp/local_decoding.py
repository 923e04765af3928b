"""Rates when cell-sites decode part of the traffic locally.

Each user splits power: a fraction ``1 - beta`` carries a message decoded at the
cell-site and sent over the backhaul as bits, the remaining ``beta P`` is
compressed and forwarded like in the oblivious scheme.  ``t`` denotes the local
rate at ``beta = 0`` clipped to the backhaul, ``min(C, R_d(0))``.
"""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .oblivious import solve_fixed_point
from .params import Channel, Model, MonteCarloCfg, SystemParams, ValidationError
from .rate_functions import FunctionalKind, RateFunctional, large_k_rate
from .search import golden_max, grid_then_golden

BETA_GRID = 101
R_SPAN = 40.0
R_GRID = 400


class DecodeStrategy(str, enum.Enum):
    AUTO = "auto"
    LOCAL_ONLY = "local_only"
    WITH_INTERFERERS = "with_interferers"
    ALL_THREE = "all_three"


@dataclass(frozen=True)
class LocalRateParams:
    strategy: DecodeStrategy = DecodeStrategy.AUTO
    mc: Optional[MonteCarloCfg] = None


@dataclass(frozen=True)
class DecodingSplit:
    """Outcome of a local-decoding optimization.

    ``beta`` is the power share left for compression (None for time-sharing,
    which mixes beta = 0 and beta = 1 modes).  ``lam`` is the fraction of time in
    pure local-decoding mode.  ``r_opt`` is the compression parameter used.
    """

    beta: Optional[float]
    t: float
    lam: float
    r_opt: float
    rate: float
    uncertainty: float = 0.0


def _pick(local, joint, strategy, model):
    if strategy is DecodeStrategy.ALL_THREE and model is not Model.WYNER:
        raise ValidationError("decoding three messages applies to the Wyner model only")
    if strategy is DecodeStrategy.LOCAL_ONLY:
        return local
    if strategy is DecodeStrategy.AUTO:
        return max(local, joint)
    return joint


def _check_beta(beta):
    if not 0.0 <= beta <= 1.0:
        raise ValidationError(f"beta must lie in [0, 1], got {beta}")


def r_d_wyner_gaussian(beta: float, params: SystemParams,
                       strategy: DecodeStrategy = DecodeStrategy.AUTO) -> float:
    """Local decoding rate for the Wyner model with Gaussian (or large-K) gains."""
    _check_beta(beta)
    p, a2 = params.p, params.alpha**2
    g = 1.0 + 2.0 * a2
    local = math.log2(1.0 + (1.0 - beta) * p / (1.0 + (beta + 2.0 * a2) * p))
    noise = 1.0 + beta * g * p
    joint = min(0.5 * math.log2(1.0 + (1.0 - beta) * 2.0 * a2 * p / noise),
                math.log2(1.0 + g * (1.0 - beta) * p / noise) / 3.0)
    return _pick(local, joint, DecodeStrategy(strategy), Model.WYNER)


def r_d_sh_gaussian(beta: float, params: SystemParams,
                    strategy: DecodeStrategy = DecodeStrategy.AUTO) -> float:
    """Local decoding rate for the soft-handoff model with Gaussian (or large-K) gains."""
    _check_beta(beta)
    p, a2 = params.p, params.alpha**2
    g = 1.0 + a2
    local = math.log2(1.0 + (1.0 - beta) * p / (1.0 + (beta + a2) * p))
    joint = 0.5 * math.log2(1.0 + (1.0 - beta) * g * p / (1.0 + beta * g * p))
    return _pick(local, joint, DecodeStrategy(strategy), Model.SOFT_HANDOFF)


@functools.lru_cache(maxsize=16)
def _gain_draws(model: Model, k_users: int, n_samples: int, seed: int):
    # |a|^2 / K for K iid unit-power Rayleigh gains is Gamma(K, 1/K)
    rng = np.random.default_rng(np.random.SeedSequence([seed, k_users, 7]))
    n_arrays = 3 if model is Model.WYNER else 2
    draws = rng.gamma(k_users, 1.0 / k_users, size=(n_arrays, n_samples))
    draws.setflags(write=False)
    return draws


def _mean_se(x):
    return float(np.mean(x)), float(np.std(x, ddof=1) / math.sqrt(x.size))


def r_d_fading(beta: float, params: SystemParams, cfg: Optional[MonteCarloCfg] = None,
               strategy: DecodeStrategy = DecodeStrategy.AUTO) -> tuple[float, float]:
    """Monte Carlo local decoding rate under Rayleigh fading.

    The expectations run over ``cfg.n_cells * cfg.n_trials`` draws of the
    normalized array gains.  Returns (rate, std_err of the selected term).
    """
    _check_beta(beta)
    cfg = cfg or MonteCarloCfg()
    if params.large_k:
        raise ValidationError("use the Gaussian expressions for infinitely many users")
    draws = _gain_draws(params.model, int(params.k_eff), cfg.n_cells * cfg.n_trials, cfg.seed)
    p, a2 = params.p, params.alpha**2
    own = draws[0]
    other = draws[1] + draws[2] if params.model is Model.WYNER else draws[1]
    total = own + a2 * other
    noise = 1.0 + beta * total * p
    local = _mean_se(np.log2(1.0 + (1.0 - beta) * own * p / (1.0 + (beta * own + a2 * other) * p)))
    if params.model is Model.WYNER:
        pair = _mean_se(0.5 * np.log2(1.0 + (1.0 - beta) * a2 * other * p / noise))
        triple = _mean_se(np.log2(1.0 + (1.0 - beta) * total * p / noise) / 3.0)
        joint = min(pair, triple)
    else:
        joint = _mean_se(0.5 * np.log2(1.0 + (1.0 - beta) * total * p / noise))
    return _pick(local, joint, DecodeStrategy(strategy), params.model)


def local_rate(beta: float, params: SystemParams, opts: Optional[LocalRateParams] = None) -> float:
    """R_d(beta) for any scenario; large-K fading uses the Gaussian expressions."""
    opts = opts or LocalRateParams()
    if params.channel is Channel.GAUSSIAN or params.large_k:
        fn = r_d_wyner_gaussian if params.model is Model.WYNER else r_d_sh_gaussian
        return fn(beta, params, opts.strategy)
    return r_d_fading(beta, params, opts.mc, opts.strategy)[0]


def _local_fn(params, r_d, opts):
    if r_d is not None:
        return r_d
    return functools.partial(local_rate, params=params, opts=opts)


def rate_sd(params: SystemParams, f: RateFunctional, c_eff: float,
            r_d: Optional[Callable[[float], float]] = None, beta: Optional[float] = None,
            opts: Optional[LocalRateParams] = None) -> DecodingSplit:
    """Separate decoding: best split of power and backhaul for capacity ``c_eff``.

    With ``beta`` given, that split is evaluated instead of optimized.
    """
    if c_eff < 0:
        raise ValidationError(f"backhaul capacity must be >= 0, got {c_eff}")
    r_d = _local_fn(params, r_d, opts)

    def evaluate(b, method="brent"):
        local = min(r_d(b), c_eff)
        if b == 0.0:
            return local, 0.0
        res = solve_fixed_point(f.scaled(b), c_eff - local, method)
        return res.rate + local, res.r_star

    if beta is None:
        beta, _ = grid_then_golden(lambda b: evaluate(b)[0], 0.0, 1.0, BETA_GRID, tol=1e-6)
    _check_beta(beta)
    rate, r_opt = evaluate(beta, "bisect")
    return DecodingSplit(beta, min(r_d(beta), c_eff), 1.0, r_opt, rate)


def _timeshare(f, c, t, r_star):
    def g(r):
        fr = f(r)
        return t + (c - t) * (fr - t) / (fr + r - t)

    r_opt, rate = grid_then_golden(g, r_star, r_star + R_SPAN, R_GRID, tol=1e-9)
    if rate <= t:
        return DecodingSplit(None, t, 1.0, r_opt, t)
    fr = f(r_opt)
    lam = (c - (fr + r_opt)) / (t - (fr + r_opt))
    uncertainty = 0.0
    if f.stochastic:
        # sensitivity of the time-shared rate to F at fixed r
        uncertainty = (c - t) * r_opt / (fr + r_opt - t) ** 2 * f.std_err(r_opt)
    return DecodingSplit(None, t, min(max(lam, 0.0), 1.0), r_opt, rate, uncertainty)


def rate_dec_timeshare(params: SystemParams, f: RateFunctional,
                       r_d0: Optional[float] = None,
                       opts: Optional[LocalRateParams] = None) -> DecodingSplit:
    """Time-sharing between pure local decoding and pure oblivious processing."""
    c = params.c_backhaul
    if r_d0 is None:
        r_d0 = local_rate(0.0, params, opts)
    if r_d0 >= c:
        return DecodingSplit(None, c, 1.0, 0.0, c)
    t = r_d0
    r_star = solve_fixed_point(f, c).r_star
    return _timeshare(f, c, t, r_star)


def rate_dec_convexhull(params: SystemParams, f: RateFunctional,
                        r_d: Optional[Callable[[float], float]] = None,
                        opts: Optional[LocalRateParams] = None,
                        n_grid: int = 21, rounds: int = 3) -> DecodingSplit:
    """Upper concave envelope of rate_sd(c) evaluated at c = C.

    Searches pairs c1 <= C <= c2 with weight lam = (c2 - C) / (c2 - c1) on c1,
    first on a grid and then by alternating golden-section refinement.
    """
    c = params.c_backhaul
    r_d = _local_fn(params, r_d, opts)

    @functools.lru_cache(maxsize=None)
    def sd(x):
        return rate_sd(params, f, x, r_d=r_d).rate

    at_c = rate_sd(params, f, c, r_d=r_d)
    if c == 0:
        return at_c
    c_hi = c + f.unlimited + 10.0

    def combo(c1, c2):
        if c2 - c1 <= 1e-12:
            return sd(c)
        lam = (c2 - c) / (c2 - c1)
        return lam * sd(c1) + (1.0 - lam) * sd(c2)

    lows = np.linspace(0.0, c, n_grid)
    highs = np.linspace(c, c_hi, n_grid)
    best = (at_c.rate, c, c)
    for c1 in lows:
        for c2 in highs:
            v = combo(float(c1), float(c2))
            if v > best[0]:
                best = (v, float(c1), float(c2))
    _, c1, c2 = best
    w_lo = c / (n_grid - 1)
    w_hi = (c_hi - c) / (n_grid - 1)
    for _ in range(rounds):
        c1, v = golden_max(lambda x: combo(x, c2), max(c1 - w_lo, 0.0), min(c1 + w_lo, c), tol=1e-7)
        c2, v = golden_max(lambda x: combo(c1, x), max(c2 - w_hi, c), c2 + w_hi, tol=1e-7)
        if v > best[0]:
            best = (v, c1, c2)
        w_lo, w_hi = w_lo / 2.0, w_hi / 2.0
    rate, c1, c2 = best
    lam = 1.0 if c2 - c1 <= 1e-12 else (c2 - c) / (c2 - c1)
    return DecodingSplit(at_c.beta, at_c.t, lam, at_c.r_opt, rate)


def r_star_fading_largek(params: SystemParams) -> float:
    g = params.array_gain * params.p
    return math.log2((2.0 ** params.c_backhaul + g) / (1.0 + g))


def rate_dec_fading_largek(params: SystemParams) -> DecodingSplit:
    """Time-sharing rate for Rayleigh fading with many users per cell.

    The gains average out, so the local rate is the Gaussian one and the
    compression functional is log2(1 + gain P (1 - 2^-r)).
    """
    c = params.c_backhaul
    r_d0 = local_rate(0.0, params.with_(k_users=math.inf))
    if r_d0 >= c:
        return DecodingSplit(None, c, 1.0, 0.0, c)
    kind = FunctionalKind.LARGE_K_WYNER if params.model is Model.WYNER else FunctionalKind.LARGE_K_SH
    f = RateFunctional(kind, functools.partial(large_k_rate, gain=params.array_gain), params.p)
    return _timeshare(f, c, r_d0, r_star_fading_largek(params))
