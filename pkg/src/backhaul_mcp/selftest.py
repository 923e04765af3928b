"""Built-in invariant suite behind ``backhaul-mcp selftest``."""

from __future__ import annotations

import itertools
import math
import sys
from dataclasses import dataclass
from typing import Callable

from . import asymptotics as asy
from .local_decoding import rate_dec_timeshare
from .oblivious import (
    is_consecutive,
    oblivious_rate,
    rate_sh_gaussian_closed,
    rate_single_user,
    region_finite_n,
    solve_fixed_point,
)
from .params import Channel, Model, MonteCarloCfg, Protocol, SystemParams
from .rate_functions import (
    f_montecarlo,
    functional_for,
    montecarlo_functional,
    r_sh_tdma_rayleigh,
)


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    limit: float
    passed: bool
    note: str = ""


def _within(name, value, limit, note=""):
    return Check(name, value, limit, bool(value <= limit), note)


def check_anchor_half_db(scale):
    penalty = 10.0 * math.log10(1.0 / (1.0 - 2.0 ** -3.2))
    return _within("anchor: 0.5 dB at C = 3.2", abs(penalty - 0.5), 1e-3 * scale,
                   f"penalty {penalty:.5f} dB")


def check_anchor_r_tilde(scale):
    r = asy.solve_r_tilde_m(SystemParams(model=Model.WYNER, alpha=0.2))
    return _within("anchor: r_tilde_m = 2.15 at alpha 0.2", abs(r - 2.15), 1e-2 * scale,
                   f"r_tilde_m {r:.4f}")


def check_closed_form(scale):
    worst = 0.0
    for a, p_db, c in itertools.product((0.0, 0.3, 0.7, 1.0), (-10.0, 10.0, 30.0), (0.5, 3.0, 10.0)):
        q = SystemParams(model=Model.SOFT_HANDOFF, alpha=a, p=10 ** (p_db / 10), c_backhaul=c)
        worst = max(worst, abs(rate_sh_gaussian_closed(q).rate
                               - solve_fixed_point(functional_for(q), q).rate))
    return _within("closed form vs fixed-point solver", worst, 1e-9 * scale)


def check_alpha_zero(scale):
    worst = 0.0
    for model, p, c in itertools.product(Model, (0.5, 10.0, 300.0), (0.5, 3.0, 8.0)):
        q = SystemParams(model=model, alpha=0.0, p=p, c_backhaul=c)
        worst = max(worst, abs(oblivious_rate(q).rate - rate_single_user(p, c)))
    return _within("alpha = 0 single-user reduction", worst, 1e-9 * scale)


def check_cutset(scale):
    worst = -math.inf
    for model, a, c in itertools.product(Model, (0.1, 0.5, 1.0), (1.0, 3.0, 6.0)):
        q = SystemParams(model=model, alpha=a, p=10.0, c_backhaul=c)
        bound = asy.cutset_bound(q)
        f = functional_for(q)
        for rate in (oblivious_rate(q).rate, rate_dec_timeshare(q, f).rate):
            worst = max(worst, rate - bound)
    return _within("cut-set dominance (excess)", worst, 1e-9 * scale)


def check_consecutive(scale):
    bad = 0
    for model, a in itertools.product(Model, (0.2, 0.5, 1.0)):
        q = SystemParams(model=model, alpha=a, p=10.0, c_backhaul=3.0)
        r_star = oblivious_rate(q).r_star
        res = region_finite_n(8, q, r_star, tie_tol=1e-9 * scale)
        bad += not is_consecutive(res.minimizing_subset, 8)
    return _within("finite-N minimizer is consecutive (N = 8)", float(bad), 0.0)


def _reference_lowsnr(params, c):
    a2 = params.alpha**2
    q = 2.0 ** -c
    ln2 = math.log(2.0)
    inv_k = 0.0 if math.isinf(params.k_eff) else 1.0 / params.k_eff
    g = params.array_gain
    eb = ln2 / (g * (1.0 - q))
    if params.channel is Channel.GAUSSIAN and params.model is Model.WYNER:
        s0 = 2 * g**2 * (1 - q) / (1 + 12 * a2 + 6 * a2**2 + (1 - 4 * a2 + 2 * a2**2) * q)
    elif params.channel is Channel.GAUSSIAN:
        s0 = 2 * g**2 * (1 - q) / (1 + 4 * a2 + a2**2 + (1 + a2**2) * q)
    else:
        s0 = 2 * (1 - q) / (1 + inv_k + (1 - inv_k) * q)
    return eb, s0


def check_lowsnr_identities(scale):
    worst = 0.0
    for model, ch, a, c in itertools.product(Model, Channel, (0.2, 0.7), (0.5, 2.0, 6.0)):
        q = SystemParams(model=model, alpha=a, k_users=4, channel=ch)
        got = asy.lowsnr_oblivious(asy.lowsnr_unlimited(q), c)
        eb, s0 = _reference_lowsnr(q, c)
        worst = max(worst, abs(got.eb_n0_min - eb) / eb, abs(got.s0 - s0) / s0)
    return _within("low-SNR oblivious identities (rel)", worst, 1e-12 * scale)


def check_highsnr(scale):
    q = SystemParams(model=Model.WYNER, alpha=0.4)
    gaps = [row.gap for row in asy.highsnr_scaling_check(q, (20.0, 40.0, 60.0), s_inf=1.0, l_inf=0.0)]
    ok = all(g > 0 for g in gaps) and gaps[0] > gaps[1] > gaps[2]
    sat = abs(oblivious_rate(q.with_(p=1e6, c_backhaul=3.0)).rate - 3.0)
    return Check("high-SNR backhaul scaling", sat, 1e-3 * scale, ok and sat <= 1e-3 * scale,
                 "gaps " + ", ".join(f"{g:.4f}" for g in gaps))


def check_tdma_montecarlo(scale, seed):
    q = SystemParams(model=Model.SOFT_HANDOFF, alpha=1.0, p=10.0, channel=Channel.RAYLEIGH,
                     protocol=Protocol.TDMA)
    exact = r_sh_tdma_rayleigh(10.0)
    mc, _ = f_montecarlo(math.inf, q, MonteCarloCfg(n_cells=200, n_trials=2000, seed=seed))
    return _within("TDMA exact vs Monte Carlo (rel)", abs(mc - exact) / exact, 0.02 * scale)


def check_large_k(scale, seed):
    worst = 0.0
    cfg = MonteCarloCfg(n_cells=100, n_trials=1000, seed=seed)
    for model in Model:
        q = SystemParams(model=model, alpha=0.5, p=10.0, k_users=200, c_backhaul=3.0,
                         channel=Channel.RAYLEIGH)
        mc = solve_fixed_point(montecarlo_functional(q, cfg), q).rate
        ref = rate_single_user(q.array_gain * q.p, 3.0)
        worst = max(worst, abs(mc - ref) / ref)
    return _within("large-K Monte Carlo vs closed form (rel)", worst, 0.02 * scale)


CHECKS: tuple[Callable, ...] = (
    check_anchor_half_db,
    check_anchor_r_tilde,
    check_closed_form,
    check_alpha_zero,
    check_cutset,
    check_consecutive,
    check_lowsnr_identities,
    check_highsnr,
)
MC_CHECKS: tuple[Callable, ...] = (check_tdma_montecarlo, check_large_k)


def run_selftest(seed: int = 20080701, tol_scale: float = 1.0, montecarlo: bool = True,
                 stream=None) -> list[Check]:
    """Run every check, print a table to ``stream`` and return the results.

    ``tol_scale`` multiplies every tolerance; values below 1 tighten the suite.
    """
    stream = stream or sys.stdout
    results = [fn(tol_scale) for fn in CHECKS]
    if montecarlo:
        results += [fn(tol_scale, seed) for fn in MC_CHECKS]
    width = max(len(r.name) for r in results)
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(f"{status}  {r.name:<{width}}  value={r.value:.3g}  limit={r.limit:.3g}  {r.note}",
              file=stream)
    n_fail = sum(not r.passed for r in results)
    print(f"{len(results) - n_fail}/{len(results)} checks passed", file=stream)
    return results
