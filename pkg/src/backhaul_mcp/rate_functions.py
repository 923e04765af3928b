"""Unlimited-backhaul per-cell sum-rates and the compression functionals F(r).

Every functional has the form F(r) = R(P (1 - 2^-r)), where R(p) is the
unlimited-backhaul per-cell sum-rate at total cell SNR p.  :class:`RateFunctional`
stores R and P; the fixed-point solvers only ever call ``F(r)``.
"""

from __future__ import annotations

import enum
import functools
import math
import warnings
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np
from scipy import integrate

from .channel_models import gram_spectra
from .params import (
    INF_BITS,
    Channel,
    Model,
    MonteCarloCfg,
    NumericError,
    Protocol,
    SystemParams,
    UnsupportedCase,
    ValidationError,
    power_fraction,
)
from .special import exp1_scaled

LOG2 = math.log(2.0)


class FunctionalKind(str, enum.Enum):
    WYNER_GAUSSIAN_SZEGO = "wyner_gaussian_szego"
    SH_GAUSSIAN_CLOSED_FORM = "sh_gaussian_closed_form"
    SH_TDMA_RAYLEIGH_EXACT = "sh_tdma_rayleigh_exact"
    SH_WB_UPPER_BOUND = "sh_wb_upper_bound"
    LARGE_K_WYNER = "large_k_wyner"
    LARGE_K_SH = "large_k_sh"
    MONTE_CARLO_LOGDET = "monte_carlo_logdet"
    SINGLE_USER = "single_user"


class McPrecisionWarning(UserWarning):
    """Monte Carlo standard error exceeds the caller's cap."""


@dataclass(frozen=True)
class RateFunctional:
    """F(r) = R(p (1 - 2^-r)) for a fixed unlimited-rate curve R."""

    kind: FunctionalKind
    power_rate: Callable[[float], float]
    p: float
    power_std_err: Optional[Callable[[float], float]] = None

    def __call__(self, r: float) -> float:
        return self.power_rate(self.p * power_fraction(r))

    def std_err(self, r: float) -> float:
        if self.power_std_err is None:
            return 0.0
        return self.power_std_err(self.p * power_fraction(r))

    @property
    def stochastic(self) -> bool:
        return self.power_std_err is not None

    @property
    def unlimited(self) -> float:
        return self(INF_BITS)

    def scaled(self, beta: float) -> "RateFunctional":
        """The same functional with the cell power reduced to beta * p."""
        return replace(self, p=beta * self.p)


# -- Wyner, Gaussian: Szego integral ------------------------------------------

@functools.lru_cache(maxsize=256)
def _szego_profile(alpha, m):
    theta = np.arange(m) / m
    profile = (1.0 + 2.0 * alpha * np.cos(2.0 * np.pi * theta)) ** 2
    profile.setflags(write=False)
    return profile


def _szego_mean(alpha, p_eff, m):
    return float(np.mean(np.log2(1.0 + p_eff * _szego_profile(alpha, m))))


@functools.lru_cache(maxsize=4096)
def szego_grid_size(alpha: float, p: float, rtol: float = 1e-11) -> int:
    """Smallest power-of-two trapezoid grid resolving the theta-integral at power p.

    The integrand is periodic and analytic; its strip of analyticity only widens as
    p decreases, so a grid fixed at the largest power serves every p_eff <= p.
    """
    m = 64
    prev = _szego_mean(alpha, p, m)
    while m < 1 << 22:
        m *= 2
        cur = _szego_mean(alpha, p, m)
        if abs(cur - prev) <= rtol * max(abs(cur), 1e-300):
            return m
        prev = cur
    raise NumericError(f"theta-quadrature did not converge (alpha={alpha}, p={p}, m={m})")


def wyner_gaussian_rate(p_eff: float, alpha: float, grid: Optional[int] = None) -> float:
    """int_0^1 log2(1 + p (1 + 2 alpha cos 2 pi theta)^2) d theta."""
    if p_eff <= 0.0:
        return 0.0
    if alpha == 0.0:
        return math.log2(1.0 + p_eff)
    m = grid or szego_grid_size(alpha, p_eff)
    return _szego_mean(alpha, p_eff, m)


def f_wyner_gaussian(r: float, params: SystemParams) -> float:
    m = None if params.alpha == 0.0 else szego_grid_size(params.alpha, params.p)
    return wyner_gaussian_rate(params.p * power_fraction(r), params.alpha, m)


# -- soft handoff, Gaussian ----------------------------------------------------

def sh_gaussian_rate(p_eff: float, alpha: float) -> float:
    if p_eff <= 0.0:
        return 0.0
    a2 = alpha * alpha
    disc = 1.0 + 2.0 * (1.0 + a2) * p_eff + (1.0 - a2) ** 2 * p_eff**2
    return math.log2((1.0 + (1.0 + a2) * p_eff + math.sqrt(disc)) / 2.0)


def f_sh_gaussian(r: float, params: SystemParams) -> float:
    return sh_gaussian_rate(params.p * power_fraction(r), params.alpha)


# -- fading closed forms -------------------------------------------------------

def large_k_rate(p_eff: float, gain: float) -> float:
    """log2(1 + gain * p), the K -> inf fading rate (also an upper bound for any K)."""
    return math.log2(1.0 + gain * p_eff) if p_eff > 0 else 0.0


def r_sh_wb_upper(p_eff: float, k_users: float, alpha: float) -> float:
    """Upper bound on the SH Rayleigh WB per-cell sum-rate, tight as K grows."""
    if k_users < 1:
        raise ValidationError(f"k_users must be >= 1, got {k_users}")
    if p_eff <= 0.0:
        return 0.0
    a2 = alpha * alpha
    s = 1.0 + (1.0 + a2) * p_eff
    inv_k = 0.0 if math.isinf(k_users) else 1.0 / k_users
    disc = s * s - 4.0 * a2 * p_eff**2 * inv_k
    return math.log2((s + math.sqrt(max(disc, 0.0))) / 2.0)


def _tdma_numerator(p_eff):
    # int_0^50 ln^2(1 + p u) e^-u du; the x = 1 + p u substitution of the
    # integral over [1, inf) truncated at x = 1 + 50 p.  Tail < 1e-20 relative.
    val, err = integrate.quad(lambda u: math.log1p(p_eff * u) ** 2 * math.exp(-u),
                              0.0, 50.0, epsabs=0.0, epsrel=1e-12, limit=400)
    if not err <= 1e-9 * abs(val):
        raise NumericError(f"TDMA numerator quadrature failed at p={p_eff} (err={err})")
    return val


def r_sh_tdma_rayleigh(p_eff: float) -> float:
    """Exact SH Rayleigh TDMA per-cell rate at alpha = 1 (two-tap ISI channel capacity).

    Computed as ``int_0^inf ln^2(1+p u) e^-u du / (e^{1/p} E1(1/p) ln 2)``, which
    is the original ratio with e^{-1/p} cancelled against E1(1/p) so that nothing
    underflows at small p.
    """
    if p_eff < 0:
        raise ValidationError(f"p_eff must be >= 0, got {p_eff}")
    if p_eff == 0.0:
        return 0.0
    return _tdma_numerator(p_eff) / (exp1_scaled(1.0 / p_eff) * LOG2)


# -- Monte Carlo log-det -------------------------------------------------------

class _SpectrumRate:
    """R(p) = E (1/N) log2 det(I + p H H^H / K) over cached eigenvalue draws."""

    def __init__(self, spectra, deterministic):
        self.spectra = spectra
        self.n_trials = spectra.shape[0]
        self._single = spectra[:1] if deterministic or self.n_trials == 1 else None

    def per_trial(self, p_eff):
        spectra = self.spectra if self._single is None else self._single
        return np.mean(np.log2(1.0 + p_eff * spectra), axis=1)

    def mean(self, p_eff):
        if p_eff <= 0.0:
            return 0.0
        return float(np.mean(self.per_trial(p_eff)))

    def std_err(self, p_eff):
        if p_eff <= 0.0 or self._single is not None:
            return 0.0
        return float(np.std(self.per_trial(p_eff), ddof=1) / math.sqrt(self.n_trials))


def montecarlo_functional(params: SystemParams, cfg: Optional[MonteCarloCfg] = None) -> RateFunctional:
    cfg = cfg or MonteCarloCfg()
    if params.large_k:
        raise ValidationError("Monte Carlo needs a finite number of users per cell")
    spectra = gram_spectra(params.model, float(params.alpha), int(params.k_eff), params.channel,
                           cfg.n_cells, cfg.n_trials, cfg.seed)
    rate = _SpectrumRate(spectra, deterministic=params.channel is Channel.GAUSSIAN)
    se = None if rate._single is not None else rate.std_err
    return RateFunctional(FunctionalKind.MONTE_CARLO_LOGDET, rate.mean, params.p, se)


def f_montecarlo(r: float, params: SystemParams, cfg: Optional[MonteCarloCfg] = None,
                 se_cap: Optional[float] = None) -> tuple[float, float]:
    """Sample mean and standard error of (1/N) log2 det(I + P(1-2^-r)/K H H^H)."""
    f = montecarlo_functional(params, cfg)
    mean, se = f(r), f.std_err(r)
    if se_cap is not None and se > se_cap:
        warnings.warn(f"Monte Carlo std_err {se:.3g} exceeds cap {se_cap:.3g}",
                      McPrecisionWarning, stacklevel=2)
    return mean, se


# -- dispatch ------------------------------------------------------------------

def single_user_functional(p: float) -> RateFunctional:
    return RateFunctional(FunctionalKind.SINGLE_USER, lambda q: math.log2(1.0 + q), p)


def functional_for(params: SystemParams, mc: Optional[MonteCarloCfg] = None,
                   method: str = "auto") -> RateFunctional:
    """The F(r) used for the oblivious scheme under ``params``.

    ``method="montecarlo"`` forces the finite-N log-det estimate, which is the only
    route for cases without a closed form (e.g. Wyner with Rayleigh TDMA).
    """
    if method == "montecarlo":
        return montecarlo_functional(params, mc)
    if method != "auto":
        raise ValidationError(f"unknown method {method!r}")
    alpha = params.alpha
    if params.channel is Channel.GAUSSIAN:
        if params.model is Model.WYNER:
            grid = None if alpha == 0.0 else szego_grid_size(alpha, params.p)
            return RateFunctional(FunctionalKind.WYNER_GAUSSIAN_SZEGO,
                                  functools.partial(_wyner_at, alpha=alpha, grid=grid), params.p)
        return RateFunctional(FunctionalKind.SH_GAUSSIAN_CLOSED_FORM,
                              functools.partial(sh_gaussian_rate, alpha=alpha), params.p)
    if params.large_k:
        kind = FunctionalKind.LARGE_K_WYNER if params.model is Model.WYNER else FunctionalKind.LARGE_K_SH
        return RateFunctional(kind, functools.partial(large_k_rate, gain=params.array_gain), params.p)
    if params.protocol is Protocol.TDMA:
        if params.model is Model.SOFT_HANDOFF and alpha == 1.0:
            return RateFunctional(FunctionalKind.SH_TDMA_RAYLEIGH_EXACT, r_sh_tdma_rayleigh, params.p)
        raise UnsupportedCase(
            f"no closed form for {params.model.value} Rayleigh TDMA at alpha={alpha}; "
            "use method='montecarlo'")
    return montecarlo_functional(params, mc)


def _wyner_at(p_eff, alpha, grid):
    return wyner_gaussian_rate(p_eff, alpha, grid)


def upper_functional(params: SystemParams) -> RateFunctional:
    """A deterministic functional that dominates the true F(r) for fading channels."""
    if params.channel is Channel.GAUSSIAN:
        return functional_for(params)
    if params.model is Model.SOFT_HANDOFF:
        if params.protocol is Protocol.TDMA and params.alpha == 1.0:
            return functional_for(params)
        return RateFunctional(FunctionalKind.SH_WB_UPPER_BOUND,
                              functools.partial(r_sh_wb_upper, k_users=params.k_eff,
                                                alpha=params.alpha), params.p)
    # Jensen: E log det(I + p/K H H^H) <= log det(I + p E[H H^H]/K)
    return RateFunctional(FunctionalKind.LARGE_K_WYNER,
                          functools.partial(large_k_rate, gain=params.array_gain), params.p)


def unlimited_rate(params: SystemParams, mc: Optional[MonteCarloCfg] = None,
                   method: str = "auto") -> float:
    """Per-cell sum-rate with unlimited backhaul (r = inf of the matching functional)."""
    return functional_for(params, mc, method).unlimited
