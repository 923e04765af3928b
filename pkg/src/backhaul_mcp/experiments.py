"""Parameter sweeps and the datasets behind the published figures.

A sweep evaluates a set of schemes along one axis and writes CSV rows
``axis,scheme,rate_bits,r_star,uncertainty,wall_ms``.  Failures become rows with
``ERR:<code>`` in the rate column so one bad point never aborts a run.
"""

from __future__ import annotations

import csv
import io
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
from scipy import optimize

from . import asymptotics as asy
from .local_decoding import LocalRateParams, rate_dec_fading_largek, rate_dec_timeshare
from .oblivious import oblivious_rate
from .params import (
    Channel,
    Model,
    ModelError,
    MonteCarloCfg,
    NumericError,
    Protocol,
    StructureError,
    SystemParams,
    UnsupportedCase,
    ValidationError,
)
from .rate_functions import RateFunctional, functional_for

SCHEMES = ("unlimited", "oblivious", "local_decoding", "cutset", "lowsnr_affine",
           "lowsnr_affine_dec")
AXES = ("alpha", "p_db", "c_bits", "eb_n0_db")
HEADER = ("axis", "scheme", "rate_bits", "r_star", "uncertainty", "wall_ms")


@dataclass(frozen=True)
class Row:
    axis: float
    scheme: str
    rate: Optional[float] = None
    r_star: Optional[float] = None
    uncertainty: float = 0.0
    wall_ms: Optional[float] = None
    error: Optional[str] = None


@dataclass(frozen=True)
class SweepSpec:
    """One curve family: ``schemes`` evaluated at each ``grid`` value of ``axis``.

    ``label`` prefixes scheme names in the output (e.g. ``tdma:oblivious``) so
    several specs can share a CSV.
    """

    schemes: tuple
    axis: str
    base: SystemParams
    grid: tuple
    mc: MonteCarloCfg = field(default_factory=MonteCarloCfg)
    label: str = ""

    def __post_init__(self):
        if self.axis not in AXES:
            raise ValidationError(f"unknown axis {self.axis!r}; expected one of {AXES}")
        unknown = set(self.schemes) - set(SCHEMES)
        if unknown or not self.schemes:
            raise ValidationError(f"unknown schemes {sorted(unknown)}; expected from {SCHEMES}")
        grid = tuple(float(x) for x in self.grid)
        if not grid:
            raise ValidationError("sweep grid is empty")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValidationError("sweep grid must be strictly increasing")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "schemes", tuple(self.schemes))
        if self.axis != "eb_n0_db":
            for x in grid:
                self.params_at(x)

    def params_at(self, x: float) -> SystemParams:
        if self.axis == "alpha":
            return self.base.with_(alpha=x)
        if self.axis == "p_db":
            return self.base.with_(p=asy.from_db(x))
        if self.axis == "c_bits":
            return self.base.with_(c_backhaul=x)
        return self.base


_ERROR_CODES = (
    (StructureError, "structure"),
    (ValidationError, "validation"),
    (UnsupportedCase, "unsupported"),
    (NumericError, "numeric"),
    (ModelError, "model"),
    (ArithmeticError, "numeric"),
)


def error_code(exc: Exception) -> str:
    for kind, code in _ERROR_CODES:
        if isinstance(exc, kind):
            return code
    raise exc


# -- per-point evaluation ------------------------------------------------------

def rate_functional(params: SystemParams, mc: MonteCarloCfg) -> RateFunctional:
    """F(r) for params, falling back to Monte Carlo where no closed form exists."""
    try:
        return functional_for(params, mc)
    except UnsupportedCase:
        return functional_for(params, mc, method="montecarlo")


def _oblivious(params, mc):
    try:
        res = oblivious_rate(params, mc)
    except UnsupportedCase:
        res = oblivious_rate(params, mc, method="montecarlo")
    return res.rate, res.r_star, res.uncertainty


def _local(params, mc):
    if params.fading and params.large_k:
        split = rate_dec_fading_largek(params)
    else:
        split = rate_dec_timeshare(params, rate_functional(params, mc),
                                   opts=LocalRateParams(mc=mc))
    return split.rate, split.r_opt, split.uncertainty


def _unlimited(params, mc):
    f = rate_functional(params, mc)
    return f.unlimited, None, f.std_err(math.inf)


def _cutset(params, mc):
    return asy.cutset_bound(params), None, 0.0


def _affine_rate_at_power(char, p):
    """Rate R solving R = S0/(10 log10 2) * (10 log10(P/R) - Eb/N0_min dB)."""
    # a positive root has P/R >= Eb/N0_min, so it lies below P/Eb/N0_min
    hi = p / char.eb_n0_min

    def g(r):
        return r - float(asy.affine_lowsnr_curve(char, [asy.db(p / r)])[0])

    if g(hi) <= 0.0:
        return 0.0
    return optimize.brentq(g, hi * 1e-15, hi, xtol=1e-15, rtol=1e-13)


def _oblivious_char(params):
    return asy.lowsnr_oblivious(asy.lowsnr_unlimited(params), params.c_backhaul)


def _dec_char(params):
    return asy.lowsnr_dec(params).base


_AFFINE_CHAR = {"lowsnr_affine": _oblivious_char, "lowsnr_affine_dec": _dec_char}


def _affine(params, mc):
    return _affine_rate_at_power(_oblivious_char(params), params.p), None, 0.0


def _affine_dec(params, mc):
    return _affine_rate_at_power(_dec_char(params), params.p), None, 0.0


_EVAL = {
    "unlimited": _unlimited,
    "oblivious": _oblivious,
    "local_decoding": _local,
    "cutset": _cutset,
    "lowsnr_affine": _affine,
    "lowsnr_affine_dec": _affine_dec,
}


def _power_for_eb_n0(scheme, params, mc, eb_n0_db):
    """Power P at which P / R(P) equals the target Eb/N0, or None below the minimum.

    P / R(P) is nondecreasing for a concave R with R(0) = 0, so the root is unique.
    """
    target = asy.from_db(eb_n0_db)

    def ratio(log_p):
        p = math.exp(log_p)
        rate = _EVAL[scheme](params.with_(p=p), mc)[0]
        return p / rate - target if rate > 0 else math.inf

    lo, hi = math.log(1e-6), math.log(1e3)
    if ratio(lo) >= 0:
        return None
    if ratio(hi) <= 0:
        raise NumericError(f"Eb/N0 {eb_n0_db} dB not reached below P = 1e3")
    return math.exp(optimize.brentq(ratio, lo, hi, xtol=1e-12))


def eval_point(spec: SweepSpec, x: float, scheme: str, timing: bool = False) -> Row:
    name = f"{spec.label}:{scheme}" if spec.label else scheme
    start = time.perf_counter()
    try:
        params = spec.params_at(x)
        if spec.axis == "eb_n0_db" and scheme in _AFFINE_CHAR:
            char = _AFFINE_CHAR[scheme](params)
            rate, r_star, unc = float(asy.affine_lowsnr_curve(char, [x])[0]), None, 0.0
        elif spec.axis == "eb_n0_db":
            p = _power_for_eb_n0(scheme, params, spec.mc, x)
            if p is None:
                rate, r_star, unc = 0.0, None, 0.0
            else:
                rate, r_star, unc = _EVAL[scheme](params.with_(p=p), spec.mc)
        else:
            rate, r_star, unc = _EVAL[scheme](params, spec.mc)
        if not math.isfinite(rate):
            raise NumericError(f"non-finite rate {rate}")
        row = Row(x, name, rate, r_star, unc)
    except Exception as exc:  # noqa: BLE001 - mapped to an error row
        row = Row(x, name, error=error_code(exc))
    if timing:
        row = Row(row.axis, row.scheme, row.rate, row.r_star, row.uncertainty,
                  1e3 * (time.perf_counter() - start), row.error)
    return row


def _eval_column(args):
    spec, x, timing = args
    return [eval_point(spec, x, s, timing) for s in spec.schemes]


def run_sweep(spec: SweepSpec, timing: bool = False, jobs: int = 1) -> list[Row]:
    """All rows of a sweep, ordered by axis value then scheme order."""
    tasks = [(spec, x, timing) for x in spec.grid]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            columns = list(pool.map(_eval_column, tasks))
    else:
        columns = [_eval_column(t) for t in tasks]
    return [row for col in columns for row in col]


def _fmt(x):
    if x is None:
        return ""
    return f"{x:.9g}"


def write_csv(rows, stream) -> None:
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(HEADER)
    for r in rows:
        rate = f"ERR:{r.error}" if r.error else _fmt(r.rate)
        w.writerow((_fmt(r.axis), r.scheme, rate, _fmt(r.r_star),
                    "" if r.error else _fmt(r.uncertainty), _fmt(r.wall_ms)))


def csv_text(rows) -> str:
    buf = io.StringIO()
    write_csv(rows, buf)
    return buf.getvalue()


def read_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


# -- figures -------------------------------------------------------------------

FADING_SERIES = (
    ("tdma", {"protocol": Protocol.TDMA, "k_users": 1}),
    ("wb_k5", {"protocol": Protocol.WB, "k_users": 5}),
    ("wb_kinf", {"protocol": Protocol.WB, "k_users": math.inf}),
)
MAIN_SCHEMES = ("unlimited", "oblivious", "local_decoding", "cutset")
LOWSNR_SCHEMES = ("unlimited", "oblivious", "local_decoding", "cutset",
                  "lowsnr_affine", "lowsnr_affine_dec")

_ALPHA_FINE = tuple(np.round(np.linspace(0.0, 1.0, 21), 10))
_ALPHA_COARSE = tuple(np.round(np.linspace(0.0, 1.0, 11), 10))
_P_DB = tuple(np.arange(-10.0, 40.0 + 1e-9, 2.5))
_C_BITS = tuple(np.arange(0.0, 10.0 + 1e-9, 0.5))
_EB_N0_DB = tuple(np.round(np.arange(-3.0, 6.0 + 1e-9, 0.25), 10))


@dataclass(frozen=True)
class FigureRecipe:
    fig_id: int
    axis: str
    grid: tuple
    alpha: float
    p_db: float
    c_bits: float
    channel: Channel
    schemes: tuple
    series: tuple = (("", {}),)
    xlabel: str = ""

    def base(self) -> SystemParams:
        return SystemParams(model=Model.WYNER, alpha=self.alpha, p=asy.from_db(self.p_db),
                            c_backhaul=self.c_bits, channel=self.channel)

    def specs(self, mc: Optional[MonteCarloCfg] = None) -> list[SweepSpec]:
        mc = mc or MonteCarloCfg()
        return [SweepSpec(self.schemes, self.axis, self.base().with_(**over), self.grid, mc, label)
                for label, over in self.series]


def _recipe(fig_id, axis, alpha, p_db, c_bits, channel, schemes=MAIN_SCHEMES):
    fading = channel is Channel.RAYLEIGH
    grid = {"alpha": _ALPHA_COARSE if fading else _ALPHA_FINE, "p_db": _P_DB,
            "c_bits": _C_BITS, "eb_n0_db": _EB_N0_DB}[axis]
    xlabel = {"alpha": "alpha", "p_db": "P [dB]", "c_bits": "C [bits/channel use]",
              "eb_n0_db": "Eb/N0 [dB]"}[axis]
    series = FADING_SERIES if fading else (("", {}),)
    return FigureRecipe(fig_id, axis, grid, alpha, p_db, c_bits, channel, schemes, series, xlabel)


G, RF = Channel.GAUSSIAN, Channel.RAYLEIGH
# alpha is the sweep start value where the axis is alpha
FIGURES = {
    2: _recipe(2, "alpha", 0.0, 10.0, 3.0, G),
    3: _recipe(3, "alpha", 0.0, 10.0, 6.0, G),
    4: _recipe(4, "alpha", 0.0, 10.0, 3.0, RF),
    5: _recipe(5, "alpha", 0.0, 10.0, 6.0, RF),
    6: _recipe(6, "p_db", 0.15, 10.0, 6.0, G),
    7: _recipe(7, "p_db", 0.15, 10.0, 6.0, RF),
    8: _recipe(8, "c_bits", 0.4, 10.0, 3.0, G),
    9: _recipe(9, "c_bits", 0.4, 10.0, 3.0, RF),
    10: _recipe(10, "eb_n0_db", 0.2, 0.0, 2.0, G, LOWSNR_SCHEMES),
    11: _recipe(11, "eb_n0_db", 0.2, 0.0, 4.0, G, LOWSNR_SCHEMES),
    12: _recipe(12, "eb_n0_db", 0.2, 0.0, 6.0, G, LOWSNR_SCHEMES),
}


def figure_rows(fig_id: int, mc: Optional[MonteCarloCfg] = None, timing: bool = False,
                jobs: int = 1) -> list[Row]:
    if fig_id not in FIGURES:
        raise ValidationError(f"figure id must be one of {sorted(FIGURES)}, got {fig_id}")
    rows = []
    for spec in FIGURES[fig_id].specs(mc):
        rows.extend(run_sweep(spec, timing, jobs))
    return rows


def run_figure(fig_id: int, out_dir, mc: Optional[MonteCarloCfg] = None, timing: bool = False,
               render: bool = False, jobs: int = 1) -> dict:
    """Write figNN.csv and figNN_plot.py (and figNN.png with ``render``) to out_dir."""
    from . import plotting

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = figure_rows(fig_id, mc, timing, jobs)
    stem = f"fig{fig_id:02d}"
    csv_path = out / f"{stem}.csv"
    csv_path.write_text(csv_text(rows))
    recipe = FIGURES[fig_id]
    script_path = out / f"{stem}_plot.py"
    script_path.write_text(plotting.plot_script(csv_path.name, f"{stem}.png", recipe.xlabel,
                                                figure_title(recipe)))
    paths = {"csv": csv_path, "script": script_path}
    if render:
        paths["png"] = plotting.render_csv(csv_path, out / f"{stem}.png", recipe.xlabel,
                                           figure_title(recipe))
    return paths


def figure_title(recipe: FigureRecipe) -> str:
    parts = ["Wyner", recipe.channel.value]
    if recipe.axis != "alpha":
        parts.append(f"alpha={recipe.alpha:g}")
    if recipe.axis not in ("p_db", "eb_n0_db"):
        parts.append(f"P={recipe.p_db:g} dB")
    if recipe.axis != "c_bits":
        parts.append(f"C={recipe.c_bits:g}")
    return ", ".join(parts)
