"""Command-line entry point: ``backhaul-mcp <command> [options]``.

Exit status: 0 success, 1 invalid input, 2 numeric failure, 3 selftest failure.

A ``--config`` file holds flat ``key = value`` lines (``#`` starts a comment);
keys are the long option names with or without the leading dashes, e.g.
``alpha = 0.4`` or ``p-db = 10``.  Options given on the command line win.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import asymptotics as asy
from . import experiments as exp
from .oblivious import rate_finite_n, region_finite_n, solve_fixed_point
from .params import ModelError, MonteCarloCfg, SystemParams, ValidationError

EXIT_OK, EXIT_INVALID, EXIT_NUMERIC, EXIT_SELFTEST = 0, 1, 2, 3

# option name -> (converter, default)
COMMON = {
    "model": (str, "wyner"),
    "alpha": (float, 0.4),
    "p_db": (float, 10.0),
    "c_bits": (float, 3.0),
    "k_users": (lambda s: math.inf if s.lower() in ("inf", "infinity") else int(s), 1),
    "channel": (str, "gaussian"),
    "protocol": (str, "wb"),
    "scheme": (str, None),
    "cells": (int, None),
    "trials": (int, None),
    "seed": (int, None),
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_INVALID)


def _add_common(p):
    g = p.add_argument_group("system")
    g.add_argument("--model", choices=["wyner", "sh"])
    g.add_argument("--alpha", type=float)
    g.add_argument("--p-db", type=float, help="total cell SNR in dB")
    g.add_argument("--c-bits", type=float, help="backhaul capacity per cell [bits/channel use]")
    g.add_argument("--k-users", type=COMMON["k_users"][0], help="users per cell, or 'inf'")
    g.add_argument("--channel", choices=["gaussian", "rayleigh"])
    g.add_argument("--protocol", choices=["wb", "tdma"])
    g.add_argument("--scheme", help=f"comma-separated subset of {','.join(exp.SCHEMES)}")
    g.add_argument("--cells", type=int, help="Monte Carlo / finite-N cell count")
    g.add_argument("--trials", type=int, help="Monte Carlo trials")
    g.add_argument("--seed", type=int)
    g.add_argument("--config", type=Path, help="flat key = value file; flags win")
    g.add_argument("--out", type=Path, help="output file (directory for 'figure')")
    g.add_argument("--timing", action="store_true", help="fill the wall_ms column")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="backhaul-mcp", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("rate", help="all schemes at one operating point")
    _add_common(p)

    p = sub.add_parser("sweep", help="schemes along one axis")
    _add_common(p)
    p.add_argument("--axis", choices=exp.AXES, default="alpha")
    p.add_argument("--grid", default="0:1:0.05",
                   help="start:stop:step (inclusive) or comma-separated values")
    p.add_argument("--jobs", type=int, default=1)

    p = sub.add_parser("figure", help="dataset and plot script for one figure")
    p.add_argument("fig_id", type=int, choices=sorted(exp.FIGURES))
    _add_common(p)
    p.add_argument("--render", action="store_true", help="also write a PNG")
    p.add_argument("--jobs", type=int, default=1)

    p = sub.add_parser("lowsnr", help="minimum Eb/N0 and slope of every scheme")
    _add_common(p)

    p = sub.add_parser("region", help="finite-N subset minimization")
    _add_common(p)
    p.add_argument("--r", type=float, help="compression parameter; default maximizes over r")
    p.add_argument("--subsets", choices=["auto", "all", "consecutive"], default="auto")

    p = sub.add_parser("selftest", help="run the invariant suite")
    _add_common(p)
    p.add_argument("--tol-scale", type=float, default=1.0)
    p.add_argument("--no-montecarlo", action="store_true")
    return parser


def read_config(path: Path) -> dict:
    values = {}
    for lineno, raw in enumerate(path.read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.lstrip("-").replace("-", "_")
        if key not in COMMON:
            raise ValidationError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            values[key] = COMMON[key][0](value)
        except ValueError as exc:
            raise ValidationError(f"{path}:{lineno}: bad value for {key}: {value!r}") from exc
    return values


def resolve(args) -> dict:
    """Merge defaults < config file < command-line flags."""
    merged = {k: default for k, (_, default) in COMMON.items()}
    if args.config is not None:
        merged.update(read_config(args.config))
    for key in COMMON:
        value = getattr(args, key, None)
        if value is not None:
            merged[key] = value
    return merged


def system_params(opts: dict) -> SystemParams:
    return SystemParams(model=opts["model"], alpha=opts["alpha"], p=asy.from_db(opts["p_db"]),
                        k_users=opts["k_users"], c_backhaul=opts["c_bits"],
                        channel=opts["channel"], protocol=opts["protocol"])


def mc_cfg(opts: dict) -> MonteCarloCfg:
    d = MonteCarloCfg()
    return MonteCarloCfg(n_cells=opts["cells"] or d.n_cells, n_trials=opts["trials"] or d.n_trials,
                         seed=d.seed if opts["seed"] is None else opts["seed"])


def parse_grid(text: str) -> tuple:
    if ":" in text:
        try:
            start, stop, step = (float(x) for x in text.split(":"))
        except ValueError as exc:
            raise ValidationError(f"grid must be start:stop:step, got {text!r}") from exc
        if step <= 0:
            raise ValidationError("grid step must be positive")
        n = int(math.floor((stop - start) / step + 1e-9)) + 1
        return tuple(float(np.round(start + i * step, 12)) for i in range(n))
    try:
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError as exc:
        raise ValidationError(f"bad grid {text!r}") from exc


def _schemes(opts, default):
    if not opts["scheme"]:
        return default
    return tuple(s.strip() for s in opts["scheme"].split(",") if s.strip())


def _emit(text: str, out):
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def cmd_rate(args, opts):
    params = system_params(opts)
    spec = exp.SweepSpec(_schemes(opts, exp.MAIN_SCHEMES), "c_bits", params, (params.c_backhaul,),
                         mc_cfg(opts))
    _emit(exp.csv_text(exp.run_sweep(spec, args.timing)), args.out)
    return EXIT_OK


def cmd_sweep(args, opts):
    spec = exp.SweepSpec(_schemes(opts, exp.MAIN_SCHEMES), args.axis, system_params(opts),
                         parse_grid(args.grid), mc_cfg(opts))
    _emit(exp.csv_text(exp.run_sweep(spec, args.timing, args.jobs)), args.out)
    return EXIT_OK


def cmd_figure(args, opts):
    out = args.out or Path(".")
    paths = exp.run_figure(args.fig_id, out, mc_cfg(opts), args.timing, args.render, args.jobs)
    for kind, path in paths.items():
        print(f"{kind}: {path}")
    return EXIT_OK


def cmd_lowsnr(args, opts):
    params = system_params(opts)
    unl = asy.lowsnr_unlimited(params)
    rows = [("unlimited", unl, "")]
    if params.c_backhaul > 0:
        rows.append(("oblivious", asy.lowsnr_oblivious(unl, params.c_backhaul), ""))
    rows.append(("local_decode", asy.lowsnr_local_decode(params), ""))
    dec = asy.lowsnr_dec(params)
    rows.append(("local_decoding", dec.base,
                 f"{dec.r_m:.9g},{dec.r_tilde_m:.9g},{dec.lambda_o:.9g}"))
    lines = ["scheme,eb_n0_min_db,s0,r_m,r_tilde_m,lambda_o"]
    for name, char, extra in rows:
        lines.append(f"{name},{char.eb_n0_min_db:.9g},{char.s0:.9g},{extra or ',,'}")
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def cmd_region(args, opts):
    params = system_params(opts)
    n = opts["cells"] or 8
    if args.r is None:
        res = rate_finite_n(n, params, args.subsets)
        r = res.r_star
    else:
        r = args.r
    mode = args.subsets
    if mode == "auto":
        mode = "all" if n <= 16 else "consecutive"
    region = region_finite_n(n, params, r, mode)
    subset = " ".join(str(j) for j in sorted(region.minimizing_subset)) or "none"
    inf_n = solve_fixed_point(exp.rate_functional(params, mc_cfg(opts)), params).rate
    text = ("n_cells,r_used,sum_rate,infinite_n_rate,minimizing_subset\n"
            f"{n},{region.r_used:.9g},{region.sum_rate:.9g},{inf_n:.9g},{subset}\n")
    _emit(text, args.out)
    return EXIT_OK


def cmd_selftest(args, opts):
    from .selftest import run_selftest

    seed = MonteCarloCfg().seed if opts["seed"] is None else opts["seed"]
    results = run_selftest(seed=seed, tol_scale=args.tol_scale,
                           montecarlo=not args.no_montecarlo)
    return EXIT_OK if all(r.passed for r in results) else EXIT_SELFTEST


COMMANDS = {
    "rate": cmd_rate,
    "sweep": cmd_sweep,
    "figure": cmd_figure,
    "lowsnr": cmd_lowsnr,
    "region": cmd_region,
    "selftest": cmd_selftest,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        opts = resolve(args)
        return COMMANDS[args.command](args, opts)
    except ArithmeticError as exc:  # NumericError included
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ModelError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
