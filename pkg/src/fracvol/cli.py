"""Command-line interface.

Subcommands::

    fracvol smile             zeroth-order asymptotic smile
    fracvol mc                conditional Monte Carlo smile
    fracvol ldp-check         digital-option LDP speed check
    fracvol largetime         CEV / time-changed large-time rates
    fracvol simulate-fbm      dump fractional Brownian paths
    fracvol reproduce-tables  asymptotic vs Monte Carlo smile tables

All randomness is driven by ``--seed``; re-running a command with the same
arguments and seed produces byte-identical output files.  Exit codes:
0 success, 1 numerical failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from typing import Optional, Sequence

import numpy as np

from .fbm import Hurst, get_kernel_grid, sample_paths
from .largetime import CevSpec, cev_rate, sv_rate
from .mc import ModelSpec, mc_digital_prob, mc_smile
from .ritz import VolFunction, lambda_star
from .smile import asymptotic_smile

TABLE1_XS = (0.001, 0.02, 0.04, 0.06, 0.08, 0.10)
TABLE2_XS = (-0.06, -0.04, -0.02, 0.001, 0.02, 0.04, 0.06, 0.08)

DEFAULTS = {
    "hurst": 0.25,
    "rho": 0.0,
    "vol": "tanh:0.1,0.05",
    "modes": 4,
    "paths": 500000,
    "steps": 100,
    "ritz_steps": 200,
    "maturity": 0.005,
    "seed": 12345,
    "threads": 1,
    "format": "csv",
    "out": None,
}


def parse_vol(desc: str) -> VolFunction:
    """Parse a volatility descriptor: 'tanh:c0,c1' or 'const:s0'."""
    try:
        kind, _, args = desc.partition(":")
        vals = [float(v) for v in args.split(",")] if args else []
        if kind == "tanh" and len(vals) == 2:
            return VolFunction.tanh(*vals)
        if kind == "const" and len(vals) == 1:
            return VolFunction.constant(vals[0])
    except ValueError as exc:
        raise ValueError(f"bad vol descriptor {desc!r}: {exc}") from exc
    raise ValueError(
        f"bad vol descriptor {desc!r}; expected 'tanh:c0,c1' or 'const:s0'")


def _parse_floats(text: str) -> list:
    return [float(v) for v in text.split(",") if v.strip()]


def _rows_to_csv(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def _rows_to_json(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    return json.dumps([dict(zip(header, row)) for row in rows], indent=2) + "\n"


def _emit(text: str, out: Optional[str]) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w") as fh:
            fh.write(text)


def _write_table(header, rows, fmt: str, out: Optional[str]) -> None:
    if fmt == "csv":
        _emit(_rows_to_csv(header, rows), out)
    else:
        _emit(_rows_to_json(header, rows), out)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON file with default option values")
    p.add_argument("--hurst", type=float, help="Hurst exponent in (0, 1)")
    p.add_argument("--rho", type=float, help="price/vol correlation in (-1, 1)")
    p.add_argument("--vol", help="vol descriptor, e.g. tanh:0.1,0.05")
    p.add_argument("--modes", type=int, help="Fourier modes in the Ritz basis")
    p.add_argument("--paths", type=int, help="Monte Carlo path count")
    p.add_argument("--steps", type=int, help="time steps for simulation")
    p.add_argument("--maturity", type=float, help="option maturity")
    p.add_argument("--seed", type=int, help="master RNG seed")
    p.add_argument("--threads", type=int, help="worker threads for MC chunks")
    p.add_argument("--out", help="output path ('-' for stdout)")
    p.add_argument("--format", choices=["csv", "json"], help="output format")


def _settings(args: argparse.Namespace) -> dict:
    cfg = dict(DEFAULTS)
    if getattr(args, "config", None):
        with open(args.config) as fh:
            loaded = json.load(fh)
        if not isinstance(loaded, dict):
            raise ValueError("config file must contain a JSON object")
        unknown = set(loaded) - set(DEFAULTS)
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        cfg.update(loaded)
    for key in DEFAULTS:
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    return cfg


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fracvol",
        description="Large-deviation asymptotics for rough volatility models")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("smile", help="zeroth-order asymptotic smile")
    _add_common(p)
    p.add_argument("--xs", help="comma-separated log-moneyness scales")

    p = sub.add_parser("mc", help="conditional Monte Carlo smile")
    _add_common(p)
    p.add_argument("--xs", help="comma-separated log-moneyness scales")

    p = sub.add_parser("ldp-check",
                       help="digital tail probabilities vs the rate function")
    _add_common(p)
    p.add_argument("--x", type=float, default=0.1, help="log-moneyness scale")
    p.add_argument("--maturities", default="0.01,0.005,0.002",
                   help="comma-separated maturities")

    p = sub.add_parser("largetime", help="CEV and time-changed rates")
    _add_common(p)
    p.add_argument("--beta", type=float, default=0.5, help="CEV exponent")
    p.add_argument("--sigma", type=float, default=1.0, help="CEV volatility")
    p.add_argument("--p", type=float, dest="p_exp",
                   help="vol exponent of the rough clock (enables sv_rate)")
    p.add_argument("--s-grid", default="0.5,1.0,1.5,2.0,2.5,3.0",
                   help="comma-separated levels S")

    p = sub.add_parser("simulate-fbm", help="dump fractional Brownian paths")
    _add_common(p)

    p = sub.add_parser("reproduce-tables",
                       help="asymptotic vs Monte Carlo smile tables")
    _add_common(p)

    return parser


def _cmd_smile(args, cfg) -> None:
    vol = parse_vol(cfg["vol"])
    xs = _parse_floats(args.xs) if args.xs else list(TABLE1_XS)
    kg = get_kernel_grid(cfg["hurst"], cfg["ritz_steps"])
    curve = asymptotic_smile(kg, vol, cfg["rho"], xs, n_modes=cfg["modes"])
    if cfg["format"] == "csv":
        _emit(curve.to_csv(), cfg["out"])
    else:
        _emit(curve.to_json() + "\n", cfg["out"])


def _cmd_mc(args, cfg) -> None:
    vol = parse_vol(cfg["vol"])
    xs = _parse_floats(args.xs) if args.xs else list(TABLE1_XS)
    model = ModelSpec(vol=vol, hurst=Hurst(cfg["hurst"]), rho=cfg["rho"])
    pts = mc_smile(model, cfg["maturity"], xs, cfg["paths"], cfg["steps"],
                   cfg["seed"], cfg["threads"])
    header = ["x", "strike", "price", "price_se", "implied_vol",
              "iv_lo", "iv_hi"]
    rows = [[p.x, p.strike, p.price, p.price_se, p.implied_vol,
             p.iv_lo, p.iv_hi] for p in pts]
    _write_table(header, rows, cfg["format"], cfg["out"])


def _cmd_ldp_check(args, cfg) -> None:
    vol = parse_vol(cfg["vol"])
    h = cfg["hurst"]
    model = ModelSpec(vol=vol, hurst=Hurst(h), rho=cfg["rho"])
    kg = get_kernel_grid(h, cfg["ritz_steps"])
    lam = lambda_star(kg, vol, cfg["rho"], args.x, n_modes=cfg["modes"])
    rows = []
    for t in _parse_floats(args.maturities):
        est = mc_digital_prob(model, t, args.x, cfg["paths"], cfg["steps"],
                              cfg["seed"], cfg["threads"])
        speed = t ** (2.0 * h)
        rows.append([t, est.mean, est.std_error,
                     -speed * float(np.log(est.mean)), lam])
    header = ["maturity", "prob", "prob_se", "neg_t2h_log_prob",
              "lambda_star"]
    _write_table(header, rows, cfg["format"], cfg["out"])


def _cmd_largetime(args, cfg) -> None:
    spec = CevSpec(beta=args.beta, sigma=args.sigma)
    svols = _parse_floats(args.s_grid)
    if args.p_exp is not None:
        kg = get_kernel_grid(cfg["hurst"], 400)
        header = ["s", "cev_rate", "sv_rate"]
        rows = [[s, cev_rate(spec, s),
                 sv_rate(spec, kg, args.p_exp, s, n_modes=cfg["modes"])]
                for s in svols]
    else:
        header = ["s", "cev_rate"]
        rows = [[s, cev_rate(spec, s)] for s in svols]
    _write_table(header, rows, cfg["format"], cfg["out"])


def _cmd_simulate_fbm(args, cfg) -> None:
    kg = get_kernel_grid(cfg["hurst"], cfg["steps"], cfg["maturity"])
    chunks = [s.fbm_path for s in
              sample_paths(kg, cfg["paths"], cfg["seed"])]
    paths = np.concatenate(chunks, axis=0)
    header = [f"t{i}" for i in range(paths.shape[1])]
    rows = [[float(v) for v in row] for row in paths]
    _write_table(header, rows, cfg["format"], cfg["out"])


def _cmd_reproduce_tables(args, cfg) -> None:
    vol = parse_vol(cfg["vol"])
    h = cfg["hurst"]
    kg = get_kernel_grid(h, cfg["ritz_steps"])
    out = cfg["out"]
    for name, rho, xs in (("table1", 0.0, TABLE1_XS),
                          ("table2", -0.1, TABLE2_XS)):
        curve = asymptotic_smile(kg, vol, rho, xs, n_modes=cfg["modes"])
        model = ModelSpec(vol=vol, hurst=Hurst(h), rho=rho)
        pts = mc_smile(model, cfg["maturity"], xs, cfg["paths"],
                       cfg["steps"], cfg["seed"], cfg["threads"])
        header = ["x", "sigma0", "lambda_star", "mc_implied_vol",
                  "mc_iv_lo", "mc_iv_hi"]
        rows = [[a.x, a.sigma0, a.lambda_star, m.implied_vol, m.iv_lo,
                 m.iv_hi] for a, m in zip(curve.points, pts)]
        dest = None
        if out not in (None, "-"):
            ext = "csv" if cfg["format"] == "csv" else "json"
            dest = f"{out.rstrip('/')}/{name}.{ext}"
        elif out is None or out == "-":
            sys.stdout.write(f"# {name} (rho={rho})\n")
        _write_table(header, rows, cfg["format"], dest)


_COMMANDS = {
    "smile": _cmd_smile,
    "mc": _cmd_mc,
    "ldp-check": _cmd_ldp_check,
    "largetime": _cmd_largetime,
    "simulate-fbm": _cmd_simulate_fbm,
    "reproduce-tables": _cmd_reproduce_tables,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _settings(args)
        _COMMANDS[args.command](args, cfg)
    except (ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        print(f"fracvol: configuration error: {exc}", file=sys.stderr)
        return 2
    except (ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"fracvol: numerical failure: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
