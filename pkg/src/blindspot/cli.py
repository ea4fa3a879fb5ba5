"""Command-line front end.

Data goes to stdout (or ``--out``); warnings and progress go to stderr.
Exit codes: 0 success, 2 usage error, 3 numerical failure, 4 I/O failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import sys
import time
from datetime import datetime, timezone
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy import stats

from . import __version__, analytic
from .analytic import NumericalError
from .config import ScenarioConfig
from .simulator import METHODS, SweepRow, estimate_blindspot, run_sweep, sample_cell_areas

EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL, EXIT_IO = 0, 2, 3, 4

CSV_HEADER = ["method", "lambda", "lambda0", "L", "R", "k_min", "value", "stderr", "n_trials", "seed"]

DEFAULTS = {
    "lambda": 0.05,
    "lambda0": 0.03,
    "range": 20.0,
    "length": math.inf,
    "trials": 100_000,
    "seed": 0,
    "threads": 1,
    "epsilon": 0.1,
    "delta": 1e-4,
    "kmin": 3,
    "samples": 100_000,
    "area_draws": 1000,
}

RECIPES = {
    "fig5": {
        "vary": "lambda",
        "values": [round(v, 10) for v in np.linspace(0.01, 0.1, 10)],
        "methods": ["mc", "analytic_asymptotic", "analytic_independent"],
        "length": math.inf,
    },
    "fig6": {
        "vary": "L",
        "values": [float(v) for v in range(1, 21)],
        "methods": ["mc", "analytic_asymptotic", "mc_independent_segments"],
        "target_b_as": 0.2,
    },
}


class UsageError(Exception):
    pass


def fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.9g}"


def fmt_value(x: float) -> str:
    """Human-facing scalar output: 9 significant digits, trailing zeros kept."""
    return f"{float(x):#.9g}"


def row_to_fields(row: SweepRow) -> list[str]:
    return [
        row.method, fmt(row.lam), fmt(row.lam0), fmt(row.L), fmt(row.R), fmt(row.k_min),
        fmt(row.value), fmt(row.stderr), fmt(row.n_trials), fmt(row.seed),
    ]


def rows_to_csv(rows: Sequence[SweepRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in rows:
        writer.writerow(row_to_fields(row))
    return buf.getvalue()


def csv_to_rows(text: str) -> list[SweepRow]:
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    if header != CSV_HEADER:
        raise ValueError(f"unexpected CSV header {header}")

    def opt(s, kind):
        return kind(s) if s != "" else None

    rows = []
    for f in reader:
        rows.append(SweepRow(
            method=f[0], lam=float(f[1]), lam0=float(f[2]), L=float(f[3]), R=float(f[4]),
            k_min=int(f[5]), value=float(f[6]), stderr=opt(f[7], float),
            n_trials=opt(f[8], int), seed=opt(f[9], int),
        ))
    return rows


def _length(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid length {text!r}") from None
    if not value > 0:
        raise argparse.ArgumentTypeError("length must be > 0 (or 'inf')")
    return value


def _float_list(text: str) -> list[float]:
    items = [s.strip() for s in text.split(",") if s.strip()]
    try:
        return [float(s) for s in items]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid number list {text!r}") from None


def _method_list(text: str) -> list[str]:
    return [s.strip() for s in text.split(",") if s.strip()]


def _common(parser: argparse.ArgumentParser, *names: str) -> None:
    flags = {
        "lambda": dict(type=float, help="anchor intensity per m^2"),
        "lambda0": dict(type=float, help="obstacle foot-point intensity per m^2"),
        "range": dict(type=float, help="anchor communication range R in m"),
        "trials": dict(type=int, help="Monte Carlo trials"),
        "seed": dict(type=int, help="master seed (unsigned 64-bit)"),
        "threads": dict(type=int, help="worker processes; does not change results"),
        "epsilon": dict(type=float, help="target blind-spot probability"),
        "delta": dict(type=float, help="containment failure threshold"),
        "kmin": dict(type=int, help="anchors needed for localisation"),
    }
    for name in names:
        parser.add_argument(f"--{name}", dest=name, default=None, **flags[name])
    parser.add_argument("--config", default=None, help="JSON file of flag values")


def _length_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_mutually_exclusive_group()
    group.add_argument("--length", type=_length, default=None, help="obstacle length L in m, or 'inf'")
    group.add_argument("--infinite", action="store_true", help="infinitely long obstacles")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="blindspot", description="Blind-spot probability under correlated blocking."
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_an = sub.add_parser("analytic", help="closed-form and quadrature values")
    an_sub = p_an.add_subparsers(dest="quantity", required=True)
    p = an_sub.add_parser("asymptotic", help="blind-spot probability with line obstacles")
    _common(p, "lambda", "lambda0", "range", "delta", "kmin")
    p = an_sub.add_parser("independent", help="independent-blocking baseline")
    _common(p, "lambda", "lambda0", "range", "kmin")
    p = an_sub.add_parser("conditional", help="blind-spot probability for a given visible area")
    _common(p, "lambda", "kmin")
    p.add_argument("--area", type=float, required=True, help="visible area in m^2")
    p = an_sub.add_parser("check-delta", help="test the cell containment criterion")
    _common(p, "lambda0", "range", "delta")

    p = sub.add_parser("simulate", help="Monte Carlo blind-spot estimate")
    _common(p, "lambda", "lambda0", "range", "trials", "seed", "threads", "kmin")
    _length_flags(p)
    p.add_argument("--out", default=None, help="also write a CSV row here ('-' for stdout)")

    p = sub.add_parser("sweep", help="parameter sweep to CSV")
    _common(p, "lambda", "lambda0", "range", "trials", "seed", "threads", "kmin")
    _length_flags(p)
    p.add_argument("--recipe", choices=sorted(RECIPES), default=None)
    p.add_argument("--vary", choices=["lambda", "L"], default=None)
    p.add_argument("--values", type=_float_list, default=None, help="comma-separated values")
    p.add_argument("--methods", type=_method_list, default=None,
                   help=f"comma-separated subset of {','.join(METHODS)}")
    p.add_argument("--area-draws", dest="area_draws", type=int, default=None,
                   help="obstacle draws for the mean unshadowed area")
    p.add_argument("--out", default="-", help="CSV path, '-' for stdout")

    p = sub.add_parser("design", help="anchor intensity for a target blind-spot probability")
    _common(p, "lambda0", "epsilon", "kmin")

    p = sub.add_parser("validate-cells", help="sample LoS cell areas against the Gamma fit")
    _common(p, "lambda0", "seed", "threads")
    p.add_argument("--samples", type=int, default=None)
    p.add_argument("--out", default=None, help="CSV of areas ('-' for stdout)")
    return parser


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise UsageError("config file must hold a JSON object")
    unknown = set(data) - set(DEFAULTS)
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
    if "length" in data:
        data["length"] = float(data["length"])
    return data


def _resolve(args: argparse.Namespace, overrides: dict | None = None) -> dict:
    """Flags beat the config file, which beats recipe values, which beat defaults."""
    resolved = dict(DEFAULTS)
    resolved.update(overrides or {})
    resolved.update(_load_config(getattr(args, "config", None)))
    for key in DEFAULTS:
        value = getattr(args, key, None)
        if value is not None:
            resolved[key] = value
    if getattr(args, "infinite", False):
        resolved["length"] = math.inf
    return resolved


def _scenario(cfg: dict) -> ScenarioConfig:
    return ScenarioConfig(
        lam=cfg["lambda"], lam0=cfg["lambda0"], R=cfg["range"], L=cfg["length"],
        delta=cfg["delta"], epsilon=cfg["epsilon"], k_min=cfg["kmin"],
    )


def _warn_containment(lam0: float, R: float, delta: float, err) -> None:
    p = analytic.visibility_probability(R, lam0)
    if p >= delta:
        print(
            f"warning: containment criterion not met: exp(-lambda0*pi*R^2/4) = {p:.6g} >= "
            f"delta = {delta:.6g} (need lambda0 > {analytic.min_lambda0_for_delta(R, delta):.6g})",
            file=err,
        )


def _cmd_analytic(args, out, err) -> int:
    cfg = _resolve(args)
    if args.quantity == "asymptotic":
        _warn_containment(cfg["lambda0"], cfg["range"], cfg["delta"], err)
        value = analytic.asymptotic_blindspot(cfg["lambda"], cfg["lambda0"], cfg["kmin"])
    elif args.quantity == "independent":
        value = analytic.independent_blindspot_lines(
            cfg["lambda"], cfg["lambda0"], cfg["range"], cfg["kmin"]
        )
    elif args.quantity == "conditional":
        value = analytic.conditional_blindspot(cfg["lambda"], args.area, cfg["kmin"])
    else:
        lam0, R, delta = cfg["lambda0"], cfg["range"], cfg["delta"]
        p = analytic.visibility_probability(R, lam0)
        need = analytic.min_lambda0_for_delta(R, delta)
        _warn_containment(lam0, R, delta, err)
        print(f"visibility_at_range {fmt_value(p)}", file=out)
        print(f"min_lambda0 {fmt_value(need)}", file=out)
        print(f"criterion_met {'yes' if p < delta else 'no'}", file=out)
        return EXIT_OK
    print(fmt_value(value), file=out)
    return EXIT_OK


def _write_output(path: str, text: str, out, manifest: dict | None) -> None:
    if path == "-":
        out.write(text)
        return
    try:
        Path(path).write_text(text, encoding="utf-8", newline="\n")
        if manifest is not None:
            manifest["sha256"] = hashlib.sha256(text.encode("utf-8")).hexdigest()
            Path(f"{path}.manifest.json").write_text(
                json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
            )
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


def _manifest(command: str, cfg: dict, started: float, rows: int) -> dict:
    resolved = {k: ("inf" if isinstance(v, float) and math.isinf(v) else v) for k, v in cfg.items()}
    return {
        "version": __version__,
        "command": command,
        "resolved_config": resolved,
        "started_at": datetime.fromtimestamp(started, timezone.utc).isoformat(),
        "duration_s": round(time.time() - started, 3),
        "rows_written": rows,
    }


def _cmd_simulate(args, out, err) -> int:
    started = time.time()
    cfg = _resolve(args)
    if cfg["trials"] < 1:
        raise UsageError("--trials must be >= 1")
    sc = _scenario(cfg)
    if sc.infinite:
        _warn_containment(sc.lam0, sc.R, sc.delta, err)
    est = estimate_blindspot(sc, cfg["trials"], cfg["seed"], cfg["threads"])
    lo, hi = est.ci95()
    print(f"value {fmt_value(est.value)}", file=out)
    print(f"stderr {fmt_value(est.stderr)}", file=out)
    print(f"ci95 {fmt_value(lo)} {fmt_value(hi)}", file=out)
    print(f"n_trials {est.n_trials}", file=out)
    print(f"seed {est.master_seed}", file=out)
    if args.out is not None:
        row = SweepRow("mc", sc.lam, sc.lam0, sc.L, sc.R, sc.k_min, est.value, est.stderr,
                       est.n_trials, est.master_seed)
        _write_output(args.out, rows_to_csv([row]), out, _manifest("simulate", cfg, started, 1))
    return EXIT_OK


def _cmd_sweep(args, out, err) -> int:
    started = time.time()
    recipe = RECIPES.get(args.recipe, {})
    cfg = _resolve(args, {k: v for k, v in recipe.items() if k in DEFAULTS})
    vary = args.vary or recipe.get("vary")
    values = args.values if args.values is not None else recipe.get("values")
    methods = args.methods if args.methods is not None else recipe.get("methods")
    if vary is None or values is None:
        raise UsageError("sweep needs --vary and --values (or --recipe)")
    if not values:
        raise UsageError("empty --values list")
    if not methods:
        raise UsageError("empty --methods list")
    lam_given = getattr(args, "lambda") is not None or "lambda" in _load_config(args.config)
    if "target_b_as" in recipe and not lam_given:
        cfg["lambda"] = analytic.design_anchor_intensity(
            cfg["lambda0"], recipe["target_b_as"], cfg["kmin"]
        )
        print(f"fixed lambda = {cfg['lambda']:.9g} (b_as = {recipe['target_b_as']})", file=err)
    if cfg["trials"] < 1:
        raise UsageError("--trials must be >= 1")
    sc = _scenario(cfg)
    rows = run_sweep(sc, vary, values, methods, cfg["trials"], cfg["seed"], cfg["threads"],
                     area_draws=cfg["area_draws"])
    cfg.update(vary=vary, values=list(values), methods=list(methods), recipe=args.recipe)
    _write_output(args.out, rows_to_csv(rows), out, _manifest("sweep", cfg, started, len(rows)))
    return EXIT_OK


def _cmd_design(args, out, err) -> int:
    cfg = _resolve(args)
    eps, lam0, k = cfg["epsilon"], cfg["lambda0"], cfg["kmin"]
    lam_star = analytic.design_anchor_intensity(lam0, eps, k)
    achieved = analytic.asymptotic_blindspot(lam_star, lam0, k)
    print(f"lambda_star {fmt_value(lam_star)}", file=out)
    print(f"achieved_b_as {fmt_value(achieved)}", file=out)
    print(f"roundtrip_error {abs(achieved - eps):.3e}", file=out)
    return EXIT_OK


def cell_summary(sample, lam0: float) -> dict:
    areas = sample.areas
    target = 4.0 / lam0
    mean = math.fsum(areas) / len(areas) if len(areas) else math.nan
    ks = stats.kstest(areas, lambda a: analytic.gamma_cell_area_cdf(a, lam0)).statistic
    return {
        "n_samples": len(areas),
        "n_discarded": sample.n_discarded,
        "mean_area": mean,
        "target_mean": target,
        "relative_error": (mean - target) / target,
        "ks_statistic": float(ks),
    }


def _cmd_validate_cells(args, out, err) -> int:
    started = time.time()
    cfg = _resolve(args)
    if cfg["samples"] < 1:
        raise UsageError("--samples must be >= 1")
    sample = sample_cell_areas(cfg["lambda0"], cfg["samples"], cfg["seed"], cfg["threads"])
    summary = cell_summary(sample, cfg["lambda0"])
    if args.out is not None:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["index", "area"])
        for i, a in enumerate(sample.areas):
            writer.writerow([i, fmt(a)])
        manifest = _manifest("validate-cells", cfg, started, len(sample.areas))
        _write_output(args.out, buf.getvalue(), out, manifest)
    dest = err if args.out == "-" else out
    for key, value in summary.items():
        print(f"{key} {value if isinstance(value, int) else fmt_value(value)}", file=dest)
    return EXIT_OK


COMMANDS = {
    "analytic": _cmd_analytic,
    "simulate": _cmd_simulate,
    "sweep": _cmd_sweep,
    "design": _cmd_design,
    "validate-cells": _cmd_validate_cells,
}


def main(argv: Sequence[str] | None = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args, out, err)
    except (UsageError, ValueError) as exc:
        print(f"error: {exc}", file=err)
        return EXIT_USAGE
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=err)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"I/O failure: {exc}", file=err)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
