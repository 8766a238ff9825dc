"""Command-line interface: ``colorsa {lattice,decode,mc,tune,fit}``.

Values are resolved as command-line flag > config file (YAML mapping whose
keys are the flag names with underscores) > built-in default.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

import numpy as np
import yaml

from . import __version__
from .anneal import BETA_CONVENTIONS, SWEEP_ORDERS, TABLE_SCHEDULES, AnnealSchedule
from .decoder import DEFAULT_EXACT_CAP, OracleInfeasible, decode, observe, score
from .experiment import (
    CSV_COLUMNS,
    TUNE_SCHEMA,
    WORKERS_ENV,
    ExperimentConfig,
    read_records,
    run_campaign,
    sidecar_path,
    trial_rng,
    tuning_sweep,
    write_json,
)
from .fit import fit_threshold
from .lattice import build_lattice
from .noise import KINDS, NoiseModel, sample

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3
EXIT_IO = 4


class ConfigError(ValueError):
    pass


def _schedule_table() -> str:
    lines = ["built-in annealing schedules (cycles K, iterations R):"]
    for model, rows in TABLE_SCHEDULES.items():
        cells = ", ".join(f"d={d}: ({k}, {r})" for d, (k, r) in rows.items())
        lines.append(f"  {model:<17} {cells}")
    return "\n".join(lines)


def parse_p_range(text) -> list[float]:
    """``start:stop:step`` (inclusive), a comma list, or a single value."""
    if isinstance(text, (int, float)):
        return [float(text)]
    if isinstance(text, (list, tuple)):
        return [float(v) for v in text]
    text = str(text).strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigError(f"p range must be start:stop:step, got {text!r}")
        a, b, step = (float(v) for v in parts)
        if step <= 0 or b < a:
            raise ConfigError(f"bad p range {text!r}")
        count = int(np.floor((b - a) / step + 1e-9)) + 1
        return [round(a + k * step, 12) for k in range(count)]
    return [float(v) for v in text.split(",") if v.strip()]


def parse_int_list(text) -> list[int]:
    if isinstance(text, int):
        return [text]
    if isinstance(text, (list, tuple)):
        return [int(v) for v in text]
    return [int(v) for v in str(text).split(",") if v.strip()]


def parse_window(text):
    if text is None:
        return None
    if isinstance(text, (list, tuple)):
        lo, hi = text
    else:
        parts = str(text).split(":")
        if len(parts) != 2:
            raise ConfigError(f"window must be lo:hi, got {text!r}")
        lo, hi = parts
    return float(lo), float(hi)


DEFAULTS = {
    "lattice": {"d": None, "out": None},
    "decode": {
        "model": None, "d": None, "p": None, "seed": 0, "method": "sa", "cycles": None,
        "iterations": None, "beta_min": None, "beta_max": None, "beta_convention": "cooling", "order": "random",
        "cap": DEFAULT_EXACT_CAP, "out": None, "timing": False,
    },
    "mc": {
        "model": None, "d": None, "p": None, "trials": 10_000, "seed": 0, "method": "sa",
        "cycles": None, "iterations": None, "beta_min": None, "beta_max": None,
        "beta_convention": "cooling", "order": "random", "cap": DEFAULT_EXACT_CAP, "out": None, "workers": None,
        "timing": False,
    },
    "tune": {
        "model": None, "d": None, "p": None, "trials": 10_000, "seed": 0,
        "grid_cycles": "1,2,5,10,20,30,50,70,100", "grid_iterations": "1,2,5,10",
        "golden": None, "beta_min": None, "beta_max": None, "beta_convention": "cooling", "order": "random",
        "cap": DEFAULT_EXACT_CAP, "out": None, "workers": None, "timing": False,
    },
    "fit": {
        "input": None, "window": None, "min_distances": 3, "min_points": 3,
        "bootstrap": 200, "seed": 0, "out": None,
    },
}


def _help(cmd: str, key: str, text: str) -> str:
    default = DEFAULTS[cmd][key]
    return f"{text} (default: {default})" if default is not None else text


def _add(p, cmd, flag, help_text, **kw):
    key = flag.lstrip("-").replace("-", "_")
    p.add_argument(flag, dest=key, default=None, help=_help(cmd, key, help_text), **kw)


def _schedule_flags(p, cmd):
    _add(p, cmd, "--beta-min", "initial inverse temperature; derived per problem when unset", type=float)
    _add(p, cmd, "--beta-max", "final inverse temperature; derived per problem when unset", type=float)
    _add(p, cmd, "--beta-convention", "rule for derived inverse temperatures", choices=BETA_CONVENTIONS)
    _add(p, cmd, "--order", "spin visiting order within a sweep", choices=SWEEP_ORDERS)
    _add(p, cmd, "--cap", "largest spin count per sector the exact oracle will enumerate", type=int)


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.RawDescriptionHelpFormatter
    parser = argparse.ArgumentParser(
        prog="colorsa",
        description="Decode (4.8.8) color codes by simulated annealing of multi-body Ising Hamiltonians.",
        epilog=_schedule_table()
        + f"\n\nexit codes: {EXIT_CONFIG} config error, {EXIT_INFEASIBLE} exact oracle infeasible, {EXIT_IO} I/O error"
        + f"\nworker count: --workers, else ${WORKERS_ENV}, else 1",
        formatter_class=fmt,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("lattice", help="print the code structure as JSON", formatter_class=fmt)
    p.add_argument("--config", help="YAML file with flag values")
    _add(p, "lattice", "--d", "code distance (odd, >= 3)", type=int)
    _add(p, "lattice", "--out", "output JSON path (stdout if unset)")

    p = sub.add_parser("decode", help="sample one error, decode it, print a JSON result",
                       epilog=_schedule_table(), formatter_class=fmt)
    p.add_argument("--config", help="YAML file with flag values")
    _add(p, "decode", "--model", "noise model", choices=KINDS)
    _add(p, "decode", "--d", "code distance", type=int)
    _add(p, "decode", "--p", "physical error rate", type=float)
    _add(p, "decode", "--seed", "master seed", type=int)
    _add(p, "decode", "--method", "minimizer", choices=("sa", "exact"))
    _add(p, "decode", "--cycles", "SA temperature steps K (table default if unset)", type=int)
    _add(p, "decode", "--iterations", "SA restarts R (table default if unset)", type=int)
    _schedule_flags(p, "decode")
    _add(p, "decode", "--out", "output JSON path (stdout if unset)")
    p.add_argument("--timing", action="store_true", default=None,
                   help="include wall time (makes output run-dependent)")

    p = sub.add_parser("mc", help="Monte Carlo logical error rates to CSV",
                       epilog=_schedule_table(), formatter_class=fmt)
    p.add_argument("--config", help="YAML file with flag values")
    _add(p, "mc", "--model", "noise model", choices=KINDS)
    _add(p, "mc", "--d", "distances, comma separated")
    _add(p, "mc", "--p", "error rates: start:stop:step, comma list or single value")
    _add(p, "mc", "--trials", "trials per grid point", type=int)
    _add(p, "mc", "--seed", "master seed", type=int)
    _add(p, "mc", "--method", "minimizer", choices=("sa", "exact"))
    _add(p, "mc", "--cycles", "SA temperature steps K for every d (table default if unset)", type=int)
    _add(p, "mc", "--iterations", "SA restarts R for every d (table default if unset)", type=int)
    _schedule_flags(p, "mc")
    _add(p, "mc", "--out", "CSV path; the resolved config goes to <out>.json (stdout CSV if unset)")
    _add(p, "mc", "--workers", f"worker processes (else ${WORKERS_ENV}, else 1)", type=int)
    p.add_argument("--timing", action="store_true", default=None,
                   help="fill the timing columns (makes output run-dependent)")

    p = sub.add_parser("tune", help="paired SA-vs-exact sweep over (cycles, iterations)", formatter_class=fmt)
    p.add_argument("--config", help="YAML file with flag values")
    _add(p, "tune", "--model", "noise model", choices=KINDS)
    _add(p, "tune", "--d", "code distance", type=int)
    _add(p, "tune", "--p", "physical error rate", type=float)
    _add(p, "tune", "--trials", "paired trials", type=int)
    _add(p, "tune", "--seed", "master seed", type=int)
    _add(p, "tune", "--grid-cycles", "cycle counts K, comma separated")
    _add(p, "tune", "--grid-iterations", "restart counts R, comma separated")
    _add(p, "tune", "--golden", "frozen exact logical error rate, used instead of running the oracle", type=float)
    _schedule_flags(p, "tune")
    _add(p, "tune", "--out", "CSV path; the report goes to <out>.json (JSON to stdout if unset)")
    _add(p, "tune", "--workers", f"worker processes (else ${WORKERS_ENV}, else 1)", type=int)
    p.add_argument("--timing", action="store_true", default=None,
                   help="record mean SA wall time per grid point (makes output run-dependent)")

    p = sub.add_parser("fit", help="fit threshold and exponent from an mc CSV", formatter_class=fmt)
    p.add_argument("--config", help="YAML file with flag values")
    _add(p, "fit", "--input", "CSV produced by mc")
    _add(p, "fit", "--window", "p window lo:hi (all points if unset)")
    _add(p, "fit", "--min-distances", "minimum number of distances", type=int)
    _add(p, "fit", "--min-points", "minimum points per distance inside the window", type=int)
    _add(p, "fit", "--bootstrap", "bootstrap resamples for standard errors", type=int)
    _add(p, "fit", "--seed", "bootstrap seed", type=int)
    _add(p, "fit", "--out", "output JSON path (stdout if unset)")
    return parser


def resolve(args: argparse.Namespace) -> dict:
    cmd = args.command
    file_cfg = {}
    if getattr(args, "config", None):
        with open(args.config, encoding="utf-8") as fh:
            file_cfg = yaml.safe_load(fh) or {}
        if not isinstance(file_cfg, dict):
            raise ConfigError("config file must contain a mapping")
        unknown = set(file_cfg) - set(DEFAULTS[cmd])
        if unknown:
            raise ConfigError(f"unknown config keys for {cmd}: {sorted(unknown)}")
    out = {}
    for key, default in DEFAULTS[cmd].items():
        val = getattr(args, key, None)
        if val is None:
            val = file_cfg.get(key, default)
        out[key] = val
    return out


def _require(cfg: dict, *keys):
    missing = [k for k in keys if cfg.get(k) is None]
    if missing:
        raise ConfigError("missing required setting(s): " + ", ".join("--" + k.replace("_", "-") for k in missing))


def _emit_json(payload: dict, path: str | None):
    if path:
        write_json(path, payload)
    else:
        json.dump(payload, sys.stdout, indent=2, sort_keys=True)
        sys.stdout.write("\n")


def _schedule(cfg: dict, model: str, d: int) -> AnnealSchedule:
    K, R = TABLE_SCHEDULES.get(model, {}).get(d, (None, None))
    K = cfg["cycles"] if cfg["cycles"] is not None else K
    R = cfg["iterations"] if cfg["iterations"] is not None else R
    if K is None or R is None:
        raise ConfigError(f"no built-in schedule for {model} d={d}; pass --cycles and --iterations")
    return AnnealSchedule(cycles=int(K), iterations=int(R), beta_min=cfg["beta_min"],
                          beta_max=cfg["beta_max"], beta_convention=cfg["beta_convention"], order=cfg["order"])


def cmd_lattice(cfg):
    _require(cfg, "d")
    _emit_json(build_lattice(int(cfg["d"])).to_dict(), cfg["out"])


def _bits(v):
    return np.flatnonzero(v).tolist()


def cmd_decode(cfg):
    _require(cfg, "model", "d", "p")
    model, d, p = cfg["model"], int(cfg["d"]), float(cfg["p"])
    lat = build_lattice(d)
    noise = NoiseModel(model, p)
    sched = _schedule(cfg, model, d) if cfg["method"] == "sa" else None
    rng = trial_rng(int(cfg["seed"]), model, d, p, 0)
    truth = sample(noise, lat, rng)
    sa_seed = int(rng.integers(2**63))
    obs = observe(lat, model, truth)
    res = decode(lat, model, obs, cfg["method"], sched, sa_seed, int(cfg["cap"]))
    score(lat, model, truth, res)
    if model == "phenomenological":
        sampled = {"data": [_bits(r) for r in truth.truth.data], "meas": [_bits(r) for r in truth.truth.meas]}
        observed = [_bits(r) for r in obs]
    else:
        sampled = {"x": _bits(truth.x), "z": _bits(truth.z)}
        observed = [_bits(s) for s in obs] if model == "depolarizing" else _bits(obs)
    payload = {
        "schema": "colorsa.decode/1",
        "config": {k: v for k, v in cfg.items() if k != "out"},
        "schedule": None if sched is None else [sched.cycles, sched.iterations],
        "sampled_error": sampled,
        "observed_syndrome": observed,
        "result": res.to_dict(timing=bool(cfg["timing"])),
    }
    _emit_json(payload, cfg["out"])


def cmd_mc(cfg):
    _require(cfg, "model", "d", "p")
    ecfg = ExperimentConfig(
        model=cfg["model"], distances=parse_int_list(cfg["d"]), ps=parse_p_range(cfg["p"]),
        trials=int(cfg["trials"]), method=cfg["method"], cycles=cfg["cycles"],
        iterations=cfg["iterations"], beta_min=cfg["beta_min"], beta_max=cfg["beta_max"],
        beta_convention=cfg["beta_convention"], order=cfg["order"], seed=int(cfg["seed"]), out=cfg["out"],
        workers=cfg["workers"], timing=bool(cfg["timing"]), cap=int(cfg["cap"]),
    )
    try:
        ecfg.validate()
    except KeyError as exc:
        raise ConfigError(str(exc.args[0])) from None
    records = run_campaign(ecfg)
    if not cfg["out"]:
        w = csv.writer(sys.stdout, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for rec in records:
            w.writerow(rec.row())


def cmd_tune(cfg):
    _require(cfg, "model", "d", "p")
    grid = [(K, R) for R in parse_int_list(cfg["grid_iterations"]) for K in parse_int_list(cfg["grid_cycles"])]
    report = tuning_sweep(
        cfg["model"], int(cfg["d"]), float(cfg["p"]), grid, int(cfg["trials"]), seed=int(cfg["seed"]),
        golden_exact=cfg["golden"], cap=int(cfg["cap"]), beta_min=cfg["beta_min"],
        beta_max=cfg["beta_max"], beta_convention=cfg["beta_convention"], order=cfg["order"], workers=cfg["workers"],
        timing=bool(cfg["timing"]),
    )
    payload = report.to_dict()
    payload["schema"] = TUNE_SCHEMA
    payload["config"] = {k: v for k, v in cfg.items() if k not in ("out", "workers")}
    payload["selected_label"] = report.selection_label()
    if cfg["out"]:
        report.write_csv(cfg["out"])
        write_json(sidecar_path(cfg["out"]), payload)
    else:
        _emit_json(payload, None)
    print(f"selected (cycles, iterations): {report.selection_label()}", file=sys.stderr)


def cmd_fit(cfg):
    _require(cfg, "input")
    records = read_records(cfg["input"])
    res = fit_threshold(
        records, window=parse_window(cfg["window"]), min_distances=int(cfg["min_distances"]),
        min_points=int(cfg["min_points"]), n_boot=int(cfg["bootstrap"]), seed=int(cfg["seed"]),
    )
    payload = res.to_dict()
    payload["config"] = {k: v for k, v in cfg.items() if k != "out"}
    _emit_json(payload, cfg["out"])
    print(res.summary(), file=sys.stderr)


COMMANDS = {"lattice": cmd_lattice, "decode": cmd_decode, "mc": cmd_mc, "tune": cmd_tune, "fit": cmd_fit}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_CONFIG
    try:
        cfg = resolve(args)
        COMMANDS[args.command](cfg)
    except OracleInfeasible as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, KeyError, TypeError, yaml.YAMLError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
