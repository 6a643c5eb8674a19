"""``bvlab`` command line: verification sweeps, case studies and file-based tools.

Exit codes: 0 success, 1 identity failure, 2 input error.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any

import numpy as np

from .added_error import ROUTES, added_error_report
from .bridge import checksum
from .ensemble import estimate_C, read_error_matrix_csv
from .experiments import (
    C_ERROR_SIGNALS,
    REFERENCE_CORRELATIONS,
    GroupRecord,
    SweepPoint,
    run_case1,
    run_case2,
)
from .geometry import boundary_moments, load_scenario_json
from .james import decompose_log, read_prediction_log, write_decomposition
from .learners import (
    CSVSchema,
    Dataset,
    DatasetFormatError,
    MLPConfig,
    load_csv,
    synthetic_segmentation,
)
from .plots import emit_plot
from .verify import SUITES, VerifyConfig, run_all

CONFIG_SCHEMA_VERSION = 1
FORMATS = ("csv", "json", "both")
EXIT_OK, EXIT_IDENTITY, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    """Bad config, flags or input files; maps to exit code 2."""


# ---------------------------------------------------------------------------
# Configs
# ---------------------------------------------------------------------------


@dataclass
class Case1Config:
    dataset: str = ""
    groups: int = 200
    group_size: int = 6
    seed: int = 0
    c_mode: str = "boundary"
    workers: int = 1
    mlp: MLPConfig = field(default_factory=lambda: MLPConfig(hidden_nodes=16, epochs=8))


@dataclass
class Case2Config:
    dataset: str = ""
    ladder: list[list[int]] = field(default_factory=lambda: [[16, 32], [8, 8], [2, 4], [1, 1]])
    n_classifiers: int = 50
    seed: int = 0
    workers: int = 1
    mlp: MLPConfig = field(default_factory=MLPConfig)


def _check_counts(cfg, names):
    for name in names:
        if getattr(cfg, name) < 1:
            raise InputError(f"{name} must be >= 1, got {getattr(cfg, name)}")


def _apply(obj, doc: dict, where: str):
    """Copy keys from ``doc`` onto dataclass ``obj``; unknown keys are errors."""
    known = {f.name for f in fields(obj)}
    unknown = set(doc) - known
    if unknown:
        raise InputError(f"{where}: unknown config keys {sorted(unknown)}")
    updates = {}
    for key, val in doc.items():
        if key == "mlp":
            updates[key] = _mlp_from(val, f"{where}.mlp")
        elif key in ("suites", "routes"):
            updates[key] = tuple(val)
        else:
            updates[key] = val
    try:
        return replace(obj, **updates)
    except (TypeError, ValueError) as exc:
        raise InputError(f"{where}: {exc}") from None


def _mlp_from(doc, where):
    if not isinstance(doc, dict):
        raise InputError(f"{where} must be an object")
    unknown = set(doc) - {f.name for f in fields(MLPConfig)}
    if unknown:
        raise InputError(f"{where}: unknown config keys {sorted(unknown)}")
    try:
        return MLPConfig(**doc)
    except (TypeError, ValueError) as exc:
        raise InputError(f"{where}: {exc}") from None


def load_config(path: str | None, command: str, default):
    """Read a versioned JSON config for ``command`` over ``default``."""
    if path is None:
        return default
    try:
        doc = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise InputError(f"{path}: config file not found") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}:{exc.lineno}: invalid JSON ({exc.msg})") from None
    if not isinstance(doc, dict):
        raise InputError(f"{path}: config must be a JSON object")
    version = doc.pop("schema_version", None)
    if version != CONFIG_SCHEMA_VERSION:
        raise InputError(f"{path}: schema_version must be {CONFIG_SCHEMA_VERSION}, got {version!r}")
    cmd = doc.pop("command", command)
    if cmd != command:
        raise InputError(f"{path}: config is for {cmd!r}, not {command!r}")
    return _apply(default, doc, path)


def _load_dataset(spec: str, schema: CSVSchema = CSVSchema()) -> Dataset:
    """A CSV path, or ``synthetic:SEED`` for the in-memory surrogate."""
    if not spec:
        raise InputError("no dataset given (use --dataset PATH or synthetic:SEED)")
    if spec.startswith("synthetic:"):
        try:
            seed = int(spec.split(":", 1)[1])
        except ValueError:
            raise InputError(f"bad synthetic dataset spec {spec!r}") from None
        X, y, split, names = synthetic_segmentation(seed)
        return Dataset(X, y, split, names).standardized()
    try:
        return load_csv(spec, schema)
    except FileNotFoundError:
        raise InputError(f"{spec}: dataset not found") from None
    except DatasetFormatError as exc:
        raise InputError(str(exc)) from None


# ---------------------------------------------------------------------------
# Output helpers
# ---------------------------------------------------------------------------


def _json_default(x):
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        return float(x)
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, tuple):
        return list(x)
    raise TypeError(f"not JSON serializable: {type(x).__name__}")


def write_json(path: Path, doc: Any) -> Path:
    path.write_text(json.dumps(doc, indent=2, sort_keys=True, default=_json_default) + "\n")
    return path


def write_rows_csv(path: Path, rows: list[dict]) -> Path:
    cols = list(dict.fromkeys(c for r in rows for c in r))
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=cols, restval="", lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({c: repr(float(v)) if isinstance(v, (float, np.floating)) else v for c, v in r.items()})
    return path


def _config_doc(cfg) -> dict:
    doc = asdict(cfg)
    doc["schema_version"] = CONFIG_SCHEMA_VERSION
    return doc


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_verify(args) -> int:
    cfg = load_config(args.config, "verify", VerifyConfig())
    updates = {}
    if args.seed is not None:
        updates["seed"] = args.seed
    if args.routes is not None:
        updates["routes"] = tuple(r for r in args.routes.split(",") if r)
    if args.suites is not None:
        updates["suites"] = tuple(s for s in args.suites.split(",") if s)
    if args.inject_median_shift:
        updates["median_shift"] = args.inject_median_shift
    try:
        cfg = replace(cfg, **updates)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    report = run_all(cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    doc = report.to_dict()
    doc["config"] = _config_doc(cfg)
    if args.format in ("json", "both"):
        write_json(out / "verify.json", doc)
    if args.format in ("csv", "both"):
        summary = [
            {"suite": s.name, "cases": s.cases, "failures": s.failures,
             **{f"max_{k}": v for k, v in sorted(s.max_error.items())}}
            for s in report.suites
        ]
        for row in summary:
            write_rows_csv(out / f"verify_{row['suite']}.csv", [row])
        for s in report.suites:
            if s.rows:
                write_rows_csv(out / f"verify_{s.name}_cases.csv", [_flat(r) for r in s.rows])
    print(report.table())
    return EXIT_OK if report.ok else EXIT_IDENTITY


def _flat(row: dict) -> dict:
    out = {}
    for k, v in row.items():
        if isinstance(v, dict):
            for k2, v2 in v.items():
                out[f"{k}.{k2}"] = v2
        elif isinstance(v, (list, tuple)):
            out[k] = ";".join(repr(x) for x in v)
        else:
            out[k] = v
    return out


def _case_common(cfg, args):
    updates = {}
    if args.dataset is not None:
        updates["dataset"] = args.dataset
    if args.seed is not None:
        updates["seed"] = args.seed
    if getattr(args, "workers", None) is not None:
        updates["workers"] = args.workers
    return updates


def cmd_case1(args) -> int:
    cfg = load_config(args.config, "case1", Case1Config())
    updates = _case_common(cfg, args)
    if args.groups is not None:
        updates["groups"] = args.groups
    if args.group_size is not None:
        updates["group_size"] = args.group_size
    if args.c_mode is not None:
        updates["c_mode"] = args.c_mode
    cfg = replace(cfg, **updates)
    _check_counts(cfg, ("groups", "group_size", "workers"))
    if cfg.groups < 2:
        raise InputError("case1 needs at least 2 groups")
    if cfg.group_size < 2:
        raise InputError("correlation C is undefined for groups with fewer than 2 classifiers")
    if cfg.c_mode not in C_ERROR_SIGNALS:
        raise InputError(f"c_mode must be one of {C_ERROR_SIGNALS}")
    data = _load_dataset(cfg.dataset)
    res = run_case1(
        data, cfg.mlp, groups=cfg.groups, group_size=cfg.group_size,
        seed=cfg.seed, c_mode=cfg.c_mode, workers=cfg.workers,
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rows = [asdict(g) for g in res.groups]
    summary = {
        "config": _config_doc(cfg),
        "dataset": {"classes": data.class_names, "train": int(data.train[1].size), "test": int(data.test[1].size)},
        "correlations": res.correlations,
        "reference_correlations": REFERENCE_CORRELATIONS,
        "estimators": {
            "ve": "James VE of hard votes, point-mass response on the observed label (noise-free)",
            "tg_variance": "across-classifier posterior variance, averaged over classes and patterns",
            "C": f"mean pairwise Pearson correlation of error signals, mode {cfg.c_mode!r}",
            "ensemble_gain": "accuracy of the posterior-averaging ensemble minus mean member accuracy",
        },
        "checks": {
            "tg_variance~ve >= 0.3": res.correlations["tg_variance~ve"] >= 0.3,
            "error~tg_variance >= 0.2": res.correlations["error~tg_variance"] >= 0.2,
            "C~ensemble_gain <= -0.2": res.correlations["C~ensemble_gain"] <= -0.2,
        },
    }
    if args.format in ("json", "both"):
        write_json(out / "case1_summary.json", summary)
        write_json(out / "case1_groups.json", rows)
    if args.format in ("csv", "both"):
        write_rows_csv(out / "case1_groups.csv", rows)
        write_rows_csv(out / "case1_correlations.csv", [
            {"pair": k, "ours": v, "reference": REFERENCE_CORRELATIONS[k]} for k, v in res.correlations.items()
        ])
    _case1_plots(out, res.groups)
    _print_case1(res, summary)
    return EXIT_OK


def _case1_plots(out: Path, groups: list[GroupRecord]):
    col = {f.name: [getattr(g, f.name) for g in groups] for f in fields(GroupRecord)}
    emit_plot(out / "case1_tg_variance_vs_ve", col["tg_variance"], col["ve"],
              xname="tg_variance", yname="ve", title="T&G variance vs VE per group")
    emit_plot(out / "case1_error_vs_tg_variance", col["error"], col["tg_variance"],
              xname="error", yname="tg_variance", title="Error rate vs T&G variance per group")
    emit_plot(out / "case1_C_vs_gain", col["C"], col["ensemble_gain"],
              xname="C", yname="ensemble_gain", title="Correlation C vs ensemble gain per group")


def _print_case1(res, summary):
    print(f"{'pair':<20} {'ours':>8} {'reference':>10}")
    for k, v in res.correlations.items():
        print(f"{k:<20} {v:>8.3f} {REFERENCE_CORRELATIONS[k]:>10.3f}")
    for name, ok in summary["checks"].items():
        print(f"{'pass' if ok else 'FAIL'}  {name}")


def _parse_ladder(text: str) -> list[list[int]]:
    out = []
    for item in text.split(","):
        try:
            h, e = item.strip().split("/")
            out.append([int(h), int(e)])
        except ValueError:
            raise InputError(f"bad ladder entry {item!r}; expected NODES/EPOCHS") from None
    return out


def cmd_case2(args) -> int:
    cfg = load_config(args.config, "case2", Case2Config())
    updates = _case_common(cfg, args)
    if args.ladder is not None:
        updates["ladder"] = _parse_ladder(args.ladder)
    if args.classifiers is not None:
        updates["n_classifiers"] = args.classifiers
    cfg = replace(cfg, **updates)
    _check_counts(cfg, ("n_classifiers", "workers"))
    if not cfg.ladder:
        raise InputError("ladder must not be empty")
    if cfg.n_classifiers < 2:
        raise InputError("need at least 2 classifiers per sweep point")
    for rung in cfg.ladder:
        if len(rung) != 2 or min(rung) < 1:
            raise InputError(f"bad ladder entry {rung}; nodes and epochs must be >= 1")
    data = _load_dataset(cfg.dataset)
    points = run_case2(
        data, [tuple(r) for r in cfg.ladder], cfg.mlp,
        n_classifiers=cfg.n_classifiers, seed=cfg.seed, workers=cfg.workers,
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rows = [asdict(p) for p in points]
    summary = {
        "config": _config_doc(cfg),
        "points": rows,
        "estimators": {"ve": "James VE of hard votes, point-mass response on the observed label (noise-free)"},
    }
    if len(points) >= 3:
        strong, weak, mid = points[0], points[-1], points[1:-1]
        summary["checks"] = {
            "weakest VE < 0": weak.ve < 0,
            "strongest VE > 0": strong.ve > 0,
            "|strongest VE| < |mid-ladder VE|": all(abs(strong.ve) < abs(p.ve) for p in mid),
        }
    if args.format in ("json", "both"):
        write_json(out / "case2_summary.json", summary)
    if args.format in ("csv", "both"):
        write_rows_csv(out / "case2_sweep.csv", rows)
    _case2_plot(out, points)
    print(f"{'nodes/epochs':<13} {'error':>7} {'VE':>9} {'tg_var':>9}")
    for p in points:
        print(f"{p.hidden_nodes:>5}/{p.epochs:<7} {p.error:>7.3f} {p.ve:>9.4f} {p.tg_variance:>9.5f}")
    for name, ok in summary.get("checks", {}).items():
        print(f"{'pass' if ok else 'FAIL'}  {name}")
    return EXIT_OK


def _case2_plot(out: Path, points: list[SweepPoint]):
    order = sorted(points, key=lambda p: p.error)
    emit_plot(out / "case2_error_vs_ve", [p.error for p in order], [p.ve for p in order],
              xname="error", yname="ve", kind="line", title="Error rate vs VE along the ladder", hline=0.0)


def cmd_decompose(args) -> int:
    try:
        log = read_prediction_log(args.log, k=args.k)
    except FileNotFoundError:
        raise InputError(f"{args.log}: prediction log not found") from None
    except ValueError as exc:
        raise InputError(str(exc)) from None
    rows, total = decompose_log(log)
    paths = write_decomposition(rows, total, Path(args.out), args.format)
    print(f"{len(rows)} patterns, k={log.k}: loss={total.expected_loss:.6g} "
          f"var_y={total.var_y:.6g} se={total.se:.6g} ve={total.ve:.6g}")
    for p in paths:
        print(f"wrote {p}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    try:
        doc = load_scenario_json(args.scenario)
    except FileNotFoundError:
        raise InputError(f"{args.scenario}: scenario file not found") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{args.scenario}:{exc.lineno}: invalid JSON ({exc.msg})") from None
    except (ValueError, KeyError, TypeError) as exc:
        raise InputError(f"{args.scenario}: {exc}") from None
    routes = ROUTES if args.routes is None else tuple(r for r in args.routes.split(",") if r)
    bad = set(routes) - set(ROUTES)
    if bad:
        raise InputError(f"unknown routes {sorted(bad)}; choose from {ROUTES}")
    seed = 0 if args.seed is None else args.seed
    bridge = checksum(doc.scenario, doc.boundary)
    beta, var_b, m = boundary_moments(doc.boundary)
    added = added_error_report(doc.scenario, doc.noise, doc.boundary, routes=routes, seed=seed, n=args.samples)
    ok = bridge.within(1e-5) and added.ok
    result = {
        "scenario": doc.scenario.to_json(),
        "noise": asdict(doc.noise),
        "boundary": {
            "form": doc.boundary.form, "beta": beta, "var_b": var_b, "median": m,
            "truncated_mass": doc.boundary.truncated_mass,
        },
        "bridge": bridge.to_dict(),
        "added_error": added.to_dict(),
        "seed": seed,
        "ok": ok,
    }
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.format in ("json", "both"):
        write_json(out / "simulate.json", result)
    if args.format in ("csv", "both"):
        write_rows_csv(out / "simulate.csv", [{**bridge.to_dict(), "truncated_mass": doc.boundary.truncated_mass}])
    print(f"SE closed {bridge.se_closed:.10g}  numeric {bridge.se_numeric:.10g}")
    print(f"VE closed {bridge.ve_closed:.10g}  numeric {bridge.ve_numeric:.10g}")
    print(f"SE + VE - R_add = {bridge.checksum_residual:.3e}")
    for name, good in sorted(added.agreement.items()):
        print(f"{'pass' if good else 'FAIL'}  {name}")
    return EXIT_OK if ok else EXIT_IDENTITY


def cmd_correlate(args) -> int:
    mats = []
    for path in args.matrices:
        try:
            mats.append(read_error_matrix_csv(path))
        except FileNotFoundError:
            raise InputError(f"{path}: error matrix not found") from None
        except ValueError as exc:
            raise InputError(str(exc)) from None
    priors = None
    if args.priors is not None:
        try:
            priors = [float(p) for p in args.priors.split(",")]
        except ValueError:
            raise InputError("priors must be comma-separated numbers") from None
    try:
        summary = estimate_C(mats, priors)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_json(out / "correlation.json", summary.to_dict())
    print(f"C = {summary.overall:.6g} ({summary.excluded_pairs} pairs excluded)")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default="bvlab-out", help="output directory (default: bvlab-out)")
    common.add_argument("--format", choices=FORMATS, default="both", help="table format (default: both)")
    common.add_argument("--seed", type=int, default=None, help="base seed (overrides config)")

    ap = argparse.ArgumentParser(prog="bvlab", description="Bias/variance laboratory for 0/1-loss classifiers.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", parents=[common], help="randomized identity suites")
    p.add_argument("--config", help="JSON config (schema_version 1)")
    p.add_argument("--routes", help=f"comma-separated subset of {','.join(ROUTES)}")
    p.add_argument("--suites", help=f"comma-separated subset of {','.join(SUITES)}")
    p.add_argument("--inject-median-shift", type=float, default=0.0, help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_verify)

    for name, func, helptext in (
        ("case1", cmd_case1, "variance/VE/correlation study over groups of networks"),
        ("case2", cmd_case2, "error and VE along a nodes/epochs ladder"),
    ):
        p = sub.add_parser(name, parents=[common], help=helptext)
        p.add_argument("--config", help="JSON config (schema_version 1)")
        p.add_argument("--dataset", help="dataset CSV, or synthetic:SEED")
        p.add_argument("--workers", type=int, default=None, help="parallel training processes")
        if name == "case1":
            p.add_argument("--groups", type=int, default=None)
            p.add_argument("--group-size", type=int, default=None)
            p.add_argument("--c-mode", choices=C_ERROR_SIGNALS, default=None)
        else:
            p.add_argument("--ladder", help="e.g. 16/32,8/8,2/4,1/1")
            p.add_argument("--classifiers", type=int, default=None)
        p.set_defaults(func=func)

    p = sub.add_parser("decompose", parents=[common], help="James decomposition of a prediction log")
    p.add_argument("log", help="CSV with run_id,pattern_id,predicted_class,true_class")
    p.add_argument("--k", type=int, default=None, help="number of classes (default: inferred)")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("simulate", parents=[common], help="bridge and added-error report for a scenario JSON")
    p.add_argument("scenario", help="scenario JSON")
    p.add_argument("--routes", help=f"comma-separated subset of {','.join(ROUTES)}")
    p.add_argument("--samples", type=int, default=1_000_000, help="Monte Carlo sample count")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("correlate", parents=[common], help="correlation C from per-class error matrices")
    p.add_argument("matrices", nargs="+", help="one CSV per class: rows classifiers, columns patterns")
    p.add_argument("--priors", help="comma-separated class priors (default: uniform)")
    p.set_defaults(func=cmd_correlate)
    return ap


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (InputError, ValueError, OSError) as exc:
        # library code raises ValueError only for bad inputs
        print(f"bvlab {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
