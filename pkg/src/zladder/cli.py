"""Command-line interface for the verification experiments.

Each subcommand reads an optional ``key = value`` config file plus flag
overrides, runs one experiment, and writes JSON reports / CSV plot data under
--out.  Exit status: 0 when all hard verdicts pass, 1 on verification failure,
2 on usage errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import harness, ladder as ladder_mod, rscore
from .gridsets import build_g1, build_g2, grid_range
from .harness import ExperimentConfig, ExperimentContext
from .quadrature import integrate_collection


def _add_common_flags(p: argparse.ArgumentParser):
    p.add_argument("--config", type=str, default=None, help="key = value config file")
    p.add_argument("--T", type=float, default=None)
    p.add_argument("--eps", type=float, default=None, dest="epsilon")
    p.add_argument("--H", type=float, default=None, dest="H_override")
    p.add_argument("--x", type=float, default=None)
    p.add_argument("--y", type=float, default=None)
    p.add_argument("--ladder", type=str, default=None, dest="ladder_kind",
                   choices=("asymptotic", "ode"))
    p.add_argument("--rel-tol", type=float, default=None, dest="rel_tol")
    p.add_argument("--abs-tol", type=float, default=None, dest="abs_tol")
    p.add_argument("--correction-terms", type=int, default=None, dest="correction_terms")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", type=str, default=None, dest="output_dir")


def _config_from_args(args) -> ExperimentConfig:
    overrides = {
        k: getattr(args, k, None)
        for k in ("T", "epsilon", "H_override", "x", "y", "ladder_kind",
                  "rel_tol", "abs_tol", "correction_terms", "seed", "output_dir")
    }
    overrides = {k: v for k, v in overrides.items() if v is not None}
    if args.config:
        return harness.config_from_file(args.config, overrides)
    return harness._config_from_strings(overrides)


def _write_csv(path: Path, header, rows):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _finish(cfg, reports, t0, name) -> int:
    out_dir = Path(cfg.output_dir)
    harness.write_report(out_dir / f"{name}.json", cfg, reports, time.time() - t0)
    for r in reports:
        print(f"[{r.verdict:>11}] {r.experiment_id}: measured={r.measured:.6g} "
              f"predicted={r.predicted:.6g} (eq {r.paper_eq})")
    return 1 if harness.hard_failures(reports) else 0


def _cmd_grid(args) -> int:
    cfg = _config_from_args(args)
    points = grid_range(cfg.window)
    _write_csv(Path(cfg.output_dir) / "grid.csv", ["nu", "tau", "t"],
               [[g.nu, repr(g.tau), repr(g.t)] for g in points])
    print(f"{len(points)} grid points in [{cfg.T}, {cfg.T + cfg.window.H}]")
    return 0


def _cmd_gsets(args) -> int:
    cfg = _config_from_args(args)
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name, coll in (("g1", build_g1(cfg.window, cfg.x)),
                       ("g2", build_g2(cfg.window, cfg.y))):
        (out / f"{name}.csv").write_text(coll.to_csv())
        (out / f"{name}.json").write_text(coll.to_json() + "\n")
        print(f"{name}: {len(coll)} intervals, measure {coll.measure():.6f}")
    return 0


def _cmd_ladder(args) -> int:
    cfg = _config_from_args(args)
    ctx = ExperimentContext(cfg, need_mirror=(cfg.ladder_kind == "ode"))
    model = ctx.ladder
    path = Path(cfg.output_dir) / f"ladder-{model.kind}.csv"
    path.parent.mkdir(parents=True, exist_ok=True)
    ladder_mod.save_ladder_csv(model, path, step=1.0)
    print(f"wrote {path} over range [{model.lo:.3f}, {model.hi:.3f}]")
    return 0


def _cmd_integrate(args) -> int:
    cfg = _config_from_args(args)
    t0 = time.time()
    ctx = ExperimentContext(cfg, need_mirror=False)
    coll = ctx.g1 if args.set == "g1" else ctx.g2
    out = integrate_collection(ctx.z, coll, cfg.quad, initial_cuts=ctx.grid_cuts)
    sgn = 1.0 if args.set == "g1" else -1.0
    amp = math.sin(cfg.x if args.set == "g1" else cfg.y)
    pred = sgn * 2.0 / math.pi * ctx.w.H * amp
    print(f"integral over {args.set}: {out.value:.6f} (predicted {pred:.6f}, "
          f"error estimate {out.error_estimate:.2e}, {out.evaluations} evals, "
          f"{time.time() - t0:.1f}s)")
    return 0


def _cmd_verify_theorem(args) -> int:
    cfg = _config_from_args(args)
    t0 = time.time()
    reports = harness.verify_theorem(cfg)
    return _finish(cfg, reports, t0, "verify-theorem")


def _cmd_verify_corollaries(args) -> int:
    cfg = _config_from_args(args)
    t0 = time.time()
    reports = harness.verify_corollaries(cfg)
    return _finish(cfg, reports, t0, "verify-corollaries")


def _cmd_sign_area(args) -> int:
    cfg = _config_from_args(args)
    t0 = time.time()
    reports = harness.verify_sign_area(cfg)
    return _finish(cfg, reports, t0, "sign-area")


def _cmd_scan_shape(args) -> int:
    cfg = _config_from_args(args)
    t0 = time.time()
    rows, report = harness.scan_shape(cfg)
    _write_csv(Path(cfg.output_dir) / "scan-shape.csv",
               ["x", "measured", "predicted"],
               [[repr(x), repr(m), repr(p)] for x, m, p in rows])
    return _finish(cfg, [report], t0, "scan-shape")


def _cmd_report(args) -> int:
    cfg = _config_from_args(args)
    paths = sorted(Path(cfg.output_dir).glob("*.json"))
    if not paths:
        print("no report files found", file=sys.stderr)
        return 1
    rows = harness.merge_reports(paths)
    header = ["T", "H", "x", "y", "experiment_id", "measured", "predicted",
              "paper_eq", "verdict", "source"]
    _write_csv(Path(cfg.output_dir) / "summary.csv", header,
               [[row[k] for k in header] for row in rows])
    print(f"merged {len(paths)} report files into summary.csv ({len(rows)} rows)")
    return 0


def run_cli(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="zladder",
        description="verification experiments for the Z-signal set systems",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    handlers = {
        "grid": _cmd_grid,
        "gsets": _cmd_gsets,
        "ladder": _cmd_ladder,
        "verify-theorem": _cmd_verify_theorem,
        "verify-corollaries": _cmd_verify_corollaries,
        "sign-area": _cmd_sign_area,
        "scan-shape": _cmd_scan_shape,
        "report": _cmd_report,
    }
    for name in handlers:
        p = sub.add_parser(name)
        _add_common_flags(p)
    p_int = sub.add_parser("integrate")
    _add_common_flags(p_int)
    p_int.add_argument("--set", choices=("g1", "g2"), default="g1")
    handlers["integrate"] = _cmd_integrate

    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    return handlers[args.command](args)


def main():
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
