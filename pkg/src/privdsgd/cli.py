"""Command-line entry point: ``privdsgd run|sweep|budget|validate|analyze``.

Exit codes: 0 success, 2 configuration error, 3 a validated condition
failed, 4 numerical divergence.
"""

from __future__ import annotations

import argparse
import itertools
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import artifacts
from .analysis import fit_rate, high_prob_check, oracle_complexity
from .config import RunConfig, parse_config, resolve
from .errors import ConfigError, NonPositiveGap, NumericalDivergence, PrivDSGDError
from .privacy import cumulative_budget
from .simulator import build_components, run

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_VALIDATION = 3
EXIT_DIVERGENCE = 4

OUT_ENV = "PRIVDSGD_OUT"


def _out_dir(args) -> Path:
    return Path(args.out or os.environ.get(OUT_ENV) or "out")


def _load(args) -> RunConfig:
    if not args.config:
        raise ConfigError("--config is required")
    cfg = parse_config(args.config)
    if getattr(args, "seed", None) is not None:
        cfg = cfg.with_overrides({"run.seed": args.seed})
    return cfg


def _meta(cfg: RunConfig, seed: int) -> dict:
    return {"config": cfg.to_dict(), "seed": int(seed)}


def _slope(traj, fraction: float):
    last = int(traj.k[-1])
    try:
        return fit_rate(traj, (max(1, int(last * (1 - fraction))), last)).slope
    except (NonPositiveGap, ValueError):
        return None


def _seeds(cfg: RunConfig) -> list[int]:
    base = int(cfg.run["seed"])
    return [base + i for i in range(int(cfg.run["ensemble"]))]


def cmd_run(args) -> int:
    cfg = _load(args)
    out = _out_dir(args)
    seeds = _seeds(cfg)
    finals, slopes = [], []
    traj = None
    for seed in seeds:
        traj = run(cfg, seed=seed)
        name = "trajectory.csv" if len(seeds) == 1 else f"trajectory_seed{seed}.csv"
        artifacts.write_trajectory(out / name, traj, _meta(cfg, seed))
        finals.append(traj.final_gap)
        slopes.append(_slope(traj, float(cfg.analysis["window_fraction"])))
    good = [s for s in slopes if s is not None]
    summary = {
        "final_gap": float(np.mean(finals)),
        "final_gaps": finals,
        "slope": float(np.median(good)) if good else None,
        "cum_eps": traj.ledger.total_epsilon if traj.ledger else None,
        "delta_hat": traj.ledger.delta_hat if traj.ledger else None,
        "cum_delta": traj.ledger.cum_delta if traj.ledger else None,
        "assumption4": traj.assumption4.to_dict() if traj.assumption4 else None,
        "seeds": seeds,
        **_meta(cfg, seeds[0]),
    }
    artifacts.write_json(out / "summary.json", summary)
    print(json.dumps({"final_gap": summary["final_gap"], "slope": summary["slope"], "out": str(out)}))
    return EXIT_OK


def _sweep_cell(cfg_dict: dict, overrides: dict, seed: int, path: str):
    cfg = resolve(cfg_dict).with_overrides(overrides)
    traj = run(cfg, seed=seed)
    artifacts.write_trajectory(path, traj, {**_meta(cfg, seed), "overrides": overrides})
    return traj.final_gap, (traj.ledger.total_epsilon if traj.ledger else float("nan"))


def cmd_sweep(args) -> int:
    cfg = _load(args)
    out = _out_dir(args)
    grid = cfg.sweep["grid"]
    keys = sorted(grid)
    cells = [dict(zip(keys, values)) for values in itertools.product(*(grid[k] for k in keys))]
    tasks = []
    for ci, overrides in enumerate(cells):
        for seed in _seeds(cfg):
            path = out / f"cell_{ci:03d}" / f"trajectory_seed{seed}.csv"
            tasks.append((ci, overrides, seed, path))
    base = cfg.to_dict()
    jobs = max(1, int(args.jobs or 1))
    if jobs == 1:
        results = [_sweep_cell(base, o, s, str(p)) for _, o, s, p in tasks]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(_sweep_cell, base, o, s, str(p)) for _, o, s, p in tasks]
            results = [f.result() for f in futures]
    rows = []
    for (ci, overrides, seed, path), (final_gap, cum_eps) in zip(tasks, results):
        rows.append([ci, *[overrides[k] for k in keys], seed, final_gap, cum_eps, path.relative_to(out).as_posix()])
    artifacts.write_csv(out / "index.csv", ["cell", *keys, "seed", "final_gap", "cum_eps", "path"], rows)
    artifacts.write_json(out / "index.meta.json", {"config": base, "cells": cells, "seeds": _seeds(cfg)})
    print(json.dumps({"cells": len(cells), "runs": len(tasks), "out": str(out)}))
    return EXIT_OK


def cmd_budget(args) -> int:
    cfg = _load(args)
    out = _out_dir(args)
    c = build_components(cfg)
    ledger = cumulative_budget(c.schedules.K, c.schedules, c.accountant, int(cfg.privacy["delta_sum_start"]))
    meta = {**_meta(cfg, cfg.run["seed"]), "schedules": c.schedules.derived(), "C": c.accountant.C}
    artifacts.write_ledger(out / "ledger.csv", ledger, meta)
    summary = {**ledger.summary(), "delta_sum_start": ledger.delta_sum_start, **meta}
    artifacts.write_json(out / "budget_summary.json", summary)
    print(json.dumps(ledger.summary()))
    return EXIT_OK


def cmd_validate(args) -> int:
    cfg = _load(args)
    out = _out_dir(args)
    c = build_components(cfg)
    if c.assumption4 is None:
        raise ConfigError("assumption report unavailable (single node or undefined constant)")
    report = {**c.assumption4.to_dict(), "schedules": c.schedules.derived(), "rho_L": c.net.rho_L, **_meta(cfg, cfg.run["seed"])}
    artifacts.write_json(out / "assumption4.json", report)
    print(json.dumps({"all_hold": c.assumption4.all_hold, "failed": [x.name for x in c.assumption4.conditions if not x.holds]}))
    return EXIT_OK if c.assumption4.all_hold else EXIT_VALIDATION


def _collect_csvs(paths) -> list[Path]:
    found = []
    for p in map(Path, paths):
        if p.is_dir():
            found.extend(sorted(x for x in p.rglob("trajectory*.csv")))
        else:
            found.append(p)
    return found


def cmd_analyze(args) -> int:
    files = _collect_csvs(args.paths)
    if not files:
        raise ConfigError("no trajectory CSV files found")
    trajs = [artifacts.read_trajectory(f) for f in files]
    per_file = []
    for t in trajs:
        last = int(t.k[-1])
        try:
            fit = fit_rate(t, (max(1, int(last * (1 - args.window_fraction))), last))
            fit_d = {"slope": fit.slope, "intercept": fit.intercept, "residual_rms": fit.residual_rms, "window": [fit.k0, fit.k1]}
        except (NonPositiveGap, ValueError) as exc:
            fit_d = {"error": str(exc)}
        per_file.append({"path": str(t.path), "initial_gap": float(t.mean_gap[0]), "final_gap": t.final_gap, "rate": fit_d})
    report = {"files": per_file, "rate_threshold_note": "slope thresholds are empirical calibration"}
    finals = [t.final_gap for t in trajs]
    if len(finals) >= 20:
        hp = high_prob_check(finals, args.delta_star)
        report["high_probability"] = hp.__dict__
    if args.eta is not None:
        same_len = len({len(t.k) for t in trajs}) == 1
        if same_len:
            probe = oracle_complexity(trajs, args.eta)
            report["oracle_complexity"] = {"eta": probe.eta, "N_eta": probe.N_eta, "total_samples": probe.total_samples, "reached": probe.reached}
    slopes = [f["rate"]["slope"] for f in per_file if "slope" in f["rate"]]
    report["median_slope"] = float(np.median(slopes)) if slopes else None
    out = Path(args.out) if args.out else _out_dir(args) / "analysis.json"
    if out.suffix != ".json":
        out = out / "analysis.json"
    artifacts.write_json(out, report)
    print(json.dumps({"files": len(files), "median_slope": report["median_slope"], "out": str(out)}))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="privdsgd", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, seed=True, jobs=False):
        p.add_argument("--config", help="JSON config file or preset name")
        p.add_argument("--out", help=f"output directory (default ${OUT_ENV} or ./out)")
        if seed:
            p.add_argument("--seed", type=int, default=None, help="override run.seed")
        if jobs:
            p.add_argument("--jobs", type=int, default=1, help="worker processes")

    common(sub.add_parser("run", help="simulate and write trajectories"))
    common(sub.add_parser("sweep", help="grid sweep over config keys"), jobs=True)
    common(sub.add_parser("budget", help="privacy ledger only"))
    common(sub.add_parser("validate", help="step-size condition report"))
    an = sub.add_parser("analyze", help="rate / tail / complexity report from trajectory CSVs")
    an.add_argument("paths", nargs="+")
    an.add_argument("--out")
    an.add_argument("--eta", type=float, default=None)
    an.add_argument("--delta-star", type=float, default=0.2)
    an.add_argument("--window-fraction", type=float, default=0.5)
    return parser


COMMANDS = {"run": cmd_run, "sweep": cmd_sweep, "budget": cmd_budget, "validate": cmd_validate, "analyze": cmd_analyze}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return EXIT_CONFIG
    except NumericalDivergence as exc:
        print(json.dumps({"error": "NumericalDivergence", "message": str(exc), "iteration": exc.iteration}), file=sys.stderr)
        return EXIT_DIVERGENCE
    except (PrivDSGDError, ValueError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
