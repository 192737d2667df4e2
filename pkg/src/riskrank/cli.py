"""Command-line entry point: run, validate and grid-scan simulation scenarios."""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .errors import ConfigError, RiskRankError
from .simharness.runner import emit_metrics, run_replications
from .simharness.scenario import DEFAULT_SCENARIO, ARM_LABELS, build_world, load_scenario, scenario_summary

GRID_PARAMS = {
    "B": ("risk", "B"),
    "alpha": ("risk", "alpha"),
    "default_risk": ("risk", "default_risk"),
    "epsilon_min": ("rank", "epsilon_min"),
    "epsilon_max": ("rank", "epsilon_max"),
}
GRID_FIELDS = ("param", "value", "arm", "seed", "precision_top10", "avg_dwell_minutes", "epsilon_mean")


def _csv_list(text, cast=str):
    if text is None:
        return None
    items = [cast(x.strip()) for x in text.split(",") if x.strip()]
    if not items:
        raise ConfigError(f"empty list: {text!r}")
    return items


def _scenario(path: str):
    return load_scenario(DEFAULT_SCENARIO if path == "default" else path)


def _arms(text):
    arms = _csv_list(text)
    if arms is not None:
        bad = [a for a in arms if a not in ARM_LABELS]
        if bad:
            raise ConfigError(f"unknown arms {bad}; choose from {list(ARM_LABELS)}")
    return arms


def parse_range(spec: str) -> tuple[str, list[float]]:
    """``NAME=start:stop:step`` (stop inclusive) or ``NAME=v1,v2,...``."""
    try:
        name, rhs = spec.split("=", 1)
    except ValueError:
        raise ConfigError(f"expected NAME=start:stop:step, got {spec!r}") from None
    if name not in GRID_PARAMS:
        raise ConfigError(f"cannot scan {name!r}; choose from {sorted(GRID_PARAMS)}")
    if ":" in rhs:
        try:
            start, stop, step = (float(x) for x in rhs.split(":"))
        except ValueError:
            raise ConfigError(f"bad range {rhs!r}") from None
        if step <= 0 or stop < start:
            raise ConfigError(f"bad range {rhs!r}")
        count = int(np.floor((stop - start) / step + 1e-9)) + 1
        values = [round(start + i * step, 12) for i in range(count)]
    else:
        values = [float(v) for v in _csv_list(rhs)]
    return name, values


def cmd_run(args) -> int:
    scenario = _scenario(args.scenario)
    results = run_replications(scenario, _arms(args.arms), _csv_list(args.seeds, int), workers=args.workers)
    records = [r for res in results for r in res.records]
    emit_metrics(records, args.out)
    for res in results:
        print(f"{res.arm:>8} seed={res.seed:<4} precision@10={res.mean_precision:.3f} "
              f"dwell={res.mean_dwell:.3f} eps={res.mean_epsilon():.3f}")
    print(f"wrote {len(records)} rows to {args.out}")
    return 0


def cmd_validate(args) -> int:
    scenario = _scenario(args.scenario)
    for seed in scenario.seeds[:1]:
        world = build_world(scenario, seed)
        print(f"corpus: {len(world.corpus)} documents, {len(world.corpus.doc_freq)} terms")
    print(json.dumps(scenario_summary(scenario), indent=1))
    print("ok")
    return 0


def cmd_grid(args) -> int:
    scenario = _scenario(args.scenario)
    name, values = parse_range(args.param)
    section, attr = GRID_PARAMS[name]
    arms = _arms(args.arms) or ["full"]
    seeds = _csv_list(args.seeds, int)
    with open(args.out, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=GRID_FIELDS)
        writer.writeheader()
        for value in values:
            target = getattr(scenario, section)
            variant = scenario.with_overrides(**{section: dataclasses.replace(target, **{attr: value})})
            for res in run_replications(variant, arms, seeds, workers=args.workers):
                writer.writerow({
                    "param": name, "value": value, "arm": res.arm, "seed": res.seed,
                    "precision_top10": res.mean_precision, "avg_dwell_minutes": res.mean_dwell,
                    "epsilon_mean": res.mean_epsilon(),
                })
                print(f"{name}={value:g} {res.arm} seed={res.seed} precision@10={res.mean_precision:.3f}")
    print(f"wrote {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="riskrank", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="simulate every arm and seed, write per-day metrics CSV")
    run.add_argument("--scenario", required=True, help="scenario JSON file, or 'default'")
    run.add_argument("--out", required=True, type=Path)
    run.add_argument("--seeds", help="comma-separated seeds (default: from scenario)")
    run.add_argument("--arms", help=f"comma-separated subset of {','.join(ARM_LABELS)}")
    run.add_argument("--workers", type=int, default=1)
    run.set_defaults(func=cmd_run)

    val = sub.add_parser("validate", help="check a scenario file")
    val.add_argument("--scenario", required=True)
    val.set_defaults(func=cmd_validate)

    grid = sub.add_parser("grid", help="scan one parameter and report run-level metrics")
    grid.add_argument("--scenario", required=True)
    grid.add_argument("--param", required=True, help="e.g. B=0.7:0.95:0.05")
    grid.add_argument("--out", required=True, type=Path)
    grid.add_argument("--seeds")
    grid.add_argument("--arms", help="default: full")
    grid.add_argument("--workers", type=int, default=1)
    grid.set_defaults(func=cmd_grid)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except (RiskRankError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
