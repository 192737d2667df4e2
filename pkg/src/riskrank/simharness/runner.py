"""Run the engine against simulated users and aggregate per-day metrics."""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from ..casebase import CaseBase
from ..engine import Engine, RankParams
from ..risk import RiskConfig
from .clicks import simulate_user_clicks
from .scenario import SimScenario, World, build_world, draw_schedule

CSV_FIELDS = ("day", "arm", "seed", "precision_top10", "avg_dwell_minutes", "cumulative_ctr", "epsilon_mean")


@dataclass(frozen=True)
class MetricsRecord:
    day: int
    arm: str
    seed: int
    precision_top10: float
    avg_dwell_minutes: float
    cumulative_ctr: float
    epsilon_mean: float


@dataclass(frozen=True)
class TrialRecord:
    day: int
    trial: int
    situation: str
    critical: bool
    epsilon: float
    risk: float
    clicks_top10: int
    dwell_total: float
    random_in_top10: int


@dataclass
class ReplicationResult:
    arm: str
    seed: int
    records: list[MetricsRecord]
    trials: list[TrialRecord]

    @property
    def mean_precision(self) -> float:
        return sum(t.clicks_top10 for t in self.trials) / len(self.trials)

    @property
    def mean_dwell(self) -> float:
        clicks = sum(t.clicks_top10 for t in self.trials)
        return sum(t.dwell_total for t in self.trials) / clicks if clicks else 0.0

    def mean_epsilon(self, critical: bool | None = None) -> float:
        eps = [t.epsilon for t in self.trials if critical is None or t.critical == critical]
        return sum(eps) / len(eps) if eps else math.nan


def make_engine(scenario: SimScenario, world: World, arm: str, seed: int) -> Engine:
    """Engine for one arm; the arms differ only in how epsilon is chosen."""
    critical = [scenario.situations[n].situation for n in scenario.critical_names]
    casebase = CaseBase(scenario.ontologies, critical)
    risk_cfg = scenario.risk
    override = None
    if arm == "rm":
        lam = scenario.rm_lambda
        risk_cfg = RiskConfig(lambda_m=lam.get("m", 0.0), lambda_c=lam.get("c", 0.0),
                              lambda_v=lam.get("v", 0.0), B=risk_cfg.B, alpha=risk_cfg.alpha,
                              default_risk=risk_cfg.default_risk)
    elif arm == "baseline":
        override = 0.0
    elif arm != "full":
        raise ValueError(f"unknown arm {arm!r}")
    params = RankParams(scenario.rank.epsilon_min, scenario.rank.epsilon_max, scenario.rank.list_size,
                        random_seed=_engine_seed(scenario.rank.random_seed, seed))
    return Engine(world.corpus, casebase, scenario.concept_risk_table(), risk_cfg, params,
                  epsilon_override=override)


def _engine_seed(base: int, seed: int) -> int:
    return int(np.random.SeedSequence([base, seed, 0xE6]).generate_state(1)[0])


def run_replication(scenario: SimScenario, arm: str, seed: int, world: World | None = None,
                    schedule: list[list[str]] | None = None) -> ReplicationResult:
    world = world or build_world(scenario, seed)
    schedule = schedule or draw_schedule(scenario, seed)
    engine = make_engine(scenario, world, arm, seed)
    # same click stream for every arm under one seed
    click_rng = np.random.default_rng([seed, 0xC1])
    records: list[MetricsRecord] = []
    trials: list[TrialRecord] = []
    cum_clicks = 0
    cum_requests = 0
    for day, names in enumerate(schedule, start=1):
        day_clicks = 0
        day_dwell = 0.0
        day_eps = 0.0
        for t, name in enumerate(names):
            spec = scenario.situations[name]
            ranked = engine.process_query(spec.situation, world.queries[name])
            clicked, times = simulate_user_clicks(
                ranked, world.relevance(name, day), click_rng, critical=spec.critical,
                dwell=scenario.dwell, top_k=scenario.top_k,
                irrelevant_threshold=scenario.irrelevant_threshold,
            )
            engine.feedback(spec.situation, ranked, clicked)
            random_top = sum(e.provenance == "random" for e in ranked.entries[: scenario.top_k])
            trials.append(TrialRecord(day, t, name, spec.critical, ranked.epsilon, ranked.risk,
                                      len(clicked), math.fsum(times), random_top))
            day_clicks += len(clicked)
            day_dwell += math.fsum(times)
            day_eps += ranked.epsilon
        cum_clicks += day_clicks
        cum_requests += len(names)
        records.append(MetricsRecord(
            day=day,
            arm=arm,
            seed=seed,
            precision_top10=day_clicks / len(names),
            avg_dwell_minutes=day_dwell / day_clicks if day_clicks else 0.0,
            cumulative_ctr=cum_clicks / cum_requests,
            epsilon_mean=day_eps / len(names),
        ))
    return ReplicationResult(arm, seed, records, trials)


def _run_job(args):
    scenario, arm, seed = args
    return run_replication(scenario, arm, seed)


def run_replications(scenario: SimScenario, arms: Sequence[str] | None = None,
                     seeds: Sequence[int] | None = None, workers: int = 1) -> list[ReplicationResult]:
    """Every (arm, seed) pair, optionally in worker processes; results in (seed, arm) order."""
    arms = tuple(arms or scenario.arms)
    seeds = tuple(seeds or scenario.seeds)
    jobs = [(scenario, arm, seed) for seed in seeds for arm in arms]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_run_job, jobs))
    results = []
    for seed in seeds:
        world = build_world(scenario, seed)
        schedule = draw_schedule(scenario, seed)
        for arm in arms:
            results.append(run_replication(scenario, arm, seed, world, schedule))
    return results


def run_experiment(scenario: SimScenario, arms: Sequence[str] | None = None,
                   seeds: Sequence[int] | None = None, workers: int = 1) -> list[MetricsRecord]:
    records = []
    for res in run_replications(scenario, arms, seeds, workers):
        records.extend(res.records)
    return records


def emit_metrics(records: Iterable[MetricsRecord], path: str | Path) -> Path:
    records = list(records)
    if not records:
        raise ValueError("no metrics to write")
    path = Path(path)
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_FIELDS)
        writer.writeheader()
        for rec in records:
            writer.writerow({k: repr(v) if isinstance(v, float) else v for k, v in asdict(rec).items()})
    return path


def read_metrics(path: str | Path) -> list[MetricsRecord]:
    types = {f.name: f.type for f in fields(MetricsRecord)}
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            vals = {}
            for k, v in row.items():
                t = types[k]
                vals[k] = int(v) if t in (int, "int") else float(v) if t in (float, "float") else v
            out.append(MetricsRecord(**vals))
    return out


def sign_test_p(wins: int, n: int) -> float:
    """One-sided sign-test p-value: P(X >= wins) for X ~ Binomial(n, 1/2)."""
    return sum(math.comb(n, k) for k in range(wins, n + 1)) / 2 ** n
