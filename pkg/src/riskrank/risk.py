"""Situation risk estimators, their aggregation, and post-feedback risk propagation.

Three estimators feed the aggregate:

* ``m`` -- similarity of the current situation to the critical-situation centroid;
* ``c`` -- weighted risk annotations of the situation's concepts;
* ``v`` -- how far the situation's click-through rate falls below the
  population's lower confidence bound.

An estimator that lacks the data it needs returns ``None`` and drops out of
the weighted sum; the remaining weights are renormalized.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .casebase import Case
from .errors import ConfigError, EmptyCriticalSetError, InsufficientDataError, NoRiskEstimateError
from .ontology import ConceptRiskTable
from .situation import Situation

COMPONENTS = ("m", "c", "v")


@dataclass(frozen=True)
class RiskConfig:
    lambda_m: float = 1 / 3
    lambda_c: float = 1 / 3
    lambda_v: float = 1 / 3
    B: float = 0.9
    alpha: float = 2.0
    default_risk: float = 1.0

    def __post_init__(self):
        lams = (self.lambda_m, self.lambda_c, self.lambda_v)
        if any(x < 0 for x in lams):
            raise ConfigError(f"aggregation weights must be nonnegative: {lams}")
        if not math.isclose(sum(lams), 1.0, abs_tol=1e-9):
            raise ConfigError(f"aggregation weights must sum to 1, got {sum(lams)!r}")
        if not 0.0 < self.B <= 1.0:
            raise ConfigError(f"B must lie in (0, 1], got {self.B!r}")
        if self.alpha <= 0:
            raise ConfigError(f"alpha must be positive, got {self.alpha!r}")
        if not 0.0 <= self.default_risk <= 1.0:
            raise ConfigError(f"default_risk must lie in [0, 1], got {self.default_risk!r}")

    @property
    def weights(self) -> dict[str, float]:
        return {"m": self.lambda_m, "c": self.lambda_c, "v": self.lambda_v}

    @classmethod
    def from_dict(cls, data: Mapping) -> "RiskConfig":
        lam = data.get("lambda", {})
        kwargs = {}
        for comp in COMPONENTS:
            if comp in lam:
                kwargs[f"lambda_{comp}"] = float(lam[comp])
        for key in ("B", "alpha", "default_risk"):
            if key in data:
                kwargs[key] = float(data[key])
        return cls(**kwargs)

    def to_dict(self) -> dict:
        return {
            "lambda": self.weights,
            "B": self.B,
            "alpha": self.alpha,
            "default_risk": self.default_risk,
        }


@dataclass(frozen=True)
class CtrStatistics:
    ctrs: tuple[float, ...]
    mean: float
    std_dev: float
    threshold: float

    @property
    def sufficient(self) -> bool:
        return len(self.ctrs) >= 2


def compute_ctr_stats(cases: Iterable[Case], alpha: float = 2.0) -> CtrStatistics:
    """CTR mean, population standard deviation and threshold ``mean - alpha*std``.

    Only cases with at least one recommendation contribute. CTRs above 1 (more
    clicks than lists shown) are clamped to 1.
    """
    ctrs = tuple(min(1.0, c.click_count / c.rec_count) for c in cases if c.rec_count > 0)
    if not ctrs:
        return CtrStatistics((), math.nan, math.nan, math.nan)
    mean = math.fsum(ctrs) / len(ctrs)
    std = math.sqrt(math.fsum((x - mean) ** 2 for x in ctrs) / len(ctrs))
    return CtrStatistics(ctrs, mean, std, mean - alpha * std)


def risk_variance(ctr: float, stats: CtrStatistics) -> float:
    """Risk from a low click-through rate.

    1 at or below the threshold, falling linearly to 0 at CTR = 1. A negative
    threshold is clamped to 0.
    """
    if not stats.sufficient:
        raise InsufficientDataError(f"need CTRs for at least 2 situations, have {len(stats.ctrs)}")
    ctr = min(1.0, max(0.0, ctr))
    var = max(0.0, stats.threshold)
    if var >= 1.0:
        # every situation sits at CTR 1: the decreasing branch's limit is 0
        return 0.0 if ctr >= 1.0 else 1.0
    if ctr > var:
        return 1.0 - (ctr - var) / (1.0 - var)
    return 1.0


def risk_concepts(situation: Situation, risks: ConceptRiskTable,
                  mu: Mapping[str, float]) -> float | None:
    """Weighted sum of the situation's concept risks; ``None`` if none is annotated.

    Dimensions whose concept has no annotation are left out and the remaining
    weights rescaled, so a partially annotated situation is not read as safe.
    """
    total = 0.0
    weight = 0.0
    for dim, concept in zip(situation.dimensions, situation.values):
        cv = risks.get(dim, concept)
        if cv is None:
            continue
        total += mu.get(dim, 0.0) * cv
        weight += mu.get(dim, 0.0)
    if weight == 0.0:
        return None
    return min(1.0, max(0.0, total / weight))


def compute_mu_weights(critical: Sequence[Situation], risks: ConceptRiskTable,
                       normalize: bool = True) -> dict[str, float]:
    """Per-dimension mean concept risk over the critical situations.

    Members whose concept is unannotated are skipped for that dimension. The
    result is rescaled to sum to 1 unless ``normalize`` is False; an all-zero
    vector falls back to uniform weights.
    """
    if not critical:
        raise EmptyCriticalSetError("dimension weights need at least one critical situation")
    dims = critical[0].dimensions
    raw = {}
    for dim in dims:
        vals = [risks.get(dim, s.concept(dim)) for s in critical]
        vals = [v for v in vals if v is not None]
        raw[dim] = math.fsum(vals) / len(critical) if vals else 0.0
    if not normalize:
        return raw
    total = math.fsum(raw.values())
    if total == 0.0:
        return {d: 1.0 / len(dims) for d in dims}
    return {d: v / total for d, v in raw.items()}


def risk_similarity(similarity: float, B: float) -> float:
    """Risk from closeness to the critical centroid: 1 above ``B``, else ``1 - B + sim``."""
    if similarity >= B:
        return 1.0
    return 1.0 - B + similarity


def aggregate_risk(r_m: float | None, r_c: float | None, r_v: float | None,
                   config: RiskConfig) -> float:
    """Convex combination of the available estimators."""
    parts = {"m": r_m, "c": r_c, "v": r_v}
    lam = config.weights
    num = 0.0
    den = 0.0
    for comp, value in parts.items():
        if value is None or lam[comp] == 0.0:
            continue
        num += lam[comp] * value
        den += lam[comp]
    if den == 0.0:
        raise NoRiskEstimateError("no risk estimator with nonzero weight is available")
    return min(1.0, max(0.0, num / den))


def update_concept_risks(situation: Situation, r: float, risks: ConceptRiskTable) -> ConceptRiskTable:
    """Fold risk ``r`` into the running mean of every concept of ``situation``."""
    for dim, concept in zip(situation.dimensions, situation.values):
        risks.observe(dim, concept, r)
    return risks


def update_situation_risk(case: Case, new_r: float) -> float:
    """Append ``new_r`` to the case's risk history and store the mean as its risk level."""
    if not 0.0 <= new_r <= 1.0:
        raise ValueError(f"risk must lie in [0, 1], got {new_r!r}")
    prev = case.situation.risk_level if case.risk_history else 0.0
    case.risk_history.append(new_r)
    mean = prev + (new_r - prev) / len(case.risk_history)
    mean = min(1.0, max(0.0, mean))
    case.situation = case.situation.with_risk(mean)
    return mean
