"""Risk-modulated epsilon-greedy document ranking and the per-trial feedback loop."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .casebase import CaseBase
from .errors import ConfigError, CorpusError, FeedbackError, NoRiskEstimateError
from .interest import Corpus, DocumentVector, Query, UserInterest, cosine_score
from .ontology import ConceptRiskTable
from .risk import (
    RiskConfig,
    aggregate_risk,
    compute_ctr_stats,
    compute_mu_weights,
    risk_concepts,
    risk_similarity,
    risk_variance,
    update_concept_risks,
    update_situation_risk,
)
from .situation import Situation, validate_situation

QUERY = "query"
CONTEXT = "context"
RANDOM = "random"


@dataclass(frozen=True)
class RankParams:
    epsilon_min: float = 0.0
    epsilon_max: float = 1.0
    list_size: int = 10
    random_seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.epsilon_min <= self.epsilon_max <= 1.0:
            raise ConfigError(
                f"need 0 <= epsilon_min <= epsilon_max <= 1, got {self.epsilon_min}, {self.epsilon_max}"
            )
        if self.list_size < 1:
            raise ConfigError(f"list_size must be positive, got {self.list_size}")

    @classmethod
    def from_dict(cls, data: Mapping) -> "RankParams":
        return cls(
            epsilon_min=float(data.get("epsilon_min", 0.0)),
            epsilon_max=float(data.get("epsilon_max", 1.0)),
            list_size=int(data.get("list_size", 10)),
            random_seed=int(data.get("random_seed", 0)),
        )

    def to_dict(self) -> dict:
        return {"epsilon_min": self.epsilon_min, "epsilon_max": self.epsilon_max,
                "list_size": self.list_size, "random_seed": self.random_seed}


@dataclass(frozen=True)
class RankedEntry:
    doc_id: str
    score: float
    provenance: str


@dataclass(frozen=True)
class RankedList:
    entries: tuple[RankedEntry, ...]
    epsilon: float = 0.0
    risk: float | None = None

    @property
    def doc_ids(self) -> list[str]:
        return [e.doc_id for e in self.entries]

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)


def epsilon_from_risk(r: float, params: RankParams) -> float:
    """Exploration rate ``eps_max - r*(1 - eps_min)``, clamped to ``[eps_min, eps_max]``."""
    if not 0.0 <= r <= 1.0:
        raise ValueError(f"risk must lie in [0, 1], got {r!r}")
    eps = params.epsilon_max - r * (1.0 - params.epsilon_min)
    return min(params.epsilon_max, max(params.epsilon_min, eps))


def score_document(doc: DocumentVector, query: Query, interest: UserInterest | None,
                   epsilon: float, rng: np.random.Generator) -> tuple[float, str]:
    """Score one document under the epsilon-greedy policy.

    With probability ``epsilon`` the score is uniform on [0, 1]. Otherwise a
    second uniform draw ``j`` picks the query cosine when ``l < j`` and the
    interest cosine when not; without an interest vector the query cosine is
    used on both branches.
    """
    l = rng.random()
    if l < epsilon:
        return float(rng.random()), RANDOM
    j = rng.random()
    if l < j or not interest:
        return cosine_score(query.weights, doc.weights, norm2=doc.norm), QUERY
    return cosine_score(interest.weights, doc.weights, norm2=doc.norm), CONTEXT


def rank_documents(corpus: Corpus, query: Query, interest: UserInterest | None, epsilon: float,
                   params: RankParams, rng: np.random.Generator) -> RankedList:
    """Score every document, sort by score (ties by doc id) and keep the top ``list_size``."""
    if len(corpus) == 0:
        raise CorpusError("cannot rank an empty corpus")
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError(f"epsilon must lie in [0, 1], got {epsilon!r}")
    scored = []
    for doc in corpus:
        score, prov = score_document(doc, query, interest, epsilon, rng)
        scored.append((-score, doc.doc_id, prov))
    scored.sort()
    entries = tuple(RankedEntry(d, -s, p) for s, d, p in scored[: params.list_size])
    return RankedList(entries, epsilon=epsilon)


@dataclass
class RiskBreakdown:
    """How the risk of one situation was obtained."""

    risk: float
    r_m: float | None = None
    r_c: float | None = None
    r_v: float | None = None
    source: str = "aggregate"  # "aggregate", "critical" or "default"


@dataclass
class TrialState:
    situation: Situation
    shown: RankedList
    breakdown: RiskBreakdown


class Engine:
    """One user's retrieval engine: case base, concept risks and the seeded generator.

    ``epsilon_override`` pins the exploration rate regardless of risk (the
    no-exploration baseline uses 0). Not thread-safe: ``process_query`` and
    ``feedback`` must alternate on a single caller.
    """

    def __init__(self, corpus: Corpus, casebase: CaseBase, concept_risks: ConceptRiskTable | None = None,
                 risk_config: RiskConfig | None = None, params: RankParams | None = None,
                 epsilon_override: float | None = None, promote_critical: bool = True):
        self.corpus = corpus
        self.casebase = casebase
        self.concept_risks = concept_risks if concept_risks is not None else ConceptRiskTable()
        self.risk_config = risk_config or RiskConfig()
        self.params = params or RankParams()
        if epsilon_override is not None and not 0.0 <= epsilon_override <= 1.0:
            raise ConfigError(f"epsilon_override must lie in [0, 1], got {epsilon_override!r}")
        self.epsilon_override = epsilon_override
        self.promote_critical = promote_critical
        self.rng = np.random.default_rng(self.params.random_seed)
        self._pending: TrialState | None = None

    @property
    def ontologies(self):
        return self.casebase.ontologies

    def assess_risk(self, current: Situation) -> RiskBreakdown:
        """Risk of ``current`` given the present case base and concept table."""
        if self.casebase.is_critical(current):
            return RiskBreakdown(1.0, source="critical")
        cfg = self.risk_config
        lam = cfg.weights
        r_m = r_c = r_v = None
        critical = self.casebase.critical
        if critical and lam["m"] > 0:
            centroid = self.casebase.critical_centroid()
            r_m = risk_similarity(self.casebase.similarity(current, centroid), cfg.B)
        if critical and lam["c"] > 0:
            mu = compute_mu_weights(critical, self.concept_risks)
            r_c = risk_concepts(current, self.concept_risks, mu)
        if len(self.casebase) and lam["v"] > 0:
            nearest, _ = self.casebase.retrieve_nearest(current)
            stats = compute_ctr_stats(self.casebase, cfg.alpha)
            if stats.sufficient and nearest.rec_count > 0:
                r_v = risk_variance(nearest.click_count / nearest.rec_count, stats)
        try:
            risk = aggregate_risk(r_m, r_c, r_v, cfg)
        except NoRiskEstimateError:
            return RiskBreakdown(cfg.default_risk, r_m, r_c, r_v, source="default")
        return RiskBreakdown(risk, r_m, r_c, r_v)

    def process_query(self, current: Situation, query: Query) -> RankedList:
        """Rank the corpus for ``query`` issued in situation ``current``."""
        validate_situation(current, self.ontologies)
        interest = None
        if len(self.casebase):
            nearest, _ = self.casebase.retrieve_nearest(current)
            interest = nearest.interest or None
        breakdown = self.assess_risk(current)
        if self.epsilon_override is not None:
            eps = self.epsilon_override
        else:
            eps = epsilon_from_risk(breakdown.risk, self.params)
        ranked = rank_documents(self.corpus, query, interest, eps, self.params, self.rng)
        ranked = RankedList(ranked.entries, epsilon=eps, risk=breakdown.risk)
        self._pending = TrialState(current, ranked, breakdown)
        return ranked

    def feedback(self, current: Situation, shown: RankedList, clicked: Iterable[str]) -> float:
        """Ingest the clicks on ``shown`` and propagate the updated risk.

        Returns the situation's stored (history-averaged) risk level.
        """
        clicks = set(clicked)
        stray = clicks - set(shown.doc_ids)
        if stray:
            raise FeedbackError(f"clicked documents were not shown: {sorted(stray)}")
        case = self.casebase.insert_or_update(current, clicks, self.corpus)
        new_r = self.assess_risk(current).risk
        stored = update_situation_risk(case, new_r)
        update_concept_risks(current, new_r, self.concept_risks)
        if self.promote_critical and stored >= 1.0:
            self.casebase.add_critical(case.situation)
        self._pending = None
        return stored

    def trial(self, current: Situation, query: Query, click_fn) -> tuple[RankedList, set[str]]:
        """Convenience wrapper: rank, ask ``click_fn(ranked)`` for clicks, feed them back."""
        ranked = self.process_query(current, query)
        clicks = set(click_fn(ranked))
        self.feedback(current, ranked, clicks)
        return ranked, clicks


def exploration_fraction(ranked_lists: Iterable[RankedList]) -> float:
    total = 0
    rand = 0
    for rl in ranked_lists:
        for e in rl:
            total += 1
            rand += e.provenance == RANDOM
    return rand / total if total else math.nan
