"""Simulation scenarios: the synthetic world a set of simulated users lives in.

A scenario file is one JSON document. Ontologies and the corpus may be
embedded or referenced by path (relative to the scenario file). The corpus is
either read from a JSON-lines file or generated from a topic description:
every topic owns a private vocabulary, and documents of "visible" topics also
carry the query terms that make them reachable through plain query matching.
Documents of topics without query terms can only surface through exploration
or a learned interest vector.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from ..engine import RankParams
from ..errors import ConfigError, RiskRankError
from ..interest import Corpus, DocumentVector, Query, load_corpus_jsonl
from ..ontology import ConceptRiskTable, Ontology, load_ontologies
from ..risk import RiskConfig
from ..situation import Situation, validate_situation

ARM_LABELS = ("full", "rm", "baseline")
DEFAULT_SCENARIO = Path(__file__).resolve().parent.parent / "data" / "default_scenario.json"


@dataclass(frozen=True)
class DwellModel:
    """Gamma-distributed reading time whose mean grows with document relevance.

    The mean is ``irrelevant_mean`` at relevance 0 and ``relevant_mean`` at
    relevance 1, linear in between.
    """

    relevant_mean: float = 2.0
    irrelevant_mean: float = 0.3
    shape: float = 2.0

    def __post_init__(self):
        if self.relevant_mean < 0 or self.irrelevant_mean < 0 or self.shape <= 0:
            raise ConfigError("dwell means must be >= 0 and shape > 0")

    def mean(self, relevance: float) -> float:
        return self.irrelevant_mean + relevance * (self.relevant_mean - self.irrelevant_mean)

    def draw(self, relevance: float, rng: np.random.Generator) -> float:
        m = self.mean(relevance)
        if m == 0:
            return 0.0
        return float(rng.gamma(self.shape, m / self.shape))


@dataclass
class SituationSpec:
    name: str
    situation: Situation
    query_text: str
    relevance: dict[str, float]
    relevance_after_shift: dict[str, float] | None = None
    critical: bool = False


@dataclass
class SimScenario:
    name: str
    ontologies: dict[str, Ontology]
    situations: dict[str, SituationSpec]
    schedule_weights: dict[str, float] | None
    schedule_days: list[list[str]] | None
    corpus_spec: dict[str, Any]
    concept_risks: dict[str, dict[str, float]]
    risk: RiskConfig
    rank: RankParams
    dwell: DwellModel = field(default_factory=DwellModel)
    background_relevance: float = 0.0
    irrelevant_threshold: float = 0.2
    top_k: int = 10
    shift_day: int | None = None
    days: int = 28
    trials_per_day: int = 20
    arms: tuple[str, ...] = ARM_LABELS
    seeds: tuple[int, ...] = (1,)
    rm_lambda: dict[str, float] = field(default_factory=lambda: {"m": 1.0, "c": 0.0, "v": 0.0})
    base_dir: Path = Path(".")

    @property
    def dimensions(self) -> tuple[str, ...]:
        return tuple(self.ontologies)

    @property
    def critical_names(self) -> list[str]:
        return [n for n, s in self.situations.items() if s.critical]

    def concept_risk_table(self) -> ConceptRiskTable:
        return ConceptRiskTable.from_nested(self.concept_risks)

    def relevance_map(self, name: str, day: int) -> dict[str, float]:
        spec = self.situations[name]
        if self.shift_day is not None and day >= self.shift_day and spec.relevance_after_shift is not None:
            return spec.relevance_after_shift
        return spec.relevance

    def with_overrides(self, **changes) -> "SimScenario":
        from dataclasses import replace
        return replace(self, **changes)


def _resolve(item, base_dir: Path):
    if isinstance(item, str):
        with open(base_dir / item) as fh:
            return json.load(fh)
    return item


def _unit(x, what: str) -> float:
    x = float(x)
    if not 0.0 <= x <= 1.0:
        raise ConfigError(f"{what} must lie in [0, 1], got {x!r}")
    return x


def scenario_from_dict(data: Mapping, base_dir: str | Path = ".") -> SimScenario:
    """Parse and validate a scenario document."""
    base_dir = Path(base_dir)
    try:
        ontologies = load_ontologies(_resolve(o, base_dir) for o in data["ontologies"])
        dims = data.get("dimensions")
        if dims is not None:
            if set(dims) != set(ontologies):
                raise ConfigError(f"dimensions {dims} do not match ontologies {list(ontologies)}")
            ontologies = {d: ontologies[d] for d in dims}

        critical_names = set(data.get("critical", []))
        situations: dict[str, SituationSpec] = {}
        for name, raw in data["situations"].items():
            sit = Situation.of(raw["concepts"], tuple(ontologies))
            validate_situation(sit, ontologies)
            rel = {k: _unit(v, f"relevance {name}/{k}") for k, v in raw.get("relevance", {}).items()}
            after = raw.get("relevance_after_shift")
            if after is not None:
                after = {k: _unit(v, f"relevance {name}/{k}") for k, v in after.items()}
            if not str(raw.get("query", "")).strip():
                raise ConfigError(f"situation {name!r} needs a query")
            situations[name] = SituationSpec(name, sit, raw["query"], rel, after, name in critical_names)
        unknown = critical_names - set(situations)
        if unknown:
            raise ConfigError(f"critical situations not defined: {sorted(unknown)}")

        sched = data.get("schedule", {})
        weights = sched.get("weights")
        days_list = sched.get("days")
        if (weights is None) == (days_list is None):
            raise ConfigError("schedule needs exactly one of 'weights' or 'days'")
        if weights is not None:
            weights = {k: float(v) for k, v in weights.items()}
            bad = [k for k, v in weights.items() if k not in situations or v < 0]
            if bad or sum(weights.values()) <= 0:
                raise ConfigError(f"bad schedule weights: {bad or weights}")
        if days_list is not None:
            bad = {n for day in days_list for n in day} - set(situations)
            if bad or not days_list or not all(days_list):
                raise ConfigError(f"bad schedule days (unknown situations {sorted(bad)})")

        concept_risks = data.get("concept_risks", {})
        for dim, per in concept_risks.items():
            if dim not in ontologies:
                raise ConfigError(f"concept_risks for unknown dimension {dim!r}")
            for concept, cv in per.items():
                ontologies[dim].ancestors(concept)
                _unit(cv, f"concept risk {dim}/{concept}")

        corpus_spec = dict(data["corpus"])
        if "path" not in corpus_spec and "topics" not in corpus_spec:
            raise ConfigError("corpus needs 'path' or 'topics'")

        click = data.get("click", {})
        arms = tuple(data.get("arms", ARM_LABELS))
        bad_arms = [a for a in arms if a not in ARM_LABELS]
        if bad_arms or not arms:
            raise ConfigError(f"unknown arms {bad_arms}; choose from {ARM_LABELS}")
        days = int(data.get("days", 28))
        trials = int(data.get("trials_per_day", 20))
        if days < 1 or trials < 1:
            raise ConfigError("days and trials_per_day must be >= 1")
        if days_list is not None and len(days_list) < days:
            raise ConfigError(f"schedule lists {len(days_list)} days but the scenario runs {days}")
        seeds = tuple(int(s) for s in data.get("seeds", [1]))
        if not seeds:
            raise ConfigError("at least one seed is required")
        rm_lambda = data.get("rm_lambda", {"m": 1.0, "c": 0.0, "v": 0.0})
        RiskConfig.from_dict({"lambda": rm_lambda})  # validates
        scenario = SimScenario(
            name=data.get("name", "scenario"),
            ontologies=ontologies,
            situations=situations,
            schedule_weights=weights,
            schedule_days=days_list,
            corpus_spec=corpus_spec,
            concept_risks={d: dict(p) for d, p in concept_risks.items()},
            risk=RiskConfig.from_dict(data.get("risk", {})),
            rank=RankParams.from_dict(data.get("rank", {})),
            dwell=DwellModel(**data.get("dwell", {})),
            background_relevance=_unit(data.get("background_relevance", 0.0), "background_relevance"),
            irrelevant_threshold=_unit(click.get("irrelevant_threshold", 0.2), "irrelevant_threshold"),
            top_k=int(click.get("top_k", 10)),
            shift_day=data.get("shift_day"),
            days=days,
            trials_per_day=trials,
            arms=arms,
            seeds=seeds,
            rm_lambda={k: float(v) for k, v in rm_lambda.items()},
            base_dir=base_dir,
        )
    except RiskRankError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"malformed scenario: {exc!r}") from exc
    return scenario


def load_scenario(path: str | Path) -> SimScenario:
    path = Path(path)
    try:
        with open(path) as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    return scenario_from_dict(data, path.parent)


def default_scenario() -> SimScenario:
    return load_scenario(DEFAULT_SCENARIO)


@dataclass
class World:
    """Concrete, seeded instantiation of a scenario: corpus, topics and queries."""

    scenario: SimScenario
    corpus: Corpus
    doc_topic: dict[str, str]
    queries: dict[str, Query]

    def relevance(self, name: str, day: int) -> dict[str, float]:
        """Ground-truth click probability of every document for situation ``name`` on ``day``."""
        table = self.scenario.relevance_map(name, day)
        bg = self.scenario.background_relevance
        out = {}
        for doc_id, topic in self.doc_topic.items():
            if doc_id in table:
                out[doc_id] = table[doc_id]
            elif topic in table:
                out[doc_id] = table[topic]
            else:
                out[doc_id] = bg
        return out


def generate_corpus(spec: Mapping, rng: np.random.Generator) -> tuple[Corpus, dict[str, str]]:
    """Topic-structured synthetic corpus.

    ``spec["topics"]`` maps a topic name to ``{"docs", "vocab", "terms_per_doc",
    "query_terms", "query_tf"}``. Term frequencies are uniform on ``1..max_tf``.
    """
    max_tf = int(spec.get("max_tf", 3))
    docs = []
    doc_topic = {}
    for topic, t in spec["topics"].items():
        vocab = [f"{topic}{i}" for i in range(int(t.get("vocab", 10)))]
        per_doc = min(int(t.get("terms_per_doc", 4)), len(vocab))
        query_terms = list(t.get("query_terms", []))
        query_tf = int(t.get("query_tf", 1))
        for k in range(int(t.get("docs", 5))):
            chosen = rng.choice(len(vocab), size=per_doc, replace=False)
            tfs = {vocab[i]: int(rng.integers(1, max_tf + 1)) for i in sorted(chosen)}
            for q in query_terms:
                tfs[q] = tfs.get(q, 0) + query_tf
            doc_id = f"{topic}-{k:03d}"
            docs.append(DocumentVector(doc_id, tfs))
            doc_topic[doc_id] = topic
    return Corpus(docs), doc_topic


def build_world(scenario: SimScenario, seed: int) -> World:
    spec = scenario.corpus_spec
    if "path" in spec:
        path = scenario.base_dir / spec["path"]
        corpus = load_corpus_jsonl(path)
        doc_topic = {}
        with open(path) as fh:
            for line in fh:
                if line.strip():
                    rec = json.loads(line)
                    doc_topic[str(rec["id"])] = rec.get("topic", str(rec["id"]))
    else:
        rng = np.random.default_rng([seed, 0xC0])
        corpus, doc_topic = generate_corpus(spec, rng)
    queries = {}
    for name, s in scenario.situations.items():
        try:
            queries[name] = corpus.query(s.query_text)
        except RiskRankError as exc:
            raise ConfigError(f"situation {name!r}: {exc}") from None
    return World(scenario, corpus, doc_topic, queries)


def draw_schedule(scenario: SimScenario, seed: int) -> list[list[str]]:
    """Situation names for every trial of every day.

    Shared across arms for a given seed, so arms are compared on identical
    request streams.
    """
    if scenario.schedule_days is not None:
        days = [list(d) for d in scenario.schedule_days[: scenario.days]]
        return [[day[i % len(day)] for i in range(scenario.trials_per_day)] for day in days]
    rng = np.random.default_rng([seed, 0x5C])
    names = list(scenario.schedule_weights)
    p = np.array([scenario.schedule_weights[n] for n in names], dtype=float)
    p /= p.sum()
    return [
        [names[i] for i in rng.choice(len(names), size=scenario.trials_per_day, p=p)]
        for _ in range(scenario.days)
    ]


def scenario_summary(scenario: SimScenario) -> dict:
    return {
        "name": scenario.name,
        "dimensions": list(scenario.dimensions),
        "situations": len(scenario.situations),
        "critical": scenario.critical_names,
        "days": scenario.days,
        "trials_per_day": scenario.trials_per_day,
        "arms": list(scenario.arms),
        "seeds": list(scenario.seeds),
    }

