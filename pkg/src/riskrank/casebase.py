"""The user model: one case per distinct situation, plus the critical-situation set."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import ConfigError, EmptyCaseBaseError, EmptyCriticalSetError
from .interest import Corpus, UserInterest, interest_from_ids, merge_clicked_docs
from .ontology import Ontology
from .situation import Situation, situation_similarity, validate_situation

FORMAT_VERSION = 1


@dataclass
class Case:
    situation: Situation
    interest: UserInterest = field(default_factory=UserInterest.empty)
    clicked_docs: set[str] = field(default_factory=set)
    rec_count: int = 0
    click_count: int = 0
    risk_history: list[float] = field(default_factory=list)

    @property
    def ctr(self) -> float | None:
        if self.rec_count == 0:
            return None
        return self.click_count / self.rec_count

    @property
    def risk_history_count(self) -> int:
        return len(self.risk_history)

    def to_dict(self) -> dict:
        return {
            "situation": self.situation.to_literal(),
            "interest": {
                "weights": self.interest.weights,
                "source_doc_count": self.interest.source_doc_count,
            },
            "clicked_docs": sorted(self.clicked_docs),
            "rec_count": self.rec_count,
            "click_count": self.click_count,
            "risk_history": list(self.risk_history),
        }

    @classmethod
    def from_dict(cls, data: Mapping, dimensions: Sequence[str]) -> "Case":
        situation = Situation.from_literal(data["situation"], dimensions)
        interest = UserInterest(
            {str(t): float(w) for t, w in data["interest"]["weights"].items()},
            int(data["interest"]["source_doc_count"]),
        )
        case = cls(
            situation=situation,
            interest=interest,
            clicked_docs=set(data["clicked_docs"]),
            rec_count=int(data["rec_count"]),
            click_count=int(data["click_count"]),
            risk_history=[float(r) for r in data["risk_history"]],
        )
        if case.rec_count < 0 or case.click_count < 0:
            raise ConfigError(f"negative counters in case {situation}")
        if any(not 0.0 <= r <= 1.0 for r in case.risk_history):
            raise ConfigError(f"risk history outside [0, 1] in case {situation}")
        return case


class CaseBase:
    """Cases keyed by their situation's concept tuple.

    ``ontologies`` fixes the dimension set and the similarity used for
    retrieval. Mutation happens only through :meth:`insert_or_update` and the
    risk bookkeeping in the engine; callers serialize those.
    """

    def __init__(self, ontologies: Mapping[str, Ontology],
                 critical: Iterable[Situation] = ()):
        self.ontologies = dict(ontologies)
        self.dimensions = tuple(self.ontologies)
        self._cases: dict[tuple[str, ...], Case] = {}
        self.critical: list[Situation] = []
        for s in critical:
            self.add_critical(s)

    def __len__(self) -> int:
        return len(self._cases)

    def __iter__(self):
        return iter(self._cases.values())

    def __contains__(self, situation: Situation) -> bool:
        return situation.key in self._cases

    def get(self, situation: Situation) -> Case | None:
        return self._cases.get(situation.key)

    @property
    def cases(self) -> list[Case]:
        return list(self._cases.values())

    def similarity(self, s1: Situation, s2: Situation) -> float:
        return situation_similarity(s1, s2, self.ontologies)

    def retrieve_nearest(self, current: Situation) -> tuple[Case, float]:
        """Most similar stored case; ties go to the lowest concept tuple."""
        if not self._cases:
            raise EmptyCaseBaseError("case base is empty")
        exact = self._cases.get(current.key)
        if exact is not None:
            return exact, 1.0
        best: Case | None = None
        best_sim = -1.0
        for key in sorted(self._cases):
            case = self._cases[key]
            sim = self.similarity(current, case.situation)
            if sim > best_sim:
                best, best_sim = case, sim
        return best, best_sim

    def insert_or_update(self, current: Situation, new_clicks: Iterable[str],
                         corpus: Corpus) -> Case:
        """Record one shown list and its clicks for ``current``.

        A situation not yet stored gets a new case built from the clicks; an
        existing one has its clicked set extended and its interest rebuilt
        from the whole set.
        """
        validate_situation(current, self.ontologies)
        clicks = set(new_clicks)
        case = self._cases.get(current.key)
        if case is None:
            case = Case(situation=current.with_risk(None),
                        interest=interest_from_ids(clicks, corpus),
                        clicked_docs=clicks)
            self._cases[current.key] = case
        elif not clicks <= case.clicked_docs:
            case.clicked_docs = merge_clicked_docs(case.clicked_docs, clicks)
            case.interest = interest_from_ids(case.clicked_docs, corpus)
        case.rec_count += 1
        case.click_count += len(clicks)
        return case

    def is_critical(self, situation: Situation) -> bool:
        return any(m.key == situation.key for m in self.critical)

    def add_critical(self, situation: Situation) -> bool:
        """Add to the critical set (risk level forced to 1); False if already present."""
        validate_situation(situation, self.ontologies)
        if self.is_critical(situation):
            return False
        self.critical.append(situation.with_risk(1.0))
        return True

    def critical_centroid(self) -> Situation:
        return critical_centroid(self.critical, self.ontologies)

    def to_dict(self) -> dict:
        return {
            "version": FORMAT_VERSION,
            "dimensions": list(self.dimensions),
            "cases": [self._cases[k].to_dict() for k in sorted(self._cases)],
            "critical_situations": [s.to_literal() for s in self.critical],
        }

    def save(self, path: str | Path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=1)

    @classmethod
    def from_dict(cls, data: Mapping, ontologies: Mapping[str, Ontology]) -> "CaseBase":
        if data.get("version") != FORMAT_VERSION:
            raise ConfigError(f"unsupported case-base version {data.get('version')!r}")
        base = cls(ontologies)
        if list(data.get("dimensions", base.dimensions)) != list(base.dimensions):
            raise ConfigError(f"case base dimensions {data.get('dimensions')} "
                              f"do not match ontologies {list(base.dimensions)}")
        for raw in data["cases"]:
            case = Case.from_dict(raw, base.dimensions)
            validate_situation(case.situation, base.ontologies)
            if case.situation.key in base._cases:
                raise ConfigError(f"duplicate case for {case.situation}")
            base._cases[case.situation.key] = case
        for raw in data["critical_situations"]:
            s = Situation.from_literal(raw, base.dimensions)
            if s.risk_level != 1.0:
                raise ConfigError(f"critical situation {s} must have risk 1")
            base.add_critical(s)
        return base

    @classmethod
    def load(cls, path: str | Path, ontologies: Mapping[str, Ontology]) -> "CaseBase":
        with open(path) as fh:
            return cls.from_dict(json.load(fh), ontologies)


def critical_centroid(critical: Sequence[Situation], ontologies: Mapping[str, Ontology]) -> Situation:
    """Member with the highest mean similarity to all members, itself included."""
    if not critical:
        raise EmptyCriticalSetError("no critical situations")
    best: Situation | None = None
    best_score = -1.0
    for cand in sorted(critical, key=lambda s: s.key):
        score = sum(situation_similarity(cand, other, ontologies) for other in critical) / len(critical)
        if score > best_score:
            best, best_score = cand, score
    return best
