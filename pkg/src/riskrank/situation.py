"""Situations: one ontology concept per context dimension, plus a risk level."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Mapping, Sequence

from .errors import ConfigError, DimensionMismatchError
from .ontology import Ontology, concept_similarity


@dataclass(frozen=True)
class Situation:
    dimensions: tuple[str, ...]
    values: tuple[str, ...]
    risk_level: float | None = None

    def __post_init__(self):
        if len(self.dimensions) != len(self.values):
            raise DimensionMismatchError("one concept per dimension is required")
        if len(set(self.dimensions)) != len(self.dimensions):
            raise DimensionMismatchError(f"repeated dimension in {self.dimensions}")
        if self.risk_level is not None and not 0.0 <= self.risk_level <= 1.0:
            raise ValueError(f"risk level must lie in [0, 1], got {self.risk_level!r}")

    @classmethod
    def of(cls, concepts: Mapping[str, str], dimensions: Sequence[str] | None = None,
           risk_level: float | None = None) -> "Situation":
        dims = tuple(dimensions) if dimensions is not None else tuple(concepts)
        missing = [d for d in dims if d not in concepts]
        extra = [d for d in concepts if d not in dims]
        if missing or extra:
            raise DimensionMismatchError(f"missing dimensions {missing}, unexpected {extra}")
        return cls(dims, tuple(concepts[d] for d in dims), risk_level)

    @classmethod
    def from_literal(cls, data: Mapping, dimensions: Sequence[str]) -> "Situation":
        """Parse ``{"Location": ..., "Time": ..., "Social": ..., "risk": r}``."""
        concepts = {k: v for k, v in data.items() if k != "risk"}
        if not all(isinstance(v, str) for v in concepts.values()):
            raise ConfigError(f"situation concepts must be strings: {dict(data)}")
        return cls.of(concepts, dimensions, data.get("risk"))

    def to_literal(self) -> dict:
        out: dict = dict(zip(self.dimensions, self.values))
        if self.risk_level is not None:
            out["risk"] = self.risk_level
        return out

    @property
    def concepts(self) -> dict[str, str]:
        return dict(zip(self.dimensions, self.values))

    @property
    def key(self) -> tuple[str, ...]:
        """Concept tuple in dimension order; identifies a situation in the case base."""
        return self.values

    def concept(self, dimension: str) -> str:
        try:
            return self.values[self.dimensions.index(dimension)]
        except ValueError:
            raise DimensionMismatchError(f"situation has no {dimension!r} dimension") from None

    def same_concepts(self, other: "Situation") -> bool:
        return self.dimensions == other.dimensions and self.values == other.values

    def with_risk(self, risk_level: float | None) -> "Situation":
        return replace(self, risk_level=risk_level)

    def __str__(self) -> str:
        return "(" + ", ".join(f"{d}={c}" for d, c in zip(self.dimensions, self.values)) + ")"


def situation_similarity(s1: Situation, s2: Situation, ontologies: Mapping[str, Ontology]) -> float:
    """Mean Wu-Palmer similarity over the configured dimensions.

    ``ontologies`` fixes the dimension set; both situations must cover exactly
    those dimensions.
    """
    if set(s1.dimensions) != set(ontologies) or set(s2.dimensions) != set(ontologies):
        raise DimensionMismatchError(
            f"situations {s1.dimensions} / {s2.dimensions} vs ontologies {tuple(ontologies)}"
        )
    total = 0.0
    for dim, onto in ontologies.items():
        total += concept_similarity(onto, s1.concept(dim), s2.concept(dim))
    return total / len(ontologies)


def validate_situation(s: Situation, ontologies: Mapping[str, Ontology]) -> None:
    """Raise unless every concept of ``s`` is a node of its dimension's ontology."""
    if set(s.dimensions) != set(ontologies):
        raise DimensionMismatchError(f"situation {s.dimensions} vs ontologies {tuple(ontologies)}")
    for dim, concept in zip(s.dimensions, s.values):
        ontologies[dim].ancestors(concept)
