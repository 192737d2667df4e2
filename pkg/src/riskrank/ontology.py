"""Concept trees per context dimension and Wu-Palmer concept similarity."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

from .errors import ConfigError, OntologyError, UnknownConceptError

DEFAULT_DIMENSIONS = ("Location", "Time", "Social")


@dataclass(frozen=True)
class Ontology:
    """A rooted concept tree for one context dimension.

    Build instances with :meth:`from_edges`, which validates the tree shape.
    Ancestor paths are precomputed because the tree never changes after load.
    """

    dimension: str
    root: str
    parent: Mapping[str, str]
    _paths: dict[str, tuple[str, ...]] = field(default_factory=dict, repr=False, compare=False)

    @classmethod
    def from_edges(cls, dimension: str, root: str, edges: Iterable[tuple[str, str]]) -> "Ontology":
        parent: dict[str, str] = {}
        children: dict[str, list[str]] = {root: []}
        for p, c in edges:
            if c == root:
                raise OntologyError(f"{dimension}: root {root!r} cannot have a parent")
            if c in parent and parent[c] != p:
                raise OntologyError(
                    f"{dimension}: concept {c!r} has two parents ({parent[c]!r}, {p!r})"
                )
            parent[c] = p
            children.setdefault(p, []).append(c)
            children.setdefault(c, [])

        # walk down from the root; anything not reached is orphaned or on a cycle
        paths: dict[str, tuple[str, ...]] = {root: (root,)}
        stack = [root]
        while stack:
            node = stack.pop()
            for child in children[node]:
                if child in paths:
                    continue
                paths[child] = (child,) + paths[node]
                stack.append(child)
        missing = set(children) - set(paths)
        if missing:
            raise OntologyError(
                f"{dimension}: concepts unreachable from root {root!r}: {sorted(missing)}"
            )
        return cls(dimension=dimension, root=root, parent=dict(parent), _paths=paths)

    @classmethod
    def from_dict(cls, data: Mapping) -> "Ontology":
        try:
            return cls.from_edges(data["dimension"], data["root"], [tuple(e) for e in data["edges"]])
        except KeyError as exc:
            raise ConfigError(f"ontology document missing field {exc}") from None

    @classmethod
    def load(cls, path: str | Path) -> "Ontology":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        edges = [[p, c] for c, p in sorted(self.parent.items())]
        return {"dimension": self.dimension, "root": self.root, "edges": edges}

    @property
    def nodes(self) -> frozenset[str]:
        return frozenset(self._paths)

    def __contains__(self, concept: object) -> bool:
        return concept in self._paths

    def __len__(self) -> int:
        return len(self._paths)

    def ancestors(self, concept: str) -> tuple[str, ...]:
        """Path from ``concept`` up to the root, both ends included."""
        try:
            return self._paths[concept]
        except KeyError:
            raise UnknownConceptError(f"{concept!r} is not in the {self.dimension} ontology") from None

    def depth(self, concept: str) -> int:
        """Number of nodes on the path to the root; the root has depth 1."""
        return len(self.ancestors(concept))

    def lcs(self, c1: str, c2: str) -> str:
        """Least common subsumer: deepest node that is an ancestor-or-self of both."""
        a1 = self.ancestors(c1)
        a2 = self.ancestors(c2)
        # align both root paths at equal depth, then climb in lockstep
        if len(a1) > len(a2):
            a1 = a1[len(a1) - len(a2):]
        else:
            a2 = a2[len(a2) - len(a1):]
        for x, y in zip(a1, a2):
            if x == y:
                return x
        raise OntologyError("paths do not share a root")  # unreachable for a valid tree

    def similarity(self, c1: str, c2: str) -> float:
        return concept_similarity(self, c1, c2)


def depth(ontology: Ontology, concept: str) -> int:
    return ontology.depth(concept)


def lcs(ontology: Ontology, c1: str, c2: str) -> str:
    return ontology.lcs(c1, c2)


def concept_similarity(ontology: Ontology, c1: str, c2: str) -> float:
    """Wu-Palmer similarity ``2*depth(lcs) / (depth(c1) + depth(c2))``."""
    if c1 == c2:
        ontology.ancestors(c1)
        return 1.0
    d_lcs = ontology.depth(ontology.lcs(c1, c2))
    return 2.0 * d_lcs / (ontology.depth(c1) + ontology.depth(c2))


class ConceptRiskTable:
    """Per-concept risk levels ``cv`` kept as running means.

    Each entry stores ``(sum, count)`` so that propagating a new situation risk
    is an O(1) update and the stored value always equals the mean of every
    contributing sample. A seeded annotation counts as one sample.
    """

    def __init__(self, entries: Mapping[tuple[str, str], float] | None = None):
        self._sums: dict[tuple[str, str], float] = {}
        self._counts: dict[tuple[str, str], int] = {}
        for (dim, concept), cv in (entries or {}).items():
            self.set(dim, concept, cv)

    @classmethod
    def from_nested(cls, data: Mapping[str, Mapping[str, float]]) -> "ConceptRiskTable":
        """Build from ``{dimension: {concept: cv}}``."""
        return cls({(d, c): v for d, per_dim in data.items() for c, v in per_dim.items()})

    def set(self, dimension: str, concept: str, cv: float) -> None:
        _check_unit(cv, "concept risk")
        self._sums[(dimension, concept)] = float(cv)
        self._counts[(dimension, concept)] = 1

    def observe(self, dimension: str, concept: str, r: float) -> float:
        _check_unit(r, "situation risk")
        key = (dimension, concept)
        self._sums[key] = self._sums.get(key, 0.0) + r
        self._counts[key] = self._counts.get(key, 0) + 1
        return self._sums[key] / self._counts[key]

    def get(self, dimension: str, concept: str) -> float | None:
        """Mean risk of a concept, or ``None`` when it carries no annotation."""
        key = (dimension, concept)
        if key not in self._counts:
            return None
        return self._sums[key] / self._counts[key]

    def count(self, dimension: str, concept: str) -> int:
        return self._counts.get((dimension, concept), 0)

    def __contains__(self, key: object) -> bool:
        return key in self._counts

    def __len__(self) -> int:
        return len(self._counts)

    def items(self):
        for key in self._counts:
            yield key, self._sums[key] / self._counts[key]

    def copy(self) -> "ConceptRiskTable":
        new = ConceptRiskTable()
        new._sums = dict(self._sums)
        new._counts = dict(self._counts)
        return new


def _check_unit(value: float, what: str) -> None:
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{what} must lie in [0, 1], got {value!r}")


def load_ontologies(docs: Iterable[Mapping]) -> dict[str, Ontology]:
    """Index ontology documents by dimension, rejecting duplicates."""
    out: dict[str, Ontology] = {}
    for doc in docs:
        onto = Ontology.from_dict(doc)
        if onto.dimension in out:
            raise ConfigError(f"duplicate ontology for dimension {onto.dimension!r}")
        out[onto.dimension] = onto
    return out
