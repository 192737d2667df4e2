"""Term-vector space: corpus statistics, tf-idf interest vectors, cosine scoring."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

from .errors import CorpusError, EmptyClickSetError

TermVector = Mapping[str, float]


def tokenize(text: str) -> list[str]:
    return text.lower().split()


def term_counts(text: str) -> dict[str, int]:
    counts: dict[str, int] = {}
    for tok in tokenize(text):
        counts[tok] = counts.get(tok, 0) + 1
    return counts


@dataclass
class DocumentVector:
    doc_id: str
    term_freqs: dict[str, int]
    weights: dict[str, float] = field(default_factory=dict)
    norm: float = 0.0

    def __post_init__(self):
        for term, tf in self.term_freqs.items():
            if tf < 0:
                raise CorpusError(f"{self.doc_id}: negative tf for {term!r}")
        self.term_freqs = {t: int(tf) for t, tf in self.term_freqs.items() if tf > 0}


class Corpus:
    """A fixed document collection with document frequencies.

    Document weights are tf*idf with idf = ln(n / n_tm), computed once at
    construction. A term present in every document gets weight 0 and is
    dropped from the weight vector.
    """

    def __init__(self, documents: Iterable[DocumentVector]):
        self.documents: dict[str, DocumentVector] = {}
        for doc in documents:
            if doc.doc_id in self.documents:
                raise CorpusError(f"duplicate document id {doc.doc_id!r}")
            self.documents[doc.doc_id] = doc
        if not self.documents:
            raise CorpusError("corpus must contain at least one document")
        self.n = len(self.documents)
        self.doc_freq: dict[str, int] = {}
        for doc in self.documents.values():
            for term in doc.term_freqs:
                self.doc_freq[term] = self.doc_freq.get(term, 0) + 1
        self._idf = {t: math.log(self.n / df) for t, df in self.doc_freq.items()}
        for doc in self.documents.values():
            doc.weights = self.weigh(doc.term_freqs)
            doc.norm = _norm(doc.weights)

    @classmethod
    def from_term_freqs(cls, docs: Mapping[str, Mapping[str, int]]) -> "Corpus":
        return cls(DocumentVector(doc_id, dict(tfs)) for doc_id, tfs in docs.items())

    def idf(self, term: str) -> float:
        try:
            return self._idf[term]
        except KeyError:
            raise CorpusError(f"term {term!r} does not occur in the corpus") from None

    def weigh(self, term_freqs: Mapping[str, float], strict: bool = True) -> dict[str, float]:
        """tf*idf weights for a bag of terms.

        With ``strict=False`` terms unknown to the corpus are skipped instead of
        raising, which is what a query needs.
        """
        out = {}
        for term, tf in term_freqs.items():
            if term not in self._idf:
                if strict:
                    raise CorpusError(f"term {term!r} does not occur in the corpus")
                continue
            w = tf * self._idf[term]
            if w != 0.0:
                out[term] = w
        return out

    def query(self, terms: Mapping[str, float] | str) -> "Query":
        if isinstance(terms, str):
            terms = term_counts(terms)
        return Query(self.weigh(terms, strict=False))

    def __len__(self) -> int:
        return self.n

    def __getitem__(self, doc_id: str) -> DocumentVector:
        return self.documents[doc_id]

    def __contains__(self, doc_id: object) -> bool:
        return doc_id in self.documents

    def __iter__(self):
        return iter(self.documents.values())


@dataclass(frozen=True)
class UserInterest:
    weights: dict[str, float]
    source_doc_count: int = 0

    @classmethod
    def empty(cls) -> "UserInterest":
        return cls({}, 0)

    def __bool__(self) -> bool:
        return bool(self.weights)


@dataclass(frozen=True)
class Query:
    weights: dict[str, float]

    def __post_init__(self):
        if not self.weights:
            raise CorpusError("query has no term that is informative in this corpus")


def build_interest(clicked_docs: Iterable[DocumentVector], corpus: Corpus) -> UserInterest:
    """Average tf*idf vector of the clicked documents.

    ``w_tm = (1/|D|) * sum_d tf(tm, d) * ln(n / n_tm)``.
    """
    docs = list(clicked_docs)
    if not docs:
        raise EmptyClickSetError("cannot build an interest vector from zero documents")
    sums: dict[str, float] = {}
    for doc in docs:
        for term, tf in doc.term_freqs.items():
            sums[term] = sums.get(term, 0.0) + tf * corpus.idf(term)
    size = len(docs)
    weights = {t: s / size for t, s in sums.items() if s != 0.0}
    return UserInterest(weights, size)


def interest_from_ids(doc_ids: Iterable[str], corpus: Corpus) -> UserInterest:
    ids = sorted(set(doc_ids))
    if not ids:
        return UserInterest.empty()
    try:
        docs = [corpus[d] for d in ids]
    except KeyError as exc:
        raise CorpusError(f"clicked document {exc} is not in the corpus") from None
    return build_interest(docs, corpus)


def _norm(v: TermVector) -> float:
    return math.sqrt(sum(w * w for w in v.values()))


def cosine_score(v1: TermVector, v2: TermVector, norm1: float | None = None,
                 norm2: float | None = None) -> float:
    """Cosine of two sparse vectors; 0 when either has zero norm."""
    if len(v1) > len(v2):
        v1, v2, norm1, norm2 = v2, v1, norm2, norm1
    dot = 0.0
    for term, w in v1.items():
        other = v2.get(term)
        if other is not None:
            dot += w * other
    if dot == 0.0:
        return 0.0
    n1 = _norm(v1) if norm1 is None else norm1
    n2 = _norm(v2) if norm2 is None else norm2
    if n1 == 0.0 or n2 == 0.0:
        return 0.0
    # rounding can push identical vectors a hair past 1
    return min(1.0, max(-1.0, dot / (n1 * n2)))


def merge_clicked_docs(existing: Iterable[str], new_clicks: Iterable[str]) -> set[str]:
    return set(existing) | set(new_clicks)


def load_corpus_jsonl(path: str | Path) -> Corpus:
    """Read ``{"id": ..., "terms": {"term": tf, ...}}`` records, one per line."""
    docs = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                docs.append(DocumentVector(str(rec["id"]), dict(rec["terms"])))
            except (KeyError, TypeError, json.JSONDecodeError) as exc:
                raise CorpusError(f"{path}:{lineno}: bad corpus record ({exc})") from None
    return Corpus(docs)


def dump_corpus_jsonl(corpus: Corpus, path: str | Path) -> None:
    with open(path, "w") as fh:
        for doc in corpus:
            fh.write(json.dumps({"id": doc.doc_id, "terms": doc.term_freqs}) + "\n")
