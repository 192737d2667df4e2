"""Risk-aware contextual epsilon-greedy document ranking."""

from .casebase import Case, CaseBase, critical_centroid
from .engine import Engine, RankedList, RankParams, epsilon_from_risk, rank_documents, score_document
from .interest import Corpus, DocumentVector, Query, UserInterest, build_interest, cosine_score
from .ontology import ConceptRiskTable, Ontology, concept_similarity
from .risk import RiskConfig, aggregate_risk
from .situation import Situation, situation_similarity

__all__ = [
    "Case", "CaseBase", "ConceptRiskTable", "Corpus", "DocumentVector", "Engine", "Ontology",
    "Query", "RankParams", "RankedList", "RiskConfig", "Situation", "UserInterest",
    "aggregate_risk", "build_interest", "concept_similarity", "cosine_score", "critical_centroid",
    "epsilon_from_risk", "rank_documents", "score_document", "situation_similarity",
]

__version__ = "0.1.0"
