import math
import random

import numpy as np
import pytest
from hypothesis import given, strategies as st

import oracles
from helpers import sit
from riskrank.casebase import CaseBase
from riskrank.engine import (
    CONTEXT,
    QUERY,
    RANDOM,
    Engine,
    RankParams,
    RankedList,
    epsilon_from_risk,
    exploration_fraction,
    rank_documents,
    score_document,
)
from riskrank.errors import ConfigError, FeedbackError
from riskrank.interest import Corpus, Query, UserInterest
from riskrank.ontology import ConceptRiskTable
from riskrank.risk import RiskConfig


def random_corpus(rng, n_docs=None, vocab=8):
    n_docs = n_docs or rng.randrange(2, 30)
    docs = {}
    for i in range(n_docs):
        terms = rng.sample([f"t{k}" for k in range(vocab)], rng.randrange(1, 4))
        docs[f"d{i:02d}"] = {t: rng.randrange(1, 4) for t in terms}
    return docs


def query_order(docs, q_weights, n):
    scored = [(-oracles.cosine(q_weights, oracles.tfidf(docs, d)), d) for d in docs]
    return [d for _, d in sorted(scored)[:n]]


class TestEpsilon:
    def test_examples(self):
        assert epsilon_from_risk(0.0, RankParams(0.2, 0.8)) == 0.8
        assert epsilon_from_risk(1.0, RankParams(0.1, 1.0)) == pytest.approx(0.1, abs=1e-12)
        assert epsilon_from_risk(0.5, RankParams(0.0, 1.0)) == 0.5

    def test_clamped_below(self):
        assert epsilon_from_risk(1.0, RankParams(0.1, 0.5)) == 0.1

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            epsilon_from_risk(1.5, RankParams())

    @given(st.floats(0, 1), st.floats(0, 1))
    def test_params(self, a, b):
        lo, hi = min(a, b), max(a, b)
        p = RankParams(lo, hi)
        grid = np.linspace(0, 1, 101)
        vals = [epsilon_from_risk(float(r), p) for r in grid]
        assert sum(y > x for x, y in zip(vals, vals[1:])) == 0
        assert vals[0] == hi
        assert all(lo <= v <= hi for v in vals)

    def test_rank_params_validation(self):
        with pytest.raises(ConfigError):
            RankParams(0.5, 0.4)
        with pytest.raises(ConfigError):
            RankParams(list_size=0)
        p = RankParams(0.1, 0.9, 5, 3)
        assert RankParams.from_dict(p.to_dict()) == p


class TestScoring:
    @pytest.fixture
    def setup(self):
        corpus = Corpus.from_term_freqs({"d1": {"a": 1, "b": 1}, "d2": {"c": 1}})
        return corpus["d1"], corpus.query("a"), UserInterest({"b": 1.0}, 1)

    def test_no_exploration(self, setup):
        doc, q, ui = setup
        rng = np.random.default_rng(0)
        provs = {score_document(doc, q, ui, 0.0, rng)[1] for _ in range(500)}
        assert provs == {QUERY, CONTEXT}

    def test_full_exploration(self, setup):
        doc, q, ui = setup
        rng = np.random.default_rng(0)
        assert {score_document(doc, q, ui, 1.0, rng)[1] for _ in range(500)} == {RANDOM}

    def test_no_interest_uses_query(self, setup):
        doc, q, _ = setup
        rng = np.random.default_rng(0)
        for _ in range(200):
            score, prov = score_document(doc, q, None, 0.0, rng)
            assert prov == QUERY and score == pytest.approx(1 / math.sqrt(2), abs=1e-12)

    @pytest.mark.parametrize("eps", [0.1, 0.3, 0.7])
    def test_random_fraction(self, setup, eps):
        doc, q, ui = setup
        rng = np.random.default_rng(12345)
        n = 100_000
        hits = sum(score_document(doc, q, ui, eps, rng)[1] == RANDOM for _ in range(n))
        assert abs(hits / n - eps) <= 3 * math.sqrt(eps * (1 - eps) / n)

    def test_matches_two_policy_oracle(self):
        rng = random.Random(5)
        for trial in range(20):
            docs = random_corpus(rng)
            corpus = Corpus.from_term_freqs(docs)
            ui = UserInterest({"t1": 1.5, "t3": 0.5}, 2)
            q = Query({"t0": 1.0, "t2": 2.0})
            got = rank_documents(corpus, q, ui, 0.0, RankParams(list_size=100), np.random.default_rng(trial))
            # replay the same draw sequence: l, then j, per document in corpus order
            draws = np.random.default_rng(trial)
            expected = []
            for d in corpus:
                l, j = draws.random(), draws.random()
                vec = q.weights if l < j else ui.weights
                expected.append((-oracles.cosine(vec, oracles.tfidf(docs, d.doc_id)), d.doc_id))
            assert got.doc_ids == [d for _, d in sorted(expected)]
            assert [e.score for e in got] == pytest.approx([-s for s, _ in sorted(expected)], abs=1e-12)


class TestRank:
    def test_single_document(self):
        corpus = Corpus.from_term_freqs({"only": {"a": 1}})
        for eps in (0.0, 0.5, 1.0):
            rl = rank_documents(corpus, Query({"a": 1.0}), None, eps, RankParams(), np.random.default_rng(1))
            assert rl.doc_ids == ["only"]

    def test_three_docs_query_order(self):
        docs = {"x": {"a": 1, "b": 3}, "y": {"a": 2}, "z": {"b": 1, "c": 1}}
        corpus = Corpus.from_term_freqs(docs)
        q = corpus.query("a")
        rl = rank_documents(corpus, q, None, 0.0, RankParams(), np.random.default_rng(0))
        assert rl.doc_ids == query_order(docs, q.weights, 10)

    def test_truncates_and_unique(self):
        docs = random_corpus(random.Random(1), n_docs=25)
        corpus = Corpus.from_term_freqs(docs)
        rl = rank_documents(corpus, Query({"t1": 1.0}), None, 0.5, RankParams(list_size=7), np.random.default_rng(0))
        assert len(rl) == 7 and len(set(rl.doc_ids)) == 7
        scores = [e.score for e in rl]
        assert scores == sorted(scores, reverse=True)

    def test_deterministic(self):
        corpus = Corpus.from_term_freqs(random_corpus(random.Random(2), n_docs=20))
        a = rank_documents(corpus, Query({"t1": 1.0}), None, 0.4, RankParams(), np.random.default_rng(9))
        b = rank_documents(corpus, Query({"t1": 1.0}), None, 0.4, RankParams(), np.random.default_rng(9))
        assert a == b

    def test_exploration_fraction(self):
        rl = RankedList(tuple())
        assert math.isnan(exploration_fraction([rl]))


def baseline_mismatches(n_corpora, ontologies, seed=0):
    """Count corpora where an epsilon-0 engine with no cases departs from query-cosine order."""
    rng = random.Random(seed)
    bad = 0
    for i in range(n_corpora):
        docs = random_corpus(rng)
        corpus = Corpus.from_term_freqs(docs)
        known = sorted(corpus.doc_freq)
        q = Query({t: float(rng.randrange(1, 3)) for t in rng.sample(known, min(2, len(known)))})
        engine = Engine(corpus, CaseBase(ontologies), params=RankParams(list_size=10, random_seed=i),
                        epsilon_override=0.0)
        rl = engine.process_query(sit("Office", "Morning", "Client"), q)
        bad += rl.doc_ids != query_order(docs, q.weights, 10)
    return bad


def test_baseline_equivalence(ontologies):
    assert baseline_mismatches(30, ontologies) == 0


class TestEngine:
    @pytest.fixture
    def corpus(self):
        return Corpus.from_term_freqs(random_corpus(random.Random(7), n_docs=15))

    def test_cold_start_exploits(self, ontologies, corpus):
        engine = Engine(corpus, CaseBase(ontologies), params=RankParams(0.0, 1.0))
        rl = engine.process_query(sit("Office", "Morning", "Client"), Query({"t1": 1.0}))
        assert rl.risk == 1.0 and rl.epsilon == 0.0
        assert all(e.provenance == QUERY for e in rl)

    def test_critical_situation(self, ontologies, corpus):
        crit = sit("MeetingRoom", "Morning", "Client")
        engine = Engine(corpus, CaseBase(ontologies, [crit]), params=RankParams(0.1, 1.0, list_size=15))
        br = engine.assess_risk(crit)
        assert br.risk == 1.0 and br.source == "critical"
        lists = [engine.process_query(crit, Query({"t1": 1.0})) for _ in range(2000)]
        assert all(rl.epsilon == pytest.approx(0.1, abs=1e-12) for rl in lists)
        assert abs(exploration_fraction(lists) - 0.1) < 0.01

    def test_zero_risk_gives_eps_max(self, ontologies, corpus):
        crit = sit("MeetingRoom", "Morning", "Client")
        risks = ConceptRiskTable.from_nested({
            "Location": {"MeetingRoom": 1.0, "Kitchen": 0.0},
            "Time": {"Morning": 1.0, "Evening": 0.0},
            "Social": {"Client": 1.0, "Family": 0.0},
        })
        engine = Engine(corpus, CaseBase(ontologies, [crit]), risks, RiskConfig(0.0, 1.0, 0.0),
                        RankParams(0.0, 0.8))
        rl = engine.process_query(sit("Kitchen", "Evening", "Family"), Query({"t1": 1.0}))
        assert rl.risk == 0.0 and rl.epsilon == 0.8

    def test_breakdown_components(self, ontologies, corpus):
        crit = sit("MeetingRoom", "Morning", "Client")
        risks = ConceptRiskTable.from_nested({"Location": {"MeetingRoom": 1.0, "Office": 0.5},
                                              "Time": {"Morning": 0.5}, "Social": {"Client": 1.0}})
        cb = CaseBase(ontologies, [crit])
        cb.insert_or_update(sit("Kitchen", "Evening", "Family"), set(), corpus)
        cb.insert_or_update(sit("Office", "Morning", "Colleague"), {"d00"}, corpus)
        cfg = RiskConfig(0.2, 0.5, 0.3, B=0.9)
        engine = Engine(corpus, cb, risks, cfg)
        cur = sit("Office", "Morning", "Colleague")
        br = engine.assess_risk(cur)
        assert br.r_m == pytest.approx(1 - 0.9 + cb.similarity(cur, crit), abs=1e-12)
        # mu raw (1, 0.5, 1) -> (0.4, 0.2, 0.4); Colleague unannotated
        assert br.r_c == pytest.approx((0.4 * 0.5 + 0.2 * 0.5) / 0.6, abs=1e-12)
        # CTRs (0, 1): Var clamped to 0, nearest CTR 1
        assert br.r_v == 0.0
        expected = (0.2 * br.r_m + 0.5 * br.r_c) / 1.0
        assert br.risk == pytest.approx(expected, abs=1e-12)

    def test_feedback_no_click(self, ontologies, corpus):
        engine = Engine(corpus, CaseBase(ontologies))
        s = sit("Office", "Morning", "Client")
        rl = engine.process_query(s, Query({"t1": 1.0}))
        engine.feedback(s, rl, set())
        case = engine.casebase.get(s)
        assert case.rec_count == 1 and case.click_count == 0 and not case.interest

    def test_feedback_repeated(self, ontologies, corpus):
        engine = Engine(corpus, CaseBase(ontologies), params=RankParams(0, 0))
        s = sit("Office", "Morning", "Colleague")
        q = Query({"t1": 1.0})
        weights = None
        for i in range(1, 6):
            rl = engine.process_query(s, q)
            engine.feedback(s, rl, {rl.doc_ids[0]})
            case = engine.casebase.get(s)
            assert case.rec_count == i and case.click_count == i
            if weights is not None:
                assert case.interest.weights == weights
            weights = case.interest.weights

    def test_promotion(self, ontologies, corpus):
        # cold start: no estimator available, default risk 1 twice -> stored R = 1 -> critical
        engine = Engine(corpus, CaseBase(ontologies))
        s = sit("Office", "Morning", "Client")
        for _ in range(2):
            rl = engine.process_query(s, Query({"t1": 1.0}))
            stored = engine.feedback(s, rl, set())
        assert engine.casebase.get(s).risk_history == [1.0, 1.0]
        assert stored == 1.0
        assert engine.casebase.is_critical(s)

    def test_concept_risks_updated(self, ontologies, corpus):
        engine = Engine(corpus, CaseBase(ontologies), risk_config=RiskConfig(default_risk=0.4),
                        promote_critical=False)
        s = sit("Office", "Morning", "Client")
        rl = engine.process_query(s, Query({"t1": 1.0}))
        engine.feedback(s, rl, set())
        assert engine.concept_risks.get("Location", "Office") == pytest.approx(0.4)

    def test_clicked_not_shown(self, ontologies, corpus):
        engine = Engine(corpus, CaseBase(ontologies), params=RankParams(list_size=2))
        s = sit("Office", "Morning", "Client")
        rl = engine.process_query(s, Query({"t1": 1.0}))
        hidden = next(d.doc_id for d in corpus if d.doc_id not in rl.doc_ids)
        with pytest.raises(FeedbackError):
            engine.feedback(s, rl, {hidden})

    def test_determinism(self, ontologies, corpus):
        def run():
            engine = Engine(corpus, CaseBase(ontologies), params=RankParams(0.0, 1.0, random_seed=11),
                            risk_config=RiskConfig(default_risk=0.3))
            out = []
            for i in range(20):
                s = sit("Office", "Morning", "Client") if i % 2 else sit("Kitchen", "Evening", "Family")
                ranked, _ = engine.trial(s, Query({"t1": 1.0}), lambda rl: rl.doc_ids[:1])
                out.append(ranked)
            return out
        assert run() == run()

    def test_bad_override(self, ontologies, corpus):
        with pytest.raises(ConfigError):
            Engine(corpus, CaseBase(ontologies), epsilon_override=2.0)
