import random

import numpy as np
import pytest

from factgraph.corpus import Claim, Document, DocumentStore
from factgraph.encoder import DeterministicEncoder, ExternalEncoder
from factgraph.errors import ConfigError
from factgraph.retrieval import RankedDocument
from factgraph.selection import (
    RelevanceHead,
    ScoredSentence,
    SelectionConfig,
    evidence_record,
    overlap_score,
    score_pair,
    select_evidence,
)


def test_overlap_identity_is_one():
    assert score_pair("Hawaii is a state", "Hawaii is a state") == 1.0


def test_overlap_disjoint_is_zero():
    assert score_pair("Hawaii borders nothing", "Quantum flux pulsed") == 0.0


def test_overlap_two_thirds_case():
    # claim content tokens {obama, born, kenya}; sentence contributes 2 hits
    value = score_pair("Obama was born in Kenya", "Obama was born in Hawaii")
    assert value == pytest.approx(2 / 3)


def test_overlap_stopword_only_claim_scores_zero():
    assert overlap_score("the of and", "anything here") == 0.0


def test_score_pair_rejects_empty_texts():
    with pytest.raises(ValueError):
        score_pair("", "x")
    with pytest.raises(ValueError):
        score_pair("x", " ")


def _store_from(sentences_by_title):
    return DocumentStore(
        {
            title: Document(title, tuple(sentences))
            for title, sentences in sentences_by_title.items()
        }
    )


def _docs(*titles):
    return [RankedDocument(title=t, score=1.0, ambiguous=False) for t in titles]


CLAIM = Claim(id=1, text="red blue")  # two content tokens: scores are 0, 0.5, 1.0


def test_threshold_is_inclusive():
    store = _store_from({"Page": ["red blue here", "red only", "nothing matches"]})
    cfg = SelectionConfig(threshold=0.5, top_sents=5)
    picked = select_evidence(CLAIM, _docs("Page"), store, cfg)
    assert [(s.sentence_index, s.score) for s in picked] == [(0, 1.0), (1, 0.5)]


def test_threshold_zero_keeps_everything_up_to_top_k():
    store = _store_from({"Page": ["red blue here", "red only", "nothing matches"]})
    cfg = SelectionConfig(threshold=0.0, top_sents=5)
    picked = select_evidence(CLAIM, _docs("Page"), store, cfg)
    assert [s.sentence_index for s in picked] == [0, 1, 2]
    assert picked[-1].score == 0.0


def test_top_five_with_lexicographic_tie_breaks():
    # seven sentences pass; ties broken by (title asc, index asc)
    store = _store_from(
        {
            "Bravo": ["red blue", "red goes", "red stays"],
            "Alpha": ["red blue", "red here", "blue there", "red blue again"],
        }
    )
    cfg = SelectionConfig(threshold=0.5, top_sents=5)
    picked = select_evidence(CLAIM, _docs("Bravo", "Alpha"), store, cfg)
    assert [(s.page_title, s.sentence_index) for s in picked] == [
        ("Alpha", 0),
        ("Alpha", 3),
        ("Bravo", 0),
        ("Alpha", 1),
        ("Alpha", 2),
    ]
    assert len(picked) == cfg.top_sents


def test_blank_sentences_are_skipped():
    store = _store_from({"Page": ["", "red blue", "   "]})
    picked = select_evidence(CLAIM, _docs("Page"), store, SelectionConfig())
    assert [s.sentence_index for s in picked] == [1]


def test_empty_result_is_valid_no_evidence():
    store = _store_from({"Page": ["nothing relevant at all"]})
    cfg = SelectionConfig(threshold=0.5)
    assert select_evidence(CLAIM, _docs("Page"), store, cfg) == []


def _random_fixture(rng):
    words = ["red", "blue", "green", "tall", "wide", "old", "new"]
    titles = {}
    for t in range(rng.randint(1, 4)):
        sentences = [
            " ".join(rng.choice(words) for _ in range(rng.randint(1, 6)))
            for _ in range(rng.randint(1, 6))
        ]
        titles[f"T{t}"] = sentences
    return _store_from(titles), _docs(*titles.keys())


def test_monotone_filter_and_output_invariants():
    rng = random.Random(23)
    claim = Claim(id=2, text="red blue green")
    for _ in range(40):
        store, docs = _random_fixture(rng)
        tau1, tau2 = sorted((rng.random(), rng.random()))
        low = select_evidence(claim, docs, store, SelectionConfig(threshold=tau1))
        high = select_evidence(claim, docs, store, SelectionConfig(threshold=tau2))
        assert {s.pair() for s in high} <= {s.pair() for s in low}
        for out, tau in ((low, tau1), (high, tau2)):
            assert len(out) <= 5
            assert all(s.score >= tau for s in out)
            keys = [(-s.score, s.page_title, s.sentence_index) for s in out]
            assert keys == sorted(keys)


def test_selection_deterministic():
    store = _store_from({"Page": ["red blue", "red", "blue"]})
    cfg = SelectionConfig(threshold=0.0)
    first = select_evidence(CLAIM, _docs("Page"), store, cfg)
    assert first == select_evidence(CLAIM, _docs("Page"), store, cfg)


def test_selection_config_validation():
    with pytest.raises(ConfigError):
        SelectionConfig(threshold=1.5)
    with pytest.raises(ConfigError):
        SelectionConfig(top_sents=0)
    with pytest.raises(ConfigError):
        SelectionConfig(scorer="bm25")


def test_encoder_scorer_requires_head_and_provider():
    with pytest.raises(ConfigError):
        score_pair("a b", "c d", scorer="encoder")
    with pytest.raises(ConfigError):
        score_pair("a b", "c d", scorer="encoder", head=RelevanceHead(np.zeros(4), 0.0))


def test_encoder_scorer_maps_cls_through_head(tmp_path):
    provider = DeterministicEncoder(dim=16, seed=1)
    head = RelevanceHead(weights=np.linspace(-1, 1, 16), bias=0.1)
    value = score_pair("red blue", "blue red", scorer="encoder", provider=provider, head=head)
    assert 0.0 <= value <= 1.0
    again = score_pair("red blue", "blue red", scorer="encoder", provider=provider, head=head)
    assert value == again
    path = tmp_path / "head.json"
    head.save(path)
    loaded = RelevanceHead.load(path)
    assert np.array_equal(loaded.weights, head.weights)
    assert loaded.bias == head.bias


def test_encoder_scorer_with_contextual_provider_varies(tmp_path):
    # A context-sensitive provider (faked transport) produces pair-dependent
    # CLS vectors, which is where the relevance head becomes meaningful.
    def transport(url, payload):
        tokens = payload["tokens"]
        base = float(len([t for t in tokens if t == "red"]))
        return {
            "format": "FACTGRAPH-ENC v1",
            "rows": [[base + i * 0.1] * 4 for i in range(len(tokens))],
        }

    provider = ExternalEncoder(url="http://encoder.test", transport=transport)
    head = RelevanceHead(weights=np.ones(4), bias=0.0)
    high = score_pair("red red", "red red red", scorer="encoder", provider=provider, head=head)
    low = score_pair("blue blue", "green", scorer="encoder", provider=provider, head=head)
    assert high != low


def test_relevance_head_fit_separates_labels():
    rng = np.random.default_rng(3)
    pos = rng.normal(1.0, 0.2, (30, 8))
    neg = rng.normal(-1.0, 0.2, (30, 8))
    vectors = np.vstack([pos, neg])
    labels = np.array([1.0] * 30 + [0.0] * 30)
    head = RelevanceHead.fit(vectors, labels, epochs=300, seed=4)
    preds = [head.score(v) > 0.5 for v in vectors]
    accuracy = sum(p == bool(l) for p, l in zip(preds, labels)) / len(labels)
    assert accuracy >= 0.95


def test_select_evidence_with_encoder_scorer():
    provider = DeterministicEncoder(dim=8, seed=0)
    head = RelevanceHead(weights=np.linspace(-0.5, 0.5, 8), bias=0.0)
    store = _store_from({"Page": ["red blue", "green tall"]})
    cfg = SelectionConfig(threshold=0.0, scorer="encoder")
    picked = select_evidence(CLAIM, _docs("Page"), store, cfg, provider=provider, head=head)
    assert len(picked) == 2
    assert all(0.0 <= s.score <= 1.0 for s in picked)
    with pytest.raises(ConfigError):
        select_evidence(CLAIM, _docs("Page"), store, cfg)


def test_evidence_record_format():
    rows = [
        ScoredSentence("Hawaii", 0, "text", 0.75),
        ScoredSentence("Hawaii", 2, "more", 0.5),
    ]
    record = evidence_record(9, rows)
    assert record == {"claim_id": 9, "evidence": [["Hawaii", 0, 0.75], ["Hawaii", 2, 0.5]]}
