"""Claim-sentence relevance scoring, threshold filtering, and top-k selection."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus import DocumentStore
from .errors import ConfigError, IngestionError
from .retrieval import RankedDocument
from .text import content_token_set

RELEVANCE_HEAD_FORMAT = "FACTGRAPH-HEAD v1"

# Threshold grid used by the sweep report.
SWEEP_THRESHOLDS = (0.0, 1e-4, 1e-3, 1e-2, 1e-1)

SCORERS = ("overlap", "encoder")


@dataclass(frozen=True)
class ScoredSentence:
    page_title: str
    sentence_index: int
    text: str
    score: float

    def pair(self) -> tuple[str, int]:
        return (self.page_title, self.sentence_index)


@dataclass
class SelectionConfig:
    """Knobs for evidence selection.

    ``threshold`` is inclusive: a sentence survives when score >= threshold,
    so threshold 0 means "no filter".
    """

    threshold: float = 0.0
    top_docs: int = 10
    top_sents: int = 5
    scorer: str = "overlap"

    def __post_init__(self):
        if not 0.0 <= self.threshold <= 1.0:
            raise ConfigError(f"threshold must lie in [0, 1], got {self.threshold}")
        if self.top_sents < 1:
            raise ConfigError(f"top_sents must be >= 1, got {self.top_sents}")
        if self.top_docs < 1:
            raise ConfigError(f"top_docs must be >= 1, got {self.top_docs}")
        if self.scorer not in SCORERS:
            raise ConfigError(f"unknown scorer {self.scorer!r}; expected one of {SCORERS}")


@dataclass
class RelevanceHead:
    """Logistic head mapping a classification vector to a relevance in [0, 1]."""

    weights: np.ndarray
    bias: float

    def score(self, vector: np.ndarray) -> float:
        if vector.shape != self.weights.shape:
            raise ConfigError(
                f"relevance head expects dimension {self.weights.shape[0]}, "
                f"got {vector.shape[0]}"
            )
        z = float(self.weights @ vector + self.bias)
        return 1.0 / (1.0 + math.exp(-z))

    def save(self, path: str | Path) -> None:
        body = {
            "format": RELEVANCE_HEAD_FORMAT,
            "weights": self.weights.tolist(),
            "bias": self.bias,
        }
        Path(path).write_text(json.dumps(body, sort_keys=True), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "RelevanceHead":
        try:
            body = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise IngestionError(f"cannot read relevance head from {path}: {exc}") from exc
        if body.get("format") != RELEVANCE_HEAD_FORMAT:
            raise IngestionError(f"{path}: unsupported relevance head format")
        return cls(weights=np.asarray(body["weights"], dtype=np.float64), bias=float(body["bias"]))

    @classmethod
    def fit(cls, vectors, labels, epochs: int = 200, learning_rate: float = 0.5, seed: int = 0):
        """Fit by plain logistic regression on (vector, 0/1 relevance) pairs."""
        x = np.asarray(vectors, dtype=np.float64)
        y = np.asarray(labels, dtype=np.float64)
        rng = np.random.default_rng(seed)
        w = rng.uniform(-0.1, 0.1, x.shape[1])
        b = 0.0
        for _ in range(epochs):
            p = 1.0 / (1.0 + np.exp(-(x @ w + b)))
            grad = p - y
            w -= learning_rate * (x.T @ grad) / len(y)
            b -= learning_rate * float(grad.mean())
        return cls(weights=w, bias=b)


def overlap_score(claim_text: str, sentence_text: str) -> float:
    """Fraction of the claim's content tokens found in the sentence."""
    claim_tokens = content_token_set(claim_text)
    if not claim_tokens:
        return 0.0
    sentence_tokens = content_token_set(sentence_text)
    return len(claim_tokens & sentence_tokens) / len(claim_tokens)


def score_pair(
    claim_text: str,
    sentence_text: str,
    scorer: str = "overlap",
    provider=None,
    head: RelevanceHead | None = None,
) -> float:
    """Score one claim-sentence pair with the configured scorer."""
    if not claim_text or not claim_text.strip():
        raise ValueError("claim text is empty")
    if not sentence_text or not sentence_text.strip():
        raise ValueError("sentence text is empty")
    if scorer == "overlap":
        return overlap_score(claim_text, sentence_text)
    if scorer == "encoder":
        if head is None:
            raise ConfigError("encoder scorer requires a loaded relevance head")
        if provider is None:
            raise ConfigError("encoder scorer requires an embedding provider")
        from .encoder import build_marked_sequence, classification_vector, encode

        seq = build_marked_sequence(claim_text, [sentence_text])
        emb = encode(seq, provider)
        return head.score(classification_vector(emb))
    raise ConfigError(f"unknown scorer {scorer!r}")


def select_evidence(
    claim,
    docs: list[RankedDocument],
    store: DocumentStore,
    cfg: SelectionConfig,
    provider=None,
    head: RelevanceHead | None = None,
) -> list[ScoredSentence]:
    """Score every sentence of the candidate documents, filter, and truncate.

    Sentences scoring >= threshold are kept, sorted by (score desc, title
    asc, index asc), and cut to ``top_sents``. An empty result is a valid
    "no evidence" outcome. Blank sentence rows are not scoreable and are
    skipped.
    """
    kept: list[ScoredSentence] = []
    for doc in docs:
        document = store.get(doc.title)
        for index, text in enumerate(document.sentences):
            if not text.strip():
                continue
            score = score_pair(claim.text, text, cfg.scorer, provider=provider, head=head)
            if score >= cfg.threshold:
                kept.append(
                    ScoredSentence(
                        page_title=doc.title, sentence_index=index, text=text, score=score
                    )
                )
    kept.sort(key=lambda s: (-s.score, s.page_title, s.sentence_index))
    return kept[: cfg.top_sents]


def evidence_record(claim_id: int, evidence: list[ScoredSentence]) -> dict:
    """JSON-able row in the selected-evidence interchange format."""
    return {
        "claim_id": claim_id,
        "evidence": [[s.page_title, s.sentence_index, s.score] for s in evidence],
    }
