"""Token embeddings for marked claim/evidence sequences.

Two providers sit behind one interface: a deterministic desk-scale encoder
(context-free unit-norm vectors seeded per token) and a client for an
external contextual-encoder service. Sequences follow the
[CLS] claim [SEP] evidence_1 [SEP] ... evidence_n [SEP] layout with
character-offset alignment back to the source sentences.
"""

from __future__ import annotations

import hashlib
import os
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, RemoteError
from .srlgraph import CLAIM_REF, SentenceRef, span_tokenize

ENCODER_FORMAT = "FACTGRAPH-ENC v1"
ENCODER_URL_ENV = "FACTGRAPH_ENCODER_URL"

CLS = "[CLS]"
SEP = "[SEP]"

DEFAULT_DIM = 64


@dataclass(frozen=True)
class MarkedSequence:
    """Tokenized claim/evidence sequence with segment tags and alignment.

    ``segments[i]`` is 0 for the claim segment (including [CLS] and its
    [SEP]) and k >= 1 for the k-th evidence segment. ``alignment[i]`` is
    None for markers, else (sentence_ref, start, end) into the source text.
    ``refs`` lists the claim ref followed by evidence refs in encoded order.
    """

    tokens: tuple[str, ...]
    segments: tuple[int, ...]
    alignment: tuple[tuple[SentenceRef, int, int] | None, ...]
    refs: tuple[SentenceRef, ...]


@dataclass(frozen=True)
class TokenEmbeddings:
    """(n_tokens x dim) float64 matrix; row order equals token order."""

    matrix: np.ndarray

    @property
    def dim(self) -> int:
        return self.matrix.shape[1]


def build_marked_sequence(
    claim_text: str,
    evidence_sentences,
    evidence_refs=None,
    claim_ref: SentenceRef = CLAIM_REF,
) -> MarkedSequence:
    """Build [CLS] claim [SEP] ev_1 [SEP] ... ev_n [SEP].

    ``evidence_sentences`` must already be in the desired order (see
    ``sentence_order``). Refs default to positional placeholders when the
    caller has no store-backed sentences.
    """
    if not claim_text or not claim_text.strip():
        raise ValueError("claim text is empty")
    evidence_sentences = list(evidence_sentences)
    if evidence_refs is None:
        evidence_refs = [SentenceRef("<evidence>", i) for i in range(len(evidence_sentences))]
    evidence_refs = list(evidence_refs)
    if len(evidence_refs) != len(evidence_sentences):
        raise ValueError("evidence refs and sentences differ in length")

    tokens: list[str] = [CLS]
    segments: list[int] = [0]
    alignment: list[tuple[SentenceRef, int, int] | None] = [None]
    for norm, start, end in span_tokenize(claim_text):
        tokens.append(norm)
        segments.append(0)
        alignment.append((claim_ref, start, end))
    tokens.append(SEP)
    segments.append(0)
    alignment.append(None)
    for k, (sentence, ref) in enumerate(zip(evidence_sentences, evidence_refs), start=1):
        for norm, start, end in span_tokenize(sentence):
            tokens.append(norm)
            segments.append(k)
            alignment.append((ref, start, end))
        tokens.append(SEP)
        segments.append(k)
        alignment.append(None)
    return MarkedSequence(
        tokens=tuple(tokens),
        segments=tuple(segments),
        alignment=tuple(alignment),
        refs=tuple([claim_ref] + evidence_refs),
    )


class DeterministicEncoder:
    """Pure function of (token, seed): unit-norm pseudo-random vectors.

    Identical tokens map to identical rows within and across sequences;
    the [CLS]/[SEP] markers draw from a reserved seed namespace.
    """

    def __init__(self, dim: int = DEFAULT_DIM, seed: int = 0):
        if dim < 1:
            raise ConfigError(f"embedding dimension must be >= 1, got {dim}")
        self.dim = dim
        self.seed = seed
        self._cache: dict[str, np.ndarray] = {}

    def _vector(self, token: str) -> np.ndarray:
        cached = self._cache.get(token)
        if cached is not None:
            return cached
        namespace = "marker" if token in (CLS, SEP) else "token"
        material = f"{namespace}\x00{self.seed}\x00{token}".encode("utf-8")
        digest = hashlib.blake2b(material, digest_size=8).digest()
        rng = np.random.default_rng(int.from_bytes(digest, "big"))
        vec = rng.standard_normal(self.dim)
        vec /= np.linalg.norm(vec)
        self._cache[token] = vec
        return vec

    def encode_tokens(self, tokens) -> np.ndarray:
        if not tokens:
            return np.zeros((0, self.dim), dtype=np.float64)
        return np.stack([self._vector(tok) for tok in tokens]).astype(np.float64)


class ExternalEncoder:
    """Client for a contextual-encoder service; the service dictates the
    embedding dimension."""

    def __init__(self, url: str | None = None, transport=None):
        self.url = url or os.environ.get(ENCODER_URL_ENV)
        if not self.url:
            raise ConfigError(f"external encoder needs a URL ({ENCODER_URL_ENV} unset)")
        self._transport = transport
        self.dim: int | None = None

    def _post(self, payload: dict) -> dict:
        if self._transport is not None:
            return self._transport(self.url, payload)
        import requests

        try:
            response = requests.post(self.url, json=payload, timeout=60)
        except requests.RequestException as exc:
            raise RemoteError(f"encoder request failed: {exc}") from exc
        if response.status_code != 200:
            raise RemoteError(f"encoder returned HTTP {response.status_code}")
        return response.json()

    def encode_tokens(self, tokens) -> np.ndarray:
        body = self._post({"format": ENCODER_FORMAT, "tokens": list(tokens)})
        if body.get("format") != ENCODER_FORMAT:
            raise RemoteError(f"encoder answered with format {body.get('format')!r}")
        rows = np.asarray(body.get("rows", []), dtype=np.float64)
        if rows.ndim != 2 or rows.shape[0] != len(tokens):
            raise RemoteError(
                f"encoder returned {rows.shape[0] if rows.ndim == 2 else 'malformed'} rows "
                f"for {len(tokens)} tokens"
            )
        if self.dim is None:
            self.dim = rows.shape[1]
        elif rows.shape[1] != self.dim:
            raise RemoteError(
                f"encoder dimension changed from {self.dim} to {rows.shape[1]}"
            )
        return rows


def get_provider(kind: str = "deterministic", dim: int = DEFAULT_DIM, seed: int = 0, url=None,
                 transport=None):
    if kind == "deterministic":
        return DeterministicEncoder(dim=dim, seed=seed)
    if kind == "external":
        return ExternalEncoder(url=url, transport=transport)
    raise ConfigError(f"unknown provider {kind!r}; expected 'deterministic' or 'external'")


def encode(seq: MarkedSequence, provider) -> TokenEmbeddings:
    """Run the provider over the sequence tokens and validate the matrix."""
    matrix = provider.encode_tokens(seq.tokens)
    if matrix.shape[0] != len(seq.tokens):
        raise ConfigError(
            f"provider returned {matrix.shape[0]} rows for {len(seq.tokens)} tokens"
        )
    if matrix.size and not np.isfinite(matrix).all():
        raise ConfigError("provider returned non-finite embeddings")
    return TokenEmbeddings(matrix=matrix)


def classification_vector(emb: TokenEmbeddings) -> np.ndarray:
    """The [CLS] row (position 0)."""
    if emb.matrix.shape[0] == 0:
        raise ValueError("cannot take a classification vector from an empty matrix")
    return emb.matrix[0]
