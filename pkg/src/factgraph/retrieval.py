"""Entity-mention extraction and keyword-based document ranking.

Mentions are maximal capitalized token runs (a heuristic stand-in for a full
parser; an external parser can satisfy the same contract), ranked against
title tokens with a Jaccard overlap. Titles carrying a parenthetical
disambiguator are ambiguous and their score is halved.
"""

from __future__ import annotations

import hashlib
import json
import os
import re
import threading
from dataclasses import dataclass
from pathlib import Path

from .corpus import Document, DocumentStore, title_index_tokens
from .errors import FeatureDisabledError, RemoteError, RemoteNotFoundError
from .text import STOPWORDS, _TOKEN_RE, content_tokens, normalize_token, tokens

DEFAULT_WIKI_URL = "https://en.wikipedia.org/w/api.php"
WIKI_URL_ENV = "FACTGRAPH_WIKI_URL"

AMBIGUITY_PENALTY = 0.5

_PAREN_SUFFIX_RE = re.compile(r"\([^()]*\)$")
_SENTENCE_SPLIT_RE = re.compile(r"(?<=[.!?])\s+")


@dataclass(frozen=True)
class EntityMention:
    """A candidate entity with its character span inside the claim."""

    text: str
    start: int
    end: int


@dataclass(frozen=True)
class RankedDocument:
    title: str
    score: float
    ambiguous: bool


def title_is_ambiguous(title: str) -> bool:
    """True when the title ends in a parenthetical qualifier, in either plain
    or escaped (-LRB- ... -RRB-) form."""
    plain = title.replace("-LRB-", "(").replace("-RRB-", ")").replace("_", " ").strip()
    return _PAREN_SUFFIX_RE.search(plain) is not None


def extract_entities(claim_text: str) -> list[EntityMention]:
    """Extract capitalized-run mentions plus the full claim as a fallback.

    A run starting at the first token drops that token when it is merely a
    capitalized sentence-initial stopword. Mentions are deduplicated by text
    in order of first appearance.
    """
    if not claim_text or not claim_text.strip():
        raise ValueError("claim text is empty")
    matches = list(_TOKEN_RE.finditer(claim_text))
    runs: list[tuple[int, int]] = []  # token-index ranges, end exclusive
    current: list[int] = []
    for i, m in enumerate(matches):
        capitalized = m.group()[0].isupper()
        # whitespace or a bare hyphen keeps a run together (Coster-Waldau)
        gap = claim_text[matches[i - 1].end() : m.start()].strip() if current else None
        adjacent = bool(current) and gap in ("", "-")
        if capitalized and (not current or adjacent):
            current.append(i)
        else:
            if current:
                runs.append((current[0], current[-1] + 1))
            current = [i] if capitalized else []
    if current:
        runs.append((current[0], current[-1] + 1))

    mentions: list[EntityMention] = []
    seen: set[str] = set()

    def add(text: str, start: int, end: int) -> None:
        if text and text not in seen:
            seen.add(text)
            mentions.append(EntityMention(text=text, start=start, end=end))

    for lo, hi in runs:
        if lo == 0 and normalize_token(matches[0].group()) in STOPWORDS:
            lo += 1
        if lo >= hi:
            continue
        start, end = matches[lo].start(), matches[hi - 1].end()
        add(claim_text[start:end], start, end)
    add(claim_text, 0, len(claim_text))
    return mentions


def _mention_tokens(text: str) -> frozenset[str]:
    toks = content_tokens(text)
    return frozenset(toks if toks else tokens(text))


def _jaccard(a: frozenset[str], b: frozenset[str]) -> float:
    if not a or not b:
        return 0.0
    return len(a & b) / len(a | b)


def rank_documents(
    mentions: list[EntityMention],
    store: DocumentStore,
    k: int = 10,
    score_fn=None,
) -> list[RankedDocument]:
    """Rank candidate titles by best mention overlap, penalizing ambiguity.

    ``score_fn(mention_tokens, title_tokens)`` may replace the default
    Jaccard overlap (extension point for learned document scorers). Results
    are sorted by (score desc, title asc) and truncated to ``k``.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    score_fn = score_fn or _jaccard
    mention_sets = [_mention_tokens(m.text) for m in mentions]
    candidates: set[str] = set()
    for mset in mention_sets:
        for tok in mset:
            candidates |= store.lookup_token(tok)
    ranked = []
    for title in candidates:
        title_set = frozenset(title_index_tokens(title))
        base = max((score_fn(mset, title_set) for mset in mention_sets), default=0.0)
        if base <= 0.0:
            continue
        ambiguous = title_is_ambiguous(title)
        score = base * AMBIGUITY_PENALTY if ambiguous else base
        ranked.append(RankedDocument(title=title, score=score, ambiguous=ambiguous))
    ranked.sort(key=lambda d: (-d.score, d.title))
    return ranked[:k]


def _split_sentences(extract: str) -> list[str]:
    sentences = []
    for paragraph in extract.split("\n"):
        paragraph = paragraph.strip()
        if not paragraph:
            continue
        sentences.extend(s.strip() for s in _SENTENCE_SPLIT_RE.split(paragraph) if s.strip())
    return sentences


class MediaWikiClient:
    """Optional online fetcher for pages missing from the offline corpus.

    Disabled unless explicitly enabled. Fetched pages are cached on disk
    keyed by title; cache writes are serialized.
    """

    def __init__(
        self,
        base_url: str | None = None,
        cache_dir: str | Path | None = None,
        enabled: bool = False,
        transport=None,
    ):
        self.base_url = base_url or os.environ.get(WIKI_URL_ENV, DEFAULT_WIKI_URL)
        self.cache_dir = Path(cache_dir) if cache_dir else None
        self.enabled = enabled
        self._transport = transport
        self._lock = threading.Lock()

    def _get(self, params: dict) -> dict:
        if self._transport is not None:
            return self._transport(self.base_url, params)
        import requests

        try:
            response = requests.get(self.base_url, params=params, timeout=30)
        except requests.RequestException as exc:
            raise RemoteError(f"wiki request failed: {exc}") from exc
        if response.status_code != 200:
            raise RemoteError(f"wiki request returned HTTP {response.status_code}")
        try:
            return response.json()
        except ValueError as exc:
            raise RemoteError(f"wiki response is not JSON: {exc}") from exc

    def _cache_path(self, title: str) -> Path | None:
        if self.cache_dir is None:
            return None
        digest = hashlib.sha256(title.encode("utf-8")).hexdigest()
        return self.cache_dir / f"{digest}.json"

    def fetch_document(self, title: str) -> Document:
        """Fetch a page extract and split it into numbered sentences."""
        if not self.enabled:
            raise FeatureDisabledError(
                "online document retrieval is disabled; enable it explicitly (--online)"
            )
        cache_path = self._cache_path(title)
        if cache_path is not None and cache_path.exists():
            cached = json.loads(cache_path.read_text(encoding="utf-8"))
            return Document(title=cached["title"], sentences=tuple(cached["sentences"]))
        payload = self._get(
            {
                "action": "query",
                "prop": "extracts",
                "explaintext": "1",
                "redirects": "1",
                "format": "json",
                "titles": title,
            }
        )
        try:
            pages = payload["query"]["pages"]
            page = next(iter(pages.values()))
        except (KeyError, StopIteration, AttributeError) as exc:
            raise RemoteError(f"unexpected wiki response shape for {title!r}") from exc
        if "missing" in page or str(page.get("pageid", -1)) == "-1":
            raise RemoteNotFoundError(f"page {title!r} not found remotely")
        sentences = _split_sentences(page.get("extract", ""))
        if not sentences:
            raise RemoteNotFoundError(f"page {title!r} has no extractable text")
        doc = Document(title=page.get("title", title), sentences=tuple(sentences))
        if cache_path is not None:
            with self._lock:
                self.cache_dir.mkdir(parents=True, exist_ok=True)
                tmp = cache_path.with_suffix(".tmp")
                tmp.write_text(
                    json.dumps(
                        {"title": doc.title, "sentences": list(doc.sentences)}, sort_keys=True
                    ),
                    encoding="utf-8",
                )
                os.replace(tmp, cache_path)
        return doc
