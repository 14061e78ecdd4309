"""Corpus ingestion and the in-memory document store.

Accepts the public wiki-pages JSONL layout (fields ``id``, ``text``,
``lines``) and the claims JSONL layout (``id``, ``claim``, ``label``,
``evidence``) unchanged, so real dumps load the same way as the synthetic
fixtures shipped with the package.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path

from ._io import write_text_atomic
from .errors import IngestionError, StoreLookupError
from .text import content_tokens, tokens

log = logging.getLogger(__name__)

STORE_FORMAT = "FACTGRAPH-STORE v1"

LABELS = ("SUPPORTS", "REFUTES", "NEI")

_LABEL_ALIASES = {
    "SUPPORTS": "SUPPORTS",
    "SUPPORTED": "SUPPORTS",
    "ACCEPTED": "SUPPORTS",
    "REFUTES": "REFUTES",
    "REFUTED": "REFUTES",
    "NOT ENOUGH INFO": "NEI",
    "NOT_ENOUGH_INFO": "NEI",
    "NEI": "NEI",
}


@dataclass(frozen=True)
class Document:
    """A titled page whose sentences are indexed contiguously from 0."""

    title: str
    sentences: tuple[str, ...]

    def sentence(self, index: int) -> str:
        if not 0 <= index < len(self.sentences):
            raise StoreLookupError(
                f"sentence index {index} out of range for {self.title!r} "
                f"({len(self.sentences)} sentences)"
            )
        return self.sentences[index]


@dataclass(frozen=True)
class Claim:
    """A statement to verify, with optional gold label and evidence groups.

    ``gold_evidence`` holds alternative groups; each group is a set of
    (page_title, sentence_index) pairs that jointly verify the claim. It is
    empty exactly when the label is NEI or absent.
    """

    id: int
    text: str
    gold_label: str | None = None
    gold_evidence: tuple[frozenset[tuple[str, int]], ...] = ()

    def gold_pages(self) -> frozenset[str]:
        return frozenset(page for group in self.gold_evidence for page, _ in group)

    def gold_sentence_union(self) -> frozenset[tuple[str, int]]:
        return frozenset(pair for group in self.gold_evidence for pair in group)


def title_index_tokens(title: str) -> list[str]:
    """Tokens under which a title is indexed; falls back to all tokens when
    the title consists solely of stopwords."""
    toks = content_tokens(title)
    return toks if toks else tokens(title)


class DocumentStore:
    """Title-keyed document map plus an inverted index over title tokens.

    Immutable after construction; any number of readers may share one store.
    """

    def __init__(self, documents: dict[str, Document], index: dict[str, set[str]] | None = None):
        self._documents = dict(documents)
        if index is None:
            index = {}
            for title in self._documents:
                for tok in title_index_tokens(title):
                    index.setdefault(tok, set()).add(title)
        else:
            for tok, titles in index.items():
                missing = [t for t in titles if t not in self._documents]
                if missing:
                    raise IngestionError(
                        f"inverted index token {tok!r} references unknown title {missing[0]!r}"
                    )
        self._index = {tok: frozenset(titles) for tok, titles in index.items()}

    def __len__(self) -> int:
        return len(self._documents)

    def __contains__(self, title: str) -> bool:
        return title in self._documents

    def titles(self) -> list[str]:
        return sorted(self._documents)

    def get(self, title: str) -> Document:
        try:
            return self._documents[title]
        except KeyError:
            raise StoreLookupError(f"unknown document title {title!r}") from None

    def get_sentence(self, title: str, index: int) -> str:
        return self.get(title).sentence(index)

    def lookup_token(self, token: str) -> frozenset[str]:
        return self._index.get(token, frozenset())

    def index_tokens(self) -> list[str]:
        return sorted(self._index)


def _parse_lines_field(lines: str) -> tuple[list[str], int]:
    """Parse a tab-numbered ``lines`` field into ordered sentence texts.

    A row is well formed when it carries a tab, its leading field is the next
    expected integer index, and anything after the second tab (link anchors)
    is ignored. Malformed rows are skipped and counted.
    """
    sentences: list[str] = []
    warnings = 0
    for row in lines.split("\n"):
        head, sep, rest = row.partition("\t")
        if not sep or not head.isdigit() or int(head) != len(sentences):
            warnings += 1
            continue
        sentences.append(rest.split("\t", 1)[0])
    return sentences, warnings


def load_wiki_pages(path: str | Path) -> tuple[DocumentStore, int]:
    """Load a wiki-pages JSONL file into a store.

    Returns the store and the number of skipped malformed sentence rows.
    Duplicate titles and unreadable input are fatal.
    """
    path = Path(path)
    documents: dict[str, Document] = {}
    warnings = 0
    try:
        raw = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise IngestionError(f"cannot read wiki pages from {path}: {exc}") from exc
    for lineno, line in enumerate(raw.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise IngestionError(f"{path}:{lineno}: invalid JSON record: {exc}") from exc
        title = record.get("id")
        if not isinstance(title, str) or not title:
            raise IngestionError(f"{path}:{lineno}: record has no usable 'id' field")
        if title in documents:
            raise IngestionError(f"duplicate document title {title!r} at {path}:{lineno}")
        sentences, row_warnings = _parse_lines_field(record.get("lines", "") or "")
        warnings += row_warnings
        documents[title] = Document(title=title, sentences=tuple(sentences))
    if warnings:
        log.warning("skipped %d malformed sentence rows while loading %s", warnings, path)
    return DocumentStore(documents), warnings


def canonical_label(label: str, claim_id: object = None) -> str:
    key = label.strip().upper()
    if key not in _LABEL_ALIASES:
        where = f" (claim id {claim_id})" if claim_id is not None else ""
        raise IngestionError(f"unknown label {label!r}{where}")
    return _LABEL_ALIASES[key]


def _parse_evidence(raw, claim_id) -> tuple[frozenset[tuple[str, int]], ...]:
    groups: list[frozenset[tuple[str, int]]] = []
    seen: set[frozenset[tuple[str, int]]] = set()
    for group in raw or []:
        pairs = set()
        for entry in group:
            if len(entry) < 4:
                raise IngestionError(f"claim {claim_id}: malformed evidence entry {entry!r}")
            page, idx = entry[2], entry[3]
            if page is None:
                continue
            if not isinstance(idx, int) or idx < 0:
                raise IngestionError(
                    f"claim {claim_id}: bad sentence index {idx!r} for page {page!r}"
                )
            pairs.add((str(page), idx))
        if pairs:
            frozen = frozenset(pairs)
            if frozen not in seen:
                seen.add(frozen)
                groups.append(frozen)
    return tuple(groups)


def load_claims(path: str | Path) -> list[Claim]:
    """Load a claims JSONL file, canonicalizing labels and evidence groups.

    Null-page evidence entries (the NEI convention) are dropped, so NEI
    claims come out with no evidence; a labeled SUPPORTS/REFUTES claim with
    no usable evidence is rejected as inconsistent.
    """
    path = Path(path)
    try:
        raw = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise IngestionError(f"cannot read claims from {path}: {exc}") from exc
    claims: list[Claim] = []
    for lineno, line in enumerate(raw.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise IngestionError(f"{path}:{lineno}: invalid JSON record: {exc}") from exc
        claim_id = record.get("id")
        if not isinstance(claim_id, int):
            raise IngestionError(f"{path}:{lineno}: claim record has no integer 'id'")
        text = record.get("claim")
        if not isinstance(text, str) or not text.strip():
            raise IngestionError(f"claim {claim_id}: empty claim text")
        label = record.get("label")
        gold_label = canonical_label(label, claim_id) if label is not None else None
        evidence = _parse_evidence(record.get("evidence"), claim_id)
        if gold_label in ("SUPPORTS", "REFUTES") and not evidence:
            raise IngestionError(f"claim {claim_id}: label {gold_label} but no evidence")
        if gold_label in (None, "NEI") and evidence:
            raise IngestionError(f"claim {claim_id}: evidence present for label {gold_label}")
        claims.append(
            Claim(id=claim_id, text=text, gold_label=gold_label, gold_evidence=evidence)
        )
    return claims


def save_store(store: DocumentStore, directory: str | Path) -> None:
    """Persist a store as a directory with documents and inverted-index files."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    doc_lines = [STORE_FORMAT]
    for title in store.titles():
        doc = store.get(title)
        doc_lines.append(
            json.dumps({"title": doc.title, "sentences": list(doc.sentences)}, sort_keys=True)
        )
    index_lines = [STORE_FORMAT]
    for tok in store.index_tokens():
        index_lines.append(
            json.dumps({"token": tok, "titles": sorted(store.lookup_token(tok))}, sort_keys=True)
        )
    write_text_atomic(directory / "documents.jsonl", "\n".join(doc_lines) + "\n")
    write_text_atomic(directory / "index.jsonl", "\n".join(index_lines) + "\n")


def _read_versioned(path: Path) -> list[str]:
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise IngestionError(f"cannot read store file {path}: {exc}") from exc
    if not lines or lines[0] != STORE_FORMAT:
        raise IngestionError(f"{path}: missing or unsupported header (expected {STORE_FORMAT!r})")
    return lines[1:]


def load_store(directory: str | Path) -> DocumentStore:
    """Load a persisted store, validating headers and index consistency."""
    directory = Path(directory)
    documents: dict[str, Document] = {}
    for line in _read_versioned(directory / "documents.jsonl"):
        if not line.strip():
            continue
        record = json.loads(line)
        title = record["title"]
        if title in documents:
            raise IngestionError(f"duplicate document title {title!r} in persisted store")
        documents[title] = Document(title=title, sentences=tuple(record["sentences"]))
    index: dict[str, set[str]] = {}
    for line in _read_versioned(directory / "index.jsonl"):
        if not line.strip():
            continue
        record = json.loads(line)
        index[record["token"]] = set(record["titles"])
    store = DocumentStore(documents, index=index)
    rebuilt = DocumentStore(documents)
    if {t: store.lookup_token(t) for t in store.index_tokens()} != {
        t: rebuilt.lookup_token(t) for t in rebuilt.index_tokens()
    }:
        raise IngestionError(f"{directory}: persisted inverted index disagrees with documents")
    return store
