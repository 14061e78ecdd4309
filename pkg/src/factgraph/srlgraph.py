"""Semantic-role tuples and the typed graphs built from them.

A rule-based labeler segments a sentence into verb-anchored tuples; graph
construction merges same-category nodes with identical normalized text inside
a sentence (so tuples sharing a verb share the verb node), stars each verb to
its tuple's other elements, and links nodes across sentences that carry
common information. Sentence ordering ranks sentences by descending
cross-sentence connectivity.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

from .errors import ConfigError, RemoteError
from .text import STOPWORDS, content_token_set, normalize_text, span_tokenize

SRL_FORMAT = "FACTGRAPH-SRL v1"
SRL_URL_ENV = "FACTGRAPH_SRL_URL"

CLAIM_PAGE = "<claim>"

ROLES = ("ARG", "LOC", "TMP")

# Role/category mapping is table-driven so more categories can be added.
ROLE_CATEGORIES = {"ARG": "argument", "LOC": "location", "TMP": "temporal"}
VERB_CATEGORY = "verb"
CATEGORIES = (VERB_CATEGORY, "argument", "location", "temporal")

EDGE_INTRA = "intra_tuple"
EDGE_CROSS = "cross_info"

LINK_PREDICATES = ("overlap", "exact")

AUXILIARIES = frozenset(
    "is are was were am be been being has have had do does did".split()
)

# Irregular past participles that the -ed suffix rule misses.
IRREGULAR_PARTICIPLES = frozenset(
    """
    become begun born bought brought built caught chosen come cut done drawn
    driven eaten fallen felt flown found given gone grown heard held kept
    known left lost made meant met paid put read run said seen sent set shot
    shown shut sold spent spoken stood sung taken taught thought told
    understood woken won worn written
    """.split()
)

# Standalone verb forms recognized without an auxiliary.
VERB_LEXICON = frozenset(
    """
    is are was were am has have had
    acted acts aired airs announced announces appeared appears attended
    attends became becomes began begins borders built builds called calls
    claimed claims closed closes coached coaches composed composes contained
    contains created creates debuted debuts described describes designed
    designs developed develops died dies directed directs discovered
    discovers ended ends featured features flows formed forms founded founds
    gave gives got gets goes went graduated graduates heard hears held holds
    hosted hosts included includes invented invents joined joins kept keeps
    knew know knows leads led leaves left lies lived lives loses lost made
    makes managed manages married marries met meets moved moves named names
    opened opens owned owns paid pays performed performs played plays
    praised praises premiered premieres produced produces published
    publishes recorded records released releases reported reports runs
    sang sees sells sent sends served serves showed shows sings sits sold
    speaks spoke starred stars started starts stated states stood stands
    studied studies taught teaches told tells took takes visited visits
    won wins worked works writes wrote
    """.split()
)

MONTHS = frozenset(
    "january february march april may june july august september october november december".split()
)

LOC_TRIGGERS = frozenset({"in", "at", "on", "near"})
TMP_TRIGGERS = frozenset({"in", "on", "during"})


@dataclass(frozen=True, order=True)
class SentenceRef:
    """Identifies a source sentence: a page title (or the claim marker) and
    a sentence index."""

    page: str
    index: int

    def is_claim(self) -> bool:
        return self.page == CLAIM_PAGE


CLAIM_REF = SentenceRef(CLAIM_PAGE, 0)


@dataclass(frozen=True)
class RoleSpan:
    role: str
    text: str
    start: int
    end: int


@dataclass(frozen=True)
class SRLTuple:
    verb_text: str
    verb_start: int
    verb_end: int
    arguments: tuple[RoleSpan, ...]
    ref: SentenceRef


@dataclass(frozen=True)
class Node:
    id: int
    category: str
    text: str
    tuple_ids: tuple[int, ...]
    refs: tuple[SentenceRef, ...]
    spans: tuple[tuple[SentenceRef, int, int], ...]


@dataclass(frozen=True)
class Edge:
    kind: str
    a: int
    b: int


@dataclass(frozen=True)
class SRLGraph:
    nodes: tuple[Node, ...]
    edges: tuple[Edge, ...]

    def cross_degree(self, ref: SentenceRef) -> int:
        degree = 0
        for edge in self.edges:
            if edge.kind != EDGE_CROSS:
                continue
            for nid in (edge.a, edge.b):
                if ref in self.nodes[nid].refs:
                    degree += 1
        return degree


def _is_year(token: str) -> bool:
    return len(token) == 4 and token.isdigit() and 1000 <= int(token) <= 2999


def _is_participle(token: str) -> bool:
    return (len(token) >= 4 and token.endswith("ed")) or token in IRREGULAR_PARTICIPLES


def _find_verbs(toks) -> list[tuple[int, int]]:
    verbs = []
    i = 0
    while i < len(toks):
        norm = toks[i][0]
        if norm in AUXILIARIES and i + 1 < len(toks) and _is_participle(toks[i + 1][0]):
            verbs.append((i, i + 2))
            i += 2
        elif norm in VERB_LEXICON:
            verbs.append((i, i + 1))
            i += 1
        else:
            i += 1
    return verbs


def _role_spans(sentence: str, toks, lo: int, hi: int) -> list[RoleSpan]:
    """Carve LOC/TMP spans out of the token region [lo, hi) and collect the
    remaining runs as ARG spans (stopword-trimmed at the edges)."""
    spans: list[RoleSpan] = []
    consumed = [False] * len(toks)

    def raw(i: int) -> str:
        return sentence[toks[i][1] : toks[i][2]]

    def emit(role: str, first: int, last: int) -> None:
        start, end = toks[first][1], toks[last][2]
        spans.append(RoleSpan(role=role, text=sentence[start:end], start=start, end=end))
        for i in range(first, last + 1):
            consumed[i] = True

    j = lo
    while j < hi:
        norm = toks[j][0]
        nxt = toks[j + 1][0] if j + 1 < hi else None
        if norm in TMP_TRIGGERS and nxt is not None and (nxt in MONTHS or _is_year(nxt)):
            last = j + 1
            if nxt in MONTHS and last + 1 < hi and _is_year(toks[last + 1][0]):
                last += 1
            consumed[j] = True
            emit("TMP", j + 1, last)
            j = last + 1
            continue
        if norm in LOC_TRIGGERS and nxt is not None and raw(j + 1)[0].isupper():
            last = j + 1
            while last + 1 < hi and raw(last + 1)[0].isupper():
                last += 1
            consumed[j] = True
            emit("LOC", j + 1, last)
            j = last + 1
            continue
        if _is_year(norm):
            emit("TMP", j, j)
            j += 1
            continue
        j += 1

    run: list[int] = []
    for i in list(range(lo, hi)) + [hi]:
        if i < hi and not consumed[i]:
            run.append(i)
            continue
        if run:
            while run and toks[run[0]][0] in STOPWORDS:
                run.pop(0)
            while run and toks[run[-1]][0] in STOPWORDS:
                run.pop()
            if run:
                emit("ARG", run[0], run[-1])
            run = []
    spans.sort(key=lambda s: s.start)
    return spans


class RuleLabeler:
    """Deterministic pattern labeler: auxiliary + past participle or a
    lexicon-listed verb form anchors one tuple per verb candidate."""

    def extract_tuples(self, sentence: str, ref: SentenceRef) -> list[SRLTuple]:
        if not sentence or not sentence.strip():
            raise ValueError("sentence is empty")
        toks = span_tokenize(sentence)
        verbs = _find_verbs(toks)
        tuples: list[SRLTuple] = []
        for vi, (vs, ve) in enumerate(verbs):
            left_lo = verbs[vi - 1][1] if vi > 0 else 0
            right_hi = verbs[vi + 1][0] if vi + 1 < len(verbs) else len(toks)
            args = _role_spans(sentence, toks, left_lo, vs) + _role_spans(
                sentence, toks, ve, right_hi
            )
            tuples.append(
                SRLTuple(
                    verb_text=sentence[toks[vs][1] : toks[ve - 1][2]],
                    verb_start=toks[vs][1],
                    verb_end=toks[ve - 1][2],
                    arguments=tuple(args),
                    ref=ref,
                )
            )
        return tuples


class ExternalLabeler:
    """Client for an external labeling service with the same contract."""

    def __init__(self, url: str | None = None, transport=None):
        self.url = url or os.environ.get(SRL_URL_ENV)
        if not self.url:
            raise ConfigError(f"external labeler needs a URL ({SRL_URL_ENV} unset)")
        self._transport = transport

    def _post(self, payload: dict) -> dict:
        if self._transport is not None:
            return self._transport(self.url, payload)
        import requests

        try:
            response = requests.post(self.url, json=payload, timeout=30)
        except requests.RequestException as exc:
            raise RemoteError(f"labeler request failed: {exc}") from exc
        if response.status_code != 200:
            raise RemoteError(f"labeler returned HTTP {response.status_code}")
        return response.json()

    def extract_tuples(self, sentence: str, ref: SentenceRef) -> list[SRLTuple]:
        if not sentence or not sentence.strip():
            raise ValueError("sentence is empty")
        body = self._post({"format": SRL_FORMAT, "sentence": sentence})
        tuples = []
        for item in body.get("tuples", []):
            verb = item["verb"]
            args = []
            for arg in item.get("arguments", []):
                if arg["role"] not in ROLES:
                    raise RemoteError(f"labeler returned unknown role {arg['role']!r}")
                args.append(
                    RoleSpan(
                        role=arg["role"],
                        text=arg["text"],
                        start=arg["span"][0],
                        end=arg["span"][1],
                    )
                )
            tuples.append(
                SRLTuple(
                    verb_text=verb["text"],
                    verb_start=verb["span"][0],
                    verb_end=verb["span"][1],
                    arguments=tuple(args),
                    ref=ref,
                )
            )
        return tuples


def get_labeler(kind: str = "rules", url: str | None = None, transport=None):
    if kind == "rules":
        return RuleLabeler()
    if kind == "external":
        return ExternalLabeler(url=url, transport=transport)
    raise ConfigError(f"unknown labeler {kind!r}; expected 'rules' or 'external'")


def extract_tuples(sentence: str, ref: SentenceRef, labeler=None) -> list[SRLTuple]:
    labeler = labeler or RuleLabeler()
    return labeler.extract_tuples(sentence, ref)


def build_graph(tuple_groups, link: str = "overlap") -> SRLGraph:
    """Assemble the typed graph from per-sentence tuple lists.

    Nodes with the same category and normalized text merge within a
    sentence; verb stars connect each verb to its tuple's other elements;
    cross-sentence edges join node pairs sharing common information under
    the configured predicate (token ``overlap`` or ``exact`` normalized
    text). Node ids follow (sentence, tuple, element) order.
    """
    if link not in LINK_PREDICATES:
        raise ConfigError(f"unknown link predicate {link!r}; expected one of {LINK_PREDICATES}")

    texts: list[str] = []
    categories: list[str] = []
    tuple_ids: list[list[int]] = []
    refs: list[list[SentenceRef]] = []
    spans: list[list[tuple[SentenceRef, int, int]]] = []
    key_to_id: dict[tuple[SentenceRef, str, str], int] = {}
    edges: set[Edge] = set()
    tuple_counter = 0

    def intern(ref, category, text, start, end, tid) -> int:
        key = (ref, category, normalize_text(text))
        if key in key_to_id:
            nid = key_to_id[key]
            if tid not in tuple_ids[nid]:
                tuple_ids[nid].append(tid)
            if ref not in refs[nid]:
                refs[nid].append(ref)
            spans[nid].append((ref, start, end))
            return nid
        nid = len(texts)
        key_to_id[key] = nid
        texts.append(text)
        categories.append(category)
        tuple_ids.append([tid])
        refs.append([ref])
        spans.append([(ref, start, end)])
        return nid

    for ref, tuples in tuple_groups:
        for tup in tuples:
            tid = tuple_counter
            tuple_counter += 1
            verb_id = intern(ref, VERB_CATEGORY, tup.verb_text, tup.verb_start, tup.verb_end, tid)
            for arg in tup.arguments:
                category = ROLE_CATEGORIES.get(arg.role)
                if category is None:
                    raise ConfigError(f"unknown role {arg.role!r}")
                arg_id = intern(ref, category, arg.text, arg.start, arg.end, tid)
                if arg_id != verb_id:
                    edges.add(Edge(EDGE_INTRA, min(verb_id, arg_id), max(verb_id, arg_id)))

    node_tokens = [content_token_set(t) for t in texts]
    node_norms = [normalize_text(t) for t in texts]
    for i in range(len(texts)):
        for j in range(i + 1, len(texts)):
            if set(refs[i]) & set(refs[j]):
                continue
            if link == "overlap":
                related = bool(node_tokens[i] & node_tokens[j])
            else:
                related = bool(node_norms[i]) and node_norms[i] == node_norms[j]
            if related:
                edges.add(Edge(EDGE_CROSS, i, j))

    nodes = tuple(
        Node(
            id=i,
            category=categories[i],
            text=texts[i],
            tuple_ids=tuple(tuple_ids[i]),
            refs=tuple(refs[i]),
            spans=tuple(spans[i]),
        )
        for i in range(len(texts))
    )
    ordered_edges = tuple(sorted(edges, key=lambda e: (e.kind, e.a, e.b)))
    return SRLGraph(nodes=nodes, edges=ordered_edges)


def build_claim_graph(claim, labeler=None, link: str = "overlap") -> SRLGraph:
    """Single-sentence graph for the claim; cross-sentence edges cannot occur."""
    tuples = extract_tuples(claim.text, CLAIM_REF, labeler)
    return build_graph([(CLAIM_REF, tuples)], link=link)


def sentence_order(graph: SRLGraph, sentence_refs) -> list[SentenceRef]:
    """Sort sentences by descending cross-sentence degree, stable on ties."""
    sentence_refs = list(sentence_refs)
    known = set(sentence_refs)
    for node in graph.nodes:
        for ref in node.refs:
            if ref not in known:
                raise ValueError(f"graph references {ref} missing from sentence_refs")
    degrees = {ref: graph.cross_degree(ref) for ref in sentence_refs}
    return sorted(sentence_refs, key=lambda ref: -degrees[ref])


def graph_to_dict(graph: SRLGraph) -> dict:
    return {
        "format": SRL_FORMAT,
        "nodes": [
            {
                "id": node.id,
                "category": node.category,
                "text": node.text,
                "tuples": list(node.tuple_ids),
                "refs": [[ref.page, ref.index] for ref in node.refs],
                "spans": [[ref.page, ref.index, s, e] for ref, s, e in node.spans],
            }
            for node in graph.nodes
        ],
        "edges": [[edge.kind, edge.a, edge.b] for edge in graph.edges],
    }


def graph_from_dict(payload: dict) -> SRLGraph:
    if payload.get("format") != SRL_FORMAT:
        raise ConfigError(f"unsupported graph format {payload.get('format')!r}")
    nodes = tuple(
        Node(
            id=item["id"],
            category=item["category"],
            text=item["text"],
            tuple_ids=tuple(item["tuples"]),
            refs=tuple(SentenceRef(page, index) for page, index in item["refs"]),
            spans=tuple(
                (SentenceRef(page, index), s, e) for page, index, s, e in item["spans"]
            ),
        )
        for item in payload["nodes"]
    )
    edges = tuple(Edge(kind, a, b) for kind, a, b in payload["edges"])
    return SRLGraph(nodes=nodes, edges=edges)


def dumps_graph(graph: SRLGraph) -> str:
    """Byte-stable serialization: sorted keys, no whitespace variation."""
    return json.dumps(graph_to_dict(graph), sort_keys=True, separators=(",", ":"))


def loads_graph(text: str) -> SRLGraph:
    return graph_from_dict(json.loads(text))
