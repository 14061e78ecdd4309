"""Graph verification: node features, graph convolution, cross-graph
attention, the three-way classifier, and the trainer.

Forward pass per claim: node features are tuple-averaged token embeddings;
each graph runs through L layers of H' = relu(A_hat H W) with the
symmetric-normalized self-looped adjacency; claim nodes then attend over
evidence nodes (single-head, additive scoring with LeakyReLU slope 0.2),
and the mean projected-claim and mean context vectors feed a two-layer
perceptron with softmax output. Gradients are computed analytically for
every parameter group; see the finite-difference checks in the test suite.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ._io import write_text_atomic
from .encoder import (
    DEFAULT_DIM,
    TokenEmbeddings,
    build_marked_sequence,
    classification_vector,
    encode,
)
from .errors import ConfigError, FactGraphError, IngestionError
from .selection import ScoredSentence
from .srlgraph import (
    RuleLabeler,
    SentenceRef,
    SRLGraph,
    build_claim_graph,
    build_graph,
    extract_tuples,
    sentence_order,
)
from .text import tokens

CKPT_FORMAT = "FACTGRAPH-CKPT v1"

LABEL_ORDER = ("SUPPORTS", "REFUTES", "NEI")

LEAKY_SLOPE = 0.2

ATTENTION_DIRECTIONS = ("claim_to_evidence", "evidence_to_claim")


def label_index(label: str) -> int:
    try:
        return LABEL_ORDER.index(label)
    except ValueError:
        raise ConfigError(f"unknown label {label!r}; expected one of {LABEL_ORDER}") from None


@dataclass(frozen=True)
class Verdict:
    """Three-way classification result; label is argmax of probs with ties
    resolved by the fixed label order."""

    label: str
    probs: tuple[float, float, float]
    evidence_used: tuple[ScoredSentence, ...] = ()


@dataclass
class VerifierParams:
    """All trainable matrices plus the dimensions needed to validate them.

    GCN weights are shared between the claim and evidence graphs unless
    ``shared_weights`` is False, in which case ``gcn_weights_evidence``
    holds the evidence-side stack.
    """

    gcn_weights: list[np.ndarray]
    attn_w: np.ndarray
    attn_a: np.ndarray
    mlp_w1: np.ndarray
    mlp_b1: np.ndarray
    mlp_w2: np.ndarray
    mlp_b2: np.ndarray
    embed_dim: int
    hidden_dim: int
    mlp_hidden: int
    seed: int
    shared_weights: bool = True
    gcn_weights_evidence: list[np.ndarray] | None = None

    @property
    def layers(self) -> int:
        return len(self.gcn_weights)

    def weights_for(self, side: str) -> list[np.ndarray]:
        if side == "evidence" and not self.shared_weights:
            return self.gcn_weights_evidence
        return self.gcn_weights

    def matrices(self) -> dict[str, np.ndarray]:
        out: dict[str, np.ndarray] = {}
        for i, w in enumerate(self.gcn_weights):
            out[f"gcn_w{i}"] = w
        if not self.shared_weights:
            for i, w in enumerate(self.gcn_weights_evidence):
                out[f"gcn_ev_w{i}"] = w
        out["attn_w"] = self.attn_w
        out["attn_a"] = self.attn_a
        out["mlp_w1"] = self.mlp_w1
        out["mlp_b1"] = self.mlp_b1
        out["mlp_w2"] = self.mlp_w2
        out["mlp_b2"] = self.mlp_b2
        return out

    def validate(self) -> None:
        d, h, m = self.embed_dim, self.hidden_dim, self.mlp_hidden
        expected = [(d, h)] + [(h, h)] * (self.layers - 1)
        stacks = [self.gcn_weights]
        if not self.shared_weights:
            if self.gcn_weights_evidence is None:
                raise ConfigError("unshared weights requested but evidence stack is missing")
            stacks.append(self.gcn_weights_evidence)
        for stack in stacks:
            if [w.shape for w in stack] != expected:
                raise ConfigError(
                    f"gcn weight shapes {[w.shape for w in stack]} != expected {expected}"
                )
        checks = [
            (self.attn_w.shape, (h, h)),
            (self.attn_a.shape, (2 * h,)),
            (self.mlp_w1.shape, (2 * h, m)),
            (self.mlp_b1.shape, (m,)),
            (self.mlp_w2.shape, (m, 3)),
            (self.mlp_b2.shape, (3,)),
        ]
        for got, want in checks:
            if got != want:
                raise ConfigError(f"parameter shape {got} != expected {want}")
        for name, matrix in self.matrices().items():
            if not np.isfinite(matrix).all():
                raise ConfigError(f"parameter {name} contains non-finite entries")


def init_params(
    embed_dim: int = DEFAULT_DIM,
    hidden_dim: int = DEFAULT_DIM,
    mlp_hidden: int = 64,
    layers: int = 2,
    seed: int = 0,
    shared_weights: bool = True,
) -> VerifierParams:
    """Seeded uniform(-0.1, 0.1) initialization in a fixed creation order."""
    if layers < 1:
        raise ConfigError(f"need at least one layer, got {layers}")
    rng = np.random.default_rng(seed)

    def uniform(*shape):
        return rng.uniform(-0.1, 0.1, shape)

    dims = [(embed_dim, hidden_dim)] + [(hidden_dim, hidden_dim)] * (layers - 1)
    gcn = [uniform(*shape) for shape in dims]
    gcn_ev = None if shared_weights else [uniform(*shape) for shape in dims]
    params = VerifierParams(
        gcn_weights=gcn,
        attn_w=uniform(hidden_dim, hidden_dim),
        attn_a=uniform(2 * hidden_dim),
        mlp_w1=uniform(2 * hidden_dim, mlp_hidden),
        mlp_b1=uniform(mlp_hidden),
        mlp_w2=uniform(mlp_hidden, 3),
        mlp_b2=uniform(3),
        embed_dim=embed_dim,
        hidden_dim=hidden_dim,
        mlp_hidden=mlp_hidden,
        seed=seed,
        shared_weights=shared_weights,
        gcn_weights_evidence=gcn_ev,
    )
    params.validate()
    return params


def node_features(graph: SRLGraph, emb: TokenEmbeddings, seq, provider):
    """Mean of each node's aligned token rows; nodes whose spans align to no
    token are encoded standalone and mean-pooled, and reported as metadata.
    """
    features = np.zeros((len(graph.nodes), emb.dim), dtype=np.float64)
    fallback: list[int] = []
    for node in graph.nodes:
        rows = []
        for k, aligned in enumerate(seq.alignment):
            if aligned is None:
                continue
            ref, a_start, a_end = aligned
            for span_ref, n_start, n_end in node.spans:
                if ref == span_ref and a_start < n_end and n_start < a_end:
                    rows.append(k)
                    break
        if rows:
            features[node.id] = emb.matrix[rows].mean(axis=0)
        else:
            node_tokens = tokens(node.text)
            if node_tokens:
                features[node.id] = provider.encode_tokens(node_tokens).mean(axis=0)
            fallback.append(node.id)
    return features, tuple(fallback)


def normalize_adjacency(graph: SRLGraph) -> np.ndarray:
    """Symmetric-normalized adjacency with self-loops over all edge kinds."""
    n = len(graph.nodes)
    if n == 0:
        return np.zeros((0, 0), dtype=np.float64)
    adjacency = np.zeros((n, n), dtype=np.float64)
    for edge in graph.edges:
        adjacency[edge.a, edge.b] = 1.0
        adjacency[edge.b, edge.a] = 1.0
    with_loops = adjacency + np.eye(n)
    inv_sqrt_degree = 1.0 / np.sqrt(with_loops.sum(axis=1))
    return with_loops * np.outer(inv_sqrt_degree, inv_sqrt_degree)


def gcn_forward(h0: np.ndarray, a_hat: np.ndarray, weights) -> np.ndarray:
    h = h0
    for layer, w in enumerate(weights):
        if h.shape[1] != w.shape[0]:
            raise ConfigError(
                f"gcn layer {layer}: features of width {h.shape[1]} cannot enter "
                f"a {w.shape[0]}x{w.shape[1]} weight"
            )
        h = np.maximum(a_hat @ h @ w, 0.0)
    return h


def _gcn_forward_cached(h0, a_hat, weights):
    hs, zs = [h0], []
    h = h0
    for w in weights:
        z = a_hat @ h @ w
        zs.append(z)
        h = np.maximum(z, 0.0)
        hs.append(h)
    return hs, zs


def _gcn_backward(d_out, hs, zs, a_hat, weights, grad_sink):
    dh = d_out
    for layer in reversed(range(len(weights))):
        dz = dh * (zs[layer] > 0)
        grad_sink[layer] += (a_hat @ hs[layer]).T @ dz
        dh = a_hat @ (dz @ weights[layer].T)
    return dh


def _attend(u_query: np.ndarray, u_key: np.ndarray, attn_a: np.ndarray):
    d = u_query.shape[1]
    score_query = u_query @ attn_a[:d]
    score_key = u_key @ attn_a[d:]
    pre = score_query[:, None] + score_key[None, :]
    scores = np.where(pre > 0, pre, LEAKY_SLOPE * pre)
    shifted = scores - scores.max(axis=1, keepdims=True)
    expo = np.exp(shifted)
    alpha = expo / expo.sum(axis=1, keepdims=True)
    context = alpha @ u_key
    return pre, alpha, context


def attention_weights(h_claim: np.ndarray, h_evidence: np.ndarray, params: VerifierParams):
    """Attention rows (claim nodes over evidence nodes); each row sums to 1."""
    _, alpha, _ = _attend(h_claim @ params.attn_w, h_evidence @ params.attn_w, params.attn_a)
    return alpha


def cross_graph_attention(
    h_claim: np.ndarray, h_evidence: np.ndarray, params: VerifierParams
) -> np.ndarray:
    """Pooled [mean projected-claim || mean context] vector of size 2*hidden."""
    if h_claim.size == 0 or h_evidence.size == 0:
        raise ValueError("cross_graph_attention requires non-empty node matrices")
    u_claim = h_claim @ params.attn_w
    u_evidence = h_evidence @ params.attn_w
    _, _, context = _attend(u_claim, u_evidence, params.attn_a)
    return np.concatenate([u_claim.mean(axis=0), context.mean(axis=0)])


def _softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max()
    expo = np.exp(shifted)
    return expo / expo.sum()


def classify(pooled: np.ndarray, params: VerifierParams) -> Verdict:
    """Two-layer perceptron with softmax; ties resolve to the first label."""
    hidden_pre = pooled @ params.mlp_w1 + params.mlp_b1
    hidden = np.maximum(hidden_pre, 0.0)
    logits = hidden @ params.mlp_w2 + params.mlp_b2
    probs = _softmax(logits)
    label = LABEL_ORDER[int(np.argmax(probs))]
    return Verdict(label=label, probs=tuple(float(p) for p in probs))


@dataclass
class EncodedExample:
    """Pre-encoded inputs for one claim: fixed during training since the
    embedding provider is frozen."""

    claim_id: int
    h0_claim: np.ndarray | None
    adj_claim: np.ndarray | None
    h0_evidence: np.ndarray | None
    adj_evidence: np.ndarray | None
    cls_vec: np.ndarray
    fallback_claim: tuple[int, ...] = ()
    fallback_evidence: tuple[int, ...] = ()


def encode_example(
    claim,
    evidence,
    labeler=None,
    provider=None,
    link: str = "overlap",
) -> EncodedExample:
    """Build graphs, order evidence, encode the marked sequence, and average
    node features for one claim."""
    if provider is None:
        raise ConfigError("encode_example requires an embedding provider")
    labeler = labeler or RuleLabeler()

    claim_graph = build_claim_graph(claim, labeler, link=link)

    refs: list[SentenceRef] = []
    texts: dict[SentenceRef, str] = {}
    groups = []
    for sentence in evidence:
        ref = SentenceRef(sentence.page_title, sentence.sentence_index)
        if ref in texts:
            continue
        texts[ref] = sentence.text
        refs.append(ref)
        groups.append((ref, extract_tuples(sentence.text, ref, labeler)))
    evidence_graph = build_graph(groups, link=link)

    ordered = sentence_order(evidence_graph, refs)
    seq = build_marked_sequence(claim.text, [texts[r] for r in ordered], ordered)
    emb = encode(seq, provider)

    h0_claim = adj_claim = h0_evidence = adj_evidence = None
    fallback_claim: tuple[int, ...] = ()
    fallback_evidence: tuple[int, ...] = ()
    if claim_graph.nodes:
        h0_claim, fallback_claim = node_features(claim_graph, emb, seq, provider)
        adj_claim = normalize_adjacency(claim_graph)
    if evidence_graph.nodes:
        h0_evidence, fallback_evidence = node_features(evidence_graph, emb, seq, provider)
        adj_evidence = normalize_adjacency(evidence_graph)

    return EncodedExample(
        claim_id=claim.id,
        h0_claim=h0_claim,
        adj_claim=adj_claim,
        h0_evidence=h0_evidence,
        adj_evidence=adj_evidence,
        cls_vec=classification_vector(emb),
        fallback_claim=fallback_claim,
        fallback_evidence=fallback_evidence,
    )


@dataclass
class _ForwardCache:
    hs_claim: list | None
    zs_claim: list | None
    hs_evidence: list | None
    zs_evidence: list | None
    u_claim: np.ndarray
    u_evidence: np.ndarray | None
    claim_is_query: bool
    pre: np.ndarray | None
    alpha: np.ndarray | None
    context: np.ndarray | None
    pooled: np.ndarray
    hidden_pre: np.ndarray
    hidden: np.ndarray
    logits: np.ndarray
    probs: np.ndarray


def _forward(example: EncodedExample, params: VerifierParams, direction: str) -> _ForwardCache:
    if direction not in ATTENTION_DIRECTIONS:
        raise ConfigError(f"unknown attention direction {direction!r}")
    h = params.hidden_dim

    hs_claim = zs_claim = hs_evidence = zs_evidence = None
    if example.h0_claim is not None:
        hs_claim, zs_claim = _gcn_forward_cached(
            example.h0_claim, example.adj_claim, params.weights_for("claim")
        )
        u_claim = hs_claim[-1] @ params.attn_w
    else:
        # Degenerate claim graph: the [CLS] vector stands in, projected to
        # the attention space. Requires embed_dim == hidden_dim.
        if example.cls_vec.shape[0] != params.attn_w.shape[0]:
            raise ConfigError(
                "claim-graph fallback requires the embedding dimension to equal "
                f"the GCN output dimension ({example.cls_vec.shape[0]} != "
                f"{params.attn_w.shape[0]})"
            )
        u_claim = example.cls_vec[None, :] @ params.attn_w

    u_evidence = None
    if example.h0_evidence is not None:
        hs_evidence, zs_evidence = _gcn_forward_cached(
            example.h0_evidence, example.adj_evidence, params.weights_for("evidence")
        )
        u_evidence = hs_evidence[-1] @ params.attn_w

    claim_is_query = direction == "claim_to_evidence" or u_evidence is None
    u_query = u_claim if claim_is_query else u_evidence
    u_key = u_evidence if claim_is_query else u_claim

    if u_key is None or u_key.shape[0] == 0:
        # Degenerate evidence: zero context vector.
        pre = alpha = context = None
        pooled = np.concatenate([u_query.mean(axis=0), np.zeros(h)])
    else:
        pre, alpha, context = _attend(u_query, u_key, params.attn_a)
        pooled = np.concatenate([u_query.mean(axis=0), context.mean(axis=0)])

    hidden_pre = pooled @ params.mlp_w1 + params.mlp_b1
    hidden = np.maximum(hidden_pre, 0.0)
    logits = hidden @ params.mlp_w2 + params.mlp_b2
    probs = _softmax(logits)
    return _ForwardCache(
        hs_claim=hs_claim,
        zs_claim=zs_claim,
        hs_evidence=hs_evidence,
        zs_evidence=zs_evidence,
        u_claim=u_claim,
        u_evidence=u_evidence,
        claim_is_query=claim_is_query,
        pre=pre,
        alpha=alpha,
        context=context,
        pooled=pooled,
        hidden_pre=hidden_pre,
        hidden=hidden,
        logits=logits,
        probs=probs,
    )


def predict(
    claim,
    evidence,
    params: VerifierParams,
    labeler=None,
    provider=None,
    link: str = "overlap",
    direction: str = "claim_to_evidence",
) -> Verdict:
    """Full stage-three pass: graphs, encoding, convolution, attention,
    classification. Degenerate graphs follow the documented fallbacks."""
    example = encode_example(claim, evidence, labeler=labeler, provider=provider, link=link)
    if example.cls_vec.shape[0] != params.embed_dim:
        raise ConfigError(
            f"provider dimension {example.cls_vec.shape[0]} does not match "
            f"checkpoint embed_dim {params.embed_dim}"
        )
    cache = _forward(example, params, direction)
    label = LABEL_ORDER[int(np.argmax(cache.probs))]
    return Verdict(
        label=label,
        probs=tuple(float(p) for p in cache.probs),
        evidence_used=tuple(evidence),
    )


def _example_loss_and_grads(example, label_idx, params, direction, grads):
    """Cross-entropy loss for one example plus analytic gradients accumulated
    into ``grads`` (same keys as params.matrices())."""
    cache = _forward(example, params, direction)
    h = params.hidden_dim

    # Stable cross entropy from logits.
    shifted = cache.logits - cache.logits.max()
    loss = float(np.log(np.exp(shifted).sum()) - shifted[label_idx])

    d_logits = cache.probs.copy()
    d_logits[label_idx] -= 1.0
    grads["mlp_w2"] += np.outer(cache.hidden, d_logits)
    grads["mlp_b2"] += d_logits
    d_hidden = params.mlp_w2 @ d_logits
    d_hidden_pre = d_hidden * (cache.hidden_pre > 0)
    grads["mlp_w1"] += np.outer(cache.pooled, d_hidden_pre)
    grads["mlp_b1"] += d_hidden_pre
    d_pooled = params.mlp_w1 @ d_hidden_pre

    u_query = cache.u_claim if cache.claim_is_query else cache.u_evidence
    u_key = cache.u_evidence if cache.claim_is_query else cache.u_claim
    n_query = u_query.shape[0]

    d_u_query = np.tile(d_pooled[:h] / n_query, (n_query, 1))
    d_u_key = None
    if cache.alpha is not None:
        d_context = np.tile(d_pooled[h:] / n_query, (n_query, 1))
        d_alpha = d_context @ u_key.T
        d_u_key = cache.alpha.T @ d_context
        d_scores = cache.alpha * (
            d_alpha - (d_alpha * cache.alpha).sum(axis=1, keepdims=True)
        )
        d_pre = d_scores * np.where(cache.pre > 0, 1.0, LEAKY_SLOPE)
        d_score_query = d_pre.sum(axis=1)
        d_score_key = d_pre.sum(axis=0)
        d_u_query += np.outer(d_score_query, params.attn_a[:h])
        d_u_key += np.outer(d_score_key, params.attn_a[h:])
        grads["attn_a"][:h] += u_query.T @ d_score_query
        grads["attn_a"][h:] += u_key.T @ d_score_key

    d_u_claim = d_u_query if cache.claim_is_query else d_u_key
    d_u_evidence = d_u_key if cache.claim_is_query else d_u_query

    if d_u_claim is not None:
        if cache.hs_claim is not None:
            grads["attn_w"] += cache.hs_claim[-1].T @ d_u_claim
            d_h_claim = d_u_claim @ params.attn_w.T
            sink = [grads[f"gcn_w{i}"] for i in range(params.layers)]
            _gcn_backward(
                d_h_claim,
                cache.hs_claim,
                cache.zs_claim,
                example.adj_claim,
                params.weights_for("claim"),
                sink,
            )
        else:
            grads["attn_w"] += np.outer(example.cls_vec, d_u_claim[0])
    if d_u_evidence is not None and cache.hs_evidence is not None:
        grads["attn_w"] += cache.hs_evidence[-1].T @ d_u_evidence
        d_h_evidence = d_u_evidence @ params.attn_w.T
        prefix = "gcn_w" if params.shared_weights else "gcn_ev_w"
        sink = [grads[f"{prefix}{i}"] for i in range(params.layers)]
        _gcn_backward(
            d_h_evidence,
            cache.hs_evidence,
            cache.zs_evidence,
            example.adj_evidence,
            params.weights_for("evidence"),
            sink,
        )
    return loss


def batch_loss(batch, params: VerifierParams, direction: str = "claim_to_evidence") -> float:
    """Mean cross entropy over (EncodedExample, label_index) pairs."""
    if not batch:
        raise ValueError("empty batch")
    total = 0.0
    for example, label_idx in batch:
        cache = _forward(example, params, direction)
        shifted = cache.logits - cache.logits.max()
        total += float(np.log(np.exp(shifted).sum()) - shifted[label_idx])
    return total / len(batch)


def batch_gradients(batch, params: VerifierParams, direction: str = "claim_to_evidence"):
    """Mean loss and mean analytic gradients for a batch."""
    if not batch:
        raise ValueError("empty batch")
    grads = {name: np.zeros_like(matrix) for name, matrix in params.matrices().items()}
    total = 0.0
    for example, label_idx in batch:
        total += _example_loss_and_grads(example, label_idx, params, direction, grads)
    n = len(batch)
    for name in grads:
        grads[name] /= n
    return total / n, grads


@dataclass
class TrainConfig:
    learning_rate: float = 0.01
    epochs: int = 150
    batch_size: int = 16
    seed: int = 7
    layers: int = 2
    hidden_dim: int = DEFAULT_DIM
    mlp_hidden: int = 64
    shared_weights: bool = True
    direction: str = "claim_to_evidence"

    def __post_init__(self):
        if self.epochs < 1 or self.batch_size < 1:
            raise ConfigError("epochs and batch_size must be >= 1")
        if self.direction not in ATTENTION_DIRECTIONS:
            raise ConfigError(f"unknown attention direction {self.direction!r}")


def train(
    dataset,
    config: TrainConfig,
    labeler=None,
    provider=None,
    link: str = "overlap",
):
    """Train on (Claim, evidence_sentences, gold_label) triples with Adam.

    Embeddings come from the frozen provider, so examples are encoded once.
    Fully deterministic for a fixed seed; returns the parameters and the
    per-epoch mean training loss trace.
    """
    dataset = list(dataset)
    if not dataset:
        raise ValueError("training dataset is empty")
    encoded: list[tuple[EncodedExample, int]] = []
    for claim, evidence, gold_label in dataset:
        if gold_label is None:
            raise ConfigError(f"claim {claim.id} has no gold label")
        example = encode_example(claim, evidence, labeler=labeler, provider=provider, link=link)
        encoded.append((example, label_index(gold_label)))
    embed_dim = encoded[0][0].cls_vec.shape[0]

    params = init_params(
        embed_dim=embed_dim,
        hidden_dim=config.hidden_dim,
        mlp_hidden=config.mlp_hidden,
        layers=config.layers,
        seed=config.seed,
        shared_weights=config.shared_weights,
    )
    matrices = params.matrices()
    adam_m = {name: np.zeros_like(m) for name, m in matrices.items()}
    adam_v = {name: np.zeros_like(m) for name, m in matrices.items()}
    beta1, beta2, eps = 0.9, 0.999, 1e-8
    step = 0

    rng = np.random.default_rng(config.seed)
    trace: list[float] = []
    for epoch in range(config.epochs):
        order = rng.permutation(len(encoded))
        epoch_loss = 0.0
        for start in range(0, len(encoded), config.batch_size):
            batch = [encoded[i] for i in order[start : start + config.batch_size]]
            loss, grads = batch_gradients(batch, params, config.direction)
            if not np.isfinite(loss):
                ids = [example.claim_id for example, _ in batch]
                raise FactGraphError(
                    f"non-finite loss at epoch {epoch}, batch starting {start} "
                    f"(claim ids {ids})"
                )
            epoch_loss += loss * len(batch)
            step += 1
            matrices = params.matrices()
            for name, grad in grads.items():
                adam_m[name] = beta1 * adam_m[name] + (1 - beta1) * grad
                adam_v[name] = beta2 * adam_v[name] + (1 - beta2) * grad * grad
                m_hat = adam_m[name] / (1 - beta1**step)
                v_hat = adam_v[name] / (1 - beta2**step)
                matrices[name] -= config.learning_rate * m_hat / (np.sqrt(v_hat) + eps)
        trace.append(epoch_loss / len(encoded))
    return params, trace


def _canonical(body: dict) -> str:
    return json.dumps(body, sort_keys=True, separators=(",", ":"))


def save_params(params: VerifierParams, path: str | Path) -> None:
    """Write a versioned checkpoint with an integrity checksum; byte-stable
    for identical parameters."""
    params.validate()
    body = {
        "format": CKPT_FORMAT,
        "embed_dim": params.embed_dim,
        "hidden_dim": params.hidden_dim,
        "mlp_hidden": params.mlp_hidden,
        "layers": params.layers,
        "seed": params.seed,
        "shared_weights": params.shared_weights,
        "matrices": {name: matrix.tolist() for name, matrix in params.matrices().items()},
    }
    digest = hashlib.sha256(_canonical(body).encode("utf-8")).hexdigest()
    write_text_atomic(path, _canonical({**body, "sha256": digest}))


def load_params(path: str | Path) -> VerifierParams:
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise IngestionError(f"cannot read checkpoint from {path}: {exc}") from exc
    if payload.get("format") != CKPT_FORMAT:
        raise IngestionError(f"{path}: unsupported checkpoint format {payload.get('format')!r}")
    recorded = payload.pop("sha256", None)
    if recorded != hashlib.sha256(_canonical(payload).encode("utf-8")).hexdigest():
        raise IngestionError(f"{path}: checkpoint checksum mismatch")
    matrices = {
        name: np.asarray(values, dtype=np.float64)
        for name, values in payload["matrices"].items()
    }
    layers = payload["layers"]
    shared = payload["shared_weights"]
    params = VerifierParams(
        gcn_weights=[matrices[f"gcn_w{i}"] for i in range(layers)],
        attn_w=matrices["attn_w"],
        attn_a=matrices["attn_a"],
        mlp_w1=matrices["mlp_w1"],
        mlp_b1=matrices["mlp_b1"],
        mlp_w2=matrices["mlp_w2"],
        mlp_b2=matrices["mlp_b2"],
        embed_dim=payload["embed_dim"],
        hidden_dim=payload["hidden_dim"],
        mlp_hidden=payload["mlp_hidden"],
        seed=payload["seed"],
        shared_weights=shared,
        gcn_weights_evidence=None
        if shared
        else [matrices[f"gcn_ev_w{i}"] for i in range(layers)],
    )
    params.validate()
    return params
