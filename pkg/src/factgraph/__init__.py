"""factgraph: claim verification over evidence graphs.

Pipeline: keyword document retrieval, thresholded evidence-sentence
selection, semantic-role graphs over claim and evidence, graph convolution
with cross-graph attention for three-way classification, and FEVER-style
evaluation with a threshold-sweep report.
"""

from .corpus import Claim, Document, DocumentStore, load_claims, load_store, load_wiki_pages
from .encoder import DeterministicEncoder, ExternalEncoder, build_marked_sequence, encode
from .errors import FactGraphError
from .metrics import MetricsRow, SweepReport, evidence_prf, fever_score, label_accuracy
from .pipeline import Pipeline
from .retrieval import EntityMention, RankedDocument, extract_entities, rank_documents
from .selection import ScoredSentence, SelectionConfig, score_pair, select_evidence
from .srlgraph import SRLGraph, SRLTuple, build_claim_graph, build_graph, sentence_order
from .verifier import (
    TrainConfig,
    Verdict,
    VerifierParams,
    init_params,
    load_params,
    predict,
    save_params,
    train,
)

__version__ = "0.1.0"

__all__ = [
    "Claim",
    "Document",
    "DocumentStore",
    "DeterministicEncoder",
    "EntityMention",
    "ExternalEncoder",
    "FactGraphError",
    "MetricsRow",
    "Pipeline",
    "RankedDocument",
    "SRLGraph",
    "SRLTuple",
    "ScoredSentence",
    "SelectionConfig",
    "SweepReport",
    "TrainConfig",
    "Verdict",
    "VerifierParams",
    "build_claim_graph",
    "build_graph",
    "build_marked_sequence",
    "encode",
    "evidence_prf",
    "extract_entities",
    "fever_score",
    "init_params",
    "label_accuracy",
    "load_claims",
    "load_params",
    "load_store",
    "load_wiki_pages",
    "predict",
    "rank_documents",
    "save_params",
    "score_pair",
    "select_evidence",
    "sentence_order",
    "train",
]
