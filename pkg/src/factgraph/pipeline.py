"""End-to-end orchestration: retrieve, select, predict, evaluate, and sweep.

A Pipeline binds a document store to the configured labeler, embedding
provider, and selection settings. Per-claim work is pure, so datasets fan
out to a bounded thread pool and results are reduced in claim-id order for
deterministic outputs.
"""

from __future__ import annotations

import os
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

from .corpus import Claim, Document, DocumentStore
from .encoder import DeterministicEncoder
from .errors import ConfigError, RemoteNotFoundError
from .metrics import MetricsRow, SweepReport, build_row, threshold_sweep
from .retrieval import (
    MediaWikiClient,
    RankedDocument,
    extract_entities,
    rank_documents,
    title_is_ambiguous,
)
from .selection import RelevanceHead, ScoredSentence, SelectionConfig, select_evidence
from .srlgraph import RuleLabeler
from .text import tokens
from .verifier import TrainConfig, Verdict, VerifierParams, predict, train


@dataclass
class ClaimResult:
    claim_id: int
    ranked: list[RankedDocument]
    evidence: list[ScoredSentence]
    verdict: Verdict | None = None


class Pipeline:
    def __init__(
        self,
        store: DocumentStore,
        selection: SelectionConfig | None = None,
        labeler=None,
        provider=None,
        head: RelevanceHead | None = None,
        params: VerifierParams | None = None,
        skip_retrieval: bool = False,
        link: str = "overlap",
        direction: str = "claim_to_evidence",
        online_client: MediaWikiClient | None = None,
        workers: int | None = None,
    ):
        self.store = store
        self.selection = selection or SelectionConfig()
        self.labeler = labeler or RuleLabeler()
        self.provider = provider or DeterministicEncoder()
        self.head = head
        self.params = params
        self.skip_retrieval = skip_retrieval
        self.link = link
        self.direction = direction
        self.online_client = online_client
        self.workers = workers
        self._overlay: dict[str, Document] = {}
        self._online_attempted: set[str] = set()
        self._combined: DocumentStore | None = None
        self._lock = threading.Lock()

    def with_threshold(self, threshold: float) -> "Pipeline":
        """Same components, different selection threshold (for sweeps)."""
        clone = Pipeline(
            store=self.store,
            selection=replace(self.selection, threshold=threshold),
            labeler=self.labeler,
            provider=self.provider,
            head=self.head,
            params=self.params,
            skip_retrieval=self.skip_retrieval,
            link=self.link,
            direction=self.direction,
            online_client=self.online_client,
            workers=self.workers,
        )
        clone._overlay = self._overlay
        clone._online_attempted = self._online_attempted
        return clone

    def _selection_store(self) -> DocumentStore:
        if not self._overlay:
            return self.store
        with self._lock:
            if self._combined is None or len(self._combined) != len(self.store) + len(
                self._overlay
            ):
                documents = {title: self.store.get(title) for title in self.store.titles()}
                documents.update(self._overlay)
                self._combined = DocumentStore(documents)
            return self._combined

    def _fetch_missing(self, mentions) -> None:
        for mention in mentions:
            title = mention.text
            if title in self.store or title in self._overlay or title in self._online_attempted:
                continue
            if any(self.store.lookup_token(tok) for tok in tokens(title)):
                continue  # the offline index already covers this mention
            try:
                document = self.online_client.fetch_document(title)
            except RemoteNotFoundError:
                with self._lock:
                    self._online_attempted.add(title)
                continue
            with self._lock:
                self._online_attempted.add(title)
                self._overlay[document.title] = document
                self._combined = None

    def candidate_documents(self, claim: Claim) -> list[RankedDocument]:
        if self.skip_retrieval:
            # Ablation: hand the whole corpus to selection, no truncation.
            store = self._selection_store()
            return [
                RankedDocument(title=title, score=0.0, ambiguous=title_is_ambiguous(title))
                for title in store.titles()
            ]
        mentions = extract_entities(claim.text)
        if self.online_client is not None and self.online_client.enabled:
            runs = [m for m in mentions if m.text != claim.text]
            self._fetch_missing(runs)
        return rank_documents(mentions, self._selection_store(), k=self.selection.top_docs)

    def select(self, claim: Claim) -> list[ScoredSentence]:
        docs = self.candidate_documents(claim)
        return select_evidence(
            claim,
            docs,
            self._selection_store(),
            self.selection,
            provider=self.provider,
            head=self.head,
        )

    def predict(self, claim: Claim) -> Verdict:
        if self.params is None:
            raise ConfigError("prediction requires trained verifier parameters")
        evidence = self.select(claim)
        return predict(
            claim,
            evidence,
            self.params,
            labeler=self.labeler,
            provider=self.provider,
            link=self.link,
            direction=self.direction,
        )

    def _process(self, claim: Claim, with_verdict: bool) -> ClaimResult:
        ranked = self.candidate_documents(claim)
        evidence = select_evidence(
            claim,
            ranked,
            self._selection_store(),
            self.selection,
            provider=self.provider,
            head=self.head,
        )
        verdict = None
        if with_verdict:
            if self.params is None:
                raise ConfigError("prediction requires trained verifier parameters")
            verdict = predict(
                claim,
                evidence,
                self.params,
                labeler=self.labeler,
                provider=self.provider,
                link=self.link,
                direction=self.direction,
            )
        return ClaimResult(
            claim_id=claim.id, ranked=ranked, evidence=evidence, verdict=verdict
        )

    def run(self, claims, with_verdict: bool = True) -> dict[int, ClaimResult]:
        """Process claims on a bounded pool; results keyed and ordered by id."""
        claims = list(claims)
        workers = self.workers or os.cpu_count() or 1
        results: dict[int, ClaimResult] = {}
        if workers <= 1 or len(claims) <= 1:
            for claim in claims:
                results[claim.id] = self._process(claim, with_verdict)
        else:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                for result in pool.map(lambda c: self._process(c, with_verdict), claims):
                    results[result.claim_id] = result
        return {cid: results[cid] for cid in sorted(results)}

    def training_dataset(self, claims) -> list[tuple[Claim, list[ScoredSentence], str]]:
        results = self.run(claims, with_verdict=False)
        dataset = []
        for claim in sorted(claims, key=lambda c: c.id):
            if claim.gold_label is None:
                raise ConfigError(f"claim {claim.id} has no gold label; cannot train on it")
            dataset.append((claim, results[claim.id].evidence, claim.gold_label))
        return dataset

    def train(self, claims, config: TrainConfig) -> tuple[VerifierParams, list[float]]:
        dataset = self.training_dataset(claims)
        params, trace = train(
            dataset, config, labeler=self.labeler, provider=self.provider, link=self.link
        )
        self.params = params
        return params, trace

    def evaluate(self, claims) -> tuple[MetricsRow, dict, dict]:
        """Metrics row at the configured threshold, plus raw preds/retrieved."""
        results = self.run(claims, with_verdict=True)
        preds = {cid: result.verdict.label for cid, result in results.items()}
        retrieved = {
            cid: {s.pair() for s in result.evidence} for cid, result in results.items()
        }
        row = build_row(self.selection.threshold, preds, retrieved, claims)
        return row, preds, retrieved

    def sweep(self, claims, thresholds) -> SweepReport:
        def evaluate(threshold: float):
            run = self.with_threshold(threshold).run(claims, with_verdict=True)
            preds = {cid: result.verdict.label for cid, result in run.items()}
            retrieved = {cid: {s.pair() for s in result.evidence} for cid, result in run.items()}
            return preds, retrieved

        return threshold_sweep(evaluate, claims, thresholds)
