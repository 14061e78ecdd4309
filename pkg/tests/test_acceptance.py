"""Acceptance suite: every criterion runs at its stated tolerance and prints
one pass/fail line. Run with `pytest tests/test_acceptance.py -v -s`."""

import random
import time

import numpy as np
import pytest

from factgraph.cli import main
from factgraph.corpus import Claim
from factgraph.encoder import DeterministicEncoder
from factgraph.metrics import (
    RECALL_DIRECTION_NOTE,
    REPORT_COLUMNS,
    evidence_prf,
    fever_score,
    label_accuracy,
    parse_report_tsv,
    reference_rows,
)
from factgraph.pipeline import Pipeline
from factgraph.selection import SWEEP_THRESHOLDS, ScoredSentence, SelectionConfig
from factgraph.verifier import (
    TrainConfig,
    attention_weights,
    batch_gradients,
    batch_loss,
    encode_example,
    gcn_forward,
    init_params,
)

THRESHOLD = 0.5  # selection threshold the synthetic experiments run at


def _finish(number: int, name: str, problems: list[str]) -> None:
    status = "PASS" if not problems else "FAIL"
    detail = "" if not problems else " - " + "; ".join(problems)
    print(f"[criterion {number}] {status}: {name}{detail}")
    assert not problems, problems


@pytest.fixture(scope="module")
def trained(synth_store, synth_train_claims):
    pipeline = Pipeline(
        synth_store, selection=SelectionConfig(threshold=THRESHOLD), workers=2
    )
    started = time.monotonic()
    params, trace = pipeline.train(synth_train_claims, TrainConfig())
    elapsed = time.monotonic() - started
    return pipeline, params, trace, elapsed


# -------------------------------------------------------------- criterion 1


def _oracle_label_accuracy(preds, gold):
    correct = sum(1 for cid, label in preds.items() if gold[cid] == label)
    return 100.0 * correct / len(preds)


def _oracle_prf(retrieved, claims):
    hits = got = gold = 0
    for claim in claims:
        union = set()
        for group in claim.gold_evidence:
            for pair in group:
                union.add(pair)
        if not union:
            continue
        found = retrieved.get(claim.id, set())
        got += len(found)
        gold += len(union)
        hits += sum(1 for pair in found if pair in union)
    precision = 100.0 * hits / got if got else 0.0
    recall = 100.0 * hits / gold if gold else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1


def _oracle_fever(preds, retrieved, claims):
    scored = 0
    for claim in claims:
        if preds.get(claim.id) != claim.gold_label:
            continue
        if claim.gold_label == "NEI":
            scored += 1
            continue
        for group in claim.gold_evidence:
            if all(pair in retrieved.get(claim.id, set()) for pair in group):
                scored += 1
                break
    return 100.0 * scored / len(claims)


def test_criterion_1_metric_oracle_equivalence():
    problems = []
    rng = random.Random(2024)
    labels = ("SUPPORTS", "REFUTES", "NEI")
    started = time.monotonic()
    for trial in range(200):
        claims, preds, retrieved = [], {}, {}
        for cid in range(rng.randint(1, 10)):
            label = rng.choice(labels)
            groups = []
            if label != "NEI":
                groups = [
                    frozenset(
                        (f"P{rng.randint(0, 4)}", rng.randint(0, 5))
                        for _ in range(rng.randint(1, 3))
                    )
                    for _ in range(rng.randint(1, 3))
                ]
            claims.append(
                Claim(id=cid, text=f"c{cid}", gold_label=label, gold_evidence=tuple(groups))
            )
            preds[cid] = rng.choice(labels)
            retrieved[cid] = {
                (f"P{rng.randint(0, 4)}", rng.randint(0, 5))
                for _ in range(rng.randint(0, 6))
            }
        gold = {c.id: c.gold_label for c in claims}
        if fever_score(preds, retrieved, claims) != _oracle_fever(preds, retrieved, claims):
            problems.append(f"fever mismatch on trial {trial}")
        if label_accuracy(preds, gold) != _oracle_label_accuracy(preds, gold):
            problems.append(f"accuracy mismatch on trial {trial}")
        if evidence_prf(retrieved, claims) != _oracle_prf(retrieved, claims):
            problems.append(f"prf mismatch on trial {trial}")
    elapsed = time.monotonic() - started
    if elapsed >= 10.0:
        problems.append(f"runtime {elapsed:.1f}s >= 10s")
    _finish(1, "metric oracle equivalence on 200 random instances", problems)


# -------------------------------------------------------------- criterion 2


def _grad_fixture():
    provider = DeterministicEncoder(dim=8, seed=3)
    evidence = [
        ScoredSentence("Alden_Varro", 6, "Alden Varro directed Parkfall Saga.", 1.0),
        ScoredSentence("Alden_Varro", 8, "Parkfall Saga won praise.", 0.4),
    ]
    full = encode_example(
        Claim(id=1, text="Alden Varro directed Parkfall Saga."), evidence, provider=provider
    )
    no_evidence = encode_example(
        Claim(id=2, text="Briony Whitlock composed Winter Notes."), [], provider=provider
    )
    no_claim = encode_example(
        Claim(id=3, text="Zzz qqq nothing."), evidence[:1], provider=provider
    )
    assert full.h0_claim.shape[0] <= 6 and full.h0_evidence.shape[0] <= 6
    return [(full, 0), (no_evidence, 2), (no_claim, 1)]


def test_criterion_2_numerical_correctness():
    problems = []
    started = time.monotonic()

    batch = _grad_fixture()
    params = init_params(embed_dim=8, hidden_dim=8, mlp_hidden=8, layers=2, seed=11)
    _, grads = batch_gradients(batch, params)
    step = 1e-5
    worst = 0.0
    for name, matrix in params.matrices().items():
        flat = matrix.reshape(-1)
        grad_flat = grads[name].reshape(-1)
        for k in range(flat.size):
            original = flat[k]
            flat[k] = original + step
            up = batch_loss(batch, params)
            flat[k] = original - step
            down = batch_loss(batch, params)
            flat[k] = original
            numeric = (up - down) / (2 * step)
            analytic = grad_flat[k]
            rel = abs(analytic - numeric) / max(abs(analytic), abs(numeric), 1e-6)
            worst = max(worst, rel)
            if rel >= 1e-4:
                problems.append(f"gradient {name}[{k}] rel error {rel:.2e}")
    print(f"    worst gradient relative error: {worst:.2e}")

    rng = np.random.default_rng(77)
    attn_params = init_params(embed_dim=8, hidden_dim=8, mlp_hidden=4, seed=5)
    for trial in range(50):
        n_claim, n_evidence = rng.integers(1, 8, 2)
        alpha = attention_weights(
            rng.normal(size=(n_claim, 8)), rng.normal(size=(n_evidence, 8)), attn_params
        )
        if not (np.all(alpha >= 0) and np.allclose(alpha.sum(axis=1), 1.0, atol=1e-6)):
            problems.append(f"attention simplex violated on graph {trial}")

        n = int(rng.integers(1, 10))
        adjacency = np.zeros((n, n))
        for _ in range(int(rng.integers(0, 2 * n))):
            i, j = rng.integers(0, n, 2)
            if i != j:
                adjacency[i, j] = adjacency[j, i] = 1.0
        with_loops = adjacency + np.eye(n)
        inv = 1.0 / np.sqrt(with_loops.sum(axis=1))
        a_hat = with_loops * np.outer(inv, inv)
        if not np.array_equal(a_hat, a_hat.T):
            problems.append(f"adjacency not symmetric on graph {trial}")
        eigenvalues = np.linalg.eigvalsh(a_hat)
        if eigenvalues.min() < -1.0 - 1e-8 or eigenvalues.max() > 1.0 + 1e-8:
            problems.append(f"spectrum outside [-1, 1] on graph {trial}")

    elapsed = time.monotonic() - started
    if elapsed >= 60.0:
        problems.append(f"runtime {elapsed:.1f}s >= 60s")
    _finish(2, "gradient checks and adjacency/attention invariants", problems)


# -------------------------------------------------------------- criterion 3


def test_criterion_3_gcn_permutation_equivariance():
    problems = []
    rng = np.random.default_rng(31)
    weights = [rng.normal(size=(6, 6)) * 0.4, rng.normal(size=(6, 6)) * 0.4]
    for trial in range(50):
        n = int(rng.integers(2, 13))
        adjacency = np.zeros((n, n))
        for _ in range(int(rng.integers(0, 2 * n))):
            i, j = rng.integers(0, n, 2)
            if i != j:
                adjacency[i, j] = adjacency[j, i] = 1.0
        with_loops = adjacency + np.eye(n)
        inv = 1.0 / np.sqrt(with_loops.sum(axis=1))
        a_hat = with_loops * np.outer(inv, inv)
        h0 = rng.normal(size=(n, 6))
        p = np.eye(n)[rng.permutation(n)]
        direct = p @ gcn_forward(h0, a_hat, weights)
        permuted = gcn_forward(p @ h0, p @ a_hat @ p.T, weights)
        if np.abs(direct - permuted).max() > 1e-6:
            problems.append(f"equivariance violated on graph {trial}")
    _finish(3, "gcn permutation equivariance on 50 random graphs", problems)


# -------------------------------------------------------------- criterion 4


def test_criterion_4_end_to_end_desk_scale(trained, synth_dev_claims):
    pipeline, params, trace, elapsed = trained
    problems = []
    row, preds, _ = pipeline.evaluate(synth_dev_claims)
    print(f"    held-out label accuracy: {row.label_accuracy:.2f}% "
          f"(training {elapsed:.1f}s, final loss {trace[-1]:.4f})")
    if row.label_accuracy < 80.0:
        problems.append(f"held-out accuracy {row.label_accuracy:.2f}% < 80%")
    if elapsed >= 300.0:
        problems.append(f"training took {elapsed:.0f}s >= 5 min")
    if len(synth_dev_claims) != 30:
        problems.append(f"held-out split has {len(synth_dev_claims)} claims, expected 30")
    _finish(4, "end-to-end training reaches 80% held-out accuracy", problems)


# -------------------------------------------------------------- criterion 5


def test_criterion_5_sweep_properties(trained, synth_all_claims):
    pipeline, _, _, _ = trained
    problems = []
    report = pipeline.sweep(synth_all_claims, SWEEP_THRESHOLDS)
    if report.violations:
        problems.extend(report.violations)
    ordered = sorted(report.rows, key=lambda r: r.threshold)
    for earlier, later in zip(ordered, ordered[1:]):
        if later.recall > earlier.recall + 1e-9:
            problems.append("recall increased along the sweep")
        if later.fever_score > earlier.fever_score + 1e-9:
            problems.append("fever score increased along the sweep")
    # Report schema matches the reference table's columns exactly.
    parsed = parse_report_tsv(report.to_tsv())
    if len(parsed) != len(SWEEP_THRESHOLDS):
        problems.append("row count mismatch")
    reference = reference_rows()
    if [r.threshold for r in reference] != list(SWEEP_THRESHOLDS):
        problems.append("reference fixture thresholds drifted")
    if reference[0].fever_score != 91.10 or reference[-1].fever_score != 87.70:
        problems.append("reference fixture values drifted")
    if RECALL_DIRECTION_NOTE not in report.notes:
        problems.append("recall-direction discrepancy note missing from report")
    header = report.to_tsv().splitlines()[0].split("\t")
    if tuple(header) != REPORT_COLUMNS:
        problems.append("report columns do not match the reference schema")
    _finish(5, "sweep monotonicity, schema, and reference fixture", problems)


# -------------------------------------------------------------- criterion 6


def test_criterion_6_retrieval_sanity(synth_store, synth_all_claims):
    problems = []
    pipeline = Pipeline(synth_store, selection=SelectionConfig(top_docs=10), workers=2)
    from factgraph.text import content_token_set

    eligible = hits = 0
    for claim in synth_all_claims:
        gold_pages = claim.gold_pages()
        if not gold_pages:
            continue
        claim_tokens = content_token_set(claim.text)
        for page in gold_pages:
            if content_token_set(page) <= claim_tokens:
                eligible += 1
                ranked = [d.title for d in pipeline.candidate_documents(claim)[:10]]
                if page in ranked:
                    hits += 1
    rate = 100.0 * hits / eligible if eligible else 0.0
    print(f"    gold document in top-10 for {rate:.1f}% of {eligible} eligible claims")
    if eligible == 0:
        problems.append("no eligible claims found")
    if rate < 90.0:
        problems.append(f"top-10 hit rate {rate:.1f}% < 90%")
    _finish(6, "gold document ranked in top 10 for named claims", problems)


# -------------------------------------------------------------- criterion 7


def test_criterion_7_skip_retrieval_lowers_precision(synth_store, synth_all_claims):
    problems = []
    base = Pipeline(synth_store, selection=SelectionConfig(threshold=THRESHOLD), workers=2)
    ablated = Pipeline(
        synth_store,
        selection=SelectionConfig(threshold=THRESHOLD),
        skip_retrieval=True,
        workers=2,
    )
    retrieved_base = {
        cid: {s.pair() for s in r.evidence}
        for cid, r in base.run(synth_all_claims, with_verdict=False).items()
    }
    retrieved_ablated = {
        cid: {s.pair() for s in r.evidence}
        for cid, r in ablated.run(synth_all_claims, with_verdict=False).items()
    }
    precision_base = evidence_prf(retrieved_base, synth_all_claims)[0]
    precision_ablated = evidence_prf(retrieved_ablated, synth_all_claims)[0]
    print(f"    evidence precision: default {precision_base:.2f}% vs "
          f"skip-retrieval {precision_ablated:.2f}%")
    if not precision_ablated < precision_base:
        problems.append(
            f"ablated precision {precision_ablated:.2f} not strictly below "
            f"{precision_base:.2f}"
        )
    _finish(7, "skip-retrieval strictly lowers evidence precision", problems)


# -------------------------------------------------------------- criterion 8


def _run_twice(argv_factory, tmp_path, names):
    out_a, out_b = tmp_path / "run_a", tmp_path / "run_b"
    assert main(argv_factory(out_a)) in (0, 1)
    assert main(argv_factory(out_b)) in (0, 1)
    differences = []
    for name in names:
        if (out_a / name).read_bytes() != (out_b / name).read_bytes():
            differences.append(name)
    return differences


def test_criterion_8_byte_identical_reruns(synth_paths, tmp_path):
    problems = []
    wiki = str(synth_paths["wiki"])
    train_claims = str(synth_paths["train"])
    dev_claims = str(synth_paths["dev"])

    ingest_dir = tmp_path / "store_a"
    assert main(["ingest", "--wiki", wiki, "--out", str(ingest_dir)]) == 0
    store = str(ingest_dir / "store")

    problems += [
        f"ingest: {name}"
        for name in _run_twice(
            lambda out: ["ingest", "--wiki", wiki, "--out", str(out)],
            tmp_path / "ingest",
            ["store/documents.jsonl", "store/index.jsonl", "manifest.json"],
        )
    ]
    problems += [
        f"select: {name}"
        for name in _run_twice(
            lambda out: [
                "select", "--store", store, "--claims", dev_claims,
                "--threshold", "0.5", "--out", str(out),
            ],
            tmp_path / "select",
            ["evidence.jsonl", "manifest.json"],
        )
    ]
    problems += [
        f"train: {name}"
        for name in _run_twice(
            lambda out: [
                "train", "--store", store, "--claims", train_claims,
                "--threshold", "0.5", "--epochs", "25", "--seed", "7", "--out", str(out),
            ],
            tmp_path / "train",
            ["checkpoint.json", "losses.json", "manifest.json"],
        )
    ]
    checkpoint = str(tmp_path / "train" / "run_a" / "checkpoint.json")
    problems += [
        f"sweep: {name}"
        for name in _run_twice(
            lambda out: [
                "sweep", "--store", store, "--claims", dev_claims,
                "--params", checkpoint, "--thresholds", "0,1e-4,1e-3,1e-2,1e-1",
                "--out", str(out),
            ],
            tmp_path / "sweep",
            ["report.tsv", "report.json", "manifest.json"],
        )
    ]
    problems += [
        f"predict: {name}"
        for name in _run_twice(
            lambda out: [
                "predict", "--store", store, "--claims", dev_claims,
                "--params", checkpoint, "--threshold", "0.5", "--out", str(out),
            ],
            tmp_path / "predict",
            ["predictions.jsonl", "manifest.json"],
        )
    ]
    _finish(8, "byte-identical outputs across reruns of every subcommand", problems)
