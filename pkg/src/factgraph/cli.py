"""Command-line interface: ingest, retrieve, select, graph, train, predict,
evaluate, sweep, and the synthetic-corpus generator.

Configuration comes from an INI-style file with one section per module;
flags override config values. Outputs are written atomically under --out,
and every run leaves a manifest (resolved settings, seed, input checksums)
beside its outputs. Exit codes: 0 success, 1 pipeline failure, 2 usage.
"""

from __future__ import annotations

import argparse
import configparser
import json
import sys
from dataclasses import asdict, dataclass
from pathlib import Path

from ._io import sha256_file, write_text_atomic
from .corpus import load_claims, load_store, load_wiki_pages, save_store
from .encoder import get_provider
from .errors import ConfigError, FactGraphError, PipelineError
from .metrics import SweepReport
from .pipeline import Pipeline
from .retrieval import MediaWikiClient
from .selection import SWEEP_THRESHOLDS, RelevanceHead, SelectionConfig, evidence_record
from .srlgraph import build_claim_graph, build_graph, extract_tuples, get_labeler
from .srlgraph import SentenceRef, graph_to_dict, sentence_order
from .verifier import TrainConfig, load_params, save_params

CONFIG_SCHEMA = {
    "corpus": {"store"},
    "retrieval": {"online", "wiki_url", "cache_dir"},
    "selection": {"threshold", "top_docs", "top_sents", "scorer", "head"},
    "srlgraph": {"labeler", "labeler_url", "link"},
    "encoder": {"provider", "dim", "seed", "encoder_url"},
    "verifier": {
        "layers",
        "hidden_dim",
        "mlp_hidden",
        "epochs",
        "learning_rate",
        "batch_size",
        "seed",
        "shared_weights",
        "direction",
    },
    "cli": {"workers"},
}

_BOOL_VALUES = {"1": True, "true": True, "yes": True, "0": False, "false": False, "no": False}


class UsageError(ConfigError):
    """Missing or malformed command-line input; exits with status 2."""


@dataclass
class Settings:
    store: str | None = None
    threshold: float = 0.0
    top_docs: int = 10
    top_sents: int = 5
    scorer: str = "overlap"
    head: str | None = None
    labeler: str = "rules"
    labeler_url: str | None = None
    link: str = "overlap"
    provider: str = "deterministic"
    dim: int = 64
    encoder_seed: int = 0
    encoder_url: str | None = None
    layers: int = 2
    hidden_dim: int = 64
    mlp_hidden: int = 64
    epochs: int = 150
    learning_rate: float = 0.01
    batch_size: int = 16
    seed: int = 7
    shared_weights: bool = True
    direction: str = "claim_to_evidence"
    workers: int | None = None
    online: bool = False
    wiki_url: str | None = None
    cache_dir: str | None = None
    skip_retrieval: bool = False


def _load_config(path: str | None) -> dict[str, dict[str, str]]:
    if path is None:
        return {}
    parser = configparser.ConfigParser()
    try:
        with open(path, encoding="utf-8") as handle:
            parser.read_file(handle)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    except configparser.Error as exc:
        raise ConfigError(f"malformed config file {path}: {exc}") from exc
    config: dict[str, dict[str, str]] = {}
    for section in parser.sections():
        if section not in CONFIG_SCHEMA:
            raise ConfigError(f"unknown config section [{section}] in {path}")
        config[section] = {}
        for key, value in parser.items(section):
            if key not in CONFIG_SCHEMA[section]:
                raise ConfigError(f"unknown config key {key!r} in section [{section}]")
            config[section][key] = value
    return config


def _convert(value: str, kind, where: str):
    if kind is bool:
        flag = _BOOL_VALUES.get(value.strip().lower())
        if flag is None:
            raise ConfigError(f"{where}: expected a boolean, got {value!r}")
        return flag
    try:
        return kind(value)
    except ValueError as exc:
        raise ConfigError(f"{where}: expected {kind.__name__}, got {value!r}") from exc


def _resolve(args, config) -> Settings:
    settings = Settings()
    plan = [
        ("store", "corpus", "store", str),
        ("threshold", "selection", "threshold", float),
        ("top_docs", "selection", "top_docs", int),
        ("top_sents", "selection", "top_sents", int),
        ("scorer", "selection", "scorer", str),
        ("head", "selection", "head", str),
        ("labeler", "srlgraph", "labeler", str),
        ("labeler_url", "srlgraph", "labeler_url", str),
        ("link", "srlgraph", "link", str),
        ("provider", "encoder", "provider", str),
        ("dim", "encoder", "dim", int),
        ("encoder_seed", "encoder", "seed", int),
        ("encoder_url", "encoder", "encoder_url", str),
        ("layers", "verifier", "layers", int),
        ("hidden_dim", "verifier", "hidden_dim", int),
        ("mlp_hidden", "verifier", "mlp_hidden", int),
        ("epochs", "verifier", "epochs", int),
        ("learning_rate", "verifier", "learning_rate", float),
        ("batch_size", "verifier", "batch_size", int),
        ("seed", "verifier", "seed", int),
        ("shared_weights", "verifier", "shared_weights", bool),
        ("direction", "verifier", "direction", str),
        ("workers", "cli", "workers", int),
        ("online", "retrieval", "online", bool),
        ("wiki_url", "retrieval", "wiki_url", str),
        ("cache_dir", "retrieval", "cache_dir", str),
    ]
    for attr, section, key, kind in plan:
        if section in config and key in config[section]:
            setattr(settings, attr, _convert(config[section][key], kind, f"[{section}] {key}"))
        flag = getattr(args, attr, None)
        if flag is not None:
            setattr(settings, attr, flag)
    if getattr(args, "skip_retrieval", False):
        settings.skip_retrieval = True
    return settings


def _selection_config(settings: Settings) -> SelectionConfig:
    return SelectionConfig(
        threshold=settings.threshold,
        top_docs=settings.top_docs,
        top_sents=settings.top_sents,
        scorer=settings.scorer,
    )


def _make_pipeline(settings: Settings, store, params=None) -> Pipeline:
    labeler = get_labeler(settings.labeler, url=settings.labeler_url)
    provider = get_provider(
        settings.provider, dim=settings.dim, seed=settings.encoder_seed, url=settings.encoder_url
    )
    head = RelevanceHead.load(settings.head) if settings.head else None
    if settings.scorer == "encoder" and head is None:
        raise ConfigError("encoder scorer requires a relevance head ([selection] head)")
    online_client = None
    if settings.online:
        online_client = MediaWikiClient(
            base_url=settings.wiki_url, cache_dir=settings.cache_dir, enabled=True
        )
    return Pipeline(
        store=store,
        selection=_selection_config(settings),
        labeler=labeler,
        provider=provider,
        head=head,
        params=params,
        skip_retrieval=settings.skip_retrieval,
        link=settings.link,
        direction=settings.direction,
        online_client=online_client,
        workers=settings.workers,
    )


def _write_manifest(out: Path, command: str, settings: Settings, inputs: dict[str, str]) -> None:
    checksums = {}
    for name, path in inputs.items():
        p = Path(path)
        if p.is_dir():
            checksums[name] = {
                child.name: sha256_file(child) for child in sorted(p.iterdir()) if child.is_file()
            }
        else:
            checksums[name] = sha256_file(p)
    manifest = {
        "command": command,
        "settings": asdict(settings),
        "seed": settings.seed,
        "inputs": checksums,
    }
    write_text_atomic(out / "manifest.json", json.dumps(manifest, sort_keys=True, indent=2) + "\n")


def _write_jsonl(path: Path, rows) -> None:
    write_text_atomic(
        path, "\n".join(json.dumps(row, sort_keys=True) for row in rows) + ("\n" if rows else "")
    )


def _require(args, *names) -> None:
    for name in names:
        if getattr(args, name, None) is None:
            raise UsageError(f"--{name.replace('_', '-')} is required for this command")


def _load_inputs(args, settings):
    store_path = args.store or settings.store
    if store_path is None:
        raise UsageError("--store (or [corpus] store) is required for this command")
    store = load_store(store_path)
    claims = load_claims(args.claims)
    return store_path, store, claims


def cmd_ingest(args, settings: Settings) -> int:
    _require(args, "wiki")
    out = Path(args.out)
    store, warnings = load_wiki_pages(args.wiki)
    save_store(store, out / "store")
    _write_manifest(out, "ingest", settings, {"wiki": args.wiki})
    print(f"ingested {len(store)} documents into {out / 'store'} ({warnings} warnings)")
    return 0


def cmd_retrieve(args, settings: Settings) -> int:
    _require(args, "claims")
    store_path, store, claims = _load_inputs(args, settings)
    pipeline = _make_pipeline(settings, store)
    out = Path(args.out)
    rows = []
    for claim in sorted(claims, key=lambda c: c.id):
        ranked = pipeline.candidate_documents(claim)
        rows.append(
            {
                "claim_id": claim.id,
                "docs": [[d.title, d.score, d.ambiguous] for d in ranked],
            }
        )
    _write_jsonl(out / "retrieved.jsonl", rows)
    _write_manifest(out, "retrieve", settings, {"store": store_path, "claims": args.claims})
    print(f"retrieved candidates for {len(rows)} claims -> {out / 'retrieved.jsonl'}")
    return 0


def cmd_select(args, settings: Settings) -> int:
    _require(args, "claims")
    store_path, store, claims = _load_inputs(args, settings)
    pipeline = _make_pipeline(settings, store)
    out = Path(args.out)
    results = pipeline.run(claims, with_verdict=False)
    rows = [evidence_record(cid, result.evidence) for cid, result in results.items()]
    _write_jsonl(out / "evidence.jsonl", rows)
    _write_manifest(out, "select", settings, {"store": store_path, "claims": args.claims})
    print(f"selected evidence for {len(rows)} claims -> {out / 'evidence.jsonl'}")
    return 0


def cmd_graph(args, settings: Settings) -> int:
    _require(args, "claims")
    store_path, store, claims = _load_inputs(args, settings)
    pipeline = _make_pipeline(settings, store)
    labeler = pipeline.labeler
    out = Path(args.out)
    results = pipeline.run(claims, with_verdict=False)
    rows = []
    for claim in sorted(claims, key=lambda c: c.id):
        evidence = results[claim.id].evidence
        claim_graph = build_claim_graph(claim, labeler, link=settings.link)
        refs, groups = [], []
        for sentence in evidence:
            ref = SentenceRef(sentence.page_title, sentence.sentence_index)
            refs.append(ref)
            groups.append((ref, extract_tuples(sentence.text, ref, labeler)))
        evidence_graph = build_graph(groups, link=settings.link)
        order = sentence_order(evidence_graph, refs)
        rows.append(
            {
                "claim_id": claim.id,
                "claim_graph": graph_to_dict(claim_graph),
                "evidence_graph": graph_to_dict(evidence_graph),
                "sentence_order": [[ref.page, ref.index] for ref in order],
            }
        )
    _write_jsonl(out / "graphs.jsonl", rows)
    _write_manifest(out, "graph", settings, {"store": store_path, "claims": args.claims})
    print(f"built graphs for {len(rows)} claims -> {out / 'graphs.jsonl'}")
    return 0


def cmd_train(args, settings: Settings) -> int:
    _require(args, "claims")
    store_path, store, claims = _load_inputs(args, settings)
    pipeline = _make_pipeline(settings, store)
    config = TrainConfig(
        learning_rate=settings.learning_rate,
        epochs=settings.epochs,
        batch_size=settings.batch_size,
        seed=settings.seed,
        layers=settings.layers,
        hidden_dim=settings.hidden_dim,
        mlp_hidden=settings.mlp_hidden,
        shared_weights=settings.shared_weights,
        direction=settings.direction,
    )
    out = Path(args.out)
    params, trace = pipeline.train(claims, config)
    save_params(params, out / "checkpoint.json")
    write_text_atomic(
        out / "losses.json",
        json.dumps({"epochs": len(trace), "losses": trace}, sort_keys=True) + "\n",
    )
    _write_manifest(out, "train", settings, {"store": store_path, "claims": args.claims})
    print(
        f"trained {config.epochs} epochs on {len(claims)} claims "
        f"(final loss {trace[-1]:.4f}) -> {out / 'checkpoint.json'}"
    )
    return 0


def cmd_predict(args, settings: Settings) -> int:
    _require(args, "claims", "params")
    store_path, store, claims = _load_inputs(args, settings)
    params = load_params(args.params)
    pipeline = _make_pipeline(settings, store, params=params)
    out = Path(args.out)
    results = pipeline.run(claims, with_verdict=True)
    rows = [
        {
            "claim_id": cid,
            "label": result.verdict.label,
            "probs": list(result.verdict.probs),
            "evidence": [[s.page_title, s.sentence_index, s.score] for s in result.evidence],
        }
        for cid, result in results.items()
    ]
    _write_jsonl(out / "predictions.jsonl", rows)
    _write_manifest(
        out,
        "predict",
        settings,
        {"store": store_path, "claims": args.claims, "params": args.params},
    )
    print(f"predicted {len(rows)} claims -> {out / 'predictions.jsonl'}")
    return 0


def cmd_evaluate(args, settings: Settings) -> int:
    _require(args, "claims", "params")
    store_path, store, claims = _load_inputs(args, settings)
    params = load_params(args.params)
    pipeline = _make_pipeline(settings, store, params=params)
    out = Path(args.out)
    row, _, _ = pipeline.evaluate(claims)
    report = SweepReport(rows=[row])
    write_text_atomic(out / "report.tsv", report.to_tsv())
    write_text_atomic(out / "report.json", report.to_json())
    _write_manifest(
        out,
        "evaluate",
        settings,
        {"store": store_path, "claims": args.claims, "params": args.params},
    )
    print(report.to_tsv(), end="")
    return 0


def cmd_sweep(args, settings: Settings) -> int:
    _require(args, "claims", "params")
    store_path, store, claims = _load_inputs(args, settings)
    params = load_params(args.params)
    pipeline = _make_pipeline(settings, store, params=params)
    thresholds = (
        [float(t) for t in args.thresholds.split(",")]
        if args.thresholds
        else list(SWEEP_THRESHOLDS)
    )
    out = Path(args.out)
    report = pipeline.sweep(claims, thresholds)
    write_text_atomic(out / "report.tsv", report.to_tsv())
    write_text_atomic(out / "report.json", report.to_json())
    _write_manifest(
        out,
        "sweep",
        settings,
        {"store": store_path, "claims": args.claims, "params": args.params},
    )
    print(report.to_tsv(), end="")
    if report.violations:
        for violation in report.violations:
            print(f"sweep violation: {violation}", file=sys.stderr)
        return 1
    return 0


def cmd_synth(args, settings: Settings) -> int:
    from .synthetic import write_corpus

    paths = write_corpus(args.out)
    print(
        "wrote synthetic corpus: "
        + ", ".join(f"{key}={path}" for key, path in sorted(paths.items()))
    )
    return 0


COMMANDS = {
    "ingest": cmd_ingest,
    "retrieve": cmd_retrieve,
    "select": cmd_select,
    "graph": cmd_graph,
    "train": cmd_train,
    "predict": cmd_predict,
    "evaluate": cmd_evaluate,
    "sweep": cmd_sweep,
    "synth": cmd_synth,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="factgraph",
        description="Claim verification over evidence graphs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, io: bool = True) -> None:
        p.add_argument("--config", help="INI config file; flags override it")
        p.add_argument("--out", default=".", help="output directory (default: .)")
        if io:
            p.add_argument("--store", help="persisted store directory")
            p.add_argument("--claims", help="claims JSONL file")
        p.add_argument("--workers", type=int, help="worker pool size (default: cores)")

    def selection(p: argparse.ArgumentParser) -> None:
        p.add_argument("--threshold", type=float, help="relevance threshold in [0,1]")
        p.add_argument("--top-docs", dest="top_docs", type=int, help="documents kept (default 10)")
        p.add_argument("--top-sents", dest="top_sents", type=int, help="sentences kept (default 5)")
        p.add_argument("--scorer", choices=["overlap", "encoder"])
        p.add_argument("--head", help="relevance head file for the encoder scorer")
        p.add_argument("--skip-retrieval", dest="skip_retrieval", action="store_true",
                       help="ablation: pass the whole corpus to selection")
        p.add_argument("--online", action="store_true", default=None,
                       help="enable the MediaWiki client for missing pages")
        p.add_argument("--wiki-url", dest="wiki_url", help="MediaWiki API base URL")
        p.add_argument("--cache-dir", dest="cache_dir", help="online fetch cache directory")

    def graphflags(p: argparse.ArgumentParser) -> None:
        p.add_argument("--labeler", choices=["rules", "external"])
        p.add_argument("--link", choices=["overlap", "exact"],
                       help="cross-sentence common-information predicate")
        p.add_argument("--provider", choices=["deterministic", "external"])
        p.add_argument("--dim", type=int, help="deterministic encoder dimension")

    def trainflags(p: argparse.ArgumentParser) -> None:
        p.add_argument("--seed", type=int, help="training seed")
        p.add_argument("--epochs", type=int)
        p.add_argument("--learning-rate", dest="learning_rate", type=float)
        p.add_argument("--batch-size", dest="batch_size", type=int)
        p.add_argument("--layers", type=int)
        p.add_argument("--hidden-dim", dest="hidden_dim", type=int)
        p.add_argument("--mlp-hidden", dest="mlp_hidden", type=int)
        p.add_argument("--direction", choices=["claim_to_evidence", "evidence_to_claim"])

    p = sub.add_parser("ingest", help="build and persist a document store")
    common(p, io=False)
    p.add_argument("--wiki", help="wiki-pages JSONL file", required=False)

    p = sub.add_parser("retrieve", help="rank candidate documents per claim")
    common(p)
    selection(p)

    p = sub.add_parser("select", help="select evidence sentences per claim")
    common(p)
    selection(p)
    graphflags(p)

    p = sub.add_parser("graph", help="build claim and evidence graphs")
    common(p)
    selection(p)
    graphflags(p)

    p = sub.add_parser("train", help="train the verifier")
    common(p)
    selection(p)
    graphflags(p)
    trainflags(p)

    p = sub.add_parser("predict", help="predict labels for claims")
    common(p)
    selection(p)
    graphflags(p)
    p.add_argument("--params", help="checkpoint file")
    p.add_argument("--direction", choices=["claim_to_evidence", "evidence_to_claim"])

    p = sub.add_parser("evaluate", help="score predictions against gold labels")
    common(p)
    selection(p)
    graphflags(p)
    p.add_argument("--params", help="checkpoint file")
    p.add_argument("--direction", choices=["claim_to_evidence", "evidence_to_claim"])

    p = sub.add_parser("sweep", help="threshold sweep report")
    common(p)
    selection(p)
    graphflags(p)
    p.add_argument("--params", help="checkpoint file")
    p.add_argument("--direction", choices=["claim_to_evidence", "evidence_to_claim"])
    p.add_argument("--thresholds", help="comma-separated threshold list")

    p = sub.add_parser("synth", help="write the bundled synthetic corpus")
    common(p, io=False)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        config = _load_config(getattr(args, "config", None))
        settings = _resolve(args, config)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    try:
        return COMMANDS[args.command](args, settings)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except PipelineError as exc:
        print(f"error: {exc.stage}: {exc}", file=sys.stderr)
        return 1
    except FactGraphError as exc:
        print(f"error: {args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
