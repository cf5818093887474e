"""Pipeline command-line interface.

Subcommands: clean, split, stats, instructions, index, run, eval, report.
Exit codes: 0 success, 1 config validation failure, 2 missing stage
dependency, 3 backend failure ceiling exceeded.

``--dry-run`` swaps every backend for deterministic in-process mocks and the
embedding provider for offline stubs; with no ``--config`` it runs against the
bundled toy corpus and docs.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from .backends import ChatClient, GenBackend, ResponseCache, Role
from .bm25 import build_index, chunk_docs, load_docs_dir, load_index, save_index
from .cleaning import (
    DEFAULT_BOILERPLATE_PATTERNS,
    DEFAULT_USER_ID_PATTERNS,
    CleanSettings,
    run_pipeline,
)
from .config import (
    ConfigValidationError,
    RunConfig,
    load_config,
    toy_config,
    validate_config,
)
from .dataset import compute_stats, load_corpus, load_split, save_corpus, save_split, split
from .embeddings import (
    EmbeddingProviderRef,
    Granularity,
    HashSentenceProvider,
    HttpEmbeddingProvider,
    OneHotTokenProvider,
)
from .fusion import FailureCeilingExceeded, StrategyKind, load_records, run_strategy, save_records
from .instructions import build_tuples, save_tuples
from .manifest import build_manifest, write_manifest
from .metrics import MetricReport, evaluate_run
from .mock import DryRunTransport, dryrun_backends
from .reporting import render_csv, render_markdown
from .tokenizers import get_tokenizer


class DependencyError(Exception):
    def __init__(self, missing: str, needed_by: str, command: str):
        super().__init__(
            f"{needed_by} needs {missing}, which is missing; run the '{command}' command first"
        )


def _out(config: RunConfig) -> Path:
    path = Path(config.output_dir)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _load_cleaned(config: RunConfig, needed_by: str):
    path = Path(config.clean_corpus_path)
    if not path.exists():
        raise DependencyError(f"the cleaned corpus ({path})", needed_by, "clean")
    return load_corpus(path)


def _load_split_file(config: RunConfig, needed_by: str):
    path = _out(config) / "split.json"
    if not path.exists():
        raise DependencyError(f"the split file ({path})", needed_by, "split")
    return load_split(path)


def _make_client(config: RunConfig) -> ChatClient:
    if config.dry_run:
        return ChatClient(transport=DryRunTransport(), sleep=lambda seconds: None)
    return ChatClient()


def _make_backends(config: RunConfig) -> dict[str, GenBackend]:
    if config.dry_run:
        return dryrun_backends()
    roles = {"llm": Role.LLM, "expert": Role.EXPERT, "judge": Role.LLM}
    return {
        name: entry.to_backend(roles.get(name, Role.LLM))
        for name, entry in config.backends.items()
    }


def _make_providers(config: RunConfig):
    if config.dry_run:
        return HashSentenceProvider(dimension=64), OneHotTokenProvider()
    embedding = config.embedding
    if embedding is None or not embedding.base_url:
        return None, None
    sentence_ref = EmbeddingProviderRef(
        base_url=embedding.base_url,
        granularity=Granularity.SENTENCE,
        dimension=embedding.dimension or 1,
        auth_env=embedding.auth_env,
    )
    token_ref = EmbeddingProviderRef(
        base_url=embedding.base_url,
        granularity=Granularity.TOKEN,
        dimension=embedding.dimension or 1,
        auth_env=embedding.auth_env,
    )
    return HttpEmbeddingProvider(sentence_ref), HttpEmbeddingProvider(token_ref)


def _write_stage_manifest(config, stage, started, outputs, fingerprints=None, extras=None):
    manifest = build_manifest(
        stage,
        config,
        timings={stage: time.monotonic() - started},
        outputs=[str(o) for o in outputs],
        backend_fingerprints=fingerprints,
        extras=extras,
    )
    path = _out(config) / f"manifest-{stage}.json"
    write_manifest(manifest, path)


def cmd_clean(config: RunConfig):
    started = time.monotonic()
    corpus = load_corpus(config.raw_corpus_path)
    settings = CleanSettings(
        user_id_patterns=DEFAULT_USER_ID_PATTERNS + tuple(config.user_id_patterns),
        boilerplate_patterns=DEFAULT_BOILERPLATE_PATTERNS + tuple(config.boilerplate_patterns),
        over_length_limit=config.over_length_limit,
        tokenizer=get_tokenizer(config.tokenizer),
    )
    cleaned, report = run_pipeline(corpus, settings=settings)
    clean_path = Path(config.clean_corpus_path)
    clean_path.parent.mkdir(parents=True, exist_ok=True)
    save_corpus(cleaned, clean_path)
    report_path = _out(config) / "clean_report.json"
    with open(report_path, "w", encoding="utf-8") as f:
        json.dump(report.to_json_dict(), f, indent=2, sort_keys=True)
        f.write("\n")
    _write_stage_manifest(config, "clean", started, [clean_path, report_path])
    print(
        f"clean: {report.input_count} -> {report.output_count} records "
        f"({len(report.dropped_ids)} dropped)"
    )
    return report


def cmd_split(config: RunConfig):
    started = time.monotonic()
    corpus = _load_cleaned(config, "split")
    result = split(corpus, config.split_ratio, config.split_seed)
    path = _out(config) / "split.json"
    save_split(result, path)
    _write_stage_manifest(config, "split", started, [path])
    print(f"split: {len(result.train)} train / {len(result.test)} test (seed {result.seed})")
    return result


def cmd_stats(config: RunConfig):
    started = time.monotonic()
    corpus = _load_cleaned(config, "stats")
    stats = compute_stats(corpus, get_tokenizer(config.tokenizer))
    path = _out(config) / "stats.json"
    with open(path, "w", encoding="utf-8") as f:
        json.dump(stats.to_json_dict(), f, indent=2, sort_keys=True)
        f.write("\n")
    _write_stage_manifest(config, "stats", started, [path])
    print(
        f"stats: {stats.record_count} records, {stats.tag_count} tags, "
        f"avg {stats.avg_question_tokens:.2f} question tokens"
    )
    return stats


def cmd_instructions(config: RunConfig, template: str | None = None):
    started = time.monotonic()
    corpus = _load_cleaned(config, "instructions")
    split_result = _load_split_file(config, "instructions")
    by_id = {record.id: record for record in corpus}
    train = [by_id[record_id] for record_id in split_result.train if record_id in by_id]
    tuples, report = build_tuples(
        train,
        template or config.instruction_template,
        skip_over_length=config.skip_over_length,
    )
    path = _out(config) / "instructions.jsonl"
    save_tuples(tuples, path)
    _write_stage_manifest(
        config,
        "instructions",
        started,
        [path],
        extras={
            "tuples": report.total,
            "fallback_instructions": report.fallback_count,
            "skipped_over_length": report.skipped_over_length,
        },
    )
    print(f"instructions: {report.total} tuples ({report.fallback_count} fallback)")
    return path


def cmd_index(config: RunConfig):
    started = time.monotonic()
    docs = load_docs_dir(config.docs_dir)
    if not docs:
        raise ConfigValidationError([f"docs_dir contains no markdown files: {config.docs_dir}"])
    chunks = chunk_docs(docs, config.chunk_target_tokens, config.chunk_overlap_tokens)
    index = build_index(chunks, config.bm25_k1, config.bm25_b)
    path = _out(config) / "index.json"
    save_index(index, chunks, path)
    _write_stage_manifest(
        config,
        "index",
        started,
        [path],
        extras={
            "docs": len(docs),
            "chunks": index.doc_count,
            "avg_chunk_tokens": round(index.avg_doc_length, 2),
            "k1": index.k1,
            "b": index.b,
        },
    )
    print(f"index: {len(docs)} docs -> {index.doc_count} chunks")
    return path


def cmd_run(config: RunConfig):
    started = time.monotonic()
    corpus = _load_cleaned(config, "run")
    split_result = _load_split_file(config, "run")
    strategies = config.selected_strategies()

    index = chunks = None
    if any(s.uses_bm25 for s in strategies):
        index_path = _out(config) / "index.json"
        if not index_path.exists():
            raise DependencyError(f"the BM25 index ({index_path})", "run", "index")
        index, chunks = load_index(index_path)

    by_id = {record.id: record for record in corpus}
    questions = [by_id[record_id] for record_id in split_result.test if record_id in by_id]
    backends = _make_backends(config)
    client = _make_client(config)
    cache = ResponseCache(config.cache_dir) if config.cache_dir else None
    tokenizer = get_tokenizer(config.tokenizer)

    outputs = []
    counts = {}
    ceiling_error: FailureCeilingExceeded | None = None
    for strategy in strategies:
        try:
            records = run_strategy(
                questions,
                strategy,
                backends,
                index,
                cache,
                client=client,
                chunks=chunks,
                retrieval_k=config.bm25_k,
                budget_tokens=config.budget_tokens,
                workers=config.workers,
                failure_ceiling=config.failure_ceiling,
                tokenizer=tokenizer,
            )
        except FailureCeilingExceeded as exc:
            records = exc.records
            ceiling_error = exc
        path = _out(config) / f"records-{strategy.value}.jsonl"
        save_records(records, path)
        outputs.append(path)
        counts[strategy.value] = len(records)
        if ceiling_error is not None:
            break

    _write_stage_manifest(
        config,
        "run",
        started,
        outputs,
        fingerprints={name: backend.fingerprint for name, backend in backends.items()},
        extras={"backend_calls": client.calls_made, "records": counts},
    )
    if ceiling_error is not None:
        raise ceiling_error
    print(
        f"run: {sum(counts.values())} records over {len(strategies)} strategies "
        f"({client.calls_made} backend calls)"
    )
    return outputs


def cmd_eval(config: RunConfig):
    started = time.monotonic()
    corpus = _load_cleaned(config, "eval")
    split_result = _load_split_file(config, "eval")
    strategies = config.selected_strategies()

    by_id = {record.id: record for record in corpus}
    golden = {rid: by_id[rid].answer for rid in split_result.test if rid in by_id}
    question_texts = {rid: by_id[rid].question for rid in split_result.test if rid in by_id}

    sentence_provider, token_provider = _make_providers(config)
    backends = _make_backends(config)
    judge = backends.get("judge")
    client = _make_client(config)
    cache = ResponseCache(config.cache_dir) if config.cache_dir else None
    tokenizer = get_tokenizer(config.tokenizer)

    outputs = []
    for strategy in strategies:
        records_path = _out(config) / f"records-{strategy.value}.jsonl"
        if not records_path.exists():
            raise DependencyError(f"generation records ({records_path})", "eval", "run")
        records = load_records(records_path)
        report = evaluate_run(
            records,
            golden,
            sentence_provider=sentence_provider,
            token_provider=token_provider,
            judge=judge,
            client=client,
            cache=cache,
            seed=config.eval_seed,
            workers=config.workers,
            nar_use_judge=config.nar_use_judge,
            questions=question_texts,
            tokenizer=tokenizer,
        )
        path = _out(config) / f"eval-{strategy.value}.json"
        with open(path, "w", encoding="utf-8") as f:
            json.dump(report.to_json_dict(), f, indent=2, sort_keys=True)
            f.write("\n")
        outputs.append(path)

    _write_stage_manifest(
        config,
        "eval",
        started,
        outputs,
        fingerprints={name: backend.fingerprint for name, backend in backends.items()},
        extras={"judge_calls": client.calls_made},
    )
    print(f"eval: scored {len(outputs)} strategies")
    return outputs


def cmd_report(config: RunConfig):
    started = time.monotonic()
    reports = {}
    for strategy in config.selected_strategies():
        path = _out(config) / f"eval-{strategy.value}.json"
        if not path.exists():
            raise DependencyError(f"the metric report ({path})", "report", "eval")
        with open(path, encoding="utf-8") as f:
            reports[strategy] = MetricReport.from_json_dict(json.load(f))

    markdown = render_markdown(reports)
    csv_text = render_csv(reports)
    md_path = _out(config) / "report.md"
    csv_path = _out(config) / "report.csv"
    md_path.write_text(markdown, encoding="utf-8")
    csv_path.write_text(csv_text, encoding="utf-8")
    _write_stage_manifest(config, "report", started, [md_path, csv_path])
    print(markdown)
    return md_path


def _effective_config(args: argparse.Namespace) -> RunConfig:
    if args.config:
        config = load_config(args.config)
    elif args.dry_run:
        config = toy_config(args.output_dir or "out")
    else:
        raise ConfigValidationError(
            ["--config is required (or pass --dry-run to use the bundled toy setup)"]
        )

    if args.dry_run:
        config.dry_run = True
    if args.output_dir:
        config.output_dir = args.output_dir
    if args.strategies:
        config.strategies = [name.strip() for name in args.strategies.split(",") if name.strip()]
    if args.seed_override is not None:
        config.split_seed = args.seed_override
        config.eval_seed = args.seed_override
    if not config.clean_corpus_path:
        config.clean_corpus_path = str(Path(config.output_dir) / "cleaned.jsonl")
    if not config.cache_dir:
        config.cache_dir = str(Path(config.output_dir) / "cache")

    errors = validate_config(config)
    if errors:
        raise ConfigValidationError(errors)
    return config


def main(argv: list[str] | None = None) -> int:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="path to the run configuration YAML")
    common.add_argument("--output-dir", help="override the configured output directory")
    common.add_argument(
        "--seed-override", type=int, default=None, help="override split and eval seeds"
    )
    common.add_argument(
        "--dry-run", action="store_true", help="use deterministic mock backends (no network)"
    )
    common.add_argument("--strategies", help="comma-separated strategy subset to run")

    parser = argparse.ArgumentParser(prog="fusionqa", description=__doc__)
    subparsers = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("clean", "run the filtering pipeline over the raw corpus"),
        ("split", "deterministically split the cleaned corpus"),
        ("stats", "compute corpus statistics"),
        ("instructions", "build expert instruction tuples from the train split"),
        ("index", "chunk the docs tree and build the BM25 index"),
        ("run", "generate responses for the selected strategies"),
        ("eval", "score generation records with the metric suite"),
        ("report", "render the metric table (markdown + CSV)"),
    ):
        sub = subparsers.add_parser(name, parents=[common], help=help_text)
        if name == "instructions":
            sub.add_argument("--template", help="instruction template override ({tags} placeholder)")

    args = parser.parse_args(argv)
    try:
        config = _effective_config(args)
        if args.command == "clean":
            cmd_clean(config)
        elif args.command == "split":
            cmd_split(config)
        elif args.command == "stats":
            cmd_stats(config)
        elif args.command == "instructions":
            cmd_instructions(config, template=args.template)
        elif args.command == "index":
            cmd_index(config)
        elif args.command == "run":
            cmd_run(config)
        elif args.command == "eval":
            cmd_eval(config)
        elif args.command == "report":
            cmd_report(config)
    except ConfigValidationError as exc:
        for error in exc.errors:
            print(f"config error: {error}", file=sys.stderr)
        return 1
    except DependencyError as exc:
        print(f"dependency error: {exc}", file=sys.stderr)
        return 2
    except FailureCeilingExceeded as exc:
        print(f"backend failure ceiling exceeded: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
