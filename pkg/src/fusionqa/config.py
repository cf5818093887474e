"""Declarative run configuration: one YAML file, env-var interpolation for secrets.

Secrets never live in the file: backend entries name the environment variable
holding their key (``auth_env``), so configs stay diffable and shareable. All
randomness flows from the named seeds here.
"""

from __future__ import annotations

import os
import re
from dataclasses import asdict, dataclass, field
from pathlib import Path

import yaml

from .backends import DEFAULT_MAX_TOKENS, DEFAULT_TEMPERATURE, GenBackend, Role
from .bm25 import DEFAULT_B, DEFAULT_K1, DEFAULT_OVERLAP_TOKENS, DEFAULT_TARGET_TOKENS, DEFAULT_TOP_K
from .cleaning import DEFAULT_OVER_LENGTH_LIMIT
from .fusion import StrategyKind
from .instructions import DEFAULT_INSTRUCTION_TEMPLATE

_DATA_DIR = Path(__file__).parent / "data"


class ConfigValidationError(Exception):
    def __init__(self, errors: list[str]):
        super().__init__("; ".join(errors))
        self.errors = errors


@dataclass
class BackendConfig:
    base_url: str = ""
    model: str = ""
    auth_env: str | None = None
    temperature: float = DEFAULT_TEMPERATURE
    max_tokens: int = DEFAULT_MAX_TOKENS

    def to_backend(self, role: Role) -> GenBackend:
        return GenBackend(
            base_url=self.base_url,
            model=self.model,
            role=role,
            auth_env=self.auth_env,
            temperature=self.temperature,
            max_tokens=self.max_tokens,
        )


@dataclass
class EmbeddingConfig:
    base_url: str = ""
    dimension: int = 0
    auth_env: str | None = None


@dataclass
class RunConfig:
    raw_corpus_path: str = ""
    clean_corpus_path: str = ""
    docs_dir: str = ""
    output_dir: str = "out"
    cache_dir: str = ""
    tokenizer: str = "ws_punct"
    split_ratio: float = 0.8
    split_seed: int = 27182
    eval_seed: int = 31415
    user_id_patterns: list[str] = field(default_factory=list)
    boilerplate_patterns: list[str] = field(default_factory=list)
    over_length_limit: int = DEFAULT_OVER_LENGTH_LIMIT
    bm25_k1: float = DEFAULT_K1
    bm25_b: float = DEFAULT_B
    bm25_k: int = DEFAULT_TOP_K
    chunk_target_tokens: int = DEFAULT_TARGET_TOKENS
    chunk_overlap_tokens: int = DEFAULT_OVERLAP_TOKENS
    instruction_template: str = DEFAULT_INSTRUCTION_TEMPLATE
    skip_over_length: bool = False
    budget_tokens: int = 3000
    workers: int = 4
    failure_ceiling: float = 0.25
    strategies: list[str] = field(default_factory=lambda: [s.value for s in StrategyKind])
    nar_use_judge: bool = False
    backends: dict[str, BackendConfig] = field(default_factory=dict)
    embedding: EmbeddingConfig | None = None
    dry_run: bool = False

    def selected_strategies(self) -> list[StrategyKind]:
        return [StrategyKind(name) for name in self.strategies]

    def canonical_dict(self) -> dict:
        data = asdict(self)
        data["backends"] = {name: asdict(b) for name, b in self.backends.items()}
        data["embedding"] = asdict(self.embedding) if self.embedding else None
        return data


_ENV_RE = re.compile(r"\$\{(\w+)\}")


def _interpolate(value, missing: list[str]):
    if isinstance(value, str):
        def sub(match: re.Match) -> str:
            name = match.group(1)
            if name not in os.environ:
                missing.append(name)
                return match.group(0)
            return os.environ[name]

        return _ENV_RE.sub(sub, value)
    if isinstance(value, dict):
        return {k: _interpolate(v, missing) for k, v in value.items()}
    if isinstance(value, list):
        return [_interpolate(v, missing) for v in value]
    return value


def load_config(path: str | Path) -> RunConfig:
    with open(path, encoding="utf-8") as f:
        raw = yaml.safe_load(f) or {}
    missing: list[str] = []
    raw = _interpolate(raw, missing)
    if missing:
        raise ConfigValidationError(
            [f"environment variable {name} referenced by config is not set" for name in sorted(set(missing))]
        )
    return _from_mapping(raw)


def _from_mapping(raw: dict) -> RunConfig:
    config = RunConfig()
    dataset = raw.get("dataset", {})
    config.raw_corpus_path = dataset.get("raw_path", config.raw_corpus_path)
    config.clean_corpus_path = dataset.get("clean_path", config.clean_corpus_path)
    config.docs_dir = raw.get("docs_dir", config.docs_dir)
    config.output_dir = raw.get("output_dir", config.output_dir)
    config.cache_dir = raw.get("cache_dir", config.cache_dir)
    config.tokenizer = raw.get("tokenizer", config.tokenizer)

    split_section = raw.get("split", {})
    config.split_ratio = float(split_section.get("ratio", config.split_ratio))
    config.split_seed = int(split_section.get("seed", config.split_seed))

    clean_section = raw.get("clean", {})
    config.user_id_patterns = list(clean_section.get("user_id_patterns", ()))
    config.boilerplate_patterns = list(clean_section.get("boilerplate_patterns", ()))
    config.over_length_limit = int(clean_section.get("over_length_limit", config.over_length_limit))

    bm25_section = raw.get("bm25", {})
    config.bm25_k1 = float(bm25_section.get("k1", config.bm25_k1))
    config.bm25_b = float(bm25_section.get("b", config.bm25_b))
    config.bm25_k = int(bm25_section.get("k", config.bm25_k))
    config.chunk_target_tokens = int(bm25_section.get("target_tokens", config.chunk_target_tokens))
    config.chunk_overlap_tokens = int(bm25_section.get("overlap_tokens", config.chunk_overlap_tokens))

    instructions_section = raw.get("instructions", {})
    config.instruction_template = instructions_section.get("template", config.instruction_template)
    config.skip_over_length = bool(instructions_section.get("skip_over_length", config.skip_over_length))

    fusion_section = raw.get("fusion", {})
    config.budget_tokens = int(fusion_section.get("budget_tokens", config.budget_tokens))
    config.workers = int(fusion_section.get("workers", config.workers))
    config.failure_ceiling = float(fusion_section.get("failure_ceiling", config.failure_ceiling))
    config.strategies = list(fusion_section.get("strategies", config.strategies))

    eval_section = raw.get("eval", {})
    config.eval_seed = int(eval_section.get("seed", config.eval_seed))
    config.nar_use_judge = bool(eval_section.get("nar_use_judge", config.nar_use_judge))

    for name, entry in (raw.get("backends") or {}).items():
        if name == "embedding":
            config.embedding = EmbeddingConfig(
                base_url=entry.get("base_url", ""),
                dimension=int(entry.get("dimension", 0)),
                auth_env=entry.get("auth_env"),
            )
        else:
            config.backends[name] = BackendConfig(
                base_url=entry.get("base_url", ""),
                model=entry.get("model", ""),
                auth_env=entry.get("auth_env"),
                temperature=float(entry.get("temperature", DEFAULT_TEMPERATURE)),
                max_tokens=int(entry.get("max_tokens", DEFAULT_MAX_TOKENS)),
            )
    return config


def toy_config(output_dir: str = "out") -> RunConfig:
    """Config wired to the bundled toy corpus and docs; meant for --dry-run."""
    config = RunConfig()
    config.raw_corpus_path = str(_DATA_DIR / "toy_corpus.jsonl")
    config.docs_dir = str(_DATA_DIR / "toy_docs")
    config.output_dir = output_dir
    config.clean_corpus_path = str(Path(output_dir) / "cleaned.jsonl")
    config.cache_dir = str(Path(output_dir) / "cache")
    config.split_ratio = 0.5
    config.split_seed = 7
    config.eval_seed = 31415
    config.dry_run = True
    return config


def validate_config(config: RunConfig) -> list[str]:
    """Collect every validation problem at once; empty list means valid."""
    errors: list[str] = []
    if not 0.0 < config.split_ratio < 1.0:
        errors.append(f"split.ratio must be in (0, 1), got {config.split_ratio}")
    if config.bm25_k < 1:
        errors.append(f"bm25.k must be >= 1, got {config.bm25_k}")
    if not config.chunk_target_tokens > config.chunk_overlap_tokens >= 0:
        errors.append(
            "bm25.target_tokens must exceed bm25.overlap_tokens "
            f"(got {config.chunk_target_tokens}/{config.chunk_overlap_tokens})"
        )
    if config.budget_tokens <= 0:
        errors.append(f"fusion.budget_tokens must be positive, got {config.budget_tokens}")
    if not 0.0 <= config.failure_ceiling <= 1.0:
        errors.append(f"fusion.failure_ceiling must be in [0, 1], got {config.failure_ceiling}")
    if config.over_length_limit <= 0:
        errors.append(f"clean.over_length_limit must be positive, got {config.over_length_limit}")

    known = {s.value for s in StrategyKind}
    strategies: list[StrategyKind] = []
    for name in config.strategies:
        if name not in known:
            errors.append(f"unknown strategy '{name}' (known: {', '.join(sorted(known))})")
        else:
            strategies.append(StrategyKind(name))
    if not strategies:
        errors.append("fusion.strategies selects nothing")

    if config.raw_corpus_path and not Path(config.raw_corpus_path).exists():
        errors.append(f"dataset.raw_path does not exist: {config.raw_corpus_path}")
    if config.docs_dir and not Path(config.docs_dir).exists():
        errors.append(f"docs_dir does not exist: {config.docs_dir}")

    if not config.dry_run:
        needs_llm = any(s is not StrategyKind.EXPERT_ONLY for s in strategies)
        needs_expert = any(s.uses_expert for s in strategies)
        if needs_llm and "llm" not in config.backends:
            errors.append("selected strategies need backends.llm, which is not configured")
        if needs_expert and "expert" not in config.backends:
            errors.append("selected strategies need backends.expert, which is not configured")
    return errors
