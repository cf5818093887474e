"""Run manifests: enough provenance to re-execute a stage bit-identically.

Every stage writes a manifest next to its outputs carrying the config hash,
code version, stage timings, backend fingerprints, prompt template hashes,
and the seeds in effect. Output files trace back to the manifest whose config
hash matches the config that produced them.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

from . import __version__
from .config import RunConfig

_TEMPLATE_DIR = Path(__file__).parent / "templates"


def config_hash(config: RunConfig) -> str:
    canonical = json.dumps(config.canonical_dict(), sort_keys=True)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def template_hashes(template_dir: str | Path | None = None) -> dict[str, str]:
    directory = Path(template_dir) if template_dir else _TEMPLATE_DIR
    hashes = {}
    for path in sorted(directory.glob("*.txt")):
        hashes[path.name] = hashlib.sha256(path.read_bytes()).hexdigest()
    return hashes


def build_manifest(
    stage: str,
    config: RunConfig,
    *,
    timings: dict[str, float],
    outputs: list[str],
    backend_fingerprints: dict[str, str] | None = None,
    extras: dict | None = None,
) -> dict:
    return {
        "stage": stage,
        "config_hash": config_hash(config),
        "code_version": __version__,
        "timings_s": {name: round(value, 6) for name, value in timings.items()},
        "outputs": outputs,
        "backend_fingerprints": backend_fingerprints or {},
        "template_hashes": template_hashes(),
        "seeds": {"split": config.split_seed, "eval_ab_positions": config.eval_seed},
        "extras": extras or {},
    }


def write_manifest(manifest: dict, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(manifest, f, indent=2, sort_keys=True)
        f.write("\n")
