"""Drive the whole harness end to end in dry-run mode (mock backends, no network).

Produces demo_out/ with cleaned corpus, split, instructions, index, generation
records for all five arms, per-strategy metric reports, and the final table.

Run:  python demos/07_full_pipeline.py
"""

from pathlib import Path

from fusionqa.cli import main as fusionqa_main

OUT = Path(__file__).resolve().parent / "demo_out"

STAGES = ("clean", "split", "stats", "instructions", "index", "run", "eval", "report")


def main() -> None:
    for stage in STAGES:
        code = fusionqa_main([stage, "--dry-run", "--output-dir", str(OUT)])
        if code != 0:
            raise SystemExit(f"stage {stage} failed with exit code {code}")
    print(f"\nartifacts in {OUT}:")
    for path in sorted(OUT.iterdir()):
        if path.is_file():
            print(f"  {path.name}")


if __name__ == "__main__":
    main()
