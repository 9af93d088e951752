"""Run every bundled hydrogen config and write CSV + manifest under results/.

    python3 scripts/run_curves.py [--only h2,h3p] [--out results]

Worker count comes from EXCITEDVQE_WORKERS or each config's ``workers``.
"""

import argparse
from dataclasses import replace
from pathlib import Path

from excitedvqe.scan import RunConfig, emit_outputs, run_scan

CONFIGS = Path(__file__).parents[1] / "configs"


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--only", help="comma-separated config name prefixes")
    ap.add_argument("--out", default="results")
    args = ap.parse_args()
    prefixes = args.only.split(",") if args.only else ["h2", "h3", "h4"]
    for path in sorted(CONFIGS.glob("*.cfg")):
        if not any(path.stem.startswith(p) for p in prefixes):
            continue
        cfg = RunConfig.from_file(path)
        cfg = replace(cfg, output=str(Path(args.out) / path.stem))
        records = run_scan(cfg)
        emit_outputs(records, cfg)
        worst = max((abs(r.e - r.fci[0]) for r in records if r.ok and r.fci[0] is not None),
                    default=float("nan"))
        print(f"{path.stem:22s} {len(records):3d} points  max|E-FCI| = {worst * 1e3:.4f} mHa")


if __name__ == "__main__":
    main()
