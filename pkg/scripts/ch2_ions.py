"""CH2 anion/cation doublet curves with 1-UpCCGSD, plus k = 2 near each minimum.

    python3 scripts/ch2_ions.py [--out results]
"""

import argparse
from pathlib import Path

from excitedvqe.scan import RunConfig, emit_outputs, fixture_values, run_point, run_scan


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results")
    args = ap.parse_args()
    grid = fixture_values("CH2")
    for charge, tag in ((-1, "anion"), (1, "cation")):
        cfg = RunConfig(molecule="CH2", values=tuple(grid), charge=charge, register="D",
                        ansatz="1-UpCCGSD", output=str(Path(args.out) / f"ch2_{tag}_k1"))
        records = run_scan(cfg)
        emit_outputs(records, cfg)
        best = min((r for r in records if r.ok), key=lambda r: r.e)
        i = grid.index(best.scan_value)
        k2 = [run_point(RunConfig(molecule="CH2", values=(v,), charge=charge, register="D",
                                  ansatz="2-UpCCGSD", k_embed=True), v)
              for v in grid[max(0, i - 1): i + 2]]
        b2 = min(k2, key=lambda r: r.e)
        print(f"CH2 {tag:6s} k=1 min {best.e:.6f} at {best.scan_value:.2f} A (FCI {best.fci[0]:.6f})")
        print(f"CH2 {tag:6s} k=2 min {b2.e:.6f} at {b2.scan_value:.2f} A, "
              f"lowering {1e3 * (best.e - b2.e):.2f} mHa")


if __name__ == "__main__":
    main()
