"""Command line entry point: ``scan run``, ``scan table2`` and ``scan fcidump-roundtrip``.

Exit codes: 0 on full success, 2 when some scan points failed, 1 on fatal errors.
"""

from __future__ import annotations

import argparse
import configparser
import logging
import sys
import tempfile
from dataclasses import replace
from pathlib import Path

import numpy as np

from .exact import fci_solve
from .fcidump import FCIDUMPError, read_fcidump, write_fcidump
from .scan import (WORKERS_ENV, ConfigError, RunConfig, ScanError, emit_outputs, format_table2,
                   TABLE2_GRID, reproduce_table2, run_scan, worker_count)

EXIT_OK, EXIT_FATAL, EXIT_PARTIAL = 0, 1, 2


def _cmd_run(args) -> int:
    config = RunConfig.from_file(args.config)
    if args.output:
        config = replace(config, output=args.output)
    workers = args.workers if args.workers is not None else worker_count(config)
    records = run_scan(config, workers=workers)
    paths = emit_outputs(records, config)
    failed = [r for r in records if not r.ok]
    for r in records:
        if r.ok:
            print(f"{r.scan_value:10.4f} E={r.e:18.10f} <S2>={r.s2:8.4f} {r.label}")
        else:
            print(f"{r.scan_value:10.4f} FAILED {r.error}", file=sys.stderr)
    for kind, p in paths.items():
        print(f"wrote {kind}: {p}")
    return EXIT_PARTIAL if failed else EXIT_OK


def _cmd_table2(args) -> int:
    grid = None
    if args.register:
        grid = {r: TABLE2_GRID[r] for r in args.register}
    cells = reproduce_table2(args.fixture_dir, value=args.value, grid=grid, penalty=args.penalty,
                             n_restarts=args.restarts, r_f=args.r_f, seed=args.seed,
                             log=(lambda s: print(s, file=sys.stderr)) if args.verbose else None)
    if cells:
        print(format_table2(cells), end="")
    return EXIT_OK


def roundtrip_report(path) -> tuple[bool, str]:
    """Write ``path`` back out, re-read it and compare integrals and ground-sector FCI bit-exactly."""
    mo = read_fcidump(path)
    with tempfile.TemporaryDirectory() as tmp:
        out = Path(tmp) / "roundtrip.fcidump"
        write_fcidump(out, mo)
        back = read_fcidump(out)
    same = (np.array_equal(mo.h, back.h) and np.array_equal(mo.g, back.g)
            and mo.e_nuc == back.e_nuc and mo.e_core == back.e_core
            and mo.n_electrons == back.n_electrons and mo.ms2 == back.ms2)
    lines = [f"NORB={mo.n_orb} NELEC={mo.n_electrons} MS2={mo.ms2}",
             f"integrals identical: {same}"]
    if mo.n_electrons:
        sz = (mo.ms2 or 0) / 2
        e0 = fci_solve(mo, mo.n_electrons, sz).energies[0]
        e1 = fci_solve(back, back.n_electrons, sz).energies[0]
        lines.append(f"FCI E0 = {e0:.12f} / {e1:.12f} (identical: {e0 == e1})")
        same = same and e0 == e1
    return same, "\n".join(lines)


def _cmd_roundtrip(args) -> int:
    ok, report = roundtrip_report(args.file)
    print(report)
    return EXIT_OK if ok else EXIT_FATAL


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="scan", description="VQE excited-state geometry scans")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one scan from a key = value config file")
    p.add_argument("config", type=Path)
    p.add_argument("--workers", type=int, default=None,
                   help=f"parallel scan points (overrides config; {WORKERS_ENV} overrides both)")
    p.add_argument("--output", default=None, help="output path prefix")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("table2", help="final-state symmetry grid on the CH2 fixtures")
    p.add_argument("fixture_dir", type=Path)
    p.add_argument("--value", type=float, default=None, help="C-H bond length (default: FCI minimum)")
    p.add_argument("--register", action="append", choices=("S1", "S2", "S3"))
    p.add_argument("--penalty", type=float, default=0.0)
    p.add_argument("--restarts", type=int, default=None)
    p.add_argument("--r-f", dest="r_f", type=float, default=1e-2)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_table2)

    p = sub.add_parser("fcidump-roundtrip", help="check that an FCIDUMP file survives write/read")
    p.add_argument("file", type=Path)
    p.set_defaults(func=_cmd_roundtrip)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, ScanError, FCIDUMPError, OSError, ValueError, configparser.Error) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FATAL


if __name__ == "__main__":
    sys.exit(main())
