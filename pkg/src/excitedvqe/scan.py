"""Geometry scans: configuration, per-point VQE + FCI, labelling and output files."""

from __future__ import annotations

import configparser
import csv
import io
import json
import math
import os
import platform
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from . import __version__
from . import geometry as geo
from .ansatz import class_kind, classify_amplitudes
from .exact import FCISolution, brueckner_reference, fci_solve
from .fcidump import read_fcidump
from .molint import molecule_integrals
from .optimize import LBFGSOptions
from .scf import MOIntegrals, freeze_orbitals
from .statesim import dominant_determinants, prepare_register
from .vqe import Objective, OptimizationError, RestartPolicy, minimize

FIXTURE_DIR = Path(__file__).parent / "data" / "fixtures"
WORKERS_ENV = "EXCITEDVQE_WORKERS"
CSV_HEADER = "scan_value,e_vqe,e,s2,n,fci_0,fci_1,label,spread_min,spread_max"
SPIN_LABELS = {0.0: "singlet", 0.5: "doublet", 1.0: "triplet", 1.5: "quadruplet"}
TABLE2_LABELS = {"closed singlet": "ã¹A₁", "open singlet": "b̃¹B₁", "triplet": "X̃³B₁",
                 "mixed": "ã¹A₁ / X̃³B₁"}


class ScanError(RuntimeError):
    pass


class ConfigError(ValueError):
    pass


# ---- molecules ------------------------------------------------------------------

@dataclass(frozen=True)
class MoleculeInfo:
    kind: str  # "template" (s-orbital engine) or "fixture" (bundled FCIDUMP)
    variable: str  # "bond" or "angle"
    basis: str
    charge: int = 0
    frozen_core: tuple[int, ...] = ()


MOLECULES = {
    "H2": MoleculeInfo("template", "bond", "6-31G"),
    "H3": MoleculeInfo("template", "bond", "6-31G"),
    "H3+": MoleculeInfo("template", "bond", "6-31G", charge=1),
    "H4": MoleculeInfo("template", "angle", "STO-3G"),
    "CH2": MoleculeInfo("fixture", "bond", "STO-3G", frozen_core=(0,)),
    "NH2+": MoleculeInfo("fixture", "bond", "STO-3G", charge=1, frozen_core=(0,)),
    "NH": MoleculeInfo("fixture", "bond", "STO-3G", frozen_core=(0,)),
    "OH+": MoleculeInfo("fixture", "bond", "STO-3G", charge=1, frozen_core=(0,)),
}


def fixture_stem(name: str) -> str:
    return name.replace("+", "p").replace("-", "m")


def fixture_name(name: str, value: float) -> str:
    stem = fixture_stem(name)
    return f"{stem}/{stem}_{value:.4f}.fcidump"


def fixture_values(name: str, fixture_dir: Path = FIXTURE_DIR) -> list[float]:
    stem = fixture_stem(name)
    out = []
    for p in sorted((Path(fixture_dir) / stem).glob(f"{stem}_*.fcidump")):
        out.append(float(p.stem.split("_")[-1]))
    return sorted(out)


# ---- configuration ----------------------------------------------------------------

@dataclass(frozen=True)
class RunConfig:
    """One scan. ``molecule`` is a name from MOLECULES or ``fcidump:<pattern>``.

    A pattern contains ``{value}`` (formatted like ``{value:.4f}``) and gives one
    file per scan point. ``charge`` is the charge of the simulated state; the
    orbitals always come from the neutral (or fixture) closed-shell field.
    """

    molecule: str = "H2"
    values: tuple[float, ...] = ()
    scan_start: float | None = None
    scan_stop: float | None = None
    scan_step: float | None = None
    basis: str | None = None
    frozen_core: tuple[int, ...] | None = None
    register: str = "S"
    ansatz: str = "UCCSD"
    k: int | None = None
    penalty: float = 0.0
    s2_target: float | None = None
    n_restarts: int | None = None
    r_f: float = 1e-2
    seed: int = 0
    charge: int | None = None
    fixed_bond: float = 0.93
    side: float = 0.75
    angle: float | None = None
    fixture_dir: str | None = None
    fci_spins: tuple[float, ...] | None = None
    reference: str = "register"  # or "brueckner"
    brueckner_root: int = 0
    k_embed: bool = False
    method: str = "lbfgs"
    max_iter: int = 2000
    workers: int = 1
    output: str = "results/scan"

    def __post_init__(self):
        if not self.values and None in (self.scan_start, self.scan_stop, self.scan_step):
            raise ConfigError("give either values or scan_start/scan_stop/scan_step")
        if self.scan_step is not None and not self.values:
            if self.scan_step <= 0:
                raise ConfigError("scan_step must be positive")
            if self.scan_stop == self.scan_start:
                raise ConfigError("scan range is degenerate")
        if self.penalty < 0:
            raise ConfigError("penalty must be non-negative")
        if self.reference not in ("register", "brueckner"):
            raise ConfigError(f"unknown reference {self.reference!r}")
        if not self.molecule.startswith("fcidump:") and self.molecule not in MOLECULES:
            raise ConfigError(f"unknown molecule {self.molecule!r}; known: {', '.join(MOLECULES)}")

    @property
    def scan_values(self) -> list[float]:
        if self.values:
            vals = [float(v) for v in self.values]
        else:
            lo, hi = sorted((self.scan_start, self.scan_stop))
            n = int(math.floor((hi - lo) / self.scan_step + 1e-9)) + 1
            vals = [round(lo + i * self.scan_step, 10) for i in range(n)]
        return sorted(set(vals))

    @property
    def info(self) -> MoleculeInfo:
        if self.molecule.startswith("fcidump:"):
            return MoleculeInfo("pattern", "bond", "FCIDUMP")
        return MOLECULES[self.molecule]

    @property
    def state_charge(self) -> int:
        return self.info.charge if self.charge is None else self.charge

    @property
    def frozen(self) -> tuple[int, ...]:
        return self.info.frozen_core if self.frozen_core is None else tuple(self.frozen_core)

    @classmethod
    def from_mapping(cls, data: dict) -> "RunConfig":
        known = {f.name: f for f in fields(cls)}
        kwargs = {}
        for key, raw in data.items():
            key = key.strip().lower()
            if key not in known:
                raise ConfigError(f"unknown config key {key!r}")
            kwargs[key] = _coerce(key, raw)
        return cls(**kwargs)

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        text = Path(path).read_text()
        parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
        parser.optionxform = str
        if not text.lstrip().startswith("["):
            text = "[run]\n" + text
        parser.read_string(text)
        data = {}
        for section in parser.sections():
            data.update(parser[section])
        return cls.from_mapping(data)


_TUPLE_FLOAT = {"values", "fci_spins"}
_TUPLE_INT = {"frozen_core"}
_INT = {"k", "n_restarts", "seed", "charge", "brueckner_root", "max_iter", "workers"}
_FLOAT = {"scan_start", "scan_stop", "scan_step", "penalty", "s2_target", "r_f", "fixed_bond",
          "side", "angle"}


def _coerce(key, raw):
    if not isinstance(raw, str):
        return tuple(raw) if key in _TUPLE_FLOAT | _TUPLE_INT else raw
    raw = raw.strip()
    if raw.lower() in ("", "none") and key not in ("register", "ansatz", "molecule", "output"):
        return () if key == "values" else None
    if key in _TUPLE_FLOAT:
        return tuple(float(v) for v in raw.replace(",", " ").split())
    if key in _TUPLE_INT:
        return tuple(int(v) for v in raw.replace(",", " ").split())
    if key in _INT:
        return int(raw)
    if key in _FLOAT:
        return float(raw)
    if key == "k_embed":
        return raw.lower() in ("1", "true", "yes", "on")
    return raw


# ---- integrals per point ----------------------------------------------------------

def point_integrals(config: RunConfig, value: float) -> MOIntegrals:
    """Active-space integrals at one scan value, with ``n_electrons`` for the simulated state."""
    info = config.info
    name = config.molecule
    if info.kind == "template":
        basis = config.basis or info.basis
        if name == "H2":
            g = geo.h2(value, config.state_charge)
        elif name in ("H3", "H3+"):
            g = geo.h3_linear(value, config.fixed_bond, config.state_charge)
        else:
            if config.angle is not None:
                raise ConfigError("H4 scans the angle; angle is not a fixed parameter here")
            g = geo.h4_trapezoid(value, config.side, config.state_charge)
        return molecule_integrals(g, basis, config.frozen)
    if info.kind == "fixture":
        path = Path(config.fixture_dir or FIXTURE_DIR) / fixture_name(name, value)
    else:
        path = Path(config.molecule[len("fcidump:"):].format(value=value))
    if not path.exists():
        raise FileNotFoundError(f"no integral file for scan value {value}: {path}")
    mo = read_fcidump(path)
    if mo.n_electrons is None:
        raise ConfigError(f"{path} has no NELEC")
    # fixtures hold the neutral / closed-shell electron count; ions change it here
    n_el = mo.n_electrons - (config.state_charge - info.charge)
    mo = replace(mo, n_electrons=n_el, ms2=n_el % 2)
    return freeze_orbitals(mo, config.frozen)


# ---- records and classification ---------------------------------------------------

@dataclass
class CurveRecord:
    scan_value: float
    e_vqe: float = float("nan")
    e: float = float("nan")
    s2: float = float("nan")
    n: float = float("nan")
    fci: tuple = ()
    label: str = ""
    shell: str = ""
    spread_min: float = float("nan")
    spread_max: float = float("nan")
    params: np.ndarray | None = field(default=None, repr=False)
    amplitude_classes: dict = field(default_factory=dict)
    determinants: list = field(default_factory=list)
    restart_energies: list = field(default_factory=list)
    iterations: int = 0
    converged: bool = False
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


def classify_state(record_or_s2, threshold: float = 0.1) -> str:
    """Nearest s(s+1) within ``threshold``, else ``"mixed"``."""
    s2 = record_or_s2.s2 if isinstance(record_or_s2, CurveRecord) else float(record_or_s2)
    for s, name in SPIN_LABELS.items():
        if abs(s2 - s * (s + 1)) <= threshold:
            return name
    return "mixed"


def shell_character(determinants) -> str:
    """``"open"`` if the dominant determinant has a singly occupied spatial orbital."""
    if not determinants:
        return ""
    bits = determinants[0][0]
    pairs = [bits[i:i + 2] for i in range(0, len(bits), 2)]
    return "open" if any(p in ("10", "01") for p in pairs) else "closed"


def table2_label(label: str, shell: str) -> str:
    if label == "triplet":
        return TABLE2_LABELS["triplet"]
    if label == "singlet":
        return TABLE2_LABELS[f"{shell or 'closed'} singlet"]
    return TABLE2_LABELS["mixed"] if label == "mixed" else label


def default_fci_spins(n_electrons: int) -> tuple[float, float]:
    return (0.5, 1.5) if n_electrons % 2 else (0.0, 1.0)


def fci_references(mo: MOIntegrals, spins) -> tuple[tuple, FCISolution]:
    n = mo.n_electrons
    sol = fci_solve(mo, n, (n % 2) / 2, n_roots=10 ** 6)
    out = []
    for s in spins:
        try:
            out.append(float(sol.energies[sol.lowest_with_spin(s)]))
        except LookupError:
            out.append(None)
    return tuple(out), sol


# ---- per-point driver ---------------------------------------------------------------

def _policy(config: RunConfig, initial=None) -> RestartPolicy:
    return RestartPolicy(config.n_restarts, config.r_f, config.seed,
                         None if initial is None else tuple(initial))


def run_point(config: RunConfig, value: float, log=None) -> CurveRecord:
    mo = point_integrals(config, value)
    n_el = mo.n_electrons
    spins = config.fci_spins or default_fci_spins(n_el)
    fci, sol = fci_references(mo, spins)
    reference = None
    if config.reference == "brueckner":
        hf = prepare_register(config.register, 2 * mo.n_orb, n_el)
        reference = brueckner_reference(sol, hf, config.brueckner_root)
    objective = Objective.from_integrals(mo, config.ansatz, config.register, n_el, k=config.k,
                                         penalty=config.penalty, reference=reference,
                                         s2_target=config.s2_target)
    options = LBFGSOptions(max_iter=config.max_iter)
    if config.k_embed and objective.spec.k > 1:
        results = minimize_k_sequence(objective, objective.spec.k, _policy(config), options,
                                      config.method, log=log)
        result, objective = results[-1], objective.with_k(objective.spec.k)
    else:
        result = minimize(objective, _policy(config), options, config.method, log=log)
    state = objective.state(result.params)
    dets = dominant_determinants(state, 0.05)
    rec = CurveRecord(
        scan_value=value, e_vqe=result.e_vqe, e=result.energy, s2=result.s2_expectation,
        n=result.n_expectation, fci=fci, params=result.params,
        spread_min=result.spread[0], spread_max=result.spread[1],
        determinants=[(b, float(abs(a) ** 2)) for b, a in dets],
        restart_energies=[float(x) for x in result.restart_energies],
        iterations=result.iterations, converged=result.converged,
    )
    rec.label = classify_state(rec)
    rec.shell = shell_character(dets)
    if np.any(result.params):
        rec.amplitude_classes = classify_amplitudes(objective.mapping, result.params)
    return rec


def minimize_k_sequence(objective: Objective, k_max: int, policy: RestartPolicy, options=None,
                        method="lbfgs", log=None):
    """k = 1 ... k_max, restart 0 of each k seeded with the previous solution zero-padded."""
    options = options or LBFGSOptions(max_iter=2000)
    out = []
    prev = None
    for k in range(1, k_max + 1):
        obj = objective.with_k(k)
        initial = None if prev is None else obj.mapping.embed(prev, k)
        pol = replace(policy, initial=None if initial is None else tuple(initial))
        res = minimize(obj, pol, options, method, log=log)
        out.append(res)
        prev = res.params
    return out


def _safe_point(args):
    config, value = args
    try:
        return run_point(config, value)
    except (OptimizationError, ArithmeticError, ValueError, KeyError, LookupError, OSError,
            RuntimeError) as exc:
        return CurveRecord(scan_value=value, error=f"{type(exc).__name__}: {exc}")


def worker_count(config: RunConfig) -> int:
    env = os.environ.get(WORKERS_ENV)
    if env:
        try:
            n = int(env)
        except ValueError:
            raise ConfigError(f"{WORKERS_ENV} must be an integer, got {env!r}") from None
        return max(1, n)
    return max(1, config.workers)


def run_scan(config: RunConfig, workers: int | None = None) -> list[CurveRecord]:
    """All scan points in ascending order; individual failures are kept as error records."""
    values = config.scan_values
    workers = worker_count(config) if workers is None else workers
    tasks = [(config, v) for v in values]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(tasks))) as pool:
            records = list(pool.map(_safe_point, tasks))
    else:
        records = [_safe_point(t) for t in tasks]
    records.sort(key=lambda r: r.scan_value)
    if not any(r.ok for r in records):
        reasons = "; ".join(f"{r.scan_value}: {r.error}" for r in records)
        raise ScanError(f"no scan point succeeded ({reasons})")
    return records


# ---- outputs --------------------------------------------------------------------

def _fmt(v) -> str:
    if v is None or (isinstance(v, float) and not math.isfinite(v)):
        return ""
    if isinstance(v, float):
        return f"{v:.12g}"
    return str(v)


def records_to_csv(records) -> str:
    buf = io.StringIO()
    buf.write(CSV_HEADER + "\n")
    w = csv.writer(buf, lineterminator="\n")
    for r in records:
        fci = list(r.fci) + [None] * (2 - len(r.fci))
        label = r.label if r.ok else "failed"
        w.writerow([_fmt(r.scan_value), _fmt(r.e_vqe), _fmt(r.e), _fmt(r.s2), _fmt(r.n),
                    _fmt(fci[0]), _fmt(fci[1]), label, _fmt(r.spread_min), _fmt(r.spread_max)])
    return buf.getvalue()


def read_curve_csv(text: str) -> list[dict]:
    rows = list(csv.DictReader(io.StringIO(text)))
    out = []
    for row in rows:
        parsed = {}
        for k, v in row.items():
            if k == "label":
                parsed[k] = v
            else:
                parsed[k] = float(v) if v != "" else None
        out.append(parsed)
    return out


def amplitude_table(records) -> str:
    """Class weights (% of sum |t|), one column per scan value, singles then doubles."""
    cols = [r for r in records if r.ok and r.amplitude_classes]
    classes = sorted({c for r in cols for c in r.amplitude_classes},
                     key=lambda c: (class_kind(c) != "singles", c))
    head = ["class", "kind"] + [_fmt(r.scan_value) for r in cols]
    lines = ["\t".join(head)]
    for c in classes:
        row = [c, class_kind(c)] + [f"{r.amplitude_classes.get(c, 0.0):.2f}" for r in cols]
        lines.append("\t".join(row))
    return "\n".join(lines) + "\n"


def manifest(records, config: RunConfig) -> dict:
    import numba
    import scipy

    return {
        "config": {k: (list(v) if isinstance(v, tuple) else v) for k, v in asdict(config).items()},
        "scan_values": config.scan_values,
        "seeds": {"policy_seed": config.seed,
                  "restart_streams": "numpy SeedSequence(seed).spawn(n_restarts)"},
        "points": [{"scan_value": r.scan_value, "ok": r.ok, "error": r.error,
                    "iterations": r.iterations, "converged": r.converged,
                    "restart_energies": r.restart_energies,
                    "determinants": r.determinants} for r in records],
        "versions": {"excitedvqe": __version__, "python": platform.python_version(),
                     "numpy": np.__version__, "scipy": scipy.__version__,
                     "numba": numba.__version__},
    }


def emit_outputs(records, config: RunConfig, output: str | None = None) -> dict[str, Path]:
    base = Path(output or config.output)
    base.parent.mkdir(parents=True, exist_ok=True)
    paths = {
        "csv": base.with_name(base.name + ".csv"),
        "amplitudes": base.with_name(base.name + "_amplitudes.tsv"),
        "manifest": base.with_name(base.name + "_manifest.json"),
    }
    paths["csv"].write_text(records_to_csv(records))
    paths["amplitudes"].write_text(amplitude_table(records))
    paths["manifest"].write_text(json.dumps(manifest(records, config), indent=2, default=float) + "\n")
    return paths


# ---- symmetry grid ----------------------------------------------------------------

TABLE2_GRID = {
    "S1": ("UCCSD", "UCCS'D", "1-UpCCGSD", "2-UpCCGSD", "3-UpCCGSD", "UCCGSD",
           "1-UpCCSGD", "2-UpCCSGD", "3-UpCCSGD",
           "1-UpCCGS'D", "2-UpCCGS'D", "3-UpCCGS'D",
           "1-UpCCGD", "2-UpCCGD", "3-UpCCGD", "UCCGD"),
    "S2": ("1-UpCCGSD", "2-UpCCGSD", "3-UpCCGSD", "UCCGSD",
           "1-UpCCGS'D", "2-UpCCGS'D", "3-UpCCGS'D",
           "1-UpCCGD", "2-UpCCGD", "3-UpCCGD", "UCCGD"),
    "S3": ("1-UpCCGSD", "2-UpCCGSD", "3-UpCCGSD", "UCCGSD", "UCCGD"),
}


@dataclass
class Table2Cell:
    register: str
    ansatz: str
    label: str
    s2: float
    energy: float
    shell: str
    penalty: float = 0.0


def reproduce_table2(fixture_dir=None, value: float | None = None, grid=None, penalty: float = 0.0,
                     n_restarts: int | None = None, r_f: float = 1e-2, seed: int = 0,
                     log=None) -> dict[tuple[str, str], Table2Cell]:
    """Final-state labels for each (register, ansatz) on the CH2 fixture at one bond length.

    ``value`` defaults to the fixture point with the lowest FCI singlet energy.
    Returns an empty dict (after printing a notice) if no CH2 fixture is found.
    """
    fixture_dir = Path(fixture_dir or FIXTURE_DIR)
    available = fixture_values("CH2", fixture_dir)
    if not available:
        print(f"notice: no CH2 fixtures under {fixture_dir}; skipping", file=sys.stderr)
        return {}
    if value is None:
        value = pes_minimum("CH2", fixture_dir)
    grid = grid or TABLE2_GRID
    out = {}
    for register, rows in grid.items():
        for ansatz in rows:
            cfg = RunConfig(molecule="CH2", values=(value,), register=register, ansatz=ansatz,
                            penalty=penalty, n_restarts=n_restarts, r_f=r_f, seed=seed,
                            fixture_dir=str(fixture_dir))
            rec = run_point(cfg, value)
            cell = Table2Cell(register, ansatz, table2_label(rec.label, rec.shell), rec.s2,
                              rec.e, rec.shell, penalty)
            out[(register, ansatz)] = cell
            if log:
                log(f"{register:3s} {ansatz:12s} {cell.label:12s} s2={rec.s2:.4f} E={rec.e:.8f}")
    return out


def pes_minimum(name: str, fixture_dir=None, spin: float = 0.0) -> float:
    """Fixture scan value with the lowest FCI energy for the given spin."""
    fixture_dir = Path(fixture_dir or FIXTURE_DIR)
    best = None
    for v in fixture_values(name, fixture_dir):
        cfg = RunConfig(molecule=name, values=(v,), fixture_dir=str(fixture_dir))
        mo = point_integrals(cfg, v)
        (e,), _ = fci_references(mo, (spin,))
        if e is not None and (best is None or e < best[1]):
            best = (v, e)
    if best is None:
        raise ScanError(f"no fixture for {name}")
    return best[0]


def format_table2(cells: dict) -> str:
    lines = [f"{'register':8s} {'ansatz':12s} {'label':14s} {'<S^2>':>8s} {'E (Ha)':>16s}"]
    for (reg, ans), c in cells.items():
        lines.append(f"{reg:8s} {ans:12s} {c.label:14s} {c.s2:8.4f} {c.energy:16.10f}")
    return "\n".join(lines) + "\n"
