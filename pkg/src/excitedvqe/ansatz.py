"""Unitary coupled-cluster ansatz families.

Every generator is ``theta * (tau - tau^+)`` for one excitation ``tau``. Circuits
apply one first-order Trotter step per k factor: generators in lexicographic
order of their spin-orbital tuples, singles before doubles, factor 1 first.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations

import numpy as np

from .fermion import FermionOperator, anti_hermitian_generator, excitation
from .qubit import jordan_wigner


class AnsatzError(ValueError):
    pass


@dataclass(frozen=True)
class FamilyRule:
    singles: str | None  # None, "standard" or "generalized"
    primed: bool
    doubles: str  # "standard", "generalized" or "pair"
    repeated: bool  # accepts k > 1


FAMILIES = {
    "UCCSD": FamilyRule("standard", False, "standard", False),
    "UCCS'D": FamilyRule("standard", True, "standard", False),
    "UCCD": FamilyRule(None, False, "standard", False),
    "UCCGSD": FamilyRule("generalized", False, "generalized", False),
    "UCCGS'D": FamilyRule("generalized", True, "generalized", False),
    "UCCGD": FamilyRule(None, False, "generalized", False),
    "UpCCGSD": FamilyRule("generalized", False, "pair", True),
    "UpCCGS'D": FamilyRule("generalized", True, "pair", True),
    "UpCCGD": FamilyRule(None, False, "pair", True),
    "UpCCSGD": FamilyRule("standard", False, "pair", True),
    "UpCCS'GD": FamilyRule("standard", True, "pair", True),
}


def parse_family(name: str) -> tuple[str, int]:
    """``"2-UpCCGS'D"`` -> ``("UpCCGS'D", 2)``; ``p`` or a prime sign also mark primed singles."""
    text = name.strip().replace("′", "'").replace("’", "'")
    k = 1
    m = re.fullmatch(r"(?:(\d+|k)-)?(.+)", text)
    if m.group(1) and m.group(1) != "k":
        k = int(m.group(1))
    base = m.group(2)
    base = re.sub(r"Sp(?=G?D$)", "S'", base)
    if base not in FAMILIES:
        raise AnsatzError(f"unknown ansatz family {name!r}")
    return base, k


@dataclass(frozen=True)
class Excitation:
    annihilate: tuple[int, ...]
    create: tuple[int, ...]
    kind: str  # "single", "pair" or "double"
    category: str = ""

    @property
    def key(self) -> tuple[int, ...]:
        return self.annihilate + self.create

    def operator(self) -> FermionOperator:
        return excitation(self.create, self.annihilate)

    def generator(self) -> FermionOperator:
        return anti_hermitian_generator(self.operator())


@dataclass(frozen=True)
class AnsatzSpec:
    family: str
    k: int
    n_spatial: int
    n_electrons: int
    register: str
    reference_det: int  # dominant determinant; defines occupied/virtual labels

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise AnsatzError(f"unknown ansatz family {self.family!r}")
        if self.k < 1:
            raise AnsatzError("k must be >= 1")
        if self.k > 1 and not FAMILIES[self.family].repeated:
            raise AnsatzError(f"{self.family} takes no k factor")

    @classmethod
    def create(cls, family: str, n_spatial: int, n_electrons: int, register: str,
               reference_det: int | None = None, k: int | None = None) -> "AnsatzSpec":
        base, parsed_k = parse_family(family)
        k = parsed_k if k is None else k
        rule = FAMILIES[base]
        reg = register.upper()
        multiref = reg in ("S2", "S3")
        closed = reg in ("S", "S1", "S2") or reg.startswith("KET:") or reg == "CUSTOM"
        if rule.singles == "standard" or rule.doubles == "standard":
            if multiref:
                raise AnsatzError(f"{base} needs a single-determinant register, got {register}")
        if (rule.primed or base == "UpCCGD") and not closed:
            raise AnsatzError(f"{base} keeps closed-shell singlet excitations only; "
                              f"register {register} is open-shell")
        if reference_det is None:
            from .statesim import register_circuit
            state = register_circuit(reg, 2 * n_spatial, n_electrons).run()
            reference_det = int(np.argmax(np.abs(state.amplitudes)))
        if bin(reference_det).count("1") != n_electrons:
            raise AnsatzError("reference determinant electron count mismatch")
        return cls(base, k, n_spatial, n_electrons, reg, int(reference_det))

    @property
    def label(self) -> str:
        return f"{self.k}-{self.family}" if FAMILIES[self.family].repeated else self.family

    @property
    def rule(self) -> FamilyRule:
        return FAMILIES[self.family]

    def occupied_spin_orbitals(self) -> list[int]:
        return [p for p in range(2 * self.n_spatial) if (self.reference_det >> p) & 1]

    def occupied_spatial(self) -> set[int]:
        return {p // 2 for p in self.occupied_spin_orbitals()}


def _spatial_category(spec: AnsatzSpec):
    occ = spec.occupied_spatial()
    return lambda p: "occ" if p // 2 in occ else "vir"


def _single_category(spec, p, q):
    cat = _spatial_category(spec)
    c = sorted([cat(p), cat(q)])
    return {("occ", "occ"): "t_{A}^{B}", ("occ", "vir"): "t_{A}^{P}", ("vir", "vir"): "t_{P}^{Q}"}[tuple(c)]


_PAIR_NAMES = {(2, 2): "t_{A,A}^{B,B}", (2, 0): "t_{A,A}^{P,P}", (0, 0): "t_{P,P}^{Q,Q}"}
_DOUBLE_NAMES = {
    (2, 0): "t_{A,B}^{P,Q}", (2, 2): "t_{A,B}^{C,D}", (0, 0): "t_{P,Q}^{R,S}",
    (1, 1): "t_{A,P}^{B,Q}", (2, 1): "t_{A,B}^{C,P}", (1, 0): "t_{A,P}^{Q,R}",
}


def _double_category(spec, ann, cre, pair):
    cat = _spatial_category(spec)
    n_a = sum(cat(p) == "occ" for p in ann)
    n_c = sum(cat(p) == "occ" for p in cre)
    hi, lo = max(n_a, n_c), min(n_a, n_c)
    return (_PAIR_NAMES if pair else _DOUBLE_NAMES)[(hi, lo)]


def _singles(spec: AnsatzSpec) -> list[list[Excitation]]:
    """Grouped by shared parameter."""
    rule = spec.rule
    n = spec.n_spatial
    groups = []
    if rule.singles is None:
        return groups
    if rule.singles == "generalized":
        spatial_pairs = list(combinations(range(n), 2))
    else:
        occ_so = set(spec.occupied_spin_orbitals())
        spatial_pairs = None
    if rule.primed:
        if spatial_pairs is None:
            occ = sorted(spec.occupied_spatial())
            spatial_pairs = [(P, Q) for P in occ for Q in range(n) if Q not in spec.occupied_spatial()]
        for P, Q in spatial_pairs:
            groups.append([
                Excitation((2 * P + s,), (2 * Q + s,), "single", _single_category(spec, 2 * P, 2 * Q))
                for s in (0, 1)
            ])
        return groups
    if spatial_pairs is not None:
        for P, Q in spatial_pairs:
            for s in (0, 1):
                p, q = 2 * P + s, 2 * Q + s
                groups.append([Excitation((p,), (q,), "single", _single_category(spec, p, q))])
    else:
        for p in sorted(occ_so):
            for q in range(2 * n):
                if q in occ_so or (p - q) % 2:
                    continue
                groups.append([Excitation((p,), (q,), "single", _single_category(spec, p, q))])
    return groups


def _doubles(spec: AnsatzSpec) -> list[Excitation]:
    rule = spec.rule
    n = spec.n_spatial
    nso = 2 * n
    out = []
    if rule.doubles == "pair":
        for P, Q in combinations(range(n), 2):
            ann, cre = (2 * P, 2 * P + 1), (2 * Q, 2 * Q + 1)
            out.append(Excitation(ann, cre, "pair", _double_category(spec, ann, cre, True)))
    elif rule.doubles == "standard":
        occ = spec.occupied_spin_orbitals()
        vir = [p for p in range(nso) if p not in occ]
        for ann in combinations(occ, 2):
            for cre in combinations(vir, 2):
                if sum(p % 2 for p in ann) != sum(p % 2 for p in cre):
                    continue
                out.append(Excitation(ann, cre, "double", _double_category(spec, ann, cre, False)))
    else:
        pairs = list(combinations(range(nso), 2))
        for i, ann in enumerate(pairs):
            for cre in pairs[i + 1:]:
                if set(ann) & set(cre):
                    continue
                if sum(p % 2 for p in ann) != sum(p % 2 for p in cre):
                    continue
                pair = ann[0] // 2 == ann[1] // 2 and cre[0] // 2 == cre[1] // 2
                out.append(Excitation(ann, cre, "double", _double_category(spec, ann, cre, pair)))
    return out


def enumerate_excitations(spec: AnsatzSpec) -> list[Excitation]:
    """Excitations of one k factor, in circuit order."""
    singles = sorted((e for g in _singles(spec) for e in g), key=lambda e: e.key)
    doubles = sorted(_doubles(spec), key=lambda e: e.key)
    return singles + doubles


@dataclass(frozen=True)
class GateSlot:
    """One generator in the circuit, driven by ``params[param] * weight``."""

    excitation: Excitation
    param: int
    factor: int
    weight: float = 1.0


@dataclass(frozen=True)
class ParameterMap:
    spec: AnsatzSpec
    n_params: int
    slots: tuple[GateSlot, ...]
    factor_offsets: tuple[int, ...]
    groups: tuple[tuple[Excitation, ...], ...] = field(repr=False)

    @classmethod
    def build(cls, spec: AnsatzSpec) -> "ParameterMap":
        singles = sorted(_singles(spec), key=lambda g: g[0].key)
        doubles = [[d] for d in sorted(_doubles(spec), key=lambda e: e.key)]
        groups = singles + doubles
        n_single = len(singles)
        per_factor = len(groups)
        slots, offsets = [], []
        for f in range(spec.k):
            base = f * per_factor
            offsets.append(base)
            gates = sorted(((e, base + j) for j, g in enumerate(singles) for e in g),
                           key=lambda t: t[0].key)
            gates += [(g[0], base + n_single + j) for j, g in enumerate(doubles)]
            slots.extend(GateSlot(e, j, f) for e, j in gates)
        return cls(spec, per_factor * spec.k, tuple(slots), tuple(offsets),
                   tuple(tuple(g) for g in groups))

    @property
    def per_factor(self) -> int:
        return len(self.groups)

    def param_excitations(self, j: int) -> tuple[Excitation, ...]:
        return self.groups[j % self.per_factor]

    def entries(self) -> list[list[tuple[Excitation, int]]]:
        """Per parameter: (excitation, sharing multiplicity)."""
        return [[(e, len(self.param_excitations(j))) for e in self.param_excitations(j)]
                for j in range(self.n_params)]

    def embed(self, params_k, k_new: int):
        """Zero-pad a k-factor parameter vector to a larger k (extra factors are identities)."""
        params_k = np.asarray(params_k, dtype=float)
        out = np.zeros(self.per_factor * k_new)
        out[: len(params_k)] = params_k
        return out


@dataclass(frozen=True)
class PauliRotation:
    """exp(i * angle * P) for the masked Pauli string P."""

    x: int
    z: int
    angle: float


def generator_paulis(exc: Excitation, n_qubits: int) -> list[tuple[int, int, float]]:
    """JW image of tau - tau^+ as ``(x, z, a)`` with term coefficient ``i * a``."""
    q = jordan_wigner(exc.generator(), n_qubits)
    out = []
    for (x, z), c in sorted(q.mask_terms.items()):
        if abs(c.real) > 1e-12:
            raise AssertionError("generator encoding is not anti-Hermitian")
        out.append((x, z, c.imag))
    return out


@dataclass
class CompiledAnsatz:
    mapping: ParameterMap

    @cached_property
    def _pauli_cache(self):
        n_qubits = 2 * self.mapping.spec.n_spatial
        cache = {}
        for s in self.mapping.slots:
            if s.excitation not in cache:
                cache[s.excitation] = generator_paulis(s.excitation, n_qubits)
        return cache

    def circuit(self, params) -> list[PauliRotation]:
        params = np.asarray(params, dtype=float)
        if params.shape != (self.mapping.n_params,):
            raise AnsatzError(f"expected {self.mapping.n_params} parameters, got {params.shape}")
        gates = []
        for s in self.mapping.slots:
            theta = params[s.param] * s.weight
            if theta == 0.0:
                continue
            for x, z, a in self._pauli_cache[s.excitation]:
                gates.append(PauliRotation(x, z, theta * a))
        return gates


def compile_circuit(spec: AnsatzSpec, mapping: ParameterMap, params) -> list[PauliRotation]:
    if mapping.spec != spec:
        raise AnsatzError("parameter map was built for a different ansatz")
    return CompiledAnsatz(mapping).circuit(params)


def run_circuit(state, gates):
    from .statesim import apply_pauli_exponential
    for g in gates:
        state = apply_pauli_exponential(state, (g.x, g.z), g.angle)
    return state


def classify_amplitudes(mapping: ParameterMap, params) -> dict[str, float]:
    """Percentage of sum |t| carried by each excitation class."""
    params = np.asarray(params, dtype=float)
    total = np.sum(np.abs(params))
    if total == 0:
        raise ValueError("all amplitudes are zero; class weights are undefined")
    weights: dict[str, float] = {}
    for j, t in enumerate(params):
        cat = mapping.param_excitations(j)[0].category
        weights[cat] = weights.get(cat, 0.0) + abs(t)
    return {c: 100.0 * w / total for c, w in weights.items()}


def class_kind(category: str) -> str:
    return "singles" if "," not in category else "doubles"


def catalog(spec: AnsatzSpec) -> str:
    """Text listing of one factor's excitations grouped by parameter."""
    mapping = ParameterMap.build(spec)
    lines = [f"# {spec.label} n_spatial={spec.n_spatial} n_electrons={spec.n_electrons} "
             f"register={spec.register} params={mapping.n_params}"]
    for j, group in enumerate(mapping.groups):
        desc = " + ".join(
            f"{'^'.join(map(str, e.create))}<-{','.join(map(str, e.annihilate))}" for e in group
        )
        lines.append(f"{j:4d} {group[0].kind:6s} {group[0].category:14s} {desc}")
    return "\n".join(lines) + "\n"
