"""
Model Hamiltonians (hbar = 1, all rates in rad/time).

Layouts:
  KerrCubic      one mode
  BEC, AtomField modes (A, B)
  TavisCummings  field mode then M qubits
  DJC            fields A, B then atoms C, D
  DTC            fields A, B then atoms C1, C2 (on A) and D1, D2 (on B)
  NMRSpin        qubits M, A, B
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import ClassVar, Dict, Optional, Sequence, Tuple, Type, Union

import numpy as np
from scipy import sparse

from .errors import DimensionError, ValidationError
from .fock import MAX_DENSITY_ENTRIES, MODE, QUBIT, ModeSpace
from .operators import SIGMA_MINUS, SIGMA_PLUS, SIGMA_X, SIGMA_Z, destroy, embed


@dataclass(frozen=True)
class KerrCubic:
    chi1: float
    chi2: float = 0.0
    kind: ClassVar[str] = "KerrCubic"


@dataclass(frozen=True)
class BEC:
    omega0: float
    omega1: float
    U: float
    lam: float
    kind: ClassVar[str] = "BEC"

    def __post_init__(self) -> None:
        if not self.U > 0:
            raise ValidationError(f"BEC needs U > 0 for a spectrum bounded below, got U={self.U}")

    @property
    def lambda1(self) -> float:
        return float(np.hypot(self.omega1, self.lam))


@dataclass(frozen=True)
class AtomField:
    omega_f: float
    omega_a: float
    gamma: float
    g: float
    kind: ClassVar[str] = "AtomField"

    def __post_init__(self) -> None:
        if not self.gamma > 0:
            raise ValidationError(f"AtomField needs gamma > 0, got {self.gamma}")


@dataclass(frozen=True)
class TavisCummings:
    omega_f: float
    chi: float
    omegas: Tuple[float, ...]
    lam: float
    lam_s: float = 0.0
    kind: ClassVar[str] = "TavisCummings"

    def __post_init__(self) -> None:
        object.__setattr__(self, "omegas", tuple(float(w) for w in self.omegas))
        if not self.omegas:
            raise ValidationError("TavisCummings needs at least one qubit frequency")

    @property
    def M(self) -> int:
        return len(self.omegas)


@dataclass(frozen=True)
class DJC:
    chi_f: float
    chi0: float
    g0: float
    kind: ClassVar[str] = "DJC"


@dataclass(frozen=True)
class DTC:
    chi_f: float
    chi0: float
    g0: float
    kind: ClassVar[str] = "DTC"


@dataclass(frozen=True)
class NMRSpin:
    chi_s: float
    kind: ClassVar[str] = "NMRSpin"


HamiltonianSpec = Union[KerrCubic, BEC, AtomField, TavisCummings, DJC, DTC, NMRSpin]

SPEC_TYPES: Dict[str, Type] = {
    cls.kind: cls for cls in (KerrCubic, BEC, AtomField, TavisCummings, DJC, DTC, NMRSpin)
}


def default_space(spec: HamiltonianSpec, cutoff: int, cutoff_b: Optional[int] = None) -> ModeSpace:
    cb = cutoff if cutoff_b is None else cutoff_b
    if isinstance(spec, KerrCubic):
        return ModeSpace.single(cutoff)
    if isinstance(spec, (BEC, AtomField)):
        return ModeSpace.modes(cutoff, cb)
    if isinstance(spec, TavisCummings):
        return ModeSpace.single(cutoff) + ModeSpace.qubits(spec.M)
    if isinstance(spec, DJC):
        return ModeSpace.modes(cutoff, cb) + ModeSpace.qubits(2)
    if isinstance(spec, DTC):
        return ModeSpace.modes(cutoff, cb) + ModeSpace.qubits(4)
    if isinstance(spec, NMRSpin):
        return ModeSpace.qubits(3)
    raise ValidationError(f"Unknown Hamiltonian spec {spec!r}")


def _expected_kinds(spec: HamiltonianSpec) -> Tuple[str, ...]:
    if isinstance(spec, KerrCubic):
        return (MODE,)
    if isinstance(spec, (BEC, AtomField)):
        return (MODE, MODE)
    if isinstance(spec, TavisCummings):
        return (MODE,) + (QUBIT,) * spec.M
    if isinstance(spec, DJC):
        return (MODE, MODE, QUBIT, QUBIT)
    if isinstance(spec, DTC):
        return (MODE, MODE) + (QUBIT,) * 4
    return (QUBIT,) * 3


def check_layout(spec: HamiltonianSpec, space: ModeSpace) -> None:
    expected = _expected_kinds(spec)
    if space.kinds != expected:
        raise DimensionError(f"{spec.kind} expects subsystem layout {expected}, got {space.kinds}")


class _Ops:
    """Sparse embedded operators for one space."""

    def __init__(self, space: ModeSpace):
        self.space = space
        self.dims = space.dims

    def a(self, i: int) -> sparse.csr_matrix:
        return embed(destroy(self.dims[i]), i, self.dims, as_sparse=True)

    def n(self, i: int) -> sparse.csr_matrix:
        a = self.a(i)
        return (a.conj().T @ a).tocsr()

    def q(self, op: np.ndarray, i: int) -> sparse.csr_matrix:
        return embed(op, i, self.dims, as_sparse=True)


def build_hamiltonian_sparse(spec: HamiltonianSpec, space: ModeSpace) -> sparse.csr_matrix:
    check_layout(spec, space)
    o = _Ops(space)
    if isinstance(spec, KerrCubic):
        n = np.arange(space.dims[0], dtype=float)
        return sparse.diags(spec.chi1 * n * (n - 1) + spec.chi2 * n * (n - 1) * (n - 2)).astype(complex).tocsr()
    if isinstance(spec, BEC):
        a, b = o.a(0), o.a(1)
        na, nb = o.n(0), o.n(1)
        ntot = na + nb
        hop = a.conj().T @ b + a @ b.conj().T
        return (spec.omega0 * ntot + spec.omega1 * (na - nb) + spec.U * (ntot @ ntot) - spec.lam * hop).tocsr()
    if isinstance(spec, AtomField):
        a, b = o.a(0), o.a(1)
        bd = b.conj().T
        hop = a.conj().T @ b + a @ bd
        return (spec.omega_f * o.n(0) + spec.omega_a * o.n(1) + spec.gamma * (bd @ bd @ b @ b) + spec.g * hop).tocsr()
    if isinstance(spec, TavisCummings):
        a = o.a(0)
        ad = a.conj().T
        h = spec.omega_f * o.n(0) + spec.chi * (ad @ ad @ a @ a)
        for p, w in enumerate(spec.omegas, start=1):
            h = h + w * o.q(SIGMA_Z, p) + spec.lam * (ad @ o.q(SIGMA_MINUS, p) + a @ o.q(SIGMA_PLUS, p))
        for p in range(1, spec.M):
            h = h + spec.lam_s * (
                o.q(SIGMA_MINUS, p) @ o.q(SIGMA_PLUS, p + 1) + o.q(SIGMA_MINUS, p + 1) @ o.q(SIGMA_PLUS, p)
            )
        return h.tocsr()
    if isinstance(spec, (DJC, DTC)):
        a, b = o.a(0), o.a(1)
        h = spec.chi_f * (o.n(0) + o.n(1))
        atoms_a = [2] if isinstance(spec, DJC) else [2, 3]
        atoms_b = [3] if isinstance(spec, DJC) else [4, 5]
        for field_op, atoms in ((a, atoms_a), (b, atoms_b)):
            for q in atoms:
                h = h + spec.chi0 * o.q(SIGMA_Z, q)
                h = h + spec.g0 * (field_op.conj().T @ o.q(SIGMA_MINUS, q) + field_op @ o.q(SIGMA_PLUS, q))
        return h.tocsr()
    if isinstance(spec, NMRSpin):
        return (4 * spec.chi_s * (o.q(SIGMA_X, 1) + o.q(SIGMA_X, 2)) @ o.q(SIGMA_X, 0)).astype(complex).tocsr()
    raise ValidationError(f"Unknown Hamiltonian spec {spec!r}")


def build_hamiltonian(spec: HamiltonianSpec, space: ModeSpace) -> np.ndarray:
    n = space.total
    if n * n > MAX_DENSITY_ENTRIES:
        raise DimensionError(f"Dense Hamiltonian of dimension {n} exceeds {MAX_DENSITY_ENTRIES} entries")
    return build_hamiltonian_sparse(spec, space).toarray()


def excitation_numbers(spec: HamiltonianSpec, space: ModeSpace) -> Optional[np.ndarray]:
    """Diagonal of the conserved excitation operator, or None when nothing is conserved."""
    if isinstance(spec, NMRSpin):
        return None
    check_layout(spec, space)
    grids = np.meshgrid(*[np.arange(d) for d in space.dims], indexing="ij")
    total = np.zeros(space.dims, dtype=int)
    for g in grids:
        total = total + g
    return total.reshape(-1)


def complete_sector_limit(space: ModeSpace) -> int:
    """Largest excitation number whose sector is untouched by the Fock cutoff."""
    return space.cutoff
