"""
Truncated Fock/qubit spaces, pure and mixed states, and their algebra.

Multi-indices are row-major over ModeSpace.dims with subsystem 0 slowest.
Every "infinite" Fock sum is truncated at the cutoff and renormalised; a
constructor fails when the discarded tail exceeds TAIL_TOLERANCE.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import eval_laguerre, gammainc, gammaln

from .errors import DimensionError, TruncationError, ValidationError

LOG = logging.getLogger("qtomo")

TAIL_TOLERANCE = 1e-6
NORM_TOLERANCE = 1e-10
MAX_DENSITY_ENTRIES = 2 ** 22
MAX_STATE_DIM = 2 ** 22

MODE = "mode"
QUBIT = "qubit"


@dataclass(frozen=True)
class ModeSpace:
    dims: Tuple[int, ...]
    kinds: Tuple[str, ...] = ()

    def __post_init__(self) -> None:
        dims = tuple(int(d) for d in self.dims)
        kinds = tuple(self.kinds) if self.kinds else tuple(QUBIT if d == 2 else MODE for d in dims)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "kinds", kinds)
        if not dims:
            raise DimensionError("A space needs at least one subsystem")
        if len(kinds) != len(dims):
            raise DimensionError(f"kinds {kinds} do not match dims {dims}")
        for d, k in zip(dims, kinds):
            if d < 2:
                raise DimensionError(f"Subsystem dimension {d} < 2 in {dims}")
            if k not in (MODE, QUBIT):
                raise DimensionError(f"Unknown subsystem kind '{k}'")
            if k == QUBIT and d != 2:
                raise DimensionError(f"Qubit subsystem with dimension {d}")
        if self.total > MAX_STATE_DIM:
            raise DimensionError(f"Total dimension {self.total} exceeds {MAX_STATE_DIM}")

    @classmethod
    def single(cls, cutoff: int) -> "ModeSpace":
        return cls((cutoff + 1,), (MODE,))

    @classmethod
    def modes(cls, *cutoffs: int) -> "ModeSpace":
        return cls(tuple(c + 1 for c in cutoffs), tuple(MODE for _ in cutoffs))

    @classmethod
    def qubits(cls, n: int) -> "ModeSpace":
        return cls(tuple(2 for _ in range(n)), tuple(QUBIT for _ in range(n)))

    def __add__(self, other: "ModeSpace") -> "ModeSpace":
        return ModeSpace(self.dims + other.dims, self.kinds + other.kinds)

    @property
    def total(self) -> int:
        return int(np.prod(self.dims, dtype=np.int64))

    @property
    def n_subsystems(self) -> int:
        return len(self.dims)

    @property
    def mode_indices(self) -> List[int]:
        return [i for i, k in enumerate(self.kinds) if k == MODE]

    @property
    def qubit_indices(self) -> List[int]:
        return [i for i, k in enumerate(self.kinds) if k == QUBIT]

    @property
    def cutoff(self) -> int:
        """Highest retained Fock index over the bosonic modes (1 for qubit-only spaces)."""
        modes = self.mode_indices
        if not modes:
            return 1
        return min(self.dims[i] for i in modes) - 1

    def subspace(self, keep: Sequence[int]) -> "ModeSpace":
        return ModeSpace(tuple(self.dims[i] for i in keep), tuple(self.kinds[i] for i in keep))

    def check_index(self, keep: Iterable[int]) -> List[int]:
        out = sorted(set(int(k) for k in keep))
        if not out:
            raise DimensionError("Subsystem selection is empty")
        for k in out:
            if k < 0 or k >= self.n_subsystems:
                raise DimensionError(f"Subsystem index {k} outside 0..{self.n_subsystems - 1}")
        return out


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex, copy=True)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class PureState:
    space: ModeSpace
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        amps = _frozen(np.asarray(self.amplitudes).reshape(-1))
        if amps.shape[0] != self.space.total:
            raise DimensionError(f"{amps.shape[0]} amplitudes for a space of dimension {self.space.total}")
        norm = float(np.vdot(amps, amps).real)
        if abs(norm - 1.0) > NORM_TOLERANCE:
            raise ValidationError(f"State norm {norm:.12g} differs from 1 by more than {NORM_TOLERANCE}")
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def normalized(cls, space: ModeSpace, amplitudes: np.ndarray) -> "PureState":
        amps = np.asarray(amplitudes, dtype=complex).reshape(-1)
        norm = np.sqrt(np.vdot(amps, amps).real)
        if norm == 0:
            raise ValidationError("Cannot normalise a zero vector")
        return cls(space, amps / norm)

    def tensor_view(self) -> np.ndarray:
        return self.amplitudes.reshape(self.space.dims)

    def density(self) -> "DensityMatrix":
        return DensityMatrix(self.space, np.outer(self.amplitudes, self.amplitudes.conj()))


@dataclass(frozen=True)
class DensityMatrix:
    space: ModeSpace
    matrix: np.ndarray = field(repr=False)
    check_psd: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self) -> None:
        n = self.space.total
        if n * n > MAX_DENSITY_ENTRIES:
            raise DimensionError(f"Density matrix of dimension {n} exceeds {MAX_DENSITY_ENTRIES} entries")
        m = _frozen(self.matrix)
        if m.shape != (n, n):
            raise DimensionError(f"Matrix shape {m.shape} does not match space dimension {n}")
        asym = float(np.max(np.abs(m - m.conj().T))) if n else 0.0
        if asym > NORM_TOLERANCE:
            raise ValidationError(f"Density matrix is not Hermitian (max asymmetry {asym:.3g})")
        tr = complex(np.trace(m))
        if abs(tr - 1.0) > NORM_TOLERANCE:
            raise ValidationError(f"Density matrix trace {tr.real:.12g} differs from 1")
        if self.check_psd:
            lowest = float(np.linalg.eigvalsh(m)[0])
            if lowest < -1e-9:
                raise ValidationError(f"Density matrix has negative eigenvalue {lowest:.3g}")
        object.__setattr__(self, "matrix", m)

    @classmethod
    def hermitized(cls, space: ModeSpace, matrix: np.ndarray) -> "DensityMatrix":
        m = np.asarray(matrix, dtype=complex)
        m = 0.5 * (m + m.conj().T)
        return cls(space, m / np.trace(m).real)

    def eigenvalues(self) -> np.ndarray:
        return np.clip(np.linalg.eigvalsh(self.matrix), 0.0, None)


State = Union[PureState, DensityMatrix]


def as_density(state: State) -> DensityMatrix:
    return state if isinstance(state, DensityMatrix) else state.density()


# --------------------------------------------------------------------------- constructors


def _single_mode(space: ModeSpace) -> int:
    if space.n_subsystems != 1 or space.kinds[0] != MODE:
        raise DimensionError(f"Expected a single bosonic mode, got dims {space.dims}")
    return space.dims[0] - 1


def _check_tail(deficit: float, what: str, cutoff: int) -> None:
    if deficit > TAIL_TOLERANCE:
        raise TruncationError(
            f"{what}: probability {deficit:.3g} beyond cutoff {cutoff} exceeds {TAIL_TOLERANCE}; raise the cutoff"
        )


def coherent_amplitudes(alpha: complex, cutoff: int) -> np.ndarray:
    """Unnormalised CS amplitudes e^{-|a|^2/2} a^p / sqrt(p!) for p = 0..cutoff."""
    p = np.arange(cutoff + 1)
    r = abs(alpha)
    if r == 0:
        out = np.zeros(cutoff + 1, dtype=complex)
        out[0] = 1.0
        return out
    logmag = -0.5 * r * r + p * np.log(r) - 0.5 * gammaln(p + 1)
    return np.exp(logmag) * np.exp(1j * p * np.angle(alpha))


def make_coherent(alpha: complex, space: ModeSpace) -> PureState:
    cutoff = _single_mode(space)
    x = abs(alpha) ** 2
    if x > cutoff / 2:
        LOG.warning("|alpha|^2=%.4g exceeds cutoff/2=%.4g; truncation error may be noticeable", x, cutoff / 2)
    deficit = float(gammainc(cutoff + 1, x)) if x > 0 else 0.0
    _check_tail(deficit, f"coherent state alpha={alpha}", cutoff)
    return PureState.normalized(space, coherent_amplitudes(alpha, cutoff))


def pacs_amplitudes(alpha: complex, m: int, cutoff: int) -> np.ndarray:
    """Unnormalised amplitudes of a^dagger^m |alpha> over 0..cutoff."""
    p = np.arange(cutoff + 1)
    out = np.zeros(cutoff + 1, dtype=complex)
    live = p >= m
    k = p[live] - m
    r = abs(alpha)
    if r == 0:
        if m <= cutoff:
            out[m] = np.exp(0.5 * gammaln(m + 1))
        return out
    logmag = -0.5 * r * r + k * np.log(r) + 0.5 * gammaln(p[live] + 1) - gammaln(k + 1)
    out[live] = np.exp(logmag) * np.exp(1j * k * np.angle(alpha))
    return out


def pacs_norm_squared(alpha: complex, m: int) -> float:
    """m! L_m(-|alpha|^2), the squared norm of a^dagger^m |alpha>."""
    return float(np.exp(gammaln(m + 1)) * eval_laguerre(m, -abs(alpha) ** 2))


def make_pacs(alpha: complex, m: int, space: ModeSpace) -> PureState:
    if m < 0:
        raise ValidationError(f"Photon-added order m={m} must be >= 0")
    if m == 0:
        return make_coherent(alpha, space)
    cutoff = _single_mode(space)
    if m > cutoff:
        raise DimensionError(f"m={m} exceeds cutoff {cutoff}")
    x = abs(alpha) ** 2
    if x + m > cutoff / 2:
        LOG.warning("|alpha|^2+m=%.4g exceeds cutoff/2=%.4g; truncation error may be noticeable", x + m, cutoff / 2)
    amps = pacs_amplitudes(alpha, m, cutoff)
    kept = float(np.sum(np.abs(amps) ** 2))
    deficit = max(0.0, 1.0 - kept / pacs_norm_squared(alpha, m))
    _check_tail(deficit, f"{m}-PACS alpha={alpha}", cutoff)
    return PureState.normalized(space, amps)


def make_fock(n: int, space: ModeSpace) -> PureState:
    cutoff = _single_mode(space)
    if not 0 <= n <= cutoff:
        raise DimensionError(f"Fock index {n} outside 0..{cutoff}")
    amps = np.zeros(cutoff + 1, dtype=complex)
    amps[n] = 1.0
    return PureState(space, amps)


def make_thermal(nbar: float, space: ModeSpace) -> DensityMatrix:
    """Truncated thermal state with Bose-Einstein populations."""
    cutoff = _single_mode(space)
    if nbar < 0:
        raise ValidationError(f"Mean photon number {nbar} < 0")
    if nbar == 0:
        probs = np.zeros(cutoff + 1)
        probs[0] = 1.0
    else:
        ratio = nbar / (1.0 + nbar)
        _check_tail(ratio ** (cutoff + 1), f"thermal state nbar={nbar}", cutoff)
        probs = ratio ** np.arange(cutoff + 1)
        probs /= probs.sum()
    return DensityMatrix(space, np.diag(probs).astype(complex))


def _two_mode(space: ModeSpace) -> Tuple[int, int]:
    if space.n_subsystems != 2 or space.kinds != (MODE, MODE):
        raise DimensionError(f"Expected two bosonic modes, got dims {space.dims}")
    return space.dims[0] - 1, space.dims[1] - 1


def make_binomial(n_total: int, space: ModeSpace) -> PureState:
    ca, cb = _two_mode(space)
    if n_total < 0 or n_total > min(ca, cb):
        raise DimensionError(f"Binomial N={n_total} needs both cutoffs >= N, got ({ca}, {cb})")
    psi = np.zeros(space.dims, dtype=complex)
    n = np.arange(n_total + 1)
    log_c = 0.5 * (gammaln(n_total + 1) - gammaln(n + 1) - gammaln(n_total - n + 1)) - 0.5 * n_total * np.log(2.0)
    psi[n_total - n, n] = np.exp(log_c)
    return PureState.normalized(space, psi)


def make_two_mode_squeezed(zeta: complex, space: ModeSpace) -> PureState:
    ca, cb = _two_mode(space)
    cutoff = min(ca, cb)
    r = abs(zeta)
    if r == 0:
        psi = np.zeros(space.dims, dtype=complex)
        psi[0, 0] = 1.0
        return PureState(space, psi)
    t = np.tanh(r)
    tail = t ** (2 * (cutoff + 1))
    if tail > 1e-8:
        raise TruncationError(f"Two-mode squeezed zeta={zeta}: tail {tail:.3g} beyond cutoff {cutoff} exceeds 1e-8")
    n = np.arange(cutoff + 1)
    coeff = (-np.exp(1j * np.angle(zeta)) * t) ** n / np.cosh(r)
    psi = np.zeros(space.dims, dtype=complex)
    psi[n, n] = coeff
    return PureState.normalized(space, psi)


QUBIT_G = np.array([1.0, 0.0], dtype=complex)
QUBIT_E = np.array([0.0, 1.0], dtype=complex)


def make_qubits(bits: str) -> PureState:
    """Computational basis state from a bit string such as '01' (0 = g, 1 = e)."""
    if not bits or any(b not in "01" for b in bits):
        raise ValidationError(f"Invalid bit string '{bits}'")
    vec = np.array([1.0 + 0j])
    for b in bits:
        vec = np.kron(vec, QUBIT_E if b == "1" else QUBIT_G)
    return PureState(ModeSpace.qubits(len(bits)), vec)


BELL_STATES = {
    "psi_plus": ((0, 1.0), (3, 1.0)),
    "psi_minus": ((0, 1.0), (3, -1.0)),
    "phi_plus": ((1, 1.0), (2, 1.0)),
    "phi_minus": ((1, 1.0), (2, -1.0)),
}


def make_bell(kind: str = "psi_plus") -> PureState:
    """psi_plus = (|00> + |11>)/sqrt(2), phi_plus = (|01> + |10>)/sqrt(2)."""
    if kind not in BELL_STATES:
        raise ValidationError(f"Unknown Bell state '{kind}'. Use one of {sorted(BELL_STATES)}")
    vec = np.zeros(4, dtype=complex)
    for idx, c in BELL_STATES[kind]:
        vec[idx] = c
    return PureState.normalized(ModeSpace.qubits(2), vec)


def make_spin_coherent(theta: float, phi: float, n_qubits: int = 2) -> PureState:
    """Product of n copies of cos(theta/2)|g> + e^{i phi} sin(theta/2)|e>."""
    one = np.array([np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2)], dtype=complex)
    vec = np.array([1.0 + 0j])
    for _ in range(n_qubits):
        vec = np.kron(vec, one)
    return PureState.normalized(ModeSpace.qubits(n_qubits), vec)


# --------------------------------------------------------------------------- algebra


def tensor(a: State, b: State) -> State:
    space = a.space + b.space
    if isinstance(a, PureState) and isinstance(b, PureState):
        return PureState.normalized(space, np.kron(a.amplitudes, b.amplitudes))
    ma, mb = as_density(a).matrix, as_density(b).matrix
    return DensityMatrix(space, np.kron(ma, mb))


def _ptrace_pure(psi: PureState, keep: List[int]) -> np.ndarray:
    dims = psi.space.dims
    rest = [i for i in range(len(dims)) if i not in keep]
    t = psi.tensor_view().transpose(keep + rest)
    dk = int(np.prod([dims[i] for i in keep]))
    m = t.reshape(dk, -1)
    return m @ m.conj().T


def _ptrace_mixed(rho: DensityMatrix, keep: List[int]) -> np.ndarray:
    dims = rho.space.dims
    n = len(dims)
    t = rho.matrix.reshape(dims + dims)
    ket = list(range(n))
    bra = [n + i if i in keep else i for i in range(n)]
    out = [i for i in keep] + [n + i for i in keep]
    dk = int(np.prod([dims[i] for i in keep]))
    return np.einsum(t, ket + bra, out).reshape(dk, dk)


def partial_trace(state: State, keep: Union[int, Sequence[int]]) -> DensityMatrix:
    """Reduced density matrix on `keep` (subsystems kept in ascending order)."""
    keep_list = state.space.check_index([keep] if isinstance(keep, (int, np.integer)) else keep)
    if isinstance(state, PureState):
        m = _ptrace_pure(state, keep_list)
    else:
        m = _ptrace_mixed(state, keep_list)
    m = 0.5 * (m + m.conj().T)
    return DensityMatrix(state.space.subspace(keep_list), m, check_psd=False)


def purity(state: State) -> float:
    if isinstance(state, PureState):
        return 1.0
    return float(np.sum(np.abs(state.matrix) ** 2))


def fidelity(a: State, b: State) -> float:
    """|<a|b>|^2 for pure inputs, <psi|rho|psi> when one side is mixed."""
    if a.space.dims != b.space.dims:
        raise DimensionError(f"Fidelity between spaces {a.space.dims} and {b.space.dims}")
    if isinstance(a, PureState) and isinstance(b, PureState):
        return float(abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2)
    if isinstance(a, PureState):
        a, b = b, a
    if isinstance(b, PureState):
        return float(np.vdot(b.amplitudes, a.matrix @ b.amplitudes).real)
    raise ValidationError("fidelity() needs at least one pure state")


def mean_photon_number(state: State, mode: int = 0) -> float:
    space = state.space
    if space.kinds[mode] != MODE:
        raise DimensionError(f"Subsystem {mode} is not a bosonic mode")
    reduced = partial_trace(state, [mode])
    return float(np.real(np.sum(np.arange(space.dims[mode]) * np.diag(reduced.matrix))))


def photon_distribution(state: State, mode: int = 0) -> np.ndarray:
    reduced = partial_trace(state, [mode])
    return np.clip(np.real(np.diag(reduced.matrix)), 0.0, None)
