"""
Eigensystems, unitary evolution, analytic propagators and parameter sweeps.

Number-conserving models are block-diagonalised on the excitation number and
each block is diagonalised densely. Only blocks with N <= the smallest Fock
cutoff are complete; a state with more than TAIL_TOLERANCE weight elsewhere is
rejected.
"""
from __future__ import annotations

import dataclasses
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import eigh, expm

from .errors import DimensionError, TruncationError, ValidationError
from .fock import (
    MAX_DENSITY_ENTRIES,
    TAIL_TOLERANCE,
    DensityMatrix,
    ModeSpace,
    PureState,
    State,
    coherent_amplitudes,
    make_coherent,
)
from .hamiltonians import (
    BEC,
    AtomField,
    HamiltonianSpec,
    KerrCubic,
    NMRSpin,
    build_hamiltonian_sparse,
    complete_sector_limit,
    default_space,
    excitation_numbers,
)
from .operators import create

LOG = logging.getLogger("qtomo")

RATIONAL_TOLERANCE = 1e-12
DENOMINATOR_CAP = 10 ** 9


@dataclass
class EigenSystem:
    """Eigenpairs of one excitation sector (or of the whole space when nothing is conserved)."""

    space: ModeSpace
    basis: np.ndarray
    energies: np.ndarray
    states: np.ndarray = field(repr=False)
    labels: List[Tuple[int, int]]

    def state(self, k: int) -> PureState:
        amps = np.zeros(self.space.total, dtype=complex)
        amps[self.basis] = self.states[:, k]
        return PureState.normalized(self.space, amps)

    def residual(self, h_block: np.ndarray) -> float:
        r = h_block @ self.states - self.states * self.energies[None, :]
        return float(np.max(np.abs(r))) if r.size else 0.0


class Propagator:
    """Cached sector eigensystems of one (spec, space) pair."""

    def __init__(self, spec: HamiltonianSpec, space: ModeSpace):
        self.spec = spec
        self.space = space
        self.h = build_hamiltonian_sparse(spec, space)
        self.numbers = excitation_numbers(spec, space)
        self.sectors: Dict[int, EigenSystem] = {}
        if self.numbers is None:
            dense = self.h.toarray()
            e, v = eigh(dense)
            basis = np.arange(space.total)
            self.sectors[-1] = EigenSystem(space, basis, e, v, [(-1, k) for k in range(e.size)])
            self.complete_limit = None
        else:
            self.complete_limit = complete_sector_limit(space)
            for n in np.unique(self.numbers):
                self.sectors[int(n)] = self._solve(int(n))
        LOG.debug("Propagator %s on dims %s: %d sectors", spec.kind, space.dims, len(self.sectors))

    def _solve(self, n: int) -> EigenSystem:
        idx = np.flatnonzero(self.numbers == n)
        block = self.h[idx][:, idx].toarray()
        if isinstance(self.spec, KerrCubic):
            e = np.real(np.diag(block))
            v = np.eye(idx.size, dtype=complex)
        else:
            e, v = eigh(block)
        return EigenSystem(self.space, idx, e, v, [(n, k) for k in range(e.size)])

    def sector(self, n: int) -> EigenSystem:
        if n not in self.sectors:
            raise DimensionError(f"No excitation sector N={n} in space {self.space.dims}")
        if self.complete_limit is not None and n > self.complete_limit:
            raise TruncationError(f"Sector N={n} is cut by the Fock cutoff {self.complete_limit}")
        return self.sectors[n]

    def _check_weight(self, probs: np.ndarray) -> None:
        if self.complete_limit is None:
            return
        outside = float(np.sum(probs[self.numbers > self.complete_limit]))
        if outside > TAIL_TOLERANCE:
            raise TruncationError(
                f"State weight {outside:.3g} lies in excitation sectors above {self.complete_limit}; raise the cutoff"
            )

    def unitary(self, t: float) -> np.ndarray:
        n = self.space.total
        if n * n > MAX_DENSITY_ENTRIES:
            raise DimensionError(f"Dense propagator of dimension {n} exceeds {MAX_DENSITY_ENTRIES} entries")
        u = np.zeros((n, n), dtype=complex)
        for es in self.sectors.values():
            block = (es.states * np.exp(-1j * es.energies * t)[None, :]) @ es.states.conj().T
            u[np.ix_(es.basis, es.basis)] = block
        return u

    def evolve(self, state: State, t: float) -> State:
        if state.space != self.space:
            raise DimensionError(f"State dims {state.space.dims} differ from propagator dims {self.space.dims}")
        if isinstance(state, PureState):
            psi = state.amplitudes
            self._check_weight(np.abs(psi) ** 2)
            out = np.zeros_like(psi)
            for es in self.sectors.values():
                coeff = es.states.conj().T @ psi[es.basis]
                out[es.basis] = es.states @ (np.exp(-1j * es.energies * t) * coeff)
            return PureState.normalized(self.space, out)
        self._check_weight(np.real(np.diag(state.matrix)))
        u = self.unitary(t)
        rho = u @ state.matrix @ u.conj().T
        return DensityMatrix(self.space, 0.5 * (rho + rho.conj().T), check_psd=False)


@lru_cache(maxsize=16)
def propagator(spec: HamiltonianSpec, space: ModeSpace) -> Propagator:
    return Propagator(spec, space)


def evolve(state: State, spec: HamiltonianSpec, t: float) -> State:
    if t == 0:
        return state
    return propagator(spec, state.space).evolve(state, t)


def energy(state: State, spec: HamiltonianSpec) -> float:
    h = propagator(spec, state.space).h
    if isinstance(state, PureState):
        return float(np.vdot(state.amplitudes, h @ state.amplitudes).real)
    return float(np.real(np.asarray(h @ state.matrix).diagonal().sum()))


# --------------------------------------------------------------------------- BEC closed form


def bec_one_body(spec: BEC) -> np.ndarray:
    return np.array(
        [[spec.omega0 + spec.omega1, -spec.lam], [-spec.lam, spec.omega0 - spec.omega1]], dtype=complex
    )


def bec_amplitudes_t(alpha_a: complex, alpha_b: complex, spec: BEC, t: float) -> Tuple[complex, complex]:
    """(alpha(t), beta(t)) of the coherent pair under the one-body part, omega0 phase included."""
    u = expm(-1j * bec_one_body(spec) * t)
    at, bt = u @ np.array([alpha_a, alpha_b], dtype=complex)
    return complex(at), complex(bt)


def bec_analytic_state(
    alpha_a: complex,
    alpha_b: complex,
    m1: int,
    m2: int,
    spec: BEC,
    t: float,
    space: ModeSpace,
) -> PureState:
    """
    a^dagger^m1 b^dagger^m2 |alpha_a, alpha_b> evolved under the BEC Hamiltonian.

    The quadratic part maps coherent pairs to coherent pairs and creation
    operators to the columns of exp(-iMt); U N^2 only adds number phases.
    """
    if m1 not in (0, 1, 2) or m2 not in (0, 1, 2):
        raise ValidationError(f"Photon-added orders must be 0, 1 or 2, got ({m1}, {m2})")
    if space.n_subsystems != 2:
        raise DimensionError(f"BEC state needs two modes, got dims {space.dims}")
    ca, cb = space.dims[0] - 1, space.dims[1] - 1
    u = expm(-1j * bec_one_body(spec) * t)
    at, bt = u @ np.array([alpha_a, alpha_b], dtype=complex)
    ha, hb = ca + m1 + m2, cb + m1 + m2
    # tail checks on the padded spaces
    make_coherent(complex(at), ModeSpace.single(ha))
    make_coherent(complex(bt), ModeSpace.single(hb))
    psi = np.outer(coherent_amplitudes(complex(at), ha), coherent_amplitudes(complex(bt), hb))
    ad, bd = create(ha + 1), create(hb + 1)
    for _ in range(m1):
        psi = u[0, 0] * (ad @ psi) + u[1, 0] * (psi @ bd.T)
    for _ in range(m2):
        psi = u[0, 1] * (ad @ psi) + u[1, 1] * (psi @ bd.T)
    full = float(np.sum(np.abs(psi) ** 2))
    psi = psi[: ca + 1, : cb + 1]
    deficit = 1.0 - float(np.sum(np.abs(psi) ** 2)) / full
    if deficit > TAIL_TOLERANCE:
        raise TruncationError(f"BEC state loses {deficit:.3g} beyond cutoffs ({ca}, {cb})")
    ntot = np.add.outer(np.arange(ca + 1), np.arange(cb + 1))
    psi = psi * np.exp(-1j * spec.U * t * ntot ** 2)
    return PureState.normalized(space, psi)


# --------------------------------------------------------------------------- revivals


def _rational(x: float) -> Optional[Fraction]:
    """
    Small-denominator fraction for x, or None.

    Every double has a close fraction below the cap, so x only counts as
    rational when the best approximation is already reached at a 100x smaller
    denominator cap.
    """
    frac = Fraction(x).limit_denominator(DENOMINATOR_CAP)
    if frac == 0 or abs(x - float(frac)) > RATIONAL_TOLERANCE * abs(x):
        return None
    if Fraction(x).limit_denominator(DENOMINATOR_CAP // 100) != frac:
        return None
    return frac


def revival_time(spec: HamiltonianSpec) -> Optional[float]:
    """pi LCM(1/chi1, 1/chi2) for KerrCubic; pi/U or 2pi/U for commensurate BEC parameters."""
    if isinstance(spec, KerrCubic):
        c1, c2 = abs(spec.chi1), abs(spec.chi2)
        if c1 == 0 and c2 == 0:
            return None
        if c2 == 0:
            return float(np.pi / c1)
        if c1 == 0:
            return float(np.pi / c2)
        frac = _rational(c2 / c1)
        if frac is None:
            LOG.info("chi2/chi1=%.16g is not rational within tolerance; no revival", c2 / c1)
            return None
        return float(np.pi * frac.denominator / c1)
    if isinstance(spec, BEC):
        m = spec.omega0 / spec.U
        mp = spec.lambda1 / spec.U
        if abs(m - round(m)) > 1e-9 or abs(mp - round(mp)) > 1e-9:
            return None
        if (int(round(m)) + int(round(mp))) % 2 == 1:
            return float(np.pi / spec.U)
        return float(2 * np.pi / spec.U)
    return None


# --------------------------------------------------------------------------- NMR closed form


def _bell_projectors() -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    psi = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)
    phi = np.array([0, 1, 1, 0], dtype=complex) / np.sqrt(2)
    return np.outer(psi, psi.conj()), np.outer(phi, phi.conj()), np.outer(psi, phi.conj())


def nmr_rho_t(chi_s: float, t: float) -> DensityMatrix:
    """
    rho_MAB(t) for the star-topology spin system, ordered M x A x B.

    At t = 0 the A,B pair is phi+ when M is |+> and psi+ when M is |->.
    """
    pp, ff, pf = _bell_projectors()
    plus = np.array([[0.5, 0.5], [0.5, 0.5]], dtype=complex)
    minus = np.array([[0.5, -0.5], [-0.5, 0.5]], dtype=complex)
    c2 = np.cos(2 * chi_s * t) ** 2
    s2 = np.sin(2 * chi_s * t) ** 2
    s4 = np.sin(4 * chi_s * t)
    fp = pf.conj().T
    rho = 0.5 * np.kron(plus, c2 * ff + s2 * pp)
    rho = rho + 0.5 * np.kron(minus, c2 * pp + s2 * ff)
    rho = rho + 0.25j * s4 * np.kron(np.eye(2), fp - pf)
    return DensityMatrix(ModeSpace.qubits(3), rho)


def nmr_rho_ab(chi_s: float, t: float) -> DensityMatrix:
    pp, ff, pf = _bell_projectors()
    s4 = np.sin(4 * chi_s * t)
    return DensityMatrix(ModeSpace.qubits(2), 0.5 * (pp + ff) + 0.5j * s4 * (pf.conj().T - pf))


# --------------------------------------------------------------------------- sweeps


@dataclass
class SweepResult:
    param: str
    values: np.ndarray
    sector: int
    systems: List[EigenSystem]

    def energies(self) -> np.ndarray:
        return np.array([es.energies for es in self.systems])

    def min_gaps(self) -> np.ndarray:
        """Smallest adjacent level gap per sweep point."""
        e = self.energies()
        if e.shape[1] < 2:
            return np.full(e.shape[0], np.inf)
        return np.min(np.diff(e, axis=1), axis=1)


def spectrum_sweep(
    spec: HamiltonianSpec,
    param: str,
    values: Sequence[float],
    n_sector: int,
    space: Optional[ModeSpace] = None,
) -> SweepResult:
    """Eigensystem of excitation sector `n_sector` for each value of one spec field."""
    names = {f.name for f in dataclasses.fields(spec)}
    if param not in names:
        raise ValidationError(f"{spec.kind} has no parameter '{param}'. Available: {sorted(names)}")
    if isinstance(spec, NMRSpin):
        raise ValidationError("NMRSpin has no conserved excitation sectors to sweep")
    if space is None:
        space = default_space(spec, n_sector)
    systems: List[EigenSystem] = []
    vals = np.asarray(values, dtype=float)
    for v in vals:
        point = dataclasses.replace(spec, **{param: float(v)})
        systems.append(Propagator(point, space).sector(n_sector))
    LOG.info("Swept %s over %d values in sector N=%d", param, vals.size, n_sector)
    return SweepResult(param, vals, n_sector, systems)


def sweep_values(start: float, stop: float, step: float) -> np.ndarray:
    """Midpoint grid strictly inside (start, stop) with the given step."""
    n = int(round((stop - start) / step))
    if n < 1:
        raise ValidationError(f"Empty sweep range {start}..{stop} with step {step}")
    return start + step * (np.arange(n) + 0.5)


def tavis_disorder_draw(
    mean_gap: float,
    sigma_frac: float,
    M: int,
    seed: int,
    epsilon: float = 0.0,
) -> Tuple[float, ...]:
    """Qubit splittings sqrt(Delta_p^2 + epsilon^2) with Delta_p ~ N(mean, sigma_frac * mean)."""
    if M < 1:
        raise ValidationError(f"Need at least one qubit, got M={M}")
    rng = np.random.default_rng(seed)
    deltas = mean_gap + sigma_frac * mean_gap * rng.standard_normal(M) if sigma_frac > 0 else np.full(M, mean_gap)
    return tuple(float(x) for x in np.sqrt(deltas ** 2 + epsilon ** 2))
