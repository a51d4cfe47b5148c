"""
Squeezing diagnostics: Hong-Mandel higher-order moments, Hillery amplitude-powered
squeezing, entropic squeezing, and first and second order spin squeezing for a
pair of qubits.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from math import comb, factorial
from typing import Tuple, Union

import numpy as np
from scipy.integrate import simpson
from scipy.optimize import minimize, minimize_scalar
from scipy.special import factorial2

from .errors import DimensionError, UndefinedQuantifierError, ValidationError
from .fock import QUBIT, DensityMatrix, State, as_density
from .moments import moment_from_tomogram_single, moment_from_tomogram_two, padded_operators
from .operators import SPIN_OPS, embed
from .tomography import Tomogram

LOG = logging.getLogger("qtomo")

SQUEEZE_MARGIN = 1e-9
ENTROPY_BOUND = 0.5 * (1.0 + np.log(np.pi))
SPIN_THRESHOLD = 0.5
SPIN_SECOND_ORDER_THRESHOLD = 0.125
SPIN_DIRECTIONS = 800
SPIN_PAIRS = 320
PAIR_CIRCLE_STEPS = 72
F_FLOOR = 1e-12


@dataclass(frozen=True)
class SqueezeReport:
    kind: str
    q: int
    value: float
    threshold: float

    @property
    def squeezed(self) -> bool:
        return self.value < self.threshold - SQUEEZE_MARGIN

    def as_row(self) -> dict:
        return {
            "kind": self.kind,
            "q": self.q,
            "value": self.value,
            "threshold": self.threshold,
            "squeezed": self.squeezed,
        }


def _check_q(q: int) -> None:
    if q < 1:
        raise ValidationError(f"Squeezing order q must be >= 1, got {q}")


def hong_mandel_threshold(q: int, modes: int = 1) -> float:
    """Coherent-state value of the 2q-th central quadrature moment."""
    _check_q(q)
    base = 2.0 if modes == 1 else 4.0
    return float(factorial2(2 * q - 1)) / base ** q


# --------------------------------------------------------------------------- quadrature moments


def hong_mandel_moment(t: Tomogram, theta: float, q: int) -> float:
    """<(Delta X_theta)^(2q)> of one tomogram slice."""
    _check_q(q)
    if t.modes != 1:
        raise DimensionError("hong_mandel_moment needs a single-mode tomogram")
    x = t.grid.x
    w = t.slice(theta)
    norm = simpson(w, x=x)
    mean = simpson(x * w, x=x) / norm
    return float(simpson((x - mean) ** (2 * q) * w, x=x) / norm)


def hong_mandel_report(t: Tomogram, theta: float, q: int) -> SqueezeReport:
    return SqueezeReport("hong_mandel", q, hong_mandel_moment(t, theta, q), hong_mandel_threshold(q, 1))


def two_mode_quadrature_moment(t: Tomogram, q: int) -> float:
    """<(Delta eta)^(2q)> with eta = (X_A + X_B)/2 read off the thetaA = thetaB = 0 slice."""
    _check_q(q)
    if t.modes != 2:
        raise DimensionError("two_mode_quadrature_moment needs a two-mode tomogram")
    xa, xb = t.grids[0].x, t.grids[1].x
    w = t.slice(0.0, 0.0)
    eta = 0.5 * (xa[:, None] + xb[None, :])

    def integrate(f: np.ndarray) -> float:
        return float(simpson(simpson(f, x=xb, axis=1), x=xa))

    norm = integrate(w)
    mean = integrate(eta * w) / norm
    return integrate((eta - mean) ** (2 * q) * w) / norm


def two_mode_quadrature_report(t: Tomogram, q: int) -> SqueezeReport:
    return SqueezeReport("two_mode_quadrature", q, two_mode_quadrature_moment(t, q), hong_mandel_threshold(q, 2))


def tomographic_entropy_slice(t: Tomogram, theta: float) -> float:
    """Shannon entropy (natural log) of one single-mode slice."""
    if t.modes != 1:
        raise DimensionError("tomographic_entropy_slice needs a single-mode tomogram")
    w = t.slice(theta)
    safe = np.where(w > 0, w, 1.0)
    return float(-simpson(np.where(w > 0, w * np.log(safe), 0.0), x=t.grid.x))


def entropic_squeezing_report(t: Tomogram, theta: float) -> SqueezeReport:
    return SqueezeReport("entropic", 1, tomographic_entropy_slice(t, theta), float(ENTROPY_BOUND))


# --------------------------------------------------------------------------- Hillery squeezing


def _hillery(which: str, c: float, mean_a: complex, mean_a2: complex, n_aa: float, f_sum: float, q: int) -> SqueezeReport:
    """
    Z1 = (A + A^dagger)/c and Z2 = (A - A^dagger)/(i c) with A the summed q-th
    powers; [Z1, Z2] = i F with F = 2 [A, A^dagger] / c^2.
    """
    f = 2.0 * f_sum / c ** 2
    if abs(f) < F_FLOOR:
        raise UndefinedQuantifierError(f"|<F_{q}>| = {abs(f):.3g} is below {F_FLOOR}")
    if which == "Z1":
        mean = 2.0 * mean_a.real / c
        second = (2.0 * mean_a2.real + 2.0 * n_aa + f_sum) / c ** 2
    elif which == "Z2":
        mean = 2.0 * mean_a.imag / c
        second = (-2.0 * mean_a2.real + 2.0 * n_aa + f_sum) / c ** 2
    else:
        raise ValidationError(f"which must be 'Z1' or 'Z2', got '{which}'")
    var = second - mean ** 2
    return SqueezeReport(f"hillery_{which}", q, float((2.0 * var - abs(f)) / abs(f)), 0.0)


def _commutator_expectation_single(q: int, moment) -> float:
    """<[a^q, a^dagger^q]> = sum_j C(q,j)^2 j! <a^dagger^(q-j) a^(q-j)>."""
    return float(sum(comb(q, j) ** 2 * factorial(j) * moment(q - j, q - j).real for j in range(1, q + 1)))


def _hillery_from_tomogram(t: Tomogram, q: int, which: str) -> SqueezeReport:
    if t.modes == 1:
        mom = lambda k, l: moment_from_tomogram_single(t, k, l)  # noqa: E731
        mean_a = mom(0, q)
        mean_a2 = mom(0, 2 * q)
        n_aa = mom(q, q).real
        f_sum = _commutator_expectation_single(q, mom)
        return _hillery(which, np.sqrt(2.0), mean_a, mean_a2, n_aa, f_sum, q)
    mom2 = lambda k, l, m, n: moment_from_tomogram_two(t, k, l, m, n)  # noqa: E731
    mean_a = mom2(0, q, 0, 0) + mom2(0, 0, 0, q)
    mean_a2 = mom2(0, 2 * q, 0, 0) + 2.0 * mom2(0, q, 0, q) + mom2(0, 0, 0, 2 * q)
    n_aa = (mom2(q, q, 0, 0) + mom2(0, 0, q, q)).real + 2.0 * mom2(q, 0, 0, q).real
    f_sum = _commutator_expectation_single(q, lambda k, l: mom2(k, l, 0, 0)) + _commutator_expectation_single(
        q, lambda k, l: mom2(0, 0, k, l)
    )
    return _hillery(which, 2.0 * np.sqrt(2.0), mean_a, mean_a2, n_aa, f_sum, q)


def _hillery_from_state(state: State, q: int, which: str) -> SqueezeReport:
    modes = state.space.mode_indices
    if len(modes) not in (1, 2):
        raise DimensionError(f"Hillery squeezing needs one or two bosonic modes, got {len(modes)}")
    if which not in ("Z1", "Z2"):
        raise ValidationError(f"which must be 'Z1' or 'Z2', got '{which}'")
    rho, ops = padded_operators(state, [2 * q])
    mp = np.linalg.matrix_power
    A = sum(mp(ops[i][0], q) for i in modes)
    c = np.sqrt(2.0) if len(modes) == 1 else 2.0 * np.sqrt(2.0)
    z1 = (A + A.conj().T) / c
    z2 = (A - A.conj().T) / (1j * c)
    f = -1j * (z1 @ z2 - z2 @ z1)
    f_mean = float(np.trace(f @ rho).real)
    if abs(f_mean) < F_FLOOR:
        raise UndefinedQuantifierError(f"|<F_{q}>| = {abs(f_mean):.3g} is below {F_FLOOR}")
    z = z1 if which == "Z1" else z2
    mean = np.trace(z @ rho).real
    var = float(np.trace(z @ z @ rho).real - mean ** 2)
    return SqueezeReport(f"hillery_{which}", q, (2.0 * var - abs(f_mean)) / abs(f_mean), 0.0)


def hillery_dq(source: Union[Tomogram, State], q: int, which: str = "Z1") -> SqueezeReport:
    """D_q of amplitude-powered squeezing; squeezed when D_q < 0."""
    _check_q(q)
    if isinstance(source, Tomogram):
        return _hillery_from_tomogram(source, q, which)
    return _hillery_from_state(source, q, which)


# --------------------------------------------------------------------------- spin squeezing


def _spin_pair(rho_2qubit: State) -> DensityMatrix:
    rho = as_density(rho_2qubit)
    if rho.space.kinds != (QUBIT, QUBIT):
        raise DimensionError(f"Spin squeezing needs a two-qubit state, got {rho.space.kinds}")
    return rho


def total_spin_operators() -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    dims = (2, 2)
    return tuple(embed(SPIN_OPS[a], 0, dims) + embed(SPIN_OPS[a], 1, dims) for a in "xyz")


def fibonacci_directions(n: int) -> np.ndarray:
    i = np.arange(n) + 0.5
    z = 1.0 - 2.0 * i / n
    r = np.sqrt(1.0 - z ** 2)
    phi = np.pi * (3.0 - np.sqrt(5.0)) * np.arange(n)
    return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])


def _unit(theta: float, phi: float) -> np.ndarray:
    return np.array([np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)])


def _perp_basis(w: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    w = w / np.linalg.norm(w)
    trial = np.array([1.0, 0.0, 0.0]) if abs(w[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = np.cross(w, trial)
    e1 /= np.linalg.norm(e1)
    return e1, np.cross(w, e1)


def spin_moments(rho: DensityMatrix) -> Tuple[np.ndarray, np.ndarray]:
    """Mean spin vector and the symmetrised second-moment matrix."""
    J = total_spin_operators()
    mean = np.array([np.trace(j @ rho.matrix).real for j in J])
    G = np.empty((3, 3))
    for i in range(3):
        for k in range(3):
            G[i, k] = 0.5 * np.trace((J[i] @ J[k] + J[k] @ J[i]) @ rho.matrix).real
    return mean, G


def spin_min_variance(rho_2qubit: State) -> SqueezeReport:
    """
    Minimum of <(J.v)^2> - <J.v>^2 over directions v perpendicular to <J>,
    or over the whole sphere when <J> vanishes.
    """
    rho = _spin_pair(rho_2qubit)
    mean, G = spin_moments(rho)

    def var(v: np.ndarray) -> float:
        return float(v @ G @ v - (v @ mean) ** 2)

    if np.linalg.norm(mean) > 1e-10:
        e1, e2 = _perp_basis(mean)
        phis = np.linspace(0.0, np.pi, SPIN_DIRECTIONS, endpoint=False)
        vals = [var(np.cos(p) * e1 + np.sin(p) * e2) for p in phis]
        best = phis[int(np.argmin(vals))]
        step = np.pi / SPIN_DIRECTIONS
        res = minimize_scalar(
            lambda p: var(np.cos(p) * e1 + np.sin(p) * e2),
            bounds=(best - step, best + step),
            method="bounded",
            options={"xatol": 1e-12},
        )
        value = min(float(res.fun), float(np.min(vals)))
    else:
        dirs = fibonacci_directions(SPIN_DIRECTIONS)
        vals = np.array([var(v) for v in dirs])
        v0 = dirs[int(np.argmin(vals))]
        th0, ph0 = np.arccos(np.clip(v0[2], -1, 1)), np.arctan2(v0[1], v0[0])
        res = minimize(lambda p: var(_unit(*p)), x0=[th0, ph0], method="Nelder-Mead", options={"xatol": 1e-10, "fatol": 1e-14})
        value = min(float(res.fun), float(np.min(vals)))
    return SqueezeReport("spin_first_order", 1, value, SPIN_THRESHOLD)


def _dyad_tensor(rho: DensityMatrix) -> np.ndarray:
    """T[i,j,k,l] = <S_ij S_kl> with S_ij = {J_i, J_j}/2."""
    J = total_spin_operators()
    S = [[0.5 * (J[i] @ J[j] + J[j] @ J[i]) for j in range(3)] for i in range(3)]
    T = np.empty((3, 3, 3, 3))
    for i in range(3):
        for j in range(3):
            for k in range(3):
                for l in range(3):
                    T[i, j, k, l] = np.trace(S[i][j] @ S[k][l] @ rho.matrix).real
    return T


def spin_second_order_variance(rho_2qubit: State) -> SqueezeReport:
    """
    Minimum variance of the symmetrised dyad component J(v1, v2) over pairs
    with <J(v1, v2)> = 0. For each lattice direction v1 the admissible v2 form
    the great circle orthogonal to G v1.
    """
    rho = _spin_pair(rho_2qubit)
    _, G = spin_moments(rho)
    T = _dyad_tensor(rho)

    def variance(v1: np.ndarray, v2: np.ndarray) -> float:
        return float(np.einsum("i,j,k,l,ijkl->", v1, v2, v1, v2, T))

    phis = np.linspace(0.0, np.pi, PAIR_CIRCLE_STEPS, endpoint=False)
    best_val = np.inf
    best: Tuple[np.ndarray, np.ndarray, np.ndarray, float] = None
    for v1 in fibonacci_directions(SPIN_PAIRS):
        w = G @ v1
        if np.linalg.norm(w) < 1e-12:
            w = v1
        e1, e2 = _perp_basis(w)
        for p in phis:
            v2 = np.cos(p) * e1 + np.sin(p) * e2
            if abs(v1 @ G @ v2) > 1e-10:
                continue
            val = variance(v1, v2)
            if val < best_val:
                best_val, best = val, (v1, e1, e2, p)
    if best is None:
        raise UndefinedQuantifierError("No direction pair satisfies the orthogonality condition")
    v1, e1, e2, p0 = best
    step = np.pi / PAIR_CIRCLE_STEPS
    res = minimize_scalar(
        lambda p: variance(v1, np.cos(p) * e1 + np.sin(p) * e2),
        bounds=(p0 - step, p0 + step),
        method="bounded",
        options={"xatol": 1e-12},
    )
    value = min(best_val, float(res.fun))
    return SqueezeReport("spin_second_order", 2, value, SPIN_SECOND_ORDER_THRESHOLD)
