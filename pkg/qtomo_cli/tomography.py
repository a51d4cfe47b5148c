"""
Optical, hybrid and spin tomograms.

The rotated quadrature is X_theta = (a e^{-i theta} + a^dagger e^{i theta})/sqrt(2),
so <X, theta | n> = e^{-i n theta} phi_n(X) with phi_n the normalised oscillator
eigenfunctions. Those are evaluated by the normalised three-term recurrence
with a running log-scale, never through raw Hermite polynomials.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.integrate import simpson
from scipy.ndimage import gaussian_filter1d
from scipy.signal import find_peaks

from .errors import DimensionError, ValidationError
from .fock import MODE, QUBIT, DensityMatrix, ModeSpace, PureState, State, as_density

LOG = logging.getLogger("qtomo")

MAX_TOMOGRAM_ENTRIES = 2 ** 26
MAX_HERMITE_ORDER = 1000
SLICE_TOLERANCE = 1e-4
ANGLE_TOLERANCE = 1e-9

AxisSpec = Union[str, Tuple[float, float]]


@dataclass(frozen=True)
class QuadGrid:
    x_min: float
    x_max: float
    n_x: int
    thetas: Tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "thetas", tuple(float(t) for t in self.thetas))
        if self.n_x < 3 or self.n_x % 2 == 0:
            raise ValidationError(f"n_x={self.n_x} must be odd and >= 3 for Simpson integration")
        if not self.x_min < self.x_max:
            raise ValidationError(f"x_min={self.x_min} must be below x_max={self.x_max}")
        th = np.asarray(self.thetas)
        if th.size == 0:
            raise ValidationError("Quadrature grid needs at least one angle")
        if np.any(np.diff(th) <= 0):
            raise ValidationError("Grid angles must be sorted and distinct")
        if th[0] < -ANGLE_TOLERANCE or th[-1] >= 2 * np.pi:
            raise ValidationError("Grid angles must lie in [0, 2pi)")

    @classmethod
    def uniform(
        cls,
        x_min: float = -10.0,
        x_max: float = 10.0,
        n_x: int = 1001,
        n_theta: int = 8,
        full_circle: bool = False,
    ) -> "QuadGrid":
        """Equal-step open angle grid over [0, pi) or, with full_circle, [0, 2pi)."""
        span = 2 * np.pi if full_circle else np.pi
        return cls(x_min, x_max, n_x, tuple(np.arange(n_theta) * span / n_theta))

    def with_thetas(self, thetas: Sequence[float]) -> "QuadGrid":
        return QuadGrid(self.x_min, self.x_max, self.n_x, tuple(sorted(float(t) for t in thetas)))

    @property
    def x(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.n_x)

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / (self.n_x - 1)

    def theta_index(self, theta: float) -> int:
        th = np.asarray(self.thetas)
        diff = np.abs(np.angle(np.exp(1j * (th - theta))))
        idx = int(np.argmin(diff))
        if diff[idx] > ANGLE_TOLERANCE:
            raise ValidationError(f"Angle {theta:.12g} not on the grid")
        return idx

    def has_theta(self, theta: float) -> bool:
        th = np.asarray(self.thetas)
        return bool(np.min(np.abs(np.angle(np.exp(1j * (th - theta))))) <= ANGLE_TOLERANCE)


@dataclass(frozen=True)
class Tomogram:
    """values[theta, X] for one mode, values[thetaA, thetaB, XA, XB] for two."""

    grids: Tuple[QuadGrid, ...]
    values: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=float)
        if len(self.grids) not in (1, 2):
            raise DimensionError("Tomograms have one or two modes")
        expected = tuple(len(g.thetas) for g in self.grids) + tuple(g.n_x for g in self.grids)
        if v.shape != expected:
            raise DimensionError(f"Tomogram values shape {v.shape} != {expected}")
        if np.min(v) < -1e-10:
            raise ValidationError(f"Tomogram has negative entry {np.min(v):.3g}")
        v = np.clip(v, 0.0, None)
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @property
    def modes(self) -> int:
        return len(self.grids)

    @property
    def grid(self) -> QuadGrid:
        return self.grids[0]

    def slice(self, theta: float, theta_b: Optional[float] = None) -> np.ndarray:
        if self.modes == 1:
            return self.values[self.grid.theta_index(theta)]
        if theta_b is None:
            raise ValidationError("Two-mode slice needs theta_a and theta_b")
        return self.values[self.grids[0].theta_index(theta), self.grids[1].theta_index(theta_b)]

    def slice_norms(self) -> np.ndarray:
        if self.modes == 1:
            return simpson(self.values, x=self.grid.x, axis=-1)
        inner = simpson(self.values, x=self.grids[1].x, axis=-1)
        return simpson(inner, x=self.grids[0].x, axis=-1)

    def check_normalization(self, tol: float = SLICE_TOLERANCE) -> float:
        err = float(np.max(np.abs(self.slice_norms() - 1.0)))
        if err > tol:
            raise ValidationError(
                f"Tomogram slice normalisation off by {err:.3g} (> {tol}); widen the X range or raise the cutoff"
            )
        return err


def _guard_entries(shape: Tuple[int, ...]) -> None:
    entries = int(np.prod(shape, dtype=np.int64))
    if entries > MAX_TOMOGRAM_ENTRIES:
        raise DimensionError(f"Tomogram with {entries} entries exceeds the {MAX_TOMOGRAM_ENTRIES} guard")


def oscillator_functions(n_max: int, x: np.ndarray) -> np.ndarray:
    """phi_n(x) for n = 0..n_max, shape (n_max+1,) + x.shape."""
    if n_max < 0 or n_max > MAX_HERMITE_ORDER:
        raise ValidationError(f"Hermite order {n_max} outside 0..{MAX_HERMITE_ORDER}")
    x = np.asarray(x, dtype=float)
    out = np.empty((n_max + 1,) + x.shape)
    log_scale = -0.5 * x * x
    prev = np.zeros_like(x)
    cur = np.full_like(x, np.pi ** -0.25)
    out[0] = cur * np.exp(log_scale)
    for n in range(n_max):
        nxt = np.sqrt(2.0 / (n + 1)) * x * cur - np.sqrt(n / (n + 1.0)) * prev
        prev, cur = cur, nxt
        big = np.abs(cur) > 1e150
        if np.any(big):
            s = np.where(big, np.abs(cur), 1.0)
            cur = cur / s
            prev = prev / s
            log_scale = log_scale + np.log(s)
        out[n + 1] = cur * np.exp(log_scale)
    return out


def hermite_weights(n_max: int, x: float, theta: float) -> np.ndarray:
    """<X, theta | n> for n = 0..n_max at a single point."""
    phi = oscillator_functions(n_max, np.asarray([x]))[:, 0]
    return phi * np.exp(-1j * np.arange(n_max + 1) * theta)


def _phases(n_levels: int, thetas: Sequence[float]) -> np.ndarray:
    return np.exp(-1j * np.outer(np.asarray(thetas), np.arange(n_levels)))


def tomogram_pure_single(psi: PureState, grid: QuadGrid, check: bool = True) -> Tomogram:
    if psi.space.n_subsystems != 1 or psi.space.kinds[0] != MODE:
        raise DimensionError(f"Single-mode tomogram of a state with dims {psi.space.dims}")
    _guard_entries((len(grid.thetas), grid.n_x))
    n = psi.space.dims[0]
    phi = oscillator_functions(n - 1, grid.x)
    amp = (_phases(n, grid.thetas) * psi.amplitudes[None, :]) @ phi
    tomo = Tomogram((grid,), np.abs(amp) ** 2)
    if check:
        tomo.check_normalization()
    return tomo


def tomogram_density_single(rho: DensityMatrix, grid: QuadGrid, check: bool = True) -> Tomogram:
    if rho.space.n_subsystems != 1 or rho.space.kinds[0] != MODE:
        raise DimensionError(f"Single-mode tomogram of a state with dims {rho.space.dims}")
    _guard_entries((len(grid.thetas), grid.n_x))
    n = rho.space.dims[0]
    phi = oscillator_functions(n - 1, grid.x)
    phases = _phases(n, grid.thetas)
    values = np.empty((len(grid.thetas), grid.n_x))
    for i in range(len(grid.thetas)):
        k = phases[i][:, None] * phi
        values[i] = np.real(np.sum(k * (rho.matrix @ k.conj()), axis=0))
    tomo = Tomogram((grid,), values)
    if check:
        tomo.check_normalization()
    return tomo


def tomogram_single(state: State, grid: QuadGrid, check: bool = True) -> Tomogram:
    if isinstance(state, PureState):
        return tomogram_pure_single(state, grid, check)
    return tomogram_density_single(state, grid, check)


def _two_mode_space(space: ModeSpace) -> None:
    if space.n_subsystems != 2 or space.kinds != (MODE, MODE):
        raise DimensionError(f"Two-mode tomogram of a state with dims {space.dims}")


def tomogram_two_mode(state: State, grid_a: QuadGrid, grid_b: QuadGrid, check: bool = True) -> Tomogram:
    _two_mode_space(state.space)
    shape = (len(grid_a.thetas), len(grid_b.thetas), grid_a.n_x, grid_b.n_x)
    _guard_entries(shape)
    da, db = state.space.dims
    phi_a = oscillator_functions(da - 1, grid_a.x)
    phi_b = oscillator_functions(db - 1, grid_b.x)
    ph_a = _phases(da, grid_a.thetas)
    ph_b = _phases(db, grid_b.thetas)
    values = np.empty(shape)
    if isinstance(state, PureState):
        c = state.tensor_view()
        for i in range(shape[0]):
            ka = ph_a[i][:, None] * phi_a
            left = ka.T @ c
            for j in range(shape[1]):
                kb = ph_b[j][:, None] * phi_b
                values[i, j] = np.abs(left @ kb) ** 2
    else:
        rho4 = state.matrix.reshape(da, db, da, db)
        for i in range(shape[0]):
            ka = ph_a[i][:, None] * phi_a
            for j in range(shape[1]):
                kb = ph_b[j][:, None] * phi_b
                values[i, j] = np.real(
                    np.einsum("nmpq,nx,my,px,qy->xy", rho4, ka, kb, ka.conj(), kb.conj(), optimize=True)
                )
    tomo = Tomogram((grid_a, grid_b), values)
    if check:
        tomo.check_normalization()
    return tomo


def reduced_tomogram(t: Tomogram, keep: str, fixed_other_theta: float = 0.0) -> Tomogram:
    """Single-mode marginal of a two-mode tomogram at one angle of the other mode."""
    if t.modes != 2:
        raise DimensionError("reduced_tomogram needs a two-mode tomogram")
    keep = keep.upper()
    if keep == "A":
        j = t.grids[1].theta_index(fixed_other_theta)
        vals = simpson(t.values[:, j], x=t.grids[1].x, axis=-1)
        return Tomogram((t.grids[0],), vals)
    if keep == "B":
        i = t.grids[0].theta_index(fixed_other_theta)
        vals = simpson(t.values[i], x=t.grids[0].x, axis=-2)
        return Tomogram((t.grids[1],), vals)
    raise ValidationError(f"keep must be 'A' or 'B', got '{keep}'")


def reduced_spread(t: Tomogram, keep: str) -> float:
    """Largest change of the reduced tomogram over the other mode's angles."""
    other = t.grids[1] if keep.upper() == "A" else t.grids[0]
    marginals = [reduced_tomogram(t, keep, th).values for th in other.thetas]
    return float(max(np.max(np.abs(m - marginals[0])) for m in marginals))


# --------------------------------------------------------------------------- spin tomograms


SPIN_AXES = {"z": (0.0, 0.0), "x": (np.pi / 2, 0.0), "y": (np.pi / 2, np.pi / 2)}


def spin_rotation(axis: AxisSpec) -> np.ndarray:
    """U(vartheta, varphi); outcome bit b of the measurement is the state U|b>."""
    if isinstance(axis, str):
        if axis not in SPIN_AXES:
            raise ValidationError(f"Unknown spin axis '{axis}'. Use x, y, z or (theta, phi)")
        th, ph = SPIN_AXES[axis]
    else:
        th, ph = axis
    c, s = np.cos(th / 2), np.sin(th / 2)
    return np.array([[c, -np.exp(-1j * ph) * s], [np.exp(1j * ph) * s, c]], dtype=complex)


def axis_label(axis: AxisSpec) -> str:
    if isinstance(axis, str):
        return axis
    return f"({axis[0]:.6g},{axis[1]:.6g})"


@dataclass(frozen=True)
class SpinTomogram:
    n_qubits: int
    axes: Tuple[Tuple[AxisSpec, ...], ...]
    probs: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        p = np.clip(np.asarray(self.probs, dtype=float), 0.0, None)
        if p.shape != (len(self.axes), 2 ** self.n_qubits):
            raise DimensionError(f"Spin tomogram shape {p.shape} inconsistent with {len(self.axes)} axis sets")
        sums = p.sum(axis=1)
        if np.any(np.abs(sums - 1.0) > 1e-10):
            raise ValidationError(f"Spin tomogram rows sum to {sums.min():.12g}..{sums.max():.12g}")
        p.flags.writeable = False
        object.__setattr__(self, "probs", p)

    def outcomes(self) -> List[str]:
        return [format(i, f"0{self.n_qubits}b") for i in range(2 ** self.n_qubits)]

    def row(self, axes: Sequence[AxisSpec]) -> np.ndarray:
        key = tuple(axis_label(a) for a in axes)
        for i, a in enumerate(self.axes):
            if tuple(axis_label(x) for x in a) == key:
                return self.probs[i]
        raise ValidationError(f"Axis set {key} not in spin tomogram")

    def table(self, axes: Sequence[AxisSpec]) -> dict:
        return dict(zip(self.outcomes(), self.row(axes)))


def spin_tomogram(state: State, axes_sets: Sequence[Sequence[AxisSpec]]) -> SpinTomogram:
    space = state.space
    if any(k != QUBIT for k in space.kinds):
        raise DimensionError(f"Spin tomogram needs a qubit-only state, got dims {space.dims}")
    n = space.n_subsystems
    rho = as_density(state).matrix
    rows = []
    for axes in axes_sets:
        if len(axes) != n:
            raise ValidationError(f"Axis set {axes} does not match {n} qubits")
        u = np.array([[1.0 + 0j]])
        for a in axes:
            u = np.kron(u, spin_rotation(a))
        rows.append(np.real(np.diag(u.conj().T @ rho @ u)))
    return SpinTomogram(n, tuple(tuple(a) for a in axes_sets), np.array(rows))


# --------------------------------------------------------------------------- hybrid field x qubit


@dataclass(frozen=True)
class HybridTomogram:
    """values[theta, axis, X, b] for a field mode jointly measured with one qubit."""

    grid: QuadGrid
    axes: Tuple[AxisSpec, ...]
    values: np.ndarray = field(repr=False)

    def joint(self, theta: float, axis: AxisSpec) -> np.ndarray:
        labels = [axis_label(a) for a in self.axes]
        return self.values[self.grid.theta_index(theta), labels.index(axis_label(axis))]


def hybrid_tomogram(state: State, grid: QuadGrid, axes: Sequence[AxisSpec] = ("x", "y", "z")) -> HybridTomogram:
    space = state.space
    if space.kinds != (MODE, QUBIT):
        raise DimensionError(f"Hybrid tomogram needs (mode, qubit) layout, got {space.kinds}")
    _guard_entries((len(grid.thetas), len(axes), grid.n_x, 2))
    d = space.dims[0]
    phi = oscillator_functions(d - 1, grid.x)
    phases = _phases(d, grid.thetas)
    rho4 = as_density(state).matrix.reshape(d, 2, d, 2)
    values = np.empty((len(grid.thetas), len(axes), grid.n_x, 2))
    for i in range(len(grid.thetas)):
        k = phases[i][:, None] * phi
        for j, a in enumerate(axes):
            u = spin_rotation(a)
            # <X,theta; U b| rho |X,theta; U b>
            values[i, j] = np.real(
                np.einsum("nspt,nx,sb,px,tb->xb", rho4, k, u.conj(), k.conj(), u, optimize=True)
            )
    values = np.clip(values, 0.0, None)
    return HybridTomogram(grid, tuple(axes), values)


# --------------------------------------------------------------------------- diagnostics


@dataclass
class SymmetryReport:
    max_deviation: float
    pairs_checked: int


def tomogram_symmetry_check(t: Tomogram) -> SymmetryReport:
    """max |w(X, theta+pi) - w(-X, theta)| over every angle pair present in the grid."""
    if t.modes != 1:
        raise DimensionError("Symmetry check is defined for single-mode tomograms")
    g = t.grid
    if abs(g.x_min + g.x_max) > 1e-12:
        raise ValidationError("Symmetry check needs an X grid symmetric about 0")
    worst = 0.0
    pairs = 0
    for i, th in enumerate(g.thetas):
        shifted = (th + np.pi) % (2 * np.pi)
        if not g.has_theta(shifted):
            continue
        j = g.theta_index(shifted)
        worst = max(worst, float(np.max(np.abs(t.values[j] - t.values[i][::-1]))))
        pairs += 1
    if pairs == 0:
        raise ValidationError("No (theta, theta+pi) pairs on the grid; use a full-circle angle grid")
    return SymmetryReport(worst, pairs)


def count_strands(
    t: Tomogram,
    smoothing: float = 0.5,
    height: float = 0.5,
    prominence: float = 0.1,
) -> int:
    """
    Number of strands of a fractional-revival tomogram.

    The tomogram must cover [0, 2pi) with equal angle steps. After Gaussian
    smoothing along X (width in quadrature units) the circular autocorrelation
    R(k) of the angle shift is formed; an l-strand pattern is invariant under
    shifts of 2pi/l, so l is the number of circular maxima of R.
    """
    if t.modes != 1:
        raise DimensionError("Strand counting needs a single-mode tomogram")
    th = np.asarray(t.grid.thetas)
    n = th.size
    step = 2 * np.pi / n
    if n < 8 or not np.allclose(th, np.arange(n) * step, atol=1e-9):
        raise ValidationError("Strand counting needs an equal-step angle grid over [0, 2pi) with >= 8 angles")
    r = strand_autocorrelation(t, smoothing)
    # three periods so prominences of maxima near k=0 see both neighbours
    padded = np.concatenate([r, r, r])
    peaks, _ = find_peaks(padded, height=height, prominence=prominence)
    count = int(np.sum((peaks >= n) & (peaks < 2 * n)))
    return max(count, 1)


def strand_autocorrelation(t: Tomogram, smoothing: float = 0.5) -> np.ndarray:
    """R(k) used by count_strands, exposed for export and plotting."""
    w = gaussian_filter1d(t.values, sigma=smoothing / t.grid.dx, axis=1, mode="constant")
    w = w - w.mean(axis=0, keepdims=True)
    norm = float(np.sum(w * w)) or 1.0
    return np.array([np.sum(w * np.roll(w, -k, axis=0)) for k in range(w.shape[0])]) / norm
