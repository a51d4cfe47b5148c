"""
Entanglement indicators.

Tomographic slice indicators (log2 throughout):

  eps_tei  mutual information S(A) + S(B) - S(A,B) of a two-mode slice
  eps_ipr  1 + eta_AB - eta_A - eta_B with eta the inverse participation ratios
  eps_pcc  |Pearson correlation| of X_A and X_B
  eps_bd   Bhattacharyya distance between the slice and its marginal product

Slices are normalised by their Simpson integral before use. Simpson weights are
positive, so the quadrature turns every slice into a discrete distribution and
eps_tei and eps_bd keep their non-negativity and the bound eps_bd <= eps_tei / 2.

Density-matrix references (xi_svne, xi_sle, xi_qmi, negativity) work on any
State and any choice of subsystems.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from itertools import product
from typing import Callable, Dict, Iterable, List, Mapping, Sequence, Tuple, Union

import numpy as np
from scipy.integrate import simpson

from .errors import DimensionError, UndefinedQuantifierError, ValidationError
from .fock import DensityMatrix, PureState, State, as_density, partial_trace
from .tomography import (
    AxisSpec,
    HybridTomogram,
    QuadGrid,
    SpinTomogram,
    Tomogram,
    spin_tomogram,
    tomogram_two_mode,
)

LOG = logging.getLogger("qtomo")

NEGATIVE_TOLERANCE = 1e-9
KINDS = ("TEI", "IPR", "PCC", "BD")
# qubit outcome tables are reported in nats, under the xi_tei_nats column
SPIN_LOG_BASE = float(np.e)


def _clamp(value: float, what: str) -> float:
    if value < -NEGATIVE_TOLERANCE:
        raise ValidationError(f"{what} = {value:.3g} is negative beyond {NEGATIVE_TOLERANCE}")
    return max(float(value), 0.0)


def _xlogx2(p: np.ndarray) -> np.ndarray:
    safe = np.where(p > 0, p, 1.0)
    return np.where(p > 0, p * np.log2(safe), 0.0)


@dataclass(frozen=True)
class SliceIndicator:
    theta_a: Union[float, str]
    theta_b: Union[float, str]
    kind: str
    value: float


class _Slice:
    """A normalised two-mode slice with its marginals."""

    def __init__(self, t: Tomogram, theta_a: float, theta_b: float):
        if t.modes != 2:
            raise DimensionError("Slice indicators need a two-mode tomogram")
        self.xa = t.grids[0].x
        self.xb = t.grids[1].x
        w = t.slice(theta_a, theta_b)
        norm = self.integrate(w)
        if not norm > 0:
            raise ValidationError(f"Slice ({theta_a:.6g}, {theta_b:.6g}) integrates to {norm:.3g}")
        self.w = w / norm
        self.wa = simpson(self.w, x=self.xb, axis=1)
        self.wb = simpson(self.w, x=self.xa, axis=0)

    def integrate(self, f: np.ndarray) -> float:
        return float(simpson(simpson(f, x=self.xb, axis=1), x=self.xa))


def eps_tei(t: Tomogram, theta_a: float, theta_b: float) -> float:
    s = _Slice(t, theta_a, theta_b)
    h_ab = -s.integrate(_xlogx2(s.w))
    h_a = -float(simpson(_xlogx2(s.wa), x=s.xa))
    h_b = -float(simpson(_xlogx2(s.wb), x=s.xb))
    return _clamp(h_a + h_b - h_ab, "eps_tei")


def eps_ipr(t: Tomogram, theta_a: float, theta_b: float) -> float:
    """Literal 1 + eta_AB - eta_A - eta_B; equals (1 - eta_A)(1 - eta_B) on product slices."""
    s = _Slice(t, theta_a, theta_b)
    eta_ab = s.integrate(s.w ** 2)
    eta_a = float(simpson(s.wa ** 2, x=s.xa))
    eta_b = float(simpson(s.wb ** 2, x=s.xb))
    return float(1.0 + eta_ab - eta_a - eta_b)


def eps_pcc(t: Tomogram, theta_a: float, theta_b: float) -> float:
    s = _Slice(t, theta_a, theta_b)
    ma = float(simpson(s.xa * s.wa, x=s.xa))
    mb = float(simpson(s.xb * s.wb, x=s.xb))
    va = float(simpson((s.xa - ma) ** 2 * s.wa, x=s.xa))
    vb = float(simpson((s.xb - mb) ** 2 * s.wb, x=s.xb))
    if va <= 0 or vb <= 0:
        raise UndefinedQuantifierError("Pearson correlation of a slice with zero marginal variance")
    cov = s.integrate((s.xa[:, None] - ma) * (s.xb[None, :] - mb) * s.w)
    return float(min(abs(cov) / np.sqrt(va * vb), 1.0))


def eps_bd(t: Tomogram, theta_a: float, theta_b: float) -> float:
    s = _Slice(t, theta_a, theta_b)
    overlap = s.integrate(np.sqrt(s.w * s.wa[:, None] * s.wb[None, :]))
    return _clamp(-np.log2(overlap), "eps_bd")


SLICE_FUNCTIONS: Dict[str, Callable[[Tomogram, float, float], float]] = {
    "TEI": eps_tei,
    "IPR": eps_ipr,
    "PCC": eps_pcc,
    "BD": eps_bd,
}


def slice_indicator(t: Tomogram, kind: str, theta_a: float, theta_b: float) -> SliceIndicator:
    key = kind.upper()
    if key not in SLICE_FUNCTIONS:
        raise ValidationError(f"Unknown indicator '{kind}'. Use one of {', '.join(KINDS)}")
    return SliceIndicator(theta_a, theta_b, key, SLICE_FUNCTIONS[key](t, theta_a, theta_b))


# --------------------------------------------------------------------------- angle averages


def angle_grid(n: int) -> Tuple[float, ...]:
    """n equally spaced angles in [0, pi), starting at 0."""
    if n < 1:
        raise ValidationError(f"Angle grid size must be >= 1, got {n}")
    return tuple(k * np.pi / n for k in range(n))


def indicator_grid(t: Tomogram, kind: str, n_angles: int) -> np.ndarray:
    """values[i, j] = eps_kind(theta_i, theta_j) over the n x n angle grid."""
    fn = SLICE_FUNCTIONS[kind.upper()]
    th = angle_grid(n_angles)
    return np.array([[fn(t, a, b) for b in th] for a in th])


def _as_tomogram(source: Union[Tomogram, State], n_angles: int, x_range: Tuple[float, float], n_x: int) -> Tomogram:
    if isinstance(source, Tomogram):
        return source
    grid = QuadGrid(x_range[0], x_range[1], n_x, angle_grid(n_angles))
    return tomogram_two_mode(source, grid, grid)


def xi_average(
    source: Union[Tomogram, State],
    kind: str = "TEI",
    n_angles: int = 5,
    x_range: Tuple[float, float] = (-10.0, 10.0),
    n_x: int = 201,
) -> float:
    """Mean slice indicator over the n_angles x n_angles grid."""
    t = _as_tomogram(source, n_angles, x_range, n_x)
    return float(np.mean(indicator_grid(t, kind, n_angles)))


def thresholded_mean(values: Iterable[float]) -> float:
    """Mean of the values exceeding mean + one standard deviation; the plain mean if none do."""
    v = np.asarray(list(values), dtype=float).ravel()
    if v.size == 0:
        raise ValidationError("thresholded_mean of an empty set")
    mu, sd = float(v.mean()), float(v.std())
    if sd == 0.0:
        return mu
    above = v[v > mu + sd]
    return float(above.mean()) if above.size else mu


def xi_prime_tei(
    source: Union[Tomogram, State],
    n_angles: int = 10,
    x_range: Tuple[float, float] = (-10.0, 10.0),
    n_x: int = 201,
) -> float:
    t = _as_tomogram(source, n_angles, x_range, n_x)
    return thresholded_mean(indicator_grid(t, "TEI", n_angles))


# --------------------------------------------------------------------------- density-matrix references


def _keep(subsystem: Union[int, Sequence[int]]) -> List[int]:
    return [subsystem] if isinstance(subsystem, (int, np.integer)) else list(subsystem)


def von_neumann_entropy(rho: DensityMatrix) -> float:
    lam = np.clip(rho.eigenvalues(), 0.0, None)
    return float(-np.sum(_xlogx2(lam)))


def xi_svne(state: State, subsystem: Union[int, Sequence[int]] = 0) -> float:
    return von_neumann_entropy(partial_trace(state, _keep(subsystem)))


def xi_sle(state: State, subsystem: Union[int, Sequence[int]] = 0) -> float:
    r = partial_trace(state, _keep(subsystem)).matrix
    return float(1.0 - np.trace(r @ r).real)


def xi_qmi(state: State, part_a: Union[int, Sequence[int]] = 0, part_b: Union[int, Sequence[int], None] = None) -> float:
    """S(A) + S(B) - S(AB); part_b defaults to every subsystem not in part_a."""
    a = _keep(part_a)
    b = [i for i in range(state.space.n_subsystems) if i not in a] if part_b is None else _keep(part_b)
    if set(a) & set(b):
        raise DimensionError(f"Partitions {a} and {b} overlap")
    ab = sorted(a + b)
    if ab == list(range(state.space.n_subsystems)):
        s_ab = 0.0 if isinstance(state, PureState) else von_neumann_entropy(as_density(state))
    else:
        s_ab = von_neumann_entropy(partial_trace(state, ab))
    return _clamp(xi_svne(state, a) + xi_svne(state, b) - s_ab, "xi_qmi")


def partial_transpose(state: State, part_a: Union[int, Sequence[int]] = 0) -> np.ndarray:
    rho = as_density(state)
    dims = rho.space.dims
    n = len(dims)
    a = rho.space.check_index(_keep(part_a))
    t = rho.matrix.reshape(dims + dims)
    axes = list(range(2 * n))
    for i in a:
        axes[i], axes[n + i] = axes[n + i], axes[i]
    return t.transpose(axes).reshape(rho.matrix.shape)


def negativity(state: State, part_a: Union[int, Sequence[int]] = 0, part_b: Union[int, Sequence[int], None] = None) -> float:
    """sum of |negative eigenvalues| of the partial transpose over A, on the A|B reduction."""
    a = _keep(part_a)
    if part_b is not None:
        keep = sorted(a + _keep(part_b))
        if keep != list(range(state.space.n_subsystems)):
            state = partial_trace(state, keep)
            a = [keep.index(i) for i in a]
    lam = np.linalg.eigvalsh(partial_transpose(state, a))
    return float(0.5 * np.sum(np.abs(lam) - lam))


def series_pcc(col1: Sequence[float], col2: Sequence[float]) -> float:
    x = np.asarray(col1, dtype=float)
    y = np.asarray(col2, dtype=float)
    if x.shape != y.shape or x.size < 2:
        raise ValidationError(f"series_pcc needs two columns of equal length >= 2, got {x.shape} and {y.shape}")
    if np.std(x) == 0 or np.std(y) == 0:
        raise UndefinedQuantifierError("Pearson correlation of a constant column")
    return float(np.corrcoef(x, y)[0, 1])


# --------------------------------------------------------------------------- spin and hybrid


def _discrete_mi(p: np.ndarray) -> float:
    p = p / p.sum()
    pa = p.sum(axis=1)
    pb = p.sum(axis=0)
    return float(np.sum(_xlogx2(p)) - np.sum(_xlogx2(pa)) - np.sum(_xlogx2(pb)))


def spin_eps_tei(st: SpinTomogram, axis_a: AxisSpec, axis_b: AxisSpec, base: float = SPIN_LOG_BASE) -> float:
    """Mutual information of the joint outcome table of two qubits, in log base `base`."""
    if st.n_qubits != 2:
        raise DimensionError(f"spin_eps_tei needs a two-qubit tomogram, got {st.n_qubits} qubits")
    p = st.row((axis_a, axis_b)).reshape(2, 2)
    return _clamp(_discrete_mi(p) / np.log2(base), "spin eps_tei")


def spin_xi_tei(
    source: Union[SpinTomogram, State],
    axes: Sequence[AxisSpec] = ("x", "y", "z"),
    base: float = SPIN_LOG_BASE,
) -> float:
    """spin_eps_tei averaged over every ordered pair of measurement axes."""
    pairs = [(a, b) for a in axes for b in axes]
    st = source if isinstance(source, SpinTomogram) else spin_tomogram(source, pairs)
    return float(np.mean([spin_eps_tei(st, a, b, base) for a, b in pairs]))


def spin_partition_xi_tei(
    source: Union[SpinTomogram, State],
    n_a: int,
    axes: Sequence[AxisSpec] = ("x", "y", "z"),
    base: float = SPIN_LOG_BASE,
) -> float:
    """
    Mean mutual information between the first n_a qubits and the rest, over
    every axis assignment of the register (3^n sets for n qubits).
    """
    n = source.n_qubits if isinstance(source, SpinTomogram) else source.space.n_subsystems
    if not 0 < n_a < n:
        raise DimensionError(f"Partition of {n} qubits needs 0 < n_a < {n}, got {n_a}")
    sets = [tuple(s) for s in product(axes, repeat=n)]
    st = source if isinstance(source, SpinTomogram) else spin_tomogram(source, sets)
    vals = [_discrete_mi(st.row(s).reshape(2 ** n_a, -1)) / np.log2(base) for s in sets]
    return _clamp(float(np.mean(vals)), "spin partition xi_tei")


def hybrid_eps_tei(ht: HybridTomogram, theta: float, axis: AxisSpec) -> float:
    """Mutual information between a field quadrature and a qubit outcome."""
    x = ht.grid.x
    w = ht.joint(theta, axis)
    norm = float(np.sum(simpson(w, x=x, axis=0)))
    if not norm > 0:
        raise ValidationError(f"Hybrid slice at theta={theta:.6g} integrates to {norm:.3g}")
    w = w / norm
    w_field = w.sum(axis=1)
    p_qubit = simpson(w, x=x, axis=0)
    h_joint = -float(np.sum(simpson(_xlogx2(w), x=x, axis=0)))
    h_field = -float(simpson(_xlogx2(w_field), x=x))
    h_qubit = -float(np.sum(_xlogx2(p_qubit)))
    return _clamp(h_field + h_qubit - h_joint, "hybrid eps_tei")


def hybrid_xi_tei(ht: HybridTomogram) -> float:
    return float(np.mean([hybrid_eps_tei(ht, th, a) for th in ht.grid.thetas for a in ht.axes]))


# --------------------------------------------------------------------------- series


COLUMN_ORDER = (
    "xi_tei",
    "xi_tei_nats",
    "xi_prime_tei",
    "xi_ipr",
    "xi_pcc",
    "xi_bd",
    "xi_svne",
    "xi_sle",
    "xi_qmi",
    "negativity",
    "d1",
    "d2",
    "d3",
    "Delta",
)
TOMOGRAPHIC_COLUMNS = ("xi_tei", "xi_tei_nats", "xi_prime_tei", "xi_pcc", "xi_bd")
DIFFERENCES = {
    "d1": ("xi_svne", "xi_prime_tei"),
    "d2": ("xi_sle", "xi_prime_tei"),
    "d3": ("xi_sle", "xi_ipr"),
    "Delta": ("xi_svne", "xi_sle"),
}


@dataclass
class IndicatorSeries:
    axis_name: str
    axis: np.ndarray
    columns: Dict[str, np.ndarray] = field(default_factory=dict)

    def names(self) -> List[str]:
        known = [c for c in COLUMN_ORDER if c in self.columns]
        return known + [c for c in self.columns if c not in COLUMN_ORDER]

    def column(self, name: str) -> np.ndarray:
        if name not in self.columns:
            raise ValidationError(f"Series has no column '{name}' (have {', '.join(self.names())})")
        return self.columns[name]

    def rows(self) -> List[List[float]]:
        names = self.names()
        return [[float(self.axis[i])] + [float(self.columns[c][i]) for c in names] for i in range(len(self.axis))]

    def __len__(self) -> int:
        return len(self.axis)


def build_series(axis_name: str, axis: Sequence[float], rows: Sequence[Mapping[str, float]]) -> IndicatorSeries:
    """
    Assemble an IndicatorSeries from per-point dictionaries, fill the
    difference columns whose inputs are present and enforce the ranges.
    """
    ax = np.asarray(axis, dtype=float)
    if len(rows) != ax.size:
        raise ValidationError(f"{len(rows)} rows for an axis of {ax.size} points")
    names: List[str] = []
    for r in rows:
        for k in r:
            if k not in names:
                names.append(k)
    cols: Dict[str, np.ndarray] = {}
    for k in names:
        vals = [r.get(k, np.nan) for r in rows]
        cols[k] = np.asarray(vals, dtype=float)
    for name, (p, q) in DIFFERENCES.items():
        if p in cols and q in cols:
            cols[name] = np.abs(cols[p] - cols[q])
    for k in TOMOGRAPHIC_COLUMNS:
        if k in cols and np.nanmin(cols[k]) < -NEGATIVE_TOLERANCE:
            raise ValidationError(f"Column {k} has negative value {np.nanmin(cols[k]):.3g}")
    if "xi_sle" in cols and (np.nanmin(cols["xi_sle"]) < -NEGATIVE_TOLERANCE or np.nanmax(cols["xi_sle"]) >= 1.0):
        raise ValidationError("xi_sle outside [0, 1)")
    return IndicatorSeries(axis_name, ax, cols)

