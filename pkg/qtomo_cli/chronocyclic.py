"""
Time-time slices of the chronocyclic tomograms of two 2-photon frequency-comb
states, and their tomographic entanglement indicator.

Both slices depend on t_S and t_I only through u = t_I - t_S:

  w_alpha(u) = env(u) |F(phi)|^4 / M_alpha
  w_beta(u)  = env(u) |F(phi)|^2 |F(phi + pi)|^2 / M_beta

with env(u) = exp(-a u^2), a = dw^2 dW^2 / (2 D), D = dw^2 + dW^2,
phi = b u, b = wbar dW^2 / (2 D), and |F(phi)|^2 = sin^2(K phi / 2) / sin^2(phi / 2)
the Dirichlet kernel of the K teeth in the window.

On a square grid with one step the joint table is Toeplitz, so entropies and
marginals are computed from the 2 n_t - 1 lag values instead of n_t^2 cells.

eps_TEI of a continuous slice grows with the number of cells, so the grid
carries a physical bin width. Square bins of that width turn the slice into a
coarse Toeplitz table whose lag weights are the lag profile integrated against
a triangle of half-width one bin. The default bin is 1/17 of the half ridge
spacing pi / comb_rate, which puts every ridge on a bin diagonal.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional, Tuple, Union

import numpy as np

from .errors import DimensionError, TruncationError, ValidationError

LOG = logging.getLogger("qtomo")

ALPHA = "alpha"
BETA = "beta"
TOOTH_WEIGHT_FLOOR = 1e-6
NORMALIZATION_TOLERANCE = 1e-3
MAX_DENSE_CELLS = 2 ** 26
TWO_PI = 2.0 * np.pi
BINS_PER_HALF_RIDGE = 17
MIN_POINTS_PER_BIN = 4


@dataclass(frozen=True)
class CombParams:
    """Angular frequencies in rad/s."""

    omega_p: float
    omega_bar: float
    d_omega: float
    Omega_0: float
    d_Omega: float
    n_window: Optional[Tuple[int, int]] = None

    def __post_init__(self) -> None:
        for name in ("omega_p", "omega_bar", "d_omega", "d_Omega"):
            if not getattr(self, name) > 0:
                raise ValidationError(f"Comb parameter {name} must be > 0, got {getattr(self, name)}")
        if not self.d_omega < self.omega_bar:
            raise ValidationError(
                f"Tooth width d_omega={self.d_omega:.6g} must be below the spacing omega_bar={self.omega_bar:.6g}"
            )
        if self.n_window is not None:
            lo, hi = self.n_window
            if hi < lo:
                raise ValidationError(f"Empty tooth window {self.n_window}")

    @classmethod
    def reference(cls) -> "CombParams":
        """Pump 391.8856 THz, spacing 19.2 GHz, tooth width 1.92 GHz, Omega_0 10.9 THz, dOmega 6 THz (all f / 2pi)."""
        return cls(
            omega_p=TWO_PI * 391.8856e12,
            omega_bar=TWO_PI * 19.2e9,
            d_omega=TWO_PI * 1.92e9,
            Omega_0=TWO_PI * 10.9e12,
            d_Omega=TWO_PI * 6.0e12,
        )

    @property
    def D(self) -> float:
        return self.d_omega ** 2 + self.d_Omega ** 2

    @property
    def envelope_rate(self) -> float:
        return self.d_omega ** 2 * self.d_Omega ** 2 / (2.0 * self.D)

    @property
    def comb_rate(self) -> float:
        return self.omega_bar * self.d_Omega ** 2 / (2.0 * self.D)

    def teeth(self) -> Tuple[int, int]:
        """Tooth indices whose difference frequency keeps f_minus above 1e-6 of its peak."""
        if self.n_window is not None:
            return self.n_window
        center = (self.omega_p + self.Omega_0) / (2.0 * self.omega_bar)
        half = 2.0 * self.d_Omega * np.sqrt(np.log(1.0 / TOOTH_WEIGHT_FLOOR)) / (2.0 * self.omega_bar)
        return int(np.ceil(center - half)), int(np.floor(center + half))

    @property
    def K(self) -> int:
        lo, hi = self.teeth()
        return hi - lo + 1

    def with_window(self, lo: int, hi: int) -> "CombParams":
        return CombParams(self.omega_p, self.omega_bar, self.d_omega, self.Omega_0, self.d_Omega, (lo, hi))


@dataclass(frozen=True)
class TTGrid:
    """
    Square grid of n_t points per axis over [t_min, t_max] seconds. With a
    bin_width, eps_TEI is taken over square bins of that width instead of cells.
    """

    t_min: float
    t_max: float
    n_t: int
    bin_width: Optional[float] = None

    def __post_init__(self) -> None:
        if self.n_t < 3:
            raise ValidationError(f"n_t must be >= 3, got {self.n_t}")
        if not self.t_min < self.t_max:
            raise ValidationError(f"t_min={self.t_min} must be below t_max={self.t_max}")
        if self.bin_width is not None:
            if not self.bin_width > 0:
                raise ValidationError(f"bin_width must be > 0, got {self.bin_width}")
            if self.bin_width > 0.5 * (self.t_max - self.t_min):
                raise ValidationError(f"bin_width={self.bin_width:.3g} s leaves fewer than two bins per axis")

    @property
    def dt(self) -> float:
        return (self.t_max - self.t_min) / (self.n_t - 1)

    @property
    def t(self) -> np.ndarray:
        return np.linspace(self.t_min, self.t_max, self.n_t)

    def lags(self) -> np.ndarray:
        k = np.arange(-(self.n_t - 1), self.n_t)
        return k * self.dt

    @property
    def n_bins(self) -> Optional[int]:
        if self.bin_width is None:
            return None
        return int(np.floor((self.t_max - self.t_min) / self.bin_width * (1.0 + 1e-12)))

    @classmethod
    def for_comb(
        cls,
        p: CombParams,
        n_sigma: float = 5.0,
        oversample: float = 1.25,
        bins_per_half_ridge: Optional[int] = BINS_PER_HALF_RIDGE,
    ) -> "TTGrid":
        """
        Symmetric grid spanning n_sigma envelope widths on each side, with a step
        `oversample` times finer than the aliasing limit of the tooth sum and at
        least MIN_POINTS_PER_BIN points per bin. bins_per_half_ridge=None keeps
        cell-level eps_TEI.
        """
        sigma = 1.0 / np.sqrt(2.0 * p.envelope_rate)
        half = n_sigma * sigma
        top_freq = max(2 * (p.K - 1), 1) * p.comb_rate
        dt = TWO_PI / (oversample * (top_freq + 2.0 * n_sigma / sigma))
        bin_width = None
        if bins_per_half_ridge is not None:
            if bins_per_half_ridge < 1:
                raise ValidationError(f"bins_per_half_ridge must be >= 1, got {bins_per_half_ridge}")
            bin_width = np.pi / (p.comb_rate * bins_per_half_ridge)
            dt = min(dt, bin_width / MIN_POINTS_PER_BIN)
        n = int(np.ceil(2 * half / dt)) + 1
        if n % 2 == 0:
            n += 1
        return cls(-half, half, n, bin_width)

    def refined(self, factor: int = 2) -> "TTGrid":
        return TTGrid(self.t_min, self.t_max, (self.n_t - 1) * factor + 1, self.bin_width)


def dirichlet_squared(phi: np.ndarray, K: int) -> np.ndarray:
    """|sum_{n=0}^{K-1} e^{i n phi}|^2."""
    r = np.remainder(np.asarray(phi, dtype=float) + np.pi, TWO_PI) - np.pi
    s = np.sin(0.5 * r)
    small = np.abs(r) < 1e-9
    safe = np.where(small, 1.0, s)
    return np.where(small, float(K) ** 2, np.sin(0.5 * K * r) ** 2 / safe ** 2)


def _check_kind(kind: str) -> str:
    k = kind.lower()
    if k not in (ALPHA, BETA):
        raise ValidationError(f"Comb state kind must be '{ALPHA}' or '{BETA}', got '{kind}'")
    return k


def slice_profile(kind: str, p: CombParams, u: np.ndarray) -> np.ndarray:
    """Unnormalised w(u); F and G sums run over the K teeth of the window."""
    kind = _check_kind(kind)
    u = np.asarray(u, dtype=float)
    K = p.K
    phi = p.comb_rate * u
    env = np.exp(-p.envelope_rate * u ** 2)
    f2 = dirichlet_squared(phi, K)
    if kind == ALPHA:
        return env * f2 * f2
    return env * f2 * dirichlet_squared(phi + np.pi, K)


def _lag_counts(K: int) -> np.ndarray:
    """Number of tooth pairs (n, n') with n - n' = d, for d = -(K-1)..K-1."""
    d = np.arange(-(K - 1), K)
    return (K - np.abs(d)).astype(float)


def _pair_convolution(kind: str, K: int) -> Tuple[np.ndarray, np.ndarray]:
    """(s, count) grouping the four tooth indices on s = n - n' + m' - m."""
    c = _lag_counts(K)
    d = np.arange(-(K - 1), K)
    first = c * ((-1.0) ** np.abs(d)) if kind == BETA else c
    conv = np.convolve(first, c[::-1])
    s = np.arange(-(2 * K - 2), 2 * K - 1)
    return s, conv


def comb_norm_constant(kind: str, p: CombParams) -> float:
    """
    M = (pi / mu0) sum_{n,n',m,m'} [(-1)^{n+n'}] exp(-s^2 wbar^2 dW^2 / (2 dw^2 D)),
    summed through the s-convolution rather than over all index quadruples.
    """
    kind = _check_kind(kind)
    mu0 = np.sqrt(np.pi * p.d_Omega ** 2 * p.d_omega ** 2 / (2.0 * p.D))
    s, conv = _pair_convolution(kind, p.K)
    expo = s.astype(float) ** 2 * p.omega_bar ** 2 * p.d_Omega ** 2 / (2.0 * p.d_omega ** 2 * p.D)
    return float(np.pi / mu0 * np.sum(conv * np.exp(-expo)))


def exact_lag_integral(kind: str, p: CombParams) -> float:
    """Closed form of the integral of slice_profile over the whole u axis."""
    kind = _check_kind(kind)
    a, b = p.envelope_rate, p.comb_rate
    s, conv = _pair_convolution(kind, p.K)
    return float(np.sqrt(np.pi / a) * np.sum(conv * np.exp(-(b * s) ** 2 / (4.0 * a))))


@dataclass(frozen=True)
class TTSlice:
    """
    Time-time slice on a square grid. lag_values[k + n_t - 1] is w at
    t_I - t_S = k dt, divided by the comb normalisation constant.
    """

    kind: str
    params: CombParams
    grid: TTGrid
    norm_constant: float
    lag_values: np.ndarray = field(repr=False)

    def dense(self) -> np.ndarray:
        n = self.grid.n_t
        if n * n > MAX_DENSE_CELLS:
            raise DimensionError(f"Dense time-time slice of {n}x{n} cells exceeds {MAX_DENSE_CELLS}")
        i = np.arange(n)
        return self.lag_values[(i[None, :] - i[:, None]) + n - 1]

    def marginals(self) -> Tuple[np.ndarray, np.ndarray]:
        """Row sums (signal) and column sums (idler) of the discrete table, unnormalised."""
        return _toeplitz_marginals(self.lag_values, self.grid.n_t)

    def binned_lags(self) -> Tuple[int, np.ndarray]:
        """
        (n_bins, weights) of the square-bin table: weights[L + n_bins - 1] is the
        slice integrated over bin pairs whose indices differ by L, per pair.
        """
        g = self.grid
        n_b = g.n_bins
        if n_b is None:
            raise ValidationError("Grid has no bin_width")
        if g.bin_width < MIN_POINTS_PER_BIN * g.dt * (1.0 - 1e-9):
            raise TruncationError(
                f"bin_width={g.bin_width:.3g} s holds fewer than {MIN_POINTS_PER_BIN} grid steps (dt={g.dt:.3g} s)"
            )
        s = g.lags() / g.bin_width
        lo = np.floor(s)
        frac = s - lo
        idx = lo.astype(int) + n_b - 1
        size = 2 * n_b - 1
        weights = np.zeros(size)
        for offset, share in ((0, 1.0 - frac), (1, frac)):
            k = idx + offset
            keep = (k >= 0) & (k < size)
            weights += np.bincount(k[keep], weights=(self.lag_values * share)[keep], minlength=size)
        return n_b, weights * g.dt * g.bin_width

    def ridge_spacing(self) -> float:
        return TWO_PI / self.params.comb_rate


def _toeplitz_marginals(lag_values: np.ndarray, n: int) -> Tuple[np.ndarray, np.ndarray]:
    cum = np.concatenate([[0.0], np.cumsum(lag_values)])
    i = np.arange(n)
    # row i covers lags -i .. n-1-i, column j covers lags j-n+1 .. j
    rows = cum[(n - 1 - i) + n] - cum[(-i) + n - 1]
    cols = cum[i + n] - cum[i]
    return rows, cols


def tt_tomogram(kind: str, p: CombParams, g: Optional[TTGrid] = None) -> TTSlice:
    kind = _check_kind(kind)
    g = TTGrid.for_comb(p) if g is None else g
    period = TWO_PI / p.omega_bar
    if g.t_max - g.t_min < 3 * period:
        raise ValidationError(f"Grid span {g.t_max - g.t_min:.3g} s is below three comb periods ({3 * period:.3g} s)")
    u = g.lags()
    raw = slice_profile(kind, p, u)
    numeric = float(np.sum(raw) * g.dt)
    exact = exact_lag_integral(kind, p)
    mismatch = abs(numeric - exact) / exact
    LOG.debug("chrono %s: K=%d n_t=%d lag-integral mismatch %.3g", kind, p.K, g.n_t, mismatch)
    if mismatch > NORMALIZATION_TOLERANCE:
        raise TruncationError(
            f"Time-time grid does not resolve the {p.K}-tooth comb: lag integral off by {mismatch:.3g} "
            f"(dt={g.dt:.3g} s, n_t={g.n_t}); use TTGrid.for_comb or refine"
        )
    m = comb_norm_constant(kind, p)
    return TTSlice(kind, p, g, m, raw / m)


def _h2(p: np.ndarray, weights: Optional[np.ndarray] = None) -> float:
    nz = p > 0
    terms = np.zeros_like(p)
    terms[nz] = p[nz] * np.log2(p[nz])
    if weights is not None:
        terms = terms * weights
    return float(-np.sum(terms))


def _toeplitz_mi(lag_values: np.ndarray, n: int) -> float:
    lag = np.arange(-(n - 1), n)
    mult = (n - np.abs(lag)).astype(float)
    z = float(np.sum(mult * lag_values))
    if not z > 0:
        raise ValidationError("Time-time slice sums to zero on the grid")
    rows, cols = _toeplitz_marginals(lag_values, n)
    h_joint = _h2(lag_values / z, mult)
    return _h2(rows / z) + _h2(cols / z) - h_joint


def chrono_eps_tei(w: Union[TTSlice, np.ndarray]) -> float:
    """
    Mutual information (log2) of the time-time table. A slice on a grid with a
    bin_width is binned first; otherwise every grid point is one cell.
    """
    if isinstance(w, TTSlice):
        if w.grid.bin_width is not None:
            n_b, weights = w.binned_lags()
            mi = _toeplitz_mi(weights, n_b)
            LOG.debug("chrono %s: %d bins of %.4g s -> eps_TEI %.4f", w.kind, n_b, w.grid.bin_width, mi)
        else:
            mi = _toeplitz_mi(w.lag_values, w.grid.n_t)
        return max(mi, 0.0)
    table = np.asarray(w, dtype=float)
    if table.ndim != 2:
        raise DimensionError(f"chrono_eps_tei needs a 2-D table, got shape {table.shape}")
    if np.min(table) < 0:
        raise ValidationError("Time-time table has negative cells")
    z = float(table.sum())
    if not z > 0:
        raise ValidationError("Time-time table sums to zero")
    p = table / z
    h_joint = _h2(p.ravel())
    h_s = _h2(p.sum(axis=1))
    h_i = _h2(p.sum(axis=0))
    return max(h_s + h_i - h_joint, 0.0)
