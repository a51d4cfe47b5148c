"""
Nonlinear analysis of a scalar series (an indicator difference d1(t), or any
other column): delay from the first minimum of the binned mutual information,
embedding dimension from the saturation of the correlation exponent, local
Jacobians from second-order neighbourhood fits, and local Lyapunov exponents
from the Oseledec product.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import curve_fit
from scipy.signal import find_peaks, periodogram
from scipy.spatial import cKDTree

from .errors import UndefinedQuantifierError, ValidationError

LOG = logging.getLogger("qtomo")

MIN_EMBED_POINTS = 1000
MIN_VECTORS = 100
SATURATION_TOLERANCE = 0.05
JITTER = 1e-12
MI_PROMINENCE = 0.2
MI_BASIN = 0.1


@dataclass(frozen=True)
class ScalarSeries:
    values: np.ndarray = field(repr=False)
    dt: float = 1.0

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=float).ravel()
        if v.size < 2:
            raise ValidationError(f"Series needs at least 2 samples, got {v.size}")
        if not np.all(np.isfinite(v)):
            raise ValidationError("Series contains NaN or infinite values")
        if not self.dt > 0:
            raise ValidationError(f"Sample step dt must be > 0, got {self.dt}")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    def __len__(self) -> int:
        return self.values.size

    def require_embeddable(self) -> None:
        if len(self) < MIN_EMBED_POINTS:
            raise ValidationError(f"Embedding needs >= {MIN_EMBED_POINTS} samples, got {len(self)}")


@dataclass(frozen=True)
class Embedding:
    tau_d: int
    d_emb: int

    def __post_init__(self) -> None:
        if self.tau_d < 1 or self.d_emb < 1:
            raise ValidationError(f"Embedding needs tau_d >= 1 and d_emb >= 1, got {self.tau_d}, {self.d_emb}")

    def n_vectors(self, s: ScalarSeries) -> int:
        return len(s) - (self.d_emb - 1) * self.tau_d

    def vectors(self, s: ScalarSeries) -> np.ndarray:
        """Rows y(n) = (s[n], s[n + tau], ..., s[n + (d - 1) tau])."""
        n = self.n_vectors(s)
        if n < MIN_VECTORS:
            raise ValidationError(
                f"Embedding (tau={self.tau_d}, d={self.d_emb}) leaves {n} vectors from {len(s)} samples; need {MIN_VECTORS}"
            )
        return np.column_stack([s.values[j * self.tau_d: j * self.tau_d + n] for j in range(self.d_emb)])


# --------------------------------------------------------------------------- delay


def _check_not_constant(s: ScalarSeries) -> None:
    if np.ptp(s.values) == 0:
        raise ValidationError("Series is constant; delay and dimension are undefined")


def mutual_information_curve(s: ScalarSeries, max_T: int = 100, n_bins: int = 16) -> np.ndarray:
    """I(T) in nats for T = 0..max_T, on fixed bins spanning the series range."""
    _check_not_constant(s)
    v = s.values
    max_T = min(max_T, len(v) - 2)
    edges = np.linspace(v.min(), v.max(), n_bins + 1)
    out = np.empty(max_T + 1)
    for T in range(max_T + 1):
        a, b = v[: len(v) - T], v[T:]
        h, _, _ = np.histogram2d(a, b, bins=(edges, edges))
        p = h / h.sum()
        pa, pb = p.sum(axis=1), p.sum(axis=0)
        nz = p > 0
        out[T] = float(np.sum(p[nz] * np.log(p[nz] / np.outer(pa, pb)[nz])))
    return out


def _autocorrelation_delay(s: ScalarSeries, max_T: int) -> int:
    v = s.values - s.values.mean()
    var = float(np.dot(v, v))
    for T in range(1, min(max_T, len(v) - 1) + 1):
        if np.dot(v[:-T], v[T:]) / var <= 1.0 / np.e:
            return T
    return max(1, max_T // 4)


def mi_delay(s: ScalarSeries, max_T: int = 100, n_bins: int = 16) -> int:
    """
    Delay at the first clear minimum of I(T).

    Binning leaves a jagged texture on I(T), so a dip counts only when its
    prominence reaches MI_PROMINENCE of the drop I(0) - min I. The delay is the
    centre of the basin around that dip where I(T) stays within MI_BASIN of the
    same drop. Without a clear minimum (white noise, fully chaotic maps) the
    autocorrelation 1/e delay is used.
    """
    mi = mutual_information_curve(s, max_T, n_bins)
    drop = float(mi[0] - mi[1:].min()) if mi.size > 2 else 0.0
    if drop > 0:
        dips, _ = find_peaks(-mi, prominence=MI_PROMINENCE * drop)
        if dips.size:
            T = int(dips[0])
            level = mi[T] + MI_BASIN * (mi[0] - mi[T])
            lo, hi = T, T
            while lo > 1 and mi[lo - 1] <= level:
                lo -= 1
            while hi < mi.size - 1 and mi[hi + 1] <= level:
                hi += 1
            LOG.debug("I(T) minimum at T=%d, basin %d..%d", T, lo, hi)
            return int(round(0.5 * (lo + hi)))
    LOG.warning("I(T) has no clear minimum up to T=%d; falling back to the autocorrelation 1/e delay", mi.size - 1)
    return _autocorrelation_delay(s, max_T)


# --------------------------------------------------------------------------- dimension


def correlation_integral(vectors: np.ndarray, r: Sequence[float]) -> np.ndarray:
    """C(r): fraction of distinct pairs closer than r."""
    y = np.asarray(vectors, dtype=float)
    if y.ndim == 1:
        y = y[:, None]
    n = y.shape[0]
    tree = cKDTree(y)
    counts = np.atleast_1d(tree.count_neighbors(tree, np.asarray(r, dtype=float)))
    return (counts - n) / float(n * (n - 1))


def _slope(r: np.ndarray, c: np.ndarray) -> float:
    ok = c > 0
    if np.count_nonzero(ok) < 3:
        return float("nan")
    return float(np.polyfit(np.log(r[ok]), np.log(c[ok]), 1)[0])


@dataclass
class DimensionScan:
    dims: List[int]
    slopes: List[float]
    d_emb: int
    saturated: bool


def correlation_scan(
    s: ScalarSeries,
    tau_d: int,
    d_range: Sequence[int] = tuple(range(1, 11)),
    r_decades: Tuple[float, float] = (-2.5, -0.5),
    n_r: int = 12,
    max_points: int = 5000,
) -> DimensionScan:
    """
    Correlation exponent l(d) fitted over r = scale * 10^r_decades, with
    scale = std(s) sqrt(d). The embedding dimension is the smallest d whose
    exponent changes by less than 5 % at d + 1.
    """
    s.require_embeddable()
    _check_not_constant(s)
    dims = sorted(int(d) for d in d_range)
    slopes: List[float] = []
    for d in dims:
        y = Embedding(tau_d, d).vectors(s)[:max_points]
        scale = float(np.std(s.values)) * np.sqrt(d)
        r = scale * np.logspace(r_decades[0], r_decades[1], n_r)
        slopes.append(_slope(r, correlation_integral(y, r)))
        LOG.debug("correlation exponent d=%d -> %.4f", d, slopes[-1])
    for i in range(len(dims) - 1):
        a, b = slopes[i], slopes[i + 1]
        if np.isfinite(a) and np.isfinite(b) and abs(b - a) < SATURATION_TOLERANCE * abs(a):
            return DimensionScan(dims, slopes, dims[i], True)
    LOG.warning("Correlation exponent shows no saturation up to d=%d", dims[-1])
    return DimensionScan(dims, slopes, dims[-1], False)


def embed_dim(s: ScalarSeries, tau_d: int, d_range: Sequence[int] = tuple(range(1, 11)), **kwargs) -> int:
    return correlation_scan(s, tau_d, d_range, **kwargs).d_emb


# --------------------------------------------------------------------------- Jacobians and exponents


@dataclass
class JacobianFit:
    index: int
    matrix: np.ndarray
    residual: float


@dataclass
class JacobianSet:
    fits: List[JacobianFit]
    skipped: List[int]

    def by_index(self) -> dict:
        return {f.index: f.matrix for f in self.fits}


def _quadratic_terms(dy: np.ndarray) -> np.ndarray:
    d = dy.shape[1]
    cols = [dy[:, i] * dy[:, j] for i in range(d) for j in range(i, d)]
    return np.column_stack(cols) if cols else np.empty((dy.shape[0], 0))


def unknowns_per_row(d_emb: int, order: int = 2) -> int:
    return d_emb + (d_emb * (d_emb + 1) // 2 if order == 2 else 0)


class _NeighbourModel:
    """Maps y(n) -> y(n + 1) locally; vectors without a successor are excluded."""

    def __init__(self, s: ScalarSeries, emb: Embedding, k_neighbors: Optional[int], order: int, seed: int = 0):
        if order not in (1, 2):
            raise ValidationError(f"Local fit order must be 1 or 2, got {order}")
        s.require_embeddable()
        self.y = Embedding(emb.tau_d, emb.d_emb).vectors(s)
        self.d = emb.d_emb
        self.order = order
        need = unknowns_per_row(self.d, order)
        self.k = 2 * need if k_neighbors is None else int(k_neighbors)
        if self.k < need:
            raise ValidationError(f"k_neighbors={self.k} is below the {need} unknowns of an order-{order} fit")
        base = self.y[:-1]
        scale = float(np.std(base)) or 1.0
        jitter = np.random.default_rng(seed).normal(scale=JITTER * scale, size=base.shape)
        self.tree = cKDTree(base + jitter)

    def fit(self, n: int) -> Optional[JacobianFit]:
        _, idx = self.tree.query(self.y[n], k=self.k + 1)
        idx = np.asarray([i for i in np.atleast_1d(idx) if i != n][: self.k])
        dy = self.y[idx] - self.y[n]
        dz = self.y[idx + 1] - self.y[n + 1]
        design = dy if self.order == 1 else np.hstack([dy, 0.5 * _quadratic_terms(dy)])
        coef, _, rank, _ = np.linalg.lstsq(design, dz, rcond=None)
        if rank < design.shape[1]:
            return None
        resid = float(np.sqrt(np.mean((design @ coef - dz) ** 2)))
        return JacobianFit(n, coef[: self.d].T.copy(), resid)


def local_jacobians(
    s: ScalarSeries,
    emb: Embedding,
    k_neighbors: Optional[int] = None,
    order: int = 2,
    indices: Optional[Sequence[int]] = None,
) -> JacobianSet:
    model = _NeighbourModel(s, emb, k_neighbors, order)
    points = range(model.y.shape[0] - 1) if indices is None else indices
    fits: List[JacobianFit] = []
    skipped: List[int] = []
    for n in points:
        f = model.fit(int(n))
        if f is None:
            skipped.append(int(n))
        else:
            fits.append(f)
    if skipped:
        LOG.warning("Skipped %d rank-deficient neighbourhoods", len(skipped))
    return JacobianSet(fits, skipped)


def oseledec_exponent(jacobians: Sequence[np.ndarray], dt: float = 1.0, block: int = 1) -> float:
    """
    Largest local exponent (1/(L dt)) ln sigma_max(J_L ... J_1), with the product
    kept as an orthogonal factor times a rescaled triangular factor.
    `block` multiplies that many Jacobians directly between QR steps.
    """
    if not jacobians:
        raise ValidationError("Oseledec product of an empty Jacobian sequence")
    d = np.asarray(jacobians[0]).shape[0]
    q = np.eye(d)
    r_acc = np.eye(d)
    log_scale = 0.0
    for start in range(0, len(jacobians), block):
        m = q
        for j in jacobians[start: start + block]:
            m = np.asarray(j, dtype=float) @ m
        q, r = np.linalg.qr(m)
        r_acc = r @ r_acc
        peak = float(np.max(np.abs(r_acc)))
        if peak == 0.0:
            return float("-inf")
        r_acc /= peak
        log_scale += np.log(peak)
    sigma = float(np.linalg.svd(r_acc, compute_uv=False)[0])
    return (log_scale + np.log(sigma)) / (len(jacobians) * dt)


def lambda_L(
    s: ScalarSeries,
    emb: Embedding,
    L: int,
    n_starts: int = 100,
    seed: int = 0,
    k_neighbors: Optional[int] = None,
    order: int = 2,
) -> float:
    """Mean over random start points of the largest local exponent over L steps."""
    if L < 1:
        raise ValidationError(f"L must be >= 1, got {L}")
    model = _NeighbourModel(s, emb, k_neighbors, order, seed)
    last = model.y.shape[0] - 1 - L
    if last < 1:
        raise ValidationError(f"Series too short for L={L}")
    rng = np.random.default_rng(seed)
    cache: dict = {}
    values: List[float] = []
    for n0 in rng.integers(0, last, size=n_starts):
        mats = []
        for n in range(int(n0), int(n0) + L):
            if n not in cache:
                cache[n] = model.fit(n)
            if cache[n] is None:
                break
            mats.append(cache[n].matrix)
        if len(mats) < L:
            continue
        values.append(oseledec_exponent(mats, s.dt))
    if not values:
        raise UndefinedQuantifierError(f"No start point yielded {L} consecutive well-posed Jacobians")
    LOG.debug("lambda_L(L=%d) from %d/%d starts", L, len(values), n_starts)
    return float(np.mean(values))


@dataclass
class LambdaFit:
    lambda_inf: float
    m: float
    q: float
    residual: float


def _finite_size_model(L: np.ndarray, lam_inf: float, m: float, q: float) -> np.ndarray:
    return lam_inf + m / np.power(L, q)


def fit_lambda_inf(pairs: Sequence[Tuple[float, float]]) -> LambdaFit:
    """Least-squares fit of Lambda_L = Lambda_inf + m / L^q."""
    arr = np.asarray(pairs, dtype=float)
    if arr.ndim != 2 or arr.shape[0] < 3:
        raise ValidationError(f"Need at least 3 (L, Lambda_L) pairs, got {arr.shape[0] if arr.ndim == 2 else 0}")
    if arr.shape[0] < 14:
        LOG.warning("Fitting Lambda_inf from only %d values of L", arr.shape[0])
    L, lam = arr[:, 0], arr[:, 1]
    order = np.argsort(L)
    L, lam = L[order], lam[order]
    p0 = (lam[-1], (lam[0] - lam[-1]) * L[0], 1.0)
    params, _ = curve_fit(
        _finite_size_model,
        L,
        lam,
        p0=p0,
        bounds=([-np.inf, -np.inf, 1e-3], [np.inf, np.inf, 10.0]),
        maxfev=20000,
    )
    resid = float(np.sqrt(np.mean((_finite_size_model(L, *params) - lam) ** 2)))
    return LambdaFit(float(params[0]), float(params[1]), float(params[2]), resid)


# --------------------------------------------------------------------------- spectra


def power_spectrum(s: ScalarSeries) -> Tuple[np.ndarray, np.ndarray]:
    """Periodogram of the mean-removed series; frequencies in cycles per unit time."""
    freq, power = periodogram(s.values - s.values.mean(), fs=1.0 / s.dt, detrend=False, scaling="spectrum")
    return freq, power


def dominant_frequencies(freq: np.ndarray, power: np.ndarray, k: int = 5, rel_height: float = 1e-3) -> List[Tuple[float, float]]:
    """Up to k spectral peaks (frequency, power), strongest first; the zero bin is ignored."""
    freq = np.asarray(freq, dtype=float)
    power = np.asarray(power, dtype=float)
    if power.size < 3 or np.max(power) <= 0:
        return []
    padded = np.concatenate([[0.0], power, [0.0]])
    peaks, _ = find_peaks(padded, height=rel_height * float(np.max(power)))
    peaks = peaks - 1
    peaks = peaks[freq[peaks] > 0]
    top = peaks[np.argsort(power[peaks])[::-1][:k]]
    return [(float(freq[i]), float(power[i])) for i in top]


# --------------------------------------------------------------------------- pipeline


def logistic_series(n: int = 20000, r: float = 4.0, x0: float = 0.3141592653589793, discard: int = 100) -> ScalarSeries:
    """x_{k+1} = r x_k (1 - x_k) after `discard` transient steps."""
    if not 0.0 < x0 < 1.0:
        raise ValidationError(f"Logistic start x0 must lie in (0, 1), got {x0}")
    x = x0
    for _ in range(discard):
        x = r * x * (1.0 - x)
    out = np.empty(n)
    for i in range(n):
        out[i] = x
        x = r * x * (1.0 - x)
    return ScalarSeries(out)


@dataclass
class SeriesAnalysis:
    tau_d: int
    scan: DimensionScan
    lambdas: List[Tuple[int, float]]
    fit: Optional[LambdaFit]
    freq: np.ndarray = field(repr=False)
    power: np.ndarray = field(repr=False)
    peaks: List[Tuple[float, float]] = field(default_factory=list)


def analyse_series(
    s: ScalarSeries,
    L_values: Sequence[int] = tuple(range(5, 75, 5)),
    n_starts: int = 100,
    seed: int = 0,
    tau_d: Optional[int] = None,
    d_emb: Optional[int] = None,
    max_T: int = 100,
    n_bins: int = 16,
    d_range: Sequence[int] = tuple(range(1, 11)),
) -> SeriesAnalysis:
    """Delay, dimension, Lambda_L table, Lambda_inf fit and power spectrum in one pass."""
    s.require_embeddable()
    tau = tau_d if tau_d is not None else mi_delay(s, max_T, n_bins)
    scan = correlation_scan(s, tau, d_range)
    d = d_emb if d_emb is not None else scan.d_emb
    emb = Embedding(tau, d)
    LOG.info("Embedding: tau_d=%d d_emb=%d (saturated=%s)", tau, d, scan.saturated)
    lambdas = [(int(L), lambda_L(s, emb, int(L), n_starts, seed)) for L in L_values]
    fit = None
    if len(lambdas) >= 3:
        try:
            fit = fit_lambda_inf(lambdas)
        except (RuntimeError, ValueError) as e:
            LOG.warning("Lambda_inf fit did not converge: %s", e)
    freq, power = power_spectrum(s)
    return SeriesAnalysis(tau, scan, lambdas, fit, freq, power, dominant_frequencies(freq, power))
