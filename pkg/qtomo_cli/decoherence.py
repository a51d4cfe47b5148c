from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .errors import DimensionError, ValidationError
from .fock import MODE, DensityMatrix, State, as_density

LOG = logging.getLogger("qtomo")

AMPLITUDE = "amplitude"
PHASE = "phase"


@dataclass(frozen=True)
class DampingParams:
    kind: str
    rate: float
    tau: float

    def __post_init__(self) -> None:
        if self.kind not in (AMPLITUDE, PHASE):
            raise ValidationError(f"Damping kind must be '{AMPLITUDE}' or '{PHASE}', got '{self.kind}'")
        if self.rate < 0 or self.tau < 0:
            raise ValidationError(f"Damping rate and tau must be >= 0, got rate={self.rate}, tau={self.tau}")

    @property
    def gt(self) -> float:
        return self.rate * self.tau


def _log_binom(n: np.ndarray, r: int) -> np.ndarray:
    return gammaln(n + r + 1) - gammaln(r + 1) - gammaln(n + 1)


def _amplitude_terms(dim: int, gt: float):
    """Yields (r, coefficient matrix over (n, n') of size dim-r)."""
    p = -np.expm1(-2.0 * gt)
    for r in range(dim):
        if r > 0 and p == 0.0:
            break
        n = np.arange(dim - r)
        log_c = 0.5 * _log_binom(n, r)
        log_coef = log_c[:, None] + log_c[None, :] - gt * (n[:, None] + n[None, :])
        if r > 0:
            log_coef = log_coef + r * np.log(p)
        yield r, np.exp(log_coef)


def _mode_view(rho: DensityMatrix, mode: int):
    space = rho.space
    if mode < 0 or mode >= space.n_subsystems or space.kinds[mode] != MODE:
        raise DimensionError(f"Subsystem {mode} of {space.kinds} is not a bosonic mode")
    d = space.dims[mode]
    left = int(np.prod(space.dims[:mode], dtype=int))
    right = int(np.prod(space.dims[mode + 1:], dtype=int))
    return rho.matrix.reshape(left, d, right, left, d, right), d


def _finish(rho: DensityMatrix, out: np.ndarray) -> DensityMatrix:
    n = rho.space.total
    m = out.reshape(n, n)
    m = 0.5 * (m + m.conj().T)
    return DensityMatrix(rho.space, m / np.trace(m).real, check_psd=False)


def amplitude_damp_mode(state: State, params: DampingParams, mode: int = 0) -> DensityMatrix:
    """Photon loss on one mode, summed exactly over the truncated space."""
    if params.kind != AMPLITUDE:
        raise ValidationError(f"Expected amplitude damping, got '{params.kind}'")
    rho = as_density(state)
    if params.gt == 0:
        return rho
    t, d = _mode_view(rho, mode)
    out = np.zeros_like(t)
    for r, coef in _amplitude_terms(d, params.gt):
        m = d - r
        out[:, :m, :, :, :m, :] += coef[None, :, None, None, :, None] * t[:, r:, :, :, r:, :]
    return _finish(rho, out)


def phase_damp_mode(state: State, params: DampingParams, mode: int = 0) -> DensityMatrix:
    if params.kind != PHASE:
        raise ValidationError(f"Expected phase damping, got '{params.kind}'")
    rho = as_density(state)
    if params.gt == 0:
        return rho
    t, d = _mode_view(rho, mode)
    n = np.arange(d)
    factor = np.exp(-params.gt * (n[:, None] - n[None, :]) ** 2)
    return _finish(rho, t * factor[None, :, None, None, :, None])


def amplitude_damp_single(state: State, params: DampingParams) -> DensityMatrix:
    if state.space.n_subsystems != 1:
        raise DimensionError(f"Single-mode channel applied to dims {state.space.dims}")
    return amplitude_damp_mode(state, params, 0)


def phase_damp_single(state: State, params: DampingParams) -> DensityMatrix:
    if state.space.n_subsystems != 1:
        raise DimensionError(f"Single-mode channel applied to dims {state.space.dims}")
    return phase_damp_mode(state, params, 0)


def damp_bipartite_modeA(state: State, params: DampingParams) -> DensityMatrix:
    """Damps subsystem A (index 0) of a two-mode state; B is left alone."""
    if state.space.n_subsystems != 2:
        raise DimensionError(f"Bipartite channel applied to dims {state.space.dims}")
    if params.kind == AMPLITUDE:
        return amplitude_damp_mode(state, params, 0)
    return phase_damp_mode(state, params, 0)


def damp(state: State, params: DampingParams, mode: int = 0) -> DensityMatrix:
    if params.kind == AMPLITUDE:
        return amplitude_damp_mode(state, params, mode)
    return phase_damp_mode(state, params, mode)
