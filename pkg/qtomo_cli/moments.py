"""
Normal-ordered moments recovered from optical tomograms.

For K = k + l the moment <a^dagger^k a^l> is a finite sum over the K + 1 slices
at theta_m = m pi / (K + 1) of Hermite-weighted integrals of the tomogram.
"""
from __future__ import annotations

import logging
from math import factorial
from typing import List, Sequence

import numpy as np
from scipy.integrate import simpson
from scipy.special import eval_hermite

from .errors import DimensionError, QuorumError, ValidationError
from .fock import MODE, State, as_density
from .operators import create, destroy, embed
from .tomography import ANGLE_TOLERANCE, QuadGrid, Tomogram

LOG = logging.getLogger("qtomo")

MAX_MOMENT_ORDER = 60


def quorum_angles(max_order: int) -> List[float]:
    """All angles needed to invert every moment with k + l <= max_order."""
    if max_order < 0:
        raise ValidationError(f"max_order must be >= 0, got {max_order}")
    out: List[float] = []
    for K in range(max_order + 1):
        for m in range(K + 1):
            th = m * np.pi / (K + 1)
            if all(abs(th - o) > ANGLE_TOLERANCE for o in out):
                out.append(th)
    return sorted(out)


def _order(k: int, l: int) -> int:
    if k < 0 or l < 0:
        raise ValidationError(f"Moment powers must be >= 0, got k={k}, l={l}")
    K = k + l
    if K > MAX_MOMENT_ORDER:
        raise ValidationError(f"Hermite degree {K} exceeds {MAX_MOMENT_ORDER}")
    return K


def _coefficient(k: int, l: int) -> float:
    K = k + l
    return factorial(k) * factorial(l) / (factorial(K + 1) * np.sqrt(2.0) ** K)


def _slice_indices(grid: QuadGrid, K: int, which: str) -> List[int]:
    idx = []
    for m in range(K + 1):
        th = m * np.pi / (K + 1)
        if not grid.has_theta(th):
            raise QuorumError(
                f"{which}: moment of order {K} needs theta = {m}pi/{K + 1}; "
                f"grid has {len(grid.thetas)} angles (build it with quorum_angles({K}))"
            )
        idx.append(grid.theta_index(th))
    return idx


def moment_from_tomogram_single(t: Tomogram, k: int, l: int) -> complex:
    """<a^dagger^k a^l> from a single-mode tomogram."""
    if t.modes != 1:
        raise DimensionError("moment_from_tomogram_single needs a single-mode tomogram")
    K = _order(k, l)
    grid = t.grid
    x = grid.x
    h = eval_hermite(K, x)
    total = 0j
    for m, i in enumerate(_slice_indices(grid, K, "mode")):
        th = m * np.pi / (K + 1)
        total += np.exp(-1j * (k - l) * th) * simpson(t.values[i] * h, x=x)
    return complex(_coefficient(k, l) * total)


def moment_from_tomogram_two(t: Tomogram, k: int, l: int, m: int, n: int) -> complex:
    """<a^dagger^k a^l b^dagger^m b^n> from a two-mode tomogram."""
    if t.modes != 2:
        raise DimensionError("moment_from_tomogram_two needs a two-mode tomogram")
    Ka, Kb = _order(k, l), _order(m, n)
    ga, gb = t.grids
    xa, xb = ga.x, gb.x
    ha, hb = eval_hermite(Ka, xa), eval_hermite(Kb, xb)
    idx_a = _slice_indices(ga, Ka, "mode A")
    idx_b = _slice_indices(gb, Kb, "mode B")
    total = 0j
    for mu, i in enumerate(idx_a):
        pa = np.exp(-1j * (k - l) * mu * np.pi / (Ka + 1))
        for nu, j in enumerate(idx_b):
            pb = np.exp(-1j * (m - n) * nu * np.pi / (Kb + 1))
            inner = simpson(t.values[i, j] * hb[None, :], x=xb, axis=-1)
            total += pa * pb * simpson(inner * ha, x=xa)
    return complex(_coefficient(k, l) * _coefficient(m, n) * total)


# --------------------------------------------------------------------------- direct expectations


def padded_operators(state: State, powers: Sequence[int]) -> tuple:
    """
    Density matrix and ladder operators on a copy of the state's space with
    every bosonic mode padded by max(powers) levels, so products of ladder
    operators act without truncation edge effects on the occupied levels.
    """
    rho = as_density(state)
    space = rho.space
    pad = max(powers) if powers else 0
    dims = tuple(d + pad if k == MODE else d for d, k in zip(space.dims, space.kinds))
    big = np.zeros((int(np.prod(dims)),) * 2, dtype=complex)
    src = rho.matrix.reshape(space.dims + space.dims)
    view = big.reshape(dims + dims)
    sl = tuple(slice(0, d) for d in space.dims)
    view[sl + sl] = src
    ops = {}
    for i in space.mode_indices:
        ops[i] = (embed(destroy(dims[i]), i, dims), embed(create(dims[i]), i, dims))
    return big, ops


def moment_direct(state: State, k: int, l: int, mode: int = 0) -> complex:
    """<a^dagger^k a^l> on a given mode by direct operator algebra."""
    rho, ops = padded_operators(state, [k + l])
    if mode not in ops:
        raise DimensionError(f"Subsystem {mode} is not a bosonic mode")
    a, ad = ops[mode]
    op = np.linalg.matrix_power(ad, k) @ np.linalg.matrix_power(a, l)
    return complex(np.trace(op @ rho))


def moment_direct_two(state: State, k: int, l: int, m: int, n: int) -> complex:
    rho, ops = padded_operators(state, [k + l, m + n])
    if 0 not in ops or 1 not in ops:
        raise DimensionError("moment_direct_two needs bosonic modes at indices 0 and 1")
    a, ad = ops[0]
    b, bd = ops[1]
    mp = np.linalg.matrix_power
    op = mp(ad, k) @ mp(a, l) @ mp(bd, m) @ mp(b, n)
    return complex(np.trace(op @ rho))
