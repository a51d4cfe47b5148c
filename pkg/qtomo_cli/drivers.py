"""
Series drivers: evolve or sweep a model and collect indicator rows per point.

Every driver returns an IndicatorSeries; the CLI and runner only decide
which driver to call and where to write the result.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .decoherence import DampingParams, damp, damp_bipartite_modeA
from .dynamics import (
    Propagator,
    bec_analytic_state,
    evolve,
    nmr_rho_ab,
    spectrum_sweep,
    tavis_disorder_draw,
)
from .errors import DimensionError, ValidationError
from .fock import (
    MODE,
    ModeSpace,
    PureState,
    State,
    make_bell,
    make_fock,
    partial_trace,
    purity,
    tensor,
)
from .hamiltonians import BEC, DJC, DTC, TavisCummings, default_space
from .indicators import (
    IndicatorSeries,
    angle_grid,
    build_series,
    hybrid_xi_tei,
    indicator_grid,
    negativity,
    spin_partition_xi_tei,
    spin_xi_tei,
    thresholded_mean,
    xi_qmi,
    xi_sle,
    xi_svne,
)
from .squeezing import spin_min_variance, spin_second_order_variance
from .tomography import ANGLE_TOLERANCE, QuadGrid, hybrid_tomogram, tomogram_two_mode

LOG = logging.getLogger("qtomo")

ATOM_PAIRS = ("psi_plus", "phi_plus")


@dataclass(frozen=True)
class IndicatorSettings:
    """Angle grids and quadrature grid used for the tomographic columns."""

    n_angles: int = 5
    n_prime: int = 10
    x_range: Tuple[float, float] = (-10.0, 10.0)
    n_x: int = 201
    kinds: Tuple[str, ...] = ("TEI", "IPR", "PCC", "BD")
    prime: bool = True
    with_negativity: bool = True

    def grid(self) -> QuadGrid:
        angles: List[float] = []
        sizes = (self.n_angles, self.n_prime) if self.prime else (self.n_angles,)
        for n in sizes:
            for th in angle_grid(n):
                if all(abs(th - a) > ANGLE_TOLERANCE for a in angles):
                    angles.append(th)
        return QuadGrid(self.x_range[0], self.x_range[1], self.n_x, tuple(sorted(angles)))


def two_mode_row(state: State, settings: IndicatorSettings, modes: Sequence[int] = (0, 1)) -> Dict[str, float]:
    """Tomographic and density-matrix indicators of the (modes[0], modes[1]) reduction."""
    keep = list(modes)
    if len(keep) != 2 or any(state.space.kinds[i] != MODE for i in keep):
        raise DimensionError(f"two_mode_row needs two bosonic subsystems, got {keep} of {state.space.kinds}")
    pair = state if state.space.n_subsystems == 2 and keep == [0, 1] else partial_trace(state, keep)
    grid = settings.grid()
    t = tomogram_two_mode(pair, grid, grid)
    row: Dict[str, float] = {}
    for kind in settings.kinds:
        row["xi_" + kind.lower()] = float(np.mean(indicator_grid(t, kind, settings.n_angles)))
    if settings.prime:
        row["xi_prime_tei"] = thresholded_mean(indicator_grid(t, "TEI", settings.n_prime))
    row["xi_svne"] = xi_svne(pair, 0)
    row["xi_sle"] = xi_sle(pair, 0)
    row["xi_qmi"] = xi_qmi(pair, 0, 1)
    if settings.with_negativity:
        row["negativity"] = negativity(pair, 0, 1)
    return row


# --------------------------------------------------------------------------- bosonic pairs


def evolution_series(
    spec,
    state: State,
    times: Sequence[float],
    settings: Optional[IndicatorSettings] = None,
) -> IndicatorSeries:
    """Indicators of a two-mode state at each instant of its unitary evolution."""
    settings = settings or IndicatorSettings()
    rows = []
    for i, t in enumerate(times):
        rows.append(two_mode_row(evolve(state, spec, float(t)), settings))
        LOG.debug("evolution_series: point %d/%d (t=%.6g)", i + 1, len(times), t)
    LOG.info("Indicator series over %d instants for %s", len(times), spec.kind)
    return build_series("t", times, rows)


def bec_sweep_series(
    spec: BEC,
    param: str,
    values: Sequence[float],
    n_sector: int,
    level: int,
    settings: Optional[IndicatorSettings] = None,
) -> IndicatorSeries:
    """Indicators of eigenstate |psi_{N,level}> across a sweep of one BEC parameter."""
    settings = settings or IndicatorSettings(prime=False)
    if not 0 <= level <= n_sector:
        raise ValidationError(f"Level k={level} outside 0..{n_sector} for sector N={n_sector}")
    sweep = spectrum_sweep(spec, param, values, n_sector)
    rows = []
    for es in sweep.systems:
        row = two_mode_row(es.state(level), settings)
        row["energy"] = float(es.energies[level])
        rows.append(row)
    return build_series(param, sweep.values, rows)


def decoherence_series(
    spec: BEC,
    alpha_a: complex,
    alpha_b: complex,
    t0: float,
    kind: str,
    rate: float,
    taus: Sequence[float],
    cutoff: int,
    settings: Optional[IndicatorSettings] = None,
) -> IndicatorSeries:
    """
    BEC coherent pair evolved to t0, then damped on mode A for each tau.
    The axis is rate * tau; xi_svne is the A entropy and xi_svne_b the B entropy.
    """
    settings = settings or IndicatorSettings()
    space = default_space(spec, cutoff)
    start = bec_analytic_state(alpha_a, alpha_b, 0, 0, spec, t0, space)
    rows = []
    for tau in taus:
        rho = damp_bipartite_modeA(start, DampingParams(kind, rate, float(tau)))
        row = two_mode_row(rho, settings)
        row["xi_svne_b"] = xi_svne(rho, 1)
        rows.append(row)
    LOG.info("Damped mode A (%s, rate %.6g) over %d values of tau", kind, rate, len(taus))
    return build_series("gamma_tau", rate * np.asarray(taus, dtype=float), rows)


def purity_series(state: State, kind: str, gts: Sequence[float], mode: int = 0) -> IndicatorSeries:
    """Purity after damping one mode for each value of Gamma * tau (rate fixed to 1)."""
    rows = [{"purity": purity(damp(state, DampingParams(kind, 1.0, float(g)), mode))} for g in gts]
    return build_series("gamma_tau", gts, rows)


# --------------------------------------------------------------------------- double JC / TC


def hybrid_cutoff(excitation: int) -> int:
    """Photon cutoff for the double JC and TC models."""
    return 2 * int(excitation) + 4


def _atom_groups(spec: Union[DJC, DTC]) -> Tuple[List[int], List[int]]:
    if isinstance(spec, DJC):
        return [2], [3]
    return [2, 3], [4, 5]


def hybrid_initial_state(spec: Union[DJC, DTC], pairs: Sequence[str] = ("psi_plus",)) -> PureState:
    """
    Both fields in vacuum, atoms in Bell pairs. DJC takes one pair (C, D);
    DTC takes two, (C1, D1) then (C2, D2).
    """
    n_pairs = 1 if isinstance(spec, DJC) else 2
    if len(pairs) != n_pairs:
        raise ValidationError(f"{spec.kind} needs {n_pairs} atom pair label(s), got {list(pairs)}")
    bells = [make_bell(p).amplitudes.reshape(2, 2) for p in pairs]
    if n_pairs == 1:
        atoms = bells[0].reshape(-1)
    else:
        # layout C1, C2, D1, D2
        atoms = np.einsum("ac,bd->abcd", bells[0], bells[1]).reshape(-1)
    excited = [bin(i).count("1") for i in range(atoms.size)]
    excitation = max(e for e, c in zip(excited, atoms) if abs(c) > 0)
    cutoff = hybrid_cutoff(excitation)
    vac = make_fock(0, ModeSpace.single(cutoff))
    fields = tensor(vac, vac)
    atom_state = PureState.normalized(ModeSpace.qubits(2 * n_pairs), atoms)
    state = tensor(fields, atom_state)
    LOG.debug("%s initial state %s on dims %s", spec.kind, list(pairs), state.space.dims)
    return state


def hybrid_series(
    spec: Union[DJC, DTC],
    times: Sequence[float],
    pairs: Sequence[str] = ("psi_plus",),
    subsystem: str = "atoms",
    settings: Optional[IndicatorSettings] = None,
) -> IndicatorSeries:
    """
    Time series of the atomic pair (C, D) or of the field pair (A, B).

    atoms: spin xi_tei_nats, xi_svne and xi_sle of C, xi_qmi(C:D), negativity(C:D)
    field: the two-mode tomographic columns of (A, B)
    """
    if subsystem not in ("atoms", "field"):
        raise ValidationError(f"subsystem must be 'atoms' or 'field', got '{subsystem}'")
    settings = settings or IndicatorSettings(x_range=(-6.0, 6.0), n_x=121, kinds=("TEI",))
    state = hybrid_initial_state(spec, pairs)
    prop = Propagator(spec, state.space)
    c, d = _atom_groups(spec)
    rows = []
    for t in times:
        psi = prop.evolve(state, float(t)) if t != 0 else state
        if subsystem == "field":
            rows.append(two_mode_row(psi, settings, (0, 1)))
            continue
        cd = partial_trace(psi, c + d)
        n_c = len(c)
        rows.append(
            {
                "xi_tei_nats": spin_partition_xi_tei(cd, n_c) if n_c > 1 else spin_xi_tei(cd),
                "xi_svne": xi_svne(cd, list(range(n_c))),
                "xi_sle": xi_sle(cd, list(range(n_c))),
                "xi_qmi": xi_qmi(cd, list(range(n_c))),
                "negativity": negativity(cd, list(range(n_c))),
            }
        )
    LOG.info("%s %s series over %d instants", spec.kind, subsystem, len(times))
    return build_series("t", times, rows)


# --------------------------------------------------------------------------- spin systems


def nmr_series(chi_s: float, times: Sequence[float]) -> IndicatorSeries:
    """Indicators and squeezing measures of the (A, B) pair of the star-topology system."""
    rows = []
    for t in times:
        rho = nmr_rho_ab(chi_s, float(t))
        first = spin_min_variance(rho)
        second = spin_second_order_variance(rho)
        rows.append(
            {
                "xi_tei_nats": spin_xi_tei(rho),
                "xi_qmi": xi_qmi(rho, 0, 1),
                "negativity": negativity(rho, 0, 1),
                "two_var_min": 2.0 * first.value,
                "eight_var2_min": 8.0 * second.value,
                "spin_squeezing": 1.0 - 2.0 * first.value,
                "second_order_squeezing": 1.0 - 8.0 * second.value,
            }
        )
    return build_series("t", times, rows)


def tavis_spec(
    omega_f: float,
    chi: float,
    lam: float,
    lam_s: float,
    mean_gap: float,
    sigma_frac: float,
    M: int,
    seed: int,
    epsilon: float = 0.0,
) -> TavisCummings:
    """Tavis-Cummings spec whose qubit splittings are one disorder draw."""
    omegas = tavis_disorder_draw(mean_gap, sigma_frac, M, seed, epsilon)
    return TavisCummings(omega_f, chi, omegas, lam, lam_s)


def tavis_sweep_series(
    spec: TavisCummings,
    param: str,
    values: Sequence[float],
    n_sector: int,
    level: int,
    qubit: int = 1,
    grid: Optional[QuadGrid] = None,
) -> IndicatorSeries:
    """
    Energies and field-qubit indicators of one eigenstate across a sweep.
    The field is paired with qubit `qubit` (1-based position after the field).
    """
    if not 1 <= qubit <= spec.M:
        raise ValidationError(f"qubit must be in 1..{spec.M}, got {qubit}")
    cutoff = n_sector + 2
    space = default_space(spec, cutoff)
    sweep = spectrum_sweep(spec, param, values, n_sector, space)
    grid = grid or QuadGrid.uniform(-8.0, 8.0, 161, n_theta=5)
    rows = []
    for es in sweep.systems:
        if level >= es.energies.size:
            raise ValidationError(f"Sector N={n_sector} has {es.energies.size} levels, asked for k={level}")
        psi = es.state(level)
        fq = partial_trace(psi, [0, qubit])
        rows.append(
            {
                "energy": float(es.energies[level]),
                "xi_tei": hybrid_xi_tei(hybrid_tomogram(fq, grid)),
                "xi_svne": xi_svne(psi, 0),
                "xi_sle": xi_sle(psi, 0),
                "xi_qmi": xi_qmi(fq, 0, 1),
            }
        )
    return build_series(param, sweep.values, rows)
