import numpy as np
import pytest

from qtomo_cli.decoherence import (
    DampingParams,
    amplitude_damp_mode,
    amplitude_damp_single,
    damp,
    damp_bipartite_modeA,
    phase_damp_single,
)
from qtomo_cli.errors import DimensionError, ValidationError
from qtomo_cli.fock import ModeSpace, make_coherent, make_fock, make_qubits, make_two_mode_squeezed, mean_photon_number, partial_trace, tensor


def test_damped_single_photon():
    rho = amplitude_damp_single(make_fock(1, ModeSpace.single(3)), DampingParams("amplitude", 1.0, 0.3))
    p1 = np.exp(-0.6)
    assert np.allclose(np.diag(rho.matrix).real, [1 - p1, p1, 0.0, 0.0])


def test_damped_coherent_state_keeps_decaying_amplitude():
    rho = amplitude_damp_single(make_coherent(1.0, ModeSpace.single(20)), DampingParams("amplitude", 2.0, 0.2))
    assert mean_photon_number(rho) == pytest.approx(np.exp(-0.8), abs=1e-9)
    # a damped coherent state stays pure
    assert np.sum(np.abs(rho.matrix) ** 2) == pytest.approx(1.0, abs=1e-9)


def test_phase_damping_only_touches_coherences():
    psi = make_coherent(0.5, ModeSpace.single(10))
    before = psi.density().matrix
    rho = phase_damp_single(psi, DampingParams("phase", 1.0, 0.5))
    assert np.allclose(np.diag(rho.matrix), np.diag(before))
    assert rho.matrix[0, 1] == pytest.approx(before[0, 1] * np.exp(-0.5))
    assert rho.matrix[0, 2] == pytest.approx(before[0, 2] * np.exp(-2.0))


def test_zero_time_is_identity():
    psi = make_coherent(0.5, ModeSpace.single(10))
    assert np.allclose(damp(psi, DampingParams("amplitude", 1.0, 0.0)).matrix, psi.density().matrix)


def test_channel_output_is_physical(random_pure):
    psi = random_pure((6,), seed=3)
    for kind in ("amplitude", "phase"):
        rho = damp(psi, DampingParams(kind, 0.7, 1.0))
        assert np.trace(rho.matrix).real == pytest.approx(1.0)
        assert np.min(np.linalg.eigvalsh(rho.matrix)) > -1e-10


def test_bipartite_damping_leaves_the_other_mode_alone():
    psi = make_two_mode_squeezed(0.5, ModeSpace.modes(20, 20))
    for kind in ("amplitude", "phase"):
        rho = damp_bipartite_modeA(psi, DampingParams(kind, 1.0, 0.4))
        assert np.allclose(partial_trace(rho, 1).matrix, partial_trace(psi, 1).matrix, atol=1e-12)
    damped = damp_bipartite_modeA(psi, DampingParams("amplitude", 1.0, 0.4))
    assert mean_photon_number(damped, 0) == pytest.approx(np.sinh(0.5) ** 2 * np.exp(-0.8), abs=1e-8)


def test_hybrid_state_damps_the_field_only():
    state = tensor(make_fock(1, ModeSpace.single(2)), make_qubits("1"))
    rho = amplitude_damp_mode(state, DampingParams("amplitude", 1.0, 0.5))
    assert np.allclose(partial_trace(rho, 1).matrix, np.diag([0.0, 1.0]))
    with pytest.raises(DimensionError):
        damp(state, DampingParams("amplitude", 1.0, 0.5), mode=1)


def test_parameter_validation():
    with pytest.raises(ValidationError):
        DampingParams("thermal", 1.0, 1.0)
    with pytest.raises(ValidationError):
        DampingParams("amplitude", -1.0, 1.0)
    with pytest.raises(ValidationError):
        amplitude_damp_single(make_fock(0, ModeSpace.single(2)), DampingParams("phase", 1.0, 1.0))
    with pytest.raises(DimensionError):
        amplitude_damp_single(make_two_mode_squeezed(0.1, ModeSpace.modes(8, 8)), DampingParams("amplitude", 1.0, 1.0))
    assert DampingParams("phase", 0.5, 4.0).gt == pytest.approx(2.0)
