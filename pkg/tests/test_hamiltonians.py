import numpy as np
import pytest

from qtomo_cli.errors import DimensionError, ValidationError
from qtomo_cli.fock import ModeSpace
from qtomo_cli.hamiltonians import (
    BEC,
    DJC,
    DTC,
    SPEC_TYPES,
    AtomField,
    KerrCubic,
    NMRSpin,
    TavisCummings,
    build_hamiltonian,
    default_space,
    excitation_numbers,
)


SPECS = [
    KerrCubic(1.0, 0.3),
    BEC(1.0, 0.3, 0.2, 0.4),
    AtomField(1.0, 0.8, 0.5, 0.2),
    TavisCummings(1.0, 0.05, (0.9, 1.1), 0.2, 0.1),
    DJC(1.0, 0.5, 0.3),
    DTC(1.0, 0.5, 0.3),
    NMRSpin(1.0),
]


@pytest.mark.parametrize("spec", SPECS, ids=lambda s: s.kind)
def test_hamiltonian_is_hermitian(spec):
    h = build_hamiltonian(spec, default_space(spec, 3, 2))
    assert np.allclose(h, h.conj().T)


@pytest.mark.parametrize("spec", SPECS[:-1], ids=lambda s: s.kind)
def test_excitation_number_is_conserved(spec):
    space = default_space(spec, 3, 2)
    h = build_hamiltonian(spec, space)
    n = np.diag(excitation_numbers(spec, space)).astype(complex)
    assert np.allclose(h @ n - n @ h, 0.0)


def test_nmr_has_no_conserved_sector():
    assert excitation_numbers(NMRSpin(1.0), ModeSpace.qubits(3)) is None


def test_kerr_cubic_diagonal():
    h = build_hamiltonian(KerrCubic(1.0, 2.0), ModeSpace.single(4))
    n = np.arange(5)
    assert np.allclose(np.diag(h).real, n * (n - 1) + 2.0 * n * (n - 1) * (n - 2))


def test_layouts():
    assert default_space(TavisCummings(1.0, 0.0, (1.0, 1.0, 1.0), 0.1), 3).dims == (4, 2, 2, 2)
    assert default_space(DTC(1.0, 0.5, 0.3), 2).dims == (3, 3, 2, 2, 2, 2)
    with pytest.raises(DimensionError):
        build_hamiltonian(DJC(1.0, 0.5, 0.3), ModeSpace.modes(3, 3))


def test_parameter_validation():
    with pytest.raises(ValidationError):
        BEC(1.0, 0.0, 0.0, 0.5)
    with pytest.raises(ValidationError):
        AtomField(1.0, 1.0, -1.0, 0.1)
    with pytest.raises(ValidationError):
        TavisCummings(1.0, 0.0, (), 0.1)
    assert BEC(1.0, 3.0, 1.0, 4.0).lambda1 == pytest.approx(5.0)
    assert set(SPEC_TYPES) == {"KerrCubic", "BEC", "AtomField", "TavisCummings", "DJC", "DTC", "NMRSpin"}
