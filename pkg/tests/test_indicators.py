import numpy as np
import pytest
from scipy.integrate import simpson

from qtomo_cli.dynamics import Propagator, nmr_rho_ab, nmr_rho_t
from qtomo_cli.errors import UndefinedQuantifierError, ValidationError
from qtomo_cli.fock import ModeSpace, PureState, make_bell, make_coherent, make_fock, make_qubits, make_two_mode_squeezed, tensor
from qtomo_cli.hamiltonians import BEC, AtomField
from qtomo_cli.indicators import (
    angle_grid,
    build_series,
    eps_bd,
    eps_ipr,
    eps_pcc,
    eps_tei,
    hybrid_eps_tei,
    hybrid_xi_tei,
    indicator_grid,
    negativity,
    series_pcc,
    slice_indicator,
    spin_partition_xi_tei,
    spin_xi_tei,
    thresholded_mean,
    xi_average,
    xi_prime_tei,
    xi_qmi,
    xi_sle,
    xi_svne,
)
from qtomo_cli.tomography import QuadGrid, hybrid_tomogram, tomogram_two_mode


GRID = QuadGrid(-8.0, 8.0, 121, angle_grid(3))


@pytest.fixture(scope="module")
def product_tomogram():
    a = make_coherent(0.6, ModeSpace.single(12))
    b = make_coherent(0.4j, ModeSpace.single(12))
    return tomogram_two_mode(tensor(a, b), GRID, GRID)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_bhattacharyya_is_bounded_by_half_the_mutual_information(random_pure, seed):
    tomo = tomogram_two_mode(random_pure((4, 4), seed), GRID, GRID)
    for a in GRID.thetas:
        for b in GRID.thetas:
            assert eps_bd(tomo, a, b) <= eps_tei(tomo, a, b) / 2 + 1e-9


def test_product_state_slices(product_tomogram):
    for a in GRID.thetas:
        for b in GRID.thetas:
            assert eps_tei(product_tomogram, a, b) == pytest.approx(0.0, abs=1e-8)
            assert eps_pcc(product_tomogram, a, b) == pytest.approx(0.0, abs=1e-8)
            assert eps_bd(product_tomogram, a, b) == pytest.approx(0.0, abs=1e-8)
    assert xi_average(product_tomogram, "TEI", 3) == pytest.approx(0.0, abs=1e-8)


def test_ipr_factorises_on_product_slices(product_tomogram):
    w = product_tomogram.slice(0.0, 0.0)
    wa = simpson(w, x=GRID.x, axis=1)
    wb = simpson(w, x=GRID.x, axis=0)
    eta_a = simpson(wa ** 2, x=GRID.x)
    eta_b = simpson(wb ** 2, x=GRID.x)
    assert eps_ipr(product_tomogram, 0.0, 0.0) == pytest.approx((1 - eta_a) * (1 - eta_b), abs=1e-8)


def test_two_mode_squeezed_state():
    r = 0.5
    psi = make_two_mode_squeezed(r, ModeSpace.modes(20, 20))
    assert negativity(psi) == pytest.approx((np.exp(2 * r) - 1) / 2, abs=1e-6)
    assert xi_qmi(psi) == pytest.approx(2 * xi_svne(psi), abs=1e-10)
    assert xi_sle(psi) == pytest.approx(1 - 1 / np.cosh(2 * r), abs=1e-6)
    tomo = tomogram_two_mode(psi, GRID, GRID)
    assert eps_tei(tomo, 0.0, 0.0) > 0.1
    assert eps_pcc(tomo, 0.0, 0.0) == pytest.approx(np.tanh(2 * r), abs=1e-4)
    assert indicator_grid(tomo, "PCC", 3).shape == (3, 3)


def test_xi_from_state_builds_its_own_grid():
    psi = tensor(make_fock(1, ModeSpace.single(3)), make_fock(0, ModeSpace.single(3)))
    assert xi_average(psi, "TEI", 2, (-8.0, 8.0), 121) == pytest.approx(0.0, abs=1e-8)
    assert xi_prime_tei(psi, 2, (-8.0, 8.0), 121) == pytest.approx(0.0, abs=1e-8)


def test_thresholded_mean():
    assert thresholded_mean([1, 1, 1, 1, 10]) == pytest.approx(10.0)
    assert thresholded_mean([2, 2, 2]) == pytest.approx(2.0)
    with pytest.raises(ValidationError):
        thresholded_mean([])


def test_slice_indicator_dispatch(product_tomogram):
    ind = slice_indicator(product_tomogram, "tei", 0.0, GRID.thetas[1])
    assert ind.kind == "TEI"
    with pytest.raises(ValidationError):
        slice_indicator(product_tomogram, "KL", 0.0, 0.0)


def test_atom_field_ground_level_is_maximally_entangled():
    es = Propagator(AtomField(1.0, 1.0, 1.0, 1e-6), ModeSpace.modes(4, 4)).sector(4)
    assert xi_svne(es.state(0)) == pytest.approx(1.0, abs=1e-6)


def test_decoupled_bec_levels_are_fock_products():
    es = Propagator(BEC(1.0, 0.5, 1.0, 0.0), ModeSpace.modes(4, 4)).sector(4)
    for k in range(5):
        assert xi_svne(es.state(k)) == pytest.approx(0.0, abs=1e-10)


def test_bell_state_spin_indicators():
    bell = make_bell("psi_plus")
    assert spin_xi_tei(bell) == pytest.approx(np.log(2) / 3, abs=1e-10)
    assert spin_partition_xi_tei(bell, 1) == pytest.approx(spin_xi_tei(bell), abs=1e-10)
    assert spin_xi_tei(bell, base=2.0) == pytest.approx(1 / 3, abs=1e-10)
    assert xi_qmi(bell) == pytest.approx(2.0)
    assert negativity(bell) == pytest.approx(0.5)
    assert spin_xi_tei(make_qubits("01")) == pytest.approx(0.0, abs=1e-12)


def test_nmr_negativity_on_a_sub_pair():
    rho = nmr_rho_t(1.0, 0.1)
    assert negativity(rho, 1, 2) == pytest.approx(negativity(nmr_rho_ab(1.0, 0.1)), abs=1e-10)
    assert negativity(nmr_rho_ab(1.0, 0.1)) == pytest.approx(np.sin(0.4) / 2, abs=1e-10)


def test_hybrid_mutual_information():
    grid = QuadGrid.uniform(-8.0, 8.0, 201, 2)
    product = tensor(make_coherent(0.5, ModeSpace.single(10)), make_qubits("1"))
    assert hybrid_xi_tei(hybrid_tomogram(product, grid)) == pytest.approx(0.0, abs=1e-8)
    amps = np.zeros(8, dtype=complex)
    amps[0 * 2 + 0] = 1.0
    amps[1 * 2 + 1] = 1.0
    entangled = PureState.normalized(ModeSpace((4, 2)), amps)
    ht = hybrid_tomogram(entangled, grid)
    assert hybrid_eps_tei(ht, 0.0, "z") > 0.1
    assert hybrid_xi_tei(ht) > 0.0


def test_series_pcc_and_build_series():
    assert series_pcc([1, 2, 3], [2, 4, 6]) == pytest.approx(1.0)
    with pytest.raises(UndefinedQuantifierError):
        series_pcc([1, 1, 1], [1, 2, 3])
    series = build_series(
        "t",
        [0.0, 1.0],
        [{"xi_svne": 1.0, "xi_prime_tei": 0.4, "xi_sle": 0.5}, {"xi_svne": 0.5, "xi_prime_tei": 0.6, "xi_sle": 0.2}],
    )
    assert series.names() == ["xi_prime_tei", "xi_svne", "xi_sle", "d1", "d2", "Delta"]
    assert np.allclose(series.column("d1"), [0.6, 0.1])
    assert series.rows()[0][0] == 0.0
    assert len(series) == 2
    with pytest.raises(ValidationError):
        build_series("t", [0.0], [{"xi_sle": 1.0}])
    with pytest.raises(ValidationError):
        build_series("t", [0.0], [{"xi_tei": -0.5}])
