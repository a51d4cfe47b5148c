import numpy as np
import pytest

from qtomo_cli.errors import ValidationError
from qtomo_cli.fock import ModeSpace, make_bell, make_coherent, make_spin_coherent, tensor
from qtomo_cli.moments import quorum_angles
from qtomo_cli.squeezing import (
    ENTROPY_BOUND,
    entropic_squeezing_report,
    hillery_dq,
    hong_mandel_report,
    hong_mandel_threshold,
    spin_min_variance,
    spin_second_order_variance,
    tomographic_entropy_slice,
    two_mode_quadrature_report,
)
from qtomo_cli.tomography import QuadGrid, tomogram_single, tomogram_two_mode


GRID = QuadGrid.uniform(n_theta=4)


def test_hong_mandel_thresholds():
    assert hong_mandel_threshold(1) == pytest.approx(0.5)
    assert hong_mandel_threshold(2) == pytest.approx(0.75)
    assert hong_mandel_threshold(1, modes=2) == pytest.approx(0.25)
    with pytest.raises(ValidationError):
        hong_mandel_threshold(0)


def test_coherent_state_sits_on_the_threshold(coherent_state):
    tomo = tomogram_single(coherent_state, GRID)
    for q, expected in ((1, 0.5), (2, 0.75)):
        report = hong_mandel_report(tomo, 0.0, q)
        assert report.value == pytest.approx(expected, abs=1e-6)
        assert not report.squeezed


def test_squeezed_vacuum_variance(squeezed_vacuum):
    tomo = tomogram_single(squeezed_vacuum(0.5), GRID)
    report = hong_mandel_report(tomo, 0.0, 1)
    assert report.value == pytest.approx(0.5 * np.exp(-1.0), abs=1e-6)
    assert report.squeezed
    assert not hong_mandel_report(tomo, np.pi / 2, 1).squeezed
    assert report.as_row()["kind"] == "hong_mandel"


def test_entropic_uncertainty(squeezed_vacuum, coherent_state):
    tomo = tomogram_single(squeezed_vacuum(0.5), GRID)
    total = tomographic_entropy_slice(tomo, 0.0) + tomographic_entropy_slice(tomo, np.pi / 2)
    assert total == pytest.approx(1.0 + np.log(np.pi), abs=1e-6)
    assert entropic_squeezing_report(tomo, 0.0).squeezed
    coherent = entropic_squeezing_report(tomogram_single(coherent_state, GRID), np.pi / 4)
    assert coherent.value == pytest.approx(ENTROPY_BOUND, abs=1e-6)


def test_two_mode_quadrature_of_a_product_state():
    a = make_coherent(0.5, ModeSpace.single(12))
    b = make_coherent(-0.3j, ModeSpace.single(12))
    grid = QuadGrid.uniform(-8.0, 8.0, 201, 2)
    report = two_mode_quadrature_report(tomogram_two_mode(tensor(a, b), grid, grid), 1)
    assert report.value == pytest.approx(0.25, abs=1e-6)
    assert not report.squeezed


def test_hillery_coherent_state_and_tomogram_path():
    psi = make_coherent(0.8 + 0.2j, ModeSpace.single(30))
    direct = hillery_dq(psi, 1)
    assert direct.value == pytest.approx(0.0, abs=1e-8)
    tomo = tomogram_single(psi, QuadGrid(-10.0, 10.0, 1001, tuple(quorum_angles(2))))
    assert hillery_dq(tomo, 1).value == pytest.approx(direct.value, abs=1e-4)
    assert hillery_dq(tomo, 1, "Z2").value == pytest.approx(hillery_dq(psi, 1, "Z2").value, abs=1e-4)


def test_hillery_detects_quadrature_squeezing(squeezed_vacuum):
    report = hillery_dq(squeezed_vacuum(0.5), 1)
    assert report.value == pytest.approx(np.exp(-1.0) - 1.0, abs=1e-6)
    assert report.squeezed
    with pytest.raises(ValidationError):
        hillery_dq(squeezed_vacuum(0.5), 0)
    with pytest.raises(ValidationError):
        hillery_dq(squeezed_vacuum(0.5), 1, "Z3")


def test_spin_coherent_pair_is_not_squeezed():
    report = spin_min_variance(make_spin_coherent(0.0, 0.0))
    assert report.value == pytest.approx(0.5, abs=1e-9)
    assert not report.squeezed


def test_spin_reports_on_a_bell_pair():
    first = spin_min_variance(make_bell("phi_minus"))
    # the singlet has <J> = 0 and no spin fluctuations at all
    assert first.value == pytest.approx(0.0, abs=1e-8)
    second = spin_second_order_variance(make_bell("psi_plus"))
    assert np.isfinite(second.value)
    assert second.value >= -1e-12
    assert second.threshold == pytest.approx(0.125)
