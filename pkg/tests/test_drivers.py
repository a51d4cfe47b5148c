import numpy as np
import pytest

from qtomo_cli.drivers import (
    IndicatorSettings,
    bec_sweep_series,
    decoherence_series,
    evolution_series,
    hybrid_cutoff,
    hybrid_initial_state,
    hybrid_series,
    nmr_series,
    purity_series,
    tavis_spec,
    tavis_sweep_series,
    two_mode_row,
)
from qtomo_cli.dynamics import bec_analytic_state, evolve, sweep_values
from qtomo_cli.errors import DimensionError, ValidationError
from qtomo_cli.fock import ModeSpace, make_bell, make_coherent
from qtomo_cli.hamiltonians import BEC, DJC, DTC, KerrCubic
from qtomo_cli.indicators import series_pcc
from qtomo_cli.tomography import QuadGrid


SMALL = IndicatorSettings(n_angles=2, prime=False, x_range=(-8.0, 8.0), n_x=121, kinds=("TEI",))


def test_settings_grid_merges_both_angle_sets():
    grid = IndicatorSettings().grid()
    assert len(grid.thetas) == 10
    assert len(IndicatorSettings(n_angles=3, n_prime=4).grid().thetas) == 6
    assert len(IndicatorSettings(n_angles=3, prime=False).grid().thetas) == 3


def test_two_mode_row_needs_bosonic_modes():
    with pytest.raises(DimensionError):
        two_mode_row(make_bell(), SMALL)


def test_evolution_series_starts_from_a_product_state():
    spec = BEC(1.0, 0.3, 0.2, 0.4)
    psi = bec_analytic_state(0.5, 0.5j, 0, 0, spec, 0.0, ModeSpace.modes(10, 10))
    series = evolution_series(spec, psi, [0.0, 0.5], SMALL)
    assert len(series) == 2
    assert series.column("xi_tei")[0] == pytest.approx(0.0, abs=1e-8)
    assert series.column("xi_svne")[0] == pytest.approx(0.0, abs=1e-8)
    assert series.column("xi_svne")[1] > 0.0


def test_purity_after_damping_a_kerr_cat():
    psi = evolve(make_coherent(np.sqrt(10.0), ModeSpace.single(40)), KerrCubic(1.0, 0.0), np.pi / 2)
    gts = np.arange(0.0, 5.01, 0.5)
    purity = purity_series(psi, "amplitude", gts).column("purity")
    assert purity[0] == pytest.approx(1.0)
    assert purity.min() < 0.9
    assert purity[-1] > 0.998


def test_bec_sweep_tracks_entanglement():
    settings = IndicatorSettings(prime=False)
    series = bec_sweep_series(BEC(1.0, 0.0, 1.0, 0.25), "omega1", sweep_values(-1.0, 1.0, 0.02), 4, 2, settings)
    assert len(series) == 100
    assert "energy" in series.names()
    assert series_pcc(series.column("xi_tei"), series.column("xi_svne")) >= 0.94
    assert series_pcc(series.column("xi_ipr"), series.column("xi_svne")) >= 0.96
    with pytest.raises(ValidationError):
        bec_sweep_series(BEC(1.0, 0.0, 1.0, 0.25), "omega1", [0.1], 4, 5, settings)


def test_damping_mode_a_leaves_b_entropy_unchanged():
    series = decoherence_series(BEC(1.0, 0.3, 0.2, 0.4), 0.7, 0.7, 1.0, "amplitude", 0.5, [0.0, 1.0, 2.0], 10, SMALL)
    assert series.axis_name == "gamma_tau"
    assert np.allclose(series.axis, [0.0, 0.5, 1.0])
    b = series.column("xi_svne_b")
    assert np.allclose(b, b[0], atol=1e-8)
    assert series.column("xi_qmi")[-1] < series.column("xi_qmi")[0]


def test_double_jaynes_cummings_keeps_atom_correlations_at_resonance():
    series = hybrid_series(DJC(1.0, 1.0, 1.0), [0.0, np.pi], ("psi_plus",))
    assert np.allclose(series.column("xi_qmi"), 2.0, atol=1e-3)
    assert series.column("negativity")[0] == pytest.approx(0.5)


def test_double_tavis_cummings_initial_indicators():
    series = hybrid_series(DTC(1.0, 1.0, 1.0), [0.0], ("psi_plus", "psi_plus"))
    assert series.column("xi_qmi")[0] == pytest.approx(4.0, abs=1e-9)
    assert series.column("xi_tei_nats")[0] == pytest.approx(2 * np.log(2) / 3, abs=1e-9)


def test_hybrid_field_series_and_checks():
    series = hybrid_series(DJC(1.0, 1.0, 1.0), [0.0], ("psi_plus",), subsystem="field", settings=SMALL)
    assert series.column("xi_tei")[0] == pytest.approx(0.0, abs=1e-8)
    with pytest.raises(ValidationError):
        hybrid_series(DJC(1.0, 1.0, 1.0), [0.0], subsystem="qubits")
    with pytest.raises(ValidationError):
        hybrid_initial_state(DJC(1.0, 1.0, 1.0), ("psi_plus", "phi_plus"))
    assert hybrid_cutoff(2) == 8
    assert hybrid_initial_state(DJC(1.0, 1.0, 1.0)).space.dims == (9, 9, 2, 2)


def test_nmr_series_closed_forms():
    times = np.linspace(0.0, np.pi / 8, 9)
    series = nmr_series(1.0, times)
    s = np.sin(4 * times)
    p = np.clip((1 + s) / 2, 1e-300, 1.0)
    q = np.clip((1 - s) / 2, 1e-300, 1.0)
    entropy = -(p * np.log2(p) + np.where(s < 1, q * np.log2(q), 0.0))
    assert np.allclose(series.column("negativity"), s / 2, atol=1e-10)
    assert np.allclose(series.column("xi_qmi"), 2.0 - entropy, atol=1e-8)
    assert series_pcc(series.column("negativity"), series.column("xi_qmi")) > 0.9
    assert np.all(np.diff(series.column("two_var_min")) <= 1e-6)
    assert np.all(np.diff(series.column("eight_var2_min")) <= 1e-6)
    assert np.all(np.diff(series.column("spin_squeezing")) >= -1e-6)
    assert np.all(np.diff(series.column("second_order_squeezing")) >= -1e-6)
    tei = series.column("xi_tei_nats")
    assert "xi_tei" not in series.names()
    assert tei[0] == pytest.approx(np.log(2) / 9, abs=1e-10)
    assert series_pcc(tei, series.column("negativity")) > 0.9
    assert series_pcc(tei, series.column("xi_qmi")) > 0.9


def test_tavis_cummings_bright_state():
    spec = tavis_spec(1.0, 0.0, 0.1, 0.0, 1.0, 0.0, 2, seed=0)
    assert spec.omegas == (1.0, 1.0)
    grid = QuadGrid.uniform(-6.0, 6.0, 81, 2)
    series = tavis_sweep_series(spec, "lam", [0.05, 0.15], 1, 0, grid=grid)
    assert np.allclose(series.column("energy"), [-np.sqrt(2) * 0.05, -np.sqrt(2) * 0.15])
    assert np.allclose(series.column("xi_svne"), 1.0, atol=1e-8)
    assert np.all(series.column("xi_tei") >= 0.0)
    with pytest.raises(ValidationError):
        tavis_sweep_series(spec, "lam", [0.1], 1, 0, qubit=3, grid=grid)
