import logging

import numpy as np
import pytest

from qtomo_cli.chronocyclic import CombParams
from qtomo_cli.dynamics import nmr_rho_t
from qtomo_cli.errors import ConfigError
from qtomo_cli.scenario import ScenarioConfig, parse_entries


def test_unit_suffixes_store_angular_values():
    cfg = ScenarioConfig.from_entries({"system": "NMRSpin", "chi_s_over_2pi": "0.5"})
    assert cfg.spec().chi_s == pytest.approx(np.pi)
    parsed = parse_entries({"omega_bar_GHz_over_2pi": "19.2", "d_Omega_THz_over_2pi": "6"}, "test")
    assert parsed["omega_bar"] == pytest.approx(2 * np.pi * 19.2e9)
    assert parsed["d_Omega"] == pytest.approx(2 * np.pi * 6e12)


@pytest.mark.parametrize(
    "entries",
    [
        {"chi_z": "1"},
        {"chi_s": "1", "chi_s_over_2pi": "0.5"},
        {"cutoff_over_2pi": "3"},
        {"cutoff": "many"},
        {"full_circle": "maybe"},
        {"chi_s": "1,2"},
        {"outputs": "tomogram,hologram"},
        {"system": "Dicke"},
        {"time_scale": "fortnight"},
        {"preset": "no_such_preset"},
    ],
)
def test_bad_entries_are_config_errors(entries):
    with pytest.raises(ConfigError):
        ScenarioConfig.from_entries(entries)


def test_typed_values_and_fractions():
    cfg = ScenarioConfig.from_entries({"times": "0,1/2,1/3", "full_circle": "yes", "squeeze_q": "1,2", "pairs": "psi_plus; phi_minus"})
    assert cfg.get("times") == pytest.approx([0.0, 0.5, 1 / 3])
    assert cfg.get("full_circle") is True
    assert cfg.get("squeeze_q") == [1, 2]
    assert cfg.get("pairs") == ["psi_plus", "phi_minus"]
    assert cfg.get("n_x") == 1001
    with pytest.raises(ConfigError):
        cfg.get("not_a_key")


def test_load_reads_a_dotenv_file(write_scenario):
    path = write_scenario("# two-mode run\nsystem=BEC\nomega0=1\nomega1=0.5\nU=1\nlam=0.25\ncutoff=6\nstate=coherent\nalpha=0.5\n")
    cfg = ScenarioConfig.load(path)
    assert cfg.source == path
    assert cfg.system == "BEC"
    assert cfg.initial_state().space.dims == (7, 7)
    with pytest.raises(ConfigError):
        ScenarioConfig.load(path.with_name("missing.env"))


def test_preset_values_yield_to_the_file():
    cfg = ScenarioConfig.from_entries({"preset": "djc", "t_step": "0.25"})
    assert cfg.system == "DJC"
    assert cfg.times() == pytest.approx(np.pi * np.array([0.0, 0.25, 0.5, 0.75, 1.0]))
    assert cfg.initial_state().space.dims == (9, 9, 2, 2)


def test_revival_time_scale():
    cfg = ScenarioConfig.from_entries({"preset": "kerr_super_revival"})
    assert cfg.times() == pytest.approx([0.5 * np.pi * 5 ** 10])
    irrational = ScenarioConfig.from_entries({"system": "KerrCubic", "chi1": "1", "chi2": str(np.sqrt(2.0)), "times": "1", "time_scale": "trev"})
    with pytest.raises(ConfigError):
        irrational.times()


def test_time_scale_needs_a_matching_parameter():
    cfg = ScenarioConfig.from_entries({"system": "KerrCubic", "chi1": "1", "chi2": "0", "times": "1", "time_scale": "pi_over_g0"})
    with pytest.raises(ConfigError):
        cfg.times()


def test_flags_fill_gaps_but_never_override_the_file(caplog):
    cfg = ScenarioConfig.from_entries({"system": "KerrCubic", "chi1": "1", "chi2": "0", "cutoff": "20"})
    with caplog.at_level(logging.WARNING, logger="qtomo"):
        merged = cfg.merge_flags({"cutoff": 30, "n_x": "301", "n_theta": None})
    assert merged.get("cutoff") == 20
    assert merged.get("n_x") == 301
    assert "ignored" in caplog.text
    with pytest.raises(ConfigError):
        cfg.merge_flags({"bogus": 1})


def test_environment_defaults_are_silent(caplog):
    cfg = ScenarioConfig.from_entries({"system": "KerrCubic", "chi1": "1", "chi2": "0", "cutoff": "20"})
    with caplog.at_level(logging.WARNING, logger="qtomo"):
        filled = cfg.with_defaults({"cutoff": "50", "seed": "7"})
    assert filled.get("cutoff") == 20
    assert filled.get("seed") == 7
    assert caplog.text == ""


def test_resolved_text_is_stable():
    a = ScenarioConfig.from_entries({"system": "NMRSpin", "chi_s": "1"})
    b = ScenarioConfig.from_entries({"chi_s": "1", "system": "NMRSpin"})
    assert a.resolved_text() == b.resolved_text()
    assert '"n_x":1001' in a.resolved_text()


def test_state_recipes():
    nmr = ScenarioConfig.from_entries({"system": "NMRSpin", "chi_s": "1"})
    assert np.allclose(nmr.state_at(0.2).matrix, nmr_rho_t(1.0, 0.2).matrix)
    with pytest.raises(ConfigError):
        ScenarioConfig.from_entries({"system": "NMRSpin", "chi_s": "1", "state": "coherent"}).initial_state()
    thermal = ScenarioConfig.from_entries(
        {"system": "BEC", "omega0": "1", "omega1": "0", "U": "1", "lam": "0", "cutoff": "4", "state": "thermal", "nbar": "1"}
    )
    with pytest.raises(ConfigError):
        thermal.initial_state()
    with pytest.raises(ConfigError):
        ScenarioConfig.from_entries({"system": "BEC", "omega0": "1"}).spec()


def test_comb_parameters():
    ref = CombParams.reference()
    cfg = ScenarioConfig.from_entries({"preset": "chrono_comb"})
    p = cfg.comb_params()
    assert p.omega_bar == pytest.approx(ref.omega_bar)
    assert p.K == ref.K
    lo, _ = ref.teeth()
    windowed = ScenarioConfig.from_entries({"teeth": f"{lo},{lo + 4}"}).comb_params()
    assert windowed.K == 5
    with pytest.raises(ConfigError):
        ScenarioConfig.from_entries({"teeth": "1,2,3"}).comb_params()
