import json

import pytest

from qtomo_cli.chronocyclic import CombParams
from qtomo_cli.errors import ConfigError
from qtomo_cli.runner import run, run_scenario
from qtomo_cli.scenario import ScenarioConfig


NMR = {
    "name": "nmr_small",
    "system": "NMRSpin",
    "chi_s": "1",
    "t_start": "0",
    "t_stop": "0.125",
    "t_step": "0.025",
    "time_scale": "pi_over_chi_s",
    "outputs": "indicators,density",
}


def _names(run_dir):
    return sorted(p.name for p in run_dir.iterdir())


def test_empty_outputs_write_only_the_manifest(tmp_path):
    result = run(ScenarioConfig.from_entries({"name": "empty"}), tmp_path)
    assert result.files == []
    assert _names(result.run_dir) == ["manifest.json", "summary.md"]
    manifest = json.loads(result.manifest.read_text(encoding="utf-8"))
    assert manifest["outputs"] == []
    assert manifest["name"] == "empty"
    assert "manifest.json only" in (result.run_dir / "summary.md").read_text(encoding="utf-8")


def test_reruns_are_reproducible(tmp_path):
    cfg = ScenarioConfig.from_entries(NMR)
    first = run(cfg, tmp_path)
    before = (first.run_dir / "indicators.csv").read_bytes()
    manifest = json.loads(first.manifest.read_text(encoding="utf-8"))
    listed = {o["path"] for o in manifest["outputs"]}
    assert {"indicators.csv", "indicators.xlsx", "density_t000.json"} <= listed
    assert len([n for n in listed if n.startswith("density_t")]) == 6
    with pytest.raises(ConfigError):
        run(cfg, tmp_path)
    second = run(cfg, tmp_path, clean_out=True)
    assert second.run_dir == first.run_dir
    assert (second.run_dir / "indicators.csv").read_bytes() == before


def test_run_directory_depends_on_the_configuration(tmp_path):
    a = run(ScenarioConfig.from_entries({"name": "same", "seed": "1"}), tmp_path)
    b = run(ScenarioConfig.from_entries({"name": "same", "seed": "2"}), tmp_path)
    assert a.run_dir != b.run_dir
    assert a.run_dir.name.startswith("same_")


def test_json_format(tmp_path):
    result = run(ScenarioConfig.from_entries(NMR), tmp_path, fmt="json")
    assert (result.run_dir / "indicators.json").exists()
    assert not (result.run_dir / "indicators.csv").exists()


def test_kerr_tomograms_at_fractional_revivals(tmp_path):
    cfg = ScenarioConfig.from_entries({"preset": "kerr_cubic_instants", "n_x": "161", "n_theta": "8"})
    result = run(cfg, tmp_path)
    tomograms = [p for p in result.files if p.name.startswith("tomogram_t")]
    assert len(tomograms) == 9
    assert all(p.suffix == ".csv" for p in tomograms)
    assert result.headlines["tomograms"] == 9


def test_double_jaynes_cummings_indicators(tmp_path):
    result = run(ScenarioConfig.from_entries({"preset": "djc", "t_step": "0.25", "outputs": "indicators"}), tmp_path)
    lines = (result.run_dir / "indicators.csv").read_text(encoding="utf-8").splitlines()
    assert len(lines) == 1 + 5
    assert lines[0].startswith("t,")
    assert result.headlines["indicator_points"] == 5


def test_single_mode_squeezing_and_moments(tmp_path):
    cfg = ScenarioConfig.from_entries(
        {
            "system": "KerrCubic",
            "chi1": "1",
            "state": "coherent",
            "alpha": "1",
            "cutoff": "25",
            "times": "0",
            "n_x": "401",
            "moment_order": "3",
            "outputs": "squeezing,moments",
        }
    )
    result = run(cfg, tmp_path)
    assert (result.run_dir / "squeezing.csv").exists()
    assert result.headlines["moment_max_abs_error"] < 1e-3


def test_bec_spectrum_sweep(tmp_path):
    result = run(ScenarioConfig.from_entries({"preset": "bec_sweep", "sweep_step": "0.5", "outputs": "spectrum"}), tmp_path)
    lines = (result.run_dir / "spectrum.csv").read_text(encoding="utf-8").splitlines()
    assert lines[0] == "omega1,N,k,E"
    assert len(lines) == 1 + 4 * 5
    assert result.headlines["smallest_gap"] >= 0.0


def test_logistic_time_series(tmp_path):
    cfg = ScenarioConfig.from_entries(
        {"ts_length": "2000", "ts_L": "5,10,15,20,25", "ts_starts": "10", "ts_tau": "1", "ts_dim": "1", "outputs": "timeseries"}
    )
    result = run(cfg, tmp_path)
    assert {"lambda_L.csv", "dimension_scan.csv", "power_spectrum.csv", "peaks.csv"} <= set(_names(result.run_dir))
    assert result.headlines["tau_d"] == 1
    assert result.headlines["d_emb"] == 1


def test_chronocyclic_window(tmp_path):
    lo, _ = CombParams.reference().teeth()
    result = run(ScenarioConfig.from_entries({"teeth": f"{lo},{lo + 4}", "outputs": "chrono"}), tmp_path)
    assert result.headlines["chrono_eps_tei_alpha"] > result.headlines["chrono_eps_tei_beta"] > 0.0
    assert (result.run_dir / "chrono_alpha.csv").exists()


def test_decoherence_needs_the_two_mode_model(tmp_path):
    cfg = ScenarioConfig.from_entries({"system": "KerrCubic", "chi1": "1", "gamma_tau": "0,1", "outputs": "decoherence"})
    with pytest.raises(ConfigError):
        run(cfg, tmp_path)


def test_run_scenario_applies_flags(tmp_path, write_scenario):
    path = write_scenario("name=flagged\nsystem=KerrCubic\nchi1=1\nalpha=0.5\ncutoff=15\ntimes=0,0.5\noutputs=tomogram\n")
    run_dir = run_scenario(path, tmp_path / "out", flags={"n_x": 121, "n_theta": 2})
    manifest = json.loads((run_dir / "manifest.json").read_text(encoding="utf-8"))
    assert manifest["config"]["n_x"] == 121
    assert len(manifest["outputs"]) == 2


def test_chronocyclic_bins_setting(tmp_path):
    lo, _ = CombParams.reference().teeth()
    result = run(ScenarioConfig.from_entries({"teeth": f"{lo},{lo + 4}", "chrono_bins": "0", "outputs": "chrono"}), tmp_path)
    lines = (result.run_dir / "chrono.csv").read_text(encoding="utf-8").splitlines()
    assert lines[0] == "state,K,n_t,dt,bin_width,eps_tei"
    assert lines[1].split(",")[4] == "0"
    bad = ScenarioConfig.from_entries({"teeth": f"{lo},{lo + 4}", "chrono_bins": "-1", "outputs": "chrono"})
    with pytest.raises(ConfigError):
        run(bad, tmp_path / "bad")
