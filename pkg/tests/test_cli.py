import json
import logging

import numpy as np
import pytest

from qtomo_cli.cli import build_config, main, parse_args
from qtomo_cli.dynamics import nmr_rho_ab
from qtomo_cli.export import write_density_json


def test_unknown_system_is_reported_as_unresolved(clean_env):
    out = clean_env / "out"
    assert main(["evolve", "--system", "Dicke", "--out", str(out)]) == 2
    report = out / "unresolved" / "evolve" / "unresolved.md"
    assert report.exists()
    text = report.read_text(encoding="utf-8")
    assert text.startswith("# Unresolved evolve")
    assert "Dicke" in text
    assert "## Resolved Configuration" not in text


def test_unresolved_report_carries_the_resolved_scenario(clean_env):
    out = clean_env / "out"
    assert main(["chrono", "--bins", "-1", "--out", str(out)]) == 2
    text = (out / "unresolved" / "chrono" / "unresolved.md").read_text(encoding="utf-8")
    assert "chrono_bins must be >= 0" in text
    assert "## Resolved Configuration" in text
    assert "- chrono_bins = `-1`" in text


def test_run_needs_a_scenario(clean_env):
    with pytest.raises(SystemExit):
        main(["run", "--out", str(clean_env / "out")])


def test_options_follow_the_subcommand(clean_env):
    args = parse_args(["sweep", "--system", "BEC", "--param", "omega1", "--range=-1:1", "--step", "0.5"])
    assert args.command == "sweep"
    assert args.out == "./out"
    with pytest.raises(SystemExit):
        parse_args(["--system", "BEC", "sweep"])


def test_subcommand_outputs(clean_env):
    cfg = build_config(parse_args(["tomogram", "--preset", "kerr_cubic_instants", "--strands", "--symmetry"]))
    assert cfg.outputs == ["tomogram", "strands", "symmetry"]
    cfg = build_config(parse_args(["sweep", "--preset", "bec_sweep", "--range=-1:1", "--with-indicators"]))
    assert cfg.outputs == ["spectrum", "indicators"]
    assert cfg.get("sweep_start") == -1.0


def test_environment_supplies_defaults(clean_env, monkeypatch):
    monkeypatch.setenv("QTOMO_NX", "61")
    monkeypatch.setenv("QTOMO_X_RANGE", "-5:5")
    monkeypatch.setenv("QTOMO_NMAX", "12")
    cfg = build_config(parse_args(["chrono"]))
    assert cfg.get("n_x") == 61
    assert (cfg.get("x_min"), cfg.get("x_max")) == (-5.0, 5.0)
    assert cfg.get("cutoff") == 12
    explicit = build_config(parse_args(["chrono", "--n-x", "81"]))
    assert explicit.get("n_x") == 81


def test_dotenv_file_sets_the_output_folder(clean_env, monkeypatch):
    # registers QTOMO_OUT so teardown removes what load_dotenv sets
    monkeypatch.setenv("QTOMO_OUT", "placeholder")
    monkeypatch.delenv("QTOMO_OUT")
    (clean_env / ".env").write_text("QTOMO_OUT=from_dotenv\n", encoding="utf-8")
    assert parse_args(["chrono"]).out == "from_dotenv"


def test_flag_conflicting_with_the_file_is_ignored(clean_env, write_scenario, caplog):
    path = write_scenario("system=KerrCubic\nchi1=1\ncutoff=20\noutputs=evolve\n")
    with caplog.at_level(logging.WARNING, logger="qtomo"):
        cfg = build_config(parse_args(["run", "--config", str(path), "--cutoff", "30"]))
    assert cfg.get("cutoff") == 20
    assert "ignored" in caplog.text


def test_tomogram_command_writes_a_run(clean_env):
    out = clean_env / "out"
    code = main(["tomogram", "--preset", "kerr_cubic_instants", "--n-x", "61", "--n-theta", "2", "--out", str(out)])
    assert code == 0
    (run_dir,) = [p for p in out.iterdir() if p.is_dir()]
    assert len(list(run_dir.glob("tomogram_t*.csv"))) == 9
    manifest = json.loads((run_dir / "manifest.json").read_text(encoding="utf-8"))
    assert manifest["config"]["outputs"] == ["tomogram"]


def test_ingest_reports_pair_indicators(clean_env):
    src = write_density_json(clean_env / "rho.json", nmr_rho_ab(1.0, 0.1))
    out = clean_env / "out"
    assert main(["ingest", str(src), "--out", str(out)]) == 0
    (run_dir,) = [p for p in out.iterdir() if p.is_dir()]
    assert (run_dir / "density.json").exists()
    summary = json.loads((run_dir / "ingest.json").read_text(encoding="utf-8"))
    assert summary["dims"] == [2, 2]
    assert summary["negativity"] == pytest.approx(np.sin(0.4) / 2, abs=1e-8)
    assert main(["ingest", str(src), "--out", str(out)]) == 2
    assert main(["ingest", str(src), "--out", str(out), "--clean-out"]) == 0


def test_ingest_rejects_a_bad_matrix(clean_env):
    src = clean_env / "bad.json"
    src.write_text(json.dumps({"dims": [2], "re": [[1.5, 0.0], [0.0, -0.5]]}), encoding="utf-8")
    out = clean_env / "out"
    assert main(["ingest", str(src), "--out", str(out)]) == 2
    assert (out / "unresolved" / "ingest" / "unresolved.md").exists()
