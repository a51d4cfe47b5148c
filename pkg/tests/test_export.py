import json

import numpy as np
import pytest

from qtomo_cli.dynamics import nmr_rho_ab, spectrum_sweep
from qtomo_cli.errors import ValidationError
from qtomo_cli.export import (
    emit_figure_data,
    ingest_density,
    read_series,
    read_series_xlsx,
    read_tomogram_json,
    write_density_json,
    write_series_csv,
    write_series_xlsx,
    write_tomogram_json,
)
from qtomo_cli.fock import ModeSpace, make_coherent
from qtomo_cli.hamiltonians import BEC
from qtomo_cli.indicators import build_series
from qtomo_cli.tomography import QuadGrid, tomogram_single


@pytest.fixture
def series():
    return build_series(
        "t",
        [0.0, 0.5, 1.0],
        [
            {"xi_tei": 0.1, "xi_svne": 0.2},
            {"xi_tei": 0.3, "xi_svne": 0.5},
            {"xi_tei": 0.25, "xi_svne": 0.4},
        ],
    )


def _write(path, payload):
    path.write_text(json.dumps(payload), encoding="utf-8")
    return path


def test_density_round_trip_is_byte_identical(tmp_path):
    first = write_density_json(tmp_path / "a.json", nmr_rho_ab(1.0, 0.0))
    rho = ingest_density(first)
    second = write_density_json(tmp_path / "b.json", rho)
    assert first.read_bytes() == second.read_bytes()
    assert rho.space.dims == (2, 2)


def test_ingest_rejects_unphysical_matrices(tmp_path):
    bad = {
        "trace": {"dims": [2], "re": [[0.49, 0.0], [0.0, 0.5]], "im": [[0, 0], [0, 0]]},
        "negative": {"dims": [2], "re": [[1.5, 0.0], [0.0, -0.5]], "im": [[0, 0], [0, 0]]},
        "asymmetric": {"dims": [2], "re": [[0.5, 0.1], [0.0, 0.5]], "im": [[0, 0], [0, 0]]},
        "shape": {"dims": [3], "re": [[0.5, 0.0], [0.0, 0.5]], "im": [[0, 0], [0, 0]]},
        "keys": {"matrix": [[1.0]]},
    }
    for name, payload in bad.items():
        with pytest.raises(ValidationError):
            ingest_density(_write(tmp_path / f"{name}.json", payload))


def test_ingest_symmetrises_small_asymmetry(tmp_path):
    payload = {"dims": [2], "re": [[0.5, 0.2], [0.2 + 1e-8, 0.5]]}
    rho = ingest_density(_write(tmp_path / "near.json", payload))
    assert np.allclose(rho.matrix, rho.matrix.conj().T, atol=0.0)
    assert rho.matrix[0, 1].real == pytest.approx(0.2, abs=1e-8)


def test_tomogram_json_round_trip(tmp_path):
    tomo = tomogram_single(make_coherent(0.5, ModeSpace.single(10)), QuadGrid.uniform(-6.0, 6.0, 31, 3))
    first = write_tomogram_json(tmp_path / "t1.json", tomo)
    back = read_tomogram_json(first)
    assert back.values.shape == tomo.values.shape
    second = write_tomogram_json(tmp_path / "t2.json", back)
    assert first.read_bytes() == second.read_bytes()
    with pytest.raises(ValidationError):
        read_tomogram_json(_write(tmp_path / "nope.json", {"values": []}))


def test_tomogram_csv_layout(tmp_path):
    tomo = tomogram_single(make_coherent(0.5, ModeSpace.single(10)), QuadGrid.uniform(-6.0, 6.0, 31, 2))
    path = emit_figure_data(tomo, tmp_path / "tomo.dat")
    assert path.suffix == ".csv"
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "theta,X,w"
    assert len(lines) == 1 + 2 * 31


def test_series_tables_round_trip(tmp_path, series):
    for path in (write_series_csv(tmp_path / "s.csv", series), write_series_xlsx(tmp_path / "s.xlsx", series)):
        back = read_series(path)
        assert back.axis_name == "t"
        assert back.names() == series.names()
        for name in series.names():
            assert np.allclose(back.column(name), series.column(name))
    with pytest.raises(ValidationError):
        read_series_xlsx(tmp_path / "s.xlsx", sheet_name="Other")


def test_sweep_and_density_exports(tmp_path):
    sweep = spectrum_sweep(BEC(1.0, 0.0, 1.0, 0.25), "omega1", [0.0, 0.5], 2)
    path = emit_figure_data(sweep, tmp_path / "sweep", "csv")
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "omega1,N,k,E"
    assert len(lines) == 1 + 2 * 3
    as_json = json.loads(emit_figure_data(sweep, tmp_path / "sweep", "json").read_text(encoding="utf-8"))
    assert len(as_json["rows"]) == 6
    rho_csv = emit_figure_data(nmr_rho_ab(1.0, 0.1), tmp_path / "rho", "csv")
    assert len(rho_csv.read_text(encoding="utf-8").splitlines()) == 1 + 16


def test_unknown_format_and_product(tmp_path, series):
    with pytest.raises(ValidationError):
        emit_figure_data(series, tmp_path / "s", "xml")
    with pytest.raises(ValidationError):
        emit_figure_data([1, 2, 3], tmp_path / "s", "csv")
