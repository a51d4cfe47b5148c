"""
Plot-ready files: CSV with a fixed column order and JSON with sorted keys,
floats written with 9 significant digits, plus xlsx for indicator series.
"""
from __future__ import annotations

import csv
import io
import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Sequence, Union

import numpy as np
from openpyxl import Workbook, load_workbook
from openpyxl.utils import get_column_letter

from .chronocyclic import TTSlice
from .dynamics import SweepResult
from .errors import ValidationError
from .fock import DensityMatrix, ModeSpace, State, as_density
from .indicators import IndicatorSeries
from .tomography import QuadGrid, Tomogram
from .utils import fmt_float, read_text, write_text

LOG = logging.getLogger("qtomo")

INGEST_TOLERANCE = 1e-6
FORMATS = ("csv", "json")


def _cell(v: Any) -> str:
    if isinstance(v, (float, np.floating)):
        return fmt_float(float(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return str(v)


def _num(x: float) -> float:
    return float(fmt_float(float(x)))


def _nested(a: np.ndarray) -> Any:
    if a.ndim == 0:
        return _num(a)
    return [_nested(x) for x in a]


def write_table_csv(path: Path, header: Sequence[str], rows: Sequence[Sequence[Any]]) -> Path:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(list(header))
    for r in rows:
        w.writerow([_cell(v) for v in r])
    write_text(path, buf.getvalue())
    return path


def jsonable(v: Any) -> Any:
    """Plain JSON types with every float cut to 9 significant digits."""
    if isinstance(v, dict):
        return {str(k): jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple, np.ndarray)):
        return [jsonable(x) for x in v]
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return _num(v)
    return v


def write_json(path: Path, data: Dict[str, Any]) -> Path:
    write_text(path, json.dumps(jsonable(data), indent=2, sort_keys=True) + "\n")
    return path


# --------------------------------------------------------------------------- tomograms


def _grid_meta(g: QuadGrid) -> Dict[str, Any]:
    return {"x_min": _num(g.x_min), "x_max": _num(g.x_max), "n_x": g.n_x, "thetas": [_num(t) for t in g.thetas]}


def tomogram_rows(t: Tomogram) -> List[List[float]]:
    rows: List[List[float]] = []
    if t.modes == 1:
        x = t.grid.x
        for i, th in enumerate(t.grid.thetas):
            rows.extend([th, xv, w] for xv, w in zip(x, t.values[i]))
        return rows
    ga, gb = t.grids
    xa, xb = ga.x, gb.x
    for i, ta in enumerate(ga.thetas):
        for j, tb in enumerate(gb.thetas):
            for k, xv in enumerate(xa):
                rows.extend([ta, tb, xv, yv, w] for yv, w in zip(xb, t.values[i, j, k]))
    return rows


def write_tomogram_csv(path: Path, t: Tomogram) -> Path:
    header = ["theta", "X", "w"] if t.modes == 1 else ["theta_a", "theta_b", "X_a", "X_b", "w"]
    return write_table_csv(path, header, tomogram_rows(t))


def write_tomogram_json(path: Path, t: Tomogram) -> Path:
    return write_json(path, {"modes": t.modes, "grids": [_grid_meta(g) for g in t.grids], "values": _nested(t.values)})


def read_tomogram_json(path: Path) -> Tomogram:
    data = json.loads(read_text(path))
    try:
        grids = tuple(QuadGrid(g["x_min"], g["x_max"], int(g["n_x"]), tuple(g["thetas"])) for g in data["grids"])
        values = np.asarray(data["values"], dtype=float)
    except (KeyError, TypeError) as e:
        raise ValidationError(f"{path}: not a tomogram file ({e})") from e
    return Tomogram(grids, values)


# --------------------------------------------------------------------------- density matrices


def density_payload(state: State) -> Dict[str, Any]:
    rho = as_density(state)
    return {
        "dims": list(rho.space.dims),
        "kinds": list(rho.space.kinds),
        "re": _nested(rho.matrix.real),
        "im": _nested(rho.matrix.imag),
    }


def write_density_json(path: Path, state: State) -> Path:
    return write_json(path, density_payload(state))


def ingest_density(path: Path) -> DensityMatrix:
    """
    Load {dims, re, im} (kinds optional). Matrices within 1e-6 of Hermitian are
    symmetrised; trace and lowest eigenvalue must be within 1e-6 of valid.
    """
    path = Path(path)
    try:
        data = json.loads(read_text(path))
        dims = tuple(int(d) for d in data["dims"])
        m = np.asarray(data["re"], dtype=float) + 1j * np.asarray(data.get("im", 0.0), dtype=float)
    except (KeyError, TypeError, ValueError, AttributeError) as e:
        raise ValidationError(f"{path}: expected JSON with dims, re and im ({e})") from e
    space = ModeSpace(dims, tuple(data.get("kinds") or ()))
    if m.shape != (space.total, space.total):
        raise ValidationError(f"{path}: matrix shape {m.shape} does not match dims {dims}")
    asym = float(np.max(np.abs(m - m.conj().T)))
    if asym > INGEST_TOLERANCE:
        raise ValidationError(f"{path}: matrix is not Hermitian (asymmetry {asym:.3g} > {INGEST_TOLERANCE})")
    m = 0.5 * (m + m.conj().T)
    tr = float(np.trace(m).real)
    if abs(tr - 1.0) > INGEST_TOLERANCE:
        raise ValidationError(f"{path}: trace {tr:.9g} differs from 1 by more than {INGEST_TOLERANCE}")
    lowest = float(np.linalg.eigvalsh(m)[0])
    if lowest < -INGEST_TOLERANCE:
        raise ValidationError(f"{path}: negative eigenvalue {lowest:.3g} below -{INGEST_TOLERANCE}")
    if asym > 0:
        LOG.info("%s: symmetrised (asymmetry %.3g)", path.name, asym)
    return DensityMatrix(space, m / tr, check_psd=False)


# --------------------------------------------------------------------------- indicator series


def write_series_csv(path: Path, s: IndicatorSeries) -> Path:
    return write_table_csv(path, [s.axis_name] + s.names(), s.rows())


def write_series_json(path: Path, s: IndicatorSeries) -> Path:
    cols = {k: [_num(v) for v in s.columns[k]] for k in s.names()}
    return write_json(path, {"axis_name": s.axis_name, "axis": [_num(v) for v in s.axis], "columns": cols})


def _series_from_table(header: Sequence[Any], body: Sequence[Sequence[Any]], where: str) -> IndicatorSeries:
    if not header or header[0] is None:
        raise ValidationError(f"{where}: missing header row")
    names = [str(h).strip() for h in header]
    data = np.array([[np.nan if v in (None, "") else float(v) for v in r] for r in body if any(x not in (None, "") for x in r)], dtype=float)
    if data.size == 0:
        raise ValidationError(f"{where}: no data rows")
    cols = {n: data[:, i] for i, n in enumerate(names[1:], start=1)}
    return IndicatorSeries(names[0], data[:, 0], cols)


def read_series_csv(path: Path) -> IndicatorSeries:
    rows = list(csv.reader(io.StringIO(read_text(path))))
    if not rows:
        raise ValidationError(f"{path}: empty file")
    return _series_from_table(rows[0], rows[1:], str(path))


def write_series_xlsx(path: Path, s: IndicatorSeries, sheet_name: str = "Indicators") -> Path:
    wb = Workbook()
    ws = wb.active
    ws.title = sheet_name

    headers = [s.axis_name] + s.names()
    ws.append(headers)
    for r in s.rows():
        ws.append([float(v) for v in r])

    for col_idx, _ in enumerate(headers, start=1):
        letter = get_column_letter(col_idx)
        max_len = 10
        for cell in ws[letter]:
            if cell.value is None:
                continue
            max_len = max(max_len, len(str(cell.value)))
        ws.column_dimensions[letter].width = min(max_len + 2, 80)

    path.parent.mkdir(parents=True, exist_ok=True)
    wb.save(path)
    return path


def read_series_xlsx(path: Path, sheet_name: str = "Indicators") -> IndicatorSeries:
    wb = load_workbook(filename=str(path), data_only=True)
    if sheet_name not in wb.sheetnames:
        raise ValidationError(f"Sheet '{sheet_name}' not found. Available: {wb.sheetnames}")
    ws = wb[sheet_name]
    header = next(ws.iter_rows(min_row=1, max_row=1, values_only=True))
    body = list(ws.iter_rows(min_row=2, values_only=True))
    return _series_from_table(header, body, f"{path}[{sheet_name}]")


def read_series(path: Path) -> IndicatorSeries:
    path = Path(path)
    if path.suffix.lower() == ".xlsx":
        return read_series_xlsx(path)
    return read_series_csv(path)


# --------------------------------------------------------------------------- dispatch


def sweep_rows(r: SweepResult) -> List[List[Any]]:
    rows: List[List[Any]] = []
    for v, es in zip(r.values, r.systems):
        for k, e in enumerate(es.energies):
            rows.append([float(v), r.sector, k, float(e)])
    return rows


def _chrono_rows(w: TTSlice) -> List[List[float]]:
    return [[float(u), float(v)] for u, v in zip(w.grid.lags(), w.lag_values)]


def emit_figure_data(product: Union[Tomogram, DensityMatrix, IndicatorSeries, SweepResult, TTSlice], path: Path, fmt: str = "csv") -> Path:
    """Write one product as CSV or JSON; the suffix of `path` is replaced by the format."""
    if fmt not in FORMATS:
        raise ValidationError(f"Unknown format '{fmt}'. Use one of {', '.join(FORMATS)}")
    path = Path(path).with_suffix("." + fmt)
    if isinstance(product, Tomogram):
        return write_tomogram_csv(path, product) if fmt == "csv" else write_tomogram_json(path, product)
    if isinstance(product, IndicatorSeries):
        return write_series_csv(path, product) if fmt == "csv" else write_series_json(path, product)
    if isinstance(product, SweepResult):
        header = [product.param, "N", "k", "E"]
        if fmt == "csv":
            return write_table_csv(path, header, sweep_rows(product))
        return write_json(path, {"header": header, "rows": [[_num(x) for x in r] for r in sweep_rows(product)]})
    if isinstance(product, TTSlice):
        if fmt == "csv":
            return write_table_csv(path, ["t_I_minus_t_S", "w"], _chrono_rows(product))
        return write_json(
            path,
            {
                "kind": product.kind,
                "t_min": _num(product.grid.t_min),
                "t_max": _num(product.grid.t_max),
                "n_t": product.grid.n_t,
                "lag_values": [_num(v) for v in product.lag_values],
            },
        )
    if isinstance(product, DensityMatrix):
        if fmt == "json":
            return write_density_json(path, product)
        n = product.space.total
        rows = [[i, j, float(product.matrix[i, j].real), float(product.matrix[i, j].imag)] for i in range(n) for j in range(n)]
        return write_table_csv(path, ["row", "col", "re", "im"], rows)
    raise ValidationError(f"No export for {type(product).__name__}")
