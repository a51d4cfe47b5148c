"""
Run orchestration: one scenario, one output directory.

Products are computed in the order listed under `outputs`. Every file lands
in `<out>/<slug>_<sha1[:8]>/` next to manifest.json (paths, SHA-256 hashes,
resolved configuration and headline numbers) and summary.md.
"""
from __future__ import annotations

import logging
import shutil
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np

from .chronocyclic import ALPHA, BETA, TTGrid, chrono_eps_tei, tt_tomogram
from .drivers import (
    bec_sweep_series,
    decoherence_series,
    hybrid_series,
    nmr_series,
    purity_series,
    tavis_sweep_series,
    two_mode_row,
)
from .dynamics import energy, spectrum_sweep
from .errors import ConfigError, DimensionError, QtomoError
from .export import emit_figure_data, read_series, write_density_json, write_json, write_series_xlsx, write_table_csv
from .fock import State, fidelity, mean_photon_number, partial_trace, purity
from .hamiltonians import BEC, DJC, DTC, NMRSpin, TavisCummings, default_space
from .indicators import IndicatorSeries, build_series, series_pcc
from .moments import moment_direct, moment_direct_two, moment_from_tomogram_single, moment_from_tomogram_two, quorum_angles
from .report import build_summary_md, write_report
from .scenario import ScenarioConfig
from .squeezing import (
    SqueezeReport,
    entropic_squeezing_report,
    hillery_dq,
    hong_mandel_report,
    spin_min_variance,
    spin_second_order_variance,
    two_mode_quadrature_report,
)
from .timeseries import ScalarSeries, analyse_series, logistic_series
from .tomography import (
    SPIN_AXES,
    QuadGrid,
    count_strands,
    spin_tomogram,
    tomogram_single,
    tomogram_symmetry_check,
    tomogram_two_mode,
)
from .utils import ensure_dir, run_key, sha256_file

LOG = logging.getLogger("qtomo")


@dataclass
class RunResult:
    run_dir: Path
    files: List[Path]
    headlines: Dict[str, Any]

    @property
    def manifest(self) -> Path:
        return self.run_dir / "manifest.json"


@dataclass
class _Run:
    cfg: ScenarioConfig
    dir: Path
    fmt: str = "csv"
    files: List[Path] = field(default_factory=list)
    headlines: Dict[str, Any] = field(default_factory=dict)
    warnings: List[str] = field(default_factory=list)

    def emit(self, product: Any, stem: str) -> Path:
        p = emit_figure_data(product, self.dir / stem, self.fmt)
        self.files.append(p)
        return p

    def table(self, name: str, header: Sequence[str], rows: Sequence[Sequence[Any]]) -> Path:
        p = write_table_csv(self.dir / name, header, rows)
        self.files.append(p)
        return p

    def series(self, s: IndicatorSeries, stem: str) -> None:
        self.emit(s, stem)
        self.files.append(write_series_xlsx(self.dir / f"{stem}.xlsx", s))


# --------------------------------------------------------------------------- helpers


def _mode_pair(state: State) -> State:
    modes = state.space.mode_indices
    if len(modes) < 2:
        raise DimensionError(f"Two bosonic modes needed, state has kinds {state.space.kinds}")
    keep = modes[:2]
    return state if state.space.n_subsystems == 2 else partial_trace(state, keep)


def _single_mode(state: State) -> State:
    modes = state.space.mode_indices
    if not modes:
        raise DimensionError(f"No bosonic mode in state with kinds {state.space.kinds}")
    return state if state.space.n_subsystems == 1 else partial_trace(state, [modes[0]])


def _spin_pair(cfg: ScenarioConfig, state: State) -> State:
    spec = cfg.spec()
    if isinstance(spec, NMRSpin):
        return partial_trace(state, [1, 2])
    if isinstance(spec, DJC):
        return partial_trace(state, [2, 3])
    if isinstance(spec, DTC):
        # (C1, D1) in the C1, C2, D1, D2 layout
        return partial_trace(state, [2, 4])
    raise DimensionError(f"{spec.kind} has no qubit pair")


def _is_single_mode(cfg: ScenarioConfig) -> bool:
    return len(cfg.space().mode_indices) == 1


def _full_circle(cfg: ScenarioConfig) -> QuadGrid:
    return QuadGrid.uniform(cfg.get("x_min"), cfg.get("x_max"), cfg.get("n_x"), cfg.get("n_theta"), True)


def _pair_grid(cfg: ScenarioConfig, thetas: Sequence[float]) -> QuadGrid:
    return QuadGrid(cfg.get("x_min"), cfg.get("x_max"), cfg.get("indicator_n_x"), tuple(sorted(thetas)))


def _squeeze_thetas(theta: float) -> List[float]:
    a = float(np.mod(theta, 2 * np.pi))
    b = float(np.mod(theta + np.pi / 2, 2 * np.pi))
    return sorted({a, b})


# --------------------------------------------------------------------------- products


def _evolve(run: _Run) -> None:
    cfg = run.cfg
    spec = cfg.spec()
    start = cfg.initial_state()
    modes = start.space.mode_indices
    header = ["t", "energy", "purity", "fidelity_to_start"] + [f"n_{i}" for i in modes]
    rows = []
    for t in cfg.times():
        s = cfg.state_at(float(t))
        row = [float(t), energy(s, spec), purity(s), fidelity(s, start)]
        row += [mean_photon_number(s, i) for i in modes]
        rows.append(row)
    run.table("evolve.csv", header, rows)
    run.headlines["evolve_points"] = len(rows)


def _density(run: _Run) -> None:
    for i, t in enumerate(run.cfg.times()):
        p = write_density_json(run.dir / f"density_t{i:03d}.json", run.cfg.state_at(float(t)))
        run.files.append(p)


def _tomogram(run: _Run) -> None:
    cfg = run.cfg
    times = cfg.times()
    state0 = cfg.initial_state()
    if not state0.space.mode_indices:
        axes_sets = [(a, b) for a in SPIN_AXES for b in SPIN_AXES]
        for i, t in enumerate(times):
            st = spin_tomogram(_spin_pair(cfg, cfg.state_at(float(t))), axes_sets)
            rows = [[a + b, o, float(p)] for a, b in axes_sets for o, p in st.table((a, b)).items()]
            run.table(f"spin_tomogram_t{i:03d}.csv", ["axes", "outcome", "p"], rows)
        return
    grid = cfg.quad_grid()
    for i, t in enumerate(times):
        s = cfg.state_at(float(t))
        if len(s.space.mode_indices) >= 2:
            tomo = tomogram_two_mode(_mode_pair(s), grid, grid)
        else:
            tomo = tomogram_single(_single_mode(s), grid)
        run.emit(tomo, f"tomogram_t{i:03d}")
        LOG.debug("tomogram %d/%d at t=%.6g", i + 1, len(times), t)
    run.headlines["tomograms"] = len(times)


def _strands(run: _Run) -> None:
    cfg = run.cfg
    grid = _full_circle(cfg)
    rows = []
    for t in cfg.times():
        rows.append([float(t), count_strands(tomogram_single(_single_mode(cfg.state_at(float(t))), grid))])
    run.table("strands.csv", ["t", "strands"], rows)
    run.headlines["strands"] = [r[1] for r in rows]


def _symmetry(run: _Run) -> None:
    cfg = run.cfg
    grid = _full_circle(cfg)
    rows = []
    for t in cfg.times():
        rep = tomogram_symmetry_check(tomogram_single(_single_mode(cfg.state_at(float(t))), grid))
        rows.append([float(t), rep.max_deviation, rep.pairs_checked])
    run.table("symmetry.csv", ["t", "max_deviation", "pairs"], rows)
    run.headlines["symmetry_max_deviation"] = max(r[1] for r in rows)


def _indicator_series(cfg: ScenarioConfig) -> IndicatorSeries:
    spec = cfg.spec()
    settings = cfg.indicator_settings()
    if isinstance(spec, NMRSpin):
        return nmr_series(spec.chi_s, cfg.times())
    if isinstance(spec, (DJC, DTC)):
        return hybrid_series(spec, cfg.times(), cfg.get("pairs"), cfg.get("subsystem"))
    if cfg.has("sweep_param"):
        param, values = cfg.sweep()
        if isinstance(spec, BEC):
            return bec_sweep_series(spec, param, values, cfg.get("sector"), cfg.get("level"), settings)
        if isinstance(spec, TavisCummings):
            return tavis_sweep_series(spec, param, values, cfg.get("sector"), cfg.get("level"), cfg.get("qubit"))
        raise ConfigError(f"Indicator sweeps are defined for BEC and TavisCummings, not {spec.kind}")
    times = cfg.times()
    rows = [two_mode_row(cfg.state_at(float(t)), settings) for t in times]
    return build_series("t", times, rows)


def _indicators(run: _Run) -> None:
    s = _indicator_series(run.cfg)
    run.series(s, "indicators")
    run.headlines["indicator_points"] = len(s)
    if "xi_svne" not in s.names() or len(s) < 2:
        return
    for col in ("xi_tei", "xi_tei_nats", "xi_ipr", "xi_prime_tei", "negativity"):
        if col not in s.names():
            continue
        try:
            run.headlines[f"pcc_{col}_svne"] = series_pcc(s.column(col), s.column("xi_svne"))
        except QtomoError as e:
            run.warnings.append(f"pcc({col}, xi_svne): {e}")


def _spectrum(run: _Run) -> None:
    cfg = run.cfg
    spec = cfg.spec()
    param, values = cfg.sweep()
    n = cfg.get("sector")
    space = default_space(spec, n + 2) if isinstance(spec, TavisCummings) else None
    result = spectrum_sweep(spec, param, values, n, space)
    run.emit(result, "spectrum")
    gaps = result.min_gaps()
    run.table("min_gaps.csv", [param, "min_gap"], [[float(v), float(g)] for v, g in zip(result.values, gaps)])
    run.headlines["smallest_gap"] = float(np.min(gaps)) if gaps.size else float("nan")


def _squeeze_rows(cfg: ScenarioConfig, state: State) -> List[SqueezeReport]:
    spec = cfg.spec()
    qs = cfg.get("squeeze_q")
    theta = cfg.get("squeeze_theta")
    out: List[SqueezeReport] = []
    if isinstance(spec, (NMRSpin, DJC, DTC)):
        pair = _spin_pair(cfg, state)
        return [spin_min_variance(pair), spin_second_order_variance(pair)]
    if _is_single_mode(cfg):
        s = _single_mode(state)
        thetas = _squeeze_thetas(theta)
        t = tomogram_single(s, cfg.quad_grid().with_thetas(thetas))
        out += [hong_mandel_report(t, float(np.mod(theta, 2 * np.pi)), q) for q in qs]
        out += [entropic_squeezing_report(t, th) for th in thetas]
    else:
        s = _mode_pair(state)
        t = tomogram_two_mode(s, _pair_grid(cfg, [0.0]), _pair_grid(cfg, [0.0]))
        out += [two_mode_quadrature_report(t, q) for q in qs]
    for q in qs:
        for which in ("Z1", "Z2"):
            try:
                out.append(hillery_dq(s, q, which))
            except QtomoError as e:
                LOG.warning("Hillery %s q=%d skipped: %s", which, q, e)
    return out


def _squeezing(run: _Run) -> None:
    rows = []
    squeezed = 0
    for t in run.cfg.times():
        for rep in _squeeze_rows(run.cfg, run.cfg.state_at(float(t))):
            rows.append([float(t), rep.kind, rep.q, rep.value, rep.threshold, int(rep.squeezed)])
            squeezed += int(rep.squeezed)
    run.table("squeezing.csv", ["t", "kind", "q", "value", "threshold", "squeezed"], rows)
    run.headlines["squeezed_rows"] = squeezed


def _moments(run: _Run) -> None:
    cfg = run.cfg
    order = cfg.get("moment_order")
    rows = []
    worst = 0.0
    for t in cfg.times():
        s = cfg.state_at(float(t))
        if _is_single_mode(cfg):
            one = _single_mode(s)
            tomo = tomogram_single(one, cfg.quad_grid().with_thetas(quorum_angles(order)))
            for K in range(order + 1):
                for k in range(K + 1):
                    got, want = moment_from_tomogram_single(tomo, k, K - k), moment_direct(one, k, K - k)
                    worst = max(worst, abs(got - want))
                    rows.append([float(t), k, K - k, 0, 0, got.real, got.imag, want.real, want.imag])
            continue
        pair = _mode_pair(s)
        half = min(order, 3)
        g = _pair_grid(cfg, quorum_angles(half))
        tomo = tomogram_two_mode(pair, g, g)
        for Ka in range(half + 1):
            for Kb in range(half + 1):
                for k in range(Ka + 1):
                    for m in range(Kb + 1):
                        got = moment_from_tomogram_two(tomo, k, Ka - k, m, Kb - m)
                        want = moment_direct_two(pair, k, Ka - k, m, Kb - m)
                        worst = max(worst, abs(got - want))
                        rows.append([float(t), k, Ka - k, m, Kb - m, got.real, got.imag, want.real, want.imag])
    header = ["t", "k", "l", "m", "n", "tomogram_re", "tomogram_im", "direct_re", "direct_im"]
    run.table("moments.csv", header, rows)
    run.headlines["moment_max_abs_error"] = worst


def _decoherence(run: _Run) -> None:
    cfg = run.cfg
    spec = cfg.spec()
    if not isinstance(spec, BEC):
        raise ConfigError(f"decoherence output is defined for the BEC model, got {spec.kind}")
    rate = cfg.get("damping_rate")
    taus = cfg.gamma_taus() / rate
    s = decoherence_series(
        spec, cfg.alpha("a"), cfg.alpha("b"), cfg.t0(), cfg.get("damping"), rate, taus, cfg.get("cutoff"), cfg.indicator_settings()
    )
    run.series(s, "decoherence")
    run.headlines["decoherence_final_qmi"] = float(s.column("xi_qmi")[-1])


def _purity(run: _Run) -> None:
    cfg = run.cfg
    gts = cfg.gamma_taus()
    s = purity_series(cfg.state_at(cfg.t0()), cfg.get("damping"), gts)
    run.series(s, "purity")
    p = s.column("purity")
    run.headlines["purity_min"] = float(np.min(p))
    run.headlines["purity_final"] = float(p[-1])


def _scalar_series(cfg: ScenarioConfig) -> ScalarSeries:
    source = cfg.get("ts_source")
    if source == "logistic":
        return logistic_series(cfg.get("ts_length"))
    path = Path(source).expanduser()
    s = read_series(path)
    col = cfg.require("ts_column", "column of the indicator file")
    if col not in s.names():
        raise ConfigError(f"Column '{col}' not in {path}. Available: {s.names()}")
    dt = float(np.mean(np.diff(s.axis))) if len(s) > 1 else cfg.get("ts_dt")
    return ScalarSeries(s.column(col), dt if dt > 0 else cfg.get("ts_dt"))


def _timeseries(run: _Run) -> None:
    cfg = run.cfg
    s = _scalar_series(cfg)
    res = analyse_series(
        s,
        L_values=cfg.get("ts_L"),
        n_starts=cfg.get("ts_starts"),
        seed=cfg.get("seed"),
        tau_d=cfg.get("ts_tau"),
        d_emb=cfg.get("ts_dim"),
    )
    run.table("lambda_L.csv", ["L", "Lambda_L"], res.lambdas)
    run.table("dimension_scan.csv", ["d", "correlation_exponent"], list(zip(res.scan.dims, res.scan.slopes)))
    run.table("power_spectrum.csv", ["frequency", "power"], list(zip(res.freq, res.power)))
    run.table("peaks.csv", ["frequency", "power"], res.peaks)
    run.headlines["tau_d"] = res.tau_d
    run.headlines["d_emb"] = cfg.get("ts_dim") or res.scan.d_emb
    if res.fit is not None:
        run.headlines["lambda_inf"] = res.fit.lambda_inf
        run.headlines["lambda_fit_m"] = res.fit.m
        run.headlines["lambda_fit_q"] = res.fit.q


def _chrono(run: _Run) -> None:
    cfg = run.cfg
    p = cfg.comb_params()
    refine = cfg.get("chrono_refine")
    bins = cfg.get("chrono_bins")
    if bins < 0:
        raise ConfigError(f"chrono_bins must be >= 0 (0 = one cell per grid point), got {bins}")
    rows = []
    for kind in (ALPHA, BETA):
        g = TTGrid.for_comb(p, bins_per_half_ridge=bins or None)
        if refine > 1:
            g = g.refined(refine)
        w = tt_tomogram(kind, p, g)
        eps = chrono_eps_tei(w)
        run.emit(w, f"chrono_{kind}")
        rows.append([kind, p.K, g.n_t, g.dt, g.bin_width or 0.0, eps])
        run.headlines[f"chrono_eps_tei_{kind}"] = eps
    run.table("chrono.csv", ["state", "K", "n_t", "dt", "bin_width", "eps_tei"], rows)


PRODUCTS: Dict[str, Callable[[_Run], None]] = {
    "evolve": _evolve,
    "density": _density,
    "tomogram": _tomogram,
    "strands": _strands,
    "symmetry": _symmetry,
    "indicators": _indicators,
    "spectrum": _spectrum,
    "squeezing": _squeezing,
    "moments": _moments,
    "decoherence": _decoherence,
    "purity": _purity,
    "timeseries": _timeseries,
    "chrono": _chrono,
}


# --------------------------------------------------------------------------- entry points


def run(cfg: ScenarioConfig, out_root: Path, clean_out: bool = False, fmt: str = "csv") -> RunResult:
    out_root = Path(out_root).expanduser().resolve()
    run_dir = out_root / run_key(cfg.name, cfg.resolved_text())
    if run_dir.exists():
        if not clean_out:
            raise ConfigError(f"Output directory {run_dir} already exists; pass --clean-out to replace it")
        LOG.info("Cleaning output folder: %s", run_dir)
        shutil.rmtree(run_dir)
    ensure_dir(run_dir)

    r = _Run(cfg, run_dir, fmt)
    for i, product in enumerate(cfg.outputs, start=1):
        LOG.info("Stage %d: %s", i, product)
        PRODUCTS[product](r)

    outputs = [(p.relative_to(run_dir).as_posix(), sha256_file(p)) for p in r.files]
    manifest = {
        "name": cfg.name,
        "run": run_dir.name,
        "config": cfg.resolved(),
        "outputs": [{"path": rel, "sha256": digest} for rel, digest in outputs],
        "headlines": r.headlines,
        "warnings": r.warnings,
    }
    write_json(run_dir / "manifest.json", manifest)
    write_report(
        run_dir / "summary.md",
        build_summary_md(cfg.name, Path(run_dir.name), cfg.resolved(), outputs, r.headlines, r.warnings),
    )
    LOG.info("Run written to %s (%d files)", run_dir, len(r.files))
    return RunResult(run_dir, list(r.files), dict(r.headlines))


def run_scenario(
    path: Path,
    out_root: Path = Path("./out"),
    clean_out: bool = False,
    flags: Optional[Dict[str, Any]] = None,
    fmt: str = "csv",
) -> Path:
    cfg = ScenarioConfig.load(Path(path))
    if flags:
        cfg = cfg.merge_flags(flags)
    return run(cfg, out_root, clean_out, fmt).run_dir
