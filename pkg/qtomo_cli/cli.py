from __future__ import annotations

import argparse
import logging
import os
import shutil
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from .errors import QtomoError
from .export import ingest_density, write_density_json, write_json
from .fock import partial_trace, purity
from .indicators import negativity, spin_xi_tei, xi_qmi
from .report import build_unresolved_md, write_report
from .runner import run
from .scenario import ScenarioConfig
from .squeezing import spin_min_variance, spin_second_order_variance
from .utils import ensure_dir, parse_range, run_key, safe_slug, sha256_file

LOG = logging.getLogger("qtomo")

SUBCOMMAND_OUTPUTS: Dict[str, List[str]] = {
    "evolve": ["evolve", "density"],
    "tomogram": ["tomogram"],
    "indicators": ["indicators"],
    "squeeze": ["squeezing"],
    "sweep": ["spectrum"],
    "timeseries": ["timeseries"],
    "chrono": ["chrono"],
}

# (dest, config key) pairs copied from parsed flags into the scenario
FLAG_KEYS = (
    ("name", "name"),
    ("preset", "preset"),
    ("system", "system"),
    ("cutoff", "cutoff"),
    ("times", "times"),
    ("time_scale", "time_scale"),
    ("n_x", "n_x"),
    ("n_theta", "n_theta"),
    ("seed", "seed"),
    ("n_angles", "n_angles"),
    ("n_prime", "n_prime"),
    ("q", "squeeze_q"),
    ("param", "sweep_param"),
    ("step", "sweep_step"),
    ("sector", "sector"),
    ("level", "level"),
    ("source", "ts_source"),
    ("column", "ts_column"),
    ("tau", "ts_tau"),
    ("dim", "ts_dim"),
    ("refine", "chrono_refine"),
    ("bins", "chrono_bins"),
)


def setup_logging(verbosity: int) -> None:
    level = logging.INFO
    if verbosity >= 2:
        level = logging.DEBUG
    logging.basicConfig(level=level, format="%(asctime)s | %(levelname)s | %(message)s")


def _load_dotenv_if_present() -> None:
    """Loads .env from the working directory when present; existing variables win."""
    env_path = Path(".env")
    if not env_path.exists():
        return
    try:
        from dotenv import load_dotenv

        load_dotenv(dotenv_path=str(env_path), override=False)
    except Exception as e:
        LOG.debug("dotenv not loaded: %s", e)


def _env(name: str) -> str | None:
    v = os.getenv(name)
    if v is None:
        return None
    v = v.strip()
    return v if v else None


def _common_options() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument(
        "--config",
        required=False,
        default=_env("QTOMO_SCENARIO"),
        help="Scenario file (key = value). Also via QTOMO_SCENARIO in .env",
    )
    p.add_argument(
        "--out",
        required=False,
        default=_env("QTOMO_OUT") or "./out",
        help="Output folder (default ./out). Also via QTOMO_OUT in .env",
    )
    p.add_argument("--format", choices=["csv", "json"], default="csv", help="Figure-data format (default csv)")
    p.add_argument("--clean-out", action="store_true", help="Replace an existing run directory.")
    p.add_argument("-v", "--verbose", action="count", default=0, help="Increase log verbosity (-v, -vv)")
    p.add_argument("--name", help="Run name used for the output directory")
    p.add_argument("--preset", help="Named preset from presets.json")
    p.add_argument("--system", help="KerrCubic|BEC|AtomField|TavisCummings|DJC|DTC|NMRSpin")
    p.add_argument("--cutoff", type=int, help="Fock cutoff N_max. Default via QTOMO_NMAX in .env")
    p.add_argument("--times", help='Instants, e.g. "0,1/2,1/3" (see --time-scale)')
    p.add_argument("--time-scale", dest="time_scale", help="none|trev|pi_over_g0|pi_over_U|pi_over_chi_s")
    p.add_argument("--x-range", dest="x_range", help='Quadrature range "min:max". Default via QTOMO_X_RANGE')
    p.add_argument("--n-x", dest="n_x", type=int, help="Quadrature samples. Default via QTOMO_NX")
    p.add_argument("--n-theta", dest="n_theta", type=int, help="Tomogram angles. Default via QTOMO_NTHETA")
    p.add_argument("--seed", type=int, help="Random seed. Default via QTOMO_SEED")
    p.add_argument("--n-angles", dest="n_angles", type=int, help="xi angle grid size. Default via QTOMO_ANGLE_GRID")
    p.add_argument("--n-prime", dest="n_prime", type=int, help="xi' angle grid size. Default via QTOMO_PRIME_GRID")
    return p


def parse_args(argv: Optional[Sequence[str]] = None) -> argparse.Namespace:
    _load_dotenv_if_present()
    common = _common_options()

    p = argparse.ArgumentParser(
        prog="qtomo",
        description="Simulate quantum states, render their tomograms and read squeezing and entanglement off them.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    sub.add_parser("run", parents=[common], help="Run every output listed in the scenario file")
    sub.add_parser("evolve", parents=[common], help="State along the time grid: energy, purity, density files")

    t = sub.add_parser("tomogram", parents=[common], help="Optical or spin tomograms at each instant")
    t.add_argument("--strands", action="store_true", help="Also count strands (full-circle grid)")
    t.add_argument("--symmetry", action="store_true", help="Also check the theta -> theta+pi reflection")

    sub.add_parser("indicators", parents=[common], help="Entanglement indicator series")

    s = sub.add_parser("squeeze", parents=[common], help="Quadrature, higher-order and spin squeezing")
    s.add_argument("--q", help='Orders, e.g. "1,2,3,4"')
    s.add_argument("--moments", action="store_true", help="Also compare tomogram moments with direct ones")

    w = sub.add_parser("sweep", parents=[common], help="Spectrum of one excitation sector across a parameter")
    w.add_argument("--param", help="Parameter to sweep, e.g. omega1")
    w.add_argument("--range", dest="sweep_range", help='Open interval "start:stop"')
    w.add_argument("--step", type=float, help="Sweep step")
    w.add_argument("--sector", type=int, help="Excitation number N")
    w.add_argument("--level", type=int, help="Eigenstate index k within the sector")
    w.add_argument("--with-indicators", action="store_true", help="Also compute indicators of level k")

    ts = sub.add_parser("timeseries", parents=[common], help="Delay, dimension and Lyapunov analysis of a series")
    ts.add_argument("--source", help='"logistic" or a CSV/XLSX indicator file')
    ts.add_argument("--column", help="Column of the indicator file")
    ts.add_argument("--tau", type=int, help="Fixed delay (skips the mutual-information search)")
    ts.add_argument("--dim", type=int, help="Fixed embedding dimension")

    c = sub.add_parser("chrono", parents=[common], help="Time-time slices and eps_TEI of the comb states")
    c.add_argument("--refine", type=int, help="Grid refinement factor")
    c.add_argument("--bins", type=int, help="Bins per half ridge spacing for eps_TEI (0 = one cell per grid point)")

    i = sub.add_parser("ingest", parents=[common], help="Validate a density-matrix file and report its indicators")
    i.add_argument("path", help="JSON file with dims, re, im")

    return p.parse_args(argv)


def _require_arg(value: str | None, flag: str, env_name: str) -> str:
    if value and value.strip():
        return value.strip()
    raise SystemExit(f"Missing {flag} (or {env_name} in .env)")


def _env_defaults() -> Dict[str, Any]:
    out: Dict[str, Any] = {
        "cutoff": _env("QTOMO_NMAX"),
        "n_x": _env("QTOMO_NX"),
        "n_theta": _env("QTOMO_NTHETA"),
        "seed": _env("QTOMO_SEED"),
        "n_angles": _env("QTOMO_ANGLE_GRID"),
        "n_prime": _env("QTOMO_PRIME_GRID"),
    }
    x_range = _env("QTOMO_X_RANGE")
    if x_range:
        out["x_min"], out["x_max"] = parse_range(x_range)
    return out


def _flags(args: argparse.Namespace) -> Dict[str, Any]:
    flags: Dict[str, Any] = {}
    for dest, key in FLAG_KEYS:
        v = getattr(args, dest, None)
        if v is not None:
            flags[key] = v
    if args.x_range:
        flags["x_min"], flags["x_max"] = parse_range(args.x_range)
    if getattr(args, "sweep_range", None):
        flags["sweep_start"], flags["sweep_stop"] = parse_range(args.sweep_range)
    return flags


def _outputs(args: argparse.Namespace) -> List[str]:
    outputs = list(SUBCOMMAND_OUTPUTS[args.command])
    if getattr(args, "strands", False):
        outputs.append("strands")
    if getattr(args, "symmetry", False):
        outputs.append("symmetry")
    if getattr(args, "moments", False):
        outputs.append("moments")
    if getattr(args, "with_indicators", False):
        outputs.append("indicators")
    return outputs


def build_config(args: argparse.Namespace) -> ScenarioConfig:
    flags = _flags(args)
    if args.command == "run":
        cfg = ScenarioConfig.load(Path(_require_arg(args.config, "--config", "QTOMO_SCENARIO")))
        cfg = cfg.merge_flags(flags)
    elif args.config:
        cfg = ScenarioConfig.load(Path(args.config)).merge_flags(flags).with_outputs(_outputs(args))
    else:
        cfg = ScenarioConfig.from_entries({k: str(v) if not isinstance(v, str) else v for k, v in flags.items()}, "command line")
        cfg = cfg.with_outputs(_outputs(args))
    return cfg.with_defaults(_env_defaults())


def _unresolved(
    out_root: Path, where: str, title: str, details: List[str], cfg: Optional[ScenarioConfig] = None
) -> int:
    unresolved_dir = out_root / "unresolved" / safe_slug(where)
    ensure_dir(unresolved_dir)
    resolved = cfg.resolved() if cfg is not None else None
    write_report(unresolved_dir / "unresolved.md", build_unresolved_md(title, details, resolved))
    return 2


def _ingest(args: argparse.Namespace, out_root: Path) -> int:
    path = Path(args.path).expanduser().resolve()
    LOG.info("Stage 1: Validate density matrix %s", path)
    rho = ingest_density(path)

    LOG.info("Stage 2: Indicators of the ingested state")
    summary: Dict[str, Any] = {"source": str(path), "dims": list(rho.space.dims), "purity": purity(rho)}
    n = rho.space.n_subsystems
    if set(rho.space.kinds) == {"qubit"} and n in (2, 3):
        # three qubits are read in the M, A, B order of the star-topology system
        pair = rho if n == 2 else partial_trace(rho, [1, 2])
        summary.update(
            {
                "xi_tei_nats": spin_xi_tei(pair),
                "xi_qmi": xi_qmi(pair, 0, 1),
                "negativity": negativity(pair, 0, 1),
                "two_var_min": 2.0 * spin_min_variance(pair).value,
                "eight_var2_min": 8.0 * spin_second_order_variance(pair).value,
            }
        )

    base_dir = out_root / run_key(path.stem, sha256_file(path))
    if base_dir.exists():
        if not args.clean_out:
            raise QtomoError(f"Output directory {base_dir} already exists; pass --clean-out to replace it")
        LOG.info("Cleaning output folder: %s", base_dir)
        shutil.rmtree(base_dir)
    ensure_dir(base_dir)
    write_density_json(base_dir / "density.json", rho)
    write_json(base_dir / "ingest.json", summary)
    LOG.info("Done. Output: %s", base_dir)
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = parse_args(argv)
    setup_logging(args.verbose)
    out_root = Path(args.out).expanduser().resolve()
    ensure_dir(out_root)

    cfg: Optional[ScenarioConfig] = None
    try:
        if args.command == "ingest":
            return _ingest(args, out_root)

        LOG.info("Stage 1: Resolve scenario")
        cfg = build_config(args)
        if not cfg.outputs:
            LOG.warning("Scenario '%s' lists no outputs; writing the manifest only", cfg.name)

        LOG.info("Stage 2: Compute %s", ", ".join(cfg.outputs) or "nothing")
        result = run(cfg, out_root, args.clean_out, args.format)
    except QtomoError as e:
        details = [str(e), f"Command: {args.command}"]
        if getattr(args, "config", None):
            details.append(f"Scenario file: {args.config}")
        code = _unresolved(out_root, args.command, f"Unresolved {args.command}", details, cfg)
        LOG.error("Unresolved: %s", e)
        return code

    LOG.info("Done. Output: %s", result.run_dir)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
