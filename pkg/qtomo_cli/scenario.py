"""
Scenario files.

A scenario is a key-value text file read with python-dotenv (no variable
interpolation). Numeric keys may carry a unit suffix; the value is then a
frequency f and is stored as the angular value 2 pi f times the unit:

    omega_bar_GHz_over_2pi = 19.2      ->  omega_bar = 2 pi 19.2e9
    chi_s_over_2pi = 0.5               ->  chi_s = pi

`preset = <name>` pulls defaults from presets.json; keys in the file win.
"""
from __future__ import annotations

import dataclasses
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, FrozenSet, List, Mapping, Optional, Tuple

import numpy as np
from dotenv import dotenv_values

from .chronocyclic import BINS_PER_HALF_RIDGE, CombParams
from .drivers import IndicatorSettings, hybrid_initial_state, tavis_spec
from .dynamics import Propagator, bec_analytic_state, evolve, nmr_rho_t, revival_time, sweep_values
from .errors import ConfigError
from .fock import (
    ModeSpace,
    State,
    make_binomial,
    make_coherent,
    make_fock,
    make_pacs,
    make_thermal,
    make_two_mode_squeezed,
    tensor,
)
from .hamiltonians import BEC, DJC, DTC, SPEC_TYPES, HamiltonianSpec, NMRSpin, TavisCummings, default_space
from .tomography import QuadGrid
from .utils import parse_float_list

LOG = logging.getLogger("qtomo")

TWO_PI = 2.0 * math.pi

# longest first so "_GHz_over_2pi" is not read as "_over_2pi"
UNIT_SUFFIXES: Tuple[Tuple[str, float], ...] = (
    ("_THz_over_2pi", TWO_PI * 1e12),
    ("_GHz_over_2pi", TWO_PI * 1e9),
    ("_MHz_over_2pi", TWO_PI * 1e6),
    ("_Hz_over_2pi", TWO_PI),
    ("_over_2pi", TWO_PI),
)

STR, INT, INTS, FLOAT, FLOATS, STRS, BOOL = "str", "int", "ints", "float", "floats", "strs", "bool"

SCHEMA: Dict[str, str] = {
    "name": STR,
    "preset": STR,
    "system": STR,
    "outputs": STRS,
    "seed": INT,
    # Hamiltonian parameters
    "chi1": FLOAT,
    "chi2": FLOAT,
    "omega0": FLOAT,
    "omega1": FLOAT,
    "U": FLOAT,
    "lam": FLOAT,
    "omega_f": FLOAT,
    "omega_a": FLOAT,
    "gamma": FLOAT,
    "g": FLOAT,
    "chi": FLOAT,
    "omegas": FLOATS,
    "lam_s": FLOAT,
    "chi_f": FLOAT,
    "chi0": FLOAT,
    "g0": FLOAT,
    "chi_s": FLOAT,
    "mean_gap": FLOAT,
    "sigma_frac": FLOAT,
    "M": INT,
    "epsilon": FLOAT,
    # truncation and initial state
    "cutoff": INT,
    "cutoff_b": INT,
    "state": STR,
    "alpha": FLOAT,
    "alpha_phase": FLOAT,
    "alpha_b": FLOAT,
    "alpha_b_phase": FLOAT,
    "m": INT,
    "m_b": INT,
    "n": INT,
    "n_b": INT,
    "nbar": FLOAT,
    "zeta": FLOAT,
    "zeta_phase": FLOAT,
    "pairs": STRS,
    "sector": INT,
    "level": INT,
    # time grid
    "times": FLOATS,
    "t_start": FLOAT,
    "t_stop": FLOAT,
    "t_step": FLOAT,
    "time_scale": STR,
    "t0": FLOAT,
    # parameter sweep
    "sweep_param": STR,
    "sweep_start": FLOAT,
    "sweep_stop": FLOAT,
    "sweep_step": FLOAT,
    "qubit": INT,
    # quadrature grids
    "x_min": FLOAT,
    "x_max": FLOAT,
    "n_x": INT,
    "n_theta": INT,
    "full_circle": BOOL,
    "indicator_n_x": INT,
    "n_angles": INT,
    "n_prime": INT,
    "subsystem": STR,
    # squeezing and moments
    "squeeze_q": INTS,
    "squeeze_theta": FLOAT,
    "moment_order": INT,
    # damping
    "damping": STR,
    "damping_rate": FLOAT,
    "gamma_tau": FLOATS,
    "gamma_tau_start": FLOAT,
    "gamma_tau_stop": FLOAT,
    "gamma_tau_step": FLOAT,
    # time series
    "ts_source": STR,
    "ts_column": STR,
    "ts_length": INT,
    "ts_dt": FLOAT,
    "ts_tau": INT,
    "ts_dim": INT,
    "ts_L": INTS,
    "ts_starts": INT,
    # chronocyclic comb
    "omega_p": FLOAT,
    "omega_bar": FLOAT,
    "d_omega": FLOAT,
    "Omega_0": FLOAT,
    "d_Omega": FLOAT,
    "teeth": INTS,
    "chrono_refine": INT,
    "chrono_bins": INT,
}

DEFAULTS: Dict[str, Any] = {
    "name": "scenario",
    "outputs": [],
    "seed": 0,
    "cutoff": 40,
    "alpha": 0.0,
    "alpha_phase": 0.0,
    "alpha_b_phase": 0.0,
    "m": 0,
    "m_b": 0,
    "n": 0,
    "n_b": 0,
    "zeta_phase": 0.0,
    "pairs": ["psi_plus"],
    "sector": 0,
    "level": 0,
    "time_scale": "none",
    "t0": 0.0,
    "qubit": 1,
    "x_min": -10.0,
    "x_max": 10.0,
    "n_x": 1001,
    "n_theta": 8,
    "full_circle": False,
    "indicator_n_x": 201,
    "n_angles": 5,
    "n_prime": 10,
    "subsystem": "atoms",
    "squeeze_q": [1, 2, 3, 4],
    "squeeze_theta": 0.0,
    "moment_order": 4,
    "damping": "amplitude",
    "damping_rate": 1.0,
    "ts_source": "logistic",
    "ts_length": 20000,
    "ts_dt": 1.0,
    "ts_L": list(range(5, 75, 5)),
    "ts_starts": 100,
    "epsilon": 0.0,
    "lam_s": 0.0,
    "chrono_refine": 1,
    "chrono_bins": BINS_PER_HALF_RIDGE,
}

OUTPUTS = (
    "evolve",
    "density",
    "tomogram",
    "strands",
    "symmetry",
    "indicators",
    "spectrum",
    "squeezing",
    "moments",
    "decoherence",
    "purity",
    "timeseries",
    "chrono",
)

TIME_SCALES = ("none", "trev", "pi_over_g0", "pi_over_U", "pi_over_chi_s")

DEFAULT_STATE = {
    "KerrCubic": "coherent",
    "BEC": "coherent",
    "AtomField": "fock",
    "TavisCummings": "eigenstate",
    "DJC": "bell",
    "DTC": "bell",
    "NMRSpin": "nmr",
}

PRESETS_FILE = Path(__file__).with_name("presets.json")


def _split_unit(key: str) -> Tuple[str, float]:
    for suffix, factor in UNIT_SUFFIXES:
        if key.endswith(suffix) and len(key) > len(suffix):
            return key[: -len(suffix)], factor
    return key, 1.0


def _coerce(key: str, kind: str, raw: Any, factor: float = 1.0) -> Any:
    text = str(raw).strip()
    try:
        if kind == STR:
            return text
        if kind == STRS:
            return [p.strip() for p in text.replace(";", ",").split(",") if p.strip()]
        if kind == BOOL:
            low = text.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(f"'{text}' is not a boolean")
        if kind == INT:
            return int(text)
        if kind == INTS:
            return [int(v) for v in parse_float_list(text)]
        if kind == FLOAT:
            vals = parse_float_list(text)
            if len(vals) != 1:
                raise ValueError(f"expected one number, got '{text}'")
            return vals[0] * factor
        if kind == FLOATS:
            return [v * factor for v in parse_float_list(text)]
    except (ValueError, ConfigError) as e:
        raise ConfigError(f"Key '{key}': {e}") from e
    raise ConfigError(f"Key '{key}': unknown schema type '{kind}'")


def parse_entries(entries: Mapping[str, Any], where: str) -> Dict[str, Any]:
    """Typed values from raw key-value pairs; unit suffixes are converted."""
    out: Dict[str, Any] = {}
    for raw_key, raw in entries.items():
        key = str(raw_key).strip()
        base, factor = _split_unit(key)
        if base not in SCHEMA:
            base, factor = key, 1.0
        if base not in SCHEMA:
            raise ConfigError(f"{where}: unknown key '{key}'")
        kind = SCHEMA[base]
        if factor != 1.0 and kind not in (FLOAT, FLOATS):
            raise ConfigError(f"{where}: key '{key}' takes no unit suffix")
        if raw is None:
            raise ConfigError(f"{where}: key '{key}' has no value")
        if base in out:
            raise ConfigError(f"{where}: key '{base}' given twice (check unit-suffixed spellings)")
        out[base] = _coerce(key, kind, raw, factor)
    return out


def load_presets(path: Optional[Path] = None) -> Dict[str, Dict[str, Any]]:
    path = path or PRESETS_FILE
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"Could not load presets from {path}: {e}") from e
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: expected an object of named presets")
    return {str(k): dict(v) for k, v in data.items() if isinstance(v, dict)}


def preset_entries(name: str) -> Dict[str, Any]:
    presets = load_presets()
    if name not in presets:
        raise ConfigError(f"Unknown preset '{name}'. Available: {', '.join(sorted(presets))}")
    return parse_entries(presets[name], f"preset '{name}'")


@dataclass
class ScenarioConfig:
    values: Dict[str, Any]
    explicit: FrozenSet[str] = frozenset()
    source: Optional[Path] = None
    _cache: Dict[str, Any] = field(default_factory=dict, repr=False, compare=False)

    @classmethod
    def from_entries(cls, entries: Mapping[str, Any], where: str = "scenario", source: Optional[Path] = None) -> "ScenarioConfig":
        own = parse_entries(entries, where)
        values: Dict[str, Any] = {}
        if "preset" in own:
            values.update(preset_entries(own["preset"]))
        values.update(own)
        cfg = cls(values, frozenset(own), source)
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path: Path) -> "ScenarioConfig":
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"Scenario file not found: {path}")
        entries = dotenv_values(dotenv_path=str(path), interpolate=False)
        LOG.debug("Scenario %s: %d keys", path, len(entries))
        return cls.from_entries(entries, str(path), path)

    # ------------------------------------------------------------------ access

    def has(self, key: str) -> bool:
        return key in self.values

    def get(self, key: str, default: Any = None) -> Any:
        if key not in SCHEMA:
            raise ConfigError(f"Unknown key '{key}'")
        if key in self.values:
            return self.values[key]
        return DEFAULTS.get(key, default)

    def require(self, key: str, why: str = "") -> Any:
        v = self.get(key)
        if v is None:
            suffix = f" ({why})" if why else ""
            raise ConfigError(f"Missing key '{key}'{suffix}")
        return v

    @property
    def name(self) -> str:
        return str(self.get("name"))

    @property
    def outputs(self) -> List[str]:
        return list(self.get("outputs"))

    def validate(self) -> None:
        bad = [o for o in self.outputs if o not in OUTPUTS]
        if bad:
            raise ConfigError(f"Unknown outputs {bad}. Use any of: {', '.join(OUTPUTS)}")
        scale = self.get("time_scale")
        if scale not in TIME_SCALES:
            raise ConfigError(f"Unknown time_scale '{scale}'. Use one of: {', '.join(TIME_SCALES)}")
        system = self.get("system")
        if system is not None and system not in SPEC_TYPES:
            raise ConfigError(f"Unknown system '{system}'. Use one of: {', '.join(SPEC_TYPES)}")
        if self.get("cutoff") < 1:
            raise ConfigError(f"cutoff must be >= 1, got {self.get('cutoff')}")

    def merge_flags(self, flags: Mapping[str, Any]) -> "ScenarioConfig":
        """
        Overlay CLI flag values. A flag that disagrees with a key written in
        the scenario file is ignored with a warning.
        """
        values = dict(self.values)
        explicit = set(self.explicit)
        for key, raw in flags.items():
            if raw is None:
                continue
            if key not in SCHEMA:
                raise ConfigError(f"Unknown flag key '{key}'")
            value = _coerce(key, SCHEMA[key], raw) if isinstance(raw, str) else raw
            if key in self.explicit:
                if self.values[key] != value:
                    LOG.warning("Flag %s=%s ignored: scenario file sets %s=%s", key, value, key, self.values[key])
                continue
            values[key] = value
            explicit.add(key)
        cfg = ScenarioConfig(values, frozenset(explicit), self.source)
        cfg.validate()
        return cfg

    def with_defaults(self, defaults: Mapping[str, Any]) -> "ScenarioConfig":
        """Fill keys the scenario leaves unset (environment defaults); no warnings."""
        values = dict(self.values)
        for key, raw in defaults.items():
            if raw is None or key in values:
                continue
            if key not in SCHEMA:
                raise ConfigError(f"Unknown default key '{key}'")
            values[key] = _coerce(key, SCHEMA[key], raw) if isinstance(raw, str) else raw
        cfg = ScenarioConfig(values, self.explicit, self.source)
        cfg.validate()
        return cfg

    def with_outputs(self, outputs: List[str]) -> "ScenarioConfig":
        values = dict(self.values)
        values["outputs"] = list(outputs)
        cfg = ScenarioConfig(values, self.explicit | {"outputs"}, self.source)
        cfg.validate()
        return cfg

    def resolved(self) -> Dict[str, Any]:
        """Defaults merged with given values, JSON-ready."""
        out = {k: v for k, v in DEFAULTS.items()}
        out.update(self.values)
        return {k: out[k] for k in sorted(out)}

    def resolved_text(self) -> str:
        return json.dumps(self.resolved(), sort_keys=True, separators=(",", ":"))

    # ------------------------------------------------------------------ builders

    @property
    def system(self) -> Optional[str]:
        return self.get("system")

    def spec(self) -> HamiltonianSpec:
        if "spec" in self._cache:
            return self._cache["spec"]
        system = self.require("system", "the model Hamiltonian")
        cls = SPEC_TYPES[system]
        if cls is TavisCummings and not self.has("omegas"):
            spec = tavis_spec(
                self.require("omega_f"),
                self.require("chi"),
                self.require("lam"),
                self.get("lam_s"),
                self.require("mean_gap", "or give omegas"),
                self.require("sigma_frac", "or give omegas"),
                self.require("M", "or give omegas"),
                self.get("seed"),
                self.get("epsilon"),
            )
        else:
            kwargs: Dict[str, Any] = {}
            for f in dataclasses.fields(cls):
                if self.has(f.name):
                    kwargs[f.name] = self.values[f.name]
                elif f.default is dataclasses.MISSING:
                    raise ConfigError(f"{system} needs key '{f.name}'")
            spec = cls(**kwargs)
        self._cache["spec"] = spec
        return spec

    def alpha(self, which: str = "a") -> complex:
        if which == "a":
            return complex(self.get("alpha") * np.exp(1j * self.get("alpha_phase")))
        mag = self.get("alpha_b") if self.has("alpha_b") else self.get("alpha")
        return complex(mag * np.exp(1j * self.get("alpha_b_phase")))

    def state_recipe(self) -> str:
        return str(self.get("state") or DEFAULT_STATE[self.require("system")])

    def space(self) -> ModeSpace:
        spec = self.spec()
        if isinstance(spec, (DJC, DTC)):
            return self.initial_state().space
        return default_space(spec, self.get("cutoff"), self.get("cutoff_b"))

    def initial_state(self) -> State:
        if "state" not in self._cache:
            self._cache["state"] = self._build_state()
        return self._cache["state"]

    def _build_state(self) -> State:
        spec = self.spec()
        recipe = self.state_recipe()
        if isinstance(spec, NMRSpin):
            if recipe != "nmr":
                raise ConfigError(f"NMRSpin starts from its own product state; state '{recipe}' is not supported")
            return nmr_rho_t(spec.chi_s, 0.0)
        if isinstance(spec, (DJC, DTC)):
            if recipe != "bell":
                raise ConfigError(f"{spec.kind} starts from vacuum fields and Bell atom pairs; use state = bell")
            return hybrid_initial_state(spec, self.get("pairs"))
        space = default_space(spec, self.get("cutoff"), self.get("cutoff_b"))
        if recipe == "eigenstate":
            return Propagator(spec, space).sector(self.get("sector")).state(self.get("level"))
        if isinstance(spec, BEC) and recipe in ("coherent", "pacs"):
            m, mb = (self.get("m"), self.get("m_b")) if recipe == "pacs" else (0, 0)
            return bec_analytic_state(self.alpha("a"), self.alpha("b"), m, mb, spec, 0.0, space)
        if recipe in ("binomial", "squeezed"):
            if recipe == "binomial":
                return make_binomial(self.get("n"), space)
            zeta = self.require("zeta") * np.exp(1j * self.get("zeta_phase"))
            return make_two_mode_squeezed(complex(zeta), space)
        singles = [ModeSpace.single(d - 1) for d in space.dims[: len(space.mode_indices)]]
        if space.qubit_indices:
            raise ConfigError(f"state '{recipe}' is only defined for bosonic systems; {spec.kind} takes state = eigenstate")
        parts = []
        for i, sub in enumerate(singles):
            if recipe == "coherent":
                parts.append(make_coherent(self.alpha("a" if i == 0 else "b"), sub))
            elif recipe == "pacs":
                parts.append(make_pacs(self.alpha("a" if i == 0 else "b"), self.get("m" if i == 0 else "m_b"), sub))
            elif recipe == "fock":
                parts.append(make_fock(self.get("n" if i == 0 else "n_b"), sub))
            elif recipe == "thermal":
                if len(singles) != 1:
                    raise ConfigError("state = thermal is single-mode only")
                parts.append(make_thermal(self.require("nbar"), sub))
            else:
                raise ConfigError(f"Unknown state recipe '{recipe}'")
        state = parts[0]
        for p in parts[1:]:
            state = tensor(state, p)
        return state

    def state_at(self, t: float) -> State:
        spec = self.spec()
        if isinstance(spec, NMRSpin):
            return nmr_rho_t(spec.chi_s, t)
        if isinstance(spec, BEC) and self.state_recipe() in ("coherent", "pacs"):
            recipe = self.state_recipe()
            m, mb = (self.get("m"), self.get("m_b")) if recipe == "pacs" else (0, 0)
            return bec_analytic_state(self.alpha("a"), self.alpha("b"), m, mb, spec, t, self.initial_state().space)
        return evolve(self.initial_state(), spec, t)

    def time_unit(self) -> float:
        scale = self.get("time_scale")
        if scale == "none":
            return 1.0
        spec = self.spec()
        if scale == "trev":
            trev = revival_time(spec)
            if trev is None:
                raise ConfigError(f"time_scale = trev but {spec.kind} with these parameters has no revival time")
            return trev
        attr = {"pi_over_g0": "g0", "pi_over_U": "U", "pi_over_chi_s": "chi_s"}[scale]
        if not hasattr(spec, attr):
            raise ConfigError(f"time_scale = {scale} needs a system with '{attr}', got {spec.kind}")
        return math.pi / getattr(spec, attr)

    def times(self) -> np.ndarray:
        if self.has("times"):
            base = np.asarray(self.get("times"), dtype=float)
        elif self.has("t_stop"):
            start, stop = self.get("t_start") or 0.0, self.get("t_stop")
            step = self.require("t_step", "with t_stop")
            if not step > 0 or stop < start:
                raise ConfigError(f"Time grid needs t_step > 0 and t_stop >= t_start, got {start}:{stop}:{step}")
            n = int(round((stop - start) / step)) + 1
            base = start + step * np.arange(n)
        else:
            base = np.array([0.0])
        if base.size == 0:
            return base
        return base * self.time_unit()

    def t0(self) -> float:
        return float(self.get("t0")) * self.time_unit()

    def sweep(self) -> Tuple[str, np.ndarray]:
        param = self.require("sweep_param", "parameter to sweep")
        vals = sweep_values(self.require("sweep_start"), self.require("sweep_stop"), self.require("sweep_step"))
        return param, vals

    def gamma_taus(self) -> np.ndarray:
        if self.has("gamma_tau"):
            return np.asarray(self.get("gamma_tau"), dtype=float)
        start = self.get("gamma_tau_start") or 0.0
        stop = self.require("gamma_tau_stop", "or give gamma_tau")
        step = self.require("gamma_tau_step", "with gamma_tau_stop")
        n = int(round((stop - start) / step)) + 1
        return start + step * np.arange(n)

    def quad_grid(self) -> QuadGrid:
        return QuadGrid.uniform(
            self.get("x_min"), self.get("x_max"), self.get("n_x"), self.get("n_theta"), self.get("full_circle")
        )

    def indicator_settings(self) -> IndicatorSettings:
        return IndicatorSettings(
            n_angles=self.get("n_angles"),
            n_prime=self.get("n_prime"),
            x_range=(self.get("x_min"), self.get("x_max")),
            n_x=self.get("indicator_n_x"),
        )

    def comb_params(self) -> CombParams:
        if not any(self.has(k) for k in ("omega_p", "omega_bar", "d_omega", "Omega_0", "d_Omega")):
            p = CombParams.reference()
        else:
            p = CombParams(
                self.require("omega_p"),
                self.require("omega_bar"),
                self.require("d_omega"),
                self.require("Omega_0"),
                self.require("d_Omega"),
            )
        if self.has("teeth"):
            if len(self.get("teeth")) != 2:
                raise ConfigError(f"teeth needs two tooth indices lo,hi, got {self.get('teeth')}")
            lo, hi = self.get("teeth")
            p = p.with_window(lo, hi)
        return p
