"""TOML experiment configuration.

Every physical key carries its unit in the name (``region_length_cm``,
``amplitude_mv``) and is converted to SI when the file is read. Unknown
sections or keys are errors. Validation failures raise
:class:`~electric_ab.errors.ConfigError` naming the file key, e.g.
``sweep.n_points: must satisfy n_points ≥ 2 (got 1)``.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .analysis import BASES, ONE_SIDED_95
from .detector import DetectorParams
from .errors import ConfigError, DomainError
from .physics import BeamParams, CouplingParams
from .sim import ExperimentConfig, Systematics, config_to_dict, coupling_to_dict
from .systematics import ApparatusParams

__all__ = ["AnalysisOptions", "RunConfig", "load_config", "parse_config", "default_config_path", "config_key"]

LIMITS = {"1sigma": 1.0, "95": ONE_SIDED_95}

_F, _I, _B, _S = float, int, bool, str
_TWO_PI_GHZ = 2.0 * math.pi * 1e9

# section -> key -> (type, scale to SI, target). Targets are "group.field".
SCHEMA = {
    "": {"seed": (_I, None, "exp.seed")},
    "beam": {
        "kinetic_energy_ev": (_F, 1.0, "beam.kinetic_energy"),
        "energy_spread_fwhm_ev": (_F, 1.0, "beam.energy_spread_fwhm"),
        "region_length_cm": (_F, 1e-2, "beam.region_length"),
    },
    "apparatus": {
        "tube_radius_mm": (_F, 1e-3, "app.tube_radius"),
        "wall_conductivity_s_per_m": (_F, 1.0, "app.wall_conductivity"),
        "wall_thickness_mm": (_F, 1e-3, "app.wall_thickness"),
        "aperture_clearance_radii": (_F, 1.0, "app.aperture_clearance"),
        "drift_length_cm": (_F, 1e-2, "app.drift_length"),
        "stray_field_fraction": (_F, 1.0, "app.stray_field_fraction"),
        "stray_path_mm": (_F, 1e-3, "app.stray_path"),
    },
    "drive": {
        "amplitude_mv": (_F, 1e-3, "exp.amp"),
        "fixed_frequency_ghz": (_F, _TWO_PI_GHZ, "exp.fixed_omega"),
    },
    "noise": {
        "electrons_per_point": (_I, None, "exp.electrons_per_point"),
        "fringe_visibility": (_F, 1.0, "exp.fringe_visibility"),
        "shot_noise": (_B, None, "exp.shot_noise"),
        "rf_jitter_rms_ps": (_F, 1e-12, "exp.rf_jitter_rms"),
        "energy_sampling": (_S, None, "exp.energy_sampling"),
    },
    "sweep": {
        "mode": (_S, None, "exp.sweep_mode"),
        "n_points": (_I, None, "exp.n_points"),
        "omega_T_min_pi": (_F, math.pi, "range.lo"),
        "omega_T_max_pi": (_F, math.pi, "range.hi"),
    },
    "systematics": {name: (_B, None, f"syst.{name}") for name in Systematics.__dataclass_fields__},
    "detector": {
        "use_images": (_B, None, "det.use_images"),
        "fringe_period_um": (_F, 1e-6, "det.fringe_period"),
        "n_bins": (_I, None, "det.n_bins"),
        "n_periods": (_F, 1.0, "det.n_periods"),
        "envelope_periods": (_F, 1.0, "det.envelope_periods"),
    },
    "truth": {
        "kappa_over_hbar_rad_per_v": (_F, 1.0, "truth.kappa_over_hbar"),
        "g": (_F, 1.0, "truth.g"),
        "lambda_tev": (_F, 1e12, "truth.lambda_ev"),
    },
    "analysis": {
        "basis": (_S, None, "ana.basis"),
        "limit": (_S, None, "ana.limit"),
    },
}

# dataclass field name -> file key, for re-labelling errors raised by constructors
_GROUP_OF = {"beam": "beam", "app": "apparatus", "det": "detector", "syst": "systematics"}
FIELD_KEYS = {}
for _sec, _keys in SCHEMA.items():
    for _key, (_t, _s, _target) in _keys.items():
        _name = _target.split(".", 1)[1]
        FIELD_KEYS.setdefault(_name, f"{_sec}.{_key}" if _sec else _key)
FIELD_KEYS["omega_T_range"] = "sweep.omega_T_min_pi/omega_T_max_pi"
FIELD_KEYS["kinetic_energy"] = "beam.kinetic_energy_ev"


def config_key(field_name):
    """File key for an internal field name (identity when there is none)."""
    return FIELD_KEYS.get(field_name, field_name)


@dataclass(frozen=True)
class AnalysisOptions:
    """``basis`` selects the fit's standard regressor; ``limit`` is ``"1sigma"`` or ``"95"``."""

    basis: str = "scaled"
    limit: str = "1sigma"

    def __post_init__(self):
        if self.basis not in BASES:
            raise ConfigError("analysis.basis", f"one of {BASES}", self.basis)
        if self.limit not in LIMITS:
            raise ConfigError("analysis.limit", f"one of {tuple(LIMITS)}", self.limit)

    @property
    def limit_sigma(self):
        return LIMITS[self.limit]


@dataclass(frozen=True)
class RunConfig:
    experiment: ExperimentConfig = field(default_factory=ExperimentConfig)
    coupling: CouplingParams = field(default_factory=CouplingParams)
    analysis: AnalysisOptions = field(default_factory=AnalysisOptions)

    def to_dict(self):
        return {
            "experiment": config_to_dict(self.experiment),
            "coupling": coupling_to_dict(self.coupling),
            "analysis": {"basis": self.analysis.basis, "limit": self.analysis.limit},
        }

    def digest(self):
        """SHA-256 of the parsed configuration (independent of comments and key order)."""
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    def with_seed(self, seed):
        try:
            return RunConfig(self.experiment.replace(seed=seed), self.coupling, self.analysis)
        except ConfigError as exc:
            raise ConfigError("seed", exc.constraint, exc.value) from None


def default_config_path():
    return Path(str(resources.files("electric_ab") / "data" / "default_config.toml"))


def _check_type(key, kind, value):
    if kind is _B:
        ok = isinstance(value, bool)
        want = "a boolean"
    elif kind is _I:
        ok = isinstance(value, int) and not isinstance(value, bool)
        want = "an integer"
    elif kind is _F:
        ok = isinstance(value, (int, float)) and not isinstance(value, bool) and math.isfinite(value)
        want = "a finite number"
    else:
        ok = isinstance(value, str)
        want = "a string"
    if not ok:
        raise ConfigError(key, f"{key} is {want}", value)


def parse_config(doc):
    """Build a :class:`RunConfig` from a parsed TOML mapping."""
    groups = {g: {} for g in ("exp", "beam", "app", "syst", "det", "range", "truth", "ana")}
    file_values = {}
    for sec, body in doc.items():
        if not isinstance(body, dict):
            if sec not in SCHEMA[""]:
                raise ConfigError(sec, "a known top-level key or section", body)
            items, sec_name = {sec: body}, ""
        elif sec in SCHEMA and sec:
            items, sec_name = body, sec
        else:
            raise ConfigError(sec, f"a known section {tuple(k for k in SCHEMA if k)}", None)
        for key, value in items.items():
            full = f"{sec_name}.{key}" if sec_name else key
            if key not in SCHEMA[sec_name]:
                raise ConfigError(full, f"a known key of [{sec_name or 'top level'}]: {sorted(SCHEMA[sec_name])}", None)
            kind, scale, target = SCHEMA[sec_name][key]
            _check_type(full, kind, value)
            group, name = target.split(".")
            groups[group][name] = value * scale if scale is not None else value
            file_values[full] = value

    def relabel(exc):
        key = config_key(exc.field)
        return ConfigError(key, exc.constraint, file_values.get(key, exc.value))

    try:
        # absent keys fall back to ExperimentConfig's defaults, not the bare dataclasses'
        beam_kw = dataclasses.asdict(ExperimentConfig().beam) | groups["beam"]
        exp_kw = dict(groups["exp"])
        exp_kw["beam"] = BeamParams(**beam_kw)
        exp_kw["apparatus"] = ApparatusParams(**groups["app"])
        exp_kw["systematics"] = Systematics(**groups["syst"])
        exp_kw["detector"] = DetectorParams(**groups["det"])
        rng = groups["range"]
        if rng:
            lo_d, hi_d = ExperimentConfig().omega_T_range
            exp_kw["omega_T_range"] = (rng.get("lo", lo_d), rng.get("hi", hi_d))
        experiment = ExperimentConfig(**exp_kw)
    except ConfigError as exc:
        raise relabel(exc) from None

    truth = groups["truth"]
    if "kappa_over_hbar" in truth and ("g" in truth or "lambda_ev" in truth):
        raise ConfigError("truth", "either kappa_over_hbar_rad_per_v or (g, lambda_tev), not both", None)
    try:
        if "g" in truth or "lambda_ev" in truth:
            coupling = CouplingParams.from_scale(truth.get("g", 1.0), truth.get("lambda_ev", 1e12))
        else:
            coupling = CouplingParams(kappa_over_hbar=truth.get("kappa_over_hbar", 0.0))
    except ConfigError as exc:
        raise ConfigError(f"truth.{exc.field}", exc.constraint, exc.value) from None
    except DomainError as exc:
        raise ConfigError("truth.lambda_tev", "lambda_tev > 0", truth.get("lambda_ev")) from exc

    ana = groups["ana"]
    return RunConfig(experiment, coupling, AnalysisOptions(ana.get("basis", "scaled"), ana.get("limit", "1sigma")))


def load_config(path=None):
    """Read and validate a TOML config; ``None`` loads the bundled default."""
    path = default_config_path() if path is None else Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise ConfigError("config", f"a readable file at {path}", None) from exc
    try:
        doc = tomllib.loads(raw.decode("utf-8"))
    except (tomllib.TOMLDecodeError, UnicodeDecodeError) as exc:
        raise ConfigError("config", f"valid TOML ({exc})", None) from None
    return parse_config(doc)
