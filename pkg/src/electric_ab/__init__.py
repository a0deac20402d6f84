"""Phase predictions, sweep simulation and two-component fitting for the
time-dependent electric Aharonov-Bohm experiment.

An electron crossing a region whose potential difference ``dPhi(t)`` varies
in time picks up the standard phase ``-(e/hbar) * integral(dPhi dt)``. A
scalar coupling ``kappa`` would add ``-(kappa/hbar) * (dPhi(T) - dPhi(0))``,
which depends only on the endpoint values. For a sinusoidal drive the two
have different shapes in ``omega*T`` (``sin`` versus ``1 - cos``), so a sweep
separates them.
"""

__version__ = "0.1.0"

from .analysis import (
    FitResult,
    consistency_check_A,
    fit_sweep,
    kappa_upper_limit,
    unwrap_phases,
    zero_shift_report,
)
from .config import RunConfig, load_config
from .detector import DetectorImage, DetectorParams, extract_phase, render_fringe_image
from .errors import (
    ConfigError,
    DegenerateDesignError,
    DomainError,
    FormatError,
    NotApplicableError,
    QuadratureError,
    RootNotFoundError,
)
from .physics import (
    BeamParams,
    Constant,
    CouplingParams,
    Sampled,
    Sinusoid,
    combined_model,
    electron_velocity,
    first_positive_zero,
    qm_phase_sinusoid,
    qm_phase_waveform,
    scalar_field,
    scalar_phase_boundary,
    scalar_phase_sinusoid,
    scalar_phase_waveform,
    transit_time,
)
from .sim import ExperimentConfig, SweepResult, Systematics, run_sweep, simulate_point, simulate_replicas
from .systematics import ApparatusParams, ErrorBudget, full_budget

__all__ = [
    "__version__",
    "ApparatusParams",
    "BeamParams",
    "ConfigError",
    "Constant",
    "CouplingParams",
    "DegenerateDesignError",
    "DetectorImage",
    "DetectorParams",
    "DomainError",
    "ErrorBudget",
    "ExperimentConfig",
    "FitResult",
    "FormatError",
    "NotApplicableError",
    "QuadratureError",
    "RootNotFoundError",
    "RunConfig",
    "Sampled",
    "Sinusoid",
    "SweepResult",
    "Systematics",
    "combined_model",
    "consistency_check_A",
    "electron_velocity",
    "extract_phase",
    "first_positive_zero",
    "fit_sweep",
    "full_budget",
    "kappa_upper_limit",
    "load_config",
    "qm_phase_sinusoid",
    "qm_phase_waveform",
    "render_fringe_image",
    "run_sweep",
    "scalar_field",
    "scalar_phase_boundary",
    "scalar_phase_sinusoid",
    "scalar_phase_waveform",
    "simulate_point",
    "simulate_replicas",
    "transit_time",
    "unwrap_phases",
    "zero_shift_report",
]
