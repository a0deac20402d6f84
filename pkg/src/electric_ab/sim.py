"""Monte Carlo simulation of the frequency-sweep protocol.

A sweep steps ``theta = omega*T`` uniformly over ``omega_T_range``. In the
default ``"omega"`` mode the beam energy (and so ``T``) is fixed and the
drive frequency is varied. In ``"transit"`` mode the drive frequency is
fixed and ``T`` is varied through the beam energy.

Random numbers
--------------
Every random quantity comes from a substream keyed by ``(seed, point index,
channel)``. Replica ``r`` uses the ``r``-th variate of that substream, so a
sweep is reproducible bit for bit, different points never share variates,
and replicas can be generated in any order or all at once. Detector images
use one substream per ``(seed, point index, channel, replica)``.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import constants as const
from .analysis import reference_transit_time
from .detector import DetectorParams, extract_phase, render_fringe_image, wrap_phase
from .errors import ConfigError, DomainError
from .physics import (
    BeamParams,
    CouplingParams,
    energy_for_transit_time,
    qm_phase_sinusoid,
    scalar_phase_sinusoid,
    transit_time,
)
from .systematics import (
    ApparatusParams,
    _deflection_at_energy,
    _fringe_phase_at_velocity,
    skin_depth,
    total_phase_time_derivative,
)

__all__ = [
    "Systematics",
    "ExperimentConfig",
    "SweepResult",
    "PointMeasurement",
    "ReplicaSet",
    "shot_noise_sigma",
    "sweep_grid",
    "simulate_point",
    "simulate_replicas",
    "run_sweep",
    "config_to_dict",
    "config_from_dict",
    "coupling_to_dict",
    "coupling_from_dict",
]

CH_PHASE, CH_CENTROID, CH_JITTER, CH_ENERGY, CH_IMAGE = range(5)

SWEEP_MODES = ("omega", "transit")
ENERGY_SAMPLING = ("quadrature", "per_electron")


@dataclass(frozen=True)
class Systematics:
    """Per-effect switches.

    Energy smear and RF jitter are off by default: at millivolt drives the
    standard phase is hundreds of radians, and both effects then exceed the
    0.01 rad per-point target by a wide margin.
    """

    fringe_field: bool = True
    div_a: bool = True
    stray_field: bool = True
    energy_smear: bool = False
    rf_jitter: bool = False

    @classmethod
    def none(cls):
        return cls(False, False, False, False, False)

    @classmethod
    def all(cls):
        return cls(True, True, True, True, True)


@dataclass(frozen=True)
class ExperimentConfig:
    beam: BeamParams = field(default_factory=lambda: BeamParams(100.0, 0.1, 0.01))
    apparatus: ApparatusParams = field(default_factory=ApparatusParams)
    amp: float = 1e-3
    omega_T_range: tuple = (0.2 * math.pi, 10.0 * math.pi)
    n_points: int = 50
    electrons_per_point: int = 10_000
    fringe_visibility: float = 1.0
    rf_jitter_rms: float = 1e-12
    seed: int = 0
    systematics: Systematics = field(default_factory=Systematics)
    sweep_mode: str = "omega"
    fixed_omega: float = 2.0 * math.pi * 1e9
    energy_sampling: str = "quadrature"
    shot_noise: bool = True
    detector: DetectorParams = field(default_factory=DetectorParams)

    def __post_init__(self):
        lo, hi = self.omega_T_range
        object.__setattr__(self, "omega_T_range", (float(lo), float(hi)))
        if not (lo > 0):
            raise ConfigError("omega_T_range", "lower bound > 0", lo)
        if not (hi > lo):
            raise ConfigError("omega_T_range", "upper bound > lower bound", (lo, hi))
        if not (int(self.n_points) == self.n_points and self.n_points >= 2):
            raise ConfigError("n_points", "n_points ≥ 2", self.n_points)
        if not (int(self.electrons_per_point) == self.electrons_per_point and self.electrons_per_point >= 1):
            raise ConfigError("electrons_per_point", "electrons_per_point ≥ 1", self.electrons_per_point)
        if not (0.0 < self.fringe_visibility <= 1.0):
            raise ConfigError("fringe_visibility", "0 < fringe_visibility ≤ 1", self.fringe_visibility)
        if not (self.rf_jitter_rms >= 0):
            raise ConfigError("rf_jitter_rms", "rf_jitter_rms ≥ 0", self.rf_jitter_rms)
        if not (int(self.seed) == self.seed and 0 <= self.seed < 2**64):
            raise ConfigError("seed", "integer 0 ≤ seed < 2^64", self.seed)
        if not (self.amp >= 0 and math.isfinite(self.amp)):
            raise ConfigError("amp", "amp ≥ 0", self.amp)
        if self.sweep_mode not in SWEEP_MODES:
            raise ConfigError("sweep_mode", f"one of {SWEEP_MODES}", self.sweep_mode)
        if not (self.fixed_omega > 0):
            raise ConfigError("fixed_omega", "fixed_omega > 0", self.fixed_omega)
        if self.energy_sampling not in ENERGY_SAMPLING:
            raise ConfigError("energy_sampling", f"one of {ENERGY_SAMPLING}", self.energy_sampling)

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)


class PointMeasurement(NamedTuple):
    measured_phase: float
    phase_sigma: float
    centroid: float
    centroid_sigma: float


@dataclass(eq=False)
class SweepResult:
    """Per-point measurements of one sweep, plus provenance.

    ``measured_phase`` is wrapped into ``(-pi, pi]`` when ``phase_wrapped``
    is set (detector-image mode); otherwise it is the continuous phase.
    """

    omega: np.ndarray
    omega_T: np.ndarray
    measured_phase: np.ndarray
    phase_sigma: np.ndarray
    centroid: np.ndarray
    centroid_sigma: np.ndarray
    amp: float | None = None
    provenance: str = "synthetic"
    phase_wrapped: bool = False
    A_true: float | None = None
    B_true: float | None = None
    config: dict | None = None
    coupling: dict | None = None

    def __post_init__(self):
        for name in ("omega", "omega_T", "measured_phase", "phase_sigma", "centroid", "centroid_sigma"):
            setattr(self, name, np.asarray(getattr(self, name), dtype=float))
        n = self.omega.size
        if any(getattr(self, k).shape != (n,) for k in ("omega_T", "measured_phase", "phase_sigma", "centroid", "centroid_sigma")):
            raise DomainError("sweep columns must all have the same length")
        if np.any(~(self.phase_sigma > 0)):
            raise DomainError("phase_sigma must be positive at every point")
        if np.any(np.diff(self.omega_T) <= 0):
            raise DomainError("omega_T must be strictly increasing across points")
        if self.provenance not in ("synthetic", "imported"):
            raise DomainError(f"unknown provenance {self.provenance!r}")

    def __len__(self):
        return self.omega.size

    @property
    def transit_time(self):
        return self.omega_T / self.omega

    def equals(self, other):
        """Bit-level equality of every column and metadata field."""
        cols = ("omega", "omega_T", "measured_phase", "phase_sigma", "centroid", "centroid_sigma")
        return all(np.array_equal(getattr(self, c), getattr(other, c)) for c in cols) and all(
            getattr(self, k) == getattr(other, k)
            for k in ("amp", "provenance", "phase_wrapped", "A_true", "B_true", "config", "coupling")
        )


@dataclass(eq=False)
class ReplicaSet:
    """Many independent sweeps of one configuration, stacked along axis 0."""

    omega: np.ndarray
    omega_T: np.ndarray
    measured_phase: np.ndarray
    phase_sigma: np.ndarray
    centroid: np.ndarray
    centroid_sigma: np.ndarray
    truth_phase: np.ndarray
    A_true: float
    B_true: float
    phase_wrapped: bool = False

    def sweep(self, r, amp=None):
        return SweepResult(self.omega, self.omega_T, self.measured_phase[r], self.phase_sigma[r],
                           self.centroid[r], self.centroid_sigma[r], amp=amp,
                           phase_wrapped=self.phase_wrapped, A_true=self.A_true, B_true=self.B_true)


# --------------------------------------------------------------------------


def shot_noise_sigma(n_electrons, visibility):
    """Shot-noise fringe-phase error ``1 / (C sqrt(N))``."""
    if not (n_electrons >= 1):
        raise DomainError(f"need at least one electron, got {n_electrons!r}")
    if not (0.0 < visibility <= 1.0):
        raise DomainError(f"visibility must lie in (0, 1], got {visibility!r}")
    return 1.0 / (visibility * math.sqrt(n_electrons))


def sweep_grid(config):
    """``(omega, T)`` per point: ``n_points`` values uniform in ``theta``."""
    lo, hi = config.omega_T_range
    theta = np.linspace(lo, hi, int(config.n_points))
    if config.sweep_mode == "omega":
        T = np.full_like(theta, transit_time(config.beam))
        omega = theta / T
    else:
        omega = np.full_like(theta, config.fixed_omega)
        T = theta / omega
    return omega, T


def _omega_T(omega, T):
    return omega * T


def _stream(seed, point, channel, *extra):
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(int(point), channel, *extra)))


def _normals(seed, points, channel, replicas):
    """Standard normals of shape ``(len(replicas), len(points))``."""
    replicas = np.asarray(replicas, dtype=np.int64)
    n = int(replicas.max()) + 1
    cols = [_stream(seed, p, channel).standard_normal(n)[replicas] for p in points]
    return np.stack(cols, axis=1)


def truth_coefficients(config, coupling, omega, T):
    """``(A_true, B_true)`` in the default fit basis."""
    T_ref = reference_transit_time(omega, omega * T)
    return -coupling.e_over_hbar * config.amp * T_ref, coupling.kappa_over_hbar * config.amp


def _energies(config, T):
    if config.sweep_mode == "omega":
        return np.full_like(T, config.beam.kinetic_energy)
    return energy_for_transit_time(config.beam.region_length, T)


def _simulate(config, coupling, omega, T, points, replicas, return_truth=False):
    """Vectorised core: arrays of shape ``(len(replicas), len(points))``."""
    omega = np.asarray(omega, dtype=float)
    T = np.asarray(T, dtype=float)
    theta = omega * T
    R = len(replicas)
    syst = config.systematics
    amp = config.amp
    app = config.apparatus
    det = config.detector
    N = config.electrons_per_point
    E = _energies(config, T)
    v = config.beam.region_length / T

    theta0 = np.zeros((R, theta.size))
    if syst.rf_jitter and config.rf_jitter_rms > 0:
        theta0 = omega * config.rf_jitter_rms * _normals(config.seed, points, CH_JITTER, replicas)

    clean = qm_phase_sinusoid(coupling, amp, omega, T) + scalar_phase_sinusoid(coupling, amp, omega, T)
    clean = np.broadcast_to(np.asarray(clean, dtype=float), (R, theta.size))
    if np.any(theta0 != 0):
        truth = qm_phase_sinusoid(coupling, amp, omega, T, theta0) + scalar_phase_sinusoid(coupling, amp, omega, T, theta0)
    else:
        truth = np.array(clean)

    offset = np.zeros((R, theta.size))
    if syst.fringe_field:
        mag = _fringe_phase_at_velocity(app, amp, v, coupling.e_over_hbar)
        # entrance and exit apertures, weighted by the drive at each crossing
        offset = offset - mag * 0.5 * (np.cos(theta0) + np.cos(theta + theta0))
    if syst.div_a:
        scalar = scalar_phase_sinusoid(coupling, amp, omega, T)
        offset = offset + scalar * skin_depth(app.wall_conductivity, omega) / app.tube_radius
    deflection = np.zeros(theta.size)
    if syst.stray_field:
        deflection = _deflection_at_energy(app, amp, config.beam.region_length, E)
        # a rigid shift of the pattern by dx moves the fringe phase by -2 pi dx / P
        offset = offset - 2.0 * np.pi * deflection / det.fringe_period

    shot = shot_noise_sigma(N, config.fringe_visibility)
    smear2 = np.zeros(theta.size)
    if syst.energy_smear and config.energy_sampling == "quadrature":
        sigma_T = T * (config.beam.energy_spread_fwhm / const.FWHM_PER_SIGMA) / (2.0 * E)
        smear2 = (total_phase_time_derivative(coupling, amp, omega, T) * sigma_T) ** 2
    jitter2 = np.zeros(theta.size)
    if syst.rf_jitter and config.rf_jitter_rms > 0:
        dphi_dtheta0 = (-coupling.e_over_hbar * (amp / omega) * (np.cos(theta) - 1.0)
                        + coupling.kappa_over_hbar * amp * np.sin(theta))
        jitter2 = (dphi_dtheta0 * omega * config.rf_jitter_rms) ** 2
    extra2 = smear2 + jitter2

    total = truth + offset
    if np.any(smear2 > 0):
        # energy smear as a per-point Gaussian phase perturbation
        total = total + np.sqrt(smear2) * _normals(config.seed, points, CH_ENERGY, replicas)
    elif syst.energy_smear and config.energy_sampling == "per_electron":
        total = total + _per_electron_smear(config, coupling, omega, T, E, points, replicas)

    centroid_sigma = np.full((R, theta.size), det.envelope_sigma / math.sqrt(N))

    if det.use_images:
        measured = np.empty((R, theta.size))
        centroid = np.empty((R, theta.size))
        phase_sigma = np.empty((R, theta.size))
        for j, p in enumerate(points):
            for i, r in enumerate(replicas):
                rng = _stream(config.seed, p, CH_IMAGE, int(r))
                img = render_fringe_image(total[i, j], config, rng, shift=deflection[j], noise=config.shot_noise)
                est = extract_phase(img)
                measured[i, j] = est.phase
                centroid[i, j] = est.centroid
                phase_sigma[i, j] = math.sqrt(est.sigma**2 + extra2[j])
    else:
        phase_sigma = np.broadcast_to(np.sqrt(shot**2 + extra2), (R, theta.size)).copy()
        measured = np.array(total)
        if config.shot_noise:
            measured = measured + shot * _normals(config.seed, points, CH_PHASE, replicas)
        centroid = np.broadcast_to(deflection, (R, theta.size)).copy()
        if config.shot_noise:
            centroid = centroid + centroid_sigma * _normals(config.seed, points, CH_CENTROID, replicas)

    out = (measured, phase_sigma, centroid, centroid_sigma)
    return out + ((clean, total) if return_truth else ())


def _per_electron_smear(config, coupling, omega, T, E, points, replicas):
    """Fringe-phase shift from sampling every electron's energy individually.

    Each electron's phase follows from its own transit time; the recorded
    fringe phase is the argument of the ensemble's mean phasor.
    """
    N = int(config.electrons_per_point)
    sigma_E = config.beam.energy_spread_fwhm / const.FWHM_PER_SIGMA
    out = np.zeros((len(replicas), len(points)))
    for j, p in enumerate(points):
        base = qm_phase_sinusoid(coupling, config.amp, omega[j], T[j]) + scalar_phase_sinusoid(
            coupling, config.amp, omega[j], T[j])
        for i, r in enumerate(replicas):
            rng = _stream(config.seed, p, CH_ENERGY, int(r))
            Ek = np.maximum(E[j] + sigma_E * rng.standard_normal(N), 1e-3 * E[j])
            Tk = T[j] * np.sqrt(E[j] / Ek)
            phik = qm_phase_sinusoid(coupling, config.amp, omega[j], Tk) + scalar_phase_sinusoid(
                coupling, config.amp, omega[j], Tk)
            out[i, j] = np.angle(np.mean(np.exp(1j * (phik - base))))
    return out


def simulate_point(config, coupling, omega, *, point_index=0, replica=0, transit_time_s=None):
    """Simulate one sweep point.

    ``transit_time_s`` defaults to the beam's transit time (frequency-sweep
    mode). Deterministic given ``(config.seed, point_index, replica)``.
    """
    if not (omega > 0):
        raise DomainError(f"omega must be positive, got {omega!r}")
    T = transit_time(config.beam) if transit_time_s is None else transit_time_s
    m, s, c, cs = _simulate(config, coupling, np.array([omega]), np.array([T]), [point_index], [replica])
    return PointMeasurement(float(m[0, 0]), float(s[0, 0]), float(c[0, 0]), float(cs[0, 0]))


def _check_unwrappable(config, truth):
    if config.detector.use_images:
        step = np.max(np.abs(np.diff(truth)))
        if step >= math.pi:
            raise ConfigError(
                "amp",
                "adjacent truth-phase steps < π so detector-image phases can be unwrapped",
                f"max step {step:.3g} rad at amp={config.amp!r}",
            )


def run_sweep(config, coupling=None, replica=0):
    """Simulate a full sweep; reproducible bit for bit for a given seed and replica."""
    coupling = CouplingParams() if coupling is None else coupling
    omega, T = sweep_grid(config)
    points = list(range(omega.size))
    clean = qm_phase_sinusoid(coupling, config.amp, omega, T) + scalar_phase_sinusoid(coupling, config.amp, omega, T)
    _check_unwrappable(config, clean)
    m, s, c, cs = _simulate(config, coupling, omega, T, points, [replica])
    A_true, B_true = truth_coefficients(config, coupling, omega, T)
    return SweepResult(
        omega=omega,
        omega_T=_omega_T(omega, T),
        measured_phase=m[0],
        phase_sigma=s[0],
        centroid=c[0],
        centroid_sigma=cs[0],
        amp=config.amp,
        provenance="synthetic",
        phase_wrapped=config.detector.use_images,
        A_true=A_true,
        B_true=B_true,
        config=config_to_dict(config),
        coupling=coupling_to_dict(coupling),
    )


def simulate_replicas(config, coupling=None, n_replicas=1, first_replica=0):
    """Simulate ``n_replicas`` independent sweeps in one vectorised pass."""
    coupling = CouplingParams() if coupling is None else coupling
    omega, T = sweep_grid(config)
    replicas = np.arange(first_replica, first_replica + n_replicas)
    m, s, c, cs, clean, total = _simulate(config, coupling, omega, T, list(range(omega.size)), replicas,
                                          return_truth=True)
    _check_unwrappable(config, clean[0])
    A_true, B_true = truth_coefficients(config, coupling, omega, T)
    return ReplicaSet(omega, _omega_T(omega, T), m, s, c, cs, np.asarray(total), A_true, B_true,
                      phase_wrapped=config.detector.use_images)


# --------------------------------------------------------------------------
# snapshots


def config_to_dict(config):
    d = dataclasses.asdict(config)
    d["omega_T_range"] = list(config.omega_T_range)
    return d


def config_from_dict(d):
    d = dict(d)
    d["beam"] = BeamParams(**d["beam"])
    d["apparatus"] = ApparatusParams(**d["apparatus"])
    d["systematics"] = Systematics(**d["systematics"])
    d["detector"] = DetectorParams(**d["detector"])
    d["omega_T_range"] = tuple(d["omega_T_range"])
    return ExperimentConfig(**d)


def coupling_to_dict(coupling):
    return dataclasses.asdict(coupling)


def coupling_from_dict(d):
    return CouplingParams(**d)


__all__ += ["truth_coefficients", "wrap_phase"]
