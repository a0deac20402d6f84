"""Error-budget calculators for apparatus imperfections.

Every phase entry is a worst-case magnitude (a bound, not a signed
correction). Lengths in metres, energies in eV, phases in radians.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import constants as const
from .errors import ConfigError, DomainError
from .physics import _out, electron_velocity, transit_time

__all__ = [
    "ApparatusParams",
    "ErrorBudget",
    "skin_depth",
    "div_a_phase_bound",
    "fringe_suppression",
    "fringe_field_phase",
    "classical_deflection",
    "total_phase_time_derivative",
    "energy_smear_phase_sigma",
    "quasi_static_check",
    "full_budget",
]


@dataclass(frozen=True)
class ApparatusParams:
    """Drift-tube geometry and imperfection knobs.

    ``aperture_clearance`` is the beam's distance from the tube apertures in
    units of the tube radius. ``stray_field_fraction`` is the residual field
    (or potential) as a fraction of the applied one, acting over
    ``stray_path``. ``drift_length`` runs from the interaction region to the
    detector.
    """

    tube_radius: float = 1e-3
    wall_conductivity: float = const.COPPER_CONDUCTIVITY
    wall_thickness: float = 5e-4
    aperture_clearance: float = 3.0
    drift_length: float = 0.1
    stray_field_fraction: float = 1e-3
    stray_path: float = 1e-4

    def __post_init__(self):
        for name in ("tube_radius", "wall_thickness", "drift_length", "stray_path"):
            v = getattr(self, name)
            if not (v > 0):
                raise ConfigError(name, f"{name} > 0", v)
        if not (self.wall_conductivity > 0):
            raise ConfigError("wall_conductivity", "wall_conductivity > 0", self.wall_conductivity)
        if not (self.aperture_clearance >= 0):
            raise ConfigError("aperture_clearance", "aperture_clearance ≥ 0", self.aperture_clearance)
        if not (0.0 <= self.stray_field_fraction <= 1.0):
            raise ConfigError("stray_field_fraction", "0 ≤ stray_field_fraction ≤ 1", self.stray_field_fraction)


@dataclass(frozen=True)
class ErrorBudget:
    skin_depth: float
    div_a_phase: float
    fringe_phase: float
    centroid_deflection: float
    energy_smear_phase: float
    quasi_static_ok: bool
    quasi_static_ratio: float

    def phase_rows(self):
        return {
            "div_a_phase": self.div_a_phase,
            "fringe_phase": self.fringe_phase,
            "energy_smear_phase": self.energy_smear_phase,
        }


def skin_depth(conductivity, omega):
    """RF skin depth ``sqrt(2 / (mu0 * sigma * omega))`` in metres."""
    s = np.asarray(conductivity, dtype=float)
    w = np.asarray(omega, dtype=float)
    if np.any(~(s > 0)) or np.any(~(w > 0)):
        raise DomainError("skin depth needs positive conductivity and angular frequency")
    return _out(np.sqrt(2.0 / (const.MU_0 * s * w)))


def div_a_phase_bound(app, scalar_phase, omega):
    """Bound on the phase from the residual div(A) correction to ``B = dPhi/dt / c^2``.

    The wall currents leave a vector potential suppressed by ``delta/R``, so
    the correction scales the scalar phase by that ratio.
    """
    ratio = skin_depth(app.wall_conductivity, omega) / app.tube_radius
    return _out(np.abs(scalar_phase) * ratio)


def fringe_suppression(clearance):
    """Exponential aperture fringe-field suppression, decay length one tube radius."""
    return _out(np.exp(-np.asarray(clearance, dtype=float)))


def _fringe_phase_at_velocity(app, applied_amp, velocity, e_over_hbar=const.E_OVER_HBAR):
    residual = app.stray_field_fraction * fringe_suppression(app.aperture_clearance) * abs(applied_amp)
    return e_over_hbar * residual * app.stray_path / np.asarray(velocity, dtype=float)


def fringe_field_phase(app, applied_amp, beam, coupling=None):
    """Phase magnitude from the aperture fringe field.

    The residual potential is ``stray_field_fraction * exp(-clearance) * amp``
    and acts for the time the electron needs to cross ``stray_path``; the
    phase is ``(e/hbar) * V_residual * stray_path / v``.
    """
    e_over_hbar = const.E_OVER_HBAR if coupling is None else coupling.e_over_hbar
    v = electron_velocity(beam.kinetic_energy)
    return float(_fringe_phase_at_velocity(app, applied_amp, v, e_over_hbar))


def _deflection_at_energy(app, applied_amp, tube_length, energy_ev):
    stray_field = app.stray_field_fraction * abs(applied_amp) / tube_length
    # e * dE * l / (2E) with E in eV: the charge cancels against the eV unit
    return stray_field * app.stray_path / (2.0 * np.asarray(energy_ev, dtype=float)) * app.drift_length


def classical_deflection(app, applied_amp, tube_length, beam):
    """Beam-centroid displacement (m) at the detector from a stray field.

    ``dE = stray_field_fraction * amp / tube_length`` acting over
    ``stray_path`` gives ``dx = (e dE l / 2E) * drift_length``.
    """
    if not (tube_length > 0):
        raise DomainError(f"tube length must be positive, got {tube_length!r}")
    return float(_deflection_at_energy(app, applied_amp, tube_length, beam.kinetic_energy))


def total_phase_time_derivative(coupling, amp, omega, T):
    """Analytic ``d(phi_QM + phi_B)/dT`` for a sinusoidal drive (rad/s)."""
    theta = np.asarray(omega, dtype=float) * np.asarray(T, dtype=float)
    d = -coupling.e_over_hbar * amp * np.cos(theta) + coupling.kappa_over_hbar * amp * omega * np.sin(theta)
    return _out(d)


def energy_smear_phase_sigma(beam, coupling, amp, omega):
    """Phase scatter from the beam energy spread.

    ``sigma_T = T * sigma_E / (2E)`` with ``sigma_E = FWHM / 2.355``, then
    ``sigma_phi = |d phi / dT| * sigma_T`` at the operating point.
    """
    if not (omega > 0):
        raise DomainError(f"omega must be positive, got {omega!r}")
    T = transit_time(beam)
    sigma_E = beam.energy_spread_fwhm / const.FWHM_PER_SIGMA
    sigma_T = T * sigma_E / (2.0 * beam.kinetic_energy)
    return abs(total_phase_time_derivative(coupling, amp, omega, T)) * sigma_T


def quasi_static_check(region_length, omega):
    """Return ``(ok, ratio)`` with ratio = round-trip light time / modulation period.

    ``ok`` is ``ratio < 0.1``.
    """
    if not (region_length > 0) or not (omega >= 0):
        raise DomainError("quasi-static check needs positive length and non-negative omega")
    ratio = (2.0 * region_length / const.SPEED_OF_LIGHT) * omega / (2.0 * math.pi)
    return ratio < 0.1, ratio


def full_budget(app, beam, coupling, amp, omega):
    """Evaluate every calculator at one operating point.

    The div(A) entry bounds the largest scalar phase the drive can produce,
    ``2 * |kappa/hbar| * amp``.
    """
    delta = skin_depth(app.wall_conductivity, omega)
    scalar_max = 2.0 * abs(coupling.kappa_over_hbar) * abs(amp)
    ok, ratio = quasi_static_check(beam.region_length, omega)
    return ErrorBudget(
        skin_depth=delta,
        div_a_phase=div_a_phase_bound(app, scalar_max, omega),
        fringe_phase=fringe_field_phase(app, amp, beam, coupling),
        centroid_deflection=classical_deflection(app, amp, beam.region_length, beam),
        energy_smear_phase=energy_smear_phase_sigma(beam, coupling, amp, omega),
        quasi_static_ok=ok,
        quasi_static_ratio=ratio,
    )
