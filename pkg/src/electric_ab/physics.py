"""Phase predictions for the electric Aharonov-Bohm configuration.

Two channels contribute to the phase difference between the arms:

* the standard minimal coupling, ``-(e/hbar) * integral of dPhi(t) dt``;
* the scalar coupling, ``-(kappa/hbar) * [dPhi(T) - dPhi(0)]``,
  a boundary term that only sees the endpoint values of the drive.

For a drive ``dPhi(t) = amp * cos(omega*t + offset)`` these reduce to the
``sin(omega*T)`` and ``1 - cos(omega*T)`` forms. All quantities are SI except
beam energies, which are carried in electronvolts.

Units note: the quoted numeric scale for kappa/hbar (2.4e-23 per unit g at
1 TeV) is printed with units of (V s)^-1, but the boundary phase
``(kappa/hbar) * amp`` is only dimensionless if kappa/hbar is in rad/V. This
module stores kappa/hbar in rad/V and reproduces the quoted number as given.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import constants as const
from .errors import ConfigError, DomainError, RootNotFoundError
from .quadrature import adaptive_simpson

__all__ = [
    "CouplingParams",
    "BeamParams",
    "Waveform",
    "Sinusoid",
    "Sampled",
    "Constant",
    "electron_velocity",
    "transit_time",
    "energy_for_transit_time",
    "qm_phase_sinusoid",
    "scalar_phase_boundary",
    "scalar_phase_sinusoid",
    "qm_phase_waveform",
    "scalar_phase_waveform",
    "scalar_field",
    "combined_model",
    "first_positive_zero",
    "first_zero_gradient",
    "kappa_from_scale",
]


def _out(x):
    x = np.asarray(x, dtype=float)
    return float(x) if x.ndim == 0 else x


# --------------------------------------------------------------------------
# parameter types


def kappa_from_scale(g, lambda_ev):
    """Scalar coupling kappa/hbar (rad/V) from a Wilson coefficient and a heavy scale.

    Linear in ``g`` and inverse in the scale, normalised to 2.4e-23 at
    ``g = 1``, ``lambda_ev = 1e12`` (1 TeV).
    """
    if not (lambda_ev > 0):
        raise DomainError(f"heavy scale must be positive, got {lambda_ev!r}")
    return g * const.KAPPA_OVER_HBAR_PER_G_AT_1TEV * (const.ONE_TEV_IN_EV / lambda_ev)


@dataclass(frozen=True)
class CouplingParams:
    """Coupling constants of the two phase channels.

    ``e_over_hbar`` is the physical constant (rad/(V s)); it is validated,
    not fitted. ``kappa_over_hbar`` is the scalar coupling in rad/V. ``g``
    and ``lambda_scale`` (eV) are kept only when the coupling was built
    from them.
    """

    e_over_hbar: float = const.E_OVER_HBAR
    kappa_over_hbar: float = 0.0
    g: float | None = None
    lambda_scale: float | None = None

    def __post_init__(self):
        if not math.isfinite(self.e_over_hbar) or abs(self.e_over_hbar / const.E_OVER_HBAR - 1.0) > 0.01:
            raise ConfigError("e_over_hbar", "within 1% of e/hbar = 1.519e15 rad/(V s)", self.e_over_hbar)
        if not math.isfinite(self.kappa_over_hbar):
            raise ConfigError("kappa_over_hbar", "finite", self.kappa_over_hbar)

    @classmethod
    def from_scale(cls, g, lambda_ev):
        if g < 0:
            raise ConfigError("g", "g ≥ 0", g)
        return cls(kappa_over_hbar=kappa_from_scale(g, lambda_ev), g=float(g), lambda_scale=float(lambda_ev))


@dataclass(frozen=True)
class BeamParams:
    """Electron beam and modulated-region geometry.

    ``kinetic_energy`` and ``energy_spread_fwhm`` are in eV, ``region_length``
    in metres. ``nonrelativistic`` is true below 10 keV; energies above 10 keV
    only trigger a warning.
    """

    kinetic_energy: float
    energy_spread_fwhm: float = 0.0
    region_length: float = 0.01

    def __post_init__(self):
        if not (self.kinetic_energy > 0):
            raise ConfigError("kinetic_energy", "kinetic_energy > 0", self.kinetic_energy)
        if not (self.energy_spread_fwhm >= 0):
            raise ConfigError("energy_spread_fwhm", "energy_spread_fwhm ≥ 0", self.energy_spread_fwhm)
        if not (self.region_length > 0):
            raise ConfigError("region_length", "region_length > 0", self.region_length)
        if self.kinetic_energy > const.NONRELATIVISTIC_LIMIT_EV:
            warnings.warn(
                f"beam energy {self.kinetic_energy:g} eV exceeds the non-relativistic "
                f"regime ({const.NONRELATIVISTIC_LIMIT_EV:g} eV); kinematics are approximate",
                RuntimeWarning,
                stacklevel=3,
            )

    @classmethod
    def from_cm(cls, kinetic_energy_ev, region_length_cm, energy_spread_fwhm_ev=0.0):
        return cls(kinetic_energy_ev, energy_spread_fwhm_ev, region_length_cm * 1e-2)

    @property
    def nonrelativistic(self):
        return self.kinetic_energy < const.NONRELATIVISTIC_LIMIT_EV


# --------------------------------------------------------------------------
# waveforms


class Waveform:
    """Potential difference between the two drift tubes, in volts."""

    def value_at(self, t):
        raise NotImplementedError

    def net_change(self, t0, t1):
        """``integral of dPhi/dt over [t0, t1]``, i.e. the drive's net change."""
        raise NotImplementedError

    def check_window(self, t0, t1):
        pass


@dataclass(frozen=True)
class Sinusoid(Waveform):
    amplitude: float
    omega: float
    phase_offset: float = 0.0

    def __post_init__(self):
        if not (self.amplitude >= 0):
            raise ConfigError("amplitude", "amplitude ≥ 0", self.amplitude)
        if not (self.omega > 0):
            raise ConfigError("omega", "omega > 0", self.omega)

    def value_at(self, t):
        return _out(self.amplitude * np.cos(self.omega * np.asarray(t, dtype=float) + self.phase_offset))

    def derivative_at(self, t):
        return _out(-self.amplitude * self.omega * np.sin(self.omega * np.asarray(t, dtype=float) + self.phase_offset))


@dataclass(frozen=True)
class Constant(Waveform):
    value: float

    def value_at(self, t):
        return _out(np.full(np.shape(t), float(self.value)))

    def derivative_at(self, t):
        return _out(np.zeros(np.shape(t)))


@dataclass(frozen=True, eq=False)
class Sampled(Waveform):
    """Piecewise-linear waveform through ``(times, values)``.

    Times must be strictly increasing with at least two samples. Queries
    outside ``[times[0], times[-1]]`` raise :class:`DomainError`.
    """

    times: np.ndarray
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        t = np.array(self.times, dtype=float)
        v = np.array(self.values, dtype=float)
        if t.ndim != 1 or t.shape != v.shape:
            raise ConfigError("times", "1-D and the same length as values", t.shape)
        if t.size < 2:
            raise ConfigError("times", "at least 2 samples", t.size)
        if not np.all(np.diff(t) > 0):
            raise ConfigError("times", "strictly increasing")
        if not (np.all(np.isfinite(t)) and np.all(np.isfinite(v))):
            raise ConfigError("values", "finite")
        t.flags.writeable = False
        v.flags.writeable = False
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)

    def check_window(self, t0, t1):
        lo, hi = self.times[0], self.times[-1]
        if t0 < lo or t1 > hi:
            raise DomainError(f"window [{t0:g}, {t1:g}] s lies outside the sampled span [{lo:g}, {hi:g}] s")

    def value_at(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t < self.times[0]) or np.any(t > self.times[-1]):
            raise DomainError("time outside the sampled span")
        return _out(np.interp(t, self.times, self.values))

    def breakpoints(self, t0, t1):
        """Window edges plus every interior knot, sorted."""
        inner = self.times[(self.times > t0) & (self.times < t1)]
        return np.concatenate(([t0], inner, [t1]))

    def net_change(self, t0, t1):
        self.check_window(t0, t1)
        pts = self.breakpoints(t0, t1)
        vals = np.interp(pts, self.times, self.values)
        # exact integral of the piecewise-constant slope, segment by segment
        return math.fsum(np.diff(vals).tolist())


# --------------------------------------------------------------------------
# kinematics


def electron_velocity(energy):
    """Non-relativistic speed (m/s) of an electron with kinetic energy in eV."""
    e = np.asarray(energy, dtype=float)
    if np.any(~(e > 0)):
        raise DomainError(f"electron energy must be positive, got {energy!r}")
    return _out(np.sqrt(2.0 * e * const.EV / const.ELECTRON_MASS))


def transit_time(beam):
    """Time (s) spent in the modulated region, ``L / v``."""
    return beam.region_length / electron_velocity(beam.kinetic_energy)


def energy_for_transit_time(region_length, T):
    """Inverse of :func:`transit_time`: beam energy (eV) giving transit time ``T``."""
    T = np.asarray(T, dtype=float)
    if np.any(~(T > 0)):
        raise DomainError("transit time must be positive")
    v = region_length / T
    return _out(0.5 * const.ELECTRON_MASS * v**2 / const.EV)


# --------------------------------------------------------------------------
# closed-form sinusoidal predictions


def _check_omega_T(omega, T):
    if np.any(~(np.asarray(omega) > 0)):
        raise DomainError(f"omega must be positive, got {omega!r}")
    if np.any(~(np.asarray(T) >= 0)):
        raise DomainError(f"transit time must be non-negative, got {T!r}")


def qm_phase_sinusoid(coupling, amp, omega, T, phase_offset=0.0):
    """Standard phase for ``amp*cos(omega*t + phase_offset)``, entry at t=0, exit at t=T.

    With zero offset this is ``-(e/hbar) * (amp/omega) * sin(omega*T)``.
    """
    _check_omega_T(omega, T)
    omega = np.asarray(omega, dtype=float)
    theta = omega * np.asarray(T, dtype=float)
    if np.all(np.asarray(phase_offset) == 0):
        s = np.sin(theta)
    else:
        s = np.sin(theta + phase_offset) - np.sin(phase_offset)
    return _out(-coupling.e_over_hbar * (np.asarray(amp, dtype=float) / omega) * s)


def scalar_phase_boundary(coupling, delta_phi_start, delta_phi_end):
    """Boundary-term phase ``-(kappa/hbar) * (end - start)``."""
    d = np.asarray(delta_phi_end, dtype=float) - np.asarray(delta_phi_start, dtype=float)
    return _out(-coupling.kappa_over_hbar * d)


def scalar_phase_sinusoid(coupling, amp, omega, T, phase_offset=0.0):
    """Scalar phase for a sinusoidal drive, the boundary term of its endpoint values.

    At zero offset this is ``+(kappa/hbar) * amp * (1 - cos(omega*T))``: the
    drive falls from ``amp`` to ``amp*cos(omega*T)``, and the boundary term
    carries a leading minus sign.
    """
    _check_omega_T(omega, T)
    theta = np.asarray(omega, dtype=float) * np.asarray(T, dtype=float)
    amp = np.asarray(amp, dtype=float)
    if np.all(np.asarray(phase_offset) == 0):
        start, end = amp, amp * np.cos(theta)
    else:
        start, end = amp * np.cos(phase_offset), amp * np.cos(theta + phase_offset)
    return scalar_phase_boundary(coupling, start, end)


def scalar_field(waveform, t):
    """Scalar field inside the shielded tubes, ``B = dPhi/dt / c^2``."""
    if isinstance(waveform, Sampled):
        waveform.check_window(np.min(t), np.max(t))
        slope = np.diff(waveform.values) / np.diff(waveform.times)
        idx = np.clip(np.searchsorted(waveform.times, t, side="right") - 1, 0, slope.size - 1)
        d = slope[idx]
    else:
        d = waveform.derivative_at(t)
    return _out(np.asarray(d) / const.SPEED_OF_LIGHT**2)


# --------------------------------------------------------------------------
# general waveforms


def _check_tol(tol):
    if not (0.0 < tol <= 1e-3):
        raise DomainError(f"tolerance must lie in (0, 1e-3], got {tol!r}")


def qm_phase_waveform(coupling, w, T, tol=1e-9):
    """Standard phase ``-(e/hbar) * integral_0^T w(t) dt`` by adaptive quadrature.

    Sampled waveforms are integrated panel by panel between their knots so
    every panel integrand is linear.
    """
    _check_tol(tol)
    if not (T >= 0):
        raise DomainError(f"transit time must be non-negative, got {T!r}")
    w.check_window(0.0, T)
    if isinstance(w, Sampled):
        pts = w.breakpoints(0.0, T)
        parts = [
            adaptive_simpson(w.value_at, a, b, tol, initial_panels=1)
            for a, b in zip(pts[:-1], pts[1:])
        ]
        integral = math.fsum(parts)
    else:
        integral = adaptive_simpson(w.value_at, 0.0, T, tol)
    return -coupling.e_over_hbar * integral


def scalar_phase_waveform(coupling, w, T, tol=1e-9):
    """Scalar phase ``-(kappa/hbar) * integral_0^T dPhi/dt dt``.

    Closed-form drives integrate their analytic derivative by adaptive
    quadrature. Sampled drives integrate the piecewise-constant slope
    exactly, so the result telescopes to the endpoint difference.
    """
    _check_tol(tol)
    if not (T >= 0):
        raise DomainError(f"transit time must be non-negative, got {T!r}")
    w.check_window(0.0, T)
    if isinstance(w, Sampled):
        net = w.net_change(0.0, T)
    elif isinstance(w, Constant):
        net = 0.0
    else:
        net = adaptive_simpson(w.derivative_at, 0.0, T, tol)
    return -coupling.kappa_over_hbar * net


# --------------------------------------------------------------------------
# two-component model


def combined_model(A, B, theta):
    """``A*sin(theta) + B*(1 - cos(theta))``."""
    theta = np.asarray(theta, dtype=float)
    return _out(A * np.sin(theta) + B * (1.0 - np.cos(theta)))


_ZERO_EPS = 1e-6
_SCAN_STEP = math.pi / 100.0
_BISECT_TOL = 1e-12


def _bisect(f, lo, hi, flo):
    while hi - lo > _BISECT_TOL:
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0.0:
            return mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _first_root(f, lo, hi):
    """First sign change of ``f`` on a pi/100 grid over ``(lo, hi]``, bisected."""
    n = int(math.ceil((hi - lo) / _SCAN_STEP))
    grid = [lo + (hi - lo) * i / n for i in range(n + 1)]
    prev_x, prev_f = grid[0], f(grid[0])
    if prev_f == 0.0:
        return prev_x
    for x in grid[1:]:
        fx = f(x)
        if fx == 0.0:
            return x
        if (fx > 0) != (prev_f > 0):
            return _bisect(f, prev_x, x, prev_f)
        prev_x, prev_f = x, fx
    return None


def first_positive_zero(A, B):
    """Smallest ``theta > 1e-6`` with ``A*sin(theta) + B*(1 - cos(theta)) = 0``.

    Uses ``A sin t + B (1 - cos t) = 2 sin(t/2) [A cos(t/2) + B sin(t/2)]``:
    the first factor vanishes at 2*pi, and the first root of the second
    factor is located by a pi/100 grid scan on ``(1e-6, 4*pi]`` followed by
    bisection to 1e-12. Scanning the factors separately keeps a tangent
    root (pure scalar form) or two roots sharing one grid cell from being
    skipped. Returns pi when ``B == 0`` and 2*pi when ``A == 0``.

    Note that for ``A, B > 0`` the root is ``2*(pi - arctan(A/B))``, which
    moves *up* from pi toward 2*pi as ``B/A`` grows.
    """
    A = float(A)
    B = float(B)
    if A == 0.0 and B == 0.0:
        raise DomainError("first_positive_zero needs (A, B) != (0, 0)")
    if B == 0.0:
        return math.pi
    if A == 0.0:
        return 2.0 * math.pi

    def g(t):
        return A * math.cos(0.5 * t) + B * math.sin(0.5 * t)

    root = _first_root(g, _ZERO_EPS, 4.0 * math.pi)
    if root is None:  # pragma: no cover - g has period 4*pi, always changes sign
        raise RootNotFoundError(f"no zero of the two-component model found for A={A!r}, B={B!r}")
    return min(root, 2.0 * math.pi)


def first_zero_gradient(A, B):
    """Gradient of the first zero w.r.t. ``(A, B)``, for linear error propagation.

    From ``tan(theta/2) = -A/B``: ``d theta = 2 (A dB - B dA) / (A^2 + B^2)``.
    """
    r2 = A * A + B * B
    if r2 == 0.0:
        raise DomainError("gradient undefined at (A, B) = (0, 0)")
    return np.array([-2.0 * B / r2, 2.0 * A / r2])
