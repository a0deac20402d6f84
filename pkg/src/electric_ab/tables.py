"""Reference tables: transit times, and zeros and maxima of the two pure phase forms.

All zeros and maxima are located numerically (bracketed root finding on
the phase or its derivative), never written down from the closed forms, so
the tables double as a check of the phase functions.
"""

from __future__ import annotations

import math

from scipy.optimize import brentq

from .physics import (
    BeamParams,
    CouplingParams,
    Sinusoid,
    electron_velocity,
    qm_phase_sinusoid,
    scalar_phase_sinusoid,
    transit_time,
)

__all__ = ["TRANSIT_ENERGIES_EV", "transit_table", "phase_form_table", "format_tables"]

TRANSIT_ENERGIES_EV = (10.0, 100.0, 1e3, 1e4)

# sample operating point for the numerical magnitudes
SAMPLE_AMP = 1e-3
SAMPLE_OMEGA = 2.0 * math.pi * 1e9
SAMPLE_KAPPA = 2.4e-23


def sig3(x):
    """Round to three significant figures."""
    return float(f"{x:.3g}")


def transit_table(region_length=0.01, energies=TRANSIT_ENERGIES_EV):
    """Rows ``(E_eV, v_m_s, T_s)`` for a modulated region of ``region_length`` metres."""
    rows = []
    for E in energies:
        beam = BeamParams(E, 0.0, region_length)
        rows.append((E, float(electron_velocity(E)), float(transit_time(beam))))
    return rows


def _root(f, lo, hi):
    return brentq(f, lo, hi, xtol=1e-15, rtol=1e-15, maxiter=200)


def _stationary_points(f, df, n):
    """Sign changes of ``f`` and ``df`` for ``theta`` in ``(0, (n + 1) * 2 pi]``.

    Brackets come from a grid of pi/64 and are refined with Brent's method.
    """
    step = math.pi / 64.0
    grid = [step * (k + 0.5) for k in range(int((n + 1) * 128))]
    crossings, stationary = [], []
    for a, b in zip(grid[:-1], grid[1:]):
        if f(a) * f(b) < 0:
            crossings.append(_root(f, a, b))
        if df(a) * df(b) < 0:
            stationary.append(_root(df, a, b))
    return crossings, stationary


def phase_form_table(n=3, coupling=None, amp=SAMPLE_AMP, omega=SAMPLE_OMEGA):
    """Zeros, maxima and maximum magnitudes of the two pure forms, ``n`` of each.

    Returns a dict with one entry per form. ``zeros`` and ``maxima`` are in
    units of ``theta = omega*T``; ``max_magnitude`` is the largest ``|phase|``
    on the maxima and ``expected_magnitude`` the closed-form amplitude.

    The derivatives used to find the extrema follow from the integral
    definitions: ``d phi_QM / dT = -(e/hbar) dPhi(T)`` and
    ``d phi_B / dT = -(kappa/hbar) dPhi'(T)``.
    """
    coupling = CouplingParams(kappa_over_hbar=SAMPLE_KAPPA) if coupling is None else coupling
    drive = Sinusoid(amp, omega)
    out = {}

    f = lambda th: qm_phase_sinusoid(coupling, amp, omega, th / omega)  # noqa: E731
    df = lambda th: -coupling.e_over_hbar * drive.value_at(th / omega) / omega  # noqa: E731
    cross, stat = _stationary_points(f, df, n)
    maxima = stat[:n]
    out["standard"] = {
        "form": "-(e dPhi0 / (hbar omega)) sin(omega T)",
        "zeros": cross[:n],
        "maxima": maxima,
        "max_magnitude": max(abs(f(t)) for t in maxima),
        "expected_magnitude": coupling.e_over_hbar * amp / omega,
    }

    f = lambda th: scalar_phase_sinusoid(coupling, amp, omega, th / omega)  # noqa: E731
    df = lambda th: -coupling.kappa_over_hbar * drive.derivative_at(th / omega) / omega  # noqa: E731
    cross, stat = _stationary_points(f, df, 2 * n)
    peak = max(abs(f(t)) for t in stat)
    # the scalar form never changes sign: its zeros are the stationary points where it vanishes
    zeros = [t for t in stat if abs(f(t)) < 1e-9 * peak]
    maxima = [t for t in stat if abs(f(t)) >= 1e-9 * peak]
    out["scalar"] = {
        "form": "(kappa dPhi0 / hbar) (1 - cos(omega T))",
        "zeros": zeros[:n],
        "maxima": maxima[:n],
        "max_magnitude": max(abs(f(t)) for t in maxima[:n]),
        "expected_magnitude": 2.0 * abs(coupling.kappa_over_hbar) * amp,
    }
    out["sample_point"] = {"amp_v": amp, "omega_rad_s": omega, "kappa_over_hbar_rad_per_v": coupling.kappa_over_hbar}
    return out


def format_tables(region_length=0.01, n=3):
    lines = [f"Electron transit times, L = {region_length * 100:g} cm", "", f"{'E (eV)':>10}  {'v (m/s)':>10}  {'T (s)':>10}"]
    for E, v, T in transit_table(region_length):
        lines.append(f"{E:>10g}  {v:>10.3g}  {T:>10.3g}")
    forms = phase_form_table(n)
    sp = forms["sample_point"]
    lines += [
        "",
        "Pure phase forms (theta = omega T, in units of pi)",
        f"sample point: dPhi0 = {sp['amp_v']:g} V, omega = {sp['omega_rad_s']:.6g} rad/s, "
        f"kappa/hbar = {sp['kappa_over_hbar_rad_per_v']:g} rad/V",
        "",
    ]
    for name in ("standard", "scalar"):
        row = forms[name]
        lines.append(f"{name}: {row['form']}")
        lines.append("  zeros:  " + ", ".join(f"{z / math.pi:.12f}" for z in row["zeros"]))
        lines.append("  maxima: " + ", ".join(f"{m / math.pi:.12f}" for m in row["maxima"]))
        lines.append(f"  max |phase|: {row['max_magnitude']:.6e} rad (closed form {row['expected_magnitude']:.6e})")
    return "\n".join(lines) + "\n"
