"""The two phase shapes, side by side.

Standard coupling gives a phase proportional to sin(omega T); a scalar
coupling adds one proportional to 1 - cos(omega T). The first crosses zero
at every multiple of pi, the second only touches zero at even multiples.
"""

import math

import numpy as np

from electric_ab import BeamParams, CouplingParams, first_positive_zero, qm_phase_sinusoid, scalar_phase_sinusoid, transit_time
from electric_ab.tables import format_tables

# transit times and the located zeros/maxima
print(format_tables())

# %% phases along a sweep at 100 eV, 1 mV drive
beam = BeamParams(100.0, 0.1, 0.01)
c = CouplingParams(kappa_over_hbar=2.0)
T = transit_time(beam)
theta = np.linspace(0.2 * np.pi, 10 * np.pi, 11)
omega = theta / T
std = qm_phase_sinusoid(c, 1e-3, omega, T)
sca = scalar_phase_sinusoid(c, 1e-3, omega, T)
print(f"{'omega T / pi':>12} {'standard':>12} {'scalar':>12}")
for t, a, b in zip(theta / np.pi, std, sca):
    print(f"{t:12.2f} {a:12.4g} {b:12.4g}")

# %% low frequency: linear in T vs quadratic in T
for th in (1e-3, 1e-2, 1e-1):
    s = qm_phase_sinusoid(c, 1e-3, 1e9, th / 1e9)
    b = scalar_phase_sinusoid(c, 1e-3, 1e9, th / 1e9)
    print(f"theta={th:g}: standard {s:.4g}, scalar {b:.4g}")

# %% a scalar admixture moves the first zero crossing away from pi
for ratio in (0.0, 0.1, 0.5, 1.0, 5.0):
    print(f"B/A = {ratio:>4}: first zero at {first_positive_zero(1.0, ratio) / math.pi:.4f} pi")
