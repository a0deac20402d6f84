"""Physical constants in SI units, plus the few quoted reference values."""

import math

from scipy import constants as _c

ELEMENTARY_CHARGE = _c.e  # C
HBAR = _c.hbar  # J s
ELECTRON_MASS = _c.m_e  # kg
SPEED_OF_LIGHT = _c.c  # m/s
MU_0 = _c.mu_0  # H/m
EV = _c.electron_volt  # J

#: Standard coupling e/hbar in rad / (V s).
E_OVER_HBAR = ELEMENTARY_CHARGE / HBAR

#: Scalar coupling per unit Wilson coefficient at a 1 TeV heavy scale, as quoted
#: for kappa/hbar. Kept as a literal number; see ``kappa_from_scale``.
KAPPA_OVER_HBAR_PER_G_AT_1TEV = 2.4e-23
ONE_TEV_IN_EV = 1.0e12

#: Non-relativistic validity bound on beam kinetic energy.
NONRELATIVISTIC_LIMIT_EV = 1.0e4

#: FWHM / sigma for a Gaussian.
FWHM_PER_SIGMA = 2.0 * math.sqrt(2.0 * math.log(2.0))

#: Copper conductivity, S/m.
COPPER_CONDUCTIVITY = 5.8e7
