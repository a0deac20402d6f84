"""Separation of the standard and scalar phase components.

The measured phase at sweep point ``i`` is modelled as::

    phi_i = A * s_i + B * (1 - cos(theta_i)),    theta_i = omega_i * T_i

Two choices of the standard regressor ``s_i`` are offered:

``"scaled"`` (default)
    ``s_i = sin(theta_i) / (omega_i * T_ref)``, i.e. the known per-point
    standard prefactor ``-(e/hbar) amp / omega_i`` with the constant part
    absorbed into ``A = -(e/hbar) * amp * T_ref``. ``T_ref`` is the median
    transit time of the sweep. In a frequency sweep at fixed beam energy
    this is ``sin(theta)/theta``; in a transit-time sweep at fixed omega it is
    ``sin(theta)`` up to a constant.

``"literal"``
    ``s_i = sin(theta_i)`` with a single constant ``A``, the two-parameter
    form taken at face value. Only self-consistent when omega is fixed
    across the sweep; ``A_expected`` is then evaluated at the median omega.

Both are linear in ``(A, B)`` and solved exactly through the weighted normal
equations. ``B`` is ``(kappa/hbar) * amp``: the boundary term
``-(kappa/hbar) * [dPhi(T) - dPhi(0)]`` of a cosine drive is
``+(kappa/hbar) * amp * (1 - cos(theta))``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from . import constants as const
from .errors import DegenerateDesignError, DomainError, NotApplicableError
from .physics import first_positive_zero, first_zero_gradient

__all__ = [
    "FitResult",
    "unwrap_phases",
    "reference_transit_time",
    "design_matrix",
    "expected_A",
    "weighted_lstsq",
    "fit_sweep",
    "fit_replicas",
    "kappa_upper_limit",
    "consistency_check_A",
    "zero_shift_report",
    "ONE_SIDED_95",
]

#: Multiplier turning a 1 sigma one-sided limit into a 95% one.
ONE_SIDED_95 = 1.645

BASES = ("scaled", "literal")


def unwrap_phases(raw):
    """Remove 2*pi jumps so successive differences lie in ``(-pi, pi]``."""
    raw = np.asarray(raw, dtype=float)
    if raw.size == 0:
        raise DomainError("cannot unwrap an empty phase sequence")
    out = np.unwrap(raw)
    # np.unwrap leaves a step of exactly -pi as is; the convention here is +pi
    d = np.diff(out)
    fix = d == -np.pi
    if np.any(fix):
        steps = np.concatenate(([0.0], np.cumsum(np.where(fix, 2 * np.pi, 0.0))))
        out = out + steps
    return out


def reference_transit_time(omega, omega_T):
    """Median per-point transit time ``omega_T / omega``."""
    return float(np.median(np.asarray(omega_T, dtype=float) / np.asarray(omega, dtype=float)))


def design_matrix(omega, omega_T, basis="scaled"):
    """Columns ``(standard regressor, 1 - cos(theta))`` for the given basis."""
    if basis not in BASES:
        raise DomainError(f"basis must be one of {BASES}, got {basis!r}")
    omega = np.asarray(omega, dtype=float)
    theta = np.asarray(omega_T, dtype=float)
    if basis == "scaled":
        s = np.sin(theta) / (omega * reference_transit_time(omega, theta))
    else:
        s = np.sin(theta)
    return np.column_stack([s, 1.0 - np.cos(theta)])


def expected_A(omega, omega_T, amp, basis="scaled", e_over_hbar=const.E_OVER_HBAR):
    """Known value of the standard coefficient for the chosen basis."""
    if amp is None:
        return math.nan
    if basis == "scaled":
        return -e_over_hbar * amp * reference_transit_time(omega, omega_T)
    return -e_over_hbar * amp / float(np.median(omega))


def _null_direction(N):
    evals, evecs = np.linalg.eigh(N)
    return evals, evecs[:, 0]


def weighted_lstsq(X, y, sigma):
    """Solve the weighted normal equations ``(X^T W X) b = X^T W y``, ``W = 1/sigma^2``.

    ``y`` may be one data vector or a stack of them (replicas along axis 0);
    the design and weights are shared. Returns ``(coef, cov, chi2)``.
    """
    X = np.asarray(X, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    if np.any(~(sigma > 0)):
        raise DomainError("all phase_sigma must be positive")
    w = 1.0 / sigma**2
    N = X.T @ (w[:, None] * X)
    evals, null = _null_direction(N)
    if not (evals[-1] > 0) or evals[0] <= 1e-12 * evals[-1]:
        raise DegenerateDesignError("design matrix does not identify all coefficients", null)
    cov = np.linalg.inv(N)
    cov = 0.5 * (cov + cov.T)
    y = np.asarray(y, dtype=float)
    rhs = (y * w) @ X
    coef = rhs @ cov.T
    resid = y - coef @ X.T
    chi2 = np.sum(w * resid**2, axis=-1)
    return coef, cov, chi2


@dataclass
class FitResult:
    """Outcome of a two-component fit.

    ``covariance`` is ordered ``(A, B)``; in A-fixed mode the A row and
    column are zero and ``A_pull`` is NaN.
    """

    A_hat: float
    B_hat: float
    covariance: np.ndarray
    chi2: float
    dof: int
    first_zero: float
    first_zero_sigma: float
    A_expected: float
    A_pull: float
    B_significance: float
    kappa_limit_1sigma: float
    mode: str
    basis: str
    amp: float | None
    transit_time_ref: float
    omega_fixed: float | None
    n_points: int

    @property
    def sigma_A(self):
        return math.sqrt(self.covariance[0, 0])

    @property
    def sigma_B(self):
        return math.sqrt(self.covariance[1, 1])

    def standard_regressor(self, theta):
        """Standard-component shape on a dense ``theta`` grid, matching the fit basis."""
        theta = np.asarray(theta, dtype=float)
        if self.basis == "literal":
            return np.sin(theta)
        if self.omega_fixed is not None:
            return np.sin(theta) / (self.omega_fixed * self.transit_time_ref)
        return np.sin(theta) / theta

    def model(self, theta):
        theta = np.asarray(theta, dtype=float)
        return self.A_hat * self.standard_regressor(theta) + self.B_hat * (1.0 - np.cos(theta))

    def to_dict(self):
        d = asdict(self)
        d["covariance"] = np.asarray(self.covariance).tolist()
        return d

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        d["covariance"] = np.asarray(d["covariance"], dtype=float)
        return cls(**d)


def _sweep_axis(omega, omega_T):
    omega = np.asarray(omega, dtype=float)
    if np.allclose(omega, omega[0], rtol=1e-12, atol=0):
        return float(omega[0])
    return None


def fit_sweep(sweep, fixed_a=None, basis="scaled", e_over_hbar=const.E_OVER_HBAR):
    """Weighted linear least-squares fit of a sweep.

    ``fixed_a=None`` fits A and B (needs at least 3 points); a number fixes A
    and fits B alone (needs at least 2). Wrapped sweeps are unwrapped first;
    the remaining 2*pi*k ambiguity of the unwrapped sequence is resolved by
    the integer k that minimises chi2.
    """
    omega = np.asarray(sweep.omega, dtype=float)
    theta = np.asarray(sweep.omega_T, dtype=float)
    y = np.asarray(sweep.measured_phase, dtype=float)
    sigma = np.asarray(sweep.phase_sigma, dtype=float)
    n = y.size
    if fixed_a is None and n < 3:
        raise DomainError(f"A-free fit needs at least 3 points, got {n}")
    if n < 2:
        raise DomainError(f"A-fixed fit needs at least 2 points, got {n}")
    if np.any(~(sigma > 0)):
        raise DomainError("all phase_sigma must be positive")
    if np.any(np.diff(theta) <= 0):
        raise DomainError("sweep points must be ordered by strictly increasing omega_T")

    X = design_matrix(omega, theta, basis)
    if getattr(sweep, "phase_wrapped", False):
        y = _resolve_offset(unwrap_phases(y), X, sigma, fixed_a)

    amp = getattr(sweep, "amp", None)
    a_exp = expected_A(omega, theta, amp, basis, e_over_hbar)

    if fixed_a is None:
        coef, cov, chi2 = weighted_lstsq(X, y, sigma)
        A_hat, B_hat = float(coef[0]), float(coef[1])
        dof = n - 2
        mode = "A_free"
        A_pull = (A_hat - a_exp) / math.sqrt(cov[0, 0]) if math.isfinite(a_exp) else math.nan
    else:
        A_hat = float(fixed_a)
        b, vb, chi2 = weighted_lstsq(X[:, 1:], y - A_hat * X[:, 0], sigma)
        B_hat = float(b[0])
        cov = np.array([[0.0, 0.0], [0.0, float(vb[0, 0])]])
        dof = n - 1
        mode = "A_fixed"
        A_pull = math.nan

    sigma_B = math.sqrt(cov[1, 1])
    if A_hat == 0.0 and B_hat == 0.0:
        fz, fz_sigma = math.nan, math.nan
    else:
        fz = first_positive_zero(A_hat, B_hat)
        g = first_zero_gradient(A_hat, B_hat)
        fz_sigma = float(math.sqrt(max(g @ cov @ g, 0.0)))

    fit = FitResult(
        A_hat=A_hat,
        B_hat=B_hat,
        covariance=np.asarray(cov, dtype=float),
        chi2=float(chi2),
        dof=int(dof),
        first_zero=float(fz),
        first_zero_sigma=fz_sigma,
        A_expected=float(a_exp),
        A_pull=float(A_pull),
        B_significance=abs(B_hat) / sigma_B,
        kappa_limit_1sigma=math.nan,
        mode=mode,
        basis=basis,
        amp=None if amp is None else float(amp),
        transit_time_ref=reference_transit_time(omega, theta),
        omega_fixed=_sweep_axis(omega, theta),
        n_points=int(n),
    )
    if amp is not None and amp > 0:
        fit.kappa_limit_1sigma = kappa_upper_limit(fit, amp)
    return fit


def _resolve_offset(y, X, sigma, fixed_a):
    """Shift an unwrapped sequence by the 2*pi multiple that best fits the model."""
    w = 1.0 / sigma**2
    if fixed_a is None:
        Xf = X
        base = y
    else:
        Xf = X[:, 1:]
        base = y - fixed_a * X[:, 0]
    # chi2(k) is quadratic in k: project the constant direction out of the model span
    N = Xf.T @ (w[:, None] * Xf)
    P = lambda v: v - Xf @ np.linalg.solve(N, Xf.T @ (w * v))  # noqa: E731
    one = P(np.full_like(y, 2.0 * np.pi))
    r = P(base)
    k_star = -np.sum(w * one * r) / np.sum(w * one * one)
    k = round(k_star)
    return y + 2.0 * np.pi * k


def fit_replicas(omega, omega_T, phases, phase_sigma, basis="scaled"):
    """Vectorised A-free fit of many sweeps sharing one design and one set of errors.

    ``phases`` has shape ``(n_replicas, n_points)``. Returns
    ``(coef (n, 2), cov (2, 2), chi2 (n,))``.
    """
    X = design_matrix(omega, omega_T, basis)
    return weighted_lstsq(X, phases, phase_sigma)


def kappa_upper_limit(fit, amp, n_sigma=1.0):
    """One-sided limit on kappa/hbar (rad/V): ``(|B_hat| + n_sigma * sigma_B) / amp``.

    ``n_sigma = 1`` gives the 1 sigma limit; :data:`ONE_SIDED_95` gives 95%.
    """
    if not (amp > 0):
        raise DomainError(f"drive amplitude must be positive, got {amp!r}")
    return (max(0.0, abs(fit.B_hat)) + n_sigma * math.sqrt(fit.covariance[1, 1])) / amp


def consistency_check_A(fit):
    """Pull of the fitted standard coefficient against its known value."""
    if fit.mode != "A_free":
        raise NotApplicableError("A consistency check needs an A-free fit")
    if not math.isfinite(fit.A_expected):
        raise NotApplicableError("A_expected unknown: sweep carries no drive amplitude")
    return (fit.A_hat - fit.A_expected) / math.sqrt(fit.covariance[0, 0])


def zero_shift_report(fit):
    """First positive zero of ``A sin + B (1 - cos)`` at the fitted coefficients.

    Returns ``(theta, sigma)`` with sigma from linear propagation of the
    covariance.
    """
    if fit.A_hat == 0.0 and fit.B_hat == 0.0:
        raise DomainError("both fitted coefficients are zero; no zero crossing defined")
    theta = first_positive_zero(fit.A_hat, fit.B_hat)
    g = first_zero_gradient(fit.A_hat, fit.B_hat)
    return theta, float(math.sqrt(max(g @ fit.covariance @ g, 0.0)))
