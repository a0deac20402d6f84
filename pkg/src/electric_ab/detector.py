"""One-dimensional detector model: fringe rendering and fringe-phase extraction.

The detector records the projection of the interference pattern onto the
fringe axis. Arrival density is a Gaussian beam envelope times the fringe
term, both shifted rigidly by any classical centroid deflection ``d``::

    p(x) ~ G(x - d; sigma_env) * (1 + C cos(2 pi (x - d) / P + phase))

The envelope is what gives the pattern a centroid. With ``sigma_env`` of
0.8 fringe periods the fringe term's contribution to the centroid is
suppressed by ``exp(-(2 pi * 0.8)^2 / 2)``, roughly 3e-6, so a pure phase
shift leaves the centroid where it was.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ConfigError, DegenerateDesignError, DomainError

__all__ = ["DetectorParams", "DetectorImage", "PhaseEstimate", "render_fringe_image", "extract_phase", "wrap_phase"]

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(8)


def wrap_phase(phi):
    """Map phases into ``(-pi, pi]``."""
    phi = np.asarray(phi, dtype=float)
    w = np.pi - np.mod(np.pi - phi, 2.0 * np.pi)
    return float(w) if w.ndim == 0 else w


@dataclass(frozen=True)
class DetectorParams:
    """Detector geometry. The defaults are arbitrary but fixed: 256 bins over 8 fringe periods."""

    fringe_period: float = 1e-6
    n_bins: int = 256
    n_periods: float = 8.0
    envelope_periods: float = 0.8
    use_images: bool = False

    def __post_init__(self):
        if not (self.fringe_period > 0):
            raise ConfigError("fringe_period", "fringe_period > 0", self.fringe_period)
        if not (int(self.n_bins) == self.n_bins and self.n_bins >= 8):
            raise ConfigError("n_bins", "integer n_bins ≥ 8", self.n_bins)
        if not (self.n_periods > 0):
            raise ConfigError("n_periods", "n_periods > 0", self.n_periods)
        if not (self.envelope_periods > 0):
            raise ConfigError("envelope_periods", "envelope_periods > 0", self.envelope_periods)

    @property
    def envelope_sigma(self):
        return self.envelope_periods * self.fringe_period

    @property
    def width(self):
        return self.n_periods * self.fringe_period

    def bin_edges(self):
        return np.linspace(-0.5 * self.width, 0.5 * self.width, int(self.n_bins) + 1)


@dataclass(frozen=True, eq=False)
class DetectorImage:
    """Binned arrival counts along the fringe axis.

    ``truth_phase`` and ``shift`` are recorded for synthetic images only.
    """

    bin_centers: np.ndarray
    counts: np.ndarray
    fringe_period: float
    visibility: float
    envelope_sigma: float
    electrons: float
    truth_phase: float | None = None
    shift: float | None = None

    def __post_init__(self):
        c = np.asarray(self.counts)
        if np.any(c < 0):
            raise DomainError("detector counts must be non-negative")
        if np.asarray(self.bin_centers).shape != c.shape:
            raise DomainError("bin_centers and counts must have the same shape")

    @property
    def bin_width(self):
        return float(self.bin_centers[1] - self.bin_centers[0])

    @property
    def total(self):
        return int(np.sum(self.counts))


class PhaseEstimate(NamedTuple):
    phase: float
    sigma: float
    centroid: float


def expected_counts(edges, electrons, phase, visibility, period, envelope_sigma, shift=0.0):
    """Mean counts per bin, each bin integrated by 8-point Gauss-Legendre."""
    a = edges[:-1, None]
    b = edges[1:, None]
    x = 0.5 * (a + b) + 0.5 * (b - a) * _GL_NODES[None, :]
    u = x - shift
    env = np.exp(-0.5 * (u / envelope_sigma) ** 2) / (envelope_sigma * math.sqrt(2.0 * math.pi))
    dens = env * (1.0 + visibility * np.cos(2.0 * np.pi * u / period + phase))
    return electrons * 0.5 * (b[:, 0] - a[:, 0]) * (dens @ _GL_WEIGHTS)


def render_fringe_image(truth_phase, config, rng=None, *, shift=0.0, noise=True, electrons=None, visibility=None):
    """Simulate one exposure for an experiment configuration.

    Uses ``config.detector``, ``config.fringe_visibility`` and
    ``config.electrons_per_point`` unless overridden. Bin counts are Poisson
    with the model mean; ``noise=False`` returns the rounded mean instead (a
    noiseless reference image).
    """
    detector = config.detector
    visibility = config.fringe_visibility if visibility is None else visibility
    electrons = config.electrons_per_point if electrons is None else electrons
    if not (0.0 <= visibility <= 1.0):
        raise DomainError(f"visibility must lie in [0, 1], got {visibility!r}")
    if not (electrons > 0):
        raise DomainError(f"electrons must be positive, got {electrons!r}")
    edges = detector.bin_edges()
    mu = expected_counts(edges, electrons, truth_phase, visibility, detector.fringe_period,
                         detector.envelope_sigma, shift)
    if noise:
        if rng is None:
            raise DomainError("a random generator is required for a noisy exposure")
        counts = rng.poisson(mu)
    else:
        counts = np.rint(mu).astype(np.int64)
    return DetectorImage(
        bin_centers=0.5 * (edges[:-1] + edges[1:]),
        counts=counts,
        fringe_period=detector.fringe_period,
        visibility=float(visibility),
        envelope_sigma=detector.envelope_sigma,
        electrons=float(electrons),
        truth_phase=float(truth_phase),
        shift=float(shift),
    )


def extract_phase(image, iterations=3):
    """Fringe phase, its statistical error and the beam centroid from one image.

    The model ``n_i = E_i (b0 + b1 cos(k x_i) + b2 sin(k x_i))``, with the
    envelope ``E_i`` centred on the count-weighted centroid, is linear in
    ``b``. It is fitted by iteratively reweighted least squares with Poisson
    weights ``1 / max(mu_i, 1)``. The phase is ``atan2(-b2, b1)`` wrapped to
    ``(-pi, pi]`` and its error comes from the normal-matrix inverse.
    """
    x = np.asarray(image.bin_centers, dtype=float)
    n = np.asarray(image.counts, dtype=float)
    total = n.sum()
    if total < 100:
        raise DomainError(f"need at least 100 counts to extract a phase, got {total:g}")
    centroid = float(np.dot(x, n) / total)
    k = 2.0 * np.pi / image.fringe_period
    env = np.exp(-0.5 * ((x - centroid) / image.envelope_sigma) ** 2)
    X = np.column_stack([env, env * np.cos(k * x), env * np.sin(k * x)])

    w = np.ones_like(n)
    for _ in range(iterations + 1):
        N = X.T @ (w[:, None] * X)
        evals, evecs = np.linalg.eigh(N)
        if evals[-1] <= 0 or evals[0] <= 1e-12 * evals[-1]:
            raise DegenerateDesignError("singular normal matrix in fringe fit", evecs[:, 0])
        beta = np.linalg.solve(N, X.T @ (w * n))
        w = 1.0 / np.maximum(X @ beta, 1.0)
    cov = np.linalg.inv(X.T @ (w[:, None] * X))

    b1, b2 = beta[1], beta[2]
    r2 = b1 * b1 + b2 * b2
    if r2 == 0.0:
        raise DegenerateDesignError("no fringe modulation in image", np.array([0.0, 1.0, 0.0]))
    phase = wrap_phase(math.atan2(-b2, b1))
    var = (b2 * b2 * cov[1, 1] + b1 * b1 * cov[2, 2] - 2.0 * b1 * b2 * cov[1, 2]) / r2**2
    return PhaseEstimate(phase, float(math.sqrt(var)), centroid)
