"""Fringe images: phase moves the fringes, a force moves the whole pattern.

A pure quantum phase slides the fringes under a fixed envelope, so the
centroid stays put. A classical deflection shifts the envelope and the
fringes together.
"""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from electric_ab import ExperimentConfig, extract_phase, render_fringe_image

out = Path(__file__).parent / "out"
out.mkdir(exist_ok=True)
cfg = ExperimentConfig()
P = cfg.detector.fringe_period
rng = np.random.default_rng(0)

cases = {
    "phase 0": dict(truth_phase=0.0),
    "phase pi/2": dict(truth_phase=np.pi / 2),
    "shift P/4": dict(truth_phase=0.0, shift=P / 4),
}
fig, ax = plt.subplots(figsize=(8, 3.5))
for label, kw in cases.items():
    img = render_fringe_image(kw["truth_phase"], cfg, rng, shift=kw.get("shift", 0.0), electrons=1e5)
    est = extract_phase(img)
    print(f"{label:<11} phase {est.phase:+.3f} +- {est.sigma:.3f} rad, centroid {est.centroid * 1e9:+7.1f} nm")
    ax.step(img.bin_centers * 1e6, img.counts, where="mid", label=label, lw=0.8)
ax.set_xlabel("x (um)")
ax.set_ylabel("counts")
ax.legend(frameon=False)
fig.tight_layout()
fig.savefig(out / "fringes.png", dpi=120)

# %% phase error vs exposure
for n in (1e3, 1e4, 1e5):
    s = np.mean([extract_phase(render_fringe_image(0.3, cfg, rng, electrons=n)).sigma for _ in range(50)])
    print(f"{n:>8.0f} electrons: sigma_phi {s:.4f} rad, 1/sqrt(N) = {1 / np.sqrt(n):.4f}")
