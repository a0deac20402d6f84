import math

import numpy as np
import pytest
from scipy import stats

from electric_ab.analysis import fit_sweep
from electric_ab.detector import DetectorParams
from electric_ab.errors import ConfigError, DomainError
from electric_ab.physics import BeamParams, CouplingParams, qm_phase_sinusoid, scalar_phase_sinusoid, transit_time
from electric_ab.sim import (
    ExperimentConfig,
    Systematics,
    _simulate,
    config_from_dict,
    run_sweep,
    shot_noise_sigma,
    simulate_point,
    simulate_replicas,
    sweep_grid,
)
from electric_ab.systematics import ApparatusParams, classical_deflection

NULL_CFG = ExperimentConfig(systematics=Systematics.none())


def only(**on):
    return Systematics(**{k: on.get(k, False) for k in ("fringe_field", "div_a", "stray_field", "energy_smear", "rf_jitter")})


def test_shot_noise_examples():
    assert shot_noise_sigma(10_000, 1.0) == pytest.approx(1e-2, rel=1e-15)
    assert shot_noise_sigma(10_000, 0.5) == pytest.approx(2e-2, rel=1e-15)
    assert shot_noise_sigma(40_000, 1.0) == pytest.approx(0.5 * shot_noise_sigma(10_000, 1.0), rel=1e-15)
    for n, c in [(0, 1.0), (10, 0.0), (10, 1.5)]:
        with pytest.raises(DomainError):
            shot_noise_sigma(n, c)


@pytest.mark.parametrize(
    "kw",
    [
        {"omega_T_range": (0.0, 1.0)},
        {"omega_T_range": (2.0, 1.0)},
        {"n_points": 1},
        {"electrons_per_point": 0},
        {"fringe_visibility": 0.0},
        {"fringe_visibility": 1.01},
        {"rf_jitter_rms": -1e-12},
        {"seed": -1},
        {"sweep_mode": "energy"},
        {"energy_sampling": "exact"},
    ],
)
def test_config_validation(kw):
    with pytest.raises(ConfigError):
        ExperimentConfig(**kw)


def test_default_sweep_grid():
    s = run_sweep(ExperimentConfig())
    assert len(s) == 50
    assert s.omega_T[0] == pytest.approx(0.2 * math.pi, rel=1e-15)
    assert s.omega_T[-1] == pytest.approx(10 * math.pi, rel=1e-15)
    assert np.allclose(np.diff(s.omega_T), np.diff(s.omega_T)[0], rtol=1e-9, atol=0)
    # frequency sweep: one transit time, omega varies
    assert np.allclose(s.transit_time, transit_time(BeamParams(100.0, 0.1, 0.01)), rtol=1e-14, atol=0)


def test_two_points_are_the_endpoints():
    s = run_sweep(ExperimentConfig(n_points=2, omega_T_range=(1.0, 4.0)))
    assert s.omega_T.tolist() == pytest.approx([1.0, 4.0], rel=1e-15)


def test_transit_mode_fixes_omega():
    cfg = ExperimentConfig(sweep_mode="transit", fixed_omega=2e9)
    omega, T = sweep_grid(cfg)
    assert np.all(omega == 2e9)
    assert np.allclose(omega * T, np.linspace(0.2 * math.pi, 10 * math.pi, 50), rtol=1e-14, atol=0)
    s = run_sweep(cfg.replace(systematics=Systematics.none()))
    fit = fit_sweep(s)
    assert abs(fit.A_hat - s.A_true) < 5 * fit.sigma_A


def test_determinism():
    a = run_sweep(ExperimentConfig(seed=11))
    b = run_sweep(ExperimentConfig(seed=11))
    c = run_sweep(ExperimentConfig(seed=12))
    assert a.equals(b)
    assert not a.equals(c)


def test_point_streams_are_independent_of_sweep_length():
    # point i draws from the (seed, i) substream whatever else is simulated
    a = run_sweep(NULL_CFG.replace(shot_noise=True))
    omega, T = sweep_grid(NULL_CFG)
    for i in (0, 17, 49):
        p = simulate_point(NULL_CFG, CouplingParams(), omega[i], point_index=i, transit_time_s=T[i])
        assert p.measured_phase == a.measured_phase[i]
        assert p.centroid == a.centroid[i]


def test_points_use_distinct_streams():
    cfg = NULL_CFG.replace(amp=0.0)
    s = run_sweep(cfg)
    noise = s.measured_phase / s.phase_sigma
    assert len(set(noise.tolist())) == noise.size
    assert abs(np.corrcoef(noise[:-1], noise[1:])[0, 1]) < 0.5


def test_replicas_match_single_runs():
    reps = simulate_replicas(ExperimentConfig(), n_replicas=5)
    for r in (0, 3):
        s = run_sweep(ExperimentConfig(), replica=r)
        assert np.array_equal(reps.measured_phase[r], s.measured_phase)
        assert np.array_equal(reps.centroid[r], s.centroid)
    later = simulate_replicas(ExperimentConfig(), n_replicas=2, first_replica=3)
    assert np.array_equal(later.measured_phase, reps.measured_phase[3:5])


def test_noiseless_consistency():
    c = CouplingParams(kappa_over_hbar=5.0)
    cfg = NULL_CFG.replace(shot_noise=False)
    s = run_sweep(cfg, c)
    omega, T = sweep_grid(cfg)
    want = qm_phase_sinusoid(c, cfg.amp, omega, T) + scalar_phase_sinusoid(c, cfg.amp, omega, T)
    assert np.max(np.abs(s.measured_phase - want)) <= 1e-12


def test_kappa_zero_at_pi_within_three_sigma():
    cfg = NULL_CFG.replace(n_points=2, omega_T_range=(math.pi, 2 * math.pi))
    reps = simulate_replicas(cfg, n_replicas=10_000)
    z = reps.measured_phase[:, 0] / reps.phase_sigma[:, 0]
    assert np.mean(np.abs(z) < 3) >= 0.995


def test_pull_calibration():
    reps = simulate_replicas(NULL_CFG, n_replicas=2000)
    pull = ((reps.measured_phase - reps.truth_phase) / reps.phase_sigma).ravel()
    assert abs(pull.mean()) < 0.05
    assert abs(pull.var() - 1) < 0.1


def test_reference_systematic_offset_is_small():
    cfg = ExperimentConfig(systematics=only(fringe_field=True, div_a=True, stray_field=True), shot_noise=False)
    clean = run_sweep(cfg.replace(systematics=Systematics.none()))
    offset = run_sweep(cfg).measured_phase - clean.measured_phase
    assert np.max(np.abs(offset)) < 5e-3
    assert np.max(np.abs(offset)) > 0


def test_smear_and_jitter_inflate_sigma_only():
    base = run_sweep(NULL_CFG)
    smeared = run_sweep(NULL_CFG.replace(systematics=only(energy_smear=True)))
    jittered = run_sweep(NULL_CFG.replace(systematics=only(rf_jitter=True)))
    assert np.all(smeared.phase_sigma > base.phase_sigma)
    assert np.all(jittered.phase_sigma >= base.phase_sigma)
    # jitter sensitivity (cos(theta) - 1) vanishes at theta = 2 n pi when kappa = 0
    off_node = np.abs(np.cos(base.omega_T) - 1) > 1e-6
    assert np.all(jittered.phase_sigma[off_node] > base.phase_sigma[off_node])
    assert np.array_equal(smeared.measured_phase == base.measured_phase, np.zeros(50, bool))


def test_stray_only_deflection_matches_classical():
    cfg = ExperimentConfig(amp=1.0, systematics=only(stray_field=True), electrons_per_point=10**6)
    reps = simulate_replicas(cfg, n_replicas=400)
    want = classical_deflection(cfg.apparatus, cfg.amp, cfg.beam.region_length, cfg.beam)
    assert want > 0
    assert reps.centroid.mean() == pytest.approx(want, rel=0.05)
    # the same shift moves the fringe phase
    clean = run_sweep(cfg.replace(systematics=Systematics.none(), shot_noise=False))
    stray = run_sweep(cfg.replace(shot_noise=False))
    force_phase = stray.measured_phase - clean.measured_phase
    assert np.allclose(force_phase, -2 * math.pi * want / cfg.detector.fringe_period, rtol=0, atol=1e-8)


def test_quantum_only_has_no_centroid_shift():
    reps = simulate_replicas(NULL_CFG, CouplingParams(kappa_over_hbar=10.0), n_replicas=10_000)
    c = reps.centroid[:, 7]
    assert abs(c.mean()) < 3 * c.std() / math.sqrt(c.size)


def test_image_mode_sweep():
    cfg = ExperimentConfig(amp=2e-6, n_points=20, systematics=Systematics.none(),
                           detector=DetectorParams(use_images=True))
    s = run_sweep(cfg, CouplingParams(kappa_over_hbar=5e3))
    assert s.phase_wrapped
    assert np.all((s.measured_phase > -math.pi) & (s.measured_phase <= math.pi))
    fit = fit_sweep(s)
    assert abs(fit.A_hat - s.A_true) < 5 * fit.sigma_A
    assert abs(fit.B_hat - s.B_true) < 5 * fit.sigma_B


def test_image_mode_needs_dense_sweep():
    cfg = ExperimentConfig(detector=DetectorParams(use_images=True))
    with pytest.raises(ConfigError, match="amp"):
        run_sweep(cfg)


def test_per_electron_smear_bounded_by_quadrature():
    beam = BeamParams(100.0, 0.1, 0.01)
    amp = 2e-5
    syst = only(energy_smear=True)
    quad = ExperimentConfig(beam=beam, amp=amp, n_points=5, systematics=syst, shot_noise=False, electrons_per_point=2000)
    per = quad.replace(energy_sampling="per_electron")
    omega, T = sweep_grid(quad)
    pts, reps = list(range(5)), list(range(40))
    mq, sq, _, _, clean, _ = _simulate(quad, CouplingParams(), omega, T, pts, reps, return_truth=True)
    mp, sp, _, _ = _simulate(per, CouplingParams(), omega, T, pts, reps)
    scatter = np.std(mp - clean, axis=0)
    assert np.all(scatter <= sq[0] + 1e-15)
    assert np.all(np.isfinite(mp))
    # per-electron sampling reports only shot noise as the per-point sigma
    assert np.allclose(sp, shot_noise_sigma(2000, 1.0), rtol=1e-15, atol=0)


def test_config_round_trip_through_snapshot():
    cfg = ExperimentConfig(seed=9, apparatus=ApparatusParams(tube_radius=2e-3))
    s = run_sweep(cfg)
    assert config_from_dict(s.config) == cfg


def test_pull_ks_against_normal():
    reps = simulate_replicas(NULL_CFG.replace(seed=4), n_replicas=500)
    pull = ((reps.measured_phase - reps.truth_phase) / reps.phase_sigma).ravel()
    assert stats.kstest(pull, "norm").pvalue > 1e-3
