import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from electric_ab.analysis import (
    ONE_SIDED_95,
    consistency_check_A,
    design_matrix,
    fit_replicas,
    fit_sweep,
    kappa_upper_limit,
    unwrap_phases,
    zero_shift_report,
)
from electric_ab.detector import wrap_phase
from electric_ab.errors import DegenerateDesignError, DomainError, NotApplicableError
from electric_ab.physics import CouplingParams
from electric_ab.sim import ExperimentConfig, SweepResult, Systematics, run_sweep, simulate_replicas


def make_sweep(theta, phase, sigma=1e-2, omega=None, amp=None, wrapped=False):
    theta = np.asarray(theta, dtype=float)
    omega = np.full_like(theta, 1e9) if omega is None else np.asarray(omega, dtype=float)
    n = theta.size
    return SweepResult(omega, theta, np.asarray(phase, dtype=float), np.broadcast_to(sigma, (n,)),
                       np.zeros(n), np.ones(n), amp=amp, phase_wrapped=wrapped)


def literal(theta, A, B):
    return A * np.sin(theta) + B * (1 - np.cos(theta))


THETA50 = np.linspace(0.2 * np.pi, 10 * np.pi, 50)
NULL_CFG = ExperimentConfig(systematics=Systematics.none())


# unwrapping


def test_unwrap_leaves_continuous_sequence():
    x = np.linspace(0, 3, 40) ** 2 * 0.1
    assert np.array_equal(unwrap_phases(x), x)


def test_unwrap_removes_single_jump():
    x = np.linspace(0.0, 1.0, 10)
    y = x.copy()
    y[6:] += 2 * np.pi
    assert np.allclose(unwrap_phases(y), x, rtol=0, atol=1e-14)


def test_unwrap_steps_in_half_open_interval():
    y = np.array([0.0, -np.pi, -2 * np.pi, 0.5])
    d = np.diff(unwrap_phases(y))
    assert np.all(d > -np.pi) and np.all(d <= np.pi)


def test_unwrap_empty():
    with pytest.raises(DomainError):
        unwrap_phases([])


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(-1e3, 1e3), min_size=1, max_size=60))
def test_wrap_unwrap_round_trip(xs):
    x = np.array(xs)
    d = wrap_phase(unwrap_phases(x)) - wrap_phase(x)
    # equal modulo 2 pi up to rounding
    assert np.all(np.abs(wrap_phase(d)) < 1e-9)


# the fit itself


@pytest.mark.parametrize("A, B", [(1.0, 0.1), (-3.0, 0.0), (0.0, 2.5), (250.0, -0.4)])
def test_noiseless_recovery_literal(A, B):
    fit = fit_sweep(make_sweep(THETA50, literal(THETA50, A, B)), basis="literal")
    assert fit.A_hat == pytest.approx(A, rel=1e-10, abs=1e-12)
    assert fit.B_hat == pytest.approx(B, rel=1e-10, abs=1e-12)
    assert fit.chi2 < 1e-16


def test_noiseless_recovery_from_simulator():
    cfg = NULL_CFG.replace(shot_noise=False)
    c = CouplingParams(kappa_over_hbar=3.0)
    sweep = run_sweep(cfg, c)
    fit = fit_sweep(sweep)
    assert fit.A_hat == pytest.approx(sweep.A_true, rel=1e-10)
    assert fit.B_hat == pytest.approx(sweep.B_true, rel=1e-10)
    assert consistency_check_A(fit) == pytest.approx(0.0, abs=1e-6)


def test_fit_result_invariants():
    sweep = run_sweep(NULL_CFG)
    fit = fit_sweep(sweep)
    cov = fit.covariance
    assert np.array_equal(cov, cov.T)
    assert np.all(np.linalg.eigvalsh(cov) >= 0)
    assert fit.dof == 48
    assert fit.B_significance == abs(fit.B_hat) / math.sqrt(cov[1, 1])
    fixed = fit_sweep(sweep, fixed_a=fit.A_expected)
    assert fixed.dof == 49 and fixed.mode == "A_fixed"


def test_degenerate_design_at_odd_multiples_of_pi():
    theta = np.array([1, 3, 5, 7]) * np.pi
    with pytest.raises(DegenerateDesignError) as e:
        fit_sweep(make_sweep(theta, np.zeros(4)), basis="literal")
    # sin vanishes there so A is the unidentified direction
    assert abs(abs(e.value.null_direction[0]) - 1) < 1e-6


def test_degenerate_design_at_even_multiples_of_pi():
    theta = np.array([2, 4, 6]) * np.pi
    with pytest.raises(DegenerateDesignError):
        fit_sweep(make_sweep(theta, np.zeros(3)), basis="literal")


def test_minimum_points():
    with pytest.raises(DomainError):
        fit_sweep(make_sweep([1.0, 2.0], [0.0, 0.0]))
    fit = fit_sweep(make_sweep([1.0, 2.0], [0.5, 0.6]), fixed_a=0.0, basis="literal")
    assert fit.dof == 1


def test_sensitivity_number():
    fit = fit_sweep(run_sweep(NULL_CFG))
    assert fit.sigma_B == pytest.approx(1.4e-3, rel=0.3)
    fit = fit_sweep(run_sweep(NULL_CFG), basis="literal")
    assert fit.sigma_B == pytest.approx(1.4e-3, rel=0.3)


@pytest.fixture(scope="module")
def null_replicas():
    reps = simulate_replicas(NULL_CFG, n_replicas=10_000)
    coef, cov, chi2 = fit_replicas(reps.omega, reps.omega_T, reps.measured_phase, reps.phase_sigma[0])
    return reps, coef, cov, chi2


def test_pulls_standard_normal(null_replicas):
    reps, coef, cov, _ = null_replicas
    for k, truth in enumerate((reps.A_true, reps.B_true)):
        pull = (coef[:, k] - truth) / math.sqrt(cov[k, k])
        assert abs(pull.mean()) < 0.05
        assert abs(pull.var() - 1) < 0.1


def test_covariance_matches_replicas(null_replicas):
    _, coef, cov, _ = null_replicas
    emp = np.cov(coef.T)
    assert emp[0, 0] == pytest.approx(cov[0, 0], rel=0.1)
    assert emp[1, 1] == pytest.approx(cov[1, 1], rel=0.1)
    assert emp[0, 1] == pytest.approx(cov[0, 1], abs=0.1 * math.sqrt(cov[0, 0] * cov[1, 1]))


def test_chi2_per_dof_null(null_replicas):
    _, _, _, chi2 = null_replicas
    assert abs(np.mean(chi2 / 48) - 1) < 0.05


def test_sigma_b_scales_inverse_sqrt_n():
    s50 = fit_sweep(run_sweep(NULL_CFG.replace(n_points=50))).sigma_B
    s200 = fit_sweep(run_sweep(NULL_CFG.replace(n_points=200))).sigma_B
    assert s200 / s50 == pytest.approx(0.5, rel=0.1)


def test_reweighting_scales_covariance():
    rng = np.random.default_rng(5)
    y = literal(THETA50, 0.7, 0.2) + 0.01 * rng.standard_normal(50)
    sig = 0.01 * (1 + rng.random(50))
    a = fit_sweep(make_sweep(THETA50, y, sig), basis="literal")
    b = fit_sweep(make_sweep(THETA50, y, 3.0 * sig), basis="literal")
    assert b.A_hat == pytest.approx(a.A_hat, rel=1e-12)
    assert b.B_hat == pytest.approx(a.B_hat, rel=1e-12)
    assert np.allclose(b.covariance, 9.0 * a.covariance, rtol=1e-12, atol=0)


def test_fixed_a_identity():
    sweep = run_sweep(NULL_CFG.replace(seed=3), CouplingParams(kappa_over_hbar=2.0))
    free = fit_sweep(sweep)
    fixed = fit_sweep(sweep, fixed_a=free.A_hat)
    assert fixed.B_hat == pytest.approx(free.B_hat, rel=1e-12, abs=1e-15)


def test_wrapped_sweep_recovers_unwrapped_fit():
    theta = np.linspace(0.2 * np.pi, 10 * np.pi, 80)
    truth = literal(theta, 3.0, 0.8) + 20.0
    rng = np.random.default_rng(1)
    noisy = truth - 20.0 + 0.01 * rng.standard_normal(theta.size)
    direct = fit_sweep(make_sweep(theta, noisy), basis="literal")
    wrapped = fit_sweep(make_sweep(theta, wrap_phase(noisy), wrapped=True), basis="literal")
    assert wrapped.A_hat == pytest.approx(direct.A_hat, rel=1e-9)
    assert wrapped.B_hat == pytest.approx(direct.B_hat, rel=1e-9)


# limits and checks


def _with(fit, **kw):
    return dataclasses.replace(fit, **kw)


@pytest.fixture(scope="module")
def base_fit():
    return fit_sweep(run_sweep(NULL_CFG))


def test_kappa_limit_examples(base_fit):
    cov = np.diag([1e-6, 1.4e-3**2])
    f = _with(base_fit, B_hat=0.0, covariance=cov)
    assert kappa_upper_limit(f, 1.0) == pytest.approx(1.4e-3, rel=1e-12)
    assert kappa_upper_limit(f, 2.0) == pytest.approx(0.7e-3, rel=1e-12)
    f3 = _with(base_fit, B_hat=-3 * 1.4e-3, covariance=cov)
    assert kappa_upper_limit(f3, 1.0) == pytest.approx(4 * 1.4e-3, rel=1e-12)
    assert kappa_upper_limit(f, 1.0, ONE_SIDED_95) == pytest.approx(1.645 * 1.4e-3, rel=1e-12)
    with pytest.raises(DomainError):
        kappa_upper_limit(f, 0.0)


def test_fit_carries_kappa_limit(base_fit):
    assert base_fit.kappa_limit_1sigma == pytest.approx(kappa_upper_limit(base_fit, 1e-3), rel=1e-15)


def test_consistency_not_applicable():
    sweep = run_sweep(NULL_CFG)
    with pytest.raises(NotApplicableError):
        consistency_check_A(fit_sweep(sweep, fixed_a=0.0))
    no_amp = dataclasses.replace(sweep, amp=None)
    with pytest.raises(NotApplicableError):
        consistency_check_A(fit_sweep(no_amp))


def test_consistency_detects_inflated_a():
    reps = simulate_replicas(NULL_CFG, n_replicas=2000)
    X = design_matrix(reps.omega, reps.omega_T)
    _, cov, _ = fit_replicas(reps.omega, reps.omega_T, reps.measured_phase, reps.phase_sigma[0])
    shifted = reps.measured_phase + 5 * math.sqrt(cov[0, 0]) * X[:, 0]
    pulls = np.array([consistency_check_A(fit_sweep(dataclasses.replace(reps.sweep(r, amp=NULL_CFG.amp),
                                                                         measured_phase=shifted[r])))
                      for r in range(200)])
    assert 3 <= np.median(np.abs(pulls)) <= 7
    assert np.mean((np.abs(pulls) >= 3) & (np.abs(pulls) <= 7)) > 0.9


def test_consistency_null_pull(null_replicas):
    reps, coef, cov, _ = null_replicas
    pulls = (coef[:, 0] - reps.A_true) / math.sqrt(cov[0, 0])
    assert abs(pulls.mean()) < 0.05 and abs(pulls.std() - 1) < 0.05
    one = consistency_check_A(fit_sweep(reps.sweep(0, amp=NULL_CFG.amp)))
    assert one == pytest.approx(pulls[0], rel=1e-9)


@pytest.mark.parametrize("A, B, want", [(1.0, 0.0, math.pi), (0.0, 1.0, 2 * math.pi), (1.0, 1.0, 1.5 * math.pi)])
def test_zero_shift_report(base_fit, A, B, want):
    theta, sigma = zero_shift_report(_with(base_fit, A_hat=A, B_hat=B))
    assert theta == pytest.approx(want, abs=1e-9)
    assert sigma >= 0


def test_zero_shift_report_error_propagation(base_fit):
    f = _with(base_fit, A_hat=1.0, B_hat=1.0, covariance=np.diag([1e-4, 0.0]))
    _, sigma = zero_shift_report(f)
    # d theta / dA = -2B / (A^2 + B^2) = -1 at (1, 1)
    assert sigma == pytest.approx(1e-2, rel=1e-6)
    with pytest.raises(DomainError):
        zero_shift_report(_with(base_fit, A_hat=0.0, B_hat=0.0))
