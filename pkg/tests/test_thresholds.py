"""
Tests for critical masses, δ and the degradation criterion
"""
import math

import numpy as np
import pytest
from scipy import optimize

from models.config import Equilibrium, ThresholdModel, VelocityKind
from problem_details import ConfigError, CriterionInapplicable
from services import diagnostics, thresholds
from services.initial_data import build_state
from tests.conftest import small_config


@pytest.mark.parametrize(
    "model,expected",
    [
        (ThresholdModel.BALL_KINETIC, 32.0),
        (ThresholdModel.SPHERE_KINETIC, 8.0),
        (ThresholdModel.PARABOLIC_UNIFORM_F, 16.0),
        (ThresholdModel.PARABOLIC_SPHERE_DELTA, 32.0),
    ],
)
def test_critical_masses(model, expected):
    assert thresholds.critical_mass(model, 1.0, 1.0) == expected


def test_critical_mass_scaling():
    assert thresholds.critical_mass(ThresholdModel.BALL_KINETIC, 2.0, 2.0) == pytest.approx(4.0)
    assert thresholds.critical_mass(ThresholdModel.SPHERE_KINETIC, 2.0, 2.0) == pytest.approx(2.0)
    with pytest.raises(ConfigError):
        thresholds.critical_mass(ThresholdModel.BALL_KINETIC, 0.0, 1.0)


def test_parabolic_threshold_is_half_the_kinetic_one():
    kinetic = thresholds.critical_mass(ThresholdModel.BALL_KINETIC, 1.5, 0.7)
    parabolic = thresholds.critical_mass(ThresholdModel.PARABOLIC_UNIFORM_F, 1.5, 0.7)
    assert parabolic == pytest.approx(0.5 * kinetic, rel=1e-15)


@pytest.mark.parametrize("model", list(ThresholdModel))
def test_delta_vanishes_at_the_critical_mass(model):
    Mc = thresholds.critical_mass(model, 1.0, 1.0)
    assert thresholds.delta(model, Mc, 1.0, 1.0) == 0.0
    root = optimize.brentq(lambda M: thresholds.delta(model, M, 1.0, 1.0), 1.0, 100.0, xtol=1e-12)
    assert root == pytest.approx(Mc, rel=1e-10)
    assert thresholds.delta(model, 0.5 * Mc, 1.0, 1.0) < 0 < thresholds.delta(model, 2.0 * Mc, 1.0, 1.0)


@pytest.mark.parametrize("R", [0.5, 1.0, 2.0])
def test_matched_parabolic_thresholds(R):
    chi0 = 1.3
    chi_tilde = thresholds.chemotactic_coefficient(VelocityKind.BALL, chi0, R)
    sphere = thresholds.parabolic_threshold(thresholds.diffusion_coefficient(Equilibrium.SPHERE_DELTA, R), chi_tilde)
    uniform = thresholds.parabolic_threshold(thresholds.diffusion_coefficient(Equilibrium.UNIFORM_BALL, R), chi_tilde)
    assert sphere == pytest.approx(thresholds.critical_mass(ThresholdModel.BALL_KINETIC, chi0, R), rel=1e-14)
    assert uniform == pytest.approx(thresholds.critical_mass(ThresholdModel.PARABOLIC_UNIFORM_F, chi0, R), rel=1e-14)


def test_sharp_critical_mass():
    assert thresholds.sharp_critical_mass(0.5, 1.0, 1.0) == pytest.approx(16.0)
    assert thresholds.sharp_critical_mass(1.0, 1.0, 1.0) == pytest.approx(32.0)


def test_parabolic_virial_rate_changes_sign_at_threshold():
    D, chi_tilde = 0.25, math.pi / 8.0
    Mc = thresholds.parabolic_threshold(D, chi_tilde)
    assert thresholds.parabolic_virial_rate(Mc, D, chi_tilde) == pytest.approx(0.0, abs=1e-12)
    assert thresholds.parabolic_virial_rate(0.5 * Mc, D, chi_tilde) > 0
    assert thresholds.parabolic_virial_rate(2.0 * Mc, D, chi_tilde) < 0


def test_projected_vanishing_time():
    assert thresholds.projected_vanishing_time(1.0, 0.0, 2.0) == pytest.approx(1.0)
    assert thresholds.projected_vanishing_time(1.0, -2.0, 0.0) == pytest.approx(0.5)
    assert thresholds.projected_vanishing_time(1.0, 1.0, 0.0) is None
    assert thresholds.projected_vanishing_time(1.0, 1.0, -1.0) is None
    assert thresholds.projected_vanishing_time(0.0, 1.0, 1.0) is None


def test_mu0_within_its_bound():
    state = build_state(small_config(mass=40.0))
    K0 = diagnostics.K_functional(diagnostics.rho_of(state))
    report = thresholds.mu0_of(state, K0, 1.0, 1.0)
    assert report.within_bound
    assert report.current_term == pytest.approx(0.0, abs=1e-12)
    assert report.mu0 == pytest.approx(report.K_term)


def test_alpha_criterion_without_degradation():
    verdict = thresholds.alpha_blowup_criterion(1.0, 0.5, 64.0, 1.0, 1.0, 0.0)
    assert verdict.status == "satisfied"
    assert verdict.eta == 0.0
    assert verdict.sharp_margin is None and verdict.simplified_margin is None


def test_alpha_criterion_margins():
    small = thresholds.alpha_blowup_criterion(0.01, 0.0, 64.0, 1.0, 1.0, 1e-6)
    large = thresholds.alpha_blowup_criterion(10.0, 0.0, 64.0, 1.0, 1.0, 10.0)
    assert small.sharp_satisfied and small.simplified_satisfied
    assert not large.sharp_satisfied
    assert large.status == "violated"
    assert small.kernel_constant == pytest.approx(0.5 * math.pi)


def test_simplified_alpha_criterion_implies_the_sharp_one():
    """Random draws with μ0 inside its bound A√(2 I0)"""
    rng = np.random.default_rng(99)
    simplified = 0
    for _ in range(1000):
        chi0, R = rng.uniform(0.5, 2.0, 2)
        M = thresholds.critical_mass(ThresholdModel.BALL_KINETIC, chi0, R) * rng.uniform(1.05, 4.0)
        I0 = 10.0 ** rng.uniform(-3.0, 1.0)
        alpha = 10.0 ** rng.uniform(-12.0, 0.0)
        A = R * math.sqrt(M) + chi0 * M ** 1.5 * R ** 3 / (3.0 * math.pi)
        mu0 = rng.uniform(-1.0, 1.0) * A * math.sqrt(2.0 * I0)
        verdict = thresholds.alpha_blowup_criterion(I0, mu0, M, chi0, R, alpha)
        assert verdict.A == pytest.approx(A)
        if verdict.simplified_satisfied:
            simplified += 1
            assert verdict.sharp_satisfied
    assert 0 < simplified < 1000


def test_alpha_criterion_needs_supercritical_mass():
    with pytest.raises(CriterionInapplicable):
        thresholds.alpha_blowup_criterion(1.0, 0.0, 16.0, 1.0, 1.0, 0.1)


def test_threshold_report():
    report = thresholds.threshold_report(ThresholdModel.BALL_KINETIC, 1.0, 1.0, alpha=0.1, M=64.0, I0=0.5, mu0=1.0)
    assert report.M_critical == 32.0
    assert report.delta == pytest.approx(64.0)
    assert report.alpha_criterion is not None
    plain = thresholds.threshold_report(ThresholdModel.BALL_KINETIC, 1.0, 1.0, M=64.0, I0=0.5, mu0=1.0)
    assert plain.projected_vanishing_time == pytest.approx((1.0 + math.sqrt(1.0 + 64.0)) / 64.0)
    parabolic = thresholds.threshold_report(ThresholdModel.PARABOLIC_UNIFORM_F, 1.0, 1.0)
    assert parabolic.diffusion == pytest.approx(0.25)
    assert parabolic.chemotactic_coefficient == pytest.approx(math.pi / 8.0)
    subcritical = thresholds.threshold_report(ThresholdModel.BALL_KINETIC, 1.0, 1.0, alpha=0.1, M=16.0, I0=0.5, mu0=1.0)
    assert subcritical.alpha_criterion is None
    assert subcritical.notes
