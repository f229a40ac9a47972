"""
Tests for the comparison function and the small-mass supersolution
"""
import math

import numpy as np
import pytest

from models.config import ComparisonDominatedInitial, GridParams
from problem_details import ConfigError, InadmissibleExponents, SingularityError, UnsupportedVelocitySet
from services import comparison
from services.initial_data import build_state, supersolution_of
from services.velocity import build_velocity_set
from tests.conftest import small_config

BALL = build_velocity_set("ball", 1.0, 4, 16)


@pytest.mark.parametrize("gamma", [0.1, 0.3, 0.5, 0.7, 0.9])
def test_omega_gamma_matches_closed_form(gamma):
    assert comparison.omega_gamma(gamma) == pytest.approx(comparison.omega_gamma_closed_form(gamma), rel=1e-10)


def test_omega_gamma_at_one_half():
    assert comparison.omega_gamma_closed_form(0.5) == pytest.approx(2.66925, abs=1e-4)


@pytest.mark.parametrize("gamma", [0.0, 1.0, -0.2, 1.5])
def test_gamma_outside_unit_interval(gamma):
    with pytest.raises(ConfigError):
        comparison.omega_gamma(gamma)
    with pytest.raises(ConfigError):
        comparison.Supersolution(k0=1.0, gamma=gamma)


def test_gamma_star():
    report = comparison.gamma_star()
    assert report.gamma_star == pytest.approx(0.639, abs=5e-3)
    assert report.value == pytest.approx(0.806, abs=5e-3)
    assert report.value == pytest.approx(4.0 * report.objective)
    # the objective is maximal at gamma*
    for g in (0.6, 0.7, 0.9, 0.95):
        assert comparison.gamma_objective(g) <= report.objective + 1e-12


def test_k_branches():
    s = comparison.Supersolution(k0=2.0, gamma=0.5)
    # behind: x·v ≤ 0
    assert comparison.k_eval((4.0, 0.0), (-1.0, 0.0), s) == pytest.approx(1.0)
    # ahead: distance from x to the line through v is 4
    assert comparison.k_eval((3.0, 4.0), (1.0, 0.0), s) == pytest.approx(1.0)
    assert float(comparison.k_radial(4.0, math.pi, s)) == pytest.approx(1.0)
    assert float(comparison.k_radial(4.0, 0.5 * math.pi, s)) == pytest.approx(1.0)


@pytest.mark.parametrize("x,v", [((0.0, 0.0), (1.0, 0.0)), ((1.0, 0.0), (0.0, 0.0)), ((1.0, 0.0), (2.0, 0.0))])
def test_k_singularities(x, v):
    with pytest.raises(SingularityError):
        comparison.k_eval(x, v, comparison.Supersolution(k0=1.0, gamma=0.5))


def test_supersolution_at_and_above_the_mass_bound():
    s = comparison.Supersolution(k0=1.0, gamma=0.5)
    bound = comparison.small_mass_bound(s, 1.0, BALL)
    assert bound == pytest.approx(4.0 * math.pi * 0.5 / (math.pi * comparison.omega_gamma(0.5)))
    at_bound = comparison.supersolution_check(s, bound, 1.0, BALL)
    assert at_bound.passed and at_bound.mass_condition_met
    above = comparison.supersolution_check(s, 2.0 * bound, 1.0, BALL)
    assert not above.passed
    assert above.violating_samples > 0


def test_velocity_integral_matches_nodes():
    s = comparison.Supersolution(k0=1.0, gamma=0.3)
    vset = build_velocity_set("ball", 1.0, 4, 512)
    k = comparison.k_radial(0.7, vset.angles, s)
    nodes = float(np.sum(k[None, :] * vset.weights))
    assert nodes == pytest.approx(comparison.k_velocity_integral(0.7, s, vset), rel=1e-2)


def test_sphere_is_not_supported():
    sphere = build_velocity_set("sphere", 1.0, 1, 16)
    s = comparison.Supersolution(k0=1.0, gamma=0.5)
    with pytest.raises(UnsupportedVelocitySet):
        comparison.small_mass_bound(s, 1.0, sphere)
    with pytest.raises(UnsupportedVelocitySet):
        comparison.k_velocity_integral(1.0, s, sphere)


def test_comparison_dominated_data():
    cfg = small_config(
        grid=GridParams(Nr=64, Nw=4, Nphi=32, r_max=3.0),
        initial=ComparisonDominatedInitial(gamma=0.5, k0=1.0, r_supp=1.0, cap=10.0),
    )
    state = build_state(cfg)
    s = supersolution_of(cfg)
    bound = comparison.small_mass_bound(s, cfg.model.chi0, state.vset)
    assert state.mass() == pytest.approx(bound, rel=1e-12)
    assert comparison.comparison_excess(state.g, state.grid.centers, state.vset, s) == 0.0


def test_comparison_dominated_target_too_large():
    cfg = small_config(initial=ComparisonDominatedInitial(gamma=0.5, k0=1.0, r_supp=0.2, cap=1.0, mass=5.0))
    with pytest.raises(ConfigError):
        build_state(cfg)


def test_admissibility_for_comparison():
    assert comparison.admissible_for_comparison(3.0, 1.5, 0.5) == (True, "admissible")
    assert not comparison.admissible_for_comparison(3.0, 1.5, 0.7)[0]
    assert not comparison.admissible_for_comparison(2.0, 1.5, 0.1)[0]
    # q'/p' = 1 fails the exponent balance
    assert not comparison.admissible_for_comparison(3.0, 3.0, 0.3)[0]


def test_free_streaming_constant_is_finite():
    s = comparison.Supersolution(k0=1.0, gamma=0.5)
    out = comparison.free_streaming_constant(s, BALL, 1.5, [0.0, 0.5, 1.0])
    assert set(out) == {0.0, 0.5, 1.0}
    assert all(np.isfinite(v) and v > 0 for v in out.values())
    with pytest.raises(InadmissibleExponents):
        comparison.free_streaming_constant(s, BALL, 2.5, [0.0])


def test_k_is_bounded_below_by_the_behind_branch():
    """k(x, v) ≥ k0|x|^−γ on 10⁴ random points"""
    rng = np.random.default_rng(2024)
    s = comparison.Supersolution(k0=0.7, gamma=0.639)
    xs = rng.uniform(-5.0, 5.0, (10_000, 2))
    vs = rng.normal(size=(10_000, 2))
    for x, v in zip(xs, vs):
        floor = s.k0 * math.hypot(x[0], x[1]) ** -s.gamma
        assert comparison.k_eval(x, v, s) >= floor * (1.0 - 1e-12)
