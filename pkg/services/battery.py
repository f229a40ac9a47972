"""
verify-lemmas: closed forms and inequalities checked against the brute-force oracles
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Dict, List, Tuple

import numpy as np

from models.config import Equilibrium, ThresholdModel, VelocityKind
from models.responses import BatteryReport, CheckResult
from services import comparison, diagnostics, oracles, thresholds
from services.chemfield import (
    RadialDensity,
    RadialGrid,
    bessel_gradient_closed_form,
    bessel_gradient_kernel,
    elliptic_bound_check,
    poisson_gradient_kernel,
    universal_kernel_constant,
    virial_coupling,
)
from services.velocity import build_velocity_set, directional_first_moment, omega, second_moment_tensor

logger = logging.getLogger(__name__)

REL_TOL = 1e-8


def _rel(a: float, b: float) -> float:
    return abs(a - b) / max(abs(b), 1e-300)


def _unit(angle: float) -> Tuple[float, float]:
    return math.cos(angle), math.sin(angle)


def check_averaged_quantities(rng: np.random.Generator) -> CheckResult:
    worst = 0.0
    for kind in (VelocityKind.BALL, VelocityKind.SPHERE):
        for R in (0.5, 1.0, 2.0):
            vset = build_velocity_set(kind, R, 4, 8)
            for angle in rng.uniform(-math.pi, math.pi, 5):
                e = _unit(angle)
                e_perp = (-e[1], e[0])
                kink = [angle + 0.5 * math.pi, angle - 0.5 * math.pi]
                om = oracles.quadrature_oracle(
                    "velocity-average", integrand=lambda vx, vy: np.maximum(vx * e[0] + vy * e[1], 0.0), kind=kind, R=R, breakpoints=kink
                ).value
                J = oracles.quadrature_oracle(
                    "velocity-average",
                    integrand=lambda vx, vy: (vx * e[0] + vy * e[1]) * np.maximum(vx * e[0] + vy * e[1], 0.0),
                    kind=kind,
                    R=R,
                    breakpoints=kink,
                ).value
                J_perp = oracles.quadrature_oracle(
                    "velocity-average",
                    integrand=lambda vx, vy: (vx * e_perp[0] + vy * e_perp[1]) * np.maximum(vx * e[0] + vy * e[1], 0.0),
                    kind=kind,
                    R=R,
                    breakpoints=kink,
                ).value
                second = oracles.quadrature_oracle("velocity-average", integrand=lambda vx, vy: vx * vx, kind=kind, R=R).value
                worst = max(
                    worst,
                    _rel(omega(vset), om),
                    _rel(directional_first_moment(vset, e, e), J),
                    abs(J_perp) / J,
                    _rel(second_moment_tensor(vset)[0, 0], second),
                )
    return CheckResult(name="averaged-quantities", passed=worst <= REL_TOL, detail={"max_relative_error": worst})


def check_virial_coupling(rng: np.random.Generator) -> CheckResult:
    grid = RadialGrid(n=400, r_max=5.0)
    worst = 0.0
    for M in (1.0, 2.0 * math.pi, 10.0):
        shape = rng.uniform(0.0, 1.0, grid.n) * (grid.centers < 4.0)
        base = RadialDensity(grid=grid, rho=shape)
        rho = RadialDensity(grid=grid, rho=shape * M / base.mass)
        worst = max(worst, _rel(virial_coupling(rho), -M * M / (4.0 * math.pi)))
    return CheckResult(name="virial-coupling", passed=worst <= 1e-12, detail={"max_relative_error": worst})


def check_k_functional(rng: np.random.Generator) -> CheckResult:
    a, M = 1.0, 2.0
    grid = RadialGrid(n=4000, r_max=2.0)
    disk = RadialDensity(grid=grid, rho=np.where(grid.centers < a, M / (math.pi * a * a), 0.0))
    oracle = oracles.quadrature_oracle("k-tail", rho=lambda lam: M / (math.pi * a * a), support=a).value
    closed = M * M * a / (5.0 * math.pi)
    oracle_err = _rel(oracle, closed)
    grid_err = _rel(diagnostics.K_functional(disk, M), closed)
    half_err = _rel(diagnostics.K_functional_half_form(disk, M), diagnostics.K_functional(disk, M))

    violations = 0
    coarse = RadialGrid(n=200, r_max=3.0)
    for _ in range(100):
        rho = RadialDensity(grid=coarse, rho=rng.uniform(0.0, 2.0, coarse.n) * (coarse.centers < 2.5))
        I = math.pi * float(np.sum(coarse.centers ** 2 * rho.cell_masses))
        if diagnostics.K_functional(rho) > rho.mass ** 1.5 * math.sqrt(2.0 * I) / (2.0 * math.pi) * (1 + 1e-12):
            violations += 1
    passed = oracle_err <= REL_TOL and grid_err <= 1e-5 and half_err <= 1e-12 and violations == 0
    return CheckResult(
        name="k-functional",
        passed=passed,
        detail={"oracle_error": oracle_err, "grid_error": grid_err, "half_form_error": half_err, "cauchy_schwarz_violations": violations},
    )


def check_thresholds(_: np.random.Generator) -> CheckResult:
    chi0, R = 1.0, 1.0
    ball = thresholds.critical_mass(ThresholdModel.BALL_KINETIC, chi0, R)
    parabolic = thresholds.critical_mass(ThresholdModel.PARABOLIC_UNIFORM_F, chi0, R)
    matched = thresholds.parabolic_threshold(
        thresholds.diffusion_coefficient(Equilibrium.SPHERE_DELTA, R), thresholds.chemotactic_coefficient(VelocityKind.BALL, chi0, R)
    )
    zero = thresholds.delta(ThresholdModel.BALL_KINETIC, ball, chi0, R)
    # second velocity moments of the circle and of the uniform ball
    sharp = (thresholds.sharp_critical_mass(R * R, chi0, R), thresholds.sharp_critical_mass(0.5 * R * R, chi0, R))
    passed = (
        ball == 32.0
        and parabolic == 0.5 * ball
        and _rel(matched, ball) <= 1e-14
        and zero == 0.0
        and sharp == (ball, parabolic)
    )
    return CheckResult(
        name="thresholds",
        passed=passed,
        detail={"ball": ball, "parabolic": parabolic, "matched_sphere_delta": matched, "sharp": list(sharp), "delta_at_critical": zero},
    )


def check_gamma_star(_: np.random.Generator) -> CheckResult:
    report = comparison.gamma_star()
    return CheckResult(name="gamma-star", passed=abs(report.value - 0.806) <= 0.01, detail=report.model_dump())


def check_omega_gamma(_: np.random.Generator) -> CheckResult:
    worst = 0.0
    ladder = []
    for g in (0.1, 0.25, 0.5, 0.75, 0.9):
        closed = comparison.omega_gamma_closed_form(g)
        worst = max(worst, _rel(comparison.omega_gamma(g), closed), _rel(oracles.quadrature_oracle("omega-integrand", gamma=g).value, closed))
        ladder.append(closed)
    monotone = all(b > a for a, b in zip(ladder, ladder[1:]))
    return CheckResult(name="omega-gamma", passed=worst <= REL_TOL and monotone, detail={"max_relative_error": worst, "monotone": monotone})


def check_kernel(_: np.random.Generator) -> CheckResult:
    C = universal_kernel_constant()
    oracle = oracles.quadrature_oracle("kernel-constant").value
    worst_closed = 0.0
    worst_ratio = 0.0
    for alpha in (0.01, 0.1, 1.0):
        for z in np.geomspace(0.05, 5.0, 100):
            value = bessel_gradient_kernel(float(z), alpha)
            worst_closed = max(worst_closed, _rel(value, float(bessel_gradient_closed_form(z, alpha))))
            gap = abs(float(poisson_gradient_kernel(z)) - value)
            worst_ratio = max(worst_ratio, gap / (math.sqrt(alpha) * 0.5 * math.pi))
    bound_ok = worst_ratio <= 1.0 + 1e-6
    passed = abs(C - 0.5 * math.pi) <= 1e-10 and abs(oracle - 0.5 * math.pi) <= 1e-6 and worst_closed <= 1e-6 and bound_ok
    return CheckResult(
        name="kernel-constant",
        passed=passed,
        detail={"constant": C, "oracle": oracle, "closed_form_error": worst_closed, "bound_ratio": worst_ratio, "bound_holds": bound_ok},
    )


def check_supersolution(_: np.random.Generator) -> CheckResult:
    vset = build_velocity_set(VelocityKind.BALL, 1.0, 4, 16)
    s = comparison.Supersolution(k0=1.0, gamma=0.5)
    bound = comparison.small_mass_bound(s, 1.0, vset)
    at_bound = comparison.supersolution_check(s, bound, 1.0, vset)
    above = comparison.supersolution_check(s, 2.0 * bound, 1.0, vset)
    admissible, _ = comparison.admissible_for_comparison(3.0, 1.5, s.gamma)
    streaming = comparison.free_streaming_constant(s, vset, 1.5, [0.0, 0.5, 1.0, 2.0])
    at_unit = comparison.k_velocity_lq_norm(1.0, s, vset, 1.5)
    passed = at_bound.passed and not above.passed and admissible and all(math.isfinite(c) for c in streaming.values())
    return CheckResult(
        name="supersolution",
        passed=passed,
        detail={
            "mass_bound": bound,
            "at_bound_max_violation": at_bound.max_violation,
            "doubled_violations": above.violating_samples,
            "free_streaming_constant": max(streaming.values()),
            "lq_norm_at_unit_radius": at_unit,
        },
    )


def check_elliptic(_: np.random.Generator) -> CheckResult:
    grid = RadialGrid(n=400, r_max=5.0)
    rho = RadialDensity(grid=grid, rho=np.exp(-0.5 * (grid.centers / 0.5) ** 2))
    reports = [elliptic_bound_check(rho, p) for p in (3.0, 4.0, 8.0)]
    passed = all(r.radial_bound_holds and r.l2_bound_holds for r in reports)
    return CheckResult(name="elliptic-bounds", passed=passed, detail={"ratios": [r.sup_gradient / r.norm_product for r in reports]})


def check_dispersion(_: np.random.Generator) -> CheckResult:
    vset = build_velocity_set(VelocityKind.BALL, 1.0, 40, 160)
    times = [0.5, 1.0, 2.0, 4.0]
    pairs = [(3.0, 1.5), (4.0, 2.0)]
    data = {
        "gaussian-uniform": oracles.gaussian_profile(0.2, velocity="uniform"),
        "gaussian-bump": oracles.gaussian_profile(0.2, velocity="bump"),
        "offset-gaussian-bump": oracles.gaussian_profile(0.2, center=(0.5, 0.0), velocity="bump"),
    }
    holds: Dict[str, bool] = {}
    exponent = None
    for name, profile in data.items():
        f0 = oracles.cartesian_from_profile(profile, 6.0, 150, vset, materialize=False)
        reports = oracles.dispersion_matrix(f0, pairs, times)
        holds[name] = all(r.holds for r in reports)
        if name == "gaussian-bump":
            exponent = reports[0].decay_exponent
    decay_ok = exponent is not None and exponent >= 0.95 * (2.0 / 3.0)
    return CheckResult(name="dispersion", passed=all(holds.values()) and decay_ok, detail={"holds": holds, "decay_exponent": exponent})


def check_rotation(_: np.random.Generator) -> CheckResult:
    vset = build_velocity_set(VelocityKind.BALL, 1.0, 4, 16)
    profile = oracles.gaussian_profile(0.5, center=(0.3, -0.2), velocity="bump")
    state = oracles.cartesian_from_profile(profile, 2.4, 32, vset)
    dt = oracles.cartesian_time_step(state)
    a = oracles.cartesian_step(oracles.rotate_quarter(state), 1.0, dt).f
    b = oracles.rotate_quarter(oracles.cartesian_step(state, 1.0, dt)).f
    err = float(np.max(np.abs(a - b))) / float(np.max(np.abs(b)))
    return CheckResult(name="rotation-equivariance", passed=err <= 1e-10, detail={"max_relative_difference": err})


CHECKS: List[Callable[[np.random.Generator], CheckResult]] = [
    check_averaged_quantities,
    check_virial_coupling,
    check_k_functional,
    check_thresholds,
    check_gamma_star,
    check_omega_gamma,
    check_kernel,
    check_supersolution,
    check_elliptic,
    check_dispersion,
    check_rotation,
]


def run_battery(seed: int = 0, threads: int = 1) -> BatteryReport:
    """Run every check with its own generator spawned from the seed; order is fixed."""
    streams = np.random.SeedSequence(seed).spawn(len(CHECKS))

    def one(item) -> CheckResult:
        check, stream = item
        result = check(np.random.default_rng(stream))
        level = logging.INFO if result.passed else logging.ERROR
        logger.log(level, f"check {result.name}: {'passed' if result.passed else 'FAILED'}")
        return result

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        results = list(pool.map(one, zip(CHECKS, streams)))
    return BatteryReport(passed=all(r.passed for r in results), seed=seed, checks=results)
