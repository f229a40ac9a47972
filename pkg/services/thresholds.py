"""
Critical masses, the virial constant δ and the blow-up criterion with degradation
"""
from __future__ import annotations

import logging
import math
from typing import List, Optional

from models.config import Equilibrium, ThresholdModel, VelocityKind
from models.responses import AlphaCriterionVerdict, Mu0Report, ThresholdReport
from problem_details import ConfigError, CriterionInapplicable
from services import diagnostics
from services.chemfield import universal_kernel_constant
from services.kinsolver import PhaseState

logger = logging.getLogger(__name__)


def _check(chi0: float, R: float) -> None:
    if not (chi0 > 0 and R > 0):
        raise ConfigError(f"chi0 and R must be positive, got chi0={chi0}, R={R}")


def omega_closed(kind: VelocityKind, R: float) -> float:
    """ω = ∫_V (v·e)₊ dv."""
    return 2.0 * R ** 3 / 3.0 if VelocityKind(kind) == VelocityKind.BALL else 2.0 * R ** 2


def critical_mass(model: ThresholdModel, chi0: float, R: float) -> float:
    _check(chi0, R)
    model = ThresholdModel(model)
    if model == ThresholdModel.BALL_KINETIC:
        return 32.0 / (chi0 * R ** 2)
    if model == ThresholdModel.SPHERE_KINETIC:
        return 8.0 / (chi0 * R)
    if model == ThresholdModel.PARABOLIC_UNIFORM_F:
        return 16.0 / (chi0 * R ** 2)
    return 32.0 / (chi0 * R ** 2)


def _delta_prefactor(model: ThresholdModel, R: float) -> float:
    if model == ThresholdModel.PARABOLIC_UNIFORM_F:
        return 0.5 * R ** 2
    return R ** 2


def delta(model: ThresholdModel, M: float, chi0: float, R: float) -> float:
    """δ = c R² M (M/M_c − 1); zero exactly at M = M_c."""
    model = ThresholdModel(model)
    Mc = critical_mass(model, chi0, R)
    return _delta_prefactor(model, R) * M * (M / Mc - 1.0)


def diffusion_coefficient(equilibrium: Equilibrium, R: float) -> float:
    """D = ½∫|v|²F: R²/4 for the uniform ball, R²/2 for the circle."""
    return 0.25 * R ** 2 if Equilibrium(equilibrium) == Equilibrium.UNIFORM_BALL else 0.5 * R ** 2


def chemotactic_coefficient(kind: VelocityKind, chi0: float, R: float) -> float:
    """χ̃ = χ₀J(e, e); equals χ₀|V|²/(8π) on the ball."""
    if VelocityKind(kind) == VelocityKind.BALL:
        return chi0 * math.pi * R ** 4 / 8.0
    return chi0 * math.pi * R ** 3 / 2.0


def sharp_critical_mass(m2: float, chi0: float, R: float) -> float:
    """Kinetic threshold 32 m₂/(χ₀R⁴) for an equilibrium with ∫|v|²F = m₂."""
    _check(chi0, R)
    return 32.0 * m2 / (chi0 * R ** 4)


def parabolic_threshold(D: float, chi_tilde: float) -> float:
    return 8.0 * math.pi * D / chi_tilde


def parabolic_virial_rate(M: float, D: float, chi_tilde: float) -> float:
    """d/dt ∫|x|²ρ = 4DM − χ̃M²/(2π)."""
    return 4.0 * D * M - chi_tilde * M * M / (2.0 * math.pi)


def projected_vanishing_time(I0: float, slope: float, delta_value: float) -> Optional[float]:
    """First zero of I0 + slope·t − δt²/2, or None when the envelope never reaches zero."""
    if I0 <= 0:
        return None
    if delta_value == 0:
        return I0 / -slope if slope < 0 else None
    if delta_value < 0:
        return None
    return (slope + math.sqrt(slope * slope + 2.0 * delta_value * I0)) / delta_value


# ── α > 0 ─────────────────────────────────────────────────────────────


def mu0_of(state0: PhaseState, K0: float, chi0: float, R: float) -> Mu0Report:
    """μ₀ = dI/dt(0) + χ₀ωK(0) with its a-priori bound."""
    current = diagnostics.current_moment(state0)
    I0 = diagnostics.second_moment(state0)
    M = diagnostics.mass_of(state0)
    om = omega_closed(state0.vset.kind, R)
    K_term = chi0 * om * K0
    root = math.sqrt(2.0 * I0)
    bound = R * math.sqrt(M) * root + chi0 * om * M ** 1.5 * root / (2.0 * math.pi)
    mu0 = current + K_term
    return Mu0Report(mu0=mu0, current_term=current, K_term=K_term, bound=bound, within_bound=mu0 <= bound * (1 + 1e-12))


def alpha_blowup_criterion(
    I0: float,
    mu0: float,
    M: float,
    chi0: float,
    R: float,
    alpha: float,
    kernel_constant: Optional[float] = None,
) -> AlphaCriterionVerdict:
    """Sharp and simplified sufficient conditions for collapse with α > 0 on the ball."""
    d = delta(ThresholdModel.BALL_KINETIC, M, chi0, R)
    if d <= 0:
        raise CriterionInapplicable(
            f"criterion needs supercritical mass, got delta={d:.6g}",
            diagnostics={"delta": d, "M": M},
        )
    C = universal_kernel_constant() if kernel_constant is None else kernel_constant
    eta = math.sqrt(alpha) * chi0 * M ** 1.5 * R ** 4 * C
    A = R * math.sqrt(M) + chi0 * M ** 1.5 * R ** 3 / (3.0 * math.pi)

    if eta == 0:
        sharp_margin = simplified_margin = None
        sharp_ok = simplified_ok = True
    else:
        sharp_margin = d * d / (2.0 * eta * eta) - I0 - math.sqrt(d) * mu0 / eta
        gap = d / (math.sqrt(d + A * A) + A)
        simplified_margin = gap * gap - 2.0 * eta * eta * I0 / d
        sharp_ok = sharp_margin > 0
        simplified_ok = simplified_margin > 0

    return AlphaCriterionVerdict(
        status="satisfied" if sharp_ok else "violated",
        sharp_satisfied=sharp_ok,
        sharp_margin=sharp_margin,
        simplified_satisfied=simplified_ok,
        simplified_margin=simplified_margin,
        eta=eta,
        delta=d,
        A=A,
        mu0=mu0,
        I0=I0,
        kernel_constant=C,
    )


def threshold_report(
    model: ThresholdModel,
    chi0: float,
    R: float,
    alpha: float = 0.0,
    M: Optional[float] = None,
    I0: Optional[float] = None,
    mu0: Optional[float] = None,
) -> ThresholdReport:
    model = ThresholdModel(model)
    Mc = critical_mass(model, chi0, R)
    notes: List[str] = []
    report = ThresholdReport(model=model.value, chi0=chi0, R=R, alpha=alpha, M_critical=Mc)

    if model in (ThresholdModel.PARABOLIC_UNIFORM_F, ThresholdModel.PARABOLIC_SPHERE_DELTA):
        eq = Equilibrium.UNIFORM_BALL if model == ThresholdModel.PARABOLIC_UNIFORM_F else Equilibrium.SPHERE_DELTA
        report.diffusion = diffusion_coefficient(eq, R)
        report.chemotactic_coefficient = chemotactic_coefficient(VelocityKind.BALL, chi0, R)
    if model == ThresholdModel.PARABOLIC_UNIFORM_F:
        notes.append("half of the ball kinetic threshold")

    if M is not None:
        report.mass = M
        report.delta = delta(model, M, chi0, R)
        if I0 is not None and mu0 is not None and model == ThresholdModel.BALL_KINETIC:
            if alpha > 0 and report.delta > 0:
                report.alpha_criterion = alpha_blowup_criterion(I0, mu0, M, chi0, R, alpha)
            elif alpha == 0:
                report.projected_vanishing_time = projected_vanishing_time(I0, mu0, report.delta)
        if report.delta <= 0 and alpha > 0:
            notes.append("subcritical mass: the degradation criterion does not apply")

    report.notes = notes
    return report
