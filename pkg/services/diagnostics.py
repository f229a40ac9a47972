"""
Moments, norms, the virial tracker and the blow-up detector
"""
from __future__ import annotations

import logging
import math
from typing import Dict, List, Optional, Sequence

import numpy as np

from models.config import RunConfig, ThresholdModel, VelocityKind
from models.responses import BlowupVerdict, DiagnosticsRecord, VirialReport, norm_key
from problem_details import InadmissibleExponents
from services import comparison, thresholds
from services.chemfield import RadialDensity, universal_kernel_constant
from services.kinsolver import PhaseState, current_of, rho_of

logger = logging.getLogger(__name__)

VIRIAL_RTOL = 1e-6
CORE_CELLS = 2


def mass_of(state: PhaseState) -> float:
    return rho_of(state).mass


def second_moment(state: PhaseState) -> float:
    """I = ½∬|x|²f = π Σ r³ ρ Δr."""
    rho = rho_of(state)
    return math.pi * float(np.sum(rho.grid.centers ** 2 * rho.cell_masses))


def current_moment(state: PhaseState) -> float:
    """dI/dt = ∬(x·v)f = 2π Σ r² j∥ Δr."""
    j_par, _ = current_of(state)
    r = state.grid.centers
    return 2.0 * math.pi * float(np.sum(r ** 2 * j_par * state.grid.dr))


def _tail(rho: RadialDensity) -> np.ndarray:
    """∫_r^∞ λρ dλ at the centres: all outer cells plus half of the own cell."""
    m = rho.cell_masses
    return np.cumsum(m[::-1])[::-1] - 0.5 * m


def K_functional(rho: RadialDensity, M: Optional[float] = None) -> float:
    """K = M∫₀^∞ T dr − π∫₀^∞ T² dr with T(r) = ∫_r^∞ λρ dλ."""
    M = rho.mass if M is None else M
    T = _tail(rho)
    return rho.grid.dr * float(np.sum(M * T - math.pi * T * T))


def K_functional_half_form(rho: RadialDensity, M: Optional[float] = None) -> float:
    """Same functional written as (M/2)∫T + π∫(M/2π − T)T."""
    M = rho.mass if M is None else M
    T = _tail(rho)
    return rho.grid.dr * float(np.sum(0.5 * M * T + math.pi * (M / (2.0 * math.pi) - T) * T))


def core_fraction(rho: RadialDensity) -> float:
    """Share of the mass in the innermost cells."""
    total = float(np.sum(rho.cell_masses))
    if total <= 0:
        return 0.0
    return float(np.sum(rho.cell_masses[:CORE_CELLS])) / total


def _check_mixed_exponents(p: float, q: float) -> None:
    if not (p > 2.0 and q > 1.0 and 0.0 <= 1.0 / q - 1.0 / p < 0.5):
        raise InadmissibleExponents(f"(p, q) = ({p:g}, {q:g}) outside p > 2, q > 1, 0 <= 1/q - 1/p < 1/2")


def lplq_norm(state: PhaseState, p: float, q: float) -> float:
    """‖f‖_{L^p_x L^q_v}."""
    _check_mixed_exponents(p, q)
    inner = state.vset.integrate(state.g ** q) ** (1.0 / q)
    r = state.grid.centers
    return (2.0 * math.pi * float(np.sum(r * inner ** p * state.grid.dr))) ** (1.0 / p)


def record_of(state: PhaseState, config: RunConfig, supersolution: Optional[comparison.Supersolution] = None) -> DiagnosticsRecord:
    rho = rho_of(state)
    M = rho.mass
    norms = {norm_key(p, q): lplq_norm(state, p, q) for p, q in config.output.monitored_norms}
    excess = float("nan")
    if supersolution is not None:
        excess = comparison.comparison_excess(state.g, state.grid.centers, state.vset, supersolution)
    return DiagnosticsRecord(
        t=state.t,
        mass=M,
        I=second_moment(state),
        dIdt=current_moment(state),
        K=K_functional(rho, M),
        norms=norms,
        excess=excess,
        core_fraction=core_fraction(rho),
    )


# ── Virial inequality ─────────────────────────────────────────────────


def _kinetic_model(kind: VelocityKind) -> ThresholdModel:
    return ThresholdModel.BALL_KINETIC if kind == VelocityKind.BALL else ThresholdModel.SPHERE_KINETIC


def virial_tolerance(first: DiagnosticsRecord, chi0: float, om: float, dr: float) -> float:
    scale = max(abs(first.dIdt), abs(chi0 * om * first.K), 1.0)
    return VIRIAL_RTOL * scale + 10.0 * dr * dr


def virial_tracker(series: Sequence[DiagnosticsRecord], config: RunConfig) -> VirialReport:
    """Check dI/dt(t) ≤ dI/dt(0) + χ₀ωK(0) − δt along a sampled run.

    With α > 0 the bound gains η∫₀^t √I, the cost of the degraded field.
    """
    model = config.model
    first = series[0]
    M = first.mass
    dr = config.grid.r_max / config.grid.Nr
    om = thresholds.omega_closed(model.velocity_set, model.R)
    delta = thresholds.delta(_kinetic_model(model.velocity_set), M, model.chi0, model.R)
    slope0 = first.dIdt + model.chi0 * om * first.K
    tol = virial_tolerance(first, model.chi0, om, dr)

    eta = 0.0
    if model.alpha > 0:
        eta = math.sqrt(model.alpha) * model.chi0 * M ** 1.5 * model.R ** 4 * universal_kernel_constant()

    worst = -math.inf
    first_violation = None
    correction = 0.0
    prev = first
    for rec in series:
        if eta > 0 and rec is not first:
            correction += 0.5 * (math.sqrt(max(prev.I, 0.0)) + math.sqrt(max(rec.I, 0.0))) * (rec.t - prev.t)
        bound = slope0 - delta * (rec.t - first.t) + eta * correction
        excess = rec.dIdt - bound - tol * (1.0 + rec.t)
        worst = max(worst, excess)
        if excess > 0 and first_violation is None:
            first_violation = rec.t
        prev = rec

    projected = thresholds.projected_vanishing_time(first.I, slope0, delta) if eta == 0 else None
    if delta < 0:
        message = "no forced vanishing"
    elif delta == 0:
        message = "bound is constant in t"
    elif projected is not None:
        message = f"second moment forced to vanish by t={projected:.6g}"
    else:
        message = "alpha-corrected envelope; no projected vanishing time"

    if first_violation is not None:
        logger.warning(f"Virial bound violated first at t={first_violation:.6g} (max excess {worst:.3e})")
    return VirialReport(
        holds=first_violation is None,
        envelope="alpha-corrected" if eta > 0 else "affine",
        delta=delta,
        slope0=slope0,
        tolerance=tol,
        max_violation=worst,
        first_violation_time=first_violation,
        projected_vanishing_time=projected,
        message=message,
        samples=len(series),
    )


# ── Blow-up detector ──────────────────────────────────────────────────


def observed_triggers(series: Sequence[DiagnosticsRecord], config: RunConfig) -> List[str]:
    """Reasons seen in the samples themselves; empty while the run looks regular."""
    out = config.output
    first, last = series[0], series[-1]
    reasons: List[str] = []
    for key, value in last.norms.items():
        initial = first.norms.get(key, 0.0)
        if initial > 0 and value > out.growth_factor * initial:
            reasons.append(f"norm {key} grew by {value / initial:.3g}")
    if first.I > 0 and last.I <= out.collapse_fraction * first.I:
        reasons.append(f"second moment fell to {last.I / first.I:.3g} of its initial value")
    if first.core_fraction < out.concentration_fraction <= last.core_fraction:
        reasons.append(f"{last.core_fraction:.0%} of the mass sits in the innermost {CORE_CELLS} cells")
    return reasons


def blowup_detector(
    series: Sequence[DiagnosticsRecord],
    config: RunConfig,
    projected_vanishing_time: Optional[float] = None,
) -> BlowupVerdict:
    """Advisory verdict from norm growth, collapse of I and the virial projection."""
    first = series[0]
    reasons: List[str] = []
    triggered_at = None
    for i in range(1, len(series) + 1):
        found = observed_triggers(series[:i], config)
        if found:
            reasons = found
            triggered_at = series[i - 1].t
            break
    if projected_vanishing_time is not None and projected_vanishing_time <= config.time.t_end:
        reasons.append(f"virial bound forces I to vanish by t={projected_vanishing_time:.6g}")
        if triggered_at is None:
            triggered_at = series[-1].t

    ratios: Dict[str, float] = {}
    for key, value in series[-1].norms.items():
        initial = first.norms.get(key, 0.0)
        ratios[key] = value / initial if initial > 0 else 0.0

    verdict = "blow-up suspected" if reasons else "global-looking"
    logger.info(f"Detector verdict: {verdict} {reasons}")
    return BlowupVerdict(
        verdict=verdict,
        reasons=reasons,
        triggered_at=triggered_at,
        norm_ratios=ratios,
        final_norms=dict(series[-1].norms),
        projected_vanishing_time=projected_vanishing_time,
    )
