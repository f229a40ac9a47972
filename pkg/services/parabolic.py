"""
ε-scaled kinetic model and its drift-diffusion limit
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Sequence, Tuple, Union

import numpy as np

from models.config import Equilibrium, RunConfig, ScaledConfig, VelocityKind
from models.responses import LimitStudyReport, ParabolicComparisonReport
from problem_details import CFLViolation, ConfigError
from services import diagnostics, thresholds
from services.chemfield import RadialDensity, RadialGrid, solve_field
from services.initial_data import build_grids, radial_profile
from services.kinsolver import PhaseState, collision_step, limited_slopes, reduced_transport_step, rho_of, stable_dt
from services.velocity import VelocitySet

logger = logging.getLogger(__name__)

RELAXATION_DT_FACTOR = 0.5
DIFFUSION_CFL = 0.4
DRIFT_CFL = 0.1


def equilibrium_density(equilibrium: Equilibrium, vset: VelocitySet) -> np.ndarray:
    """Node values of F with Σ W F = 1."""
    equilibrium = Equilibrium(equilibrium)
    needed = VelocityKind.BALL if equilibrium == Equilibrium.UNIFORM_BALL else VelocityKind.SPHERE
    if vset.kind != needed:
        raise ConfigError(f"{equilibrium.value} equilibrium needs the {needed.value} velocity set")
    F = np.ones_like(vset.weights)
    return F / float(np.sum(F * vset.weights))


def effective_diffusion(F: Union[Equilibrium, np.ndarray], vset: VelocitySet) -> np.ndarray:
    """D = ∫ v⊗v F dv as a 2×2 tensor."""
    values = equilibrium_density(F, vset) if isinstance(F, (Equilibrium, str)) else np.asarray(F, dtype=float)
    if values.shape != vset.weights.shape:
        raise ConfigError(f"F has shape {values.shape}, velocity nodes need {vset.weights.shape}")
    if np.any(values < 0):
        raise ConfigError("F must be nonnegative")
    if not math.isclose(float(np.sum(values * vset.weights)), 1.0, rel_tol=1e-10):
        raise ConfigError("F must have unit velocity integral")
    if not np.allclose(values, values[:, :1], rtol=1e-12, atol=0.0):
        raise ConfigError("non-symmetric F: the limit is derived for rotationally invariant equilibria")
    vx, vy = vset.components()
    xy = float(np.sum(vx * vy * values * vset.weights))
    return np.array(
        [
            [float(np.sum(vx * vx * values * vset.weights)), xy],
            [xy, float(np.sum(vy * vy * values * vset.weights))],
        ]
    )


def scalar_diffusion(equilibrium: Equilibrium, vset: VelocitySet) -> float:
    return 0.5 * float(np.trace(effective_diffusion(equilibrium, vset)))


# ── Scaled kinetic step ───────────────────────────────────────────────


def scaled_time_step(state: PhaseState, config: ScaledConfig) -> float:
    eps = config.epsilon
    bound = stable_dt(state.grid, state.vset, config.base.time.cfl, speed_scale=1.0 / eps)
    if config.relaxation_weight > 0:
        bound = min(bound, RELAXATION_DT_FACTOR * eps * eps)
    return bound


def scaled_kinetic_step(state: PhaseState, config: ScaledConfig, dt: float) -> PhaseState:
    """Strang step of ε∂t f + v·∇f = (κ/ε)(ρF − f) + χ₀T[S](f) in the time scale t/ε."""
    eps = config.epsilon
    base = config.base
    bound = scaled_time_step(state, config)
    if dt > bound * (1.0 + 1e-12):
        raise CFLViolation(
            f"dt={dt:.6g} exceeds the scaled bound {bound:.6g} at epsilon={eps:g}",
            diagnostics={"dt": dt, "bound": bound, "epsilon": eps},
        )
    F = equilibrium_density(config.equilibrium, state.vset)
    speed = 1.0 / eps
    cfl = base.time.cfl
    half = reduced_transport_step(state, 0.5 * dt, cfl=cfl, scheme=base.grid.scheme, speed_scale=speed)
    field = solve_field(rho_of(half), base.model.alpha)
    turned = collision_step(
        half,
        field,
        dt,
        base.model.chi0 / eps,
        relaxation_rate=config.relaxation_weight / (eps * eps),
        equilibrium=F,
    )
    out = reduced_transport_step(turned, 0.5 * dt, cfl=cfl, scheme=base.grid.scheme, speed_scale=speed)
    return out.evolve(t=state.t + dt)


def run_scaled(state: PhaseState, config: ScaledConfig, t_end: float, samples: int = 10) -> Tuple[PhaseState, List[float]]:
    """Advance to t_end; returns the final state and I sampled at `samples` even times."""
    dt = scaled_time_step(state, config)
    marks = [t_end * (k + 1) / samples for k in range(samples)]
    moments: List[float] = []
    while state.t < t_end * (1.0 - 1e-14):
        h = min(dt, t_end - state.t)
        state = scaled_kinetic_step(state, config, h)
        while marks and state.t >= marks[0] * (1.0 - 1e-12):
            moments.append(diagnostics.second_moment(state))
            marks.pop(0)
    return state, moments


# ── Parabolic solver ──────────────────────────────────────────────────


@dataclass(frozen=True)
class ParabolicModel:
    """∂tρ = DΔρ − ∇·(χ̃ρ∇S) with −ΔS + αS = ρ."""

    D: float
    chi_tilde: float
    alpha: float = 0.0

    @classmethod
    def for_equilibrium(cls, equilibrium: Equilibrium, chi0: float, R: float, alpha: float = 0.0) -> "ParabolicModel":
        kind = VelocityKind.BALL if Equilibrium(equilibrium) == Equilibrium.UNIFORM_BALL else VelocityKind.SPHERE
        return cls(
            D=thresholds.diffusion_coefficient(equilibrium, R),
            chi_tilde=thresholds.chemotactic_coefficient(kind, chi0, R),
            alpha=alpha,
        )

    @property
    def threshold(self) -> float:
        return thresholds.parabolic_threshold(self.D, self.chi_tilde)


def _edge_gradient(rho: RadialDensity, alpha: float) -> np.ndarray:
    """S′ at the interior edges."""
    r_e = rho.grid.edges[1:-1]
    if alpha > 0:
        centers = solve_field(rho, alpha).Sprime
        return 0.5 * (centers[:-1] + centers[1:])
    return -np.cumsum(rho.cell_masses)[:-1] / r_e


def parabolic_time_step(rho: RadialDensity, model: ParabolicModel) -> float:
    dr = rho.grid.dr
    dt = DIFFUSION_CFL * 0.5 * dr * dr / model.D if model.D > 0 else math.inf
    drift = np.abs(model.chi_tilde * _edge_gradient(rho, model.alpha))
    peak = float(drift.max(initial=0.0))
    if peak > 0:
        dt = min(dt, DRIFT_CFL * dr / peak)
    if not math.isfinite(dt):
        raise ConfigError("parabolic model has neither diffusion nor drift")
    return dt


def parabolic_step(rho: RadialDensity, dt: float, model: ParabolicModel) -> RadialDensity:
    """Conservative finite volumes; the outer ghost density is zero."""
    grid = rho.grid
    dr = grid.dr
    if model.D > 0 and dt > DIFFUSION_CFL * dr * dr / model.D * (1.0 + 1e-12):
        raise CFLViolation(
            f"dt={dt:.6g} exceeds the diffusion bound {DIFFUSION_CFL * dr * dr / model.D:.6g}",
            diagnostics={"dt": dt, "D": model.D, "dr": dr},
        )
    r = grid.centers
    r_e = grid.edges
    values = rho.rho

    padded = np.append(values, 0.0)
    flux = np.zeros(grid.n + 1)
    flux[1:] = -r_e[1:] * model.D * np.diff(padded) / dr

    u = model.chi_tilde * _edge_gradient(rho, model.alpha)
    slopes = limited_slopes(values)
    right_face = values + 0.5 * slopes
    left_face = values - 0.5 * slopes
    face = np.where(u > 0.0, right_face[:-1], left_face[1:])
    flux[1:-1] += r_e[1:-1] * u * face

    new = values - dt * np.diff(flux) / (r * dr)
    np.maximum(new, 0.0, out=new)
    return RadialDensity(grid=grid, rho=new)


def run_parabolic(rho: RadialDensity, model: ParabolicModel, t_end: float) -> RadialDensity:
    t = 0.0
    while t < t_end * (1.0 - 1e-14):
        dt = min(parabolic_time_step(rho, model), t_end - t)
        rho = parabolic_step(rho, dt, model)
        t += dt
    return rho


def l1_distance(a: RadialDensity, b: RadialDensity) -> float:
    """2π Σ r |ρ_a − ρ_b| Δr."""
    r = a.grid.centers
    return 2.0 * math.pi * float(np.sum(r * np.abs(a.rho - b.rho) * a.grid.dr))


def full_second_moment(rho: RadialDensity) -> float:
    """∫|x|²ρ dx."""
    return 2.0 * math.pi * float(np.sum(rho.grid.centers ** 2 * rho.cell_masses))


# ── Studies ───────────────────────────────────────────────────────────


def _initial_rho(base: RunConfig) -> Tuple[RadialDensity, VelocitySet]:
    grid, vset = build_grids(base)
    return RadialDensity(grid=grid, rho=radial_profile(base.initial, grid)), vset


def limit_study(
    base: RunConfig,
    epsilons: Sequence[float],
    equilibrium: Equilibrium = Equilibrium.UNIFORM_BALL,
    threads: int = 1,
    relaxation_weight: float = 1.0,
) -> LimitStudyReport:
    """L¹ distance between ρ_ε(t_end) and the drift-diffusion solution for each ε."""
    rho0, vset = _initial_rho(base)
    t_end = base.time.t_end
    model = ParabolicModel.for_equilibrium(equilibrium, base.model.chi0, base.model.R, base.model.alpha)
    reference = run_parabolic(rho0, model, t_end)
    logger.info(f"Parabolic reference: mass {reference.mass:.6f} at t={t_end:g}")

    F = equilibrium_density(equilibrium, vset)
    ordered = sorted((float(e) for e in epsilons), reverse=True)

    def one(eps: float) -> Tuple[float, List[float]]:
        config = ScaledConfig(epsilon=eps, equilibrium=equilibrium, relaxation_weight=relaxation_weight, base=base)
        state0 = PhaseState(t=0.0, grid=rho0.grid, vset=vset, g=rho0.rho[:, None, None] * F[None, :, :])
        final, moments = run_scaled(state0, config, t_end)
        error = l1_distance(rho_of(final), reference)
        logger.info(f"epsilon={eps:g}: L1 error {error:.4e}")
        return error, moments

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        results = list(pool.map(one, ordered))

    errors = [e for e, _ in results]
    monotone = all(b <= a for a, b in zip(errors, errors[1:]))
    halved = errors[-1] < 0.5 * errors[0] if len(errors) > 1 else None
    return LimitStudyReport(
        t_end=t_end,
        epsilons=ordered,
        errors=errors,
        monotone=monotone,
        halved=halved,
        second_moments={f"{eps:g}": m for eps, (_, m) in zip(ordered, results)},
        parabolic_mass=reference.mass,
    )


def compare_parabolic(
    mass: float,
    chi0: float = 1.0,
    R: float = 1.0,
    equilibrium: Equilibrium = Equilibrium.UNIFORM_BALL,
    sigma: float = 0.5,
    Nr: int = 256,
    r_max: float = 4.0,
    steps: int = 20,
) -> ParabolicComparisonReport:
    """Sign of d/dt∫|x|²ρ against the closed form 4DM − χ̃M²/(2π)."""
    model = ParabolicModel.for_equilibrium(equilibrium, chi0, R)
    grid = RadialGrid(n=Nr, r_max=r_max)
    shape = np.exp(-0.5 * (grid.centers / sigma) ** 2)
    rho = RadialDensity(grid=grid, rho=shape * mass / RadialDensity(grid=grid, rho=shape).mass)

    before = full_second_moment(rho)
    elapsed = 0.0
    for _ in range(steps):
        dt = parabolic_time_step(rho, model)
        rho = parabolic_step(rho, dt, model)
        elapsed += dt
    measured = (full_second_moment(rho) - before) / elapsed

    exact = thresholds.parabolic_virial_rate(mass, model.D, model.chi_tilde)
    if exact < 0:
        behaviour = "collapse"
    elif exact > 0:
        behaviour = "spreading"
    else:
        behaviour = "balanced"
    return ParabolicComparisonReport(
        mass=mass,
        threshold=model.threshold,
        diffusion=model.D,
        chemotactic_coefficient=model.chi_tilde,
        exact_rate=exact,
        measured_rate=measured,
        behaviour=behaviour,
    )
