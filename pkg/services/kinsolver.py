"""
Reduced radially symmetric kinetic solver on the (r, w, φ) phase-space grid.
Transport by conservative finite volumes, turning by the exact Duhamel update, Strang composition.
"""
from __future__ import annotations

import dataclasses
import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from models.config import RunConfig, TransportScheme
from problem_details import CFLViolation, ConfigError, NumericalError
from services.chemfield import ChemField, RadialDensity, RadialGrid, solve_field
from services.velocity import VelocitySet

logger = logging.getLogger(__name__)


@dataclass(eq=False)
class PhaseState:
    """g(r, w, φ) with φ the angle from x to v; mass element 2π r Δr · velocity weight."""

    t: float
    grid: RadialGrid
    vset: VelocitySet
    g: np.ndarray
    outflow: float = 0.0

    def __post_init__(self) -> None:
        expected = (self.grid.n, self.vset.n_speeds, self.vset.n_angles)
        if self.g.shape != expected:
            raise ConfigError(f"phase density has shape {self.g.shape}, grids need {expected}")

    @property
    def r_centers(self) -> np.ndarray:
        return self.grid.centers

    @property
    def w_nodes(self) -> np.ndarray:
        return self.vset.speeds

    @property
    def phi_nodes(self) -> np.ndarray:
        return self.vset.angles

    def cell_measure(self) -> np.ndarray:
        r = self.grid.centers
        return (2.0 * math.pi * r * self.grid.dr)[:, None, None] * self.vset.weights[None, :, :]

    def mass(self) -> float:
        return float(np.sum(self.g * self.cell_measure()))

    def evolve(self, **changes) -> "PhaseState":
        return dataclasses.replace(self, **changes)


def zero_state(grid: RadialGrid, vset: VelocitySet, t: float = 0.0) -> PhaseState:
    return PhaseState(t=t, grid=grid, vset=vset, g=np.zeros((grid.n, vset.n_speeds, vset.n_angles)))


def rho_of(state: PhaseState) -> RadialDensity:
    """ρ(r) = Σ g · velocity weight."""
    return RadialDensity(grid=state.grid, rho=state.vset.integrate(state.g))


def current_of(state: PhaseState) -> Tuple[np.ndarray, np.ndarray]:
    """(j∥, j⊥) with j = j∥ x/|x| + j⊥ x⊥/|x|."""
    vx, vy = state.vset.components()
    return state.vset.integrate(state.g * vx), state.vset.integrate(state.g * vy)


# ── Transport ─────────────────────────────────────────────────────────


def stable_dt(grid: RadialGrid, vset: VelocitySet, cfl: float, speed_scale: float = 1.0) -> float:
    """cfl · min(Δr/R, r_min Δφ/R) for speeds scaled by speed_scale."""
    speed = vset.R * speed_scale
    r_min = grid.centers[0]
    return cfl * min(grid.dr / speed, r_min * vset.dphi / speed)


def limited_slopes(values: np.ndarray) -> np.ndarray:
    """Minmod cell increments along axis 0; zero in the two end cells."""
    slopes = np.zeros_like(values)
    back = values[1:-1] - values[:-2]
    fwd = values[2:] - values[1:-1]
    slopes[1:-1] = np.where(back * fwd > 0.0, np.sign(back) * np.minimum(np.abs(back), np.abs(fwd)), 0.0)
    return slopes


def _angle_geometry(vset: VelocitySet) -> Tuple[np.ndarray, np.ndarray]:
    """Cell-averaged cos φ and sin φ at the left cell edges."""
    n = vset.n_angles
    sin_edges = np.sin(vset.angle_edges)
    sin_edges[[0, n // 2, n]] = 0.0
    cos_mean = np.diff(sin_edges) / vset.dphi
    return cos_mean, sin_edges[:-1]


def _transport(state: PhaseState, dt: float, scheme: TransportScheme, speed_scale: float) -> PhaseState:
    grid, vset, g = state.grid, state.vset, state.g
    r = grid.centers
    r_edges = grid.edges
    cos_mean, sin_left = _angle_geometry(vset)
    w = speed_scale * vset.speeds

    # radial fluxes r_e · w cos φ · g_face; the r = 0 edge carries none, the
    # angular term below carries inward mass to π − φ as it passes the centre
    radial_speed = w[:, None] * cos_mean[None, :]
    outgoing = radial_speed > 0.0
    if scheme == TransportScheme.MUSCL:
        slopes = limited_slopes(g)
        right_face = g + 0.5 * slopes
        left_face = g - 0.5 * slopes
    else:
        right_face = left_face = g
    flux = np.zeros((grid.n + 1,) + radial_speed.shape)
    flux[1:-1] = r_edges[1:-1, None, None] * radial_speed * np.where(outgoing, right_face[:-1], left_face[1:])
    flux[-1] = r_edges[-1] * np.maximum(radial_speed, 0.0) * right_face[-1]

    # angular fluxes −w sin φ_e · g_upwind through the left edge of each cell, periodic
    angular_speed = -w[:, None] * sin_left[None, :]
    upstream = np.where(angular_speed > 0.0, np.roll(g, 1, axis=2), g)
    ang_flux = angular_speed[None, :, :] * upstream

    div = (flux[1:] - flux[:-1]) / (r * grid.dr)[:, None, None]
    div += (np.roll(ang_flux, -1, axis=2) - ang_flux) / (r * vset.dphi)[:, None, None]
    g_new = g - dt * div
    np.maximum(g_new, 0.0, out=g_new)  # round-off only; the CFL bound keeps the update monotone

    out_mass = 2.0 * math.pi * dt * float(np.sum(flux[-1] * vset.weights))
    return state.evolve(g=g_new, outflow=state.outflow + out_mass)


def reduced_transport_step(
    state: PhaseState,
    dt: float,
    *,
    cfl: float = 1.0,
    scheme: TransportScheme = TransportScheme.UPWIND,
    speed_scale: float = 1.0,
) -> PhaseState:
    """Advance ∂t g + w cosφ ∂r g − (w sinφ/r) ∂φ g = 0 by dt (time stamp unchanged)."""
    bound = stable_dt(state.grid, state.vset, cfl, speed_scale)
    if dt > bound * (1.0 + 1e-12):
        raise CFLViolation(
            f"dt={dt:.6g} exceeds the transport bound {bound:.6g}",
            diagnostics={"dt": dt, "bound": bound, "cfl": cfl},
        )
    return _transport(state, dt, scheme, speed_scale)


# ── Turning ───────────────────────────────────────────────────────────


def collision_step(
    state: PhaseState,
    field: ChemField,
    dt: float,
    chi0: float,
    *,
    relaxation_rate: float = 0.0,
    equilibrium: Optional[np.ndarray] = None,
) -> PhaseState:
    """Exact solution over dt of ∂t f = χ₀(v·∇S)₊ρ − χ₀ω|∇S|f (+ ν(ρF − f)) with frozen S′ and ρ.

    The tumbling rate uses the node quadrature of ∫(v·∇S)₊dv, so the velocity
    integral of gain equals that of loss in every radial cell and ρ is invariant.
    """
    vx, _ = state.vset.components()
    rho = state.vset.integrate(state.g)
    bias = np.maximum(vx[None, :, :] * field.Sprime[:, None, None], 0.0)
    turn_rate = chi0 * state.vset.integrate(bias)

    target = chi0 * bias
    total_rate = turn_rate
    if relaxation_rate > 0.0:
        if equilibrium is None:
            raise ConfigError("relaxation needs an equilibrium distribution")
        target = target + relaxation_rate * equilibrium[None, :, :]
        total_rate = turn_rate + relaxation_rate

    active = total_rate > 0.0
    if not np.any(active):
        return state.evolve()
    safe_rate = np.where(active, total_rate, 1.0)
    decay = np.exp(-total_rate * dt)[:, None, None]
    weight = (-np.expm1(-total_rate * dt) * rho / safe_rate)[:, None, None]
    g_new = np.where(active[:, None, None], decay * state.g + weight * target, state.g)
    return state.evolve(g=g_new)


# ── Composite step ────────────────────────────────────────────────────


def time_step(state: PhaseState, config: RunConfig) -> float:
    """Configured dt, or the CFL bound when none is given."""
    bound = stable_dt(state.grid, state.vset, config.time.cfl)
    if config.time.dt is None:
        return bound
    if config.time.dt > bound * (1.0 + 1e-12):
        raise CFLViolation(
            f"configured dt={config.time.dt:.6g} exceeds cfl bound {bound:.6g}",
            diagnostics={"dt": config.time.dt, "bound": bound},
        )
    return config.time.dt


def step(state: PhaseState, config: RunConfig, dt: Optional[float] = None) -> PhaseState:
    """Strang splitting: half transport, turning with S′ from the midpoint density, half transport."""
    bound = stable_dt(state.grid, state.vset, config.time.cfl)
    dt = time_step(state, config) if dt is None else dt
    if dt > bound * (1.0 + 1e-12):
        raise CFLViolation(f"dt={dt:.6g} exceeds cfl bound {bound:.6g}", diagnostics={"dt": dt, "bound": bound})

    scheme = config.grid.scheme
    half = _transport(state, 0.5 * dt, scheme, 1.0)
    field = solve_field(rho_of(half), config.model.alpha)
    turned = collision_step(half, field, dt, config.model.chi0)
    out = _transport(turned, 0.5 * dt, scheme, 1.0)
    if not np.all(np.isfinite(out.g)):
        raise NumericalError(f"non-finite phase density after step at t={state.t:.6g}", diagnostics={"t": state.t, "dt": dt})
    return out.evolve(t=state.t + dt)
