"""
Initial phase densities for the configured families
"""
from __future__ import annotations

import logging
import math

import numpy as np

from models.config import ComparisonDominatedInitial, RadialGaussianInitial, RunConfig, UniformDiskInitial, VelocityProfile
from problem_details import ConfigError
from services import comparison
from services.chemfield import RadialGrid
from services.kinsolver import PhaseState
from services.velocity import VelocitySet, build_velocity_set

logger = logging.getLogger(__name__)


def velocity_profile(profile: VelocityProfile, vset: VelocitySet) -> np.ndarray:
    """Node values h(v) with Σ W h = 1."""
    if profile.kind == "uniform":
        h = np.ones_like(vset.weights)
    else:
        offset = np.angle(np.exp(1j * (vset.angles - profile.angle)))
        h = np.broadcast_to((np.abs(offset) <= profile.width).astype(float), vset.weights.shape).copy()
    total = float(np.sum(h * vset.weights))
    if total <= 0:
        raise ConfigError(f"beam of half-width {profile.width:g} contains no angle node")
    return h / total


def _normalize(rho: np.ndarray, grid: RadialGrid, mass: float) -> np.ndarray:
    current = 2.0 * math.pi * float(np.sum(grid.centers * rho * grid.dr))
    if mass == 0.0:
        return np.zeros_like(rho)
    if current <= 0:
        raise ConfigError("initial profile has no mass on the grid; refine Nr")
    return rho * (mass / current)


def radial_profile(initial, grid: RadialGrid) -> np.ndarray:
    """ρ₀ at the cell centres, rescaled so the grid mass equals the requested mass."""
    r = grid.centers
    if isinstance(initial, UniformDiskInitial):
        shape = (r < initial.radius).astype(float)
    elif isinstance(initial, RadialGaussianInitial):
        shape = np.exp(-0.5 * (r / initial.sigma) ** 2)
    else:
        raise ConfigError(f"family {initial.family} has no separable radial profile")
    return _normalize(shape, grid, initial.mass)


def comparison_dominated(initial: ComparisonDominatedInitial, config: RunConfig, grid: RadialGrid, vset: VelocitySet) -> np.ndarray:
    s = comparison.Supersolution(k0=initial.k0, gamma=initial.gamma)
    target = initial.mass
    if target is None:
        target = comparison.small_mass_bound(s, config.model.chi0, vset)
    k = comparison.k_radial(grid.centers[:, None], vset.angles[None, :], s)
    shape = np.minimum(k, initial.cap) * (grid.centers <= initial.r_supp)[:, None]
    g = np.broadcast_to(shape[:, None, :], (grid.n, vset.n_speeds, vset.n_angles)).copy()
    mass = float(np.sum(g * vset.weights[None] * (2.0 * math.pi * grid.centers * grid.dr)[:, None, None]))
    beta = target / mass
    if beta > 1.0:
        raise ConfigError(
            f"target mass {target:.6g} needs beta={beta:.4g} > 1; raise cap or r_supp",
            diagnostics={"beta": beta, "target": target},
        )
    logger.info(f"Comparison-dominated data: beta={beta:.4g}, mass={target:.6g}")
    return beta * g


def supersolution_of(config: RunConfig):
    """Tracked supersolution, if the initial family carries one."""
    if isinstance(config.initial, ComparisonDominatedInitial):
        return comparison.Supersolution(k0=config.initial.k0, gamma=config.initial.gamma)
    return None


def build_grids(config: RunConfig):
    grid = RadialGrid(n=config.grid.Nr, r_max=config.grid.r_max)
    vset = build_velocity_set(config.model.velocity_set, config.model.R, config.grid.Nw, config.grid.Nphi)
    return grid, vset


def build_state(config: RunConfig) -> PhaseState:
    grid, vset = build_grids(config)
    initial = config.initial
    if isinstance(initial, ComparisonDominatedInitial):
        g = comparison_dominated(initial, config, grid, vset)
    else:
        rho = radial_profile(initial, grid)
        g = rho[:, None, None] * velocity_profile(initial.velocity, vset)[None, :, :]
    return PhaseState(t=0.0, grid=grid, vset=vset, g=g)
