"""
Velocity sets and the averaged quantities of the turning operator.
Closed forms are primary; node quadrature backs the solver and the cross-checks.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from models.config import VelocityKind
from problem_details import ConfigError

logger = logging.getLogger(__name__)

DEFAULT_SPEED_NODES = 16
DEFAULT_ANGLE_NODES = 32


@dataclass(frozen=True, eq=False)
class VelocitySet:
    """Ball B(0,R) or circle S(0,R) with a tensor quadrature over (speed, angle).

    Angles are cell centres of a uniform partition of [-π, π) that is
    symmetric under φ → -φ; no node sits on φ = 0 or φ = ±π. The weight of
    node (i, j) carries the measure w dw dφ (ball) or R dφ (circle).
    """

    kind: VelocityKind
    R: float
    speeds: np.ndarray
    angles: np.ndarray
    weights: np.ndarray

    @property
    def measure(self) -> float:
        """|V|"""
        if self.kind == VelocityKind.BALL:
            return math.pi * self.R ** 2
        return 2.0 * math.pi * self.R

    @property
    def n_speeds(self) -> int:
        return self.speeds.size

    @property
    def n_angles(self) -> int:
        return self.angles.size

    @property
    def dphi(self) -> float:
        return 2.0 * math.pi / self.n_angles

    @property
    def angle_edges(self) -> np.ndarray:
        """Left edges of the angle cells plus the closing edge π."""
        n = self.n_angles
        return self.dphi * (np.arange(n + 1) - n // 2)

    @property
    def nodes(self) -> List[Tuple[float, float, float]]:
        """Flat list of (w, φ, weight)."""
        return [
            (float(w), float(phi), float(self.weights[i, j]))
            for i, w in enumerate(self.speeds)
            for j, phi in enumerate(self.angles)
        ]

    def components(self) -> Tuple[np.ndarray, np.ndarray]:
        """Cartesian node coordinates (vx, vy), each shaped (Nw, Nphi)."""
        w = self.speeds[:, None]
        return w * np.cos(self.angles)[None, :], w * np.sin(self.angles)[None, :]

    def integrate(self, values: np.ndarray) -> np.ndarray:
        """Quadrature over the two trailing (speed, angle) axes."""
        return np.sum(values * self.weights, axis=(-2, -1))


def build_velocity_set(
    kind: VelocityKind | str,
    R: float,
    n_speeds: int = DEFAULT_SPEED_NODES,
    n_angles: int = DEFAULT_ANGLE_NODES,
) -> VelocitySet:
    """Gauss-Legendre in w on (0, R) times cell-centred angles; the circle keeps w = R."""
    kind = VelocityKind(kind)
    if not R > 0:
        raise ConfigError(f"velocity bound R must be positive, got {R}")
    if n_angles < 4 or n_angles % 2:
        raise ConfigError(f"angle node count must be even and at least 4, got {n_angles}")

    dphi = 2.0 * math.pi / n_angles
    angles = dphi * (np.arange(n_angles) - n_angles // 2 + 0.5)

    if kind == VelocityKind.BALL:
        if n_speeds < 1:
            raise ConfigError(f"speed node count must be positive, got {n_speeds}")
        x, a = np.polynomial.legendre.leggauss(n_speeds)
        speeds = 0.5 * R * (x + 1.0)
        radial = 0.5 * R * a * speeds
    else:
        speeds = np.array([float(R)])
        radial = np.array([float(R)])

    weights = np.outer(radial, np.full(n_angles, dphi))
    for arr in (speeds, angles, weights):
        arr.setflags(write=False)
    logger.debug(f"Built {kind.value} velocity set R={R} with {speeds.size}x{n_angles} nodes")
    return VelocitySet(kind=kind, R=float(R), speeds=speeds, angles=angles, weights=weights)


def omega(vset: VelocitySet) -> float:
    """∫_V (v′·e)₊ dv′ for any unit vector e."""
    if vset.kind == VelocityKind.BALL:
        return 2.0 * vset.R ** 3 / 3.0
    return 2.0 * vset.R ** 2


def omega_discrete(vset: VelocitySet) -> float:
    """Node quadrature of ω with e = x̂; the collision step uses it for exact ρ-balance."""
    vx, _ = vset.components()
    return float(np.sum(np.maximum(vx, 0.0) * vset.weights))


def directional_first_moment(vset: VelocitySet, p: Sequence[float], q: Sequence[float]) -> float:
    """J(p, q) = ∫_V (p·v)(v·q)₊ dv."""
    if vset.kind == VelocityKind.BALL:
        c = math.pi * vset.R ** 4 / 8.0
    else:
        c = math.pi * vset.R ** 3 / 2.0
    return c * (p[0] * q[0] + p[1] * q[1])


def second_moment_tensor(vset: VelocitySet) -> np.ndarray:
    """∫_V v⊗v dv."""
    if vset.kind == VelocityKind.BALL:
        c = math.pi * vset.R ** 4 / 4.0
    else:
        c = math.pi * vset.R ** 3
    return c * np.eye(2)
