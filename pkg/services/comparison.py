"""
Comparison function k(x, v) and the small-mass supersolution machinery
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Dict, Iterable, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate, optimize, special

from models.config import VelocityKind
from models.responses import GammaStarReport, SupersolutionReport
from problem_details import ConfigError, InadmissibleExponents, SingularityError, UnsupportedVelocitySet
from services.velocity import VelocitySet

logger = logging.getLogger(__name__)

GAMMA_BRACKET = (0.1, 0.6, 0.95)
SUPERSOLUTION_RTOL = 1e-9


@dataclass(frozen=True)
class Supersolution:
    """k(x, v) = k0|x|^−γ if x·v ≤ 0, else k0|x − (x·v̂)v̂|^−γ."""

    k0: float
    gamma: float

    def __post_init__(self) -> None:
        _check_gamma(self.gamma)
        if not self.k0 > 0:
            raise ConfigError(f"k0 must be positive, got {self.k0}")


def _check_gamma(gamma: float) -> None:
    if not 0.0 < gamma < 1.0:
        raise ConfigError(f"gamma must lie in (0, 1), got {gamma}")


def k_eval(x: Sequence[float], v: Sequence[float], s: Supersolution) -> float:
    x1, x2 = float(x[0]), float(x[1])
    v1, v2 = float(v[0]), float(v[1])
    r = math.hypot(x1, x2)
    speed = math.hypot(v1, v2)
    if r == 0.0:
        raise SingularityError("k is singular at x = 0")
    if speed == 0.0:
        raise SingularityError("k needs a nonzero velocity")
    if x1 * v1 + x2 * v2 <= 0.0:
        return s.k0 * r ** -s.gamma
    distance = abs(x1 * v2 - x2 * v1) / speed
    if distance == 0.0:
        raise SingularityError("x lies on the ray spanned by v")
    return s.k0 * distance ** -s.gamma


def k_radial(r, phi, s: Supersolution) -> np.ndarray:
    """k at |x| = r and angle φ between x and v (independent of |v|)."""
    r = np.asarray(r, dtype=float)
    phi = np.asarray(phi, dtype=float)
    with np.errstate(divide="ignore"):
        behind = s.k0 * r ** -s.gamma
        ahead = s.k0 * (r * np.abs(np.sin(phi))) ** -s.gamma
    return np.where(np.cos(phi) <= 0.0, behind, ahead)


# ── Ω(γ) ──────────────────────────────────────────────────────────────


def omega_gamma(gamma: float) -> float:
    """Ω(γ) = 1 + (2/π)∫₀^{π/2} sin^−γθ dθ, integrated with the algebraic weight θ^−γ."""
    _check_gamma(gamma)

    def smooth(theta: float) -> float:
        return 1.0 if theta == 0.0 else (theta / math.sin(theta)) ** gamma

    value, _ = integrate.quad(smooth, 0.0, 0.5 * math.pi, weight="alg", wvar=(-gamma, 0.0), epsabs=0.0, epsrel=1e-12)
    return 1.0 + 2.0 * value / math.pi


def omega_gamma_closed_form(gamma: float) -> float:
    """Ω(γ) = 1 + B(½, (1−γ)/2)/π."""
    _check_gamma(gamma)
    return 1.0 + float(special.beta(0.5, 0.5 * (1.0 - gamma))) / math.pi


def k_velocity_integral(r: float, s: Supersolution, vset: VelocitySet) -> float:
    """∫_V k(x, v) dv = k0 r^−γ (|V|/2) Ω(γ)."""
    if vset.kind != VelocityKind.BALL:
        raise UnsupportedVelocitySet("the velocity integral of k is derived for the ball only")
    if not r > 0:
        raise SingularityError("k is singular at x = 0")
    return s.k0 * r ** -s.gamma * 0.5 * vset.measure * omega_gamma(s.gamma)


def k_velocity_lq_norm(r: float, s: Supersolution, vset: VelocitySet, q: float) -> float:
    """‖k(x, ·)‖_{L^q(V)} for γq < 1."""
    if vset.kind != VelocityKind.BALL:
        raise UnsupportedVelocitySet("the velocity norms of k are derived for the ball only")
    if not s.gamma * q < 1.0:
        raise InadmissibleExponents(f"k(x, ·) is not in L^{q:g} for gamma={s.gamma:g}")
    integral = s.k0 ** q * r ** (-s.gamma * q) * 0.5 * vset.measure * omega_gamma(s.gamma * q)
    return integral ** (1.0 / q)


def small_mass_bound(s: Supersolution, chi0: float, vset: VelocitySet) -> float:
    """Largest mass for which k is a supersolution: 4πγ/(χ₀|V|Ω(γ))."""
    if vset.kind != VelocityKind.BALL:
        raise UnsupportedVelocitySet("the small-mass bound is derived for the ball only")
    return 4.0 * math.pi * s.gamma / (chi0 * vset.measure * omega_gamma(s.gamma))


def gamma_objective(gamma: float) -> float:
    return gamma / omega_gamma(gamma)


def gamma_star() -> GammaStarReport:
    """argmax of γ/Ω(γ) on (0, 1)."""
    result = optimize.minimize_scalar(lambda g: -gamma_objective(g), bracket=GAMMA_BRACKET, method="golden", tol=1e-6)
    g = float(result.x)
    om = omega_gamma(g)
    logger.info(f"gamma* = {g:.6f}, 4 gamma*/Omega = {4.0 * g / om:.6f}")
    return GammaStarReport(gamma_star=g, objective=g / om, value=4.0 * g / om, omega=om)


# ── Supersolution inequality ──────────────────────────────────────────


def default_samples(vset: VelocitySet) -> np.ndarray:
    """(r, φ, w) rows covering both branches of k and every speed node."""
    radii = np.geomspace(0.05, 5.0, 20)
    angles = vset.angles
    speeds = vset.speeds
    grid = np.stack(np.meshgrid(radii, angles, speeds, indexing="ij"), axis=-1)
    return grid.reshape(-1, 3)


def supersolution_check(
    s: Supersolution,
    M: float,
    chi0: float,
    vset: VelocitySet,
    samples: Optional[np.ndarray] = None,
) -> SupersolutionReport:
    """Pointwise v·∇ₓk ≥ χ₀(v·∇S)₋ ∫_V k dv′ with the worst-case |∇S| = M/(2π r)."""
    bound = small_mass_bound(s, chi0, vset)
    pts = default_samples(vset) if samples is None else np.asarray(samples, dtype=float).reshape(-1, 3)
    r, phi, w = pts[:, 0], pts[:, 1], pts[:, 2]
    if np.any(r <= 0):
        raise SingularityError("supersolution samples must avoid x = 0")

    inward = w * np.maximum(-np.cos(phi), 0.0)
    k = k_radial(r, phi, s)
    lhs = inward * s.gamma / r * k
    rhs = chi0 * inward * M / (2.0 * math.pi * r) * np.array([k_velocity_integral(x, s, vset) for x in r])
    violation = np.maximum(rhs - lhs, 0.0)
    relative = violation / np.maximum(rhs, np.finfo(float).tiny)
    violating = int(np.count_nonzero(relative > SUPERSOLUTION_RTOL))

    return SupersolutionReport(
        passed=violating == 0,
        mass=M,
        mass_bound=bound,
        mass_condition_met=M <= bound * (1.0 + 1e-12),
        max_violation=float(violation.max(initial=0.0)),
        max_relative_violation=float(relative.max(initial=0.0)),
        samples=int(r.size),
        violating_samples=violating,
    )


def comparison_excess(g: np.ndarray, r_centers: np.ndarray, vset: VelocitySet, s: Supersolution) -> float:
    """sup (f − k)₊ over the phase grid."""
    k = k_radial(r_centers[:, None], vset.angles[None, :], s)
    return float(np.max(np.maximum(g - k[:, None, :], 0.0), initial=0.0))


def admissible_for_comparison(p: float, q: float, gamma: float) -> Tuple[bool, str]:
    """Whether the free-streaming bound on k applies to the L^p_x L^q_v norm."""
    if not (p > 2.0 and q > 1.0):
        return False, "needs p > 2 and q > 1"
    if not 0.0 <= 1.0 / q - 1.0 / p < 0.5:
        return False, "needs 0 <= 1/q - 1/p < 1/2"
    if not (p < 2.0 / gamma and q < 1.0 / gamma):
        return False, "needs p < 2/gamma and q < 1/gamma"
    p_conj, q_conj = p / (p - 1.0), q / (q - 1.0)
    if not q_conj / p_conj > (1.0 - 0.5 * gamma) / (1.0 - gamma):
        return False, "needs q'/p' > (1 - gamma/2)/(1 - gamma)"
    return True, "admissible"


def free_streaming_constant(
    s: Supersolution,
    vset: VelocitySet,
    q: float,
    times: Iterable[float],
    radii: Optional[Sequence[float]] = None,
) -> Dict[float, float]:
    """max over r of r^γ ‖k(x − tv, ·)‖_{L^q_v} at x = (r, 0), for each t."""
    if not s.gamma * q < 1.0:
        raise InadmissibleExponents(f"k(x, ·) is not in L^{q:g} for gamma={s.gamma:g}")
    radii = np.geomspace(0.1, 10.0, 25) if radii is None else np.asarray(radii, dtype=float)
    vx, vy = vset.components()
    speed = np.hypot(vx, vy)
    out: Dict[float, float] = {}
    for t in times:
        worst = 0.0
        for r in radii:
            yx, yy = r - t * vx, -t * vy
            dist = np.abs(r * vy) / speed
            with np.errstate(divide="ignore"):
                k = np.where(yx * vx + yy * vy <= 0.0, s.k0 * np.hypot(yx, yy) ** -s.gamma, s.k0 * dist ** -s.gamma)
            norm = float(np.sum(k ** q * vset.weights)) ** (1.0 / q)
            worst = max(worst, r ** s.gamma * norm)
        out[float(t)] = worst
    return out
