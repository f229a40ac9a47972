"""
Radial solves of the chemical equation −ΔS + αS = ρ.
Cumulative integrals use the same midpoint cell masses as the solver's mass quadrature.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate, special

from models.responses import EllipticReport
from problem_details import ConfigError, InadmissibleExponents, QuadratureError, SingularityError

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class RadialGrid:
    """Uniform cell-centred grid on (0, r_max]; first centre at Δr/2."""

    n: int
    r_max: float

    def __post_init__(self) -> None:
        if self.n < 1 or not self.r_max > 0:
            raise ConfigError(f"radial grid needs positive size and radius, got n={self.n}, r_max={self.r_max}")

    @property
    def dr(self) -> float:
        return self.r_max / self.n

    @property
    def centers(self) -> np.ndarray:
        return self.dr * (np.arange(self.n) + 0.5)

    @property
    def edges(self) -> np.ndarray:
        return self.dr * np.arange(self.n + 1)

    @classmethod
    def from_centers(cls, r_centers: np.ndarray) -> "RadialGrid":
        r = np.asarray(r_centers, dtype=float)
        if r.ndim != 1 or r.size < 1 or r[0] <= 0:
            raise ConfigError("grid radii must be positive")
        dr = 2.0 * r[0]
        if r.size > 1 and not np.allclose(np.diff(r), dr, rtol=1e-9, atol=0.0):
            raise ConfigError("grid radii must be uniform cell centres starting at Δr/2")
        return cls(n=r.size, r_max=dr * r.size)


@dataclass(frozen=True, eq=False)
class RadialDensity:
    """Radial density per unit area on a RadialGrid."""

    grid: RadialGrid
    rho: np.ndarray

    def __post_init__(self) -> None:
        if self.rho.shape != (self.grid.n,):
            raise ConfigError(f"density has shape {self.rho.shape}, grid has {self.grid.n} cells")
        if np.any(self.rho < 0):
            raise ConfigError("density must be nonnegative")

    @property
    def r_centers(self) -> np.ndarray:
        return self.grid.centers

    @property
    def cell_masses(self) -> np.ndarray:
        """r ρ Δr per cell (mass / 2π)."""
        return self.grid.centers * self.rho * self.grid.dr

    @property
    def mass(self) -> float:
        return 2.0 * math.pi * float(np.sum(self.cell_masses))


@dataclass(frozen=True, eq=False)
class ChemField:
    """Radial derivative S′ at the cell centres."""

    grid: RadialGrid
    Sprime: np.ndarray
    alpha: float = 0.0

    @property
    def r_centers(self) -> np.ndarray:
        return self.grid.centers


def zero_field(grid: RadialGrid, alpha: float = 0.0) -> ChemField:
    return ChemField(grid=grid, Sprime=np.zeros(grid.n), alpha=alpha)


def enclosed_mass(rho: RadialDensity) -> np.ndarray:
    """∫₀^r λρ dλ at the centres: full inner cells plus half of the own cell."""
    m = rho.cell_masses
    return np.cumsum(m) - 0.5 * m


def solve_radial_alpha0(rho: RadialDensity) -> ChemField:
    """S′(r) = −(1/r)∫₀^r λρ dλ."""
    return ChemField(grid=rho.grid, Sprime=-enclosed_mass(rho) / rho.grid.centers, alpha=0.0)


# ── Kernels for α > 0 ────────────────────────────────────────────────


def poisson_gradient_kernel(z):
    """|∇B₀|(z) = 1/(2πz)."""
    return 1.0 / (2.0 * math.pi * np.asarray(z, dtype=float))


def bessel_gradient_closed_form(z, alpha: float):
    """|∇B_α|(z) = √α K₁(√α z)/(2π)."""
    s = math.sqrt(alpha)
    return s * special.k1(s * np.asarray(z, dtype=float)) / (2.0 * math.pi)


def bessel_gradient_kernel(z: float, alpha: float, *, rtol: float = 1e-8) -> float:
    """|∇B_α|(z) from the heat-kernel representation of B_α.

    Differentiating B_α(z) = (1/4π)∫₀^∞ t⁻¹e^{−z²/4t−αt}dt under the integral and
    substituting t = e^u gives (z/8π)∫ exp(−u − (z²/4)e^{−u} − αe^u) du.
    """
    if not z > 0:
        raise SingularityError(f"gradient kernel is singular at z={z}")
    if not alpha > 0:
        raise ConfigError(f"bessel kernel needs alpha > 0, got {alpha}")

    c = 0.25 * z * z
    # integrand peak: c e^{-u} = 1 + α e^{u}
    y_star = 2.0 * c / (1.0 + math.sqrt(1.0 + 4.0 * alpha * c))
    u_star = math.log(y_star)
    right = alpha * y_star
    lo = u_star - 8.0
    hi = u_star + min(40.0, max(8.0, math.log(700.0 / right)))

    def integrand(u: float) -> float:
        return math.exp(-u - c * math.exp(-u) - alpha * math.exp(u))

    result = integrate.quad(
        integrand, lo, hi, points=[u_star], epsabs=0.0, epsrel=rtol, limit=200, full_output=1
    )
    if len(result) > 3:
        raise QuadratureError(
            f"kernel quadrature did not converge at z={z}, alpha={alpha}",
            diagnostics={"z": z, "alpha": alpha, "abserr": result[1], "message": result[3]},
        )
    return z / (8.0 * math.pi) * result[0]


@lru_cache(maxsize=1)
def universal_kernel_constant() -> float:
    """𝒞 = (1/2π)∫_{ℝ²} dζ/(|ζ|(1+|ζ|²)); in polar form ∫₀^∞ ds/(1+s²)."""
    value, abserr = integrate.quad(lambda s: 1.0 / (1.0 + s * s), 0.0, math.inf, epsabs=1e-13, epsrel=1e-12)
    logger.info(f"Kernel constant C = {value:.12f} (abserr {abserr:.1e})")
    return value


def ring_gradient_kernel(r, lam, alpha: float):
    """Angular integral of the Bessel gradient kernel over a ring of radius λ.

    Equals −√α K₁(√α r) I₀(√α λ) for λ < r and √α I₁(√α r) K₀(√α λ) for λ > r;
    exponentially scaled Bessel functions keep both branches finite.
    """
    s = math.sqrt(alpha)
    x = s * np.asarray(r, dtype=float)
    y = s * np.asarray(lam, dtype=float)
    inner = -s * special.k1e(x) * special.i0e(y) * np.exp(np.minimum(y - x, 0.0))
    outer = s * special.i1e(x) * special.k0e(y) * np.exp(np.minimum(x - y, 0.0))
    return np.where(y < x, inner, np.where(y > x, outer, 0.5 * (inner + outer)))


def ring_gradient_kernel_quadrature(r: float, lam: float, alpha: float) -> float:
    """Same ring integral by quadrature of bessel_gradient_kernel (off the diagonal λ ≠ r)."""
    if r == lam:
        raise SingularityError("ring quadrature is singular on the diagonal")

    def integrand(theta: float) -> float:
        d = math.sqrt(r * r + lam * lam - 2.0 * r * lam * math.cos(theta))
        return -bessel_gradient_kernel(d, alpha) * (r - lam * math.cos(theta)) / d

    value, _ = integrate.quad(integrand, 0.0, math.pi, points=[0.0], epsabs=1e-12, epsrel=1e-8, limit=200)
    return 2.0 * value


@lru_cache(maxsize=8)
def _ring_matrix(n: int, r_max: float, alpha: float) -> np.ndarray:
    grid = RadialGrid(n=n, r_max=r_max)
    r = grid.centers
    matrix = ring_gradient_kernel(r[:, None], r[None, :], alpha)
    matrix.setflags(write=False)
    return matrix


def solve_radial_alpha_pos(rho: RadialDensity, alpha: float) -> ChemField:
    """S′(r) = Σ_λ G_α(r, λ) λρ(λ)Δλ with the ring kernel G_α.

    The own cell uses the mean of both one-sided limits, which reduces to the
    half-cell rule of solve_radial_alpha0 as α → 0. The density vanishes beyond
    r_max, so no truncation of the convolution is needed.
    """
    if not alpha > 0:
        raise ConfigError("alpha = 0 requested through the alpha > 0 path; use the alpha0 solver")
    matrix = _ring_matrix(rho.grid.n, rho.grid.r_max, float(alpha))
    Sprime = np.sum(matrix * rho.cell_masses[None, :], axis=1)
    return ChemField(grid=rho.grid, Sprime=Sprime, alpha=float(alpha))


def solve_field(rho: RadialDensity, alpha: float) -> ChemField:
    if alpha > 0:
        return solve_radial_alpha_pos(rho, alpha)
    return solve_radial_alpha0(rho)


# ── Identities and bounds ─────────────────────────────────────────────


def virial_coupling(rho: RadialDensity) -> float:
    """∫ x·∇S ρ dx = 2π Σ r S′ ρ r Δr; equals −M²/4π for every radial ρ."""
    field = solve_radial_alpha0(rho)
    return 2.0 * math.pi * float(np.sum(rho.grid.centers * field.Sprime * rho.cell_masses))


def lp_norm(rho: RadialDensity, p: float) -> float:
    """‖ρ‖_{L^p(ℝ²)}."""
    return (2.0 * math.pi * float(np.sum(rho.grid.centers * rho.rho ** p * rho.grid.dr))) ** (1.0 / p)


def elliptic_bound_check(rho: RadialDensity, p: float) -> EllipticReport:
    if not p > 2:
        raise InadmissibleExponents(f"the elliptic estimate needs p > 2, got p={p}")
    field = solve_radial_alpha0(rho)
    r = rho.grid.centers
    M = rho.mass
    p_conj = p / (p - 1.0)

    sup_grad = float(np.max(np.abs(field.Sprime)))
    sup_r_grad = float(np.max(r * np.abs(field.Sprime)))
    product = M ** (1.0 - p_conj / 2.0) * lp_norm(rho, p) ** (p_conj / 2.0)
    radial_bound = M / (2.0 * math.pi)
    l2_bound = lp_norm(rho, 2.0) / (2.0 * math.sqrt(math.pi))
    slack = 1e-12 * max(radial_bound, 1e-300)

    return EllipticReport(
        p=p,
        sup_gradient=sup_grad,
        norm_product=product,
        sup_r_gradient=sup_r_grad,
        radial_bound=radial_bound,
        radial_bound_holds=sup_r_grad <= radial_bound + slack,
        l2_bound=l2_bound,
        l2_bound_holds=sup_grad <= l2_bound * (1.0 + 1e-12) + 1e-300,
    )
