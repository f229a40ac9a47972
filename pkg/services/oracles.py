"""
Independent references: brute-force quadratures, a Cartesian 2D kinetic solver and the dispersion check.
Nothing here reuses the reduced solver's discretization.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate
from scipy.interpolate import RegularGridInterpolator

from models.config import VelocityKind
from models.responses import DispersionReport, DispersionSample, OracleResult
from problem_details import CFLViolation, ConfigError, InadmissibleExponents, QuadratureError
from services.chemfield import RadialDensity
from services.velocity import VelocitySet

logger = logging.getLogger(__name__)

SPEED_ORDER = 64

Profile = Callable[[np.ndarray, np.ndarray, np.ndarray, np.ndarray], np.ndarray]


# ── Quadrature oracles ────────────────────────────────────────────────


def _velocity_average(integrand: Callable, kind: VelocityKind, R: float, breakpoints: Sequence[float] = ()) -> OracleResult:
    """∫_V integrand(vx, vy) dv by Gauss-Legendre in speed and adaptive quadrature in angle."""
    kind = VelocityKind(kind)
    x, a = np.polynomial.legendre.leggauss(SPEED_ORDER)
    speeds = 0.5 * R * (x + 1.0)
    radial = 0.5 * R * a * speeds

    def over_angle(phi: float) -> float:
        c, s = math.cos(phi), math.sin(phi)
        if kind == VelocityKind.SPHERE:
            return R * float(integrand(R * c, R * s))
        return float(np.sum(radial * integrand(speeds * c, speeds * s)))

    points = sorted({math.remainder(p, 2.0 * math.pi) for p in breakpoints} - {-math.pi, math.pi})
    value, abserr = integrate.quad(
        over_angle, -math.pi, math.pi, points=points or None, epsabs=1e-13, epsrel=1e-11, limit=400
    )
    return OracleResult(descriptor="velocity-average", value=value, error_estimate=abserr)


def _omega_integrand(gamma: float) -> OracleResult:
    """Ω(γ) via θ = u^{1/(1−γ)}, which removes the endpoint singularity."""
    if not 0.0 < gamma < 1.0:
        raise ConfigError(f"gamma must lie in (0, 1), got {gamma}")
    m = 1.0 / (1.0 - gamma)
    top = (0.5 * math.pi) ** (1.0 - gamma)

    def smooth(u: float) -> float:
        if u == 0.0:
            return m
        theta = u ** m
        return m * u ** (m - 1.0) * math.sin(theta) ** -gamma

    value, abserr = integrate.quad(smooth, 0.0, top, epsabs=1e-14, epsrel=1e-12, limit=200)
    return OracleResult(descriptor="omega-integrand", value=1.0 + 2.0 * value / math.pi, error_estimate=2.0 * abserr / math.pi)


def _kernel_constant() -> OracleResult:
    """(1/2π)∬ dζ/(|ζ|(1+|ζ|²)) as a polar double integral."""
    value, abserr = integrate.dblquad(
        lambda s, theta: 1.0 / (1.0 + s * s),
        0.0,
        2.0 * math.pi,
        0.0,
        math.inf,
        epsabs=1e-12,
        epsrel=1e-10,
    )
    return OracleResult(descriptor="kernel-constant", value=value / (2.0 * math.pi), error_estimate=abserr / (2.0 * math.pi))


def _k_tail(rho: Callable[[float], float], support: float) -> OracleResult:
    """K = M∫₀^L T − π∫₀^L T² with T(r) = ∫_r^L λρ(λ)dλ by nested quadrature."""
    def tail(r: float) -> float:
        return integrate.quad(lambda lam: lam * rho(lam), r, support, epsabs=1e-14, epsrel=1e-12)[0]

    M = 2.0 * math.pi * tail(0.0)
    first, err1 = integrate.quad(tail, 0.0, support, epsabs=1e-13, epsrel=1e-11)
    second, err2 = integrate.quad(lambda r: tail(r) ** 2, 0.0, support, epsabs=1e-13, epsrel=1e-11)
    return OracleResult(descriptor="k-tail", value=M * first - math.pi * second, error_estimate=M * err1 + math.pi * err2)


def quadrature_oracle(descriptor: str, **domain) -> OracleResult:
    """Brute-force value for a named integral.

    velocity-average: integrand, kind, R, breakpoints
    omega-integrand:  gamma
    kernel-constant:  (none)
    k-tail:           rho, support
    """
    try:
        if descriptor == "velocity-average":
            result = _velocity_average(domain["integrand"], domain["kind"], domain["R"], domain.get("breakpoints", ()))
        elif descriptor == "omega-integrand":
            result = _omega_integrand(domain["gamma"])
        elif descriptor == "kernel-constant":
            result = _kernel_constant()
        elif descriptor == "k-tail":
            result = _k_tail(domain["rho"], domain["support"])
        else:
            raise ConfigError(f"unknown oracle descriptor '{descriptor}'")
    except KeyError as e:
        raise ConfigError(f"oracle '{descriptor}' is missing argument {e}") from None
    if not math.isfinite(result.value):
        raise QuadratureError(f"oracle '{descriptor}' returned a non-finite value")
    return result


# ── Cartesian kinetic solver ──────────────────────────────────────────


@dataclass(frozen=True, eq=False)
class CartesianState:
    """f(x, y, w, φ) on a square grid centred at the origin."""

    t: float
    x: np.ndarray
    vset: VelocitySet
    f: np.ndarray
    profile: Optional[Profile] = None

    @property
    def h(self) -> float:
        return float(self.x[1] - self.x[0])

    def density(self) -> np.ndarray:
        return self.vset.integrate(self.f)

    def mass(self) -> float:
        return float(np.sum(self.density())) * self.h ** 2


def cartesian_grid(L: float, n: int) -> np.ndarray:
    """n cell centres on [−L, L], mirror symmetric."""
    h = 2.0 * L / n
    return h * (np.arange(n) - 0.5 * (n - 1))


def cartesian_from_profile(profile: Profile, L: float, n: int, vset: VelocitySet, materialize: bool = True) -> CartesianState:
    """Sample a profile on the grid; without materialize only the profile is kept (dispersion checks)."""
    x = cartesian_grid(L, n)
    if not materialize:
        return CartesianState(t=0.0, x=x, vset=vset, f=np.zeros((0,)), profile=profile)
    vx, vy = vset.components()
    X, Y = np.meshgrid(x, x, indexing="ij")
    f = profile(X[:, :, None, None], Y[:, :, None, None], vx[None, None], vy[None, None])
    f = np.broadcast_to(f, (n, n) + vx.shape).astype(float)
    return CartesianState(t=0.0, x=x, vset=vset, f=f, profile=profile)


def _cartesian_transport(f: np.ndarray, vx: np.ndarray, vy: np.ndarray, h: float, dt: float) -> np.ndarray:
    fp = np.pad(f, ((1, 1), (1, 1), (0, 0), (0, 0)))
    centre = fp[1:-1, 1:-1]
    dx = np.where(vx > 0, centre - fp[:-2, 1:-1], fp[2:, 1:-1] - centre)
    dy = np.where(vy > 0, centre - fp[1:-1, :-2], fp[1:-1, 2:] - centre)
    return f - dt / h * (vx * dx + vy * dy)


def _cartesian_gradient(rho: np.ndarray, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """∇S for −ΔS = ρ̄ with ρ̄ the angular average of ρ (Newton's shell theorem)."""
    h = float(x[1] - x[0])
    X, Y = np.meshgrid(x, x, indexing="ij")
    radius = np.hypot(X, Y)
    shells, index = np.unique(radius, return_inverse=True)
    shell_mass = np.bincount(index.ravel(), weights=(rho * h * h).ravel(), minlength=shells.size)
    inside = np.cumsum(shell_mass) - 0.5 * shell_mass
    scale = -inside[index].reshape(radius.shape) / (2.0 * math.pi * radius ** 2)
    return scale * X, scale * Y


def _cartesian_collision(f: np.ndarray, grad: Tuple[np.ndarray, np.ndarray], vx, vy, weights, chi0: float, dt: float) -> np.ndarray:
    rho = np.sum(f * weights, axis=(-2, -1))
    bias = np.maximum(vx * grad[0][:, :, None, None] + vy * grad[1][:, :, None, None], 0.0)
    rate = chi0 * np.sum(bias * weights, axis=(-2, -1))
    active = rate > 0
    safe = np.where(active, rate, 1.0)
    decay = np.exp(-rate * dt)[:, :, None, None]
    gain = (-np.expm1(-rate * dt) * rho / safe)[:, :, None, None] * chi0 * bias
    return np.where(active[:, :, None, None], decay * f + gain, f)


def cartesian_step(state: CartesianState, chi0: float, dt: float) -> CartesianState:
    """Strang step of the full 2D model; upwind transport with outflow boundaries."""
    vx, vy = state.vset.components()
    h = state.h
    bound = h / float(np.max(np.abs(vx) + np.abs(vy)))
    if dt > bound * (1.0 + 1e-12):
        raise CFLViolation(f"dt={dt:.6g} exceeds the Cartesian bound {bound:.6g}", diagnostics={"dt": dt, "bound": bound})
    f = _cartesian_transport(state.f, vx, vy, h, 0.5 * dt)
    grad = _cartesian_gradient(np.sum(f * state.vset.weights, axis=(-2, -1)), state.x)
    f = _cartesian_collision(f, grad, vx, vy, state.vset.weights, chi0, dt)
    f = _cartesian_transport(f, vx, vy, h, 0.5 * dt)
    return replace(state, t=state.t + dt, f=f, profile=None)


def cartesian_time_step(state: CartesianState, cfl: float = 0.5) -> float:
    vx, vy = state.vset.components()
    return cfl * state.h / float(np.max(np.abs(vx) + np.abs(vy)))


def run_cartesian(state: CartesianState, chi0: float, t_end: float, cfl: float = 0.5) -> CartesianState:
    dt = cartesian_time_step(state, cfl)
    while state.t < t_end * (1.0 - 1e-14):
        state = cartesian_step(state, chi0, min(dt, t_end - state.t))
    return state


def rotate_quarter(state: CartesianState) -> CartesianState:
    """Rotation by π/2 of both x and v."""
    n = state.vset.n_angles
    if n % 4:
        raise ConfigError("quarter rotation needs an angle count divisible by 4")
    f = np.roll(np.rot90(state.f, k=1, axes=(0, 1)), n // 4, axis=3)
    return replace(state, f=np.ascontiguousarray(f), profile=None)


def cartesian_rho_radial(state: CartesianState, rho: RadialDensity) -> np.ndarray:
    """Radial density interpolated onto the Cartesian cells."""
    X, Y = np.meshgrid(state.x, state.x, indexing="ij")
    return np.interp(np.hypot(X, Y), rho.grid.centers, rho.rho, right=0.0)


def radial_discrepancy(state: CartesianState, rho: RadialDensity) -> float:
    """Relative L¹ distance between the Cartesian density and a radial density."""
    cart = state.density()
    total = float(np.sum(cart))
    if total <= 0:
        return 0.0
    return float(np.sum(np.abs(cart - cartesian_rho_radial(state, rho)))) / total


# ── Dispersion ────────────────────────────────────────────────────────


def _shifted_power_sums(f0: CartesianState, t: float, powers: Iterable[float]) -> Dict[float, np.ndarray]:
    """Σ_v W f0(x − tv, v)^s for each power s, accumulated one speed node at a time."""
    vset = f0.vset
    vx, vy = vset.components()
    X, Y = np.meshgrid(f0.x, f0.x, indexing="ij")
    sums = {s: np.zeros_like(X) for s in powers}
    interpolators = None
    if f0.profile is None:
        interpolators = [
            [RegularGridInterpolator((f0.x, f0.x), f0.f[:, :, i, j], bounds_error=False, fill_value=0.0) for j in range(vset.n_angles)]
            for i in range(vset.n_speeds)
        ]
    for i in range(vset.n_speeds):
        if f0.profile is not None:
            values = f0.profile(
                X[:, :, None] - t * vx[i][None, None, :],
                Y[:, :, None] - t * vy[i][None, None, :],
                vx[i][None, None, :],
                vy[i][None, None, :],
            )
            values = np.broadcast_to(values, X.shape + (vset.n_angles,))
        else:
            values = np.stack(
                [
                    interpolators[i][j](np.stack([X - t * vx[i, j], Y - t * vy[i, j]], axis=-1))
                    for j in range(vset.n_angles)
                ],
                axis=-1,
            )
        values = np.abs(values)
        for s in sums:
            sums[s] += np.sum(values ** s * vset.weights[i][None, None, :], axis=-1)
    return sums


def _mixed_norm(power_sum: np.ndarray, inner: float, outer: float, h: float) -> float:
    """(Σ_x (Σ_v W f^inner)^{outer/inner} h²)^{1/outer}."""
    return float(np.sum(power_sum ** (outer / inner)) * h * h) ** (1.0 / outer)


def dispersion_matrix(
    f0: CartesianState,
    pairs: Sequence[Tuple[float, float]],
    times: Sequence[float],
    slack: float = 0.05,
) -> List[DispersionReport]:
    """dispersion_check for several (p, q) pairs, sharing the shifted sums."""
    for p, q in pairs:
        if p < q or q < 1:
            raise InadmissibleExponents(f"dispersion needs p >= q >= 1, got p={p:g}, q={q:g}")
    h = f0.h
    initial = _shifted_power_sums(f0, 0.0, {p for p, _ in pairs})
    rhs0 = {(p, q): _mixed_norm(initial[p], p, q, h) for p, q in pairs}
    lhs: Dict[Tuple[float, float], List[float]] = {pair: [] for pair in pairs}
    for t in times:
        sums = _shifted_power_sums(f0, t, {q for _, q in pairs})
        for p, q in pairs:
            lhs[(p, q)].append(_mixed_norm(sums[q], q, p, h))

    reports = []
    for p, q in pairs:
        expected = 2.0 * (1.0 / q - 1.0 / p)
        samples = []
        for t, left in zip(times, lhs[(p, q)]):
            right = t ** -expected * rhs0[(p, q)]
            samples.append(DispersionSample(t=t, lhs=left, rhs=right, holds=left <= right * (1.0 + slack)))
        exponent = None
        if len(times) >= 2 and lhs[(p, q)][-1] > 0 and lhs[(p, q)][-2] > 0:
            exponent = -math.log(lhs[(p, q)][-1] / lhs[(p, q)][-2]) / math.log(times[-1] / times[-2])
        reports.append(
            DispersionReport(
                p=p,
                q=q,
                slack=slack,
                samples=samples,
                holds=all(s.holds for s in samples),
                decay_exponent=exponent,
                expected_exponent=expected,
            )
        )
    return reports


def dispersion_check(f0: CartesianState, p: float, q: float, times: Sequence[float], slack: float = 0.05) -> DispersionReport:
    """‖f(t)‖_{L^p_x L^q_v} ≤ t^{−2(1/q−1/p)}‖f0‖_{L^q_x L^p_v} under free transport."""
    return dispersion_matrix(f0, [(p, q)], times, slack)[0]


# ── Reference profiles ────────────────────────────────────────────────


def gaussian_profile(sigma: float, center: Tuple[float, float] = (0.0, 0.0), velocity: str = "uniform", R: float = 1.0) -> Profile:
    """Unit-mass Gaussian in x times a unit-mass velocity profile on the ball."""
    cx, cy = center
    if velocity == "uniform":
        norm_v = math.pi * R ** 2
    elif velocity == "bump":
        norm_v = math.pi * R ** 2 / 3.0
    else:
        raise ConfigError(f"unknown velocity profile '{velocity}'")

    def profile(X, Y, VX, VY):
        space = np.exp(-((X - cx) ** 2 + (Y - cy) ** 2) / (2.0 * sigma ** 2)) / (2.0 * math.pi * sigma ** 2)
        s2 = (VX ** 2 + VY ** 2) / R ** 2
        shape = np.ones_like(s2) if velocity == "uniform" else np.maximum(1.0 - s2, 0.0) ** 2
        return space * shape / norm_v

    return profile
