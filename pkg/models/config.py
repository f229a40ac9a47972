"""
Pydantic models for run configuration, presets and process settings
"""
from __future__ import annotations

from enum import Enum
from pathlib import Path
from typing import Annotated, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class VelocityKind(str, Enum):
    """Admissible velocity set"""
    BALL = "ball"
    SPHERE = "sphere"


class Equilibrium(str, Enum):
    """Equilibrium velocity distribution F of the scaled model"""
    UNIFORM_BALL = "uniform-ball"
    SPHERE_DELTA = "sphere-delta"


class ThresholdModel(str, Enum):
    """Model whose critical mass is evaluated"""
    BALL_KINETIC = "ball"
    SPHERE_KINETIC = "sphere"
    PARABOLIC_UNIFORM_F = "parabolic"
    PARABOLIC_SPHERE_DELTA = "parabolic-sphere-delta"


class TransportScheme(str, Enum):
    """Radial reconstruction used by the transport fluxes"""
    UPWIND = "upwind"
    MUSCL = "muscl"


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class ModelParams(_Section):
    """Physical parameters of the kinetic model"""
    chi0: float = Field(1.0, gt=0, description="Turning sensitivity χ₀")
    R: float = Field(1.0, gt=0, description="Velocity magnitude bound")
    alpha: float = Field(0.0, ge=0, description="Chemical degradation rate α")
    velocity_set: VelocityKind = Field(VelocityKind.BALL, description="Ball B(0,R) or circle S(0,R)")


class GridParams(_Section):
    """Reduced phase-space grid (r, w, φ)"""
    Nr: int = Field(256, ge=4, description="Radial cells")
    Nw: int = Field(8, ge=4, description="Gauss-Legendre speed nodes (ball only)")
    Nphi: int = Field(64, ge=4, description="Angle cells on [-π, π)")
    r_max: float = Field(6.0, gt=0, description="Outer radius (outflow boundary)")
    scheme: TransportScheme = Field(TransportScheme.UPWIND, description="Radial flux reconstruction")

    @field_validator("Nphi")
    @classmethod
    def _even_angles(cls, v: int) -> int:
        if v % 2:
            raise ValueError("Nphi must be even so that the angle grid is mirror symmetric")
        return v


class TimeParams(_Section):
    """Time stepping"""
    t_end: float = Field(5.0, gt=0, description="Final time")
    cfl: float = Field(0.5, gt=0, le=1, description="CFL number")
    dt: Optional[float] = Field(None, gt=0, description="Fixed step; must satisfy the CFL bound")


class VelocityProfile(_Section):
    """Velocity dependence of the initial data, normalized to unit velocity integral"""
    kind: Literal["uniform", "beam"] = "uniform"
    angle: float = Field(0.0, ge=-3.141592653589793, le=3.141592653589793, description="Beam direction φ₀ relative to x̂")
    width: float = Field(0.3, gt=0, description="Beam half-width in angle")


class UniformDiskInitial(_Section):
    """ρ₀ = M/(πa²) on r ≤ a"""
    family: Literal["uniform-disk"] = "uniform-disk"
    mass: float = Field(..., ge=0)
    radius: float = Field(1.0, gt=0)
    velocity: VelocityProfile = Field(default_factory=VelocityProfile)

    def support(self) -> float:
        return self.radius


class RadialGaussianInitial(_Section):
    """ρ₀ = M/(2πσ²) exp(−r²/2σ²)"""
    family: Literal["radial-gaussian"] = "radial-gaussian"
    mass: float = Field(..., ge=0)
    sigma: float = Field(0.5, gt=0)
    velocity: VelocityProfile = Field(default_factory=VelocityProfile)

    def support(self) -> float:
        return 6.0 * self.sigma


class ComparisonDominatedInitial(_Section):
    """f₀ = β·min(k, cap)·1(r ≤ r_supp) scaled to a target mass"""
    family: Literal["comparison-dominated"] = "comparison-dominated"
    gamma: float = Field(0.5, gt=0, lt=1)
    k0: float = Field(1.0, gt=0)
    r_supp: float = Field(1.0, gt=0)
    cap: float = Field(10.0, gt=0)
    mass: Optional[float] = Field(None, ge=0, description="Target mass; defaults to the small-mass bound")

    def support(self) -> float:
        return self.r_supp


InitialData = Annotated[
    Union[UniformDiskInitial, RadialGaussianInitial, ComparisonDominatedInitial],
    Field(discriminator="family"),
]


class OutputParams(_Section):
    """Sampling, monitoring and persistence"""
    cadence: int = Field(50, ge=1, description="Steps between diagnostic samples")
    monitored_norms: List[Tuple[float, float]] = Field(
        default_factory=lambda: [(3.0, 1.5), (4.0, 2.0)],
        description="(p, q) pairs of monitored L^p_x L^q_v norms",
    )
    growth_factor: float = Field(1e3, gt=1)
    collapse_fraction: float = Field(1e-2, gt=0, lt=1, description="I/I(0) below this is treated as collapse")
    concentration_fraction: float = Field(0.5, gt=0, le=1, description="Mass share in the two innermost cells treated as collapse")
    track_virial: bool = True
    stop_on_blowup: bool = True
    checkpoint_every: Optional[int] = Field(None, ge=1, description="Samples between checkpoints")


class RunConfig(_Section):
    """Complete configuration of one simulate run"""
    name: str = "run"
    model: ModelParams = Field(default_factory=ModelParams)
    grid: GridParams = Field(default_factory=GridParams)
    time: TimeParams = Field(default_factory=TimeParams)
    initial: InitialData
    output: OutputParams = Field(default_factory=OutputParams)

    @model_validator(mode="after")
    def _support_inside_grid(self) -> "RunConfig":
        if self.initial.support() >= self.grid.r_max:
            raise ValueError(
                f"initial support {self.initial.support():g} must lie inside r_max={self.grid.r_max:g} "
                "so that the second moment of the data is represented"
            )
        if self.initial.family == "comparison-dominated" and self.model.velocity_set != VelocityKind.BALL:
            raise ValueError("comparison-dominated data is defined for the ball velocity set only")
        return self


class ScaledConfig(_Section):
    """Configuration of an ε-scaled (drift-diffusion) kinetic run"""
    epsilon: float = Field(..., gt=0, le=1)
    equilibrium: Equilibrium = Equilibrium.UNIFORM_BALL
    relaxation_weight: float = Field(1.0, ge=0, description="Weight κ of the relaxation term ρF − f")
    base: RunConfig

    @model_validator(mode="after")
    def _equilibrium_matches_velocity_set(self) -> "ScaledConfig":
        kind = self.base.model.velocity_set
        if self.equilibrium == Equilibrium.UNIFORM_BALL and kind != VelocityKind.BALL:
            raise ValueError("uniform-ball equilibrium requires the ball velocity set")
        if self.equilibrium == Equilibrium.SPHERE_DELTA and kind != VelocityKind.SPHERE:
            raise ValueError("sphere-delta equilibrium requires the sphere velocity set")
        return self


class KinchemSettings(BaseSettings):
    """Process-level settings from KINCHEM_* environment variables or .env"""
    model_config = SettingsConfigDict(env_prefix="KINCHEM_", env_file=".env", extra="ignore")

    output_dir: Path = Path("runs")
    threads: int = Field(1, ge=1)
    seed: int = 0
    log_level: str = "INFO"


# ==================== PRESETS ====================

def _supercritical_disk() -> RunConfig:
    return RunConfig(
        name="supercritical-disk",
        initial=UniformDiskInitial(mass=64.0, radius=1.0),
    )


def _subcritical_comparison() -> RunConfig:
    return RunConfig(
        name="subcritical-comparison",
        initial=ComparisonDominatedInitial(gamma=0.5, k0=1.0, r_supp=1.0, cap=10.0),
    )


def _limit_gaussian() -> RunConfig:
    return RunConfig(
        name="limit-gaussian",
        grid=GridParams(Nr=256, Nw=4, Nphi=16, r_max=4.0, scheme=TransportScheme.MUSCL),
        time=TimeParams(t_end=1.0),
        initial=RadialGaussianInitial(mass=4.0, sigma=0.5),
        output=OutputParams(track_virial=False),
    )


def _empty() -> RunConfig:
    return RunConfig(
        name="empty",
        grid=GridParams(Nr=32, Nw=4, Nphi=16, r_max=4.0),
        time=TimeParams(t_end=0.5),
        initial=UniformDiskInitial(mass=0.0, radius=1.0),
    )


PRESETS = {
    "supercritical-disk": _supercritical_disk,
    "subcritical-comparison": _subcritical_comparison,
    "limit-gaussian": _limit_gaussian,
    "empty": _empty,
}


def preset(name: str) -> RunConfig:
    """Return a fresh copy of a named preset."""
    try:
        return PRESETS[name]()
    except KeyError:
        raise KeyError(f"unknown preset '{name}'; choose from {sorted(PRESETS)}") from None
