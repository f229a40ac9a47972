"""
Pydantic models for diagnostics records, reports and the run manifest
"""
from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, Field


def norm_key(p: float, q: float) -> str:
    """Column key of an L^p_x L^q_v norm, e.g. p3q1.5"""
    return f"p{p:g}q{q:g}"


class DiagnosticsRecord(BaseModel):
    """One sample of the run time series"""
    t: float
    mass: float
    I: float = Field(..., description="Second moment ½∬|x|²f")
    dIdt: float = Field(..., description="Current moment ∬(x·v)f")
    K: float
    norms: Dict[str, float] = Field(default_factory=dict)
    excess: float = Field(float("nan"), description="sup (f − k)₊, NaN when no supersolution is tracked")
    core_fraction: float = Field(0.0, description="Mass share in the two innermost cells")


class EllipticReport(BaseModel):
    """Field bounds for a radial density"""
    p: float
    sup_gradient: float
    norm_product: float = Field(..., description="‖ρ‖₁^{1−p′/2}‖ρ‖_p^{p′/2}")
    sup_r_gradient: float
    radial_bound: float = Field(..., description="M/2π")
    radial_bound_holds: bool
    l2_bound: float = Field(..., description="‖ρ‖₂/(2√π)")
    l2_bound_holds: bool


class VirialReport(BaseModel):
    """Virial inequality tracking along a run"""
    holds: bool
    envelope: Literal["affine", "alpha-corrected"] = "affine"
    delta: float
    slope0: float = Field(..., description="dI/dt(0) + χ₀ωK(0)")
    tolerance: float
    max_violation: float
    first_violation_time: Optional[float] = None
    projected_vanishing_time: Optional[float] = None
    message: str
    samples: int


class BlowupVerdict(BaseModel):
    """Numerical proxy verdict, advisory only"""
    verdict: Literal["blow-up suspected", "global-looking"]
    reasons: List[str] = Field(default_factory=list)
    triggered_at: Optional[float] = None
    norm_ratios: Dict[str, float] = Field(default_factory=dict)
    final_norms: Dict[str, float] = Field(default_factory=dict)
    projected_vanishing_time: Optional[float] = None


class SupersolutionReport(BaseModel):
    """Pointwise check of the supersolution inequality"""
    passed: bool
    mass: float
    mass_bound: float
    mass_condition_met: bool
    max_violation: float
    max_relative_violation: float
    samples: int
    violating_samples: int


class GammaStarReport(BaseModel):
    """Best compromise exponent"""
    gamma_star: float
    objective: float = Field(..., description="γ*/Ω(γ*)")
    value: float = Field(..., description="4γ*/Ω(γ*)")
    omega: float


class AlphaCriterionVerdict(BaseModel):
    """Blow-up criterion with chemical degradation"""
    status: Literal["satisfied", "violated"]
    sharp_satisfied: bool
    sharp_margin: Optional[float] = Field(..., description="δ²/(2η²) − I0 − √δ μ₀/η; None when infinite")
    simplified_satisfied: bool
    simplified_margin: Optional[float] = Field(..., description="(√(δ+A²) − A)² − 2η²I0/δ; None when infinite")
    eta: float
    delta: float
    A: float
    mu0: float
    I0: float
    kernel_constant: float


class Mu0Report(BaseModel):
    """Initial slope μ₀ of the virial envelope"""
    mu0: float
    current_term: float
    K_term: float
    bound: float
    within_bound: bool


class ThresholdReport(BaseModel):
    """Critical mass and derived constants for one model"""
    model: str
    chi0: float
    R: float
    alpha: float
    M_critical: float
    mass: Optional[float] = None
    delta: Optional[float] = None
    diffusion: Optional[float] = None
    chemotactic_coefficient: Optional[float] = None
    projected_vanishing_time: Optional[float] = None
    alpha_criterion: Optional[AlphaCriterionVerdict] = None
    notes: List[str] = Field(default_factory=list)


class OracleResult(BaseModel):
    """Value minted by brute-force quadrature"""
    descriptor: str
    value: float
    error_estimate: float


class DispersionSample(BaseModel):
    """Mixed-norm inequality at one time"""
    t: float
    lhs: float
    rhs: float
    holds: bool


class DispersionReport(BaseModel):
    """Free-transport dispersion check"""
    p: float
    q: float
    slack: float
    samples: List[DispersionSample]
    holds: bool
    decay_exponent: Optional[float] = None
    expected_exponent: float


class CheckResult(BaseModel):
    """Outcome of one battery check"""
    name: str
    passed: bool
    detail: Dict[str, Any] = Field(default_factory=dict)


class BatteryReport(BaseModel):
    """verify-lemmas result"""
    passed: bool
    seed: int
    checks: List[CheckResult]


class LimitStudyReport(BaseModel):
    """Drift-diffusion convergence study"""
    t_end: float
    epsilons: List[float]
    errors: List[float]
    monotone: bool
    halved: Optional[bool] = Field(None, description="e(smallest ε) < e(largest ε)/2")
    second_moments: Dict[str, List[float]] = Field(default_factory=dict, description="I_ε sampled along each run")
    parabolic_mass: float


class ParabolicComparisonReport(BaseModel):
    """Parabolic virial dichotomy at one mass"""
    mass: float
    threshold: float
    diffusion: float
    chemotactic_coefficient: float
    exact_rate: float = Field(..., description="4DM − χ̃M²/(2π)")
    measured_rate: float
    behaviour: Literal["collapse", "spreading", "balanced"]


class RunManifest(BaseModel):
    """Run manifest written next to the diagnostics CSV"""
    schema_: str = Field("kinchem/1", alias="schema")
    name: str
    config: Dict[str, Any]
    code_version: str
    started_at: str
    wall_clock_seconds: float
    exit_code: int
    steps: int
    final_time: float
    dt: float
    verdict: Optional[BlowupVerdict] = None
    virial: Optional[VirialReport] = None
    thresholds: Optional[ThresholdReport] = None
    csv_path: str
    checkpoints: List[str] = Field(default_factory=list)

    model_config = {"populate_by_name": True}
