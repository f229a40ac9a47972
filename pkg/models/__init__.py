"""
Models package
"""
from .config import (
    VelocityKind,
    Equilibrium,
    ThresholdModel,
    TransportScheme,
    ModelParams,
    GridParams,
    TimeParams,
    VelocityProfile,
    UniformDiskInitial,
    RadialGaussianInitial,
    ComparisonDominatedInitial,
    OutputParams,
    RunConfig,
    ScaledConfig,
    KinchemSettings,
    PRESETS,
    preset,
)
from .responses import (
    norm_key,
    DiagnosticsRecord,
    EllipticReport,
    VirialReport,
    BlowupVerdict,
    SupersolutionReport,
    GammaStarReport,
    AlphaCriterionVerdict,
    Mu0Report,
    ThresholdReport,
    OracleResult,
    DispersionSample,
    DispersionReport,
    CheckResult,
    BatteryReport,
    LimitStudyReport,
    ParabolicComparisonReport,
    RunManifest,
)

__all__ = [
    "VelocityKind",
    "Equilibrium",
    "ThresholdModel",
    "TransportScheme",
    "ModelParams",
    "GridParams",
    "TimeParams",
    "VelocityProfile",
    "UniformDiskInitial",
    "RadialGaussianInitial",
    "ComparisonDominatedInitial",
    "OutputParams",
    "RunConfig",
    "ScaledConfig",
    "KinchemSettings",
    "PRESETS",
    "preset",
    "norm_key",
    "DiagnosticsRecord",
    "EllipticReport",
    "VirialReport",
    "BlowupVerdict",
    "SupersolutionReport",
    "GammaStarReport",
    "AlphaCriterionVerdict",
    "Mu0Report",
    "ThresholdReport",
    "OracleResult",
    "DispersionSample",
    "DispersionReport",
    "CheckResult",
    "BatteryReport",
    "LimitStudyReport",
    "ParabolicComparisonReport",
    "RunManifest",
]
