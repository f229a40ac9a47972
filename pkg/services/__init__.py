"""
Services package
"""
from .runner import SimulationRunner, RunOutcome
from .battery import run_battery
from .parabolic import limit_study, compare_parabolic

__all__ = [
    "SimulationRunner",
    "RunOutcome",
    "run_battery",
    "limit_study",
    "compare_parabolic",
]
