"""
Shared fixtures: small grids that keep every test fast
"""
import pytest

from models.config import GridParams, OutputParams, RunConfig, TimeParams, UniformDiskInitial, VelocityProfile


def small_config(mass: float = 2.0, **overrides) -> RunConfig:
    """Coarse disk run on a 32 x 4 x 16 grid."""
    fields = dict(
        name="small",
        grid=GridParams(Nr=32, Nw=4, Nphi=16, r_max=4.0),
        time=TimeParams(t_end=0.2),
        initial=UniformDiskInitial(mass=mass, radius=1.0),
        output=OutputParams(cadence=5),
    )
    fields.update(overrides)
    return RunConfig(**fields)


@pytest.fixture
def config() -> RunConfig:
    return small_config()


@pytest.fixture
def beam_config() -> RunConfig:
    return small_config(initial=UniformDiskInitial(mass=2.0, radius=1.0, velocity=VelocityProfile(kind="beam", angle=0.0, width=0.5)))
