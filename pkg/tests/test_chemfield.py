"""
Tests for the radial field solves and elliptic bounds
"""
import math

import numpy as np
import pytest

from problem_details import ConfigError, InadmissibleExponents, SingularityError
from services.chemfield import (
    RadialDensity,
    RadialGrid,
    bessel_gradient_closed_form,
    bessel_gradient_kernel,
    elliptic_bound_check,
    enclosed_mass,
    ring_gradient_kernel,
    ring_gradient_kernel_quadrature,
    solve_field,
    solve_radial_alpha0,
    solve_radial_alpha_pos,
    universal_kernel_constant,
    virial_coupling,
)


def _random_density(seed: int, n: int = 300, r_max: float = 5.0) -> RadialDensity:
    grid = RadialGrid(n=n, r_max=r_max)
    rng = np.random.default_rng(seed)
    return RadialDensity(grid=grid, rho=rng.uniform(0.0, 3.0, n) * (grid.centers < 0.8 * r_max))


@pytest.mark.parametrize("seed", [0, 1, 2, 3])
def test_virial_coupling_identity(seed):
    """∫ x·∇S ρ = −M²/4π for any radial density"""
    rho = _random_density(seed)
    assert virial_coupling(rho) == pytest.approx(-rho.mass ** 2 / (4.0 * math.pi), rel=1e-12)


def test_alpha0_gradient_points_inward():
    rho = _random_density(7)
    field = solve_radial_alpha0(rho)
    assert np.all(field.Sprime <= 0.0)
    # outside the support S′ = −M/(2πr)
    r = rho.grid.centers[-1]
    assert field.Sprime[-1] == pytest.approx(-rho.mass / (2.0 * math.pi * r), rel=1e-12)


def test_enclosed_mass_uses_half_own_cell():
    rho = _random_density(3)
    C = enclosed_mass(rho)
    assert C[0] == pytest.approx(0.5 * rho.cell_masses[0])
    assert C[-1] + 0.5 * rho.cell_masses[-1] == pytest.approx(rho.mass / (2.0 * math.pi), rel=1e-13)


@pytest.mark.parametrize("alpha", [0.01, 0.5, 2.0])
@pytest.mark.parametrize("z", [0.05, 0.7, 3.0])
def test_bessel_kernel_matches_closed_form(alpha, z):
    value = bessel_gradient_kernel(z, alpha)
    assert value == pytest.approx(float(bessel_gradient_closed_form(z, alpha)), rel=1e-7)


def test_bessel_kernel_rejects_singular_point():
    with pytest.raises(SingularityError):
        bessel_gradient_kernel(0.0, 1.0)
    with pytest.raises(ConfigError):
        bessel_gradient_kernel(1.0, 0.0)


def test_universal_constant():
    assert universal_kernel_constant() == pytest.approx(math.pi / 2.0, abs=1e-10)


@pytest.mark.parametrize("r,lam", [(1.0, 0.5), (0.5, 1.0), (2.0, 1.7)])
def test_ring_kernel_matches_quadrature(r, lam):
    alpha = 0.5
    expected = ring_gradient_kernel_quadrature(r, lam, alpha)
    assert float(ring_gradient_kernel(r, lam, alpha)) == pytest.approx(expected, rel=1e-6)


def test_small_alpha_approaches_poisson():
    rho = _random_density(11, n=120)
    near = solve_radial_alpha_pos(rho, 1e-8)
    exact = solve_radial_alpha0(rho)
    assert np.allclose(near.Sprime, exact.Sprime, rtol=1e-4, atol=1e-10)


def test_degradation_moves_the_disk_field_within_the_kernel_bound():
    """sup |S′_α − S′_0| ≤ √α (π/2) M at α = 0.01"""
    grid = RadialGrid(n=200, r_max=3.0)
    rho = RadialDensity(grid=grid, rho=np.where(grid.centers < 1.0, 1.0 / math.pi, 0.0))
    gap = np.max(np.abs(solve_radial_alpha_pos(rho, 0.01).Sprime - solve_radial_alpha0(rho).Sprime))
    assert 0.0 < gap <= 0.1 * 0.5 * math.pi * rho.mass * (1.0 + 1e-3)


def test_alpha_dispatch():
    rho = _random_density(5, n=64)
    assert solve_field(rho, 0.0).alpha == 0.0
    assert solve_field(rho, 0.3).alpha == 0.3
    with pytest.raises(ConfigError):
        solve_radial_alpha_pos(rho, 0.0)


def test_elliptic_bounds_on_gaussian():
    grid = RadialGrid(n=400, r_max=5.0)
    rho = RadialDensity(grid=grid, rho=np.exp(-2.0 * grid.centers ** 2))
    for p in (3.0, 4.0, 6.0):
        report = elliptic_bound_check(rho, p)
        assert report.radial_bound_holds
        assert report.l2_bound_holds
        assert report.sup_gradient > 0


def test_elliptic_bound_needs_p_above_two():
    grid = RadialGrid(n=16, r_max=1.0)
    with pytest.raises(InadmissibleExponents):
        elliptic_bound_check(RadialDensity(grid=grid, rho=np.ones(16)), 2.0)


def test_density_validation():
    grid = RadialGrid(n=4, r_max=1.0)
    with pytest.raises(ConfigError):
        RadialDensity(grid=grid, rho=np.array([1.0, -1.0, 0.0, 0.0]))
    with pytest.raises(ConfigError):
        RadialDensity(grid=grid, rho=np.ones(3))
    with pytest.raises(ConfigError):
        RadialGrid.from_centers(np.array([0.1, 0.3, 0.6]))
    assert RadialGrid.from_centers(grid.centers).n == 4
