import numpy as np
import pytest
from hypothesis import given, strategies as st

from sphere_jacobi.errors import NotCriticalError
from sphere_jacobi.harmonic_jacobi import constant_map, hopf_map, identity_map, x_ell_field
from sphere_jacobi.minimal_jacobi import chart_grid, clifford_torus, equator, small_circle, v_ell_section
from sphere_jacobi.sphere_core import LinearFunction, quadrature_grid, sphere_volume
from sphere_jacobi.variational_oracle import (
    VariationFamily,
    connection_variation,
    deform_map,
    energy,
    map_variation,
    richardson,
    second_variation_check,
    submanifold_variation,
)
from sphere_jacobi.yangmills_jacobi import b_ell_form, flat_connection, levi_civita_connection


def test_energy_examples():
    assert energy(constant_map(3, 2), quadrature_grid(3, 2)) == 0.0
    assert energy(identity_map(2), quadrature_grid(2, 2)) == pytest.approx(4 * np.pi, rel=1e-6)
    assert energy(identity_map(3), quadrature_grid(3, 2)) == pytest.approx(1.5 * 2 * np.pi**2, rel=1e-6)
    assert energy(hopf_map(), quadrature_grid(3, 2)) == pytest.approx(4 * sphere_volume(3), rel=1e-10)


@given(c=st.floats(-5, 5), a=st.floats(-3, 3))
def test_richardson_is_exact_for_even_polynomials(c, a):
    """Errors c h^2 + a h^4 are removed exactly."""
    steps = (1e-2, 5e-3, 2.5e-3)
    raw = [7.0 + c * h**2 + a * h**4 for h in steps]
    assert richardson(raw) == pytest.approx(7.0, abs=1e-9)


def test_deformed_map_stays_on_target():
    u = identity_map(3)
    V = x_ell_field(u, LinearFunction.coordinate(0, 4))
    us = deform_map(u, V, 0.2)
    x = quadrature_grid(3, 1).points
    assert np.allclose(np.linalg.norm(us(x), axis=-1), 1.0)


@pytest.mark.parametrize("u", [identity_map(3), identity_map(4), hopf_map()], ids=lambda u: u.name)
def test_map_second_variation(u):
    grid = quadrature_grid(u.m, 2)
    V = x_ell_field(u, LinearFunction.coordinate(1, u.m + 1))
    res = second_variation_check(map_variation(u, V, grid))
    assert res.relative_gap <= 1e-2
    assert res.fd_value < 0 and res.quadratic_form_value < 0


def test_identity_s3_quadratic_form_is_minus_norm():
    u = identity_map(3)
    grid = quadrature_grid(3, 2)
    V = x_ell_field(u, LinearFunction.coordinate(0, 4))
    q = map_variation(u, V, grid, method="analytic").quadratic_form()
    assert q == pytest.approx(-grid.integrate(np.sum(V(grid.points) ** 2, axis=-1)), rel=1e-10)


def test_connection_second_variation():
    D = levi_civita_connection(5)
    grid = quadrature_grid(5, 2)
    res = second_variation_check(connection_variation(D, b_ell_form(D, LinearFunction.coordinate(0, 6)), grid))
    assert res.relative_gap <= 1e-2
    assert res.fd_value < 0 and res.quadratic_form_value < 0


def test_flat_connection_zero_direction():
    D = flat_connection(5, 2)
    grid = quadrature_grid(5, 1)
    res = second_variation_check(connection_variation(D, b_ell_form(D, LinearFunction.coordinate(0, 6)), grid))
    assert res.fd_value == 0.0 and res.quadratic_form_value == 0.0


@pytest.mark.parametrize("M,ell", [
    (clifford_torus(), LinearFunction(np.ones(4))), (equator(2, 3), LinearFunction.coordinate(3, 4))],
    ids=["clifford", "equator"])
def test_submanifold_second_variation(M, ell):
    grid = chart_grid(M, 2, "analytic")
    family = submanifold_variation(M, v_ell_section(M, ell, "analytic"), grid, "analytic")
    res = second_variation_check(family)
    assert res.relative_gap <= 1e-2
    assert res.fd_value < 0 and res.quadratic_form_value < 0


def test_non_critical_base_is_rejected():
    M = small_circle(0.6)
    grid = chart_grid(M, 2, "analytic")
    family = submanifold_variation(M, v_ell_section(M, LinearFunction([0, 0, 1.0]), "analytic"), grid, "analytic")
    with pytest.raises(NotCriticalError):
        second_variation_check(family)
    res = second_variation_check(family, require_critical=False)
    assert abs(res.first_variation) > 1e-2


def test_variation_family_returns_base_at_zero():
    fam = VariationFamily("test", "base", None, lambda s: f"moved {s}", len, lambda: 0.0)
    assert fam(0.0) == "base" and fam(0.1) == "moved 0.1"
