import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sphere_jacobi.errors import DegenerateInputError
from sphere_jacobi.forms_calculus import AdjointBundle, exterior_d, random_polynomial_form
from sphere_jacobi.sphere_core import (
    LinearFunction,
    quadrature_grid,
    random_rotation,
    random_sphere_points,
    random_tangent_vectors,
    sphere_volume,
    tangent_frame,
)
from sphere_jacobi.variational_oracle import sphere_integral_of_pairs, ym_energy
from sphere_jacobi.yangmills_jacobi import (
    b_ell_form,
    bianchi_residual,
    coclosed_check,
    commutator,
    commutator_identity_check,
    constant_endomorphism_form,
    eigen_residual_ym,
    flat_connection,
    get_connection,
    hodge_laplacian_one_form,
    jacobi_apply_ym,
    laplacian_identity_residual,
    levi_civita_connection,
    multiplicity_bound_ym,
    perturb,
    perturbed_control,
    random_antisymmetric_curvature,
    script_R_apply,
    script_R_bruteforce,
    synthetic_commutator_residual,
    wedge,
    yang_mills_catalog,
    ym_residual,
)

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def test_catalog():
    assert list(yang_mills_catalog()) == ["flat-r2-s5", "flat-r3-s5", "levicivita-ts4", "levicivita-ts5",
                                          "levicivita-ts6", "perturbed-r3-s5"]
    with pytest.raises(KeyError):
        get_connection("nope")


def test_wedge_pairing_convention():
    rng = np.random.default_rng(0)
    z, w = rng.standard_normal(4), rng.standard_normal(4)
    A = rng.standard_normal((4, 4))
    A = A - A.T
    assert np.sum(A * wedge(z, w)) == pytest.approx((A @ w) @ z)


@given(seed=seeds, m=st.integers(2, 6), k=st.integers(2, 5))
def test_commutator_identity_on_synthetic_curvature(seed, m, k):
    """The identity is algebraic and holds for arbitrary antisymmetric values."""
    rng = np.random.default_rng(seed)
    curv = random_antisymmetric_curvature(m, k, rng, (4,))
    assert synthetic_commutator_residual(curv, rng.standard_normal((4, m))) <= 1e-10


def test_synthetic_curvature_is_antisymmetric():
    curv = random_antisymmetric_curvature(4, 3, np.random.default_rng(1))
    assert np.allclose(curv, -np.swapaxes(curv, -1, -2))
    assert np.allclose(curv, -np.swapaxes(curv, -3, -4))


@pytest.mark.parametrize("name", list(yang_mills_catalog()))
def test_commutator_identity_on_catalog(name):
    D = get_connection(name)
    rng = np.random.default_rng(2)
    x = random_sphere_points(D.m, 100, rng)
    X = random_tangent_vectors(x, rng)
    a = rng.standard_normal((100, D.m + 1))
    worst = max(commutator_identity_check(D, LinearFunction(a[i]), x[i], X[i]) for i in range(100))
    assert worst <= 1e-10


def test_script_r_matches_bruteforce():
    D = levi_civita_connection(5)
    rng = np.random.default_rng(3)
    x = random_sphere_points(5, 1, rng)[0]
    X = random_tangent_vectors(x, rng)
    B = b_ell_form(D, LinearFunction(rng.standard_normal(6)))
    frame = tangent_frame(x)
    assert np.allclose(script_R_apply(D, B, x, X, frame), script_R_bruteforce(D, B, x, X, frame), atol=1e-12)


def test_script_r_trivial_cases():
    rng = np.random.default_rng(4)
    flat = flat_connection(5, 3)
    x = random_sphere_points(5, 3, rng)
    X = random_tangent_vectors(x, rng)
    B = random_polynomial_form(flat.adjoint, 1, rng)
    assert np.allclose(script_R_apply(flat, B, x, X), 0.0)
    lc = levi_civita_connection(5)
    assert np.allclose(script_R_apply(lc, b_ell_form(lc, LinearFunction(np.zeros(6))), x, X), 0.0)


@pytest.mark.parametrize("name", ["flat-r2-s5", "levicivita-ts4", "levicivita-ts5"])
def test_catalog_yang_mills(name):
    D = get_connection(name)
    assert ym_residual(D, quadrature_grid(D.m, 2)) <= 5e-4


def test_negative_control_is_not_yang_mills():
    D = perturbed_control()
    assert ym_residual(D, quadrature_grid(5, 1)) > 1e-2
    assert not D.claims_yang_mills


def test_b_ell_of_flat_vanishes():
    D = flat_connection(5, 2)
    x = random_sphere_points(5, 4, np.random.default_rng(5))
    X = random_tangent_vectors(x, np.random.default_rng(6))
    assert np.all(b_ell_form(D, LinearFunction(np.ones(6)))(x, X) == 0.0)
    assert multiplicity_bound_ym(D, quadrature_grid(5, 1)).rank == 0
    with pytest.raises(DegenerateInputError):
        eigen_residual_ym(D, LinearFunction.coordinate(0, 6), quadrature_grid(5, 1))


@pytest.mark.parametrize("m", [4, 5])
@pytest.mark.parametrize("method,tol", [("analytic", 1e-8), ("fd", 5e-4)])
def test_levi_civita_eigenvalue(m, method, tol):
    D = levi_civita_connection(m)
    grid = quadrature_grid(m, 2 if method == "analytic" else 1)
    for ell in (LinearFunction.coordinate(0, m + 1), LinearFunction(np.arange(1.0, m + 2))):
        r = eigen_residual_ym(D, ell, grid, method)
        assert r.eigenvalue == -(m - 4)
        assert r.residual <= tol


@pytest.mark.parametrize("m,rank", [(4, 5), (5, 6), (6, 7)])
def test_levi_civita_rank(m, rank):
    assert multiplicity_bound_ym(levi_civita_connection(m), quadrature_grid(m, 1)).rank == rank


def test_coclosed_b_ell():
    D = levi_civita_connection(5)
    grid = quadrature_grid(5, 1)
    assert coclosed_check(D, LinearFunction(np.ones(6)), grid) <= 5e-4
    assert coclosed_check(flat_connection(5, 2), LinearFunction(np.ones(6)), grid) == 0.0


def test_bianchi_and_laplacian_identity():
    D = levi_civita_connection(4)
    grid = quadrature_grid(4, 1)
    assert bianchi_residual(D, grid) <= 5e-4
    assert laplacian_identity_residual(D, LinearFunction.coordinate(2, 5), grid) <= 1e-3
    assert bianchi_residual(perturbed_control(), quadrature_grid(5, 1)) <= 5e-4


def test_flat_jacobi_on_exact_form_vanishes():
    # J_D(dl (x) A0) = d^* d dl (x) A0 = 0; the Hodge Laplacian gives m dl (x) A0 instead
    m = 5
    D = flat_connection(m, 3)
    A0 = np.array([[0.0, 1.0, 0.0], [-1.0, 0.0, 2.0], [0.0, -2.0, 0.0]])
    ell = LinearFunction.coordinate(1, m + 1)
    form = constant_endomorphism_form(D.bundle, ell, A0)
    rng = np.random.default_rng(7)
    x = random_sphere_points(m, 5, rng)
    X = random_tangent_vectors(x, rng)
    for method, tol in (("analytic", 1e-10), ("fd", 5e-4)):
        assert np.max(np.abs(jacobi_apply_ym(D, form, x, X, method=method))) <= tol
        hodge = hodge_laplacian_one_form(form, x, X, method=method)
        assert np.max(np.abs(hodge - m * form(x, X))) <= 10 * tol


def test_ym_energy_levi_civita_closed_form():
    m = 5
    D = levi_civita_connection(m)
    # |R|^2 = sum_{i<j} |e_i e_j^T - e_j e_i^T|^2 = m(m-1)
    expected = 0.5 * m * (m - 1) * sphere_volume(m)
    assert ym_energy(D, quadrature_grid(m, 2)) == pytest.approx(expected, rel=1e-10)
    assert ym_energy(D, quadrature_grid(m, 3)) == pytest.approx(ym_energy(D, quadrature_grid(m, 2)), rel=1e-3)
    assert sphere_integral_of_pairs(quadrature_grid(m, 1), D) == pytest.approx(expected, rel=1e-10)
    assert ym_energy(flat_connection(5, 2), quadrature_grid(5, 1)) == 0.0


def test_ym_energy_rotation_invariant():
    grid = quadrature_grid(5, 2)
    R = random_rotation(6, np.random.default_rng(8))
    for D in (levi_civita_connection(5), perturbed_control()):
        # the energy density is a low-degree polynomial, integrated exactly at this level
        assert ym_energy(D, grid, R) == pytest.approx(ym_energy(D, grid), rel=1e-10)


@given(seed=seeds)
@settings(max_examples=5, deadline=None)
def test_perturbed_curvature_matches_transport(seed):
    """Curvature R + s d_D B + s^2 B ^ B equals d_D d_D on sections of the perturbed bundle."""
    rng = np.random.default_rng(seed)
    D = levi_civita_connection(3)
    B = random_polynomial_form(AdjointBundle(D.bundle), 1, rng, scale=0.3)
    P = perturb(D, B, 0.4)
    s = random_polynomial_form(P.bundle, 0, rng)
    x = random_sphere_points(3, 2, rng)
    X, Y = random_tangent_vectors(x, rng), random_tangent_vectors(x, rng)
    dd = exterior_d(exterior_d(s))(x, X, Y)
    expected = P.bundle.act(P.curvature(x, X, Y), s(x))
    assert np.allclose(dd, expected, atol=1e-4 * (1 + np.abs(expected).max()))


def test_curvature_is_skew_valued():
    D = perturbed_control()
    rng = np.random.default_rng(9)
    x = random_sphere_points(5, 4, rng)
    F = D.curvature(x, random_tangent_vectors(x, rng), random_tangent_vectors(x, rng))
    assert np.allclose(F, -np.swapaxes(F, -1, -2))
    assert np.allclose(commutator(F, F), 0.0)
