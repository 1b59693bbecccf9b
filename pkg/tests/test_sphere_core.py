import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sphere_jacobi.errors import NonTangentError, UnsupportedDimensionError
from sphere_jacobi.sphere_core import (
    LinearFunction,
    PlaneRotation,
    SpherePoint,
    geodesic,
    geodesic_transport,
    geodesic_transport_matrix,
    geodesic_velocity,
    grad_linear,
    hessian_linear,
    hessian_linear_fd,
    quadrature_grid,
    random_rotation,
    random_sphere_points,
    random_tangent_frame,
    random_tangent_vectors,
    sphere_volume,
    tangent_frame,
)

dims = st.integers(min_value=1, max_value=6)
seeds = st.integers(min_value=0, max_value=2**32 - 1)


def test_sphere_volumes():
    assert sphere_volume(1) == pytest.approx(2 * np.pi)
    assert sphere_volume(2) == pytest.approx(4 * np.pi)
    assert sphere_volume(3) == pytest.approx(2 * np.pi**2)


@pytest.mark.parametrize("m", [1, 2, 3, 4, 5, 6])
def test_quadrature_integrates_constants_and_quadratics(m):
    grid = quadrature_grid(m, 2)
    assert grid.integrate(np.ones(grid.size)) == pytest.approx(sphere_volume(m), rel=1e-12)
    for i in range(m + 1):
        assert grid.integrate(grid.points[:, i] ** 2) == pytest.approx(sphere_volume(m) / (m + 1), rel=1e-12)
    assert np.allclose(np.linalg.norm(grid.points, axis=1), 1.0)


@pytest.mark.parametrize("m", [2, 3, 5])
def test_quadrature_quartic_moment(m):
    # int x_0^4 = 3 vol / ((m+1)(m+3))
    grid = quadrature_grid(m, 2)
    expected = 3 * sphere_volume(m) / ((m + 1) * (m + 3))
    assert grid.integrate(grid.points[:, 0] ** 4) == pytest.approx(expected, rel=1e-12)


def test_quadrature_is_deterministic():
    a, b = quadrature_grid(4, 2), quadrature_grid(4, 2)
    assert np.array_equal(a.points, b.points) and np.array_equal(a.weights, b.weights)


def test_quadrature_rejects_large_dimension():
    with pytest.raises(UnsupportedDimensionError):
        quadrature_grid(9, 1)


def test_sphere_point_normalizes():
    p = SpherePoint([3.0, 4.0])
    assert np.allclose(p.x, [0.6, 0.8]) and p.m == 1
    with pytest.raises(ValueError):
        SpherePoint([0.0, 0.0, 0.0])


@given(m=dims, seed=seeds)
def test_tangent_frame_is_orthonormal_and_tangent(m, seed):
    """Frames are orthonormal and perpendicular to the base point."""
    x = random_sphere_points(m, 5, np.random.default_rng(seed))
    f = tangent_frame(x)
    assert f.shape == (5, m, m + 1)
    assert np.allclose(np.einsum("nij,nkj->nik", f, f), np.eye(m), atol=1e-12)
    assert np.allclose(np.einsum("nij,nj->ni", f, x), 0.0, atol=1e-12)


@given(m=dims, seed=seeds)
def test_random_frame_is_orthonormal(m, seed):
    rng = np.random.default_rng(seed)
    x = random_sphere_points(m, 3, rng)
    f = random_tangent_frame(x, rng)
    assert np.allclose(np.einsum("nij,nkj->nik", f, f), np.eye(m), atol=1e-12)


@given(m=dims, seed=seeds)
def test_gradient_is_tangent_projection(m, seed):
    rng = np.random.default_rng(seed)
    x = random_sphere_points(m, 4, rng)
    ell = LinearFunction(rng.standard_normal(m + 1))
    g = grad_linear(ell, x)
    assert np.allclose(np.sum(g * x, axis=1), 0.0, atol=1e-12)
    assert np.allclose(np.sum(g**2, axis=1) + ell(x) ** 2, ell.a @ ell.a)


@given(m=st.integers(2, 5), seed=seeds)
@settings(max_examples=25)
def test_hessian_closed_form_matches_differences(m, seed):
    """Hess l = -l g agrees with geodesic second differences."""
    rng = np.random.default_rng(seed)
    x = random_sphere_points(m, 4, rng)
    X, Y = random_tangent_vectors(x, rng), random_tangent_vectors(x, rng)
    ell = LinearFunction(rng.standard_normal(m + 1))
    exact = hessian_linear(ell, x, X, Y)
    approx = hessian_linear_fd(ell, x, X, Y)
    scale = np.linalg.norm(ell.a) * np.linalg.norm(X, axis=1) * np.linalg.norm(Y, axis=1)
    assert np.all(np.abs(exact - approx) <= 1e-5 * (1 + scale))


def test_hessian_rejects_non_tangent_input():
    x = np.array([1.0, 0.0, 0.0])
    with pytest.raises(NonTangentError):
        hessian_linear(LinearFunction([1.0, 0, 0]), x, np.array([1.0, 0, 0]), np.array([0, 1.0, 0]))


@given(m=dims, seed=seeds, t=st.floats(-3.0, 3.0))
def test_geodesics_stay_on_sphere(m, seed, t):
    rng = np.random.default_rng(seed)
    x = random_sphere_points(m, 3, rng)
    v = random_tangent_vectors(x, rng)
    y = geodesic(x, v, t)
    assert np.allclose(np.linalg.norm(y, axis=1), 1.0)
    w = geodesic_velocity(x, v, t)
    assert np.allclose(np.sum(w * y, axis=1), 0.0, atol=1e-12)
    assert np.allclose(np.linalg.norm(w, axis=1), np.linalg.norm(v, axis=1))


def test_geodesic_with_zero_velocity_is_constant():
    x = np.array([0.0, 0.0, 1.0])
    assert np.array_equal(geodesic(x, np.zeros(3), 0.7), x)


@given(m=st.integers(2, 6), seed=seeds, t=st.floats(-2.0, 2.0))
def test_transport_carries_tangent_spaces_isometrically(m, seed, t):
    """Transport maps the initial velocity to the final velocity and preserves inner products."""
    rng = np.random.default_rng(seed)
    x = random_sphere_points(m, 3, rng)
    v = random_tangent_vectors(x, rng)
    w = random_tangent_vectors(x, rng)
    op = geodesic_transport(x, v, t)
    y = geodesic(x, v, t)
    assert np.allclose(op.apply(v), geodesic_velocity(x, v, t), atol=1e-12)
    tw = op.apply(w)
    assert np.allclose(np.sum(tw * y, axis=1), 0.0, atol=1e-12)
    assert np.allclose(np.sum(tw * op.apply(v), axis=1), np.sum(w * v, axis=1))
    assert np.allclose(op.inverse().apply(tw), w, atol=1e-12)


@given(seed=seeds)
def test_plane_rotation_matches_dense_matrix(seed):
    rng = np.random.default_rng(seed)
    x = random_sphere_points(4, 3, rng)
    v = random_tangent_vectors(x, rng)
    dense = geodesic_transport_matrix(x, v, 0.4)
    op = geodesic_transport(x, v, 0.4)
    assert np.allclose(op.matrix(), dense, atol=1e-12)
    a = rng.standard_normal((3, 5, 5))
    assert np.allclose(op.conj(a), dense @ a @ np.swapaxes(dense, -1, -2), atol=1e-12)


def test_plane_rotation_with_zero_direction_is_identity():
    op = PlaneRotation(np.array([1.0, 0, 0]), np.zeros(3), 0.3)
    assert np.allclose(op.matrix(), np.eye(3))


def test_linear_function_rotation():
    rng = np.random.default_rng(1)
    R = random_rotation(4, rng)
    ell = LinearFunction(rng.standard_normal(4))
    x = random_sphere_points(3, 5, rng)
    assert np.allclose(ell.rotated(R)(x @ R.T), ell(x))
    assert np.isclose(np.linalg.det(R), 1.0)


def test_linear_basis():
    basis = LinearFunction.basis(3)
    assert [list(b.a) for b in basis] == [[1, 0, 0], [0, 1, 0], [0, 0, 1]]
    assert np.allclose((2.0 * basis[0] + basis[1]).a, [2, 1, 0])


def test_gradient_examples():
    x = np.array([1.0, 0, 0, 0])
    assert np.allclose(grad_linear(LinearFunction([1.0, 0, 0, 0]), x), 0.0)
    assert np.allclose(grad_linear(LinearFunction([1.0, 0, 0, 0]), [0, 1.0, 0, 0]), [1, 0, 0, 0])
    a = np.array([1.0, 1.0, 0, 0]) / np.sqrt(2)
    assert np.allclose(grad_linear(LinearFunction(a), x), [0, 1 / np.sqrt(2), 0, 0])


def test_hessian_examples():
    x = np.array([1.0, 0, 0, 0])
    e = np.array([0, 1.0, 0, 0])
    assert hessian_linear(LinearFunction([1.0, 0, 0, 0]), x, e, e) == pytest.approx(-1.0)
    assert hessian_linear(LinearFunction([0, 0, 0, 1.0]), x, e, e) == 0.0


def test_hessian_fd_on_many_samples():
    rng = np.random.default_rng(7)
    x = random_sphere_points(3, 100, rng)
    X, Y = random_tangent_vectors(x, rng), random_tangent_vectors(x, rng)
    ell = LinearFunction(rng.standard_normal(4))
    assert np.max(np.abs(hessian_linear(ell, x, X, Y) - hessian_linear_fd(ell, x, X, Y))) <= 5e-4


def test_frame_at_north_pole_and_determinism():
    x = np.array([0, 0, 0, 1.0])
    assert np.allclose(tangent_frame(x), np.eye(4)[:3])
    rng = np.random.default_rng(3)
    y = random_sphere_points(5, 4, rng)
    assert np.array_equal(tangent_frame(y), tangent_frame(y.copy()))


def test_quarter_geodesic_reaches_direction():
    x = np.array([1.0, 0, 0])
    v = np.array([0, 1.0, 0])
    assert np.allclose(geodesic(x, v, np.pi / 2), v)


def test_two_sphere_moments():
    grid = quadrature_grid(2, 2)
    assert np.sum(grid.weights) == pytest.approx(4 * np.pi, abs=1e-8)
    assert abs(grid.integrate(grid.points[:, 0])) <= 1e-8 * 4 * np.pi
    assert grid.integrate(grid.points[:, 0] ** 2) == pytest.approx(4 * np.pi / 3, rel=1e-6)
