"""Exact geometry of the unit round sphere S^m in R^{m+1}.

Points and tangent vectors are plain numpy arrays with the ambient
coordinate on the last axis; every function broadcasts over leading axes so
that a whole quadrature grid can be processed in one call.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import gamma, pi

import numpy as np
from scipy.special import roots_jacobi

from .errors import NonTangentError, UnsupportedDimensionError
from .tolerances import DEFAULT, ToleranceProfile

MAX_DIMENSION = 8


def _coords(x) -> np.ndarray:
    if isinstance(x, SpherePoint):
        return x.x
    return np.asarray(x, dtype=float)


@dataclass(frozen=True)
class SpherePoint:
    x: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float).reshape(-1)
        if x.size < 2:
            raise UnsupportedDimensionError("a sphere point needs at least two ambient coordinates")
        norm = np.linalg.norm(x)
        if norm == 0.0:
            raise ValueError("cannot normalize the zero vector onto the sphere")
        object.__setattr__(self, "x", x / norm)

    @property
    def m(self) -> int:
        return self.x.size - 1


@dataclass(frozen=True)
class LinearFunction:
    """The restriction to the sphere of x -> <a, x>."""

    a: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "a", np.asarray(self.a, dtype=float).reshape(-1))

    @classmethod
    def coordinate(cls, index: int, dim: int) -> "LinearFunction":
        a = np.zeros(dim)
        a[index] = 1.0
        return cls(a)

    @classmethod
    def basis(cls, dim: int) -> list["LinearFunction"]:
        """Coordinate basis of the (m+1)-dimensional space of linear functions."""
        return [cls.coordinate(i, dim) for i in range(dim)]

    def __call__(self, x) -> np.ndarray:
        return _coords(x) @ self.a

    def gradient(self, x) -> np.ndarray:
        return grad_linear(self, x)

    def __add__(self, other: "LinearFunction") -> "LinearFunction":
        return LinearFunction(self.a + other.a)

    def __rmul__(self, scalar: float) -> "LinearFunction":
        return LinearFunction(scalar * self.a)

    def rotated(self, rotation: np.ndarray) -> "LinearFunction":
        """The function x -> l(R^{-1} x) for an orthogonal R."""
        return LinearFunction(rotation @ self.a)


@dataclass(frozen=True)
class TangentFrame:
    base: np.ndarray
    vectors: np.ndarray  # (..., m, m+1)


@dataclass(frozen=True)
class QuadratureGrid:
    m: int
    level: int
    points: np.ndarray  # (N, m+1)
    weights: np.ndarray  # (N,)

    def nodes(self) -> list[tuple[SpherePoint, float]]:
        return [(SpherePoint(p), float(w)) for p, w in zip(self.points, self.weights)]

    def integrate(self, values) -> np.ndarray:
        """Weighted sum over the first axis of ``values``."""
        values = np.asarray(values)
        return np.tensordot(self.weights, values, axes=(0, 0))

    @property
    def size(self) -> int:
        return self.weights.size


def sphere_volume(m: int) -> float:
    return 2.0 * pi ** ((m + 1) / 2) / gamma((m + 1) / 2)


def grad_linear(ell: LinearFunction, x) -> np.ndarray:
    x = _coords(x)
    return ell.a - (x @ ell.a)[..., None] * x


def _check_tangent(x: np.ndarray, vec: np.ndarray, tol: float, what: str) -> None:
    off = np.abs(np.einsum("...i,...i->...", x, vec))
    scale = np.maximum(1.0, np.linalg.norm(vec, axis=-1))
    if np.any(off > tol * scale):
        raise NonTangentError(f"{what} is not tangent at the base point (|<v,x>| = {np.max(off):.3e})")


def hessian_linear(ell: LinearFunction, x, X, Y, profile: ToleranceProfile = DEFAULT) -> np.ndarray:
    """Closed-form Hessian of a linear function on the sphere: -l(x) <X, Y>."""
    x = _coords(x)
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    _check_tangent(x, X, profile.tangency_tol, "X")
    _check_tangent(x, Y, profile.tangency_tol, "Y")
    return -ell(x) * np.einsum("...i,...i->...", X, Y)


def hessian_linear_fd(ell: LinearFunction, x, X, Y, h: float | None = None,
                      profile: ToleranceProfile = DEFAULT) -> np.ndarray:
    """Hessian by second central differences along geodesics plus polarization."""
    h = profile.fd_step_second if h is None else h
    x = _coords(x)
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)

    def along(v):
        return (ell(geodesic(x, v, h)) - 2.0 * ell(x) + ell(geodesic(x, v, -h))) / h**2

    return 0.5 * (along(X + Y) - along(X) - along(Y))


def tangent_frame(x) -> np.ndarray:
    """Deterministic orthonormal frame of T_x S^m, shape (..., m, m+1).

    The coordinate axis carrying the largest |x_i| is dropped; the remaining
    axes are projected onto x^perp and orthonormalized in ascending order.
    """
    x = _coords(x)
    lead = x.shape[:-1]
    d = x.shape[-1]
    flat = x.reshape(-1, d)
    n = flat.shape[0]
    drop = np.argmax(np.abs(flat), axis=1)
    j = np.arange(d - 1)
    keep = j[None, :] + (j[None, :] >= drop[:, None])
    frame = np.zeros((n, d - 1, d))
    rows = np.arange(n)
    for k in range(d - 1):
        axis = keep[:, k]
        v = -flat * flat[rows, axis][:, None]
        v[rows, axis] += 1.0
        for i in range(k):
            v -= np.einsum("ni,ni->n", v, frame[:, i])[:, None] * frame[:, i]
        frame[:, k] = v / np.linalg.norm(v, axis=1, keepdims=True)
    return frame.reshape(lead + (d - 1, d))


def make_frame(x) -> TangentFrame:
    x = _coords(x)
    return TangentFrame(base=x, vectors=tangent_frame(x))


def random_tangent_frame(x, rng: np.random.Generator) -> np.ndarray:
    """A random orthonormal frame at each point (rotation of the default one)."""
    frame = tangent_frame(x)
    m = frame.shape[-2]
    q, r = np.linalg.qr(rng.standard_normal(frame.shape[:-2] + (m, m)))
    q = q * np.sign(np.diagonal(r, axis1=-2, axis2=-1))[..., None, :]
    return np.einsum("...ij,...jk->...ik", np.swapaxes(q, -1, -2), frame)


def geodesic(x, v, t: float) -> np.ndarray:
    x = _coords(x)
    v = np.asarray(v, dtype=float)
    speed = np.linalg.norm(v, axis=-1, keepdims=True)
    theta = t * speed
    return np.cos(theta) * x + t * np.sinc(theta / pi) * v


def geodesic_velocity(x, v, t: float) -> np.ndarray:
    x = _coords(x)
    v = np.asarray(v, dtype=float)
    speed = np.linalg.norm(v, axis=-1, keepdims=True)
    theta = t * speed
    return -speed * np.sin(theta) * x + np.cos(theta) * v


def plane_rotation(p: np.ndarray, q: np.ndarray, theta) -> np.ndarray:
    """Rotation by ``theta`` in the plane spanned by orthonormal p, q.

    ``q`` may be zero, in which case the identity is returned.  The rotation
    carries p to cos(theta) p + sin(theta) q and is the identity on the
    orthogonal complement of the plane.
    """
    theta = np.asarray(theta, dtype=float)
    d = p.shape[-1]
    c = np.cos(theta)[..., None, None]
    s = np.sin(theta)[..., None, None]
    pp = p[..., :, None] * p[..., None, :]
    qq = q[..., :, None] * q[..., None, :]
    qp = q[..., :, None] * p[..., None, :]
    return np.eye(d) + (c - 1.0) * (pp + qq) + s * (qp - np.swapaxes(qp, -1, -2))


def _unit_or_zero(v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    norm = np.linalg.norm(v, axis=-1)
    safe = np.where(norm > 0.0, norm, 1.0)
    return v / safe[..., None], norm


def geodesic_transport_matrix(x, v, t: float) -> np.ndarray:
    """Orthogonal matrix carrying T_x S^m to T_{geodesic(x,v,t)} S^m by parallel transport."""
    x = _coords(x)
    unit, speed = _unit_or_zero(np.asarray(v, dtype=float))
    return plane_rotation(x, unit, t * speed)


class PlaneRotation:
    """Rotation by ``theta`` in the plane of orthonormal (p, q), applied without forming matrices.

    Acts on the last axis; ``q = 0`` gives the identity.
    """

    def __init__(self, p, q, theta):
        self.p = np.asarray(p, dtype=float)
        self.q = np.asarray(q, dtype=float)
        theta = np.asarray(theta, dtype=float)[..., None]
        theta = np.where(np.any(self.q != 0.0, axis=-1, keepdims=True), theta, 0.0)
        self.c1 = np.cos(theta) - 1.0
        self.s = np.sin(theta)

    def _spawn(self, p, q, c1, s) -> "PlaneRotation":
        out = object.__new__(PlaneRotation)
        out.p, out.q, out.c1, out.s = p, q, c1, s
        return out

    def apply(self, w):
        pw = np.einsum("...i,...i->...", self.p, w)[..., None]
        qw = np.einsum("...i,...i->...", self.q, w)[..., None]
        out = w + self.p * (self.c1 * pw - self.s * qw)
        out += self.q * (self.c1 * qw + self.s * pw)
        return out

    def expand(self) -> "PlaneRotation":
        """Insert a broadcast axis just before the vector axis."""
        return self._spawn(self.p[..., None, :], self.q[..., None, :], self.c1[..., None, :], self.s[..., None, :])

    def inverse(self) -> "PlaneRotation":
        return self._spawn(self.p, self.q, self.c1, -self.s)

    def conj(self, a):
        """R a R^T for matrices on the last two axes."""
        rows = self.expand()
        b = rows.apply(a)
        return np.swapaxes(rows.apply(np.swapaxes(b, -1, -2)), -1, -2)

    def matrix(self) -> np.ndarray:
        d = self.p.shape[-1]
        return np.swapaxes(self.expand().apply(np.eye(d)), -1, -2)


def geodesic_transport(x, v, t: float) -> PlaneRotation:
    """Parallel transport T_x S^m -> T_{geodesic(x,v,t)} S^m as a matrix-free rotation."""
    x = _coords(x)
    unit, speed = _unit_or_zero(np.asarray(v, dtype=float))
    x = np.broadcast_to(x, unit.shape)
    return PlaneRotation(x, unit, t * speed)


def random_sphere_points(m: int, count: int, rng: np.random.Generator) -> np.ndarray:
    pts = rng.standard_normal((count, m + 1))
    return pts / np.linalg.norm(pts, axis=1, keepdims=True)


def random_tangent_vectors(x: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal(x.shape)
    return v - np.einsum("...i,...i->...", v, x)[..., None] * x


def random_rotation(dim: int, rng: np.random.Generator) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((dim, dim)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


def _polar_rule(count: int, exponent: float) -> tuple[np.ndarray, np.ndarray]:
    # nodes in t = cos(angle) for the weight sin(angle)^exponent d(angle)
    a = (exponent - 1.0) / 2.0
    t, w = roots_jacobi(count, a, a)
    return t, w


def quadrature_grid(m: int, level: int) -> QuadratureGrid:
    """Deterministic product quadrature on S^m.

    m = 1 uses the uniform trapezoid rule; m >= 2 uses Gauss-Jacobi nodes in
    the cosine of each polar angle (the weight sin^k absorbed exactly) times a
    uniform azimuthal rule.  Level L uses L + 2 polar nodes per angle, so the
    rule integrates polynomials of degree 2L + 3 exactly.
    """
    if not isinstance(m, (int, np.integer)) or not 1 <= m <= MAX_DIMENSION:
        raise UnsupportedDimensionError(f"quadrature supports sphere dimensions 1..{MAX_DIMENSION}, got m={m!r}")
    if level < 1:
        raise ValueError(f"grid level must be >= 1, got {level}")
    q = level + 2
    if m == 1:
        n_phi = 4 * q
        phi = 2.0 * pi * np.arange(n_phi) / n_phi
        pts = np.stack([np.cos(phi), np.sin(phi)], axis=1)
        w = np.full(n_phi, 2.0 * pi / n_phi)
        return QuadratureGrid(m=1, level=level, points=pts, weights=w)

    n_phi = 2 * q
    phi = 2.0 * pi * np.arange(n_phi) / n_phi
    w_phi = np.full(n_phi, 2.0 * pi / n_phi)
    rules = [_polar_rule(q, m - k) for k in range(1, m)]  # exponent of sin for angle k

    grids = np.meshgrid(*[r[0] for r in rules], phi, indexing="ij")
    wgrids = np.meshgrid(*[r[1] for r in rules], w_phi, indexing="ij")
    cosines = [g.reshape(-1) for g in grids[:-1]]
    azimuth = grids[-1].reshape(-1)
    weights = np.prod([g.reshape(-1) for g in wgrids], axis=0)

    n = azimuth.size
    pts = np.empty((n, m + 1))
    running = np.ones(n)
    for k, t in enumerate(cosines):
        pts[:, k] = running * t
        running = running * np.sqrt(np.clip(1.0 - t * t, 0.0, None))
    pts[:, m - 1] = running * np.cos(azimuth)
    pts[:, m] = running * np.sin(azimuth)
    pts /= np.linalg.norm(pts, axis=1, keepdims=True)
    return QuadratureGrid(m=m, level=level, points=pts, weights=weights)
