"""Covariant calculus for bundle-valued forms over the round sphere.

Bundles are realized extrinsically: every fiber sits inside a fixed R^K and
parallel transport along a great circle is a K x K matrix.  Forms are
immutable evaluators ``form(x, X_1, ..., X_p)`` that broadcast over leading
axes.  Two evaluation routes are offered for every differential operator:

``fd``
    central differences of the transported-back values along geodesics,
    with the tangent arguments carried by exact Levi-Civita transport;
``analytic``
    closed-form covariant derivatives supplied with the form.

The curvature of the sphere enters only through the closed form
R(X, Y) Z = <Y, Z> X - <X, Z> Y, never by differentiating transport.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Callable, Optional

import numpy as np

from .errors import CapabilityError, UnsupportedDegreeError
from .sphere_core import (
    _coords,
    geodesic,
    PlaneRotation,
    geodesic_transport,
    geodesic_transport_matrix,
    geodesic_velocity,
    tangent_frame,
)
from .tolerances import DEFAULT, ToleranceProfile

METHODS = ("analytic", "fd")
MAX_DEGREE = 3


def _dot(a, b):
    return np.einsum("...i,...i->...", a, b)


def _outer(a, b):
    return a[..., :, None] * b[..., None, :]


def _matvec(A, v):
    return (A @ v[..., None])[..., 0]


def map_chunks(fn: Callable, points: np.ndarray, chunk: int = 1024) -> np.ndarray:
    """Evaluate ``fn`` on consecutive blocks of grid points and concatenate (bounds peak memory)."""
    return np.concatenate([fn(points[i:i + chunk]) for i in range(0, len(points), chunk)], axis=0)


def sphere_curvature(X, Y, Z):
    """Riemann tensor of the unit sphere, R(X, Y) Z = <Y, Z> X - <X, Z> Y."""
    return _dot(Y, Z)[..., None] * X - _dot(X, Z)[..., None] * Y


def rk4_fundamental(generator: Callable[[float], np.ndarray], t: float, steps: int) -> np.ndarray:
    """Fundamental matrix of Phi' = A(tau) Phi on [0, t], Phi(0) = I, by classical RK4."""
    a0 = generator(0.0)
    phi = np.broadcast_to(np.eye(a0.shape[-1]), a0.shape).copy()
    dt = t / steps
    tau = 0.0
    a_start = a0
    for _ in range(steps):
        a_mid = generator(tau + 0.5 * dt)
        a_end = generator(tau + dt)
        k1 = a_start @ phi
        k2 = a_mid @ (phi + 0.5 * dt * k1)
        k3 = a_mid @ (phi + 0.5 * dt * k2)
        k4 = a_end @ (phi + dt * k3)
        phi = phi + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        tau += dt
        a_start = a_end
    return phi


def rk4_orthogonal(generator: Callable[[float], np.ndarray], t: float, steps: int) -> np.ndarray:
    """rk4_fundamental for skew generators, snapped to its polar (orthogonal) factor."""
    u, _, vt = np.linalg.svd(rk4_fundamental(generator, t, steps))
    return u @ vt


# ---------------------------------------------------------------------------
# bundles


class MatrixTransport:
    """Dense transport matrix together with its inverse."""

    def __init__(self, q, qinv):
        self.q = q
        self.qinv = qinv

    def apply(self, w):
        return _matvec(self.q, w)

    def conj(self, a):
        return self.q @ a @ self.qinv

    def expand(self) -> "MatrixTransport":
        return MatrixTransport(self.q[..., None, :, :], self.qinv[..., None, :, :])


class VectorBundle:
    """Metric connection on a Riemannian vector bundle over S^m.

    Subclasses provide ``transport_matrix`` (fiber at geodesic(x, v, t) back
    to the fiber at x), ``curvature`` and ``projector``.
    """

    m: int
    ambient: int
    rank: int
    name: str = "bundle"
    orthogonal_transport = True

    @property
    def fiber_shape(self) -> tuple:
        return (self.ambient,)

    def transport_operator(self, x, v, t, profile: ToleranceProfile = DEFAULT):
        """Transport back to x as an operator with ``apply``, ``conj`` and ``expand``."""
        q = self.transport_matrix(x, v, t, profile)
        qinv = np.swapaxes(q, -1, -2) if self.orthogonal_transport else np.linalg.inv(q)
        return MatrixTransport(q, qinv)

    def apply_transport(self, op, value):
        return op.apply(value)

    def transport(self, x, v, t, value, profile: ToleranceProfile = DEFAULT):
        if t == 0.0:
            return value
        return self.apply_transport(self.transport_operator(x, v, t, profile), value)

    def act(self, endo, value):
        """Action of a fiber endomorphism (e.g. a curvature value) on a fiber value."""
        return _matvec(endo, value)

    def project(self, x, value):
        return _matvec(self.projector(x), value)

    def fiber_norm_sq(self, value):
        return np.sum(value**2, axis=-1)

    def inner(self, a, b):
        return np.sum(a * b, axis=-1)

    def projector(self, x):
        raise NotImplementedError

    def transport_matrix(self, x, v, t, profile: ToleranceProfile = DEFAULT):
        raise NotImplementedError

    def curvature(self, x, X, Y):
        raise NotImplementedError


class TrivialBundle(VectorBundle):
    """S^m x R^k with the connection d + potential (flat when potential is None)."""

    def __init__(self, m: int, k: int, potential: Optional["ConnectionPotential"] = None, name: str | None = None):
        self.m = m
        self.ambient = k
        self.rank = k
        self.potential = potential
        self.orthogonal_transport = True
        self.name = name or (f"flat-r{k}-s{m}" if potential is None else f"perturbed-r{k}-s{m}")

    @property
    def is_flat(self) -> bool:
        return self.potential is None

    def projector(self, x):
        x = _coords(x)
        return np.broadcast_to(np.eye(self.ambient), x.shape[:-1] + (self.ambient, self.ambient))

    def project(self, x, value):
        return value

    def transport_matrix(self, x, v, t, profile: ToleranceProfile = DEFAULT):
        x = _coords(x)
        shape = np.broadcast_shapes(x.shape, np.shape(v))[:-1] + (self.ambient, self.ambient)
        if self.potential is None or t == 0.0:
            return np.broadcast_to(np.eye(self.ambient), shape).copy()

        def generator(tau):
            y = geodesic(x, v, tau)
            return -self.potential(y, geodesic_velocity(x, v, tau))

        return np.swapaxes(rk4_orthogonal(generator, t, profile.rk4_substeps), -1, -2)

    def curvature(self, x, X, Y):
        x = _coords(x)
        shape = np.broadcast_shapes(x.shape, np.shape(X), np.shape(Y))[:-1] + (self.ambient, self.ambient)
        if self.potential is None:
            return np.zeros(shape)
        return np.broadcast_to(self.potential.curvature(x, X, Y), shape)


class SphereTangentBundle(VectorBundle):
    """TS^m with its Levi-Civita connection; fibers x^perp inside R^{m+1}."""

    def __init__(self, m: int):
        self.m = m
        self.ambient = m + 1
        self.rank = m
        self.name = f"levicivita-ts{m}"

    def projector(self, x):
        x = _coords(x)
        return np.eye(self.ambient) - _outer(x, x)

    def transport_matrix(self, x, v, t, profile: ToleranceProfile = DEFAULT):
        return np.swapaxes(geodesic_transport_matrix(x, v, t), -1, -2)

    def transport_operator(self, x, v, t, profile: ToleranceProfile = DEFAULT):
        return geodesic_transport(x, v, t).inverse()

    def curvature(self, x, X, Y):
        X = np.asarray(X, dtype=float)
        Y = np.asarray(Y, dtype=float)
        return _outer(X, Y) - _outer(Y, X)


class AdjointBundle(VectorBundle):
    """so(E): skew endomorphisms of a vector bundle E, with the induced connection."""

    def __init__(self, base: VectorBundle):
        self.base = base
        self.m = base.m
        self.ambient = base.ambient
        self.rank = base.rank * (base.rank - 1) // 2
        self.name = f"so({base.name})"
        self.orthogonal_transport = base.orthogonal_transport

    @property
    def fiber_shape(self) -> tuple:
        return (self.ambient, self.ambient)

    def transport_operator(self, x, v, t, profile: ToleranceProfile = DEFAULT):
        return self.base.transport_operator(x, v, t, profile)

    def apply_transport(self, op, value):
        return op.conj(value)

    def act(self, endo, value):
        return endo @ value - value @ endo

    def projector(self, x):
        return self.base.projector(x)

    def project(self, x, value):
        p = self.base.projector(x)
        a = p @ value @ p
        return 0.5 * (a - np.swapaxes(a, -1, -2))

    def fiber_norm_sq(self, value):
        return np.sum(value**2, axis=(-2, -1))

    def inner(self, a, b):
        return np.sum(a * b, axis=(-2, -1))

    def curvature(self, x, X, Y):
        return self.base.curvature(x, X, Y)

    @property
    def is_flat(self) -> bool:
        return getattr(self.base, "is_flat", False)


class StackedBundle(VectorBundle):
    """``count`` independent copies of a bundle, evaluated in one batch.

    Used to push many random forms through the same operators at once; norms
    reduce over the inner fiber only and keep the copy axis.
    """

    def __init__(self, inner_bundle: VectorBundle, count: int):
        self.inner_bundle = inner_bundle
        self.count = count
        self.m = inner_bundle.m
        self.ambient = inner_bundle.ambient
        self.rank = inner_bundle.rank
        self.name = f"{inner_bundle.name}x{count}"

    @property
    def fiber_shape(self) -> tuple:
        return (self.count,) + self.inner_bundle.fiber_shape

    def transport_operator(self, x, v, t, profile: ToleranceProfile = DEFAULT):
        return self.inner_bundle.transport_operator(x, v, t, profile).expand()

    def apply_transport(self, op, value):
        return self.inner_bundle.apply_transport(op, value)

    def act(self, endo, value):
        return self.inner_bundle.act(endo[..., None, :, :], value)

    def projector(self, x):
        return self.inner_bundle.projector(x)

    def project(self, x, value):
        x = _coords(x)
        return self.inner_bundle.project(x[..., None, :], value)

    def fiber_norm_sq(self, value):
        return self.inner_bundle.fiber_norm_sq(value)

    def inner(self, a, b):
        return self.inner_bundle.inner(a, b)

    def curvature(self, x, X, Y):
        return self.inner_bundle.curvature(x, X, Y)


class ConnectionPotential:
    """Skew-matrix valued 1-form G(x)(X) = sum_i X_i (A_i + sum_j x_j C_ij) on S^m."""

    def __init__(self, constant: np.ndarray, linear: np.ndarray):
        self.constant = np.asarray(constant, dtype=float)  # (d, k, k)
        self.linear = np.asarray(linear, dtype=float)  # (d, d, k, k): index i, j
        self.constant = 0.5 * (self.constant - np.swapaxes(self.constant, -1, -2))
        self.linear = 0.5 * (self.linear - np.swapaxes(self.linear, -1, -2))

    @classmethod
    def random(cls, m: int, k: int, rng: np.random.Generator, scale: float = 1.0) -> "ConnectionPotential":
        d = m + 1
        return cls(scale * rng.standard_normal((d, k, k)), scale * rng.standard_normal((d, d, k, k)))

    def __call__(self, x, X):
        x = _coords(x)
        g = self.constant + np.einsum("...j,ijab->...iab", x, self.linear)
        return np.einsum("...i,...iab->...ab", np.asarray(X, dtype=float), g)

    def exterior_derivative(self, x, X, Y):
        # d(sum_i G_i dx^i)(X, Y) = sum_ij C_ij (X_j Y_i - Y_j X_i); exact restriction to the sphere
        X = np.asarray(X, dtype=float)
        Y = np.asarray(Y, dtype=float)
        w = _outer(Y, X) - _outer(X, Y)  # w[i, j] = Y_i X_j - X_i Y_j
        return np.einsum("...ij,ijab->...ab", w, self.linear)

    def curvature(self, x, X, Y):
        gx = self(x, X)
        gy = self(x, Y)
        return self.exterior_derivative(x, X, Y) + gx @ gy - gy @ gx


# ---------------------------------------------------------------------------
# forms


@dataclass(frozen=True)
class BundleValuedForm:
    """A p-form on S^m with values in ``bundle``.

    ``derivative(x, Y, *X)`` is the exact (D_Y form)(X...) and
    ``second_derivative(x, Z, Y, *X)`` the exact (D^2_{Z,Y} form)(X...);
    either may be missing, in which case only the fd route is available.
    """

    bundle: VectorBundle
    degree: int
    evaluator: Callable
    derivative: Optional[Callable] = None
    second_derivative: Optional[Callable] = None
    name: str = "form"

    def __post_init__(self):
        if not 0 <= self.degree <= MAX_DEGREE:
            raise UnsupportedDegreeError(f"form degree must be in 0..{MAX_DEGREE}, got {self.degree}")

    def __call__(self, x, *vectors):
        if len(vectors) != self.degree:
            raise TypeError(f"{self.name} is a {self.degree}-form, got {len(vectors)} vectors")
        return self.evaluator(_coords(x), *vectors)

    @property
    def has_exact_derivatives(self) -> bool:
        return self.derivative is not None and self.second_derivative is not None


def _require_method(method: str) -> None:
    if method not in METHODS:
        raise ValueError(f"method must be one of {METHODS}, got {method!r}")


def _broadcast(x, *vectors):
    arrays = np.broadcast_arrays(_coords(x), *[np.asarray(v, dtype=float) for v in vectors])
    return arrays[0], arrays[1:]


def _along_geodesic(form: BundleValuedForm, x, direction, t: float, args, profile: ToleranceProfile):
    """Value of the form at geodesic(x, direction, t) on transported arguments, carried back to x."""
    y = geodesic(x, direction, t)
    if args:
        rot = geodesic_transport(x, direction, t)
        args = [rot.apply(a) for a in args]
    value = form(y, *args)
    return form.bundle.transport(x, direction, t, value, profile)


def covariant_derivative(form: BundleValuedForm, x, direction, *args, method: str = "fd",
                         profile: ToleranceProfile = DEFAULT):
    """(D_direction form)(args) at x."""
    _require_method(method)
    x, (direction, *args) = _broadcast(x, direction, *args)
    if method == "analytic":
        if form.derivative is None:
            raise CapabilityError(f"{form.name} carries no exact first derivative")
        return form.derivative(x, direction, *args)
    h = profile.fd_step_first
    plus = _along_geodesic(form, x, direction, h, args, profile)
    minus = _along_geodesic(form, x, direction, -h, args, profile)
    return (plus - minus) / (2.0 * h)


def second_covariant_derivative(form: BundleValuedForm, x, direction, *args, method: str = "fd",
                                profile: ToleranceProfile = DEFAULT):
    """(D^2_{direction, direction} form)(args) at x."""
    _require_method(method)
    x, (direction, *args) = _broadcast(x, direction, *args)
    if method == "analytic":
        if form.second_derivative is None:
            raise CapabilityError(f"{form.name} carries no exact second derivative")
        return form.second_derivative(x, direction, direction, *args)
    h = profile.fd_step_second
    plus = _along_geodesic(form, x, direction, h, args, profile)
    minus = _along_geodesic(form, x, direction, -h, args, profile)
    centre = form(x, *args)
    return (plus - 2.0 * centre + minus) / h**2


def _expand(x, frame, args):
    """Insert a frame-index axis so that all frame vectors are processed at once."""
    x = _coords(x)
    frame = np.asarray(frame, dtype=float)
    lead = np.broadcast_shapes(x.shape[:-1], frame.shape[:-2], *[np.shape(a)[:-1] for a in args])
    m, d = frame.shape[-2:]
    xb = np.broadcast_to(x[..., None, :], lead + (m, d))
    fb = np.broadcast_to(frame, lead + (m, d))
    ab = [np.broadcast_to(np.asarray(a, dtype=float)[..., None, :], lead + (m, d)) for a in args]
    return xb, fb, ab, len(lead)


def rough_laplacian(form: BundleValuedForm, x, frame, *args, method: str = "fd",
                    profile: ToleranceProfile = DEFAULT):
    """Trace Laplacian sum_j D^2_{e_j, e_j} form (the negative of the rough Laplacian D*D)."""
    xb, fb, ab, axis = _expand(x, frame, args)
    return np.sum(second_covariant_derivative(form, xb, fb, *ab, method=method, profile=profile), axis=axis)


def codifferential(form: BundleValuedForm, x, frame, *args, method: str = "fd",
                   profile: ToleranceProfile = DEFAULT):
    """(d_D^* form)(args) = -sum_s (D_{e_s} form)(e_s, args)."""
    if form.degree < 1:
        raise UnsupportedDegreeError("the codifferential needs a form of degree >= 1")
    if len(args) != form.degree - 1:
        raise TypeError(f"expected {form.degree - 1} arguments, got {len(args)}")
    xb, fb, ab, axis = _expand(x, frame, args)
    return -np.sum(covariant_derivative(form, xb, fb, fb, *ab, method=method, profile=profile), axis=axis)


def exterior_d(form: BundleValuedForm, method: str = "fd", profile: ToleranceProfile = DEFAULT) -> BundleValuedForm:
    """The covariant exterior derivative d_D as a new form of one degree higher."""
    _require_method(method)
    k = form.degree
    if k >= MAX_DEGREE:
        raise UnsupportedDegreeError(f"exterior derivative supported for degree < {MAX_DEGREE}, got {k}")

    def evaluator(x, *vectors):
        total = 0.0
        for i in range(k + 1):
            others = vectors[:i] + vectors[i + 1:]
            term = covariant_derivative(form, x, vectors[i], *others, method=method, profile=profile)
            total = total + term if i % 2 == 0 else total - term
        return total

    derivative = None
    if method == "analytic" and form.second_derivative is not None:
        def derivative(x, direction, *vectors):
            total = 0.0
            for i in range(k + 1):
                others = vectors[:i] + vectors[i + 1:]
                term = form.second_derivative(x, direction, vectors[i], *others)
                total = total + term if i % 2 == 0 else total - term
            return total

    return BundleValuedForm(form.bundle, k + 1, evaluator, derivative, None, name=f"d({form.name})")


def codifferential_form(form: BundleValuedForm, method: str = "fd",
                        profile: ToleranceProfile = DEFAULT) -> BundleValuedForm:
    """d_D^* as a new form of one degree lower, using the default frame at each point."""
    if form.degree < 1:
        raise UnsupportedDegreeError("the codifferential needs a form of degree >= 1")

    def evaluator(x, *vectors):
        return codifferential(form, x, tangent_frame(x), *vectors, method=method, profile=profile)

    derivative = None
    if method == "analytic" and form.second_derivative is not None:
        def derivative(x, direction, *vectors):
            xb, fb, ab, axis = _expand(x, tangent_frame(x), vectors)
            db = np.broadcast_to(np.asarray(direction)[..., None, :], fb.shape)
            return -np.sum(form.second_derivative(xb, db, fb, fb, *ab), axis=axis)

    return BundleValuedForm(form.bundle, form.degree - 1, evaluator, derivative, None, name=f"d*({form.name})")


# ---------------------------------------------------------------------------
# pointwise algebra on forms


def frame_components(degree: int, frame) -> tuple[list[np.ndarray], int]:
    """Argument tuples (e_i) or (e_i, e_j), i < j, stacked on a new axis before the vector axis."""
    frame = np.asarray(frame, dtype=float)
    m = frame.shape[-2]
    if degree == 0:
        return [], 1
    combos = list(combinations(range(m), degree))
    args = [frame[..., [c[k] for c in combos], :] for k in range(degree)]
    return args, len(combos)


def evaluate_components(form: BundleValuedForm, x, frame):
    """Values of the form on all increasing frame tuples, shape lead + (C,) + fiber."""
    x = _coords(x)
    args, count = frame_components(form.degree, frame)
    if form.degree == 0:
        return np.expand_dims(form(x), axis=x.ndim - 1)
    xb = np.broadcast_to(x[..., None, :], args[0].shape)
    return form(xb, *args)


def pointwise_norm_sq(form: BundleValuedForm, x, frame):
    """|form|^2 at x with the 2-form norm summing over i < j."""
    x = _coords(x)
    values = evaluate_components(form, x, frame)
    return np.sum(form.bundle.fiber_norm_sq(values), axis=x.ndim - 1)


def pointwise_inner(a: BundleValuedForm, b: BundleValuedForm, x, frame):
    x = _coords(x)
    return np.sum(a.bundle.inner(evaluate_components(a, x, frame), evaluate_components(b, x, frame)), axis=x.ndim - 1)


def curvature_action(form: BundleValuedForm, x, frame, *args):
    """The bundle-curvature term of the Weitzenbock formula.

    For a 1-form:  sum_j R^D(e_j, X) . form(e_j).
    For a 2-form:  sum_j R^D(e_j, X) . form(e_j, Y) - R^D(e_j, Y) . form(e_j, X).
    The action is the bundle's (commutator for skew-endomorphism values).
    """
    bundle = form.bundle
    xb, fb, ab, axis = _expand(x, frame, args)
    if form.degree == 1:
        (X,) = ab
        terms = bundle.act(bundle.curvature(xb, fb, X), form(xb, fb))
    elif form.degree == 2:
        X, Y = ab
        terms = bundle.act(bundle.curvature(xb, fb, X), form(xb, fb, Y)) - bundle.act(
            bundle.curvature(xb, fb, Y), form(xb, fb, X))
    else:
        raise UnsupportedDegreeError("curvature action implemented for degrees 1 and 2")
    return np.sum(terms, axis=axis)


def curvature_derivation_term(form: BundleValuedForm, x, frame, *args):
    """Curvature term of the Bochner formula, assembled as a derivation.

    S(X_1..X_p) = sum_j sum_k (R_{e_j, X_k} . form)(X_1, .., e_j (slot k), .., X_p), where R
    acts on the values through the bundle curvature and on the arguments
    through the sphere curvature tensor.
    """
    p = form.degree
    if p not in (1, 2):
        raise UnsupportedDegreeError("the Bochner term is implemented for degrees 1 and 2")
    bundle = form.bundle
    xb, fb, ab, axis = _expand(x, frame, args)
    total = 0.0
    for k in range(p):
        slot_args = list(ab)
        slot_args[k] = fb
        # (R . w)(W) = R^E w(W) - sum_i w(.., R^M W_i, ..)
        term = bundle.act(bundle.curvature(xb, fb, ab[k]), form(xb, *slot_args))
        for i in range(p):
            moved = list(slot_args)
            moved[i] = sphere_curvature(fb, ab[k], slot_args[i])
            term = term - form(xb, *moved)
        total = total + term
    return np.sum(total, axis=axis)


@dataclass(frozen=True)
class WeitzenbockConstants:
    """Sphere-specific constants of the Bochner formulas for 1- and 2-forms."""

    m: int
    ricci_factor: float = None  # type: ignore[assignment]
    two_form_factor: float = None  # type: ignore[assignment]

    def __post_init__(self):
        if self.ricci_factor is None:
            object.__setattr__(self, "ricci_factor", float(self.m - 1))
        if self.two_form_factor is None:
            object.__setattr__(self, "two_form_factor", float(2 * self.m - 4))
        assert self.ricci_factor == self.m - 1, "Ric of the unit sphere is (m-1) id"
        assert self.two_form_factor == 2 * self.m - 4, "2 Ric ^ id - 2 R on the unit sphere is (2m-4) I"

    def factor(self, degree: int) -> float:
        if degree == 1:
            return self.ricci_factor
        if degree == 2:
            return self.two_form_factor
        raise UnsupportedDegreeError("constants defined for degrees 1 and 2")


def weitzenbock_closed_form(form: BundleValuedForm, x, frame, *args):
    """c_p form + curvature_action(form) with c_1 = m - 1 and c_2 = 2m - 4."""
    const = WeitzenbockConstants(form.bundle.m)
    return const.factor(form.degree) * form(x, *args) + curvature_action(form, x, frame, *args)


def hodge_laplacian(form: BundleValuedForm, x, *args, method: str = "fd", profile: ToleranceProfile = DEFAULT):
    """(d d^* + d^* d) form at x, evaluated on ``args``."""
    x = _coords(x)
    frame = tangent_frame(x)
    if form.degree == 0:
        down = 0.0
    else:
        down = exterior_d(codifferential_form(form, method, profile), method, profile)(x, *args)
    up = codifferential(exterior_d(form, method, profile), x, frame, *args, method=method, profile=profile)
    return down + up


def bochner_residual(form: BundleValuedForm, x, frame=None, method: str = "fd",
                     profile: ToleranceProfile = DEFAULT):
    """Norm at x of (d d^* + d^* d) form + Lap form - S over all frame components.

    Returns an array of nonnegative reals (one per point; one per copy for
    stacked bundles).
    """
    if form.degree not in (1, 2):
        raise UnsupportedDegreeError("Bochner residual is defined for degrees 1 and 2")
    x = _coords(x)
    frame = tangent_frame(x) if frame is None else np.asarray(frame, dtype=float)
    args, _ = frame_components(form.degree, frame)
    xc = np.broadcast_to(x[..., None, :], args[0].shape)
    fc = np.broadcast_to(frame[..., None, :, :], args[0].shape[:-1] + frame.shape[-2:])
    lhs = hodge_laplacian(form, xc, *args, method=method, profile=profile)
    lap = rough_laplacian(form, xc, fc, *args, method=method, profile=profile)
    s = curvature_derivation_term(form, xc, fc, *args)
    res = lhs + lap - s
    return np.sqrt(np.sum(form.bundle.fiber_norm_sq(res), axis=x.ndim - 1))


# ---------------------------------------------------------------------------
# random smooth test forms


def random_polynomial_form(bundle: VectorBundle, degree: int, rng: np.random.Generator,
                           count: int | None = None, scale: float = 1.0) -> BundleValuedForm:
    """Random smooth form: fiber projection of a quadratic polynomial tensor field.

    With ``count`` given, returns ``count`` independent forms stacked on a
    :class:`StackedBundle`.
    """
    if degree not in (0, 1, 2):
        raise UnsupportedDegreeError("random forms are generated for degrees 0, 1 and 2")
    d = bundle.m + 1
    stacked = count is not None
    shape = ((count,) if stacked else ()) + (d,) * degree + bundle.fiber_shape
    c0 = scale * rng.standard_normal(shape)
    c1 = scale * rng.standard_normal((d,) + shape) / 2.0
    c2 = scale * rng.standard_normal((d, d) + shape) / 4.0
    target = StackedBundle(bundle, count) if stacked else bundle

    def coefficients(x):
        pad = (1,) * len(shape)
        quad = np.tensordot(x, c2, axes=(-1, 0))
        quad = np.sum(quad * x.reshape(x.shape + pad), axis=x.ndim - 1)
        return c0 + np.tensordot(x, c1, axes=(-1, 0)) + quad

    def evaluator(x, *vectors):
        x, vectors = _broadcast(x, *vectors)
        coeff = coefficients(x)
        if degree == 0:
            val = coeff
        elif degree == 1:
            val = _contract(coeff, vectors, stacked)
        else:
            val = _contract(coeff, vectors, stacked) - _contract(coeff, vectors[::-1], stacked)
        return target.project(x, val)

    return BundleValuedForm(target, degree, evaluator, name=f"random-{degree}-form")


def _contract(coeff, vectors, stacked: bool):
    """Contract the leading tensor slots of ``coeff`` with ``vectors``."""
    out = coeff
    batch = vectors[0].ndim - 1
    pos = batch + (1 if stacked else 0)
    for v in vectors:
        extra = (1,) if stacked else ()
        vb = v.reshape(v.shape[:-1] + extra + (v.shape[-1],) + (1,) * (out.ndim - pos - 1))
        out = np.sum(out * vb, axis=pos)
    return out


# ---------------------------------------------------------------------------
# Gram matrices and multiplicity bounds


@dataclass(frozen=True)
class GramRank:
    """Numerical rank of an L2 Gram matrix of candidate eigensections."""

    rank: int
    gram_spectrum: tuple
    gram: np.ndarray

    @property
    def condition(self) -> float:
        """sigma_min / sigma_max over the retained singular values (0 when rank is 0)."""
        if self.rank == 0:
            return 0.0
        return self.gram_spectrum[self.rank - 1] / self.gram_spectrum[0]


def gram_matrix(weights: np.ndarray, sections: list[np.ndarray], inner: Callable) -> np.ndarray:
    """G_ij = sum_nodes w <s_i, s_j> for sections sampled on a quadrature grid."""
    n = len(sections)
    gram = np.zeros((n, n))
    for i in range(n):
        for j in range(i, n):
            gram[i, j] = gram[j, i] = float(weights @ inner(sections[i], sections[j]))
    return gram


def numerical_rank(gram: np.ndarray, eps: float) -> GramRank:
    """Count singular values above eps * sigma_max (rank 0 for a zero matrix)."""
    sigma = np.linalg.svd(gram, compute_uv=False)
    top = sigma[0] if sigma.size else 0.0
    rank = 0 if top <= 0.0 else int(np.sum(sigma > eps * top))
    return GramRank(rank=rank, gram_spectrum=tuple(float(s) for s in sigma), gram=gram)
