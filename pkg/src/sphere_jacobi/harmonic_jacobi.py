"""Harmonic maps from S^m into round spheres and their Jacobi operator.

A map u: S^m -> S^n is given by its ambient evaluators u(x) and du(x)(X);
sections along u live in the pullback bundle u^{-1} TS^n whose fibers are
u(x)^perp inside R^{n+1}.  The candidate eigenfields are X_l = du(grad l)
for linear functions l, with predicted eigenvalue -(m - 2).
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .errors import CapabilityError, DegenerateInputError
from .forms_calculus import (
    BundleValuedForm,
    GramRank,
    VectorBundle,
    codifferential,
    gram_matrix,
    numerical_rank,
    rk4_orthogonal,
    rough_laplacian,
    _dot,
    _outer,
)
from .sphere_core import (
    LinearFunction,
    QuadratureGrid,
    _coords,
    geodesic,
    geodesic_velocity,
    grad_linear,
    PlaneRotation,
    tangent_frame,
)
from .tolerances import DEFAULT, ToleranceProfile

# how transport along u o geodesic is realized
TRANSPORT_CONSTANT = "constant"
TRANSPORT_GEODESIC = "geodesic"  # u maps great circles to constant-speed great circles
TRANSPORT_ROLLING = "rolling"  # integrate the rolling equation


@dataclass(frozen=True)
class SphereMap:
    """Catalog entry for u: S^m -> S^n.

    ``hessian(x, X, Y)`` is the second fundamental form of the map,
    (D du)(X, Y); ``third(x, Z, X, Y)`` its covariant derivative in Z.
    """

    name: str
    m: int
    n: int
    value: Callable
    differential: Callable
    hessian: Optional[Callable] = None
    third: Optional[Callable] = None
    is_constant: bool = False
    claims_harmonic: bool = True
    transport_kind: str = TRANSPORT_ROLLING
    description: str = ""

    def __call__(self, x):
        return self.value(_coords(x))

    def du(self, x, X):
        return self.differential(_coords(x), np.asarray(X, dtype=float))

    def energy_density(self, x):
        """|du|^2 at x."""
        x = _coords(x)
        frame = tangent_frame(x)
        images = self.du(x[..., None, :], frame)
        return np.sum(images**2, axis=(-2, -1))

    def precompose(self, rotation: np.ndarray) -> "SphereMap":
        """The map x -> u(rotation x)."""
        rot = np.asarray(rotation, dtype=float)

        def r(v):
            return v @ rot.T

        hess = None if self.hessian is None else (lambda x, X, Y: self.hessian(r(x), r(X), r(Y)))
        third = None if self.third is None else (lambda x, Z, X, Y: self.third(r(x), r(Z), r(X), r(Y)))
        return replace(
            self,
            name=f"{self.name}-rotated",
            value=lambda x: self.value(r(x)),
            differential=lambda x, X: self.differential(r(x), r(X)),
            hessian=hess,
            third=third,
        )


class PullbackBundle(VectorBundle):
    """u^{-1} TS^n with the pullback of the Levi-Civita connection."""

    def __init__(self, u: SphereMap):
        self.u = u
        self.m = u.m
        self.ambient = u.n + 1
        self.rank = u.n
        self.name = f"pullback({u.name})"

    def projector(self, x):
        p = self.u(x)
        return np.eye(self.ambient) - _outer(p, p)

    def transport_matrix(self, x, v, t, profile: ToleranceProfile = DEFAULT):
        x = _coords(x)
        v = np.asarray(v, dtype=float)
        shape = np.broadcast_shapes(x.shape, v.shape)[:-1] + (self.ambient, self.ambient)
        kind = self.u.transport_kind
        if kind == TRANSPORT_CONSTANT or t == 0.0:
            return np.broadcast_to(np.eye(self.ambient), shape).copy()
        if kind == TRANSPORT_GEODESIC:
            return self.transport_operator(x, v, t, profile).matrix()
        return self._rolling(x, v, t, profile)

    def transport_operator(self, x, v, t, profile: ToleranceProfile = DEFAULT):
        if self.u.transport_kind == TRANSPORT_GEODESIC:
            x = _coords(x)
            w = self.u.du(x, np.asarray(v, dtype=float))
            speed = np.linalg.norm(w, axis=-1)
            unit = w / np.where(speed > 0.0, speed, 1.0)[..., None]
            return PlaneRotation(np.broadcast_to(self.u(x), w.shape), unit, -t * speed)
        return super().transport_operator(x, v, t, profile)

    def _rolling(self, x, v, t, profile):

        def generator(tau):
            y = geodesic(x, v, tau)
            c = self.u(y)
            dc = self.u.du(y, geodesic_velocity(x, v, tau))
            return _outer(dc, c) - _outer(c, dc)

        return np.swapaxes(rk4_orthogonal(generator, t, profile.rk4_substeps), -1, -2)

    def curvature(self, x, X, Y):
        a = self.u.du(x, X)
        b = self.u.du(x, Y)
        return _outer(a, b) - _outer(b, a)


def differential_form(u: SphereMap) -> BundleValuedForm:
    """du as a 1-form with values in the pullback bundle."""
    return BundleValuedForm(PullbackBundle(u), 1, u.differential, u.hessian, u.third, name=f"d{u.name}")


@dataclass(frozen=True)
class PullbackSection:
    """A section x -> V(x) in T_{u(x)} S^n, wrapped as a 0-form."""

    form: BundleValuedForm

    def __call__(self, x):
        return self.form(x)


def x_ell_field(u: SphereMap, ell: LinearFunction) -> PullbackSection:
    """X_l = du(grad l)."""

    def evaluator(x):
        return u.differential(x, grad_linear(ell, x))

    derivative = second = None
    if u.hessian is not None:
        def derivative(x, Y):
            return u.hessian(x, Y, grad_linear(ell, x)) - ell(x)[..., None] * u.differential(x, Y)

    if u.hessian is not None and u.third is not None:
        def second(x, Z, Y):
            g = grad_linear(ell, x)
            lx = ell(x)[..., None]
            return (u.third(x, Z, Y, g) - lx * u.hessian(x, Y, Z) - _dot(g, Z)[..., None] * u.differential(x, Y)
                    - lx * u.hessian(x, Z, Y))

    return PullbackSection(BundleValuedForm(PullbackBundle(u), 0, evaluator, derivative, second, name=f"X_l[{u.name}]"))


def _target_curvature_sum(u: SphereMap, V, x, frame):
    """sum_i R^N(V, du e_i) du e_i on the unit target sphere."""
    xb = x[..., None, :]
    images = u.du(xb, frame)
    Vb = V[..., None, :]
    terms = np.sum(images**2, axis=-1)[..., None] * Vb - _dot(Vb, images)[..., None] * images
    return np.sum(terms, axis=-2)


def tension_field(u: SphereMap, x, frame=None, method: str = "fd", profile: ToleranceProfile = DEFAULT):
    """tau(u) = -d^* du at x."""
    x = _coords(x)
    frame = tangent_frame(x) if frame is None else frame
    return -codifferential(differential_form(u), x, frame, method=method, profile=profile)


def jacobi_apply(u: SphereMap, V: PullbackSection, x, frame=None, method: str = "fd",
                 profile: ToleranceProfile = DEFAULT):
    """J_u V = D^*D V - sum_i R^N(V, du e_i) du e_i."""
    x = _coords(x)
    frame = tangent_frame(x) if frame is None else frame
    lap = rough_laplacian(V.form, x, frame, method=method, profile=profile)
    return -lap - _target_curvature_sum(u, V(x), x, frame)


def tension_sup(u: SphereMap, grid: QuadratureGrid, method: str = "fd", profile: ToleranceProfile = DEFAULT) -> float:
    t = tension_field(u, grid.points, method=method, profile=profile)
    return float(np.max(np.linalg.norm(t, axis=-1)))


def is_harmonic(u: SphereMap, grid: QuadratureGrid, method: str = "fd", profile: ToleranceProfile = DEFAULT) -> bool:
    return tension_sup(u, grid, method, profile) <= profile.harmonic_threshold


def l2_norm(grid: QuadratureGrid, values) -> float:
    return float(np.sqrt(grid.weights @ np.sum(np.asarray(values) ** 2, axis=-1)))


@dataclass(frozen=True)
class EigenResidual:
    residual: float
    eigenvalue: float
    section_norm: float
    advisory: bool = False
    notes: tuple = field(default_factory=tuple)


def zero_section_test(u: SphereMap, ell: LinearFunction, grid: QuadratureGrid,
                      profile: ToleranceProfile = DEFAULT) -> tuple[float, float, bool]:
    """(sup |X_l|, sup |du|, X_l vanishes) on the grid."""
    values = x_ell_field(u, ell)(grid.points)
    sup = float(np.max(np.linalg.norm(values, axis=-1)))
    scale = float(np.sqrt(np.max(u.energy_density(grid.points))))
    return sup, scale, sup <= profile.zero_section_tol * max(scale, 1.0)


def eigen_residual_harmonic(u: SphereMap, ell: LinearFunction, grid: QuadratureGrid, method: str = "fd",
                            profile: ToleranceProfile = DEFAULT) -> EigenResidual:
    """||J_u X_l + (m - 2) X_l|| / ||X_l|| in L2 over the grid."""
    eigenvalue = -(u.m - 2.0)
    X = x_ell_field(u, ell)
    values = X(grid.points)
    norm = l2_norm(grid, values)
    _, scale, vanishes = zero_section_test(u, ell, grid, profile)
    if vanishes:
        raise DegenerateInputError(f"X_l vanishes on the grid for {u.name}; the map behaves as a constant map")
    J = jacobi_apply(u, X, grid.points, method=method, profile=profile)
    residual = l2_norm(grid, J - eigenvalue * values) / norm
    advisory = not u.claims_harmonic
    return EigenResidual(residual=residual, eigenvalue=eigenvalue, section_norm=norm, advisory=advisory)


def multiplicity_bound_harmonic(u: SphereMap, grid: QuadratureGrid, profile: ToleranceProfile = DEFAULT) -> GramRank:
    """Gram rank of {X_l} over the coordinate basis of linear functions."""
    sections = [x_ell_field(u, ell)(grid.points) for ell in LinearFunction.basis(u.m + 1)]
    gram = gram_matrix(grid.weights, sections, lambda a, b: np.sum(a * b, axis=-1))
    return numerical_rank(gram, profile.rank_eps)


def harmonic_formula_residual(u: SphereMap, grid: QuadratureGrid, method: str = "fd",
                              profile: ToleranceProfile = DEFAULT) -> float:
    """L2 norm of Lap(du) + sum_a R^N(du(.), du e_a) du e_a - du(Ric(.)) on frame vectors."""
    x = grid.points
    frame = tangent_frame(x)
    du_form = differential_form(u)
    total = 0.0
    for k in range(u.m):
        X = frame[..., k, :]
        lap = rough_laplacian(du_form, x, frame, X, method=method, profile=profile)
        curv = _target_curvature_sum(u, u.du(x, X), x, frame)
        res = lap + curv - (u.m - 1.0) * u.du(x, X)
        total += grid.weights @ np.sum(res**2, axis=-1)
    return float(np.sqrt(total))


# ---------------------------------------------------------------------------
# catalog


def constant_map(m: int, n: int, point=None) -> SphereMap:
    p = np.zeros(n + 1)
    p[-1] = 1.0
    if point is not None:
        p = np.asarray(point, dtype=float) / np.linalg.norm(point)

    def value(x):
        return np.broadcast_to(p, np.shape(x)[:-1] + (n + 1,)).copy()

    def zero2(x, X):
        return np.zeros(np.broadcast_shapes(np.shape(x), np.shape(X))[:-1] + (n + 1,))

    def zero3(x, X, Y):
        return zero2(x, X + Y)

    def zero4(x, Z, X, Y):
        return zero2(x, X + Y + Z)

    return SphereMap(f"constant-s{m}-s{n}", m, n, value, zero2, zero3, zero4, is_constant=True,
                     transport_kind=TRANSPORT_CONSTANT, description="constant map")


def equatorial_map(m: int, n: int) -> SphereMap:
    """x -> (x, 0): totally geodesic; the identity when n = m."""
    if n < m:
        raise ValueError("equatorial map needs n >= m")
    pad = n - m

    def embed(v):
        v = np.asarray(v, dtype=float)
        return np.concatenate([v, np.zeros(v.shape[:-1] + (pad,))], axis=-1) if pad else v.copy()

    def zero3(x, X, Y):
        return np.zeros(np.broadcast_shapes(np.shape(x), np.shape(X), np.shape(Y))[:-1] + (n + 1,))

    def zero4(x, Z, X, Y):
        return zero3(x, X + Z, Y)

    name = f"identity-s{m}" if pad == 0 else f"equator-s{m}-in-s{n}"
    desc = "identity map" if pad == 0 else "totally geodesic equatorial embedding"
    return SphereMap(name, m, n, embed, lambda x, X: embed(X), zero3, zero4,
                     transport_kind=TRANSPORT_GEODESIC, description=desc)


def identity_map(m: int) -> SphereMap:
    return equatorial_map(m, m)


def hopf_map() -> SphereMap:
    """The Hopf fibration S^3 -> S^2, with |du|^2 = 8."""

    def value(x):
        x0, x1, x2, x3 = np.moveaxis(np.asarray(x, dtype=float), -1, 0)
        return np.stack([2 * (x0 * x2 + x1 * x3), 2 * (x1 * x2 - x0 * x3), x0**2 + x1**2 - x2**2 - x3**2], axis=-1)

    def differential(x, X):
        x0, x1, x2, x3 = np.moveaxis(np.asarray(x, dtype=float), -1, 0)
        v0, v1, v2, v3 = np.moveaxis(np.asarray(X, dtype=float), -1, 0)
        return 2.0 * np.stack([
            x2 * v0 + x3 * v1 + x0 * v2 + x1 * v3,
            -x3 * v0 + x2 * v1 + x1 * v2 - x0 * v3,
            x0 * v0 + x1 * v1 - x2 * v2 - x3 * v3,
        ], axis=-1)

    return SphereMap("hopf", 3, 2, value, differential, description="Hopf fibration")


def harmonic_catalog() -> dict[str, Callable[[], SphereMap]]:
    entries: dict[str, Callable[[], SphereMap]] = {"constant-s3-s2": lambda: constant_map(3, 2)}
    for m in range(2, 7):
        entries[f"identity-s{m}"] = (lambda m=m: identity_map(m))
    entries["hopf"] = hopf_map
    entries["equator-s2-in-s4"] = lambda: equatorial_map(2, 4)
    entries["equator-s3-in-s5"] = lambda: equatorial_map(3, 5)
    return entries


def get_map(name: str) -> SphereMap:
    catalog = harmonic_catalog()
    if name not in catalog:
        raise KeyError(f"unknown map {name!r}; known: {', '.join(catalog)}")
    return catalog[name]()


def require_exact(u: SphereMap) -> None:
    if u.hessian is None or u.third is None:
        raise CapabilityError(f"{u.name} has no exact covariant derivatives; use method 'fd'")
