"""Brute-force second variations of energy, Yang-Mills energy and area.

Each functional is evaluated along an explicit deformation and differentiated
twice in s by central differences with Richardson extrapolation; the result
is compared with the quadratic form of the corresponding Jacobi operator.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from itertools import combinations
from typing import Callable, Optional

import numpy as np

from .errors import NotCriticalError
from .forms_calculus import BundleValuedForm
from .harmonic_jacobi import PullbackSection, SphereMap, jacobi_apply, TRANSPORT_ROLLING
from .minimal_jacobi import (
    ChartGrid,
    ImmersedSubmanifold,
    NormalSection,
    chart_geometry,
    jacobi_apply_minimal,
)
from .sphere_core import QuadratureGrid, _coords, geodesic, tangent_frame
from .tolerances import DEFAULT, ToleranceProfile
from .yangmills_jacobi import (
    BundleConnection,
    _frame_args,
    frobenius,
    jacobi_apply_ym,
    perturb,
    ym_density,
)
from .forms_calculus import map_chunks


def energy(u: SphereMap, grid: QuadratureGrid) -> float:
    """E(u) = 1/2 int |du|^2."""
    return 0.5 * grid.integrate(u.energy_density(grid.points))


def ym_energy(D: BundleConnection, grid: QuadratureGrid, rotation: Optional[np.ndarray] = None) -> float:
    """YM(D) = 1/2 int sum_{i<j} |R(e_i, e_j)|^2."""
    return 0.5 * grid.integrate(map_chunks(lambda x: ym_density(D, x, rotation), grid.points))


def area(M: ImmersedSubmanifold, grid: ChartGrid, method: str = "fd", profile: ToleranceProfile = DEFAULT) -> float:
    """Volume of M from the induced area element on the parametric grid."""
    geo = chart_geometry(M, grid.params, method, profile)
    return float(grid.param_weights @ geo.area_element)


# ---------------------------------------------------------------------------
# deformations


def deform_map(u: SphereMap, V: PullbackSection, s: float, profile: ToleranceProfile = DEFAULT) -> SphereMap:
    """u_s = cos(s|V|) u + sin(s|V|) V/|V|; du_s by fourth-order geodesic differences."""

    def value(x):
        x = _coords(x)
        return geodesic(u(x), V(x), s)

    h = profile.fd_step_second

    def differential(x, X):
        x = _coords(x)
        X = np.asarray(X, dtype=float)
        x, X = np.broadcast_arrays(x, X)
        f = [value(geodesic(x, X, k * h)) for k in (2, 1, -1, -2)]
        return (-f[0] + 8 * f[1] - 8 * f[2] + f[3]) / (12 * h)

    return replace(u, name=f"{u.name}@s={s:g}", value=value, differential=differential, hessian=None, third=None,
                   transport_kind=TRANSPORT_ROLLING, is_constant=False)


def deform_submanifold(M: ImmersedSubmanifold, V: NormalSection, s: float) -> ImmersedSubmanifold:
    """Push every point along the ambient great circle in direction V."""

    def position(theta):
        return geodesic(M.position(theta), V(theta), s)

    return replace(M, name=f"{M.name}@s={s:g}", position=position, first_jet=None, second_jet=None)


@dataclass(frozen=True)
class VariationFamily:
    """A one-parameter deformation of a critical object together with its Jacobi quadratic form."""

    setting: str
    base: object
    direction: object
    deform: Callable[[float], object]
    functional: Callable[[object], float]
    quadratic_form: Callable[[], float]

    def __call__(self, s: float):
        return self.base if s == 0.0 else self.deform(s)

    def value(self, s: float) -> float:
        return self.functional(self(s))


def map_variation(u: SphereMap, V: PullbackSection, grid: QuadratureGrid, method: str = "fd",
                  profile: ToleranceProfile = DEFAULT) -> VariationFamily:
    def quadratic():
        J = jacobi_apply(u, V, grid.points, method=method, profile=profile)
        return grid.integrate(np.sum(J * V(grid.points), axis=-1))

    return VariationFamily("harmonic", u, V, lambda s: deform_map(u, V, s, profile), lambda w: energy(w, grid),
                           quadratic)


def connection_variation(D: BundleConnection, B: BundleValuedForm, grid: QuadratureGrid, method: str = "fd",
                         profile: ToleranceProfile = DEFAULT) -> VariationFamily:
    def quadratic():
        def block(x):
            xb, vb, fb = _frame_args(x)
            J = jacobi_apply_ym(D, B, xb, vb, fb, method=method, profile=profile)
            return np.sum(frobenius(J, B(xb, vb)), axis=-1)

        return grid.integrate(map_chunks(block, grid.points))

    return VariationFamily("yang-mills", D, B, lambda s: perturb(D, B, s, method, profile),
                           lambda c: ym_energy(c, grid), quadratic)


def submanifold_variation(M: ImmersedSubmanifold, V: NormalSection, grid: ChartGrid, method: str = "fd",
                          profile: ToleranceProfile = DEFAULT) -> VariationFamily:
    def quadratic():
        J = map_chunks(lambda t: jacobi_apply_minimal(M, V, t, method, profile), grid.params, 512)
        return grid.integrate(np.sum(J * V(grid.params), axis=-1))

    # area along the deformation always uses chart differences of the moved position
    return VariationFamily("minimal", M, V, lambda s: deform_submanifold(M, V, s),
                           lambda N: area(N, grid, "fd", profile), quadratic)


# ---------------------------------------------------------------------------
# second variation


@dataclass(frozen=True)
class SecondVariationResult:
    fd_value: float
    quadratic_form_value: float
    relative_gap: float
    first_variation: float
    base_value: float
    raw_second_differences: tuple


def richardson(values: list[float]) -> float:
    """Extrapolate second differences taken at steps h, h/2, h/4 (error expansion in h^2)."""
    level = list(values)
    power = 4.0
    while len(level) > 1:
        level = [(power * level[i + 1] - level[i]) / (power - 1.0) for i in range(len(level) - 1)]
        power *= 4.0
    return level[0]


def second_variation_check(family: VariationFamily, steps: Optional[tuple] = None,
                           profile: ToleranceProfile = DEFAULT, require_critical: bool = True) -> SecondVariationResult:
    """Compare d^2/ds^2 F at s = 0 (Richardson-extrapolated) with int <J dir, dir>."""
    steps = tuple(profile.variation_steps if steps is None else steps)
    f0 = family.value(0.0)
    plus = {h: family.value(h) for h in steps}
    minus = {h: family.value(-h) for h in steps}
    h0 = steps[-1]
    first = (plus[h0] - minus[h0]) / (2.0 * h0)
    if require_critical and abs(first) > profile.first_variation_rel * abs(f0) + profile.first_variation_abs:
        raise NotCriticalError(
            f"{family.setting}: first variation {first:.3e} exceeds {profile.first_variation_rel:g}|F| + "
            f"{profile.first_variation_abs:g}; the base object is not critical")
    raw = [(plus[h] - 2.0 * f0 + minus[h]) / h**2 for h in steps]
    fd = richardson(raw)
    q = family.quadratic_form()
    scale = abs(q)
    gap = abs(fd - q) / scale if scale > profile.first_variation_abs else abs(fd - q)
    return SecondVariationResult(fd, q, gap, first, f0, tuple(raw))


def sphere_integral_of_pairs(grid: QuadratureGrid, D: BundleConnection) -> float:
    """Reference value: 1/2 int sum_{i<j} |R(e_i, e_j)|^2 by an explicit double loop."""
    total = np.zeros(grid.size)
    frame = tangent_frame(grid.points)
    for i, j in combinations(range(D.m), 2):
        r = D.curvature(grid.points, frame[:, i], frame[:, j])
        total += frobenius(r, r)
    return 0.5 * grid.integrate(total)
