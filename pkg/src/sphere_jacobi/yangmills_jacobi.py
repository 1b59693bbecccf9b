"""Yang-Mills connections over S^m and the Jacobi operator on so(E)-valued 1-forms.

A connection is carried by a :class:`VectorBundle` (its transport and
curvature); the curvature is also exposed as an so(E)-valued 2-form so that
the generic covariant calculus applies.  The candidate eigenforms are
B_l = R^D(grad l, .), with predicted eigenvalue -(m - 4).
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Callable, Optional

import numpy as np

from .errors import CapabilityError, DegenerateInputError
from .forms_calculus import (
    AdjointBundle,
    BundleValuedForm,
    ConnectionPotential,
    GramRank,
    SphereTangentBundle,
    TrivialBundle,
    VectorBundle,
    codifferential,
    curvature_action,
    exterior_d,
    gram_matrix,
    hodge_laplacian,
    map_chunks,
    numerical_rank,
    rk4_fundamental,
    rough_laplacian,
    _dot,
)
from .sphere_core import (
    LinearFunction,
    QuadratureGrid,
    _coords,
    geodesic,
    geodesic_velocity,
    grad_linear,
    tangent_frame,
)
from .tolerances import DEFAULT, ToleranceProfile

CONTROL_SEED = 20240611


def wedge(z, w):
    """z ^ w as a skew matrix, normalized so that <A, z ^ w> = <A w, z> in the Frobenius pairing."""
    z = np.asarray(z, dtype=float)
    w = np.asarray(w, dtype=float)
    return 0.5 * (z[..., :, None] * w[..., None, :] - w[..., :, None] * z[..., None, :])


def frobenius(a, b):
    return np.sum(a * b, axis=(-2, -1))


def commutator(a, b):
    return a @ b - b @ a


@dataclass(frozen=True)
class BundleConnection:
    """A metric connection on a rank-k bundle over S^m together with its curvature 2-form."""

    name: str
    m: int
    rank: int
    bundle: VectorBundle
    curvature_form: BundleValuedForm
    is_flat: bool = False
    claims_yang_mills: bool = True
    description: str = ""

    @property
    def adjoint(self) -> AdjointBundle:
        return self.curvature_form.bundle

    def curvature(self, x, X, Y):
        return self.curvature_form(x, X, Y)


def _zero_form_like(shape_fn):
    def zero(x, *vectors):
        return np.zeros(shape_fn(x, *vectors))
    return zero


def _endo_shape(k):
    def shape(x, *vectors):
        lead = np.broadcast_shapes(np.shape(x), *[np.shape(v) for v in vectors])[:-1]
        return lead + (k, k)
    return shape


def levi_civita_connection(m: int) -> BundleConnection:
    """Levi-Civita connection on TS^m; its curvature X Y^T - Y X^T is parallel."""
    bundle = SphereTangentBundle(m)
    adj = AdjointBundle(bundle)
    zero = _zero_form_like(_endo_shape(m + 1))

    def curvature(x, X, Y):
        return bundle.curvature(x, X, Y)

    form = BundleValuedForm(adj, 2, curvature, zero, zero, name=f"R[levicivita-ts{m}]")
    return BundleConnection(f"levicivita-ts{m}", m, m, bundle, form, description="Levi-Civita connection on TS^m")


def flat_connection(m: int, k: int) -> BundleConnection:
    bundle = TrivialBundle(m, k)
    zero = _zero_form_like(_endo_shape(k))
    form = BundleValuedForm(AdjointBundle(bundle), 2, zero, zero, zero, name=f"R[flat-r{k}-s{m}]")
    return BundleConnection(f"flat-r{k}-s{m}", m, k, bundle, form, is_flat=True, description="trivial flat connection")


def perturbed_control(m: int = 5, k: int = 3, seed: int = CONTROL_SEED, scale: float = 0.5) -> BundleConnection:
    """Trivial bundle with a seeded polynomial potential: smooth, nonflat and not Yang-Mills."""
    rng = np.random.default_rng(seed)
    potential = ConnectionPotential.random(m, k, rng, scale)
    bundle = TrivialBundle(m, k, potential)
    form = BundleValuedForm(AdjointBundle(bundle), 2, bundle.curvature, name=f"R[perturbed-r{k}-s{m}]")
    return BundleConnection(f"perturbed-r{k}-s{m}", m, k, bundle, form, claims_yang_mills=False,
                            description="seeded non-Yang-Mills control")


class PerturbedBundle(VectorBundle):
    """The connection D + s B for an so(E)-valued 1-form B.

    Transport is solved in the interaction picture: with Q_tau the D-transport
    back to x, w' = -s Q_tau B(gamma') Q_tau^T w, and the D + sB transport back
    to x is Psi^{-1} Q_t.
    """

    def __init__(self, base: VectorBundle, perturbation: BundleValuedForm, s: float, method: str = "fd",
                 profile: ToleranceProfile = DEFAULT):
        if not base.orthogonal_transport:
            raise CapabilityError("perturbations are supported over bundles with orthogonal transport")
        self.base = base
        self.perturbation = perturbation
        self.s = float(s)
        self.m = base.m
        self.ambient = base.ambient
        self.rank = base.rank
        self.name = f"{base.name}+{s:g}B"
        self.orthogonal_transport = False
        self._dB = exterior_d(perturbation, method, profile)

    def projector(self, x):
        return self.base.projector(x)

    def project(self, x, value):
        return self.base.project(x, value)

    def transport_matrix(self, x, v, t, profile: ToleranceProfile = DEFAULT):
        x = _coords(x)
        v = np.asarray(v, dtype=float)
        q_t = self.base.transport_matrix(x, v, t, profile)
        if self.s == 0.0 or t == 0.0:
            return q_t

        def generator(tau):
            q = self.base.transport_matrix(x, v, tau, profile)
            b = self.perturbation(geodesic(x, v, tau), geodesic_velocity(x, v, tau))
            return -self.s * (q @ b @ np.swapaxes(q, -1, -2))

        psi = rk4_fundamental(generator, t, profile.rk4_substeps)
        return np.linalg.solve(psi, q_t)

    def curvature(self, x, X, Y):
        bx = self.perturbation(x, X)
        by = self.perturbation(x, Y)
        return self.base.curvature(x, X, Y) + self.s * self._dB(x, X, Y) + self.s**2 * commutator(bx, by)


def perturb(D: BundleConnection, B: BundleValuedForm, s: float, method: str = "fd",
            profile: ToleranceProfile = DEFAULT) -> BundleConnection:
    """D + s B with curvature R + s d_D B + s^2 [B ^ B]."""
    bundle = PerturbedBundle(D.bundle, B, s, method, profile)
    form = BundleValuedForm(AdjointBundle(bundle), 2, bundle.curvature, name=f"R[{bundle.name}]")
    return BundleConnection(bundle.name, D.m, D.rank, bundle, form, is_flat=False,
                            claims_yang_mills=False, description=f"{D.name} perturbed")


def yang_mills_catalog() -> dict[str, Callable[[], BundleConnection]]:
    return {
        "flat-r2-s5": lambda: flat_connection(5, 2),
        "flat-r3-s5": lambda: flat_connection(5, 3),
        "levicivita-ts4": lambda: levi_civita_connection(4),
        "levicivita-ts5": lambda: levi_civita_connection(5),
        "levicivita-ts6": lambda: levi_civita_connection(6),
        "perturbed-r3-s5": lambda: perturbed_control(5, 3),
    }


def get_connection(name: str) -> BundleConnection:
    catalog = yang_mills_catalog()
    if name not in catalog:
        raise KeyError(f"unknown connection {name!r}; known: {', '.join(catalog)}")
    return catalog[name]()


# ---------------------------------------------------------------------------
# pointwise algebra


def script_r_frame(curv: np.ndarray, b: np.ndarray) -> np.ndarray:
    """R^D acting on a 1-form given by frame components.

    ``curv[..., a, c]`` holds R(e_a, e_c) and ``b[..., a]`` holds B(e_a); the
    result holds sum_j [R(e_j, e_a), B(e_j)] for each a.
    """
    return np.sum(commutator(curv, b[..., :, None, :, :]), axis=-4)


def script_r2_frame(curv: np.ndarray, phi: np.ndarray) -> np.ndarray:
    """R^D acting on a 2-form: sum_j [R(e_j, e_a), phi(e_j, e_b)] - [R(e_j, e_b), phi(e_j, e_a)]."""
    first = np.einsum("...jaxy,...jbyz->...abxz", curv, phi) - np.einsum("...jbxy,...jayz->...abxz", phi, curv)
    return first - np.swapaxes(first, -3, -4)


def synthetic_commutator_residual(curv: np.ndarray, g: np.ndarray) -> float:
    """|2 R(B_g) - R(R)(g, .)| for frame-component curvature values; B_g(e_a) = sum_c g_c R(e_c, e_a)."""
    b = np.einsum("...c,...caxy->...axy", g, curv)
    lhs = 2.0 * script_r_frame(curv, b)
    rhs = np.einsum("...c,...caxy->...axy", g, script_r2_frame(curv, curv))
    return float(np.max(np.sqrt(np.sum((lhs - rhs) ** 2, axis=(-2, -1)))))


def random_antisymmetric_curvature(m: int, k: int, rng: np.random.Generator, lead: tuple = ()) -> np.ndarray:
    """Random frame-component 2-form with so(k) values (no Bianchi identity imposed)."""
    a = rng.standard_normal(lead + (m, m, k, k))
    a = a - np.swapaxes(a, -1, -2)
    return a - np.swapaxes(a, -4, -3)


def curvature_frame(D: BundleConnection, x, frame) -> np.ndarray:
    """R(e_a, e_c) stacked as [..., a, c, K, K]."""
    x = _coords(x)
    m = frame.shape[-2]
    xa = x[..., None, None, :]
    ea = frame[..., :, None, :]
    ec = frame[..., None, :, :]
    shape = x.shape[:-1] + (m, m, x.shape[-1])
    return D.curvature(np.broadcast_to(xa, shape), np.broadcast_to(ea, shape), np.broadcast_to(ec, shape))


# ---------------------------------------------------------------------------
# operators


def b_ell_form(D: BundleConnection, ell: LinearFunction) -> BundleValuedForm:
    """B_l(X) = R^D(grad l, X), with exact derivatives whenever the curvature form has them."""
    R = D.curvature_form

    def evaluator(x, X):
        return R(x, grad_linear(ell, x), X)

    derivative = second = None
    if R.derivative is not None:
        def derivative(x, Y, X):
            g = grad_linear(ell, x)
            return R.derivative(x, Y, g, X) - ell(x)[..., None, None] * R(x, Y, X)

    if R.derivative is not None and R.second_derivative is not None:
        def second(x, Z, Y, X):
            g = grad_linear(ell, x)
            lx = ell(x)[..., None, None]
            return (R.second_derivative(x, Z, Y, g, X) - lx * R.derivative(x, Y, Z, X)
                    - _dot(g, Z)[..., None, None] * R(x, Y, X) - lx * R.derivative(x, Z, Y, X))

    return BundleValuedForm(R.bundle, 1, evaluator, derivative, second, name=f"B_l[{D.name}]")


def script_R_apply(D: BundleConnection, B: BundleValuedForm, x, X, frame=None):
    """R^D(B)(X) = sum_j [R^D(e_j, X), B(e_j)]."""
    x = _coords(x)
    frame = tangent_frame(x) if frame is None else frame
    return curvature_action(B, x, frame, X)


def script_R_bruteforce(D: BundleConnection, B: BundleValuedForm, x, X, frame) -> np.ndarray:
    """Loop-based reference for :func:`script_R_apply` at a single point."""
    total = np.zeros((x.shape[-1], x.shape[-1]))
    for j in range(frame.shape[-2]):
        e = frame[j]
        total += commutator(D.curvature(x, e, X), B(x, e))
    return total


def jacobi_apply_ym(D: BundleConnection, B: BundleValuedForm, x, X, frame=None, method: str = "fd",
                    profile: ToleranceProfile = DEFAULT):
    """J_D B (X) = (d_D^* d_D B)(X) + R^D(B)(X)."""
    x = _coords(x)
    frame = tangent_frame(x) if frame is None else frame
    dB = exterior_d(B, method, profile)
    return codifferential(dB, x, frame, X, method=method, profile=profile) + curvature_action(B, x, frame, X)


def _on_frame(x, frame):
    """Broadcast points against their own frame vectors: (xb, vectors) with a frame axis."""
    xb = np.broadcast_to(x[..., None, :], frame.shape)
    return xb, frame


def _frame_args(x):
    """Points, frame vectors as arguments, and the frame itself, each with a component axis."""
    frame = tangent_frame(x)
    xb, vb = _on_frame(x, frame)
    fb = np.broadcast_to(frame[..., None, :, :], frame.shape[:-1] + frame.shape[-2:])
    return xb, vb, fb


def _l2_one_form(grid: QuadratureGrid, values) -> float:
    # values: [N, m, K, K] frame components
    return float(np.sqrt(grid.weights @ np.sum(values**2, axis=(-3, -2, -1))))


def ym_residual(D: BundleConnection, grid: QuadratureGrid, method: str = "fd",
                profile: ToleranceProfile = DEFAULT) -> float:
    """sup over the grid of |d_D^* R^D| (norm over frame components)."""
    def block(x):
        xb, vb, fb = _frame_args(x)
        vals = codifferential(D.curvature_form, xb, fb, vb, method=method, profile=profile)
        return np.sqrt(np.sum(vals**2, axis=(-3, -2, -1)))

    return float(np.max(map_chunks(block, grid.points)))


def is_yang_mills(D: BundleConnection, grid: QuadratureGrid, method: str = "fd",
                  profile: ToleranceProfile = DEFAULT) -> bool:
    return ym_residual(D, grid, method, profile) <= profile.ym_threshold


def coclosed_check(D: BundleConnection, ell: LinearFunction, grid: QuadratureGrid, method: str = "fd",
                   profile: ToleranceProfile = DEFAULT) -> float:
    """sup over the grid of |d_D^* B_l|."""
    x = grid.points
    vals = codifferential(b_ell_form(D, ell), x, tangent_frame(x), method=method, profile=profile)
    return float(np.max(np.sqrt(np.sum(vals**2, axis=(-2, -1)))))


def commutator_identity_check(D: BundleConnection, ell: LinearFunction, x, X, frame=None) -> float:
    """|2 R^D(B_l)(X) - R^D(R^D)(grad l, X)| at x."""
    x = _coords(x)
    frame = tangent_frame(x) if frame is None else frame
    B = b_ell_form(D, ell)
    lhs = 2.0 * curvature_action(B, x, frame, X)
    rhs = curvature_action(D.curvature_form, x, frame, grad_linear(ell, x), X)
    return float(np.max(np.sqrt(frobenius(lhs - rhs, lhs - rhs))))


@dataclass(frozen=True)
class YMEigenResidual:
    residual: float
    eigenvalue: float
    form_norm: float
    advisory: bool = False


def form_values_on_frame(B: BundleValuedForm, x, frame):
    xb, vb = _on_frame(x, frame)
    return B(xb, vb)


def eigen_residual_ym(D: BundleConnection, ell: LinearFunction, grid: QuadratureGrid, method: str = "fd",
                      profile: ToleranceProfile = DEFAULT) -> YMEigenResidual:
    """Relative L2 residual of J_D B_l + (m - 4) B_l."""
    eigenvalue = -(D.m - 4.0)
    x = grid.points
    frame = tangent_frame(x)
    B = b_ell_form(D, ell)
    values = form_values_on_frame(B, x, frame)
    norm = _l2_one_form(grid, values)
    sup = float(np.max(np.sqrt(np.sum(values**2, axis=(-2, -1)))))
    if sup <= profile.zero_section_tol:
        raise DegenerateInputError(f"B_l vanishes on the grid for {D.name}; the connection behaves as flat")

    def block(pts):
        xb, vb, fb = _frame_args(pts)
        return jacobi_apply_ym(D, B, xb, vb, fb, method=method, profile=profile)

    J = map_chunks(block, x)
    residual = _l2_one_form(grid, J - eigenvalue * values) / norm
    return YMEigenResidual(residual, eigenvalue, norm, advisory=not D.claims_yang_mills)


def multiplicity_bound_ym(D: BundleConnection, grid: QuadratureGrid, profile: ToleranceProfile = DEFAULT) -> GramRank:
    """Gram rank of {B_l} over the coordinate basis, pairing frame components in Frobenius."""
    x = grid.points
    frame = tangent_frame(x)
    sections = [form_values_on_frame(b_ell_form(D, ell), x, frame) for ell in LinearFunction.basis(D.m + 1)]
    gram = gram_matrix(grid.weights, sections, lambda a, b: np.sum(a * b, axis=(-3, -2, -1)))
    return numerical_rank(gram, profile.rank_eps)


def bianchi_residual(D: BundleConnection, grid: QuadratureGrid, method: str = "fd",
                     profile: ToleranceProfile = DEFAULT) -> float:
    """sup over the grid of |d_D R^D| on frame triples."""
    x = grid.points
    frame = tangent_frame(x)
    dR = exterior_d(D.curvature_form, method, profile)
    worst = 0.0
    for i, j, k in combinations(range(D.m), 3):
        vals = dR(x, frame[:, i], frame[:, j], frame[:, k])
        worst = max(worst, float(np.max(np.sqrt(frobenius(vals, vals)))))
    return worst


def laplacian_identity_residual(D: BundleConnection, ell: LinearFunction, grid: QuadratureGrid, method: str = "fd",
                                profile: ToleranceProfile = DEFAULT) -> float:
    """L2 norm of Lap B_l - R^D(R^D)(grad l, .) - (2m - 5) B_l."""
    B = b_ell_form(D, ell)

    def block(x):
        xb, vb, fb = _frame_args(x)
        lap = rough_laplacian(B, xb, fb, vb, method=method, profile=profile)
        gb = np.broadcast_to(grad_linear(ell, x)[..., None, :], vb.shape)
        rr = curvature_action(D.curvature_form, xb, fb, gb, vb)
        return lap - rr - (2.0 * D.m - 5.0) * B(xb, vb)

    return _l2_one_form(grid, map_chunks(block, grid.points))


def ym_density(D: BundleConnection, x, rotation: Optional[np.ndarray] = None):
    """|R^D|^2 = sum_{i<j} |R(e_i, e_j)|^2, optionally for the connection pulled back by a rotation."""
    x = _coords(x)
    frame = tangent_frame(x)
    if rotation is not None:
        x = x @ rotation.T
        frame = frame @ rotation.T
    total = 0.0
    for i, j in combinations(range(D.m), 2):
        vals = D.curvature(x, frame[..., i, :], frame[..., j, :])
        total = total + frobenius(vals, vals)
    return total


def hodge_laplacian_one_form(B: BundleValuedForm, x, X, frame=None, method: str = "fd",
                             profile: ToleranceProfile = DEFAULT):
    """(d d^* + d^* d) B at x on X; differs from J_D by the curvature term."""
    return hodge_laplacian(B, x, X, method=method, profile=profile)


def constant_endomorphism_form(bundle: TrivialBundle, ell: LinearFunction, A0: np.ndarray) -> BundleValuedForm:
    """dl (x) A0 on a flat trivial bundle, with exact derivatives."""
    A0 = np.asarray(A0, dtype=float)

    def evaluator(x, X):
        return _dot(grad_linear(ell, x), X)[..., None, None] * A0

    def derivative(x, Y, X):
        return (-ell(x) * _dot(Y, X))[..., None, None] * A0

    def second(x, Z, Y, X):
        return (-_dot(grad_linear(ell, x), Z) * _dot(Y, X))[..., None, None] * A0

    return BundleValuedForm(AdjointBundle(bundle), 1, evaluator, derivative, second, name="dl(x)A0")
