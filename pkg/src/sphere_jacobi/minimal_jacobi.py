"""Immersed submanifolds of S^n and the normal Jacobi operator.

Submanifolds are parametrized over a chart domain (angles); geometry is
computed extrinsically from the position jets dp, d2p:

    G = dp dp^T,  N = I - p p^T - P_T,  B_ab = N d_a d_b p,  H = G^ab B_ab.

Method ``analytic`` uses exact jets of the parametrization; ``fd`` obtains
them from fourth-order chart differences of the position.  Derivatives of
sections are always chart differences.  The candidate eigensections are
V_l = (grad l)^perp, with predicted eigenvalue -m.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import eigsh

from .errors import CapabilityError, UnsupportedDimensionError
from .forms_calculus import GramRank, gram_matrix, map_chunks, numerical_rank
from .sphere_core import LinearFunction
from .tolerances import DEFAULT, ToleranceProfile

PERIODIC = "periodic"
POLAR = "polar"


@dataclass(frozen=True)
class TrigTerm:
    """coef * prod_{j in mask} cos(theta_j + phase_j) placed in ambient coordinate ``index``."""

    index: int
    coef: float
    mask: tuple
    phase: tuple


def _cos(j):
    return (j, 0.0)


def _sin(j):
    return (j, -np.pi / 2)


def _term(index, coef, m, *factors) -> TrigTerm:
    mask = [False] * m
    phase = [0.0] * m
    for j, ph in factors:
        mask[j] = True
        phase[j] = ph
    return TrigTerm(index, float(coef), tuple(mask), tuple(phase))


class TrigParametrization:
    """Position given by sums of trigonometric monomials; jets of any order are exact."""

    def __init__(self, m: int, ambient: int, terms: list[TrigTerm]):
        self.m = m
        self.ambient = ambient
        self.terms = terms

    def jet(self, theta, orders) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        orders = np.asarray(orders)
        out = np.zeros(theta.shape[:-1] + (self.ambient,))
        for t in self.terms:
            mask = np.array(t.mask)
            if np.any(orders[~mask] > 0):
                continue
            val = np.full(theta.shape[:-1], t.coef)
            for j in np.flatnonzero(mask):
                val = val * np.cos(theta[..., j] + t.phase[j] + orders[j] * np.pi / 2)
            out[..., t.index] += val
        return out

    def position(self, theta):
        return self.jet(theta, np.zeros(self.m, dtype=int))

    def first(self, theta):
        eye = np.eye(self.m, dtype=int)
        return np.stack([self.jet(theta, eye[a]) for a in range(self.m)], axis=-2)

    def second(self, theta):
        eye = np.eye(self.m, dtype=int)
        rows = [np.stack([self.jet(theta, eye[a] + eye[b]) for b in range(self.m)], axis=-2) for a in range(self.m)]
        return np.stack(rows, axis=-3)


@dataclass(frozen=True)
class ChartDomain:
    """Product rule over angles: ``kinds[j]`` is PERIODIC on [0, 2 pi) or POLAR on (0, pi)."""

    kinds: tuple

    def grid(self, level: int) -> tuple[np.ndarray, np.ndarray]:
        q = 2 * (level + 2) + 2
        axes, weights = [], []
        for kind in self.kinds:
            if kind == PERIODIC:
                n = 2 * q
                axes.append(2 * np.pi * (np.arange(n) + 0.5) / n)
                weights.append(np.full(n, 2 * np.pi / n))
            else:
                t, w = np.polynomial.legendre.leggauss(q)
                axes.append(0.5 * np.pi * (t + 1.0))
                weights.append(0.5 * np.pi * w)
        mesh = np.meshgrid(*axes, indexing="ij")
        wmesh = np.meshgrid(*weights, indexing="ij")
        params = np.stack([g.reshape(-1) for g in mesh], axis=-1)
        return params, np.prod([g.reshape(-1) for g in wmesh], axis=0)


@dataclass(frozen=True)
class ImmersedSubmanifold:
    """Catalog entry for M^m -> S^n, parametrized over a chart domain."""

    name: str
    m: int
    n: int
    position: Callable
    domain: ChartDomain
    first_jet: Optional[Callable] = None
    second_jet: Optional[Callable] = None
    claims_minimal: bool = True
    claims_totally_geodesic: bool = False
    claims_parallel_mean_curvature: bool = True
    description: str = ""

    def __post_init__(self):
        if not 1 <= self.m < self.n:
            raise UnsupportedDimensionError(f"need 1 <= m < n, got m={self.m}, n={self.n}")

    @property
    def has_exact_jets(self) -> bool:
        return self.first_jet is not None and self.second_jet is not None


@dataclass(frozen=True)
class ChartGrid:
    params: np.ndarray
    param_weights: np.ndarray
    area_element: np.ndarray
    level: int

    @property
    def weights(self) -> np.ndarray:
        return self.param_weights * self.area_element

    @property
    def size(self) -> int:
        return self.param_weights.size

    def integrate(self, values) -> float:
        return float(np.tensordot(self.weights, np.asarray(values), axes=(0, 0)))


# ---------------------------------------------------------------------------
# chart differences


def chart_derivative(fn: Callable, theta, a: int, h: float) -> np.ndarray:
    """Fourth-order central difference of fn along chart coordinate a."""
    theta = np.asarray(theta, dtype=float)
    e = np.zeros(theta.shape[-1])
    e[a] = h
    shifts = np.stack([theta + 2 * e, theta + e, theta - e, theta - 2 * e])
    f = fn(shifts)
    return (-f[0] + 8.0 * f[1] - 8.0 * f[2] + f[3]) / (12.0 * h)


def chart_gradient(fn: Callable, theta, m: int, h: float) -> np.ndarray:
    """All chart derivatives stacked on a new axis right after the batch axes."""
    theta = np.asarray(theta, dtype=float)
    batch = theta.ndim - 1
    return np.stack([chart_derivative(fn, theta, a, h) for a in range(m)], axis=batch)


def _require(method: str) -> None:
    if method not in ("analytic", "fd"):
        raise ValueError(f"method must be 'analytic' or 'fd', got {method!r}")


def position_jets(M: ImmersedSubmanifold, theta, method: str = "fd", profile: ToleranceProfile = DEFAULT):
    """(p, dp, d2p) at chart points; dp[..., a, :] and d2p[..., a, b, :]."""
    _require(method)
    theta = np.asarray(theta, dtype=float)
    p = M.position(theta)
    if method == "analytic":
        if not M.has_exact_jets:
            raise CapabilityError(f"{M.name} carries no exact jets; use method 'fd'")
        return p, M.first_jet(theta), M.second_jet(theta)
    h = profile.fd_step_second
    dp = chart_gradient(M.position, theta, M.m, h)
    d2p = chart_gradient(lambda t: chart_gradient(M.position, t, M.m, h), theta, M.m, h)
    return p, dp, 0.5 * (d2p + np.swapaxes(d2p, -2, -3))


@dataclass(frozen=True)
class ChartGeometry:
    p: np.ndarray
    dp: np.ndarray
    d2p: np.ndarray
    G: np.ndarray
    Ginv: np.ndarray
    tangent_proj: np.ndarray
    normal_proj: np.ndarray
    B: np.ndarray  # [..., a, b, :]
    H: np.ndarray
    christoffel: np.ndarray  # [..., c, a, b]
    area_element: np.ndarray


def _projectors(p, dp):
    G = dp @ np.swapaxes(dp, -1, -2)
    Ginv = np.linalg.inv(G)
    PT = np.swapaxes(dp, -1, -2) @ Ginv @ dp
    N = np.eye(p.shape[-1]) - p[..., :, None] * p[..., None, :] - PT
    return G, Ginv, PT, N


def chart_geometry(M: ImmersedSubmanifold, theta, method: str = "fd", profile: ToleranceProfile = DEFAULT) -> ChartGeometry:
    p, dp, d2p = position_jets(M, theta, method, profile)
    G, Ginv, PT, N = _projectors(p, dp)
    B = np.einsum("...ij,...abj->...abi", N, d2p)
    H = np.einsum("...ab,...abi->...i", Ginv, B)
    chris = np.einsum("...cd,...di,...abi->...cab", Ginv, dp, d2p)
    return ChartGeometry(p, dp, d2p, G, Ginv, PT, N, B, H, chris, np.sqrt(np.linalg.det(G)))


def normal_projector(M: ImmersedSubmanifold, theta, method: str = "fd", profile: ToleranceProfile = DEFAULT):
    """N(theta) using only first jets."""
    theta = np.asarray(theta, dtype=float)
    p = M.position(theta)
    if method == "analytic" and M.first_jet is not None:
        dp = M.first_jet(theta)
    else:
        dp = chart_gradient(M.position, theta, M.m, profile.fd_step_second)
    return _projectors(p, dp)[3]


def chart_grid(M: ImmersedSubmanifold, level: int, method: str = "fd", profile: ToleranceProfile = DEFAULT) -> ChartGrid:
    params, weights = M.domain.grid(level)
    geo = chart_geometry(M, params, method, profile)
    return ChartGrid(params, weights, geo.area_element, level)


# ---------------------------------------------------------------------------
# geometry operators


def _orthonormal_coefficients(G):
    """F with F G F^T = I: rows are coefficients of an orthonormal tangent frame."""
    L = np.linalg.cholesky(G)
    return np.linalg.inv(L)


def tangent_coefficients(geo: ChartGeometry, X):
    """Chart components xi with X = xi^a d_a p for a tangent ambient vector X."""
    return np.einsum("...ab,...bi,...i->...a", geo.Ginv, geo.dp, X)


def second_fundamental_form(M: ImmersedSubmanifold, theta, X, Y, method: str = "fd",
                            profile: ToleranceProfile = DEFAULT):
    """B(X, Y) for ambient tangent vectors X, Y at p(theta)."""
    geo = chart_geometry(M, theta, method, profile)
    xi = tangent_coefficients(geo, np.asarray(X, dtype=float))
    eta = tangent_coefficients(geo, np.asarray(Y, dtype=float))
    return np.einsum("...a,...b,...abi->...i", xi, eta, geo.B)


def mean_curvature(M: ImmersedSubmanifold, theta, method: str = "fd", profile: ToleranceProfile = DEFAULT):
    return chart_geometry(M, theta, method, profile).H


def sff_norm_sq(geo: ChartGeometry):
    """|B|^2 = G^ac G^bd <B_ab, B_cd>."""
    return np.einsum("...ac,...bd,...abi,...cdi->...", geo.Ginv, geo.Ginv, geo.B, geo.B)


def tangent_frame_vectors(geo: ChartGeometry):
    """Orthonormal tangent frame at each chart point, [..., m, n+1]."""
    F = _orthonormal_coefficients(geo.G)
    return F @ geo.dp


def _second_fundamental_tensor(M, method, profile):
    def fn(theta):
        return chart_geometry(M, theta, method, profile).B
    return fn


def covariant_sff(M: ImmersedSubmanifold, theta, method: str = "fd", profile: ToleranceProfile = DEFAULT):
    """(nabla_a B)(b, c) = N d_a(B_bc) - Gamma^d_ab B_dc - Gamma^d_ac B_bd, as [..., a, b, c, :]."""
    theta = np.asarray(theta, dtype=float)
    geo = chart_geometry(M, theta, method, profile)
    dB = chart_gradient(_second_fundamental_tensor(M, method, profile), theta, M.m, profile.fd_step_second)
    ndB = np.einsum("...ij,...abcj->...abci", geo.normal_proj, dB)
    g = geo.christoffel
    return (ndB - np.einsum("...dab,...dci->...abci", g, geo.B) - np.einsum("...dac,...bdi->...abci", g, geo.B))


@dataclass(frozen=True)
class BetaResiduals:
    codazzi_residual: float
    coclosed_residual: float


def beta_residuals(M: ImmersedSubmanifold, grid: ChartGrid, method: str = "fd",
                   profile: ToleranceProfile = DEFAULT) -> BetaResiduals:
    """Sup over the grid of |d_D beta| (Codazzi) and |d_D^* beta| in orthonormal components."""

    def block(theta):
        geo = chart_geometry(M, theta, method, profile)
        nb = covariant_sff(M, theta, method, profile)
        F = _orthonormal_coefficients(geo.G)
        ortho = np.einsum("...ia,...jb,...kc,...abcv->...ijkv", F, F, F, nb)
        codazzi = ortho - np.swapaxes(ortho, -4, -3)
        cocl = -np.einsum("...iikv->...kv", ortho)
        return np.stack([np.sqrt(np.sum(codazzi**2, axis=(-4, -3, -2, -1))),
                         np.sqrt(np.sum(cocl**2, axis=(-2, -1)))], axis=-1)

    vals = map_chunks(block, grid.params, 512)
    return BetaResiduals(float(np.max(vals[:, 0])), float(np.max(vals[:, 1])))


# ---------------------------------------------------------------------------
# normal sections and the Jacobi operator


@dataclass(frozen=True)
class NormalSection:
    """theta -> V(theta) in the normal space of M at p(theta), as an ambient vector."""

    evaluator: Callable
    name: str = "V"

    def __call__(self, theta):
        return self.evaluator(np.asarray(theta, dtype=float))


def v_ell_section(M: ImmersedSubmanifold, ell: LinearFunction, method: str = "fd",
                  profile: ToleranceProfile = DEFAULT) -> NormalSection:
    """V_l = normal projection of grad l = N(p) a."""
    a = ell.a

    def evaluator(theta):
        return normal_projector(M, theta, method, profile) @ a

    return NormalSection(evaluator, name=f"V_l[{M.name}]")


def scalar_normal_section(M: ImmersedSubmanifold, f: Callable, normal: Callable) -> NormalSection:
    """theta -> f(theta) nu(theta) for a hypersurface with unit normal nu."""
    return NormalSection(lambda t: f(t)[..., None] * normal(t), name="f nu")


def _normal_derivative(M, V, method, profile):
    """theta -> [N d_b V]_b, stacked on the axis after the batch axes."""
    h = profile.fd_step_first

    def fn(theta):
        dV = chart_gradient(V, theta, M.m, h)
        N = normal_projector(M, theta, method, profile)
        return np.einsum("...ij,...bj->...bi", N, dV)

    return fn


def normal_laplacian(M: ImmersedSubmanifold, V: NormalSection, theta, method: str = "fd",
                     profile: ToleranceProfile = DEFAULT):
    """Trace Laplacian of the normal connection: G^ab [N d_a (N d_b V) - Gamma^c_ab N d_c V]."""
    theta = np.asarray(theta, dtype=float)
    geo = chart_geometry(M, theta, method, profile)
    first = _normal_derivative(M, V, method, profile)
    nabla = first(theta)
    outer = chart_gradient(first, theta, M.m, profile.fd_step_second)  # [..., a, b, :]
    nested = np.einsum("...ij,...abj->...abi", geo.normal_proj, outer)
    hess = nested - np.einsum("...cab,...ci->...abi", geo.christoffel, nabla)
    return np.einsum("...ab,...abi->...i", geo.Ginv, hess)


def a_tilde_shape(geo: ChartGeometry, V):
    """A~(V) = sum_j B(e_j, A^V e_j) = G^ac G^bd <B_ab, V> B_cd."""
    coeff = np.einsum("...ac,...bd,...abi,...i->...cd", geo.Ginv, geo.Ginv, geo.B, V)
    return np.einsum("...cd,...cdi->...i", coeff, geo.B)


def a_tilde_derivative(M: ImmersedSubmanifold, V: NormalSection, theta, method: str = "fd",
                       profile: ToleranceProfile = DEFAULT):
    """A~(V) from tangential parts of ambient derivatives.

    <A~(V), W> = G^ab <(d_a V)^T, (d_b W)^T>; taking W = N e_k for every ambient
    axis k recovers the coordinates of the normal vector A~(V).
    """
    theta = np.asarray(theta, dtype=float)
    geo = chart_geometry(M, theta, method, profile)
    h = profile.fd_step_second
    dV = chart_gradient(V, theta, M.m, h)
    dN = chart_gradient(lambda t: normal_projector(M, t, method, profile), theta, M.m, h)  # [..., b, i, k]
    tV = np.einsum("...ij,...aj->...ai", geo.tangent_proj, dV)
    tN = np.einsum("...ij,...bjk->...bik", geo.tangent_proj, dN)
    return np.einsum("...ab,...ai,...bik->...k", geo.Ginv, tV, tN)


def jacobi_apply_minimal(M: ImmersedSubmanifold, V: NormalSection, theta, method: str = "fd",
                         profile: ToleranceProfile = DEFAULT, assembly: str = "shape"):
    """J_M V = D^*D V - m V - A~(V) with the normal rough Laplacian."""
    theta = np.asarray(theta, dtype=float)
    geo = chart_geometry(M, theta, method, profile)
    values = V(theta)
    if assembly == "shape":
        at = a_tilde_shape(geo, values)
    elif assembly == "derivative":
        at = a_tilde_derivative(M, V, theta, method, profile)
    else:
        raise ValueError(f"unknown assembly {assembly!r}")
    return -normal_laplacian(M, V, theta, method, profile) - M.m * values - at


def a_tilde_discrepancy(M: ImmersedSubmanifold, V: NormalSection, theta, method: str = "fd",
                        profile: ToleranceProfile = DEFAULT) -> float:
    geo = chart_geometry(M, theta, method, profile)
    one = a_tilde_shape(geo, V(theta))
    two = a_tilde_derivative(M, V, theta, method, profile)
    return float(np.max(np.linalg.norm(one - two, axis=-1)))


def mean_curvature_sup(M: ImmersedSubmanifold, grid: ChartGrid, method: str = "fd",
                       profile: ToleranceProfile = DEFAULT) -> float:
    return float(np.max(np.linalg.norm(mean_curvature(M, grid.params, method, profile), axis=-1)))


def is_minimal(M: ImmersedSubmanifold, grid: ChartGrid, method: str = "fd", profile: ToleranceProfile = DEFAULT) -> bool:
    return mean_curvature_sup(M, grid, method, profile) <= profile.minimal_threshold


@dataclass(frozen=True)
class MinimalEigenResidual:
    residual: float
    eigenvalue: float
    section_norm: float
    skipped: bool = False
    advisory: bool = False
    note: str = ""


def _l2(grid: ChartGrid, values) -> float:
    return float(np.sqrt(grid.weights @ np.sum(np.asarray(values) ** 2, axis=-1)))


def eigen_residual_minimal(M: ImmersedSubmanifold, ell: LinearFunction, grid: ChartGrid, method: str = "fd",
                           profile: ToleranceProfile = DEFAULT) -> MinimalEigenResidual:
    """Relative L2 residual of J_M V_l + m V_l; a vanishing V_l is reported as skipped."""
    eigenvalue = -float(M.m)
    V = v_ell_section(M, ell, method, profile)
    values = V(grid.params)
    norm = _l2(grid, values)
    if float(np.max(np.linalg.norm(values, axis=-1))) <= profile.zero_section_tol * max(1.0, np.linalg.norm(ell.a)):
        return MinimalEigenResidual(0.0, eigenvalue, norm, skipped=True, note="V_l vanishes identically")
    J = map_chunks(lambda t: jacobi_apply_minimal(M, V, t, method, profile), grid.params, 512)
    return MinimalEigenResidual(_l2(grid, J - eigenvalue * values) / norm, eigenvalue, norm,
                                advisory=not M.claims_minimal)


@dataclass(frozen=True)
class RigidityResult:
    rank: int
    gram_spectrum: tuple
    totally_geodesic: bool
    sff_sup: float
    codimension: int

    @property
    def consistent(self) -> bool:
        """rank = n - m exactly when M is totally geodesic, and rank >= n - m always."""
        return self.rank >= self.codimension and ((self.rank == self.codimension) == self.totally_geodesic)


def multiplicity_and_rigidity(M: ImmersedSubmanifold, grid: ChartGrid, method: str = "fd",
                              profile: ToleranceProfile = DEFAULT) -> RigidityResult:
    sections = [v_ell_section(M, ell, method, profile)(grid.params) for ell in LinearFunction.basis(M.n + 1)]
    gram = gram_matrix(grid.weights, sections, lambda a, b: np.sum(a * b, axis=-1))
    gr: GramRank = numerical_rank(gram, profile.rank_eps)
    geo = chart_geometry(M, grid.params, method, profile)
    sup = float(np.sqrt(np.max(sff_norm_sq(geo))))
    return RigidityResult(gr.rank, gr.gram_spectrum, sup <= profile.totally_geodesic_tol, sup, M.n - M.m)


# ---------------------------------------------------------------------------
# lowest eigenvalue on flat tori and on the equatorial 2-sphere


def lowest_eigenvalue_estimate(M: ImmersedSubmanifold, grid_level: int = 2, method: str = "analytic",
                               profile: ToleranceProfile = DEFAULT) -> float:
    """Smallest eigenvalue of a second-order discretization of J_M on scalar normal fields.

    Supported: hypersurfaces with a flat periodic 2-dimensional chart (Clifford
    torus) and the equatorial S^2 in S^3.
    """
    if M.m == 2 and M.n == 3 and M.domain.kinds == (PERIODIC, PERIODIC):
        return _lowest_periodic(M, grid_level, method, profile)
    if M.m == 2 and M.n == 3 and M.domain.kinds == (POLAR, PERIODIC) and M.claims_totally_geodesic:
        return _lowest_latlong(M, grid_level, method, profile)
    raise CapabilityError(f"no discrete eigensolver for {M.name}")


def _smallest(A, mass=None) -> float:
    vals = eigsh(A.tocsc(), k=1, M=mass, sigma=-50.0, which="LM", return_eigenvectors=False)
    return float(np.min(vals))


def _lowest_periodic(M, level, method, profile) -> float:
    n = 16 * 2**level
    h = 2 * np.pi / n
    t = h * np.arange(n)
    T1, T2 = np.meshgrid(t, t, indexing="ij")
    theta = np.stack([T1.ravel(), T2.ravel()], axis=-1)
    geo = chart_geometry(M, theta, method, profile)
    if np.max(np.abs(geo.G - geo.G[:1])) > 1e-10 or abs(geo.G[0, 0, 1]) > 1e-10:
        raise CapabilityError(f"{M.name}: chart metric is not constant diagonal")
    g11, g22 = geo.Ginv[0, 0, 0], geo.Ginv[0, 1, 1]
    lap1 = sp.diags([np.ones(n - 1), -2 * np.ones(n), np.ones(n - 1)], [-1, 0, 1], format="lil")
    lap1[0, n - 1] = lap1[n - 1, 0] = 1.0
    lap1 = lap1.tocsr() / h**2
    eye = sp.identity(n, format="csr")
    lap = g11 * sp.kron(lap1, eye) + g22 * sp.kron(eye, lap1)
    potential = M.m + sff_norm_sq(geo)
    return _smallest(-lap - sp.diags(potential))


def _lowest_latlong(M, level, method, profile) -> float:
    nt = 16 * 2**level
    nphi = 2 * nt
    dt = np.pi / nt
    dphi = 2 * np.pi / nphi
    tc = dt * (np.arange(nt) + 0.5)
    tf = dt * np.arange(nt + 1)
    sc, sf = np.sin(tc), np.sin(tf)
    rows, cols, vals = [], [], []
    idx = np.arange(nt * nphi).reshape(nt, nphi)
    for i in range(nt):
        for j in range(nphi):
            k = idx[i, j]
            diag = 0.0
            for ii, face in ((i + 1, sf[i + 1]), (i - 1, sf[i])):
                if 0 <= ii < nt and face > 0:
                    c = face / dt**2
                    rows.append(k); cols.append(idx[ii, j]); vals.append(-c)
                    diag += c
            c = 1.0 / (sc[i] * dphi**2)
            for jj in ((j + 1) % nphi, (j - 1) % nphi):
                rows.append(k); cols.append(idx[i, jj]); vals.append(-c)
                diag += c
            rows.append(k); cols.append(k); vals.append(diag)
    stiff = sp.csr_matrix((vals, (rows, cols)), shape=(nt * nphi, nt * nphi))
    T, P = np.meshgrid(tc, dphi * np.arange(nphi), indexing="ij")
    geo = chart_geometry(M, np.stack([T.ravel(), P.ravel()], axis=-1), method, profile)
    weight = np.repeat(sc, nphi)
    potential = M.m + sff_norm_sq(geo)
    # -Lap f = stiff f / (sin theta) in the lumped mass sin(theta)
    A = stiff - sp.diags(potential * weight)
    return _smallest(A, sp.diags(weight).tocsc())


# ---------------------------------------------------------------------------
# catalog


def _exact(M_param: TrigParametrization):
    return M_param.position, M_param.first, M_param.second


def equator(m: int, n: int) -> ImmersedSubmanifold:
    """S^m as the equatorial sphere in the first m+1 coordinates of S^n."""
    terms = []
    for k in range(m + 1):
        factors = [_sin(j) for j in range(min(k, m - 1))]
        if k < m - 1:
            factors.append(_cos(k))
        elif k == m - 1:
            factors.append(_cos(m - 1))
        else:
            factors.append(_sin(m - 1))
        terms.append(_term(k, 1.0, m, *factors))
    par = TrigParametrization(m, n + 1, terms)
    pos, d1, d2 = _exact(par)
    kinds = tuple([POLAR] * (m - 1) + [PERIODIC])
    return ImmersedSubmanifold(f"equator-{m}-{n}", m, n, pos, ChartDomain(kinds), d1, d2,
                               claims_totally_geodesic=True, description="totally geodesic equator")


def clifford_torus() -> ImmersedSubmanifold:
    r = np.sqrt(0.5)
    par = TrigParametrization(2, 4, [
        _term(0, r, 2, _cos(0)), _term(1, r, 2, _sin(0)), _term(2, r, 2, _cos(1)), _term(3, r, 2, _sin(1))])
    pos, d1, d2 = _exact(par)
    return ImmersedSubmanifold("clifford-torus", 2, 3, pos, ChartDomain((PERIODIC, PERIODIC)), d1, d2,
                               description="minimal Clifford torus")


def clifford_torus_normal(theta):
    theta = np.asarray(theta, dtype=float)
    a, b = theta[..., 0], theta[..., 1]
    return np.sqrt(0.5) * np.stack([np.cos(a), np.sin(a), -np.cos(b), -np.sin(b)], axis=-1)


def generalized_clifford() -> ImmersedSubmanifold:
    """S^1(sqrt(1/3)) x S^2(sqrt(2/3)) in S^4; chart (t, polar, azimuth)."""
    r1, r2 = np.sqrt(1 / 3), np.sqrt(2 / 3)
    par = TrigParametrization(3, 5, [
        _term(0, r1, 3, _cos(0)), _term(1, r1, 3, _sin(0)),
        _term(2, r2, 3, _cos(1)), _term(3, r2, 3, _sin(1), _cos(2)), _term(4, r2, 3, _sin(1), _sin(2))])
    pos, d1, d2 = _exact(par)
    return ImmersedSubmanifold("clifford-1-2", 3, 4, pos, ChartDomain((PERIODIC, POLAR, PERIODIC)), d1, d2,
                               description="generalized Clifford hypersurface")


def small_circle(r: float = 0.6) -> ImmersedSubmanifold:
    """Circle of Euclidean radius r in S^2: constant |H|, parallel H, not minimal."""
    par = TrigParametrization(1, 3, [
        _term(0, r, 1, _cos(0)), _term(1, r, 1, _sin(0)), _term(2, np.sqrt(1 - r * r), 1)])
    pos, d1, d2 = _exact(par)
    return ImmersedSubmanifold(f"small-circle-{r:g}", 1, 2, pos, ChartDomain((PERIODIC,)), d1, d2,
                               claims_minimal=False, description="non-minimal control, parallel mean curvature")


def wavy_circle(eps: float = 0.3) -> ImmersedSubmanifold:
    """Normalized (cos t, sin t, 1 + eps cos 2t): non-constant curvature, so H is not parallel."""

    def position(theta):
        t = np.asarray(theta, dtype=float)[..., 0]
        v = np.stack([np.cos(t), np.sin(t), 1.0 + eps * np.cos(2 * t)], axis=-1)
        return v / np.linalg.norm(v, axis=-1, keepdims=True)

    return ImmersedSubmanifold(f"wavy-circle-{eps:g}", 1, 2, position, ChartDomain((PERIODIC,)),
                               claims_minimal=False, claims_parallel_mean_curvature=False,
                               description="non-minimal control without parallel mean curvature")


def minimal_catalog() -> dict[str, Callable[[], ImmersedSubmanifold]]:
    return {
        "equator-2-3": lambda: equator(2, 3),
        "equator-2-5": lambda: equator(2, 5),
        "equator-3-5": lambda: equator(3, 5),
        "clifford-torus": clifford_torus,
        "clifford-1-2": generalized_clifford,
        "small-circle-0.6": lambda: small_circle(0.6),
        "wavy-circle-0.3": lambda: wavy_circle(0.3),
    }


def get_submanifold(name: str) -> ImmersedSubmanifold:
    catalog = minimal_catalog()
    if name not in catalog:
        raise KeyError(f"unknown submanifold {name!r}; known: {', '.join(catalog)}")
    return catalog[name]()
