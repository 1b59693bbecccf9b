"""Acceptance criteria, one test each; every test prints a single PASS/FAIL line."""
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from sphere_jacobi.forms_calculus import AdjointBundle, bochner_residual, random_polynomial_form
from sphere_jacobi.harmonic_jacobi import (
    constant_map,
    eigen_residual_harmonic,
    get_map,
    hopf_map,
    identity_map,
    jacobi_apply,
    l2_norm,
    multiplicity_bound_harmonic,
    tension_sup,
    x_ell_field,
    zero_section_test,
)
from sphere_jacobi.minimal_jacobi import (
    beta_residuals,
    chart_grid,
    eigen_residual_minimal,
    get_submanifold,
    lowest_eigenvalue_estimate,
    mean_curvature_sup,
    minimal_catalog,
    multiplicity_and_rigidity,
    v_ell_section,
)
from sphere_jacobi.sphere_core import LinearFunction, quadrature_grid, random_sphere_points, random_tangent_vectors
from sphere_jacobi.variational_oracle import (
    connection_variation,
    map_variation,
    second_variation_check,
    submanifold_variation,
)
from sphere_jacobi.yangmills_jacobi import (
    b_ell_form,
    coclosed_check,
    commutator_identity_check,
    eigen_residual_ym,
    flat_connection,
    get_connection,
    levi_civita_connection,
    multiplicity_bound_ym,
    random_antisymmetric_curvature,
    synthetic_commutator_residual,
    yang_mills_catalog,
)

SEED = 0x1AC0B1


def report(tag: str, ok: bool, detail: str) -> None:
    line = f"{tag} {'PASS' if ok else 'FAIL'}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def test_ac1_harmonic_identity_eigenvalue():
    worst = {"analytic": 0.0, "fd": 0.0}
    slowest = 0.0
    for m in (3, 4, 5):
        start = time.perf_counter()
        u = identity_map(m)
        grid = quadrature_grid(m, 2)
        for method in worst:
            for ell in LinearFunction.basis(m + 1):
                worst[method] = max(worst[method], eigen_residual_harmonic(u, ell, grid, method).residual)
        slowest = max(slowest, time.perf_counter() - start)
    ok = worst["analytic"] <= 1e-8 and worst["fd"] <= 5e-4 and slowest <= 30.0
    report("AC1", ok, f"identity m=3,4,5 analytic {worst['analytic']:.2e} <= 1e-8, fd {worst['fd']:.2e} <= 5e-4, "
                      f"slowest map {slowest:.1f}s <= 30s")


def test_ac2_hopf_suite():
    u = hopf_map()
    grid = quadrature_grid(3, 2)
    tension = tension_sup(u, grid)
    eigen = max(eigen_residual_harmonic(u, ell, grid, "fd").residual for ell in LinearFunction.basis(4))
    gr = multiplicity_bound_harmonic(u, grid)
    ok = tension <= 5e-4 and eigen <= 5e-4 and gr.rank == 4 and gr.condition >= 1e-4
    report("AC2", ok, f"hopf tension {tension:.2e}, eigen(-1) {eigen:.2e}, rank {gr.rank}, "
                      f"sigma_min/sigma_max {gr.condition:.3f}")


def test_ac3_identity_s2_null_direction():
    u = identity_map(2)
    grid = quadrature_grid(2, 2)
    worst = 0.0
    for ell in LinearFunction.basis(3):
        X = x_ell_field(u, ell)
        worst = max(worst, l2_norm(grid, jacobi_apply(u, X, grid.points)) / l2_norm(grid, X(grid.points)))
    report("AC3", worst <= 5e-4, f"identity S^2 |J X_l| / |X_l| = {worst:.2e} <= 5e-4")


def test_ac4_yang_mills_identity():
    parts, ok = [], True
    for m in (4, 5, 6):
        D = levi_civita_connection(m)
        grid = quadrature_grid(m, 2)
        basis = LinearFunction.basis(m + 1)
        eigen = max(eigen_residual_ym(D, ell, grid, "fd").residual for ell in basis)
        cocl = max(coclosed_check(D, ell, grid, "fd") for ell in basis)
        rank = multiplicity_bound_ym(D, grid).rank
        ok &= eigen <= 5e-4 and cocl <= 5e-4 and rank == m + 1
        parts.append(f"TS{m} eigen({4 - m}) {eigen:.1e} coclosed {cocl:.1e} rank {rank}")
    report("AC4", ok, "; ".join(parts))


def test_ac5_commutator_identity():
    rng = np.random.default_rng(SEED)
    synthetic = max(synthetic_commutator_residual(random_antisymmetric_curvature(m, k, rng, (100,)),
                                                  rng.standard_normal((100, m)))
                    for m, k in ((3, 2), (4, 4), (5, 3), (6, 7)))
    catalog = 0.0
    for name in yang_mills_catalog():
        D = get_connection(name)
        x = random_sphere_points(D.m, 100, rng)
        X = random_tangent_vectors(x, rng)
        a = rng.standard_normal((100, D.m + 1))
        catalog = max(catalog, max(commutator_identity_check(D, LinearFunction(a[i]), x[i], X[i])
                                   for i in range(100)))
    ok = synthetic <= 1e-10 and catalog <= 1e-10
    report("AC5", ok, f"synthetic {synthetic:.1e}, catalog {catalog:.1e} <= 1e-10")


@pytest.mark.slow
def test_ac6_bochner_identities():
    rng = np.random.default_rng(SEED)
    worst = {1: 0.0, 2: 0.0}
    for name in yang_mills_catalog():
        D = get_connection(name)
        x = random_sphere_points(D.m, 2, rng)
        for degree in worst:
            form = random_polynomial_form(AdjointBundle(D.bundle), degree, rng, count=50)
            worst[degree] = max(worst[degree], float(np.max(bochner_residual(form, x))))
    ok = max(worst.values()) <= 1e-3
    report("AC6", ok, f"50 random so(E) forms per connection, 1-forms {worst[1]:.1e}, 2-forms {worst[2]:.1e} <= 1e-3")


def test_ac7_minimal_identity():
    eq = get_submanifold("equator-2-3")
    eq_grid = chart_grid(eq, 2, "analytic")
    eq_res = eigen_residual_minimal(eq, LinearFunction.coordinate(3, 4), eq_grid, "analytic").residual
    eq_rig = multiplicity_and_rigidity(eq, eq_grid, "analytic")
    cl = get_submanifold("clifford-torus")
    cl_grid = chart_grid(cl, 2, "fd")
    cl_res = max(eigen_residual_minimal(cl, ell, cl_grid, "fd").residual for ell in LinearFunction.basis(4))
    cl_rig = multiplicity_and_rigidity(cl, cl_grid, "fd")
    lam = lowest_eigenvalue_estimate(cl, 2)
    e25 = get_submanifold("equator-2-5")
    rank25 = multiplicity_and_rigidity(e25, chart_grid(e25, 2, "analytic"), "analytic").rank
    ok = (eq_res <= 1e-10 and eq_rig.rank == 1 and eq_rig.totally_geodesic
          and cl_res <= 5e-4 and cl_rig.rank == 4 and not cl_rig.totally_geodesic
          and abs(lam + 4.0) <= 0.08 and lam <= -2.0 and rank25 == 3)
    report("AC7", ok, f"equator S2<S3 residual {eq_res:.1e} rank {eq_rig.rank} tg {eq_rig.totally_geodesic}; "
                      f"clifford residual {cl_res:.1e} rank {cl_rig.rank} tg {cl_rig.totally_geodesic} "
                      f"lambda1 {lam:.4f}; equator S2<S5 rank {rank25}")


def test_ac8_beta_characterization():
    codazzi, ok, parts = 0.0, True, []
    for name in minimal_catalog():
        M = get_submanifold(name)
        beta = beta_residuals(M, chart_grid(M, 2, "fd"), "fd")
        codazzi = max(codazzi, beta.codazzi_residual)
        matches = (beta.coclosed_residual <= 5e-4) == M.claims_parallel_mean_curvature
        ok &= matches
        if not matches:
            parts.append(f"{name} d*beta {beta.coclosed_residual:.1e} mismatched")
    small = get_submanifold("small-circle-0.6")
    h = mean_curvature_sup(small, chart_grid(small, 2, "fd"), "fd")
    ok &= codazzi <= 5e-4 and h > 0.1
    parts.insert(0, f"codazzi sup {codazzi:.1e} <= 5e-4, d*beta small only on parallel-H entries, "
                    f"small circle |H| {h:.3f} > 0.1")
    report("AC8", ok, "; ".join(parts))


@pytest.mark.slow
def test_ac9_second_variation():
    start = time.perf_counter()
    gaps, ok, bad = [], True, []

    def run(label, family, unstable):
        nonlocal ok
        r = second_variation_check(family)
        good = r.relative_gap <= 1e-2 and (not unstable or (r.fd_value < 0 and r.quadratic_form_value < 0))
        gaps.append(r.relative_gap)
        if not good:
            ok = False
            bad.append(f"{label} fd {r.fd_value:.4g} q {r.quadratic_form_value:.4g}")

    for name in ("identity-s3", "identity-s4", "identity-s5", "hopf"):
        u = get_map(name)
        grid = quadrature_grid(u.m, 2)
        run(name, map_variation(u, x_ell_field(u, LinearFunction.coordinate(0, u.m + 1)), grid), True)
    for name in ("levicivita-ts5", "levicivita-ts6"):
        D = get_connection(name)
        grid = quadrature_grid(D.m, 2)
        run(name, connection_variation(D, b_ell_form(D, LinearFunction.coordinate(0, D.m + 1)), grid), True)
    for name in ("equator-2-3", "equator-3-5", "clifford-torus", "clifford-1-2"):
        M = get_submanifold(name)
        grid = chart_grid(M, 2, "analytic")
        run(name, submanifold_variation(M, v_ell_section(M, LinearFunction(np.ones(M.n + 1)), "analytic"), grid,
                                        "analytic"), True)
    elapsed = time.perf_counter() - start
    ok &= elapsed <= 300.0
    detail = f"{len(gaps)} objects, worst relative gap {max(gaps):.1e} <= 1e-2, all negative, {elapsed:.0f}s <= 300s"
    report("AC9", ok, "; ".join([detail] + bad))


def test_ac10_degeneracy_detectors():
    u = constant_map(3, 2)
    grid = quadrature_grid(3, 2)
    x_zero = all(zero_section_test(u, ell, grid)[2] for ell in LinearFunction.basis(4))
    u_rank = multiplicity_bound_harmonic(u, grid).rank
    D = flat_connection(5, 3)
    grid5 = quadrature_grid(5, 2)
    rng = np.random.default_rng(SEED)
    x = random_sphere_points(5, 20, rng)
    X = random_tangent_vectors(x, rng)
    b_zero = all(np.all(b_ell_form(D, ell)(x, X) == 0.0) for ell in LinearFunction.basis(6))
    d_rank = multiplicity_bound_ym(D, grid5).rank
    ok = x_zero and u_rank == 0 and b_zero and d_rank == 0
    report("AC10", ok, f"constant map X_l == 0 {x_zero} rank {u_rank}; flat connection B_l == 0 {b_zero} "
                       f"rank {d_rank}")
