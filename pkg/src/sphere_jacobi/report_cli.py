"""Command-line verification runner and JSON reports.

    verify <suite> --object <name> --level <k> --method <analytic|fd>
           --config <path> --out <path> --seed <u64>

Exit status: 0 when every check passes (skips allowed), 1 on any failure,
2 on a configuration error.
"""
from __future__ import annotations

import argparse
import json
import os
import platform
import sys
import tempfile
import time
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Callable, Optional

import numpy as np
import scipy

from . import __version__
from .errors import CapabilityError, ConfigError, DegenerateInputError, JacobiError, NotCriticalError
from .forms_calculus import AdjointBundle, bochner_residual, random_polynomial_form
from .harmonic_jacobi import (
    eigen_residual_harmonic,
    get_map,
    harmonic_catalog,
    harmonic_formula_residual,
    multiplicity_bound_harmonic,
    tension_sup,
    x_ell_field,
    zero_section_test,
)
from .minimal_jacobi import (
    a_tilde_discrepancy,
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
from .sphere_core import LinearFunction, quadrature_grid, random_sphere_points, random_tangent_vectors
from .tolerances import PRESETS, ToleranceProfile, get_profile
from .variational_oracle import (
    connection_variation,
    map_variation,
    second_variation_check,
    submanifold_variation,
)
from .yangmills_jacobi import (
    b_ell_form,
    bianchi_residual,
    coclosed_check,
    commutator_identity_check,
    eigen_residual_ym,
    get_connection,
    laplacian_identity_residual,
    multiplicity_bound_ym,
    random_antisymmetric_curvature,
    synthetic_commutator_residual,
    yang_mills_catalog,
    ym_residual,
)

SCHEMA_VERSION = "1.0"
DEFAULT_SEED = 0x1AC0B1
SUITES = ("harmonic", "yang-mills", "minimal", "variation", "bochner", "all")
METHODS = ("analytic", "fd")
PLUMBING = "plumbing"

DEFAULT_OBJECTS = {
    "harmonic": ("identity-s2", "identity-s3", "identity-s4", "identity-s5", "hopf", "equator-s2-in-s4",
                 "constant-s3-s2"),
    "yang-mills": ("flat-r2-s5", "flat-r3-s5", "levicivita-ts4", "levicivita-ts5", "levicivita-ts6",
                   "perturbed-r3-s5"),
    "minimal": ("equator-2-3", "equator-2-5", "equator-3-5", "clifford-torus", "clifford-1-2",
                "small-circle-0.6", "wavy-circle-0.3"),
    "variation": ("identity-s3", "hopf", "levicivita-ts5", "flat-r2-s5", "clifford-torus", "equator-2-3"),
    "bochner": ("flat-r2-s5", "flat-r3-s5", "levicivita-ts4", "levicivita-ts5", "levicivita-ts6",
                "perturbed-r3-s5"),
}


def setting_of(name: str) -> str:
    if name in harmonic_catalog():
        return "harmonic"
    if name in yang_mills_catalog():
        return "yang-mills"
    if name in minimal_catalog():
        return "minimal"
    raise ConfigError(f"unknown catalog object {name!r}")


# ---------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class RunConfig:
    suite: str
    object: Optional[str] = None
    level: int = 2
    method: str = "fd"
    profile: str = "default"
    out: Optional[str] = None
    seed: int = DEFAULT_SEED
    bochner_forms: int = 50
    bochner_points: int = 2

    def __post_init__(self):
        if self.suite not in SUITES:
            raise ConfigError(f"unknown suite {self.suite!r}; choose from {', '.join(SUITES)}")
        if self.method not in METHODS:
            raise ConfigError(f"unknown method {self.method!r}; choose analytic or fd")
        if self.profile not in PRESETS:
            raise ConfigError(f"unknown tolerance profile {self.profile!r}; known: {', '.join(PRESETS)}")
        if not isinstance(self.level, int) or self.level < 1:
            raise ConfigError(f"grid level must be a positive integer, got {self.level!r}")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must fit in an unsigned 64-bit integer")
        if self.bochner_forms < 1 or self.bochner_points < 1:
            raise ConfigError("bochner_forms and bochner_points must be positive")
        for name in self.objects():
            kind = setting_of(name)
            if self.suite in ("harmonic", "yang-mills", "minimal") and kind != self.suite:
                raise ConfigError(f"{name!r} belongs to the {kind} suite, not {self.suite}")
            if self.suite == "bochner" and kind != "yang-mills":
                raise ConfigError(f"bochner suite runs on connections; {name!r} is a {kind} object")

    def objects(self) -> tuple:
        if self.object is not None:
            return (self.object,)
        if self.suite == "all":
            return ()
        return DEFAULT_OBJECTS[self.suite]

    @property
    def tolerances(self) -> ToleranceProfile:
        return get_profile(self.profile)


_INT_KEYS = {"level", "seed", "bochner_forms", "bochner_points"}


def _parse_int(key: str, text: str) -> int:
    try:
        return int(text, 0)
    except ValueError as exc:
        raise ConfigError(f"{key}: expected an integer, got {text!r}") from exc


def parse_config_file(path: str | os.PathLike) -> dict:
    """Read ``key = value`` lines; '#' starts a comment."""
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    known = {f.name for f in fields(RunConfig)}
    out = {}
    for number, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{number}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in known:
            raise ConfigError(f"{path}:{number}: unknown key {key!r}")
        out[key] = _parse_int(key, value) if key in _INT_KEYS else value
    return out


def build_config(suite: str, file_values: dict, overrides: dict) -> RunConfig:
    values = dict(file_values)
    values.update({k: v for k, v in overrides.items() if v is not None})
    values["suite"] = suite
    return RunConfig(**values)


# ---------------------------------------------------------------------------
# report


@dataclass
class CheckRecord:
    check_id: str
    anchor: str
    value: Optional[float]
    threshold: Optional[float]
    status: str
    comparison: str = "<="
    note: str = ""


@dataclass
class VerificationReport:
    schema_version: str
    config: dict
    environment: dict
    records: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    timing: dict = field(default_factory=dict)

    def finalize(self) -> "VerificationReport":
        statuses = [r.status for r in self.records]
        self.summary = {
            "total": len(statuses),
            "passed": statuses.count("pass"),
            "failed": statuses.count("fail"),
            "skipped": statuses.count("skipped"),
        }
        return self

    @property
    def all_passed(self) -> bool:
        return all(r.status != "fail" for r in self.records)

    def to_dict(self) -> dict:
        """JSON-native view (tuples become lists), so serialization round-trips exactly."""
        return json.loads(json.dumps(asdict(self)))

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)

    @classmethod
    def from_dict(cls, data: dict) -> "VerificationReport":
        records = [CheckRecord(**r) for r in data["records"]]
        return cls(data["schema_version"], data["config"], data["environment"], records, data["summary"],
                   data.get("timing", {}))


class Recorder:
    def __init__(self):
        self.records: list[CheckRecord] = []

    def compare(self, check_id: str, anchor: str, value, threshold, comparison: str = "<=", note: str = ""):
        value = None if value is None else float(value)
        if comparison == "<=":
            ok = value <= threshold
        elif comparison == ">=":
            ok = value >= threshold
        elif comparison == ">":
            ok = value > threshold
        elif comparison == "==":
            ok = value == threshold
        else:
            raise ValueError(comparison)
        self.records.append(CheckRecord(check_id, anchor, value, None if threshold is None else float(threshold),
                                        "pass" if ok else "fail", comparison, note))
        return ok

    def flag(self, check_id: str, anchor: str, ok: bool, note: str = ""):
        self.records.append(CheckRecord(check_id, anchor, float(bool(ok)), 1.0, "pass" if ok else "fail", "==", note))

    def skip(self, check_id: str, anchor: str, note: str):
        self.records.append(CheckRecord(check_id, anchor, None, None, "skipped", "", note))

    def guarded(self, check_id: str, anchor: str, fn: Callable[[], None]):
        """Run ``fn``; engine errors become per-check skips or failures."""
        try:
            fn()
        except (CapabilityError, DegenerateInputError) as exc:
            self.skip(check_id, anchor, f"{type(exc).__name__}: {exc}")
        except JacobiError as exc:
            self.records.append(CheckRecord(check_id, anchor, None, None, "fail", "", f"{type(exc).__name__}: {exc}"))


# ---------------------------------------------------------------------------
# suites

A_TENSION = "tension field -d*du vanishes for harmonic maps"
A_HARM_EIGEN = "J_u X_l = -(m-2) X_l for X_l = du(grad l)"
A_HARM_RANK = "dim of the -(m-2) eigenspace of J_u is at least m+1"
A_HARM_ZERO = "X_l vanishes identically only for constant maps"
A_HARM_FORMULA = "Lap du + sum R^N(du(.), du e_a) du e_a - du(Ric(.)) = 0 for harmonic u"
A_YM = "d_D^* R^D = 0 for Yang-Mills connections"
A_YM_EIGEN = "J_D B_l = -(m-4) B_l for B_l = R^D(grad l, .)"
A_YM_COCLOSED = "d_D^* B_l = 0 at a Yang-Mills connection"
A_YM_COMM = "2 R^D(B_l) - R^D(R^D)(grad l, .) = 0"
A_YM_RANK = "dim of the -(m-4) eigenspace of J_D is at least m+1"
A_YM_BIANCHI = "d_D R^D = 0"
A_YM_LAP = "Lap B_l = R^D(R^D)(grad l, .) + (2m-5) B_l"
A_YM_ZERO = "B_l vanishes identically only for flat connections"
A_MIN_H = "M is minimal iff H = 0"
A_CODAZZI = "(nabla_X B)(Y, Z) = (nabla_Y B)(X, Z) in a space form"
A_COCLOSED_BETA = "H parallel iff beta is d_D-harmonic"
A_MIN_EIGEN = "J_M V_l = -m V_l for V_l = (grad l)^perp"
A_MIN_RANK = "dim of the -m eigenspace of J_M is at least n-m, with equality iff totally geodesic"
A_ATILDE = "<A~(V), W> = sum <(D_e V)^T, (D_e W)^T> = <sum B(e, A^V e), W>"
A_LAMBDA1 = "lambda_1(J_M) <= -m"
A_VARIATION = "d^2/ds^2 F = int <J dir, dir> at a critical point"
A_BOCHNER1 = "Hodge Laplacian of B = -Lap B + B(Ric(.)) + R^D(B)"
A_BOCHNER2 = "Hodge Laplacian of phi = -Lap phi + (2m-4) phi + R^D(phi)"


def _basis(dim: int):
    return LinearFunction.basis(dim)


def run_harmonic(name: str, cfg: RunConfig, rec: Recorder):
    tol = cfg.tolerances
    u = get_map(name)
    grid = quadrature_grid(u.m, cfg.level)
    method = cfg.method
    prefix = f"harmonic/{name}"

    def tension():
        rec.compare(f"{prefix}/tension", A_TENSION, tension_sup(u, grid, method, tol), tol.harmonic_threshold)

    rec.guarded(f"{prefix}/tension", A_TENSION, tension)

    zero_flags = [zero_section_test(u, ell, grid, tol)[2] for ell in _basis(u.m + 1)]
    expected_zero = u.is_constant
    rec.flag(f"{prefix}/zero-section", A_HARM_ZERO, all(z == expected_zero for z in zero_flags),
             note=f"{sum(zero_flags)} of {len(zero_flags)} basis sections vanish")

    for i, ell in enumerate(_basis(u.m + 1)):
        cid = f"{prefix}/eigen/l{i}"

        def eigen(ell=ell, cid=cid):
            r = eigen_residual_harmonic(u, ell, grid, method, tol)
            rec.compare(cid, A_HARM_EIGEN, r.residual, tol.residual_tol(method),
                        note=f"eigenvalue {r.eigenvalue:g}" + (" (advisory)" if r.advisory else ""))

        rec.guarded(cid, A_HARM_EIGEN, eigen)

    gr = multiplicity_bound_harmonic(u, grid, tol)
    expected = 0 if u.is_constant else u.m + 1
    rec.compare(f"{prefix}/rank", A_HARM_RANK, gr.rank, expected, "==",
                note=f"sigma_min/sigma_max = {gr.condition:.3e}")
    if not u.is_constant:
        rec.compare(f"{prefix}/gram-condition", A_HARM_RANK, gr.condition, 1e-4, ">=")

    if method == "fd" or u.hessian is not None:
        rec.guarded(f"{prefix}/harmonic-formula", A_HARM_FORMULA, lambda: rec.compare(
            f"{prefix}/harmonic-formula", A_HARM_FORMULA, harmonic_formula_residual(u, grid, method, tol),
            tol.bochner_tol))


def run_yang_mills(name: str, cfg: RunConfig, rec: Recorder):
    tol = cfg.tolerances
    D = get_connection(name)
    grid = quadrature_grid(D.m, cfg.level)
    method = cfg.method
    prefix = f"yang-mills/{name}"
    rng = np.random.default_rng(cfg.seed)

    def ym():
        value = ym_residual(D, grid, method, tol)
        if D.claims_yang_mills:
            rec.compare(f"{prefix}/ym-residual", A_YM, value, tol.ym_threshold)
        else:
            rec.compare(f"{prefix}/ym-residual", A_YM, value, tol.non_ym_floor, ">",
                        note="negative control: must not be Yang-Mills")

    rec.guarded(f"{prefix}/ym-residual", A_YM, ym)

    for i, ell in enumerate(_basis(D.m + 1)):
        cid = f"{prefix}/eigen/l{i}"
        if not D.claims_yang_mills:
            rec.skip(cid, A_YM_EIGEN, "connection is not Yang-Mills")
            continue

        def eigen(ell=ell, cid=cid):
            r = eigen_residual_ym(D, ell, grid, method, tol)
            rec.compare(cid, A_YM_EIGEN, r.residual, tol.residual_tol(method), note=f"eigenvalue {r.eigenvalue:g}")

        rec.guarded(cid, A_YM_EIGEN, eigen)

    ell0 = LinearFunction.coordinate(0, D.m + 1)
    if D.claims_yang_mills:
        rec.guarded(f"{prefix}/coclosed", A_YM_COCLOSED, lambda: rec.compare(
            f"{prefix}/coclosed", A_YM_COCLOSED,
            max(coclosed_check(D, ell, grid, method, tol) for ell in _basis(D.m + 1)), tol.residual_tol(method)))

    x = random_sphere_points(D.m, 100, rng)
    X = random_tangent_vectors(x, rng)
    a = rng.standard_normal((100, D.m + 1))
    comm = max(commutator_identity_check(D, LinearFunction(a[i]), x[i], X[i]) for i in range(100))
    rec.compare(f"{prefix}/commutator-identity", A_YM_COMM, comm, tol.algebraic_tol)
    synth = synthetic_commutator_residual(random_antisymmetric_curvature(D.m, D.rank, rng, (100,)),
                                          rng.standard_normal((100, D.m)))
    rec.compare(f"{prefix}/commutator-identity-synthetic", A_YM_COMM, synth, tol.algebraic_tol)

    gr = multiplicity_bound_ym(D, grid, tol)
    if D.claims_yang_mills:
        rec.compare(f"{prefix}/rank", A_YM_RANK, gr.rank, 0 if D.is_flat else D.m + 1, "==")
    zero = [gr.gram[i, i] <= tol.zero_section_tol for i in range(D.m + 1)]
    rec.flag(f"{prefix}/zero-form", A_YM_ZERO, all(z == D.is_flat for z in zero),
             note=f"{sum(zero)} of {len(zero)} basis forms vanish")

    coarse = quadrature_grid(D.m, 1)
    rec.guarded(f"{prefix}/bianchi", A_YM_BIANCHI, lambda: rec.compare(
        f"{prefix}/bianchi", A_YM_BIANCHI, bianchi_residual(D, coarse, method, tol), tol.residual_tol(method)))
    if D.claims_yang_mills:
        rec.guarded(f"{prefix}/laplacian-identity", A_YM_LAP, lambda: rec.compare(
            f"{prefix}/laplacian-identity", A_YM_LAP, laplacian_identity_residual(D, ell0, grid, method, tol),
            tol.bochner_tol))


def run_minimal(name: str, cfg: RunConfig, rec: Recorder):
    tol = cfg.tolerances
    M = get_submanifold(name)
    method = cfg.method
    prefix = f"minimal/{name}"
    if method == "analytic" and not M.has_exact_jets:
        rec.skip(f"{prefix}/all", PLUMBING, "CapabilityError: no exact jets; use --method fd")
        return
    grid = chart_grid(M, cfg.level, method, tol)
    hsup = mean_curvature_sup(M, grid, method, tol)
    if M.claims_minimal:
        rec.compare(f"{prefix}/mean-curvature", A_MIN_H, hsup, tol.minimal_threshold)
    else:
        rec.compare(f"{prefix}/mean-curvature", A_MIN_H, hsup, tol.non_minimal_floor, ">",
                    note="negative control: must not be minimal")

    beta = beta_residuals(M, grid, method, tol)
    rtol = tol.residual_tol("fd")
    rec.compare(f"{prefix}/codazzi", A_CODAZZI, beta.codazzi_residual, rtol)
    if M.claims_parallel_mean_curvature:
        rec.compare(f"{prefix}/coclosed-beta", A_COCLOSED_BETA, beta.coclosed_residual, rtol)
    else:
        rec.compare(f"{prefix}/coclosed-beta", A_COCLOSED_BETA, beta.coclosed_residual, tol.non_minimal_floor, ">",
                    note="mean curvature is not parallel")

    if M.claims_minimal:
        eig_tol = tol.algebraic_tol if M.claims_totally_geodesic else rtol
        for i, ell in enumerate(_basis(M.n + 1)):
            cid = f"{prefix}/eigen/l{i}"
            r = eigen_residual_minimal(M, ell, grid, method, tol)
            if r.skipped:
                rec.skip(cid, A_MIN_EIGEN, r.note)
            else:
                rec.compare(cid, A_MIN_EIGEN, r.residual, eig_tol, note=f"eigenvalue {r.eigenvalue:g}")
        rig = multiplicity_and_rigidity(M, grid, method, tol)
        rec.compare(f"{prefix}/rank", A_MIN_RANK, rig.rank, M.n - M.m, "==" if rig.totally_geodesic else ">",
                    note=f"totally_geodesic={rig.totally_geodesic}")
        rec.flag(f"{prefix}/totally-geodesic", A_MIN_RANK, rig.totally_geodesic == M.claims_totally_geodesic,
                 note=f"sup |B| = {rig.sff_sup:.3e}")
        rec.flag(f"{prefix}/rank-rigidity-law", A_MIN_RANK, rig.consistent)

        def lam():
            value = lowest_eigenvalue_estimate(M, 2, method if M.has_exact_jets else "fd", tol)
            rec.compare(f"{prefix}/lambda1", A_LAMBDA1, value, -M.m + 0.05)

        rec.guarded(f"{prefix}/lambda1", A_LAMBDA1, lam)

    rng = np.random.default_rng(cfg.seed)
    V = v_ell_section(M, LinearFunction(rng.standard_normal(M.n + 1)), method, tol)
    rec.compare(f"{prefix}/a-tilde-assemblies", A_ATILDE, a_tilde_discrepancy(M, V, grid.params[:64], method, tol),
                tol.analytic_tol)


def run_variation(name: str, cfg: RunConfig, rec: Recorder):
    tol = cfg.tolerances
    method = cfg.method
    kind = setting_of(name)
    prefix = f"variation/{name}"
    if kind == "harmonic":
        u = get_map(name)
        grid = quadrature_grid(u.m, cfg.level)
        ell = LinearFunction.coordinate(0, u.m + 1)
        family = map_variation(u, x_ell_field(u, ell), grid, method, tol)
        unstable = u.m >= 3 and not u.is_constant
    elif kind == "yang-mills":
        D = get_connection(name)
        grid = quadrature_grid(D.m, cfg.level)
        ell = LinearFunction.coordinate(0, D.m + 1)
        family = connection_variation(D, b_ell_form(D, ell), grid, method, tol)
        unstable = D.m >= 5 and not D.is_flat
    else:
        M = get_submanifold(name)
        grid = chart_grid(M, cfg.level, method, tol)
        ell = LinearFunction(np.ones(M.n + 1))
        family = submanifold_variation(M, v_ell_section(M, ell, method, tol), grid, method, tol)
        unstable = M.claims_minimal

    def check():
        r = second_variation_check(family, profile=tol)
        rec.compare(f"{prefix}/second-variation", A_VARIATION, r.relative_gap, tol.variation_rel_tol,
                    note=f"fd={r.fd_value:.8g} quadratic={r.quadratic_form_value:.8g}")
        if unstable:
            rec.flag(f"{prefix}/negative", A_VARIATION, r.fd_value < 0 and r.quadratic_form_value < 0,
                     note="instability predicted")

    rec.guarded(f"{prefix}/second-variation", A_VARIATION, check)


def run_bochner(name: str, cfg: RunConfig, rec: Recorder):
    tol = cfg.tolerances
    D = get_connection(name)
    rng = np.random.default_rng(cfg.seed)
    adj = AdjointBundle(D.bundle)
    x = random_sphere_points(D.m, cfg.bochner_points, rng)
    for degree, anchor in ((1, A_BOCHNER1), (2, A_BOCHNER2)):
        form = random_polynomial_form(adj, degree, rng, count=cfg.bochner_forms)
        res = bochner_residual(form, x, profile=tol)
        rec.compare(f"bochner/{name}/degree{degree}", anchor, float(np.max(res)), tol.bochner_tol,
                    note=f"{cfg.bochner_forms} forms x {cfg.bochner_points} points")


RUNNERS = {
    "harmonic": run_harmonic,
    "yang-mills": run_yang_mills,
    "minimal": run_minimal,
    "variation": run_variation,
    "bochner": run_bochner,
}


def _plan(cfg: RunConfig) -> list[tuple[str, str]]:
    if cfg.suite != "all":
        return [(cfg.suite, name) for name in cfg.objects()]
    suites = ("harmonic", "yang-mills", "minimal", "variation", "bochner")
    if cfg.object is not None:
        kind = setting_of(cfg.object)
        chosen = [kind, "variation"] + (["bochner"] if kind == "yang-mills" else [])
        return [(s, cfg.object) for s in chosen]
    return [(s, name) for s in suites for name in DEFAULT_OBJECTS[s]]


def run_suite(cfg: RunConfig) -> VerificationReport:
    tol = cfg.tolerances
    rec = Recorder()
    timing = {}
    for suite, name in _plan(cfg):
        start = time.perf_counter()
        RUNNERS[suite](name, cfg, rec)
        timing[f"{suite}/{name}"] = round(time.perf_counter() - start, 3)
    env = {
        "grid_level": cfg.level,
        "method": cfg.method,
        "tolerance_profile": cfg.profile,
        "tolerances": tol.as_dict(),
        "seed": cfg.seed,
        "package_version": __version__,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "python": platform.python_version(),
    }
    config = asdict(cfg)
    report = VerificationReport(SCHEMA_VERSION, config, env, rec.records, timing=timing)
    return report.finalize()


def list_catalog() -> list[dict]:
    rows = []
    for name, make in harmonic_catalog().items():
        u = make()
        rows.append({"name": name, "setting": "harmonic", "m": u.m, "target": f"S^{u.n}",
                     "flags": {"is_constant": u.is_constant, "claims_harmonic": u.claims_harmonic}})
    for name, make in yang_mills_catalog().items():
        D = make()
        rows.append({"name": name, "setting": "yang-mills", "m": D.m, "rank": D.rank,
                     "flags": {"is_flat": D.is_flat, "claims_yang_mills": D.claims_yang_mills}})
    for name, make in minimal_catalog().items():
        M = make()
        rows.append({"name": name, "setting": "minimal", "m": M.m, "n": M.n,
                     "flags": {"claims_minimal": M.claims_minimal,
                               "claims_totally_geodesic": M.claims_totally_geodesic}})
    return rows


def write_atomic(path: str | os.PathLike, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="verify", description="Verify Jacobi-operator identities on round spheres.")
    p.add_argument("suite", help=f"one of {', '.join(SUITES)}, or 'list' to print the catalog")
    p.add_argument("--object", help="catalog name (default: the suite's standard objects)")
    p.add_argument("--level", type=int, help="quadrature grid level (default 2)")
    p.add_argument("--method", help="analytic or fd (default fd)")
    p.add_argument("--profile", help="tolerance preset (default 'default')")
    p.add_argument("--config", help="key=value configuration file; flags override it")
    p.add_argument("--out", help="write the JSON report to this path")
    p.add_argument("--seed", type=lambda s: int(s, 0), help="seed for randomized checks (u64)")
    return p


class _ArgumentError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _ArgumentError(message)


def main(argv: Optional[list[str]] = None) -> int:
    parser = _parser()
    parser.__class__ = _Parser
    try:
        args = parser.parse_args(argv)
    except _ArgumentError as exc:
        print(f"verify: {exc}", file=sys.stderr)
        return 2
    if args.suite == "list":
        print(json.dumps(list_catalog(), indent=2))
        return 0
    try:
        file_values = parse_config_file(args.config) if args.config else {}
        overrides = {"object": args.object, "level": args.level, "method": args.method,
                     "profile": args.profile, "out": args.out, "seed": args.seed}
        cfg = build_config(args.suite, file_values, overrides)
    except (ConfigError, TypeError) as exc:
        print(f"verify: configuration error: {exc}", file=sys.stderr)
        return 2
    report = run_suite(cfg)
    text = report.to_json()
    if cfg.out:
        write_atomic(cfg.out, text + "\n")
    for r in report.records:
        value = "-" if r.value is None else f"{r.value:.3e}"
        print(f"[{r.status:7}] {r.check_id}  {value}  {r.note}")
    s = report.summary
    print(f"total={s['total']} passed={s['passed']} failed={s['failed']} skipped={s['skipped']}")
    return 0 if report.all_passed else 1


if __name__ == "__main__":
    sys.exit(main())
