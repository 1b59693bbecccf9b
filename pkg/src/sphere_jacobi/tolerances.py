"""Tolerance profiles shared by every module.

All thresholds used downstream are read from a single
:class:`ToleranceProfile`, so a run is fully determined by the preset name
plus explicit overrides.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, fields, replace


@dataclass(frozen=True)
class ToleranceProfile:
    # finite-difference steps along geodesics / chart directions
    fd_step_first: float = 1e-4
    fd_step_second: float = 1e-3
    rk4_substeps: int = 10
    # residual thresholds per evaluation route
    analytic_tol: float = 1e-8
    fd_tol: float = 5e-4
    bochner_tol: float = 1e-3
    algebraic_tol: float = 1e-10
    tangency_tol: float = 1e-8
    # admission thresholds
    harmonic_threshold: float = 1e-3
    ym_threshold: float = 5e-4
    minimal_threshold: float = 1e-3
    totally_geodesic_tol: float = 1e-6
    zero_section_tol: float = 1e-6
    # spectral utilities
    rank_eps: float = 1e-6
    # second variation
    variation_steps: tuple[float, ...] = (1e-2, 5e-3, 2.5e-3)
    variation_rel_tol: float = 1e-2
    first_variation_rel: float = 1e-4
    first_variation_abs: float = 1e-6
    # negative controls
    non_ym_floor: float = 1e-2
    non_minimal_floor: float = 0.1

    def residual_tol(self, method: str) -> float:
        return self.analytic_tol if method == "analytic" else self.fd_tol

    def with_overrides(self, **kwargs) -> "ToleranceProfile":
        known = {f.name: f for f in fields(self)}
        clean = {}
        for key, value in kwargs.items():
            if key not in known:
                raise KeyError(f"unknown tolerance field {key!r}")
            current = getattr(self, key)
            if isinstance(current, tuple):
                clean[key] = tuple(float(v) for v in value)
            else:
                clean[key] = type(current)(value)
        return replace(self, **clean)

    def as_dict(self) -> dict:
        return asdict(self)


PRESETS: dict[str, ToleranceProfile] = {
    "default": ToleranceProfile(),
    # looser steps for quick interactive runs
    "coarse": ToleranceProfile(fd_step_first=1e-3, fd_step_second=5e-3, fd_tol=5e-3, bochner_tol=1e-2),
}

DEFAULT = PRESETS["default"]


def get_profile(name: str) -> ToleranceProfile:
    try:
        return PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown tolerance preset {name!r}; choose from {sorted(PRESETS)}") from None
