"""Run configuration schemas.

A run is described by one YAML document validated into RunConfig. Unknown
keys are rejected at every level so that typos surface as errors instead of
silently falling back to defaults.
"""

from pathlib import Path
from typing import List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

DIAGNOSTIC_NAMES = (
    "invariants",
    "bernoulli",
    "nondegeneracy",
    "density",
    "measure_growth",
    "flatness",
    "blowup",
    "lipschitz",
    "oscillation",
    "asymptotics",
    "smooth_fit",
    "uniqueness",
    "comparison",
    "positivity",
)


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class GeometryConfig(_Section):
    """Nozzle wall preset and its parameters."""

    preset: Literal["straight", "converging_rational", "converging_tanh", "tabulated"] = Field(
        default="straight", description="Nozzle wall family"
    )
    height: float = Field(default=1.0, gt=0, description="Wall height of the straight preset")
    a: float = Field(default=1.0, gt=0, description="Outlet height g(0) of converging presets")
    H: float = Field(default=1.5, gt=0, description="Upstream height of converging presets")
    width: float = Field(default=1.0, gt=0, description="Transition width of the tanh preset")
    vertices_x: Optional[List[float]] = Field(default=None, description="Polyline x, ending at 0")
    vertices_y: Optional[List[float]] = Field(default=None, description="Polyline heights")
    wall_tol: float = Field(default=1e-3, gt=0, description="Allowed |g(-L) - H|")

    @model_validator(mode="after")
    def check_tabulated(self) -> "GeometryConfig":
        if self.preset == "tabulated":
            if not self.vertices_x or not self.vertices_y:
                raise ValueError("tabulated geometry requires vertices_x and vertices_y")
            if len(self.vertices_x) != len(self.vertices_y):
                raise ValueError("vertices_x and vertices_y must have equal length")
        if self.preset in ("converging_rational", "converging_tanh") and self.H < self.a:
            raise ValueError("converging presets require H >= a")
        return self

    def upstream_height(self) -> float:
        if self.preset == "straight":
            return self.height
        if self.preset == "tabulated":
            return float(self.vertices_y[0])
        return self.H

    def max_height(self) -> float:
        if self.preset == "straight":
            return self.height
        if self.preset == "tabulated":
            return float(max(self.vertices_y))
        return max(self.H, self.a)


class ProfileConfig(_Section):
    """Upstream velocity preset u0 on [0, H]."""

    preset: Literal["constant", "quadratic_shear", "tabulated"] = Field(
        default="constant", description="Inlet velocity family"
    )
    speed: float = Field(default=1.0, gt=0, description="Speed of the constant preset")
    base: float = Field(default=1.0, gt=0, description="u0(0) of the shear preset")
    curvature: float = Field(default=1.0, ge=0, description="c in u0 = base + c·y²")
    heights: Optional[List[float]] = Field(default=None, description="Tabulated sample heights")
    speeds: Optional[List[float]] = Field(default=None, description="Tabulated sample speeds")
    quad_tol: float = Field(default=1e-10, gt=0, description="Absolute quadrature tolerance")
    table_nodes: int = Field(default=2049, ge=65, description="Strength table resolution on [0, Q]")

    @model_validator(mode="after")
    def check_tabulated(self) -> "ProfileConfig":
        if self.preset == "tabulated":
            if not self.heights or not self.speeds:
                raise ValueError("tabulated profile requires heights and speeds")
            if len(self.heights) != len(self.speeds):
                raise ValueError("heights and speeds must have equal length")
        return self

    def lambda0(self, height: float) -> float:
        """Inlet surface speed u0(H), the smallest admissible Bernoulli constant."""
        if self.preset == "constant":
            return self.speed
        if self.preset == "quadratic_shear":
            return self.base + self.curvature * height**2
        return float(self.speeds[-1])


class GridConfig(_Section):
    h: float = Field(default=1.0 / 32.0, gt=0, description="Grid spacing")
    L: float = Field(default=4.0, gt=0, description="Truncation half-width for single runs")
    L_schedule: List[float] = Field(
        default_factory=list, description="Increasing truncations for continuation"
    )
    h_schedule: Optional[List[float]] = Field(
        default=None, description="Grid spacing per L_schedule entry"
    )

    @model_validator(mode="after")
    def check_schedule(self) -> "GridConfig":
        if any(b <= a for a, b in zip(self.L_schedule, self.L_schedule[1:])):
            raise ValueError("L_schedule must be strictly increasing")
        if self.h_schedule is not None:
            if len(self.h_schedule) != len(self.L_schedule):
                raise ValueError("h_schedule must match L_schedule in length")
            if any(h <= 0 for h in self.h_schedule):
                raise ValueError("h_schedule entries must be positive")
        return self

    def spacing_for(self, L: float) -> float:
        if self.h_schedule is not None and L in self.L_schedule:
            return self.h_schedule[self.L_schedule.index(L)]
        return self.h


class SolverConfig(_Section):
    """Gauss-Seidel minimization settings."""

    max_sweeps: Optional[int] = Field(
        default=None, gt=0, description="Sweep cap; default 50 x nodes per side"
    )
    tol_field: Optional[float] = Field(
        default=None, gt=0, description="Max nodal change for convergence; default 1e-8·Q"
    )
    tol_energy: float = Field(
        default=1e-20, gt=0, description="Relative energy decrease counted as a stalled sweep"
    )
    sweep_order: Literal["lexicographic", "red_black"] = Field(default="lexicographic")
    mode: Literal["jump_exact", "penalized"] = Field(default="jump_exact")
    epsilon: Optional[float] = Field(default=None, gt=0, description="Ramp width in penalized mode")
    newton_tol: float = Field(default=1e-14, gt=0, description="Local scalar solve tolerance")
    relaxation: float = Field(
        default=1.0, gt=0, lt=2, description="Over-relaxation factor on wet updates"
    )
    trace_stride: int = Field(default=1, ge=1, description="Record energy every n sweeps")
    log_every: int = Field(default=1000, ge=1, description="Debug progress interval in sweeps")
    continuation_stages: int = Field(
        default=8, ge=0, description="Penalized stages, ε halving from Q, before a dry-start solve"
    )

    @model_validator(mode="after")
    def check_mode(self) -> "SolverConfig":
        if self.mode == "penalized" and self.epsilon is None:
            raise ValueError("penalized mode requires epsilon")
        return self

    def resolved_tol_field(self, Q: float) -> float:
        return self.tol_field if self.tol_field is not None else 1e-8 * Q

    def resolved_max_sweeps(self, shape: tuple) -> int:
        return self.max_sweeps if self.max_sweeps is not None else 50 * max(shape)


class FitConfig(_Section):
    """Continuous-fit search on λ."""

    lambda_hi: Optional[float] = Field(default=None, gt=0, description="Initial upper bracket")
    cap_factor: float = Field(default=10.0, gt=1, description="Bracket cap as a multiple of λ₀")
    tol_lambda: float = Field(default=1e-3, gt=0, description="Bracket width at termination")
    tol_detach: Optional[float] = Field(
        default=None, gt=0, description="Allowed |k(0) - a|; default 2h"
    )
    max_bisections: int = Field(default=40, ge=1)
    extrapolation_columns: int = Field(default=4, ge=1, description="Columns used for k(0)")
    scan_points: int = Field(default=8, ge=3, description="Grid-scan points for the fallback")
    monotone_slack_cells: float = Field(default=2.0, ge=0, description="Allowed k(0) rise in cells")
    concurrent: bool = Field(default=False, description="Run independent solves concurrently")
    warm_start: bool = Field(default=True, description="Seed each solve with the previous field")


class DiagnosticsConfig(_Section):
    enabled: List[str] = Field(
        default_factory=lambda: ["invariants", "bernoulli", "density", "comparison", "positivity"],
        description="Checks to run after a solve",
    )
    probe_points: int = Field(default=9, ge=1, description="Curve points probed per diagnostic")
    radius_cells: List[int] = Field(default_factory=lambda: [8, 16, 32])
    density_c: float = Field(default=0.1, gt=0, lt=0.5)
    density_fraction: float = Field(default=0.95, gt=0, le=1)
    measure_band: float = Field(default=3.0, gt=1, description="Allowed spread of μ(B_r)/r")
    c_star: float = Field(default=0.05, gt=0)
    C_star: float = Field(default=1.25, gt=0)
    kappa_frac: float = Field(default=0.5, gt=0, lt=1)
    bernoulli_C: float = Field(default=2.0, gt=0, description="C in median rel. error <= C·h^½")
    smooth_fit_C: float = Field(default=4.0, gt=0, description="C in slope gap <= C·h^½")
    lipschitz_C: float = Field(default=4.0, gt=0, description="C in |∇ψ| <= C·(λ + Λ)")
    flatness_rho_cells: int = Field(default=16, ge=4)
    oscillation_C: float = Field(default=4.0, gt=0, description="Allowed C_lip of the curve")
    asymptotic_tol: float = Field(
        default=0.05, gt=0, description="Allowed far-field deviation as a fraction of Q"
    )
    uniqueness_factor: float = Field(default=10.0, gt=0, description="Probe gap bound in tol_field")

    @model_validator(mode="after")
    def check_names(self) -> "DiagnosticsConfig":
        unknown = sorted(set(self.enabled) - set(DIAGNOSTIC_NAMES))
        if unknown:
            raise ValueError(f"unknown diagnostics: {', '.join(unknown)}")
        if len(set(self.enabled)) != len(self.enabled):
            raise ValueError("diagnostics must be listed once")
        if self.C_star <= self.c_star:
            raise ValueError("C_star must exceed c_star")
        return self


class OutputConfig(_Section):
    directory: Path = Field(default=Path("runs/latest"))
    field_stride: int = Field(default=1, ge=1, description="Node stride of the field dump")
    write_field: bool = True
    write_grid: bool = False
    write_curve: bool = True
    write_summary: bool = True


class RunConfig(_Section):
    """Complete description of a jetflow run."""

    geometry: GeometryConfig = Field(default_factory=GeometryConfig)
    profile: ProfileConfig = Field(default_factory=ProfileConfig)
    grid: GridConfig = Field(default_factory=GridConfig)
    solver: SolverConfig = Field(default_factory=SolverConfig)
    fit: FitConfig = Field(default_factory=FitConfig)
    diagnostics: DiagnosticsConfig = Field(default_factory=DiagnosticsConfig)
    output: OutputConfig = Field(default_factory=OutputConfig)
    p_atm: float = Field(default=0.0, description="Atmospheric pressure")
    lam: Optional[float] = Field(default=None, gt=0, description="Fixed λ for the solve subcommand")

    @model_validator(mode="after")
    def check_consistency(self) -> "RunConfig":
        H_bar = self.geometry.max_height()
        for L in [self.grid.L, *self.grid.L_schedule]:
            if L <= H_bar:
                raise ValueError(f"truncation L={L:g} must exceed H_bar={H_bar:g}")
        profile_H = self._profile_height()
        if abs(profile_H - self.geometry.upstream_height()) > 1e-9:
            raise ValueError(
                f"profile height {profile_H:g} must equal the nozzle upstream height "
                f"{self.geometry.upstream_height():g}"
            )
        tol_detach = self.fit.tol_detach
        smallest_h = min([self.grid.h, *(self.grid.h_schedule or [])])
        if tol_detach is not None and tol_detach < smallest_h:
            raise ValueError("fit.tol_detach must be at least the grid spacing")
        lam0 = self.profile.lambda0(profile_H)
        if self.fit.lambda_hi is not None and self.fit.lambda_hi <= lam0:
            raise ValueError(f"fit.lambda_hi={self.fit.lambda_hi:g} must exceed λ₀={lam0:g}")
        return self

    def _profile_height(self) -> float:
        if self.profile.preset == "tabulated":
            return float(self.profile.heights[-1])
        return self.geometry.upstream_height()

    def resolved_schedule(self) -> List[float]:
        return list(self.grid.L_schedule) or [self.grid.L]
