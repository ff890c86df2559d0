"""Report schemas emitted by the solver, the diagnostics and the fit driver."""

from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field


class SolveReport(BaseModel):
    """Outcome of one minimization run."""

    converged: bool
    stop_reason: str = Field(description="tol_field, energy_plateau, max_sweeps, box_bound or energy_increase")
    sweeps: int
    energy_initial: float
    energy_final: float
    energy_trace: List[float] = Field(default_factory=list, description="Energy every trace_stride sweeps")
    final_change: float = Field(description="Max nodal change of the last sweep")
    pde_residual: Optional[float] = Field(default=None, description="Max |Δ_hψ + f₀(ψ)| on all-wet stencils")
    wall_time: float = Field(description="Seconds spent sweeping")
    sweep_order: str
    mode: str
    tol_field: float
    relaxation: float = 1.0
    continuation_stages: int = Field(default=0, description="Penalized stages run before this solve")


class CheckResult(BaseModel):
    """One enabled diagnostic compared with its tolerance."""

    name: str
    passed: bool
    value: Optional[float] = None
    tolerance: Optional[float] = None
    skipped: bool = False
    detail: str = ""


class FlatnessReport(BaseModel):
    center: List[float]
    rho: float
    nu: List[float]
    sigma_plus: float
    sigma_minus: float
    delta: float


class NondegeneracyResult(BaseModel):
    center: List[float]
    radius: float
    mean: float = Field(description="(1/r)·circle mean of φ = Q - ψ")
    lower_branch: Optional[bool] = Field(
        default=None, description="m <= c*·λ implies φ ≡ 0 on B_{κr}; None if not triggered"
    )
    upper_branch: Optional[bool] = Field(
        default=None, description="m >= C*·λ implies φ > 0 on B_r; None if not triggered"
    )

    @property
    def passed(self) -> bool:
        return self.lower_branch is not False and self.upper_branch is not False


class BlowupResult(BaseModel):
    center: List[float]
    radius: float
    nu: List[float]
    deviation: float


class DiagnosticsReport(BaseModel):
    """Per-probe lemma-level measurements for one converged field."""

    density: List[float] = Field(default_factory=list)
    measure_ratios: Dict[str, List[float]] = Field(
        default_factory=dict, description="μ(B_r)/r per probe point, keyed by radius in cells"
    )
    nondegeneracy: List[NondegeneracyResult] = Field(default_factory=list)
    flatness: List[FlatnessReport] = Field(default_factory=list)
    blowup: List[BlowupResult] = Field(default_factory=list)
    bernoulli_samples: int = 0
    bernoulli_skipped: int = 0
    bernoulli_median_error: Optional[float] = None
    lipschitz: Optional[float] = None
    oscillation: Optional[float] = None


class CurveSummary(BaseModel):
    columns: int
    truncated_columns: int
    k_min: float
    k_max: float
    k_at_outlet: Optional[float] = None


class FitIterate(BaseModel):
    lam: float
    k0: float
    predicate: bool = Field(description="k(0) < a")
    sweeps: int


class FitReport(BaseModel):
    L: float
    h: float
    lambda_fit: float
    k0: float
    a: float
    bracket: List[float]
    trace: List[FitIterate] = Field(default_factory=list)
    monotone: bool = True
    fallback_scan: bool = False
    h_lambda: float
    p_diff: float


class AsymptoticsReport(BaseModel):
    upstream_deviation: float = Field(description="max |ψ - ∫₀^y u0| at x = -L/2")
    downstream_deviation: float = Field(description="max |ψ - Ψ_λ| at x = 3L/4")
    height_deviation: float = Field(description="|k - h_λ| at x = 3L/4")
    upstream_x: float
    downstream_x: float


class ContinuationReport(BaseModel):
    """Fits across the truncation schedule."""

    fits: List[FitReport] = Field(default_factory=list)
    failures: Dict[str, str] = Field(default_factory=dict, description="L -> error message")
    lambda_extrapolated: Optional[float] = None
    spread: Optional[float] = None
    unstable: bool = False


class RunReport(BaseModel):
    """Top-level report written as report.json."""

    subcommand: str
    config: Dict[str, Any]
    versions: Dict[str, str] = Field(default_factory=dict)
    Q: Optional[float] = None
    lambda0: Optional[float] = None
    lam: Optional[float] = None
    h_lambda: Optional[float] = None
    p_diff: Optional[float] = None
    solve: Optional[SolveReport] = None
    curve: Optional[CurveSummary] = None
    fit: Optional[FitReport] = None
    continuation: Optional[ContinuationReport] = None
    diagnostics: Optional[DiagnosticsReport] = None
    asymptotics: Optional[AsymptoticsReport] = None
    checks: List[CheckResult] = Field(default_factory=list)
    tables: Dict[str, str] = Field(default_factory=dict, description="Table name -> file name")
    error: Optional[Dict[str, Any]] = None
    timings: Dict[str, float] = Field(default_factory=dict, description="Seconds per stage")

    @property
    def passed(self) -> bool:
        return self.error is None and all(c.passed or c.skipped for c in self.checks)
