"""
Jet Fit Module

Drives the continuous-fit search: for a truncation L it finds the smallest
free-boundary speed λ at which the extracted interface detaches below the
nozzle lip, k(0) < a, then continues the fit over an increasing schedule of
truncations. Also assembles the physical fields of a fitted jet and the
measurements that only make sense for a fitted solution (asymptotic
deviations, smooth fit, uniqueness).
"""

import asyncio
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from jetflow.core.exceptions import ConfigurationError, DomainError, FitError, SolverError
from jetflow.schemas.reports import (
    AsymptoticsReport,
    ContinuationReport,
    FitIterate,
    FitReport,
    SolveReport,
)
from jetflow.schemas.run_config import GeometryConfig, ProfileConfig, RunConfig, SolverConfig
from jetflow.services.domain import (
    INTERIOR,
    GEOMETRY_PRESETS,
    NozzleGeometry,
    TruncatedDomainGrid,
    assemble_dirichlet,
    build_domain,
    rasterize,
)
from jetflow.services.freeboundary import FreeBoundaryCurve, extract_curve, with_gradient
from jetflow.services.profiles import (
    ConstantProfile,
    DownstreamState,
    InletProfile,
    QuadraticShearProfile,
    StrengthTable,
    TabulatedProfile,
    UpstreamProfile,
    VorticityModel,
    inlet_stream,
)
from jetflow.services.solver import (
    StreamField,
    dry_field,
    field_gap,
    initial_field,
    minimize,
    minimize_with_continuation,
    warm_start,
)

logger = logging.getLogger(__name__)

UNSTABLE_SPREAD_FACTOR = 5.0
# uniqueness branches stop this far below tol_field; the comparison tolerance is unchanged
UNIQUENESS_POLISH = 0.01


# =========================================================================
# Problem setup
# =========================================================================


def build_geometry(config: GeometryConfig) -> NozzleGeometry:
    if config.preset == "straight":
        return GEOMETRY_PRESETS["straight"](config.height)
    if config.preset == "converging_rational":
        return GEOMETRY_PRESETS["converging_rational"](config.a, config.H)
    if config.preset == "converging_tanh":
        return GEOMETRY_PRESETS["converging_tanh"](config.a, config.H, config.width)
    return GEOMETRY_PRESETS["tabulated"](config.vertices_x, config.vertices_y)


def build_profile(config: ProfileConfig, height: float) -> UpstreamProfile:
    if config.preset == "constant":
        return ConstantProfile(height, config.speed, quad_tol=config.quad_tol)
    if config.preset == "quadratic_shear":
        return QuadraticShearProfile(
            height, base=config.base, curvature=config.curvature, quad_tol=config.quad_tol
        )
    return TabulatedProfile(config.heights, config.speeds, quad_tol=config.quad_tol)


@dataclass(frozen=True)
class JetProblem:
    """Everything about a run that does not depend on λ.

    Attributes:
        base_grid: Rasterized Ω_L without Dirichlet values.
        inlet: Ψ₋L on σ₋L.
        table: Tabulated strength used by the solver kernels.
    """

    config: RunConfig
    geometry: NozzleGeometry
    profile: UpstreamProfile
    model: VorticityModel
    L: float
    h: float
    base_grid: TruncatedDomainGrid
    inlet: InletProfile
    table: StrengthTable

    @classmethod
    def from_config(cls, config: RunConfig, L: Optional[float] = None) -> "JetProblem":
        """Build geometry, profile, vorticity model, grid and inlet data for one L.

        Raises:
            ConfigurationError: If the geometry, grid or inlet shooting is invalid.
            ProfileError: If the upstream profile is not admissible.
        """
        L = float(config.grid.L if L is None else L)
        h = config.grid.spacing_for(L)
        geometry = build_geometry(config.geometry)
        geometry.validate(L, tol=config.geometry.wall_tol)
        profile = build_profile(config.profile, geometry.H)
        model = VorticityModel.from_profile(profile, table_nodes=config.profile.table_nodes)
        domain = build_domain(geometry, L)
        grid = rasterize(domain, h)
        inlet = inlet_stream(L, geometry, model.f0_ext, model.Q)
        logger.info(
            f"Problem ready: nozzle={geometry.name}, profile={config.profile.preset}, "
            f"L={L:g}, h={h:g}, Q={model.Q:.6g}, λ₀={profile.lambda0:.6g}"
        )
        return cls(
            config=config,
            geometry=geometry,
            profile=profile,
            model=model,
            L=L,
            h=h,
            base_grid=grid,
            inlet=inlet,
            table=model.table(),
        )

    @property
    def Q(self) -> float:
        return self.model.Q

    @property
    def lambda0(self) -> float:
        return self.profile.lambda0

    @property
    def tol_detach(self) -> float:
        return self.config.fit.tol_detach or 2.0 * self.h

    def assemble(self, lam: float) -> Tuple[TruncatedDomainGrid, DownstreamState]:
        """Dirichlet data of K_{λ,L}.

        Raises:
            DomainError: If λ < λ₀.
        """
        state = DownstreamState.build(lam, self.profile, self.config.p_atm)
        grid = assemble_dirichlet(self.base_grid, lam, state.Psi_lambda, self.inlet, self.Q)
        return grid, state


# =========================================================================
# Solutions
# =========================================================================


@dataclass(frozen=True)
class JetSolution:
    """A converged field for one λ together with its interface."""

    lam: float
    field: StreamField
    curve: FreeBoundaryCurve
    downstream: DownstreamState
    report: SolveReport
    k0: float

    @property
    def grid(self) -> TruncatedDomainGrid:
        return self.field.grid


@dataclass(frozen=True)
class FitResult:
    solution: JetSolution
    report: FitReport
    problem: JetProblem


def solve_at(
    problem: JetProblem,
    lam: float,
    solver: Optional[SolverConfig] = None,
    previous: Optional[StreamField] = None,
    start: str = "supersolution",
) -> JetSolution:
    """Minimize for a fixed λ and read off the interface.

    A dry start without a previous field goes through the penalized
    continuation stages before the final solve.

    Raises:
        DomainError: If λ < λ₀.
        SolverError: If the minimization does not converge, with its report.
        ExtractionError: If the interface is not a graph.
    """
    solver = solver or problem.config.solver
    grid, state = problem.assemble(lam)
    if previous is not None:
        initial = warm_start(grid, previous)
    elif start == "dry":
        initial = dry_field(grid, problem.table)
    else:
        initial = initial_field(grid, problem.table, state.Psi_lambda)
    if start == "dry" and previous is None:
        field, report = minimize_with_continuation(grid, lam, solver, initial)
    else:
        field, report = minimize(grid, lam, solver, initial)
    if not report.converged:
        raise SolverError(
            f"Minimization at λ={lam:.6g} stopped ({report.stop_reason}) after {report.sweeps} sweeps",
            report=report,
        )
    curve = extract_curve(field, lam_floor=problem.lambda0, x_min=0.0, x_max=problem.L)
    k0 = _extrapolate_outlet(curve, problem.config.fit.extrapolation_columns)
    return JetSolution(lam=float(lam), field=field, curve=curve, downstream=state, report=report, k0=k0)


def _extrapolate_outlet(curve: FreeBoundaryCurve, columns: int) -> float:
    """Linear least-squares extrapolation of k to x = 0 over the first columns."""
    m = min(columns, curve.x.size)
    if m == 0:
        raise DomainError("No free-boundary columns to extrapolate from")
    if m == 1:
        return float(curve.k[0])
    slope, intercept = np.polyfit(curve.x[:m], curve.k[:m], 1)
    return float(intercept)


def detachment_height(
    problem: JetProblem, lam: float, previous: Optional[StreamField] = None
) -> Tuple[float, JetSolution]:
    """k_λ(0), the extrapolated interface height at the nozzle lip."""
    solution = solve_at(problem, lam, previous=previous)
    logger.debug(f"k(0) at λ={lam:.6g}: {solution.k0:.6g} (a={problem.geometry.a:.6g})")
    return solution.k0, solution


# =========================================================================
# Continuous fit
# =========================================================================


@dataclass
class _Search:
    problem: JetProblem
    evaluated: Dict[float, JetSolution] = field(default_factory=dict)

    @property
    def a(self) -> float:
        return self.problem.geometry.a

    def predicate(self, solution: JetSolution) -> bool:
        return solution.k0 < self.a

    def nearest(self, lam: float) -> Optional[StreamField]:
        if not self.problem.config.fit.warm_start or not self.evaluated:
            return None
        closest = min(self.evaluated, key=lambda known: abs(known - lam))
        return self.evaluated[closest].field

    def evaluate(self, lam: float, warm: bool = True) -> JetSolution:
        if lam in self.evaluated:
            return self.evaluated[lam]
        _, solution = detachment_height(self.problem, lam, self.nearest(lam) if warm else None)
        self.evaluated[lam] = solution
        return solution

    async def evaluate_many(self, lams: List[float]) -> List[JetSolution]:
        if self.problem.config.fit.concurrent:
            solutions = await asyncio.gather(
                *(asyncio.to_thread(detachment_height, self.problem, lam) for lam in lams)
            )
            for lam, (_, solution) in zip(lams, solutions):
                self.evaluated[lam] = solution
            return [solution for _, solution in solutions]
        return [self.evaluate(lam, warm=False) for lam in lams]

    def trace(self) -> List[FitIterate]:
        return [
            FitIterate(lam=lam, k0=s.k0, predicate=self.predicate(s), sweeps=s.report.sweeps)
            for lam, s in sorted(self.evaluated.items())
        ]

    def monotone(self, slack: float) -> bool:
        """k(0) must not rise by more than slack as λ increases."""
        k0s = [s.k0 for _, s in sorted(self.evaluated.items())]
        return all(later <= earlier + slack for earlier, later in zip(k0s, k0s[1:]))


async def fit_lambda(problem: JetProblem, seed: Optional[float] = None) -> FitResult:
    """λ_L = inf{λ >= λ₀ : k_λ(0) < a} by bracketing and bisection.

    The upper bracket doubles from fit.lambda_hi (or 2λ₀, or the seed) until
    the interface detaches below the lip, up to cap_factor·λ₀. When the
    interface already sits at the lip for λ₀ the fit accepts λ₀. A k(0) trace
    that is not monotone in λ triggers a grid scan over the bracket.

    Raises:
        FitError: If the cap is exceeded, the bracket is degenerate or the
            bisection budget runs out without meeting tol_detach.
        SolverError: If a solve inside the search does not converge.
    """
    fit = problem.config.fit
    lam0 = problem.lambda0
    cap = fit.cap_factor * lam0
    a = problem.geometry.a
    search = _Search(problem)

    hi = fit.lambda_hi or 2.0 * lam0
    if seed is not None and lam0 < seed < cap:
        hi = max(hi, seed * (1.0 + 1e-2))
    hi = min(hi, cap)
    low_solution, high_solution = await search.evaluate_many([lam0, hi])

    if search.predicate(low_solution):
        if abs(low_solution.k0 - a) <= problem.tol_detach:
            logger.info(f"Interface detaches at λ₀={lam0:.6g}; accepting λ_L = λ₀")
            return _result(problem, search, lam0, [lam0, lam0], fallback=False)
        raise FitError(
            f"Degenerate bracket: k(0)={low_solution.k0:.6g} already below a={a:.6g} at λ₀ "
            f"by more than tol_detach={problem.tol_detach:.3g}"
        )

    while not search.predicate(high_solution):
        if hi >= cap:
            raise FitError(
                f"C₀ exceeded: k(0)={high_solution.k0:.6g} >= a={a:.6g} up to λ={cap:.6g} "
                f"({fit.cap_factor:g}·λ₀)"
            )
        hi = min(2.0 * hi, cap)
        high_solution = search.evaluate(hi)

    lo = max(lam for lam, s in search.evaluated.items() if lam < hi and not search.predicate(s))
    lo, hi = _bisect(search, lo, hi, seed)

    fallback = False
    if not search.monotone(fit.monotone_slack_cells * problem.h):
        logger.warning("k(0) is not monotone in λ; falling back to a grid scan")
        lo, hi = _scan(search, lam0, hi)
        lo, hi = _bisect(search, lo, hi, None)
        fallback = True

    return _result(problem, search, hi, [lo, hi], fallback=fallback)


def _bisect(search: _Search, lo: float, hi: float, seed: Optional[float]) -> Tuple[float, float]:
    fit = search.problem.config.fit
    tol_detach = search.problem.tol_detach
    a = search.a
    for iteration in range(fit.max_bisections):
        hi_solution = search.evaluated[hi]
        if hi - lo <= fit.tol_lambda and abs(hi_solution.k0 - a) <= tol_detach:
            logger.info(f"Bisection converged after {iteration} steps: λ ∈ [{lo:.6g}, {hi:.6g}]")
            return lo, hi
        if iteration == 0 and seed is not None and lo < seed < hi:
            mid = seed
        else:
            mid = 0.5 * (lo + hi)
        if search.predicate(search.evaluate(mid)):
            hi = mid
        else:
            lo = mid
    hi_solution = search.evaluated[hi]
    if hi - lo <= fit.tol_lambda and abs(hi_solution.k0 - a) <= tol_detach:
        return lo, hi
    raise FitError(
        f"Bisection budget of {fit.max_bisections} exhausted: λ ∈ [{lo:.6g}, {hi:.6g}], "
        f"|k(0) - a|={abs(hi_solution.k0 - a):.3g}"
    )


def _scan(search: _Search, lo: float, hi: float) -> Tuple[float, float]:
    """Smallest detaching λ on a uniform scan, bracketed by its left neighbour."""
    points = np.linspace(lo, hi, search.problem.config.fit.scan_points)
    previous = float(points[0])
    for lam in points[1:]:
        if search.predicate(search.evaluate(float(lam))):
            return previous, float(lam)
        previous = float(lam)
    raise FitError(f"Grid scan found no detaching λ in [{lo:.6g}, {hi:.6g}]")


def _result(
    problem: JetProblem, search: _Search, lam: float, bracket: List[float], fallback: bool
) -> FitResult:
    solution = search.evaluated[lam]
    report = FitReport(
        L=problem.L,
        h=problem.h,
        lambda_fit=lam,
        k0=solution.k0,
        a=problem.geometry.a,
        bracket=bracket,
        trace=search.trace(),
        monotone=search.monotone(problem.config.fit.monotone_slack_cells * problem.h),
        fallback_scan=fallback,
        h_lambda=solution.downstream.h,
        p_diff=solution.downstream.p_diff,
    )
    logger.info(
        f"Fitted λ_L={lam:.6g} for L={problem.L:g}: k(0)={solution.k0:.6g}, "
        f"h_λ={report.h_lambda:.6g}, {len(report.trace)} solves"
    )
    return FitResult(solution=solution, report=report, problem=problem)


async def continuation_in_L(config: RunConfig) -> Tuple[ContinuationReport, List[FitResult]]:
    """Fit λ_L over the truncation schedule.

    Each fit is seeded with the previous λ_L. A failed fit is recorded and
    the schedule continues. The fits are flagged unstable when the spread of
    λ_L exceeds five times tol_lambda.
    """
    report = ContinuationReport()
    results: List[FitResult] = []
    seed: Optional[float] = None
    for L in config.resolved_schedule():
        try:
            problem = JetProblem.from_config(config, L)
            result = await fit_lambda(problem, seed=seed)
        except (FitError, SolverError, ConfigurationError, DomainError) as exc:
            logger.warning(f"Fit for L={L:g} failed: {exc}")
            report.failures[f"{L:g}"] = str(exc)
            continue
        seed = result.report.lambda_fit
        results.append(result)
        report.fits.append(result.report)

    if results:
        values = np.array([r.report.lambda_fit for r in results])
        report.spread = float(values.max() - values.min())
        report.unstable = report.spread > UNSTABLE_SPREAD_FACTOR * config.fit.tol_lambda
        if values.size >= 2:
            inverse = np.array([1.0 / r.report.L for r in results])
            slope, intercept = np.polyfit(inverse, values, 1)
            report.lambda_extrapolated = float(intercept)
        else:
            report.lambda_extrapolated = float(values[0])
        if report.unstable:
            logger.warning(f"λ_L spread {report.spread:.3g} exceeds the stability band")
    return report, results


# =========================================================================
# Fitted-solution quantities
# =========================================================================


@dataclass(frozen=True)
class VelocityPressure:
    """u = ψ_y, v = −ψ_x and p from Bernoulli's law on the wet set (NaN elsewhere)."""

    u: np.ndarray
    v: np.ndarray
    p: np.ndarray
    wet: np.ndarray
    interface_pressure_error: Optional[float]


def bernoulli_head(field: StreamField, downstream: DownstreamState) -> np.ndarray:
    """B(ψ) = u0(κ(ψ))²/2 + p_in, using F0(t) = u0(κ(t))² − λ₀²."""
    lam0 = downstream.profile.lambda0
    return 0.5 * (field.table.primitive(field.psi) + lam0**2) + downstream.p_in


def velocity_pressure_fields(
    field: StreamField, downstream: DownstreamState, curve: Optional[FreeBoundaryCurve] = None
) -> VelocityPressure:
    grid = field.grid
    dpsi_dy, dpsi_dx = np.gradient(np.asarray(field.psi), grid.h)
    wet = field.wet_mask & (grid.node_class == INTERIOR)
    u = np.where(wet, dpsi_dy, np.nan)
    v = np.where(wet, -dpsi_dx, np.nan)
    p = np.where(wet, bernoulli_head(field, downstream) - 0.5 * (u**2 + v**2), np.nan)

    error = None
    if curve is not None:
        sampled, _ = with_gradient(field, curve)
        speeds = sampled.grad_mag[np.isfinite(sampled.grad_mag)]
        if speeds.size:
            # on Γ the head is B(Q) = p_atm + λ²/2
            error = float(np.max(np.abs(downstream.lam**2 - speeds**2)) / 2.0)
    return VelocityPressure(u=u, v=v, p=p, wet=wet, interface_pressure_error=error)


def comparison_excess(field: StreamField, downstream: DownstreamState) -> float:
    """max over interior nodes of ψ − min{Ψ_λ(y), Q}."""
    grid = field.grid
    bound = np.minimum(np.asarray(downstream.Psi_lambda(grid.y)), grid.Q)[:, None]
    excess = np.asarray(field.psi) - bound
    return float(np.max(excess[grid.node_class == INTERIOR]))


def asymptotics_report(solution: JetSolution, problem: JetProblem) -> AsymptoticsReport:
    """Deviations from the upstream and downstream states at x = −L/2 and 3L/4.

    Raises:
        DomainError: If either column lies outside the grid.
    """
    field, grid = solution.field, solution.grid
    psi = np.asarray(field.psi)
    x_up, x_down = -0.5 * problem.L, 0.75 * problem.L
    i_up, i_down = grid.column_index(x_up), grid.column_index(x_down)

    wall = float(problem.geometry.g(grid.x[i_up]))
    rows = (grid.node_class[:, i_up] == INTERIOR) & (grid.y < wall)
    upstream_state = np.minimum(np.asarray(problem.profile.cumulative_flux(grid.y[rows])), grid.Q)
    upstream = float(np.max(np.abs(psi[rows, i_up] - upstream_state))) if np.any(rows) else 0.0

    rows = grid.node_class[:, i_down] == INTERIOR
    downstream_state = np.minimum(np.asarray(solution.downstream.Psi_lambda(grid.y[rows])), grid.Q)
    downstream = float(np.max(np.abs(psi[rows, i_down] - downstream_state)))
    height = abs(solution.curve.height_at(grid.x[i_down]) - solution.downstream.h)

    return AsymptoticsReport(
        upstream_deviation=upstream,
        downstream_deviation=downstream,
        height_deviation=height,
        upstream_x=float(grid.x[i_up]),
        downstream_x=float(grid.x[i_down]),
    )


@dataclass(frozen=True)
class SmoothFit:
    gap: Optional[float]
    skipped: bool
    reason: str = ""


def smooth_fit_check(solution: JetSolution, geometry: NozzleGeometry, columns: int) -> SmoothFit:
    """|k'(0) − g'(0)| from a linear fit of k over the first columns."""
    curve = solution.curve
    if columns < 2:
        return SmoothFit(gap=None, skipped=True, reason="one extrapolation column gives no slope")
    if curve.x.size < columns + 1:
        return SmoothFit(gap=None, skipped=True, reason=f"fewer than {columns + 1} curve columns")
    slope, _ = np.polyfit(curve.x[:columns], curve.k[:columns], 1)
    return SmoothFit(gap=float(abs(slope - geometry.g_prime_at_0)), skipped=False)


@dataclass(frozen=True)
class UniquenessResult:
    gap: Optional[float]
    tolerance: float
    branches: List[str]
    failures: List[str]
    penalized_gap: Optional[float] = None
    epsilon: Optional[float] = None

    @property
    def passed(self) -> bool:
        return not self.failures and self.gap is not None and self.gap <= self.tolerance


async def uniqueness_probe(problem: JetProblem, lam: float) -> UniquenessResult:
    """Solve from two starting fields in both sweep orders and compare.

    The supersolution min{Ψ_λ, Q} and the dry field ψ ≡ Q are both run with
    lexicographic and red-black sweeps, each to UNIQUENESS_POLISH·tol_field
    so that the sweep error stays well inside the comparison tolerance
    uniqueness_factor·tol_field. A branch that does not converge fails.

    A penalized solve from the supersolution is compared with the jump-exact
    one as well. Its gap is of order ε and is reported, not judged.
    """
    base = problem.config.solver
    tol_field = base.resolved_tol_field(problem.Q)
    tol = problem.config.diagnostics.uniqueness_factor * tol_field
    polished = base.model_copy(
        update={
            "tol_field": UNIQUENESS_POLISH * tol_field,
            "max_sweeps": 2 * base.resolved_max_sweeps(problem.base_grid.shape),
        }
    )
    branches = [
        (start, order) for start in ("supersolution", "dry") for order in ("lexicographic", "red_black")
    ]
    epsilon = base.epsilon if base.epsilon is not None else problem.h

    def run(start: str, order: str) -> JetSolution:
        solver = polished.model_copy(update={"sweep_order": order})
        return solve_at(problem, lam, solver=solver, start=start)

    def run_penalized() -> JetSolution:
        solver = polished.model_copy(update={"mode": "penalized", "epsilon": epsilon})
        return solve_at(problem, lam, solver=solver)

    outcomes = await asyncio.gather(
        *(asyncio.to_thread(run, start, order) for start, order in branches),
        asyncio.to_thread(run_penalized),
        return_exceptions=True,
    )
    names = [f"{start}/{order}" for start, order in branches]
    solved, failures = [], []
    for name, outcome in zip(names, outcomes):
        if isinstance(outcome, BaseException):
            failures.append(f"{name}: {outcome}")
        else:
            solved.append(outcome)
    gap = None
    if len(solved) >= 2:
        gap = max(
            field_gap(first.field, second.field)
            for n, first in enumerate(solved)
            for second in solved[n + 1 :]
        )
    penalized, penalized_gap = outcomes[-1], None
    if isinstance(penalized, BaseException):
        logger.warning(f"Penalized solve at λ={lam:.6g}, ε={epsilon:.4g} failed: {penalized}")
    elif not isinstance(outcomes[0], BaseException):
        penalized_gap = field_gap(outcomes[0].field, penalized.field)
    logger.info(
        f"Uniqueness at λ={lam:.6g}: gap={gap}, failures={len(failures)}, "
        f"penalized gap={penalized_gap} (ε={epsilon:.4g})"
    )
    return UniquenessResult(
        gap=gap,
        tolerance=tol,
        branches=names,
        failures=failures,
        penalized_gap=penalized_gap,
        epsilon=float(epsilon),
    )
