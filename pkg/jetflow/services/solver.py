"""
Discrete Minimization Module

Minimizes the truncated functional

    J(ψ) = Σ_edges (Δψ)² + h² Σ_interior (F₀(ψ) + λ²·[ψ < Q]·[x > 0])

over nodal fields carrying the assembled Dirichlet data, by Gauss-Seidel
sweeps of exact per-node minimization. The edge sum is the cell-averaged
squared forward-difference gradient; the nodal terms are lumped to the
nodes. Every sweep is followed by a box-bound and an energy-descent check.
"""

import logging
import time
from dataclasses import dataclass
from typing import Callable, List, Optional, Tuple

import numpy as np

from jetflow.core.exceptions import ConfigurationError, SolverError
from jetflow.schemas.reports import SolveReport
from jetflow.schemas.run_config import SolverConfig
from jetflow.services import kernels
from jetflow.services.domain import INTERIOR, TruncatedDomainGrid
from jetflow.services.profiles import StrengthTable

logger = logging.getLogger(__name__)

DESCENT_TOL = 1e-12
# consecutive sweeps below tol_energy before giving up on tol_field
PLATEAU_SWEEPS = 25
STAGE_TOL_FACTOR = 100.0


@dataclass(frozen=True)
class StreamField:
    """Nodal stream function on a grid, with the strength table it was solved for."""

    grid: TruncatedDomainGrid
    psi: np.ndarray
    table: StrengthTable

    @property
    def Q(self) -> float:
        return self.grid.Q

    @property
    def wet_mask(self) -> np.ndarray:
        return self.psi < self.Q

    @property
    def phi(self) -> np.ndarray:
        """Transposed field φ = Q - ψ, positive on the wet set."""
        return self.Q - self.psi

    def with_psi(self, psi: np.ndarray) -> "StreamField":
        return StreamField(grid=self.grid, psi=psi, table=self.table)

    def columns(self, stride: int = 1) -> np.ndarray:
        """Flat (x, y, psi, wet) rows for the field dump."""
        sl = (slice(None, None, stride), slice(None, None, stride))
        return np.column_stack(
            [
                self.grid.X[sl].ravel(),
                self.grid.Y[sl].ravel(),
                self.psi[sl].ravel(),
                self.wet_mask[sl].ravel().astype(float),
            ]
        )


def _require_assembled(grid: TruncatedDomainGrid) -> None:
    if not grid.is_assembled:
        raise ConfigurationError("Dirichlet data must be assembled before solving")


def _impose_dirichlet(grid: TruncatedDomainGrid, interior_values: np.ndarray) -> np.ndarray:
    psi = np.where(grid.node_class == INTERIOR, interior_values, grid.dirichlet)
    return np.ascontiguousarray(np.clip(psi, 0.0, grid.Q), dtype=np.float64)


def initial_field(
    grid: TruncatedDomainGrid, table: StrengthTable, Psi_lambda: Callable
) -> StreamField:
    """ψ⁰(x, y) = min{Ψ_λ(y), Q} on interior nodes."""
    _require_assembled(grid)
    column = np.minimum(np.asarray(Psi_lambda(grid.y), dtype=float), grid.Q)
    interior = np.broadcast_to(column[:, None], grid.shape)
    return StreamField(grid=grid, psi=_impose_dirichlet(grid, interior), table=table)


def dry_field(grid: TruncatedDomainGrid, table: StrengthTable) -> StreamField:
    """ψ⁰ ≡ Q on interior nodes."""
    _require_assembled(grid)
    return StreamField(
        grid=grid, psi=_impose_dirichlet(grid, np.full(grid.shape, grid.Q)), table=table
    )


def field_from_function(
    grid: TruncatedDomainGrid, table: StrengthTable, values: Callable
) -> StreamField:
    """Interior values from values(X, Y), Dirichlet data elsewhere."""
    _require_assembled(grid)
    return StreamField(
        grid=grid, psi=_impose_dirichlet(grid, values(grid.X, grid.Y)), table=table
    )


def warm_start(grid: TruncatedDomainGrid, previous: StreamField) -> StreamField:
    """Reuse a converged field on a grid assembled for a new λ.

    Raises:
        ConfigurationError: If the grids differ in shape.
    """
    _require_assembled(grid)
    if previous.psi.shape != grid.shape:
        raise ConfigurationError("Warm start requires identical grids")
    return StreamField(grid=grid, psi=_impose_dirichlet(grid, previous.psi), table=previous.table)


def energy(field: StreamField, lam: float, config: Optional[SolverConfig] = None) -> float:
    """Discrete J for the given λ (or the grid's λ field when present).

    In penalized mode the indicator is replaced by the ramp min(1, (Q - ψ)/ε).
    """
    grid, psi = field.grid, field.psi
    h2 = grid.h * grid.h
    gradient = float(np.sum(np.diff(psi, axis=1) ** 2) + np.sum(np.diff(psi, axis=0) ** 2))
    interior = grid.node_class == INTERIOR
    values = psi[interior]
    potential = h2 * float(np.sum(field.table.primitive(values)))
    weight = grid.bernoulli_weight(lam)[interior]
    if config is not None and config.mode == "penalized":
        charge = np.minimum(1.0, (grid.Q - values) / config.epsilon)
    else:
        charge = (values < grid.Q).astype(float)
    return gradient + potential + h2 * float(np.sum(weight * charge))


def node_update(
    field: StreamField, node: Tuple[int, int], lam: float, config: Optional[SolverConfig] = None
) -> Tuple[float, bool]:
    """Exact local minimizer at one interior node, without writing it back.

    Returns:
        The minimizing value and whether the node is wet.
    """
    config = config or SolverConfig()
    grid, psi, table = field.grid, field.psi, field.table
    j, i = node
    if grid.node_class[j, i] != INTERIOR:
        raise ConfigurationError(f"Node {node} is not interior")
    n = np.array([psi[j - 1, i], psi[j + 1, i], psi[j, i - 1], psi[j, i + 1]])
    mode, eps = _mode(config)
    value = kernels.local_minimizer(
        float(n.sum()),
        float(np.dot(n, n)),
        grid.h * grid.h,
        float(grid.bernoulli_weight(lam)[j, i]),
        float(grid.Q),
        mode,
        eps,
        table.strength_bound,
        table.t,
        table.f,
        table.F,
        config.newton_tol,
    )
    return float(value), bool(value < grid.Q)


def _mode(config: SolverConfig) -> Tuple[int, float]:
    if config.mode == "penalized":
        return kernels.MODE_PENALIZED, float(config.epsilon)
    return kernels.MODE_JUMP_EXACT, 1.0


def pde_residual(field: StreamField) -> float:
    """max |Δ_hψ + f₀(ψ)| over interior nodes whose whole stencil is wet."""
    residual = _laplacian_residual(field)
    wet = field.wet_mask
    stencil = wet.copy()
    stencil[1:-1, 1:-1] &= wet[:-2, 1:-1] & wet[2:, 1:-1] & wet[1:-1, :-2] & wet[1:-1, 2:]
    mask = stencil & (field.grid.node_class == INTERIOR)
    if not np.any(mask):
        return 0.0
    return float(np.max(np.abs(residual[mask])))


def _laplacian_residual(field: StreamField) -> np.ndarray:
    return kernels.laplacian_residual(
        field.psi, field.grid.node_class, field.grid.h, field.table.t, field.table.f
    )


def supersolution_excess(field: StreamField) -> float:
    """max of Δ_hψ + f₀(ψ) over interior nodes; at most tol_sign when converged."""
    residual = _laplacian_residual(field)
    interior = field.grid.node_class == INTERIOR
    return float(np.max(residual[interior])) if np.any(interior) else 0.0


def monotonicity_defect(field: StreamField) -> float:
    """max of ψ(x, y) - ψ(x, y + h) over vertically adjacent interior pairs."""
    interior = field.grid.node_class == INTERIOR
    pairs = interior[:-1, :] & interior[1:, :]
    if not np.any(pairs):
        return 0.0
    drop = field.psi[:-1, :] - field.psi[1:, :]
    return float(max(0.0, np.max(drop[pairs])))


def field_gap(first: StreamField, second: StreamField) -> float:
    return float(np.max(np.abs(first.psi - second.psi)))


def minimize(
    grid: TruncatedDomainGrid,
    lam: float,
    config: SolverConfig,
    initial: StreamField,
) -> Tuple[StreamField, SolveReport]:
    """Gauss-Seidel descent from the initial field.

    Only a sweep with max nodal change <= tol_field counts as converged. An
    energy plateau of PLATEAU_SWEEPS sweeps or the sweep cap ends the run
    unconverged, which is reported through SolveReport.converged, never raised.

    Raises:
        SolverError: If a sweep leaves [0, Q] or increases the energy.
    """
    _require_assembled(grid)
    psi = np.array(initial.psi, dtype=np.float64, copy=True)
    psi = _impose_dirichlet(grid, psi)
    table = initial.table
    Q = float(grid.Q)
    h2 = grid.h * grid.h
    weight = np.ascontiguousarray(grid.bernoulli_weight(lam), dtype=np.float64)
    node_class = np.ascontiguousarray(grid.node_class)
    tol_field = config.resolved_tol_field(Q)
    max_sweeps = config.resolved_max_sweeps(grid.shape)
    mode, eps = _mode(config)
    sweep = (
        kernels.sweep_red_black if config.sweep_order == "red_black" else kernels.sweep_lexicographic
    )

    current = StreamField(grid=grid, psi=psi, table=table)
    e_prev = energy(current, lam, config)
    trace = [e_prev]
    e_initial = e_prev
    change = np.inf
    stop_reason = "max_sweeps"
    converged = False
    sweeps = 0
    plateau = 0
    started = time.perf_counter()

    while sweeps < max_sweeps:
        change = float(
            sweep(
                psi, node_class, weight, h2, Q, mode, eps, config.relaxation,
                table.strength_bound, table.t, table.f, table.F, config.newton_tol,
            )
        )
        sweeps += 1

        if psi.min() < 0.0 or psi.max() > Q:
            raise SolverError(
                f"Box bound violated after sweep {sweeps}: ψ ∈ [{psi.min():.6g}, {psi.max():.6g}]",
                report=_report(False, "box_bound", sweeps, e_initial, e_prev, trace, change, started, config, tol_field),
            )
        e_now = energy(current, lam, config)
        if e_now > e_prev + DESCENT_TOL * max(1.0, abs(e_prev)):
            raise SolverError(
                f"Energy increased in sweep {sweeps}: {e_prev:.15g} -> {e_now:.15g}",
                report=_report(False, "energy_increase", sweeps, e_initial, e_now, trace, change, started, config, tol_field),
            )
        if sweeps % config.trace_stride == 0:
            trace.append(e_now)
        if sweeps % config.log_every == 0:
            logger.debug(f"Sweep {sweeps}: max change={change:.3e}, energy={e_now:.12g}")

        decrease = e_prev - e_now
        e_prev = e_now
        if change <= tol_field:
            stop_reason, converged = "tol_field", True
            break
        if 0.0 <= decrease <= config.tol_energy * max(1.0, abs(e_now)):
            plateau += 1
            if plateau >= PLATEAU_SWEEPS:
                stop_reason = "energy_plateau"
                break
        else:
            plateau = 0

    if trace[-1] != e_prev:
        trace.append(e_prev)
    psi.flags.writeable = False
    field = StreamField(grid=grid, psi=psi, table=table)
    report = _report(converged, stop_reason, sweeps, e_initial, e_prev, trace, change, started, config, tol_field)
    report.pde_residual = pde_residual(field)

    log = logger.info if converged else logger.warning
    log(
        f"Minimization {'converged' if converged else 'stopped'} ({stop_reason}) after "
        f"{sweeps} sweeps: change={change:.3e}, energy={e_prev:.12g}, residual={report.pde_residual:.3e}"
    )
    return field, report


def continuation_widths(Q: float, config: SolverConfig) -> List[float]:
    """Ramp widths Q, Q/2, Q/4, ... of the penalized stages, above the target ε."""
    floor = config.epsilon if config.mode == "penalized" else 0.0
    widths = (Q * 0.5**k for k in range(config.continuation_stages))
    return [width for width in widths if width > floor]


def minimize_with_continuation(
    grid: TruncatedDomainGrid,
    lam: float,
    config: SolverConfig,
    initial: StreamField,
) -> Tuple[StreamField, SolveReport]:
    """Penalized stages of halving ramp width, then minimize in config.mode.

    A jump-exact update wets a node only when that node alone lowers the
    energy, so descent from ψ ≡ Q can stall with a whole row of the jet
    still dry. On the ramp a partial move costs h²λ²(Q - ψ)/ε. Each stage
    starts from the previous field; stages stop at STAGE_TOL_FACTOR·tol_field.
    The returned report is the final stage's, with sweeps summed over stages.

    Raises:
        SolverError: If any stage leaves [0, Q] or increases its energy.
    """
    _require_assembled(grid)
    Q = float(grid.Q)
    stage_tol = STAGE_TOL_FACTOR * config.resolved_tol_field(Q)
    widths = continuation_widths(Q, config)
    field, sweeps = initial, 0
    for width in widths:
        stage = config.model_copy(update={"mode": "penalized", "epsilon": width, "tol_field": stage_tol})
        field, report = minimize(grid, lam, stage, field)
        sweeps += report.sweeps
        logger.debug(f"Penalized stage ε={width:.4g}: {report.stop_reason} after {report.sweeps} sweeps")
    field, report = minimize(grid, lam, config, field)
    return field, report.model_copy(
        update={"sweeps": sweeps + report.sweeps, "continuation_stages": len(widths)}
    )


def _report(
    converged: bool,
    stop_reason: str,
    sweeps: int,
    e_initial: float,
    e_final: float,
    trace: list,
    change: float,
    started: float,
    config: SolverConfig,
    tol_field: float,
) -> SolveReport:
    return SolveReport(
        converged=converged,
        stop_reason=stop_reason,
        sweeps=sweeps,
        energy_initial=e_initial,
        energy_final=e_final,
        energy_trace=list(trace),
        final_change=float(change) if np.isfinite(change) else -1.0,
        wall_time=time.perf_counter() - started,
        sweep_order=config.sweep_order,
        mode=config.mode,
        tol_field=tol_field,
        relaxation=config.relaxation,
    )
