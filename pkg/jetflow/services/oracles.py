"""
Benchmark problems with known solutions.

Each builder returns an assembled grid, a strength table and the exact
stream function, so the minimizer and the free-boundary readers can be
checked against closed forms: the straight jet, the downstream strip and
the radial Bernoulli disk.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from jetflow.core.exceptions import ConfigurationError
from jetflow.schemas.run_config import RunConfig
from jetflow.services.domain import (
    DIRICHLET,
    INTERIOR,
    ROLE_BOTTOM,
    ROLE_FLUX,
    ROLE_INLET,
    ROLE_OUTLET,
    TruncatedDomainGrid,
)
from jetflow.services.profiles import (
    DownstreamState,
    QuadraticShearProfile,
    StrengthTable,
    UpstreamProfile,
    VorticityModel,
)

logger = logging.getLogger(__name__)

RADIAL_OUTER_RADIUS = 3.0


@dataclass(frozen=True)
class OracleCase:
    """An assembled benchmark grid with its exact solution ψ(X, Y)."""

    name: str
    grid: TruncatedDomainGrid
    table: StrengthTable
    lam: float
    exact: Callable
    interface_height: Optional[float] = None
    center: Optional[Sequence[float]] = None
    radius: Optional[float] = None

    def exact_field(self) -> np.ndarray:
        return np.clip(self.exact(self.grid.X, self.grid.Y), 0.0, self.grid.Q)


def zero_strength_table(Q: float) -> StrengthTable:
    """f̃₀ ≡ 0 on [−1, Q + 1]; F ≡ 0."""
    t = np.array([-1.0, Q + 1.0])
    return StrengthTable(t=t, f=np.zeros(2), F=np.zeros(2), Q=float(Q))


def straight_jet_config(h: float = 1.0 / 64.0, L: float = 4.0, **overrides) -> RunConfig:
    """Straight nozzle g ≡ 1 with u0 ≡ 1; the jet is ψ = min(y, 1) and λ_L = 1."""
    data = {
        "geometry": {"preset": "straight", "height": 1.0},
        "profile": {"preset": "constant", "speed": 1.0},
        "grid": {"h": h, "L": L},
        "solver": {"relaxation": 1.95},
    }
    data.update(overrides)
    return RunConfig.model_validate(data)


def straight_jet_solution(lam: float = 1.0, Q: float = 1.0) -> Callable:
    def exact(X, Y):
        return np.minimum(lam * np.asarray(Y, dtype=float), Q) + 0.0 * np.asarray(X, dtype=float)

    return exact


def _rectangle(width: float, height: float, h: float) -> tuple:
    nx, ny = width / h, height / h
    if abs(nx - round(nx)) > 1e-9 * nx or abs(ny - round(ny)) > 1e-9 * ny:
        raise ConfigurationError(f"Grid spacing h={h:g} must divide the {width:g} x {height:g} box")
    return h * np.arange(int(round(nx)) + 1), h * np.arange(int(round(ny)) + 1)


def downstream_strip(
    lam: float = 2.5,
    h: float = 1.0 / 64.0,
    width: float = 2.0,
    profile: Optional[UpstreamProfile] = None,
    headroom: float = 0.5,
) -> OracleCase:
    """Rectangle [0, width] x [0, top] carrying min{Ψ_λ, Q} on both vertical sides.

    Every node is charged the Bernoulli term, so the minimizer is the
    downstream state itself with a flat interface at h_λ.
    """
    profile = profile or QuadraticShearProfile(1.0, base=1.0, curvature=1.0)
    model = VorticityModel.from_profile(profile)
    state = DownstreamState.build(lam, profile)
    Q = model.Q
    top = h * np.ceil((state.h + headroom) / h)
    x, y = _rectangle(width, top, h)
    X, Y = np.meshgrid(x, y)

    role = np.zeros(X.shape, dtype=np.int8)
    role[:, 0] = ROLE_INLET
    role[:, -1] = ROLE_OUTLET
    role[-1, :] = ROLE_FLUX
    role[0, :] = ROLE_BOTTOM
    node_class = np.where(role == 0, INTERIOR, DIRICHLET).astype(np.int8)

    column = np.minimum(np.asarray(state.Psi_lambda(y), dtype=float), Q)
    dirichlet = np.where(node_class == INTERIOR, np.nan, np.broadcast_to(column[:, None], X.shape))
    dirichlet[0, :] = 0.0
    dirichlet[-1, :] = Q

    grid = TruncatedDomainGrid(
        x=x,
        y=y,
        h=float(h),
        node_class=node_class,
        role=role,
        dirichlet=dirichlet,
        jump_mask=node_class == INTERIOR,
        L=float(width),
        Q=float(Q),
        lam=float(lam),
        label="downstream_strip",
    )

    def exact(X, Y):
        values = np.minimum(np.asarray(state.Psi_lambda(np.asarray(Y)[:, 0]), dtype=float), Q)
        return np.broadcast_to(values[:, None], np.shape(X))

    logger.info(f"Downstream strip oracle: λ={lam:g}, h_λ={state.h:.6g}, grid {X.shape}")
    return OracleCase(
        name="downstream_strip",
        grid=grid,
        table=model.table(),
        lam=float(lam),
        exact=exact,
        interface_height=state.h,
    )


def radial_disk(
    lam: float = 1.0,
    r0: float = 1.0,
    h: float = 1.0 / 64.0,
    radius: float = RADIAL_OUTER_RADIUS,
) -> OracleCase:
    """Bernoulli disk with f ≡ 0: φ = λ·r₀·ln(|X|/r₀) outside r₀, zero inside.

    The stream field is ψ = Q − φ with Q the value of φ two cells beyond the
    outer radius, so ψ ∈ [0, Q] on the whole box. Nodes at |X| >= radius are
    Dirichlet with the exact value.

    Raises:
        ConfigurationError: If radius does not exceed r₀ or h does not divide the box.
    """
    if radius <= r0:
        raise ConfigurationError(f"Outer radius {radius:g} must exceed r₀={r0:g}")
    half = h * np.ceil((radius + 2.0 * h) / h)
    axis, _ = _rectangle(2.0 * half, 2.0 * half, h)
    x = axis - half
    y = axis - half
    X, Y = np.meshgrid(x, y)
    R = np.hypot(X, Y)
    Q = lam * r0 * np.log(half * np.sqrt(2.0) / r0)

    def exact(X, Y):
        r = np.hypot(X, Y)
        phi = lam * r0 * np.log(np.maximum(r, r0) / r0)
        return Q - phi

    outer = R >= radius
    outer[0, :] = outer[-1, :] = outer[:, 0] = outer[:, -1] = True
    node_class = np.where(outer, DIRICHLET, INTERIOR).astype(np.int8)
    role = np.where(outer, ROLE_OUTLET, 0).astype(np.int8)
    dirichlet = np.where(outer, np.clip(exact(X, Y), 0.0, Q), np.nan)

    grid = TruncatedDomainGrid(
        x=x,
        y=y,
        h=float(h),
        node_class=node_class,
        role=role,
        dirichlet=dirichlet,
        jump_mask=~outer,
        L=float(half),
        Q=float(Q),
        lam=float(lam),
        label="radial_disk",
    )
    logger.info(f"Radial oracle: λ={lam:g}, r₀={r0:g}, R={radius:g}, Q={Q:.6g}, grid {X.shape}")
    return OracleCase(
        name="radial_disk",
        grid=grid,
        table=zero_strength_table(Q),
        lam=float(lam),
        exact=exact,
        center=(0.0, 0.0),
        radius=float(r0),
    )


def half_plane_solution(X0: Sequence[float], nu: Sequence[float], lam: float, Q: float) -> Callable:
    """ψ = Q − λ·max(−(X − X0)·ν, 0): the half-plane blow-up limit, dry on the ν side."""
    nu = np.asarray(nu, dtype=float)
    nu = nu / np.linalg.norm(nu)

    def exact(X, Y):
        depth = -((np.asarray(X) - X0[0]) * nu[0] + (np.asarray(Y) - X0[1]) * nu[1])
        return np.clip(Q - lam * np.maximum(depth, 0.0), 0.0, Q)

    return exact
