"""
Nozzle Geometry and Truncated Domain Module

Represents the nozzle wall y = g(x) for x <= 0, the truncated domain Ω_L with
its six boundary pieces, and its rasterization to a uniform node grid in
which every node carries a class (interior, Dirichlet or exterior) and, once
assembled for a given λ, a Dirichlet value.

Grid arrays are indexed [j, i] with j the row (y) and i the column (x).
"""

import logging
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, Optional

import numpy as np

from jetflow.core.exceptions import ConfigurationError, DomainError

logger = logging.getLogger(__name__)

EXTERIOR = 0
INTERIOR = 1
DIRICHLET = 2

ROLE_NONE = 0
ROLE_BOTTOM = 1
ROLE_FLUX = 2
ROLE_INLET = 3
ROLE_OUTLET = 4

MIN_OUTLET_CELLS = 8


# =========================================================================
# Geometry
# =========================================================================


@dataclass(frozen=True)
class NozzleGeometry:
    """Nozzle wall y = g(x) on x <= 0.

    Attributes:
        name: Preset name, echoed in reports.
        g: Vectorized wall height.
        H: Upstream asymptote of g.
        a: Outlet height g(0).
        H_bar: max of g over x <= 0.
        g_prime_at_0: Wall slope at the outlet, used by the smooth-fit check.
    """

    name: str
    g: Callable
    H: float
    a: float
    H_bar: float
    g_prime_at_0: float
    parameters: Dict[str, float] = field(default_factory=dict)

    def validate(self, L: float, tol: float = 1e-3, samples: int = 2001) -> None:
        """Check the nozzle conditions on [-L, 0].

        Raises:
            ConfigurationError: If g(0) is not the minimum of g or a <= H <= H_bar fails.

        A g(-L) further than tol from H is only logged: the inlet stream is
        solved on [0, g(-L)] and the mismatch is part of the truncation error.
        """
        xs = np.linspace(-L, 0.0, samples)
        heights = np.asarray(self.g(xs), dtype=float)
        if np.any(heights <= 0.0):
            raise ConfigurationError(f"Nozzle '{self.name}': wall height must be positive")
        if heights.min() < self.a - 1e-12:
            bad = xs[np.argmin(heights)]
            raise ConfigurationError(
                f"Nozzle '{self.name}': g(0)={self.a:.6g} is not the minimum of g; "
                f"g({bad:.6g})={heights.min():.6g}"
            )
        if abs(float(self.g(-L)) - self.H) > tol:
            logger.warning(
                f"Nozzle '{self.name}': g(-L)={float(self.g(-L)):.6g} is not within "
                f"{tol:g} of H={self.H:.6g}; increase L to reduce the inlet mismatch"
            )
        if not (self.a <= self.H + 1e-12 and self.H <= self.H_bar + 1e-12):
            raise ConfigurationError(
                f"Nozzle '{self.name}': require a <= H <= H_bar, got "
                f"a={self.a:.6g}, H={self.H:.6g}, H_bar={self.H_bar:.6g}"
            )

    def describe(self) -> dict:
        return {"preset": self.name, "H": self.H, "a": self.a, **self.parameters}


def straight_nozzle(height: float = 1.0) -> NozzleGeometry:
    """Flat wall g ≡ height."""
    return NozzleGeometry(
        name="straight",
        g=lambda x: np.full_like(np.asarray(x, dtype=float), height),
        H=height,
        a=height,
        H_bar=height,
        g_prime_at_0=0.0,
        parameters={"height": height},
    )


def converging_rational_nozzle(a: float = 1.0, H: float = 1.5) -> NozzleGeometry:
    """g(x) = a + (H - a)·x²/(1 + x²)."""
    if H < a:
        raise ConfigurationError(f"Converging nozzle needs H >= a, got a={a}, H={H}")

    def g(x):
        x = np.asarray(x, dtype=float)
        return a + (H - a) * x**2 / (1.0 + x**2)

    return NozzleGeometry(
        name="converging_rational",
        g=g,
        H=H,
        a=a,
        H_bar=H,
        g_prime_at_0=0.0,
        parameters={"a": a, "H": H},
    )


def converging_tanh_nozzle(a: float = 1.0, H: float = 1.5, width: float = 1.0) -> NozzleGeometry:
    """g(x) = a + (H - a)·tanh((x/width)²)."""
    if H < a or width <= 0.0:
        raise ConfigurationError(
            f"Tanh nozzle needs H >= a and width > 0, got a={a}, H={H}, width={width}"
        )

    def g(x):
        x = np.asarray(x, dtype=float)
        return a + (H - a) * np.tanh((x / width) ** 2)

    return NozzleGeometry(
        name="converging_tanh",
        g=g,
        H=H,
        a=a,
        H_bar=H,
        g_prime_at_0=0.0,
        parameters={"a": a, "H": H, "width": width},
    )


def tabulated_nozzle(xs, heights) -> NozzleGeometry:
    """Polyline wall through (xs, heights), constant left of the first vertex.

    The vertices must increase in x and end at x = 0.
    """
    xs = np.asarray(xs, dtype=float)
    heights = np.asarray(heights, dtype=float)
    if xs.ndim != 1 or xs.shape != heights.shape or xs.size < 2:
        raise ConfigurationError("Tabulated nozzle needs matching 1-D vertex lists (>= 2)")
    if np.any(np.diff(xs) <= 0.0) or xs[-1] != 0.0:
        raise ConfigurationError("Tabulated nozzle vertices must increase in x and end at x=0")

    def g(x):
        return np.interp(np.asarray(x, dtype=float), xs, heights)

    return NozzleGeometry(
        name="tabulated",
        g=g,
        H=float(heights[0]),
        a=float(heights[-1]),
        H_bar=float(heights.max()),
        g_prime_at_0=float((heights[-1] - heights[-2]) / (xs[-1] - xs[-2])),
        parameters={"vertices": float(xs.size)},
    )


GEOMETRY_PRESETS = {
    "straight": straight_nozzle,
    "converging_rational": converging_rational_nozzle,
    "converging_tanh": converging_tanh_nozzle,
    "tabulated": tabulated_nozzle,
}


# =========================================================================
# Truncated domain
# =========================================================================


@dataclass(frozen=True)
class BoundarySegment:
    """Polyline sample of one boundary piece, oriented counter-clockwise."""

    name: str
    rule: str
    points: np.ndarray

    @property
    def start(self) -> np.ndarray:
        return self.points[0]

    @property
    def end(self) -> np.ndarray:
        return self.points[-1]

    @property
    def length(self) -> float:
        return float(np.sum(np.linalg.norm(np.diff(self.points, axis=0), axis=1)))


@dataclass(frozen=True)
class TruncatedDomain:
    """Ω_L = Ω ∩ {-L < x < L, y < L} capped over [0, L] by the arc l_L."""

    geometry: NozzleGeometry
    L: float
    segments: Dict[str, BoundarySegment]

    def segment(self, name: str) -> BoundarySegment:
        return self.segments[name]

    def closes(self, tol: float = 1e-12) -> bool:
        """Whether consecutive segments share their end points."""
        ordered = list(self.segments.values())
        return all(
            np.linalg.norm(ordered[k].end - ordered[(k + 1) % len(ordered)].start) <= tol
            for k in range(len(ordered))
        )


def build_domain(geometry: NozzleGeometry, L: float, samples: int = 257) -> TruncatedDomain:
    """Construct the six boundary pieces of Ω_L.

    Raises:
        ConfigurationError: If L <= H_bar.
    """
    if L <= geometry.H_bar:
        raise ConfigurationError(
            f"Truncation L={L:g} must exceed H_bar={geometry.H_bar:g}"
        )

    top_inlet = float(geometry.g(-L))
    xs_wall = np.linspace(0.0, -L, samples)
    theta = np.linspace(0.0, np.pi, samples)
    segments = {
        "T_L": BoundarySegment(
            "T_L", "zero", np.array([[-L, 0.0], [L, 0.0]])
        ),
        "sigma_L": BoundarySegment(
            "sigma_L", "downstream", np.array([[L, 0.0], [L, L]])
        ),
        "l_L": BoundarySegment(
            "l_L",
            "flux",
            np.column_stack([0.5 * L + 0.5 * L * np.cos(theta), L + 0.5 * L * np.sin(theta)]),
        ),
        "I_0L": BoundarySegment(
            "I_0L", "flux", np.array([[0.0, L], [0.0, geometry.a]])
        ),
        "N_L": BoundarySegment(
            "N_L", "flux", np.column_stack([xs_wall, geometry.g(xs_wall)])
        ),
        "sigma_minus_L": BoundarySegment(
            "sigma_minus_L", "inlet", np.array([[-L, top_inlet], [-L, 0.0]])
        ),
    }
    logger.debug(f"Built truncated domain L={L:g} for nozzle '{geometry.name}'")
    return TruncatedDomain(geometry=geometry, L=float(L), segments=segments)


# =========================================================================
# Grid
# =========================================================================


@dataclass(frozen=True)
class TruncatedDomainGrid:
    """Uniform node grid with per-node class, boundary role and Dirichlet value.

    Attributes:
        x, y: Node coordinates along each axis.
        h: Grid spacing.
        node_class: EXTERIOR / INTERIOR / DIRICHLET per node.
        role: Boundary role of Dirichlet nodes (which data they receive).
        dirichlet: Assembled Dirichlet values; NaN before assembly.
        jump_mask: Nodes where the Bernoulli indicator is charged.
        Q: Flux level, set by assembly.
        lam_field: Optional per-node Bernoulli speed replacing the scalar λ.
    """

    x: np.ndarray
    y: np.ndarray
    h: float
    node_class: np.ndarray
    role: np.ndarray
    dirichlet: np.ndarray
    jump_mask: np.ndarray
    L: float = 0.0
    Q: Optional[float] = None
    lam: Optional[float] = None
    lam_field: Optional[np.ndarray] = None
    label: str = "jet"

    @property
    def shape(self) -> tuple:
        return self.node_class.shape

    @property
    def X(self) -> np.ndarray:
        return np.broadcast_to(self.x[None, :], self.shape)

    @property
    def Y(self) -> np.ndarray:
        return np.broadcast_to(self.y[:, None], self.shape)

    @property
    def interior(self) -> np.ndarray:
        return self.node_class == INTERIOR

    @property
    def is_assembled(self) -> bool:
        return self.Q is not None and not np.any(np.isnan(self.dirichlet[self.node_class != INTERIOR]))

    def column_index(self, x: float) -> int:
        """Index of the node column closest to x.

        Raises:
            DomainError: If x lies outside the grid.
        """
        if x < self.x[0] - 0.5 * self.h or x > self.x[-1] + 0.5 * self.h:
            raise DomainError(f"Column x={x:g} lies outside the grid")
        return int(np.clip(np.rint((x - self.x[0]) / self.h), 0, self.x.size - 1))

    def interior_count(self) -> int:
        return int(np.count_nonzero(self.interior))

    def columns(self) -> np.ndarray:
        """Flat (x, y, class, dirichlet_value) rows for the grid dump."""
        values = np.where(self.node_class == INTERIOR, np.nan, self.dirichlet)
        return np.column_stack(
            [
                self.X.ravel(),
                self.Y.ravel(),
                self.node_class.ravel().astype(float),
                values.ravel(),
            ]
        )

    def bernoulli_weight(self, lam: float) -> np.ndarray:
        """Per-node charge λ(X)² on jump nodes, zero elsewhere."""
        speed = self.lam_field if self.lam_field is not None else np.full(self.shape, lam)
        return np.where(self.jump_mask, speed**2, 0.0)


def _axis(start: float, stop: float, h: float, name: str) -> np.ndarray:
    cells = (stop - start) / h
    n = int(round(cells))
    if n < 1 or abs(cells - n) > 1e-9 * max(1.0, cells):
        raise ConfigurationError(
            f"Grid spacing h={h:g} does not divide the {name} extent {stop - start:g}"
        )
    return start + h * np.arange(n + 1)


def _neighbour_interior(mask: np.ndarray) -> np.ndarray:
    out = np.zeros_like(mask)
    out[1:, :] |= mask[:-1, :]
    out[:-1, :] |= mask[1:, :]
    out[:, 1:] |= mask[:, :-1]
    out[:, :-1] |= mask[:, 1:]
    return out


def rasterize(domain: TruncatedDomain, h_grid: float) -> TruncatedDomainGrid:
    """Classify the nodes of the uniform grid covering [-L, L] x [0, L].

    Priority on boundary curves (within h/2): the bottom T_L, then the flux
    pieces N_L, I_0L and the top row (lower envelope of l_L), then the
    vertical sides σ_{±L}. Flux nodes without an interior neighbour are
    exterior.

    Raises:
        ConfigurationError: If the grid has fewer than MIN_OUTLET_CELLS cells
            across the outlet or does not divide the domain.
    """
    geometry, L = domain.geometry, domain.L
    narrowest = min(geometry.a, geometry.H)
    if narrowest / h_grid < MIN_OUTLET_CELLS - 1e-9:
        raise ConfigurationError(
            f"Grid too coarse: h={h_grid:g} gives {narrowest / h_grid:.2f} cells across "
            f"the outlet, need at least {MIN_OUTLET_CELLS}"
        )
    x = _axis(-L, L, h_grid, "x")
    y = _axis(0.0, L, h_grid, "y")
    if not np.any(np.isclose(x, 0.0, atol=1e-9 * h_grid)):
        raise ConfigurationError(f"Grid spacing h={h_grid:g} must place a node column at x=0")

    X, Y = np.meshgrid(x, y)
    wall = np.where(X <= 0.0, geometry.g(np.minimum(X, 0.0)), np.inf)
    role = np.full(X.shape, ROLE_NONE, dtype=np.int8)

    bottom = np.zeros(X.shape, dtype=bool)
    bottom[0, :] = True
    flux = (X <= 1e-12) & (Y >= wall - 0.5 * h_grid)
    flux[-1, :] |= X[-1, :] >= 0.0
    sides = np.zeros(X.shape, dtype=bool)
    sides[:, 0] = True
    sides[:, -1] = True

    role[sides] = np.where(X[sides] < 0.0, ROLE_INLET, ROLE_OUTLET)
    role[flux] = ROLE_FLUX
    role[bottom] = ROLE_BOTTOM

    node_class = np.where(role == ROLE_NONE, INTERIOR, DIRICHLET).astype(np.int8)
    inner = node_class == INTERIOR
    stranded = (role == ROLE_FLUX) & ~_neighbour_interior(inner)
    node_class[stranded] = EXTERIOR

    grid = TruncatedDomainGrid(
        x=x,
        y=y,
        h=float(h_grid),
        node_class=node_class,
        role=role,
        dirichlet=np.full(X.shape, np.nan),
        jump_mask=inner & (X > 0.0),
        L=float(L),
    )
    logger.info(
        f"Rasterized Ω_L: L={L:g}, h={h_grid:g}, nodes={X.size}, interior={grid.interior_count()}"
    )
    return grid


def assemble_dirichlet(
    grid: TruncatedDomainGrid,
    lam: float,
    Psi_lambda: Callable,
    inlet: Callable,
    Q: float,
) -> TruncatedDomainGrid:
    """Attach the Dirichlet values of K_{λ,L} to a rasterized grid.

    0 on T_L, Q on the flux pieces and exterior nodes, Ψ₋L on σ₋L and
    min{Ψ_λ, Q} on σ_L. Values are clipped to [0, Q].
    """
    values = np.full(grid.shape, np.nan)
    role = grid.role
    values[role == ROLE_BOTTOM] = 0.0
    values[role == ROLE_FLUX] = Q

    inlet_rows = np.nonzero(role[:, 0] == ROLE_INLET)[0]
    if inlet_rows.size:
        values[inlet_rows, 0] = inlet(grid.y[inlet_rows])
    outlet_rows = np.nonzero(role[:, -1] == ROLE_OUTLET)[0]
    if outlet_rows.size:
        values[outlet_rows, -1] = np.minimum(Psi_lambda(grid.y[outlet_rows]), Q)

    values = np.where(grid.node_class == INTERIOR, np.nan, np.clip(values, 0.0, Q))
    outlet_column = values[:, -1]
    if np.any(np.diff(outlet_column) < -1e-12 * Q):
        logger.warning("Downstream Dirichlet column is not monotone in y")

    return replace(grid, dirichlet=values, Q=float(Q), lam=float(lam))

