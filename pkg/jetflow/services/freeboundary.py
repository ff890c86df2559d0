"""
Free Boundary Module

Reads the free boundary Γ = D_L ∩ ∂{ψ < Q} off a converged field as a graph
y = k(x), measures the Bernoulli condition on it, and provides the local
measurements on the transposed field φ = Q - ψ (positive on the wet set):
flatness, non-degeneracy, density, measure growth, blow-up deviation and the
Lipschitz and non-oscillation bands.
"""

import logging
from dataclasses import dataclass, replace
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.interpolate import RegularGridInterpolator
from scipy.optimize import minimize_scalar

from jetflow.core.exceptions import DomainError, ExtractionError
from jetflow.schemas.reports import (
    BlowupResult,
    CurveSummary,
    FlatnessReport,
    NondegeneracyResult,
)
from jetflow.services.domain import DIRICHLET, INTERIOR
from jetflow.services.solver import StreamField

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FreeBoundaryCurve:
    """Interface heights per node column of D_L.

    Attributes:
        x: Column abscissae.
        k: Subgrid interface height per column.
        last_wet: Row index of the topmost wet node per column.
        truncated: Columns wet up to the top of the grid.
        grad_mag: |∇ψ| one cell below the interface, NaN where skipped.
    """

    x: np.ndarray
    k: np.ndarray
    last_wet: np.ndarray
    truncated: np.ndarray
    columns: np.ndarray
    h: float
    grad_mag: Optional[np.ndarray] = None

    def height_at(self, x: float) -> float:
        return float(np.interp(x, self.x, self.k))

    def slope_at(self, x: float) -> float:
        return float(np.interp(x, self.x, np.gradient(self.k, self.x)))

    def normal_at(self, x: float) -> np.ndarray:
        """Unit normal pointing into the dry side, from a centered slope of k."""
        n = np.array([-self.slope_at(x), 1.0])
        return n / np.linalg.norm(n)

    def summary(self) -> CurveSummary:
        return CurveSummary(
            columns=int(self.x.size),
            truncated_columns=int(np.count_nonzero(self.truncated)),
            k_min=float(self.k.min()),
            k_max=float(self.k.max()),
        )

    def rows(self) -> np.ndarray:
        """(x, k, truncated, grad) rows for the curve dump."""
        grad = self.grad_mag if self.grad_mag is not None else np.full(self.x.shape, np.nan)
        return np.column_stack([self.x, self.k, self.truncated.astype(float), grad])


# =========================================================================
# Extraction and Bernoulli condition
# =========================================================================


def extract_curve(
    field: StreamField, lam_floor: float = 0.0, x_min: float = 0.0, x_max: Optional[float] = None
) -> FreeBoundaryCurve:
    """Extract k(x) on the node columns strictly inside (x_min, x_max).

    Per column the wet nodes (counting the bottom row) must form one block
    from y = 0. The interface is placed at y_last + (Q - ψ_last)/max(λ_est,
    lam_floor) with λ_est the one-sided slope below the last wet node.

    Raises:
        ExtractionError: If a column has a non-contiguous wet block.
    """
    grid, psi, Q = field.grid, field.psi, field.Q
    h = grid.h
    x_max = grid.x[-1] if x_max is None else x_max
    columns = np.nonzero((grid.x > x_min + 1e-12) & (grid.x < x_max - 1e-12))[0]
    top = grid.y.size - 1

    ks, lasts, truncated = [], [], []
    for i in columns:
        interior_rows = np.nonzero(grid.node_class[:, i] == INTERIOR)[0]
        upper = interior_rows.max() if interior_rows.size else 0
        wet = psi[: upper + 1, i] < Q
        dry_rows = np.nonzero(~wet)[0]
        block_end = dry_rows[0] if dry_rows.size else wet.size
        if np.any(wet[block_end:]):
            raise ExtractionError(
                f"Column x={grid.x[i]:.6g} has a non-contiguous wet block "
                f"(wet again above y={grid.y[block_end]:.6g})"
            )
        last = block_end - 1
        if last < 0:
            raise ExtractionError(f"Column x={grid.x[i]:.6g} has no wet node")
        if last == upper:
            truncated.append(True)
            ks.append(grid.y[min(upper + 1, top)])
            lasts.append(last)
            continue
        slope = (psi[last, i] - psi[last - 1, i]) / h if last >= 1 else 0.0
        ks.append(grid.y[last] + (Q - psi[last, i]) / max(slope, lam_floor, 1e-300))
        lasts.append(last)
        truncated.append(False)

    return FreeBoundaryCurve(
        x=grid.x[columns].copy(),
        k=np.asarray(ks, dtype=float),
        last_wet=np.asarray(lasts, dtype=int),
        truncated=np.asarray(truncated, dtype=bool),
        columns=columns,
        h=h,
    )


def wet_blocks(field: StreamField, x_min: float = 0.0, x_max: Optional[float] = None) -> np.ndarray:
    """Number of separate wet runs per node column strictly inside (x_min, x_max).

    Rows run from the bottom row up to the topmost interior node, as in
    extract_curve; a graph-like wet set has exactly one run per column.
    """
    grid, psi, Q = field.grid, field.psi, field.Q
    x_max = grid.x[-1] if x_max is None else x_max
    columns = np.nonzero((grid.x > x_min + 1e-12) & (grid.x < x_max - 1e-12))[0]
    counts = np.zeros(columns.size, dtype=int)
    for n, i in enumerate(columns):
        interior_rows = np.nonzero(grid.node_class[:, i] == INTERIOR)[0]
        upper = interior_rows.max() if interior_rows.size else 0
        wet = psi[: upper + 1, i] < Q
        counts[n] = int(wet[0]) + int(np.count_nonzero(wet[1:] & ~wet[:-1]))
    return counts


def boundary_gradient(field: StreamField, curve: FreeBoundaryCurve) -> Tuple[np.ndarray, int]:
    """|∇ψ| at the node one row below the topmost wet node of each column.

    Samples whose 5x5 neighbourhood touches a Dirichlet node, and truncated
    columns, are skipped (NaN).

    Returns:
        The samples and the number of skipped columns.
    """
    grid, psi, h = field.grid, field.psi, field.grid.h
    near_wall = dilate(grid.node_class == DIRICHLET, 2)
    samples = np.full(curve.x.shape, np.nan)
    for n, (i, last, cut) in enumerate(zip(curve.columns, curve.last_wet, curve.truncated)):
        j = last - 1
        if cut or j < 1 or i < 1 or i >= grid.x.size - 1 or near_wall[j, i]:
            continue
        ux = (psi[j, i + 1] - psi[j, i - 1]) / (2.0 * h)
        uy = (psi[j + 1, i] - psi[j - 1, i]) / (2.0 * h)
        samples[n] = np.hypot(ux, uy)
    skipped = int(np.count_nonzero(np.isnan(samples)))
    if skipped:
        logger.debug(f"Boundary gradient: {skipped} of {samples.size} columns skipped near walls")
    return samples, skipped


def with_gradient(field: StreamField, curve: FreeBoundaryCurve) -> Tuple[FreeBoundaryCurve, int]:
    samples, skipped = boundary_gradient(field, curve)
    return replace(curve, grad_mag=samples), skipped


def bernoulli_error(curve: FreeBoundaryCurve, lam: float, x_lo: float, x_hi: float) -> Optional[float]:
    """Median of ||∇ψ| - λ|/λ over sampled columns in [x_lo, x_hi]."""
    if curve.grad_mag is None:
        return None
    mask = (curve.x >= x_lo) & (curve.x <= x_hi) & ~np.isnan(curve.grad_mag)
    if not np.any(mask):
        return None
    return float(np.median(np.abs(curve.grad_mag[mask] - lam) / lam))


def dilate(mask: np.ndarray, radius: int) -> np.ndarray:
    """Grow a boolean mask by a square of the given radius in nodes."""
    out = mask.copy()
    ny, nx = mask.shape
    for dj in range(-radius, radius + 1):
        for di in range(-radius, radius + 1):
            shifted = np.zeros_like(mask)
            shifted[max(dj, 0): ny + min(dj, 0), max(di, 0): nx + min(di, 0)] = mask[
                max(-dj, 0): ny + min(-dj, 0), max(-di, 0): nx + min(-di, 0)
            ]
            out |= shifted
    return out


# =========================================================================
# Local measurements on φ = Q - ψ
# =========================================================================


def _check_ball(field: StreamField, X0: Sequence[float], r: float) -> None:
    x, y = field.grid.x, field.grid.y
    if r <= 0.0:
        raise DomainError(f"Ball radius must be positive, got {r:g}")
    if X0[0] - r < x[0] or X0[0] + r > x[-1] or X0[1] - r < y[0] or X0[1] + r > y[-1]:
        raise DomainError(
            f"Ball B_{r:g}(({X0[0]:.4g}, {X0[1]:.4g})) leaves the computational domain"
        )


def _ball_nodes(field: StreamField, X0: Sequence[float], r: float) -> np.ndarray:
    grid = field.grid
    return (grid.X - X0[0]) ** 2 + (grid.Y - X0[1]) ** 2 <= r * r * (1.0 + 1e-12)


def _interpolator(field: StreamField, values: np.ndarray) -> RegularGridInterpolator:
    return RegularGridInterpolator((field.grid.y, field.grid.x), values, method="linear")


def _circle(X0: Sequence[float], r: float, h: float, minimum: int = 64) -> Tuple[np.ndarray, np.ndarray]:
    n = max(minimum, int(np.ceil(8.0 * np.pi * r / h)))
    theta = 2.0 * np.pi * np.arange(n) / n
    points = np.column_stack([X0[1] + r * np.sin(theta), X0[0] + r * np.cos(theta)])
    return theta, points


def circle_mean(field: StreamField, X0: Sequence[float], r: float) -> float:
    """Mean of φ over ∂B_r(X0) by bilinear sampling and the periodic trapezoid rule."""
    _check_ball(field, X0, r)
    _, points = _circle(X0, r, field.grid.h)
    return float(np.mean(_interpolator(field, field.phi)(points)))


def nondegeneracy_probe(
    field: StreamField,
    X0: Sequence[float],
    r: float,
    lam: float,
    kappa_frac: float = 0.5,
    c_star: float = 0.05,
    C_star: float = 1.25,
) -> NondegeneracyResult:
    """Test the implication pair of non-degeneracy on B_r(X0).

    With m = (1/r)·mean_{∂B_r} φ: if m <= c*·λ then φ must vanish on
    B_{κr}; if m >= C*·λ then φ must be positive on B_r.
    """
    m = circle_mean(field, X0, r) / r
    phi = field.phi
    lower = upper = None
    if m <= c_star * lam:
        lower = bool(np.all(phi[_ball_nodes(field, X0, kappa_frac * r)] <= 0.0))
    if m >= C_star * lam:
        upper = bool(np.all(phi[_ball_nodes(field, X0, r)] > 0.0))
    return NondegeneracyResult(
        center=[float(X0[0]), float(X0[1])],
        radius=float(r),
        mean=float(m),
        lower_branch=lower,
        upper_branch=upper,
    )


def density_ratio(field: StreamField, X0: Sequence[float], r: float) -> float:
    """Node-counted wet fraction of B_r(X0)."""
    _check_ball(field, X0, r)
    ball = _ball_nodes(field, X0, r)
    return float(np.count_nonzero(field.wet_mask & ball) / np.count_nonzero(ball))


def ball_measure(field: StreamField, X0: Sequence[float], r: float) -> float:
    """μ(B_r) = ∮ ∇φ·n ds + ∫_{B_r} f(φ) with f(φ) = -f̃₀(Q - φ)."""
    _check_ball(field, X0, r)
    h = field.grid.h
    phi = field.phi
    d_phi_dy, d_phi_dx = np.gradient(phi, h)
    theta, points = _circle(X0, r, h)
    flux_density = (
        _interpolator(field, d_phi_dx)(points) * np.cos(theta)
        + _interpolator(field, d_phi_dy)(points) * np.sin(theta)
    )
    flux = float(np.mean(flux_density)) * 2.0 * np.pi * r
    ball = _ball_nodes(field, X0, r)
    source = -field.table.strength(field.psi[ball])
    return flux + h * h * float(np.sum(source))


def flatness_measure(
    field: StreamField,
    X0: Sequence[float],
    rho: float,
    nu: Sequence[float],
    lam: float,
    steps: int = 400,
) -> FlatnessReport:
    """Measure the flatness class of φ in B_ρ(X0) with direction ν (toward the dry side).

    σ₊ is the smallest s with φ = 0 where (X - X0)·ν >= sρ; σ₋ the smallest s
    with φ >= -λ((X - X0)·ν + sρ) where (X - X0)·ν <= -sρ. Both are floored at
    h/ρ. δ combines the gradient excess over λ and the oscillation of λ(X).

    Raises:
        DomainError: If the ball leaves the grid or contains no dry node.
    """
    _check_ball(field, X0, rho)
    grid, h = field.grid, field.grid.h
    nu = np.asarray(nu, dtype=float)
    nu = nu / np.linalg.norm(nu)
    ball = _ball_nodes(field, X0, rho)
    phi = field.phi
    wet = field.wet_mask
    if not np.any(ball & ~wet):
        raise DomainError("Flatness ball contains no dry node; X0 is not on the free boundary")

    projection = ((grid.X - X0[0]) * nu[0] + (grid.Y - X0[1]) * nu[1]) / rho
    floor = h / rho
    wet_reach = projection[ball & wet]
    sigma_plus = float(np.clip(max(floor, wet_reach.max() if wet_reach.size else 0.0), floor, 1.0))

    sigma_minus = 1.0
    for s in np.linspace(floor, 1.0, steps):
        region = ball & (projection <= -s)
        if np.all(phi[region] >= -lam * (projection[region] + s) * rho - 1e-12):
            sigma_minus = float(s)
            break

    gy, gx = np.gradient(field.psi, h)
    stencil = wet.copy()
    stencil[1:-1, 1:-1] &= wet[:-2, 1:-1] & wet[2:, 1:-1] & wet[1:-1, :-2] & wet[1:-1, 2:]
    inside = ball & stencil & (grid.node_class == INTERIOR)
    grad_sup = float(np.max(np.hypot(gx, gy)[inside])) if np.any(inside) else lam
    weights = grid.lam_field[ball] if grid.lam_field is not None else np.array([lam])
    oscillation = float(weights.max() - weights.min()) / lam
    delta = max(0.0, grad_sup / lam - 1.0) + oscillation

    return FlatnessReport(
        center=[float(X0[0]), float(X0[1])],
        rho=float(rho),
        nu=[float(nu[0]), float(nu[1])],
        sigma_plus=sigma_plus,
        sigma_minus=sigma_minus,
        delta=float(delta),
    )


@dataclass(frozen=True)
class RescaledField:
    """Samples of φ_r(Z) = φ(X0 + rZ)/r on the unit ball."""

    points: np.ndarray
    values: np.ndarray


def blowup_rescale(
    field: StreamField, X0: Sequence[float], r: float, lam: float, scan: int = 72
) -> Tuple[RescaledField, BlowupResult]:
    """Fit the half-plane λ·max(-Z·ν, 0) to the rescaled field over ν.

    The direction is found by a coarse angle scan refined with a bounded
    scalar minimization of the squared misfit. The reported deviation is the
    max-norm misfit at the best direction.
    """
    _check_ball(field, X0, r)
    grid = field.grid
    ball = _ball_nodes(field, X0, r)
    Z = np.column_stack([(grid.X[ball] - X0[0]) / r, (grid.Y[ball] - X0[1]) / r])
    values = field.phi[ball] / r

    def misfit(angle: float) -> np.ndarray:
        nu = np.array([np.cos(angle), np.sin(angle)])
        return values - lam * np.maximum(-(Z @ nu), 0.0)

    def objective(angle: float) -> float:
        return float(np.sum(misfit(angle) ** 2))

    angles = 2.0 * np.pi * np.arange(scan) / scan
    best = angles[int(np.argmin([objective(a) for a in angles]))]
    width = 2.0 * np.pi / scan
    refined = minimize_scalar(
        objective, bounds=(best - width, best + width), method="bounded", options={"xatol": 1e-10}
    )
    angle = float(refined.x) if refined.fun <= objective(best) else float(best)
    deviation = float(np.max(np.abs(misfit(angle)))) if values.size else 0.0
    nu = [float(np.cos(angle)), float(np.sin(angle))]
    return (
        RescaledField(points=Z, values=values),
        BlowupResult(center=[float(X0[0]), float(X0[1])], radius=float(r), nu=nu, deviation=deviation),
    )


# =========================================================================
# Global bands
# =========================================================================


def lipschitz_constant(field: StreamField) -> float:
    """max |∇ψ| over interior nodes by centered differences."""
    gy, gx = np.gradient(field.psi, field.grid.h)
    interior = field.grid.node_class == INTERIOR
    return float(np.max(np.hypot(gx, gy)[interior])) if np.any(interior) else 0.0


def oscillation_band(curve: FreeBoundaryCurve, x_lo: float, x_hi: float) -> float:
    """Smallest C with |k(x1) - k(x2)| <= C·|x1 - x2| + 2h on [x_lo, x_hi]."""
    mask = (curve.x >= x_lo) & (curve.x <= x_hi) & ~curve.truncated
    x, k = curve.x[mask], curve.k[mask]
    if x.size < 2:
        return 0.0
    dx = np.abs(x[:, None] - x[None, :])
    excess = np.abs(k[:, None] - k[None, :]) - 2.0 * curve.h
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(dx > 0.0, np.maximum(excess, 0.0) / dx, 0.0)
    return float(ratios.max())


def probe_points(curve: FreeBoundaryCurve, count: int, x_lo: float, x_hi: float) -> List[Tuple[float, float]]:
    """Evenly spaced points (x, k(x)) on the untruncated part of the curve."""
    xs = np.linspace(x_lo, x_hi, count)
    return [(float(x), curve.height_at(x)) for x in xs]


def ray_interface(
    field: StreamField, center: Sequence[float], n_rays: int, lam: float, r_max: Optional[float] = None
) -> np.ndarray:
    """Distance from center to the free boundary along n_rays rays.

    For boundaries that are not graphs over x. Each ray starts in the dry
    set and stops at the first sample where φ >= 2λh, far enough past the
    interface for bilinear sampling to see only wet nodes; the crossing is
    then corrected back by φ/λ.
    """
    grid = field.grid
    h = grid.h
    interp = _interpolator(field, field.phi)
    if r_max is None:
        r_max = min(center[0] - grid.x[0], grid.x[-1] - center[0], center[1] - grid.y[0], grid.y[-1] - center[1])
    radii = np.arange(0.0, r_max, 0.25 * h)
    out = np.full(n_rays, np.nan)
    for n, angle in enumerate(2.0 * np.pi * np.arange(n_rays) / n_rays):
        points = np.column_stack([center[1] + radii * np.sin(angle), center[0] + radii * np.cos(angle)])
        phi = interp(points)
        wet = np.nonzero(phi >= 2.0 * lam * h)[0]
        if wet.size:
            first = wet[0]
            out[n] = radii[first] - phi[first] / lam
    return out
