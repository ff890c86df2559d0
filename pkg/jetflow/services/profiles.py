"""
Hydrodynamic Profiles Module

Builds every one-dimensional object derived from the inlet velocity: the
streamline map, the vorticity strength and its global extension, the convex
primitive entering the energy, the downstream height map, the downstream
velocity, the asymptotic jet height, and the Dirichlet stream profiles at both
ends of the truncated domain.

All objects are immutable after construction and safe to share across
threads.
"""

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from functools import cached_property
from typing import TYPE_CHECKING, Callable, Dict, Optional

import numpy as np
from scipy.integrate import cumulative_trapezoid, quad, solve_ivp
from scipy.interpolate import PchipInterpolator
from scipy.optimize import brentq

from jetflow.core.exceptions import ConfigurationError, DomainError, ProfileError
from jetflow.utils.root_finding import safeguarded_newton

if TYPE_CHECKING:
    from jetflow.services.domain import NozzleGeometry

logger = logging.getLogger(__name__)

QUAD_TOL = 1e-10
ROOT_TOL = 1e-9
VALIDATION_SAMPLES = 1025
# C¹ joins of the strength extension, relative to its slopes
EXTENSION_TOL = 1e-9
PRIMITIVE_SAMPLES = 33
PRIMITIVE_SLOPE_TOL = 1e-6
PRIMITIVE_CONVEXITY_TOL = 1e-8


# =========================================================================
# Upstream profiles
# =========================================================================


class UpstreamProfile(ABC):
    """Inlet velocity u0(y) on [0, H].

    Subclasses provide the velocity and its first two derivatives as
    vectorized functions. The flux Q and the baseline speed λ₀ = u0(H) are
    derived.
    """

    def __init__(self, height: float, quad_tol: float = QUAD_TOL):
        if height <= 0.0:
            raise ProfileError(f"Inlet height must be positive, got H={height}")
        self.H = float(height)
        self.quad_tol = quad_tol

    @abstractmethod
    def velocity(self, y):
        """u0(y)."""

    @abstractmethod
    def velocity_prime(self, y):
        """u0'(y)."""

    @abstractmethod
    def velocity_second(self, y):
        """u0''(y)."""

    def cumulative_flux(self, y):
        """∫₀^y u0, by adaptive quadrature unless a subclass knows it exactly."""
        return _vectorize(
            lambda s: quad(
                self.velocity, 0.0, s, epsabs=self.quad_tol, epsrel=self.quad_tol
            )[0]
        )(y)

    @cached_property
    def Q(self) -> float:
        return mass_flux(self, self.quad_tol)

    @property
    def lambda0(self) -> float:
        return float(self.velocity(self.H))

    def validate(self, tol: float = 1e-9) -> None:
        """Check the inlet conditions u0 > 0, u0'(0) = 0 and u0'' >= 0.

        Raises:
            ProfileError: Naming the first violated condition.
        """
        ys = np.linspace(0.0, self.H, VALIDATION_SAMPLES)
        speeds = np.asarray(self.velocity(ys), dtype=float)
        if np.any(speeds <= 0.0):
            bad = ys[np.argmin(speeds)]
            raise ProfileError(
                f"u0 must be positive on [0, H]; u0({bad:.6g}) = {speeds.min():.6g}"
            )
        slope0 = float(self.velocity_prime(0.0))
        if abs(slope0) > tol * max(1.0, float(np.max(np.abs(speeds)))):
            raise ProfileError(f"u0'(0) must vanish, got {slope0:.6g}")
        curvature = np.asarray(self.velocity_second(ys), dtype=float)
        if np.any(curvature < -tol):
            bad = ys[np.argmin(curvature)]
            raise ProfileError(
                f"u0'' must be non-negative; u0''({bad:.6g}) = {curvature.min():.6g}"
            )

    def describe(self) -> dict:
        return {"preset": type(self).__name__, "H": self.H}


class ConstantProfile(UpstreamProfile):
    """Uniform inlet u0 ≡ speed (irrotational jet)."""

    def __init__(self, height: float, speed: float = 1.0, quad_tol: float = QUAD_TOL):
        super().__init__(height, quad_tol)
        self.speed = float(speed)

    def velocity(self, y):
        return np.full_like(np.asarray(y, dtype=float), self.speed)

    def velocity_prime(self, y):
        return np.zeros_like(np.asarray(y, dtype=float))

    def velocity_second(self, y):
        return np.zeros_like(np.asarray(y, dtype=float))

    def cumulative_flux(self, y):
        return self.speed * np.asarray(y, dtype=float)

    def describe(self) -> dict:
        return {**super().describe(), "speed": self.speed}


class QuadraticShearProfile(UpstreamProfile):
    """Shear inlet u0(y) = base + curvature·y²."""

    def __init__(
        self,
        height: float,
        base: float = 1.0,
        curvature: float = 1.0,
        quad_tol: float = QUAD_TOL,
    ):
        super().__init__(height, quad_tol)
        self.base = float(base)
        self.curvature = float(curvature)

    def velocity(self, y):
        y = np.asarray(y, dtype=float)
        return self.base + self.curvature * y**2

    def velocity_prime(self, y):
        return 2.0 * self.curvature * np.asarray(y, dtype=float)

    def velocity_second(self, y):
        return np.full_like(np.asarray(y, dtype=float), 2.0 * self.curvature)

    def cumulative_flux(self, y):
        y = np.asarray(y, dtype=float)
        return self.base * y + self.curvature * y**3 / 3.0

    def describe(self) -> dict:
        return {**super().describe(), "base": self.base, "curvature": self.curvature}


class TabulatedProfile(UpstreamProfile):
    """Inlet given by samples, interpolated with a monotone cubic rule.

    Derivatives come from the interpolant, so validation checks the
    interpolant rather than the raw samples. Repeat the bottom speed in the
    first two samples to obtain u0'(0) = 0.
    """

    def __init__(self, heights, speeds, quad_tol: float = QUAD_TOL):
        heights = np.asarray(heights, dtype=float)
        speeds = np.asarray(speeds, dtype=float)
        if heights.ndim != 1 or heights.shape != speeds.shape or heights.size < 3:
            raise ProfileError("Tabulated profile needs matching 1-D samples (>= 3)")
        if heights[0] != 0.0 or np.any(np.diff(heights) <= 0.0):
            raise ProfileError("Tabulated heights must start at 0 and increase")
        if np.any(speeds <= 0.0):
            raise ProfileError("Tabulated speeds must be positive")
        super().__init__(heights[-1], quad_tol)
        self.heights = heights
        self.speeds = speeds
        self._interp = PchipInterpolator(heights, speeds, extrapolate=True)
        self._d1 = self._interp.derivative(1)
        self._d2 = self._interp.derivative(2)
        self._primitive = self._interp.antiderivative()

    def velocity(self, y):
        return self._interp(np.asarray(y, dtype=float))

    def velocity_prime(self, y):
        return self._d1(np.asarray(y, dtype=float))

    def velocity_second(self, y):
        return self._d2(np.asarray(y, dtype=float))

    def cumulative_flux(self, y):
        return self._primitive(np.asarray(y, dtype=float)) - self._primitive(0.0)

    def describe(self) -> dict:
        return {**super().describe(), "samples": int(self.heights.size)}


def _vectorize(scalar: Callable[[float], float]) -> Callable:
    """Apply a scalar function elementwise, returning floats for scalar input."""

    def apply(x):
        arr = np.asarray(x, dtype=float)
        if arr.ndim == 0:
            return float(scalar(float(arr)))
        return np.array([scalar(float(v)) for v in arr.ravel()]).reshape(arr.shape)

    return apply


# =========================================================================
# Flux and streamline map
# =========================================================================


def mass_flux(profile: UpstreamProfile, tol: float = QUAD_TOL) -> float:
    """Q = ∫₀^H u0 by adaptive quadrature.

    Raises:
        ProfileError: If u0 is not positive on [0, H].
    """
    ys = np.linspace(0.0, profile.H, VALIDATION_SAMPLES)
    if np.any(np.asarray(profile.velocity(ys)) <= 0.0):
        raise ProfileError("Mass flux requested for a non-positive inlet velocity")
    value, _ = quad(profile.velocity, 0.0, profile.H, epsabs=tol, epsrel=tol, limit=200)
    return float(value)


@dataclass(frozen=True)
class StreamlineMap:
    """κ(t): inlet height of the streamline carrying flux t, inverse of ∫₀^y u0."""

    profile: UpstreamProfile
    Q: float
    tol: float = 1e-10

    def _solve(self, t: float) -> float:
        if t < -self.tol * self.Q or t > self.Q * (1.0 + self.tol):
            raise DomainError(f"κ is defined on [0, {self.Q:.6g}], got t={t:.6g}")
        if t <= 0.0:
            return 0.0
        if t >= self.Q:
            return self.profile.H
        return safeguarded_newton(
            lambda y: float(self.profile.cumulative_flux(y)) - t,
            lambda y: float(self.profile.velocity(y)),
            0.0,
            self.profile.H,
            xtol=1e-15,
            ftol=0.01 * self.tol * self.Q,
        )

    def __call__(self, t):
        return _vectorize(self._solve)(t)


def build_kappa(profile: UpstreamProfile) -> StreamlineMap:
    """Build the streamline map κ for the given inlet."""
    return StreamlineMap(profile=profile, Q=profile.Q)


# =========================================================================
# Vorticity strength
# =========================================================================


@dataclass(frozen=True)
class VorticityStrength:
    """f0(t) = −u0'(κ(t)) on [0, Q] with f0'(t) = −u0''(κ)/u0(κ)."""

    profile: UpstreamProfile
    kappa: StreamlineMap

    def __call__(self, t):
        return -np.asarray(self.profile.velocity_prime(self.kappa(t)), dtype=float)

    def derivative(self, t):
        heights = self.kappa(t)
        return -np.asarray(self.profile.velocity_second(heights), dtype=float) / np.asarray(
            self.profile.velocity(heights), dtype=float
        )


def vorticity_strength(
    profile: UpstreamProfile, kappa: StreamlineMap, tol: float = 1e-12
) -> VorticityStrength:
    """Build f0 and check it is non-increasing on a dense sample.

    Raises:
        ProfileError: If f0(0) != 0 or f0 increases somewhere.
    """
    strength = VorticityStrength(profile=profile, kappa=kappa)
    ts = np.linspace(0.0, kappa.Q, 257)
    values = strength(ts)
    scale = max(1.0, float(np.max(np.abs(values))))
    if abs(values[0]) > 1e-9 * scale:
        raise ProfileError(f"f0(0) must vanish, got {values[0]:.6g}")
    if np.any(np.diff(values) > tol * scale):
        raise ProfileError("f0 must be non-increasing on [0, Q]")
    return strength


@dataclass(frozen=True)
class ExtendedStrength:
    """C¹ extension of f0 to the real line, quadratic blends then constants."""

    f0: Callable
    f0_prime_0: float
    f0_prime_Q: float
    Q: float

    @cached_property
    def f0_Q(self) -> float:
        return float(self.f0(self.Q))

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        scalar = t.ndim == 0
        t = np.atleast_1d(t)
        out = np.empty_like(t)
        Q, a0, aQ, fQ = self.Q, self.f0_prime_0, self.f0_prime_Q, self.f0_Q

        far_top = t >= Q + 1.0
        top = (t >= Q) & ~far_top
        mid = (t >= 0.0) & (t < Q)
        bottom = (t >= -1.0) & (t < 0.0)
        far_bottom = t < -1.0

        out[far_top] = fQ + 0.5 * aQ
        tau = t[top] - Q
        out[top] = fQ + aQ * (tau - 0.5 * tau**2)
        if np.any(mid):
            out[mid] = self.f0(t[mid])
        out[bottom] = a0 * (t[bottom] + 0.5 * t[bottom] ** 2)
        out[far_bottom] = -0.5 * a0
        return float(out[0]) if scalar else out

    def derivative(self, t):
        """f̃₀'(t); on [0, Q] it requires f0 to expose .derivative."""
        t = np.asarray(t, dtype=float)
        scalar = t.ndim == 0
        t = np.atleast_1d(t)
        out = np.zeros_like(t)
        Q = self.Q
        top = (t >= Q) & (t < Q + 1.0)
        mid = (t >= 0.0) & (t < Q)
        bottom = (t >= -1.0) & (t < 0.0)
        out[top] = self.f0_prime_Q * (1.0 - (t[top] - Q))
        if np.any(mid):
            out[mid] = self.f0.derivative(t[mid])
        out[bottom] = self.f0_prime_0 * (1.0 + t[bottom])
        return float(out[0]) if scalar else out

    def continuity_defects(self) -> Dict[str, float]:
        """Jumps of f̃₀ and f̃₀' where the blends meet f0.

        The joins at t = −1 and Q + 1 are exact by construction; at 0 and Q
        the blend slopes must match f0'. Slopes are skipped when f0 exposes
        no .derivative.
        """
        defects = {"value@0": abs(float(self.f0(0.0)))}
        if hasattr(self.f0, "derivative"):
            defects["slope@0"] = abs(float(self.f0.derivative(0.0)) - self.f0_prime_0)
            defects["slope@Q"] = abs(float(self.f0.derivative(self.Q)) - self.f0_prime_Q)
        return defects


def extend_strength(
    f0: Callable, f0_prime_0: float, f0_prime_Q: float, Q: float
) -> ExtendedStrength:
    """Extend f0 from [0, Q] to all reals, C¹ at t = −1, 0, Q, Q + 1.

    Raises:
        ProfileError: If the extension is not C¹ where it meets f0.
    """
    extended = ExtendedStrength(
        f0=f0, f0_prime_0=float(f0_prime_0), f0_prime_Q=float(f0_prime_Q), Q=float(Q)
    )
    scale = max(1.0, abs(extended.f0_prime_0), abs(extended.f0_prime_Q), abs(extended.f0_Q))
    broken = {k: v for k, v in extended.continuity_defects().items() if v > EXTENSION_TOL * scale}
    if broken:
        detail = ", ".join(f"{k}={v:.3g}" for k, v in broken.items())
        raise ProfileError(f"Extension of f0 is not C¹: {detail}")
    return extended


@dataclass(frozen=True)
class QuadraturePrimitive:
    """F0(t) = 2∫_t^Q f̃₀(s) ds by adaptive quadrature.

    The breakpoints of the extension are passed to quad so each piece is
    integrated as a smooth function.
    """

    f0_ext: Callable
    Q: float
    tol: float = QUAD_TOL

    def _scalar(self, t: float) -> float:
        Q = self.Q
        if t == Q:
            return 0.0
        lo, hi = min(t, Q), max(t, Q)
        inner = [k for k in (-1.0, 0.0, Q, Q + 1.0) if lo < k < hi]
        value, _ = quad(
            lambda s: float(self.f0_ext(s)),
            lo,
            hi,
            points=inner or None,
            epsabs=self.tol,
            epsrel=self.tol,
            limit=200,
        )
        return 2.0 * value if t < Q else -2.0 * value

    def __call__(self, t):
        return _vectorize(self._scalar)(t)

    def derivative_defect(self, samples: np.ndarray, step: float = 1e-3) -> float:
        """max |F0'(t) + 2f̃₀(t)| with F0' from a 4-point central difference."""
        t = np.asarray(samples, dtype=float)
        fd = (
            -self(t + 2.0 * step) + 8.0 * self(t + step) - 8.0 * self(t - step) + self(t - 2.0 * step)
        ) / (12.0 * step)
        return float(np.max(np.abs(fd + 2.0 * np.asarray(self.f0_ext(t), dtype=float))))

    def convexity_defect(self, samples: np.ndarray) -> float:
        """Largest negative second difference of F0 over consecutive samples."""
        values = np.asarray(self(np.asarray(samples, dtype=float)), dtype=float)
        if values.size < 3:
            return 0.0
        return float(max(0.0, -np.min(values[:-2] - 2.0 * values[1:-1] + values[2:])))


def primitive_F0(f0_ext: Callable, Q: float, tol: float = QUAD_TOL) -> QuadraturePrimitive:
    """Quadrature F0 after checking F0' = −2f̃₀ and convexity on a sample.

    A failed check is logged as a warning; the primitive is still returned.
    """
    primitive = QuadraturePrimitive(f0_ext=f0_ext, Q=float(Q), tol=tol)
    samples = np.linspace(-1.5, Q + 1.5, PRIMITIVE_SAMPLES)
    slope = primitive.derivative_defect(samples)
    convexity = primitive.convexity_defect(samples)
    if slope > PRIMITIVE_SLOPE_TOL or convexity > PRIMITIVE_CONVEXITY_TOL:
        logger.warning(
            f"Quadrature F0 fails its checks: |F0' + 2f̃₀|={slope:.3g}, convexity defect={convexity:.3g}"
        )
    return primitive


@dataclass(frozen=True)
class StrengthTable:
    """Piecewise-linear tabulation of f̃₀ with its exact primitive.

    The solver kernels evaluate the strength through this table; F is the
    exact primitive of the linear interpolant (anchored at F(Q) = 0), so the
    local Newton solve and the energy stay consistent.
    """

    t: np.ndarray
    f: np.ndarray
    F: np.ndarray
    Q: float

    def strength(self, t):
        return np.interp(t, self.t, self.f)

    def primitive(self, t):
        t = np.asarray(t, dtype=float)
        inside = np.interp(t, self.t, self.F)
        left = self.F[0] + 2.0 * self.f[0] * (self.t[0] - t)
        right = self.F[-1] - 2.0 * self.f[-1] * (t - self.t[-1])
        return np.where(t < self.t[0], left, np.where(t > self.t[-1], right, inside))

    @property
    def strength_bound(self) -> float:
        return float(np.max(np.abs(self.f)))


@dataclass(frozen=True)
class VorticityModel:
    """Streamline map, strength, its extension and the convex primitive F0."""

    profile: UpstreamProfile
    kappa: StreamlineMap
    f0: VorticityStrength
    f0_ext: ExtendedStrength
    Lambda_bound: float
    table_nodes: int = 2049
    _table: Optional[StrengthTable] = field(default=None, repr=False, compare=False)

    @classmethod
    def from_profile(cls, profile: UpstreamProfile, table_nodes: int = 2049) -> "VorticityModel":
        profile.validate()
        kappa = build_kappa(profile)
        f0 = vorticity_strength(profile, kappa)
        Q = kappa.Q
        f0_ext = extend_strength(
            f0, float(f0.derivative(0.0)), float(f0.derivative(Q)), Q
        )
        samples = np.linspace(-1.5, Q + 1.5, 513)
        bound = float(
            max(np.max(np.abs(f0_ext(samples))), np.max(np.abs(f0_ext.derivative(samples))))
        )
        logger.info(f"Vorticity model built: Q={Q:.6g}, Λ={bound:.6g}")
        return cls(
            profile=profile,
            kappa=kappa,
            f0=f0,
            f0_ext=f0_ext,
            Lambda_bound=bound,
            table_nodes=table_nodes,
        )

    @property
    def Q(self) -> float:
        return self.kappa.Q

    def F0(self, t):
        """F0(t) = 2∫_t^Q f̃₀ in closed form.

        On [0, Q] the substitution s = ∫₀^y u0 turns f0 ds into −u0 u0' dy,
        so F0(t) = u0(κ(t))² − u0(H)². The polynomial blends integrate exactly.
        """
        t = np.asarray(t, dtype=float)
        scalar = t.ndim == 0
        t = np.atleast_1d(t)
        Q = self.Q
        a0, aQ, fQ = self.f0_ext.f0_prime_0, self.f0_ext.f0_prime_Q, self.f0_ext.f0_Q
        lam0_sq = self.profile.lambda0**2
        F_at_0 = float(self.profile.velocity(0.0)) ** 2 - lam0_sq
        out = np.empty_like(t)

        mid = (t >= 0.0) & (t <= Q)
        if np.any(mid):
            out[mid] = np.asarray(self.profile.velocity(self.kappa(t[mid]))) ** 2 - lam0_sq

        top = (t > Q) & (t <= Q + 1.0)
        tau = t[top] - Q
        out[top] = -2.0 * (fQ * tau + aQ * (0.5 * tau**2 - tau**3 / 6.0))

        far_top = t > Q + 1.0
        out[far_top] = -2.0 * (
            fQ + aQ / 3.0 + (fQ + 0.5 * aQ) * (t[far_top] - Q - 1.0)
        )

        bottom = (t >= -1.0) & (t < 0.0)
        s = t[bottom]
        out[bottom] = F_at_0 - 2.0 * a0 * (0.5 * s**2 + s**3 / 6.0)

        far_bottom = t < -1.0
        out[far_bottom] = F_at_0 - 2.0 * a0 / 3.0 - a0 * (-1.0 - t[far_bottom])
        return float(out[0]) if scalar else out

    def transposed_strength(self, t):
        """f(t) = −f̃₀(Q − t), the strength for the field φ = Q − ψ."""
        return -np.asarray(self.f0_ext(self.Q - np.asarray(t, dtype=float)))

    def table(self) -> StrengthTable:
        """Tabulate f̃₀ on [−1, Q + 1] for the compiled kernels."""
        if self._table is not None:
            return self._table
        Q = self.Q
        n_side = max(33, self.table_nodes // 8)
        nodes = np.concatenate(
            [
                np.linspace(-1.0, 0.0, n_side),
                np.linspace(0.0, Q, self.table_nodes)[1:],
                np.linspace(Q, Q + 1.0, n_side)[1:],
            ]
        )
        values = np.asarray(self.f0_ext(nodes), dtype=float)
        cumulative = cumulative_trapezoid(values, nodes, initial=0.0)
        q_index = n_side - 1 + self.table_nodes - 1
        primitive = 2.0 * (cumulative[q_index] - cumulative)
        primitive[q_index] = 0.0
        table = StrengthTable(t=nodes, f=values, F=primitive, Q=Q)
        object.__setattr__(self, "_table", table)
        return table


def check_strength_conditions(model: VorticityModel, samples: int = 401) -> dict[str, float]:
    """Measure the structural conditions on f(t) = −f̃₀(Q − t) and F.

    Returns the worst violation of each condition (0 means satisfied):
    0 ≤ f ≤ Λ for t ≤ 0, −Λ ≤ f' ≤ 0, F(0) = 0 and 0 ≤ F'' ≤ 2Λ.
    """
    Lam = model.Lambda_bound
    Q = model.Q
    ts = np.linspace(-Q - 1.5, Q + 1.5, samples)
    f = model.transposed_strength(ts)
    f_prime = np.asarray(model.f0_ext.derivative(Q - ts))
    nonpositive = ts <= 0.0
    F_second = -2.0 * f_prime

    return {
        "f_nonnegative": float(max(0.0, -np.min(f[nonpositive]))),
        "f_bounded": float(max(0.0, np.max(f[nonpositive]) - Lam)),
        "f_prime_nonpositive": float(max(0.0, np.max(f_prime))),
        "f_prime_bounded": float(max(0.0, -Lam - np.min(f_prime))),
        "F_at_zero": float(abs(model.F0(Q))),
        "F_convex": float(max(0.0, -np.min(F_second))),
        "F_second_bounded": float(max(0.0, np.max(F_second) - 2.0 * Lam)),
    }


# =========================================================================
# Downstream state
# =========================================================================


def _check_pressure(p_diff: float) -> None:
    if p_diff < 0.0:
        raise DomainError(f"Pressure difference must be non-negative, got {p_diff:.6g}")


def _identity_on(profile: UpstreamProfile, v, tol: float, name: str, arg: str):
    """χ(·; 0) is the identity on [0, H]."""
    values = np.asarray(v, dtype=float)
    if np.any(values < -tol) or np.any(values > profile.H + tol):
        raise DomainError(
            f"{name} is defined on [0, {profile.H:.6g}], got {arg} in [{values.min():.6g}, {values.max():.6g}]"
        )
    clipped = np.clip(values, 0.0, profile.H)
    return clipped if np.ndim(v) else float(clipped)


def chi(profile: UpstreamProfile, s, p_diff: float, tol: float = QUAD_TOL):
    """χ(s; p_diff) = ∫₀^s u0/√(u0² + 2p_diff), the downstream height of streamline s."""
    _check_pressure(p_diff)
    if p_diff == 0.0:
        return _identity_on(profile, s, tol, "χ", "s")

    def integrand(t: float) -> float:
        u = float(profile.velocity(t))
        return u / np.sqrt(u * u + 2.0 * p_diff)

    def scalar(v: float) -> float:
        if v < -tol or v > profile.H + tol:
            raise DomainError(f"χ is defined on [0, {profile.H:.6g}], got s={v:.6g}")
        return quad(integrand, 0.0, min(max(v, 0.0), profile.H), epsabs=tol, epsrel=tol)[0]

    return _vectorize(scalar)(s)


def chi_inverse(profile: UpstreamProfile, t, p_diff: float, tol: float = ROOT_TOL):
    """χ⁻¹(t; p_diff) by safeguarded Newton on the strictly increasing χ."""
    _check_pressure(p_diff)
    if p_diff == 0.0:
        return _identity_on(profile, t, tol, "χ⁻¹", "t")
    top = float(chi(profile, profile.H, p_diff))

    def slope(s: float) -> float:
        u = float(profile.velocity(s))
        return u / np.sqrt(u * u + 2.0 * p_diff)

    def scalar(v: float) -> float:
        if v < -tol or v > top + tol:
            raise DomainError(f"χ⁻¹ is defined on [0, {top:.6g}], got t={v:.6g}")
        if v <= 0.0:
            return 0.0
        if v >= top:
            return profile.H
        return safeguarded_newton(
            lambda s: float(chi(profile, s, p_diff)) - v,
            slope,
            0.0,
            profile.H,
            xtol=1e-14,
            ftol=0.01 * tol,
        )

    return _vectorize(scalar)(t)


def downstream_velocity(profile: UpstreamProfile, t, p_diff: float):
    """u1(t) = √(u0²(χ⁻¹(t)) + 2p_diff) on [0, h]."""
    heights = chi_inverse(profile, t, p_diff)
    return np.sqrt(np.asarray(profile.velocity(heights), dtype=float) ** 2 + 2.0 * p_diff)


def pressure_difference(lam: float, profile: UpstreamProfile) -> float:
    """p_diff = (λ² − λ₀²)/2.

    Raises:
        DomainError: If λ < λ₀.
    """
    lam0 = profile.lambda0
    if lam < lam0 * (1.0 - 1e-12):
        raise DomainError(f"λ must be at least λ₀={lam0:.6g}, got {lam:.6g}")
    return max(0.0, 0.5 * (lam * lam - lam0 * lam0))


def asymptotic_height(lam: float, profile: UpstreamProfile) -> float:
    """h_λ = χ(H; (λ² − λ₀²)/2); equals H at λ₀ and decreases with λ."""
    return float(chi(profile, profile.H, pressure_difference(lam, profile)))


@dataclass(frozen=True)
class DownstreamStream:
    """Ψ_λ(y) = ∫₀^y u1, clamped at Q above the asymptotic height.

    Evaluated through the change of variables s = χ⁻¹(y), under which
    u1(χ(s))χ'(s) = u0(s), so Ψ_λ(y) = ∫₀^{χ⁻¹(y)} u0.
    """

    profile: UpstreamProfile
    p_diff: float
    h: float
    Q: float

    def _scalar(self, y: float) -> float:
        if y < 0.0:
            raise DomainError(f"Ψ_λ is defined on [0, ∞), got y={y:.6g}")
        if y >= self.h:
            return self.Q
        s = float(chi_inverse(self.profile, y, self.p_diff))
        return min(float(self.profile.cumulative_flux(s)), self.Q)

    def __call__(self, y):
        return _vectorize(self._scalar)(y)


def downstream_stream(lam: float, profile: UpstreamProfile) -> DownstreamStream:
    p_diff = pressure_difference(lam, profile)
    return DownstreamStream(
        profile=profile,
        p_diff=p_diff,
        h=float(chi(profile, profile.H, p_diff)),
        Q=profile.Q,
    )


@dataclass(frozen=True)
class DownstreamState:
    """Everything the far-field state downstream depends on for one λ."""

    lam: float
    p_diff: float
    p_atm: float
    p_in: float
    h: float
    profile: UpstreamProfile
    Psi_lambda: DownstreamStream

    @classmethod
    def build(cls, lam: float, profile: UpstreamProfile, p_atm: float = 0.0) -> "DownstreamState":
        stream = downstream_stream(lam, profile)
        return cls(
            lam=float(lam),
            p_diff=stream.p_diff,
            p_atm=float(p_atm),
            p_in=float(p_atm) + stream.p_diff,
            h=stream.h,
            profile=profile,
            Psi_lambda=stream,
        )

    def chi(self, s):
        return chi(self.profile, s, self.p_diff)

    def chi_inv(self, t):
        return chi_inverse(self.profile, t, self.p_diff)

    def u1(self, t):
        return downstream_velocity(self.profile, t, self.p_diff)


# =========================================================================
# Inlet profile
# =========================================================================


@dataclass(frozen=True)
class InletProfile:
    """Ψ₋L on [0, g(−L)]: Ψ'' = −f̃₀(Ψ), Ψ(0) = 0, Ψ(g(−L)) = Q."""

    L: float
    top: float
    Q: float
    slope: float
    endpoint_residual: float
    solution: object = field(repr=False)

    def values(self, y):
        y = np.asarray(y, dtype=float)
        inside = np.clip(y, 0.0, self.top)
        out = np.asarray(self.solution(inside)[0], dtype=float)
        out = np.where(y <= 0.0, 0.0, np.where(y >= self.top, self.Q, out))
        return float(out) if out.ndim == 0 else out

    def __call__(self, y):
        return self.values(y)


def inlet_stream(
    L: float,
    geometry: "NozzleGeometry",
    f0_ext: Callable,
    Q: float,
    tol: float = ROOT_TOL,
) -> InletProfile:
    """Solve the inlet two-point problem by shooting on Ψ'(0).

    The endpoint value is increasing in the initial slope (f̃₀ is
    non-increasing), so the residual is bracketed from slope 0 upward.

    Raises:
        ConfigurationError: If no bracket is found or the endpoint residual is too large.
    """
    top = float(geometry.g(-L))
    if top <= 0.0:
        raise ConfigurationError(f"Nozzle height g(-L) must be positive, got {top:.6g}")

    def shoot(slope: float):
        return solve_ivp(
            lambda _, z: [z[1], -float(f0_ext(z[0]))],
            (0.0, top),
            [0.0, slope],
            method="DOP853",
            rtol=1e-12,
            atol=1e-14 * max(Q, 1.0),
            dense_output=True,
        )

    def residual(slope: float) -> float:
        return float(shoot(slope).y[0, -1]) - Q

    lower, upper = 0.0, 2.0 * Q / top
    if residual(lower) >= 0.0:
        raise ConfigurationError(
            f"Inlet shooting bracket not found: zero slope already reaches Q "
            f"(f0_ext(0)={float(f0_ext(0.0)):.6g}, g(-L)={top:.6g})"
        )
    for _ in range(60):
        if residual(upper) > 0.0:
            break
        lower, upper = upper, 2.0 * upper
    else:
        raise ConfigurationError(
            f"Inlet shooting bracket not found up to slope {upper:.6g} "
            f"(f0_ext(Q)={float(f0_ext(Q)):.6g}, g(-L)={top:.6g})"
        )

    slope = brentq(residual, lower, upper, xtol=1e-15, rtol=1e-15, maxiter=200)
    sol = shoot(slope)
    end_residual = abs(float(sol.y[0, -1]) - Q)
    if end_residual > tol * Q:
        raise ConfigurationError(
            f"Inlet shooting residual {end_residual:.3g} exceeds tolerance {tol * Q:.3g}"
        )

    ys = np.linspace(0.0, top, 257)[1:-1]
    interior = sol.sol(ys)
    if np.any(interior[0] <= 0.0) or np.any(interior[0] >= Q) or np.any(interior[1] < -tol):
        raise ConfigurationError("Inlet profile leaves (0, Q) or decreases in the interior")

    logger.debug(f"Inlet profile at L={L}: slope Ψ'(0)={slope:.10g}, residual={end_residual:.3g}")
    return InletProfile(
        L=float(L),
        top=top,
        Q=float(Q),
        slope=float(slope),
        endpoint_residual=end_residual,
        solution=sol.sol,
    )
