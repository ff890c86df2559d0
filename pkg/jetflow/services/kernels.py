"""Compiled Gauss-Seidel kernels for the discrete jet functional.

The local energy at an interior node with neighbour sum S is

    e(t) = Σ (t - n_k)² + h²·F(t) + h²·w·P(t)

where F is the primitive of the tabulated strength, w the Bernoulli charge
of the node and P the indicator [t < Q] (or its ramp in penalized mode). All
kernels release the GIL.
"""

import numpy as np
from numba import njit, prange

MODE_JUMP_EXACT = 0
MODE_PENALIZED = 1

NEWTON_STEPS = 50
TOTAL_STEPS = 200


@njit(cache=True, nogil=True)
def _segment(t, knots):
    k = np.searchsorted(knots, t) - 1
    if k < 0:
        k = 0
    if k > knots.size - 2:
        k = knots.size - 2
    return k


@njit(cache=True, nogil=True)
def strength(t, knots, values):
    """Piecewise-linear strength and its slope, constant outside the table."""
    if t <= knots[0]:
        return values[0], 0.0
    if t >= knots[-1]:
        return values[-1], 0.0
    k = _segment(t, knots)
    width = knots[k + 1] - knots[k]
    slope = (values[k + 1] - values[k]) / width
    return values[k] + slope * (t - knots[k]), slope


@njit(cache=True, nogil=True)
def primitive(t, knots, values, prim):
    """Exact primitive F with F' = -2·strength."""
    if t <= knots[0]:
        return prim[0] + 2.0 * values[0] * (knots[0] - t)
    if t >= knots[-1]:
        return prim[-1] - 2.0 * values[-1] * (t - knots[-1])
    k = _segment(t, knots)
    width = knots[k + 1] - knots[k]
    slope = (values[k + 1] - values[k]) / width
    s = t - knots[k]
    return prim[k] - 2.0 * (values[k] * s + 0.5 * slope * s * s)


@njit(cache=True, nogil=True)
def smooth_energy(t, nsum, nsq, h2, knots, values, prim):
    """Σ(t - n)² + h²F(t) written with the neighbour sum and sum of squares."""
    return 4.0 * t * t - 2.0 * t * nsum + nsq + h2 * primitive(t, knots, values, prim)


@njit(cache=True, nogil=True)
def stationary_point(nsum, shift, h2, bound, knots, values, newton_tol):
    """Root of 8t - 2S - 2h²f(t) + shift, increasing with slope >= 8.

    Newton inside a shrinking bracket; bisection after NEWTON_STEPS.
    """
    pad = 1e-14 * (1.0 + abs(nsum) + abs(shift))
    lo = (2.0 * nsum - shift - 2.0 * h2 * bound) / 8.0 - pad
    hi = (2.0 * nsum - shift + 2.0 * h2 * bound) / 8.0 + pad
    t = 0.5 * (lo + hi)
    for step in range(TOTAL_STEPS):
        f, fp = strength(t, knots, values)
        g = 8.0 * t - 2.0 * nsum - 2.0 * h2 * f + shift
        if g == 0.0:
            return t
        if g < 0.0:
            lo = t
        else:
            hi = t
        if hi - lo <= newton_tol:
            return 0.5 * (lo + hi)
        if step < NEWTON_STEPS:
            candidate = t - g / (8.0 - 2.0 * h2 * fp)
            if lo < candidate < hi:
                if abs(candidate - t) <= newton_tol:
                    return candidate
                t = candidate
                continue
        t = 0.5 * (lo + hi)
    return t


@njit(cache=True, nogil=True)
def local_energy(t, nsum, nsq, h2, w, Q, mode, eps, knots, values, prim):
    e = smooth_energy(t, nsum, nsq, h2, knots, values, prim)
    if w > 0.0 and t < Q:
        if mode == MODE_PENALIZED:
            e += h2 * w * min(1.0, (Q - t) / eps)
        else:
            e += h2 * w
    return e


@njit(cache=True, nogil=True)
def local_minimizer(nsum, nsq, h2, w, Q, mode, eps, bound, knots, values, prim, newton_tol):
    """Exact minimizer of the local energy over [0, Q]; ties go to Q."""
    t = stationary_point(nsum, 0.0, h2, bound, knots, values, newton_tol)
    t = min(max(t, 0.0), Q)
    if w <= 0.0 or t >= Q:
        return t

    e_dry = smooth_energy(Q, nsum, nsq, h2, knots, values, prim)
    if mode == MODE_PENALIZED:
        # ramp piece [Q - eps, Q] adds a linear term of slope -h²w/eps
        lo = max(Q - eps, 0.0)
        t_ramp = stationary_point(nsum, -h2 * w / eps, h2, bound, knots, values, newton_tol)
        t_ramp = min(max(t_ramp, lo), Q)
        t_flat = min(t, lo)
        e_flat = local_energy(t_flat, nsum, nsq, h2, w, Q, mode, eps, knots, values, prim)
        e_ramp = local_energy(t_ramp, nsum, nsq, h2, w, Q, mode, eps, knots, values, prim)
        best, e_best = (t_ramp, e_ramp) if e_ramp <= e_flat else (t_flat, e_flat)
        if e_dry <= e_best:
            return Q
        return best

    e_wet = smooth_energy(t, nsum, nsq, h2, knots, values, prim) + h2 * w
    if e_dry <= e_wet:
        return Q
    return t


@njit(cache=True, nogil=True)
def update_node(psi, weight, j, i, h2, Q, mode, eps, omega, bound, knots, values, prim, newton_tol):
    """Minimize, optionally over-relax, and write back; returns |change|."""
    n0 = psi[j - 1, i]
    n1 = psi[j + 1, i]
    n2 = psi[j, i - 1]
    n3 = psi[j, i + 1]
    nsum = n0 + n1 + n2 + n3
    nsq = n0 * n0 + n1 * n1 + n2 * n2 + n3 * n3
    w = weight[j, i]
    current = psi[j, i]

    e_current = local_energy(current, nsum, nsq, h2, w, Q, mode, eps, knots, values, prim)
    t = local_minimizer(nsum, nsq, h2, w, Q, mode, eps, bound, knots, values, prim, newton_tol)
    e_new = local_energy(t, nsum, nsq, h2, w, Q, mode, eps, knots, values, prim)
    if omega != 1.0 and t < Q and current < Q:
        relaxed = min(max(current + omega * (t - current), 0.0), Q)
        if relaxed < Q:
            e_relaxed = local_energy(relaxed, nsum, nsq, h2, w, Q, mode, eps, knots, values, prim)
            if e_relaxed <= e_current:
                t = relaxed
                e_new = e_relaxed
    if e_new > e_current:
        return 0.0
    psi[j, i] = t
    return abs(t - current)


@njit(cache=True, nogil=True)
def sweep_lexicographic(psi, node_class, weight, h2, Q, mode, eps, omega, bound, knots, values, prim, newton_tol):
    ny, nx = psi.shape
    change = 0.0
    for j in range(1, ny - 1):
        for i in range(1, nx - 1):
            if node_class[j, i] == 1:
                d = update_node(psi, weight, j, i, h2, Q, mode, eps, omega, bound, knots, values, prim, newton_tol)
                if d > change:
                    change = d
    return change


@njit(cache=True, nogil=True, parallel=True)
def sweep_red_black(psi, node_class, weight, h2, Q, mode, eps, omega, bound, knots, values, prim, newton_tol):
    """Two colour passes; nodes of one colour only read the other colour."""
    ny, nx = psi.shape
    row_change = np.zeros(ny)
    for colour in range(2):
        for j in prange(1, ny - 1):
            start = 1 + (j + 1 + colour) % 2
            for i in range(start, nx - 1, 2):
                if node_class[j, i] == 1:
                    d = update_node(psi, weight, j, i, h2, Q, mode, eps, omega, bound, knots, values, prim, newton_tol)
                    if d > row_change[j]:
                        row_change[j] = d
    return row_change.max()


@njit(cache=True, nogil=True)
def laplacian_residual(psi, node_class, h, knots, values):
    """Δ_h ψ + f₀(ψ) at interior nodes; NaN elsewhere."""
    ny, nx = psi.shape
    out = np.full((ny, nx), np.nan)
    inv_h2 = 1.0 / (h * h)
    for j in range(1, ny - 1):
        for i in range(1, nx - 1):
            if node_class[j, i] == 1:
                lap = (psi[j - 1, i] + psi[j + 1, i] + psi[j, i - 1] + psi[j, i + 1] - 4.0 * psi[j, i]) * inv_h2
                f, _ = strength(psi[j, i], knots, values)
                out[j, i] = lap + f
    return out
