"""Scalar root finding on strictly monotone functions.

scipy offers bracketing (brentq) and unbracketed Newton separately; the
profile maps need both at once: Newton speed with a bracket that is never
left, so this module keeps a small bracketed Newton.
"""

from typing import Callable

MAX_NEWTON_ITERATIONS = 50


def safeguarded_newton(
    func: Callable[[float], float],
    slope: Callable[[float], float],
    lower: float,
    upper: float,
    *,
    xtol: float = 1e-14,
    ftol: float = 0.0,
    max_iter: int = 200,
) -> float:
    """Find the root of an increasing function inside [lower, upper].

    Newton steps that leave the current bracket, or that fail to shrink it,
    are replaced by bisection. After MAX_NEWTON_ITERATIONS Newton attempts the
    routine bisects only.

    Args:
        func: Strictly increasing function with func(lower) <= 0 <= func(upper).
        slope: Derivative of func.
        lower: Left end of the bracket.
        upper: Right end of the bracket.
        xtol: Absolute tolerance on the bracket width.
        ftol: Absolute tolerance on |func(x)|.
        max_iter: Hard iteration cap.

    Returns:
        The root estimate.

    Raises:
        ValueError: If the bracket does not enclose a sign change.
    """
    f_lo = func(lower)
    f_hi = func(upper)
    if f_lo == 0.0:
        return lower
    if f_hi == 0.0:
        return upper
    if f_lo > 0.0 or f_hi < 0.0:
        raise ValueError(
            f"Bracket [{lower}, {upper}] does not enclose a root (f = {f_lo}, {f_hi})"
        )

    x = 0.5 * (lower + upper)
    for iteration in range(max_iter):
        fx = func(x)
        if abs(fx) <= ftol:
            return x
        if fx < 0.0:
            lower = x
        else:
            upper = x
        if upper - lower <= xtol:
            return 0.5 * (lower + upper)

        candidate = None
        if iteration < MAX_NEWTON_ITERATIONS:
            dfx = slope(x)
            if dfx > 0.0:
                step = x - fx / dfx
                if lower < step < upper:
                    if abs(step - x) <= xtol:
                        return step
                    candidate = step
        x = candidate if candidate is not None else 0.5 * (lower + upper)
    return x
