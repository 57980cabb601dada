"""Root finding for strictly monotone scalar maps on (0, inf)."""
from __future__ import annotations

import math

from scipy.optimize import brentq


class BracketError(ArithmeticError):
    pass


def increasing_root(f, target: float, x0: float = 1.0, rtol: float = 1e-14, max_doublings: int = 400) -> float:
    """Solve f(x) = target for x > 0 where f is continuous and strictly increasing.

    The bracket is grown geometrically from ``x0``; the root is then refined by
    Brent's method on ``log x``.
    """
    if not (x0 > 0 and math.isfinite(x0)):
        x0 = 1.0

    def g(s):
        return f(math.exp(s)) - target

    s = math.log(x0)
    gs = g(s)
    if not math.isfinite(gs):
        raise BracketError(f"non-finite value at x0={x0}")
    if gs == 0:
        return x0
    step = 1.0 if gs < 0 else -1.0
    lo = s
    for _ in range(max_doublings):
        hi = lo + step
        ghi = g(hi)
        if not math.isfinite(ghi):
            raise BracketError("non-finite value while bracketing")
        if ghi == 0:
            return math.exp(hi)
        if (ghi > 0) != (gs > 0):
            a, b = sorted((lo, hi))
            root = brentq(g, a, b, xtol=1e-300, rtol=rtol, maxiter=500)
            return math.exp(root)
        lo, gs = hi, ghi
        step *= 2.0
    raise BracketError("failed to bracket root")


def decreasing_root(f, target: float, x0: float = 1.0, rtol: float = 1e-14) -> float:
    """Solve f(x) = target for x > 0 with f strictly decreasing."""
    return increasing_root(lambda x: -f(x), -target, x0, rtol)
