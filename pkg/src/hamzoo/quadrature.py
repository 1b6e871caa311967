"""Adaptive Simpson quadrature with interval bisection and Richardson update."""

from __future__ import annotations


class QuadratureFailure(ArithmeticError):
    """Bisection depth exhausted; carries the achieved error estimate."""

    def __init__(self, message: str, achieved: float):
        super().__init__(f"{message} (achieved error estimate {achieved:.3e})")
        self.achieved = achieved


def adaptive_simpson(f, a: float, b: float, abs_tol: float = 1e-12,
                     rel_tol: float = 1e-10, max_depth: int = 48) -> float:
    """Integrate f over [a, b] to tolerance max(abs_tol, rel_tol*|estimate|)."""
    if a == b:
        return 0.0
    sign = 1.0
    if b < a:
        a, b = b, a
        sign = -1.0
    mid = 0.5 * (a + b)
    fa, fm, fb = f(a), f(mid), f(b)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    tol = max(abs_tol, rel_tol * abs(whole))
    return sign * _refine(f, a, b, fa, fm, fb, whole, tol, max_depth)


def _refine(f, a, b, fa, fm, fb, whole, tol, depth):
    mid = 0.5 * (a + b)
    lm = 0.5 * (a + mid)
    rm = 0.5 * (mid + b)
    flm, frm = f(lm), f(rm)
    left = (mid - a) / 6.0 * (fa + 4.0 * flm + fm)
    right = (b - mid) / 6.0 * (fm + 4.0 * frm + fb)
    delta = left + right - whole
    if abs(delta) <= 15.0 * tol:
        return left + right + delta / 15.0
    if depth <= 0:
        raise QuadratureFailure("adaptive Simpson bisection depth exhausted",
                                achieved=abs(delta) / 15.0)
    return (_refine(f, a, mid, fa, flm, fm, left, tol / 2.0, depth - 1)
            + _refine(f, mid, b, fm, frm, fb, right, tol / 2.0, depth - 1))
