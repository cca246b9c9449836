"""Deterministic scalar quadrature helpers.

The adaptive Simpson rule below is the single integration primitive used by
the cap-geometry module; it recurses until the local Richardson error
estimate drops under the requested absolute tolerance, so results are
reproducible to the stated accuracy on every platform.
"""

from __future__ import annotations

from typing import Callable

from .errors import ContractViolation


def adaptive_simpson(
    f: Callable[[float], float],
    a: float,
    b: float,
    tol: float,
    max_depth: int = 60,
) -> float:
    """Integrate ``f`` over ``[a, b]`` to absolute tolerance ``tol``."""
    if not tol > 0.0:
        raise ContractViolation("tolerance must be positive")
    if a == b:
        return 0.0
    fa, fb = f(a), f(b)
    m = 0.5 * (a + b)
    fm = f(m)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    return _simpson_step(f, a, b, fa, fm, fb, whole, tol, max_depth)


def _simpson_step(f, a, b, fa, fm, fb, whole, tol, depth):
    m = 0.5 * (a + b)
    lm = 0.5 * (a + m)
    rm = 0.5 * (m + b)
    flm, frm = f(lm), f(rm)
    left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
    right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
    err = left + right - whole
    if depth <= 0 or abs(err) <= 15.0 * tol:
        # Richardson extrapolation of the composite estimate.
        return left + right + err / 15.0
    half = 0.5 * tol
    return _simpson_step(
        f, a, m, fa, flm, fm, left, half, depth - 1
    ) + _simpson_step(f, m, b, fm, frm, fb, right, half, depth - 1)
