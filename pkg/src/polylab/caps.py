"""Spherical caps and surface bodies of the unit ball.

A cap ``{x on the unit sphere : <x, e> >= rho}`` is parameterised by its
height ``h = 1 - rho``; all integrals are written in terms of ``h`` with the
colatitude recovered through ``theta = 2 asin(sqrt(h / 2))``, which stays
fully accurate for very shallow caps.  Boundary measure is normalised so the
whole sphere has measure one.

The surface body at level ``t`` is the intersection of all half-spaces that
cut off boundary measure at most ``t``; for the unit ball it is the centred
ball whose radius makes a cap of measure exactly ``t``.  A polytope inscribed
in the sphere contains the surface body iff it contains the origin and every
facet plane sits at distance at least that radius.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import asin, log, sqrt

import numpy as np

from .bodies import MAX_DIM, MIN_DIM, kappa
from .errors import ContractViolation
from .hull import Polytope
from .quadrature import adaptive_simpson
from .stats import FitResult, fit_power_law

VOLUME_TO_BOUNDARY = "volume-to-boundary"
BOUNDARY_TO_VOLUME = "boundary-to-volume"

_EQUALITY_SLACK = 1e-9


@dataclass(frozen=True)
class CapSpec:
    """A spherical cap of the unit sphere at cosine threshold ``rho``."""

    dim: int
    rho: float

    def __post_init__(self) -> None:
        if not (MIN_DIM <= self.dim <= MAX_DIM):
            raise ContractViolation(
                f"dimension must lie in [{MIN_DIM}, {MAX_DIM}], got {self.dim}"
            )
        if not (-1.0 <= self.rho <= 1.0):
            raise ContractViolation("rho must lie in [-1, 1]")


def _theta_from_height(h: float) -> float:
    """Colatitude of a cap of height h, stable for h near 0."""
    return 2.0 * asin(sqrt(0.5 * min(max(h, 0.0), 2.0)))


def _colatitude_integral(theta: float, d: int) -> float:
    """Integral of sin^(d-2) over [0, theta], accurate relative to its size.

    Rescaling to the unit interval and factoring ``theta**(d-1)`` out keeps
    the adaptive rule working on an O(1) integrand, so shallow caps retain
    full relative precision.
    """
    if theta <= 0.0:
        return 0.0
    p = d - 2

    def integrand(s: float) -> float:
        return (s * np.sinc(theta * s / np.pi)) ** p

    return theta ** (d - 1) * adaptive_simpson(integrand, 0.0, 1.0, 1e-12)


@lru_cache(maxsize=None)
def _full_colatitude_integral(d: int) -> float:
    return _colatitude_integral(np.pi, d)


def _measure_from_height(h: float, d: int) -> float:
    return _colatitude_integral(_theta_from_height(h), d) / _full_colatitude_integral(d)


def boundary_cap_measure(cap: CapSpec) -> float:
    """Normalised boundary measure of the cap (sphere measure one)."""
    return _measure_from_height(1.0 - cap.rho, cap.dim)


def _cap_volume_from_height(h: float, d: int) -> float:
    """Volume of a cap of height ``h <= 1``: the slice integral
    ``kappa_{d-1} * integral of (1 - t^2)^((d-1)/2)`` over ``[1-h, 1]``,
    rescaled so shallow caps keep full relative precision."""
    if h <= 0.0:
        return 0.0
    p = 0.5 * (d - 1)

    def integrand(w: float) -> float:
        # substitution t = 1 - h s, then s = w^2, flattening the endpoint
        return 2.0 * w ** (d) * (2.0 - h * w * w) ** p

    body = adaptive_simpson(integrand, 0.0, 1.0, 1e-13)
    return kappa(d - 1) * h ** (p + 1.0) * body


def cap_volume(cap: CapSpec) -> float:
    """Volume of the solid cap ``{x in the unit ball : <x, e> >= rho}``."""
    d, rho = cap.dim, cap.rho
    if rho < 0.0:
        return kappa(d) - _cap_volume_from_height(1.0 + rho, d)
    return _cap_volume_from_height(1.0 - rho, d)


@lru_cache(maxsize=None)
def surface_body_radius(t: float, d: int) -> float:
    """Radius of the surface body of the unit ball at level ``t`` in [0, 1/2].

    Solves ``cap measure == t`` for the cap height by bisection; by symmetry
    the answer is ``cos(pi t)`` in dimension two and ``1 - 2 t`` in dimension
    three, which the quadrature reproduces to 1e-10.
    """
    if not (0.0 <= t <= 0.5):
        raise ContractViolation("the level t must lie in [0, 1/2]")
    if not (MIN_DIM <= d <= MAX_DIM):
        raise ContractViolation("dimension out of range")
    if t == 0.0:
        return 1.0
    lo, hi = 0.0, 1.0  # cap height; t <= 1/2 keeps the cosine non-negative
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if _measure_from_height(mid, d) < t:
            lo = mid
        else:
            hi = mid
    return 1.0 - 0.5 * (lo + hi)


def tau_threshold(n: int, c_alpha: float) -> float:
    """Containment level ``c_alpha * log(n) / n``, capped at 1/2."""
    if n < 2:
        raise ContractViolation("n must be at least 2")
    if not c_alpha > 0.0:
        raise ContractViolation("c_alpha must be positive")
    return min(c_alpha * log(n) / n, 0.5)


def contains_surface_body(p: Polytope, t: float) -> bool:
    """Whether the polytope contains the surface body of the unit ball.

    The polytope is assumed inscribed in the unit sphere.  Containment holds
    iff the origin is inside and every facet plane lies at distance at least
    ``surface_body_radius(t)`` from it; exact ties count as contained.
    """
    if not (0.0 <= t <= 0.5):
        raise ContractViolation("the level t must lie in [0, 1/2]")
    radius = surface_body_radius(t, p.dim)
    min_offset = float(p._offsets.min())
    if min_offset <= 0.0:  # origin outside or on the boundary
        return False
    return min_offset >= radius - _EQUALITY_SLACK


def _solve_height_for_volume(eps: float, d: int) -> float:
    lo, hi = 0.0, 1.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if _cap_volume_from_height(mid, d) < eps:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _solve_height_for_measure(eps: float, d: int) -> float:
    lo, hi = 0.0, 1.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if _measure_from_height(mid, d) < eps:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def cap_exponent_check(
    d: int, eps_grid, direction: str = VOLUME_TO_BOUNDARY
) -> FitResult:
    """Power-law fit relating small cap volumes and cap boundary measures.

    ``volume-to-boundary`` feeds cap volumes ``eps`` and fits the boundary
    measure, whose exponent tends to ``(d-1)/(d+1)``; the reverse direction
    fits volume against boundary measure with limiting exponent
    ``(d+1)/(d-1)``.
    """
    if not (MIN_DIM <= d <= MAX_DIM):
        raise ContractViolation("dimension out of range")
    eps = [float(e) for e in eps_grid]
    if any(not 0.0 < e <= 1e-2 for e in eps):
        raise ContractViolation("cap sizes must lie in (0, 1e-2]")
    if direction == VOLUME_TO_BOUNDARY:
        pairs = [
            (e, _measure_from_height(_solve_height_for_volume(e, d), d))
            for e in eps
        ]
    elif direction == BOUNDARY_TO_VOLUME:
        pairs = [
            (e, _cap_volume_from_height(_solve_height_for_measure(e, d), d))
            for e in eps
        ]
    else:
        raise ContractViolation(f"unknown direction: {direction!r}")
    return fit_power_law(pairs)


def cap_exponent_target(d: int, direction: str) -> float:
    """The limiting exponent for ``cap_exponent_check`` in each direction."""
    if direction == VOLUME_TO_BOUNDARY:
        return (d - 1) / (d + 1)
    if direction == BOUNDARY_TO_VOLUME:
        return (d + 1) / (d - 1)
    raise ContractViolation(f"unknown direction: {direction!r}")
