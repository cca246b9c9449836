"""Smooth convex bodies: support functions, uniform boundary sampling, and
exact reference intrinsic volumes.

Bodies are origin-centred balls and axis-aligned ellipsoids in dimension two
through six.  Points and directions are plain float64 numpy arrays of shape
``(dim,)``.  Boundary sampling is uniform with respect to surface measure, so
that after dividing by the total surface area the boundary carries a
probability measure -- the normalisation every experiment in this package
relies on.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb, isfinite

import numpy as np

from .errors import ContractViolation, UnsupportedReferenceError
from .rng import RngStream

MIN_DIM = 2
MAX_DIM = 6

_UNIT_TOL = 1e-10

BALL = "ball"
ELLIPSOID = "ellipsoid"


@dataclass(frozen=True)
class ConvexBody:
    """An origin-centred ball or axis-aligned ellipsoid.

    ``semiaxes`` has one strictly positive entry per coordinate axis; a ball
    is the special case with all entries equal.
    """

    kind: str
    dim: int
    semiaxes: tuple[float, ...]

    def __post_init__(self) -> None:
        if self.kind not in (BALL, ELLIPSOID):
            raise ContractViolation(f"unknown body kind: {self.kind!r}")
        if not (MIN_DIM <= self.dim <= MAX_DIM):
            raise ContractViolation(
                f"dimension must lie in [{MIN_DIM}, {MAX_DIM}], got {self.dim}"
            )
        if len(self.semiaxes) != self.dim:
            raise ContractViolation("one semiaxis per coordinate is required")
        if not all(isfinite(a) and a > 0.0 for a in self.semiaxes):
            raise ContractViolation("semiaxes must be finite and positive")
        if self.kind == BALL and len(set(self.semiaxes)) != 1:
            raise ContractViolation("a ball requires equal semiaxes")

    @classmethod
    def ball(cls, radius: float = 1.0, dim: int = 3) -> "ConvexBody":
        return cls(BALL, dim, (float(radius),) * dim)

    @classmethod
    def ellipsoid(cls, semiaxes) -> "ConvexBody":
        axes = tuple(float(a) for a in semiaxes)
        kind = BALL if len(set(axes)) == 1 else ELLIPSOID
        return cls(kind, len(axes), axes)

    @property
    def radius(self) -> float:
        if self.kind != BALL:
            raise ContractViolation("radius is defined for balls only")
        return self.semiaxes[0]

    @property
    def is_ball(self) -> bool:
        return self.kind == BALL

    def label(self) -> str:
        """Compact CSV-safe identifier, e.g. ``ball(1)`` or ``ellipsoid(1;2)``."""
        axes = ";".join(format(a, ".17g") for a in self.semiaxes)
        if self.is_ball:
            return f"ball({format(self.radius, '.17g')})"
        return f"ellipsoid({axes})"


def kappa(d: int) -> float:
    """Volume of the d-dimensional unit ball, via the half-integer recurrence.

    kappa(0) = 1, kappa(1) = 2, kappa(d) = 2 pi / d * kappa(d - 2).
    """
    if d < 0:
        raise ContractViolation("dimension must be non-negative")
    if d == 0:
        return 1.0
    if d == 1:
        return 2.0
    return 2.0 * np.pi / d * kappa(d - 2)


def _check_unit(u: np.ndarray, dim: int) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    if u.shape != (dim,):
        raise ContractViolation(f"direction must have shape ({dim},)")
    if abs(float(np.linalg.norm(u)) - 1.0) > _UNIT_TOL:
        raise ContractViolation("direction must be a unit vector")
    return u


def support_function(body: ConvexBody, u: np.ndarray) -> float:
    """Support value h(u) = max over the body of <x, u>, for unit u."""
    u = _check_unit(u, body.dim)
    a = np.asarray(body.semiaxes)
    return float(np.sqrt(np.sum((a * u) ** 2)))


def sample_sphere(dim: int, rng: RngStream) -> np.ndarray:
    """One point, uniform on the unit sphere of the given dimension."""
    return sample_sphere_batch(dim, 1, rng)[0]


def sample_sphere_batch(dim: int, count: int, rng: RngStream) -> np.ndarray:
    """``count`` i.i.d. uniform points on the unit sphere, shape (count, dim)."""
    if not (MIN_DIM <= dim <= MAX_DIM):
        raise ContractViolation(
            f"dimension must lie in [{MIN_DIM}, {MAX_DIM}], got {dim}"
        )
    if count < 0:
        raise ContractViolation("count must be non-negative")
    out = rng.standard_normal((count, dim))
    norms = np.linalg.norm(out, axis=1)
    # A zero Gaussian vector has probability zero; redraw defensively so the
    # normalisation below can never divide by ~0.
    while True:
        bad = np.flatnonzero(norms < 1e-12)
        if bad.size == 0:
            break
        out[bad] = rng.standard_normal((bad.size, dim))
        norms[bad] = np.linalg.norm(out[bad], axis=1)
    return out / norms[:, None]


def sample_boundary(body: ConvexBody, rng: RngStream) -> np.ndarray:
    """One point, uniform w.r.t. surface measure on the boundary of ``body``."""
    return sample_boundary_batch(body, 1, rng)[0]


def sample_boundary_batch(
    body: ConvexBody, count: int, rng: RngStream
) -> np.ndarray:
    """``count`` i.i.d. uniform boundary points, shape (count, dim).

    Balls rescale sphere samples.  Ellipsoids use rejection: a sphere sample
    ``u`` maps to the candidate ``x_i = a_i u_i`` and is accepted with
    probability ``a_min * ||(u_1/a_1, ..., u_d/a_d)||`` (always <= 1), which
    weights candidates by the surface-area distortion of the map.
    """
    if count < 0:
        raise ContractViolation("count must be non-negative")
    if body.is_ball:
        return body.radius * sample_sphere_batch(body.dim, count, rng)
    axes = np.asarray(body.semiaxes)
    a_min = float(axes.min())
    out = np.empty((count, body.dim))
    filled = 0
    while filled < count:
        want = count - filled
        u = sample_sphere_batch(body.dim, want, rng)
        accept_prob = a_min * np.linalg.norm(u / axes, axis=1)
        keep = rng.uniform(want) < accept_prob
        got = int(keep.sum())
        out[filled : filled + got] = u[keep] * axes
        filled += got
    return out


def reference_intrinsic_volume(body: ConvexBody, ell: int) -> float:
    """Exact intrinsic volume V_ell of the body.

    Balls have the closed form ``C(d, ell) * kappa_d / kappa_{d-ell} * r**ell``.
    Ellipsoids support ``ell = d`` (kappa_d times the semiaxis product) and
    ``ell = d - 1`` (half the surface area, by quadrature to 1e-8 relative
    accuracy); every other ellipsoid pair raises ``UnsupportedReferenceError``.
    """
    d = body.dim
    if not (1 <= ell <= d):
        raise ContractViolation(f"ell must lie in [1, {d}], got {ell}")
    if body.is_ball:
        r = body.radius
        return comb(d, ell) * kappa(d) / kappa(d - ell) * r**ell
    if ell == d:
        return kappa(d) * float(np.prod(body.semiaxes))
    if ell == d - 1:
        return 0.5 * ellipsoid_surface_area(body.semiaxes)
    raise UnsupportedReferenceError(
        f"no reference value for ellipsoid with dim={d}, ell={ell}"
    )


def ellipsoid_surface_area(semiaxes, rel_tol: float = 1e-8) -> float:
    """Surface area of an axis-aligned ellipsoid, dimensions 2 through 4.

    Parameterising the boundary as ``u -> A u`` over the unit sphere gives
    ``area = prod(a) * integral over the sphere of ||A^{-1} u||``.  The
    integral is evaluated on a spherical product grid (Gauss-Legendre in the
    colatitudes, trapezoid in the periodic angle), doubling the resolution
    until two successive estimates agree to ``rel_tol``.
    """
    axes = np.asarray([float(a) for a in semiaxes])
    if axes.ndim != 1 or not np.all(axes > 0.0):
        raise ContractViolation("semiaxes must be positive")
    d = axes.size
    if not (MIN_DIM <= d <= 4):
        raise UnsupportedReferenceError(
            f"ellipsoid surface quadrature supports dimensions 2-4, got {d}"
        )
    prev = None
    level = 16
    while level <= 1 << 12:
        cur = _sphere_mean_inv_norm(axes, level) * float(np.prod(axes))
        if prev is not None and abs(cur - prev) <= rel_tol * abs(cur):
            return cur
        prev = cur
        level *= 2
    return prev  # pragma: no cover - the doubling always converges for d <= 4


def _sphere_mean_inv_norm(axes: np.ndarray, level: int) -> float:
    """Unnormalised integral of ||diag(1/a) u|| over the unit sphere."""
    d = axes.size
    phi = np.linspace(0.0, 2.0 * np.pi, 2 * level, endpoint=False)
    w_phi = np.full(phi.size, 2.0 * np.pi / phi.size)
    if d == 2:
        u = np.stack([np.cos(phi), np.sin(phi)], axis=-1)
        vals = np.linalg.norm(u / axes, axis=-1)
        return float(np.sum(w_phi * vals))
    nodes, weights = np.polynomial.legendre.leggauss(level)
    theta = 0.5 * np.pi * (nodes + 1.0)
    w_theta = 0.5 * np.pi * weights
    if d == 3:
        st, ct = np.sin(theta), np.cos(theta)
        u = np.empty((level, phi.size, 3))
        u[..., 0] = st[:, None] * np.cos(phi)[None, :]
        u[..., 1] = st[:, None] * np.sin(phi)[None, :]
        u[..., 2] = ct[:, None]
        vals = np.linalg.norm(u / axes, axis=-1) * st[:, None]
        return float(np.einsum("i,j,ij->", w_theta, w_phi, vals))
    # d == 4: colatitudes theta1 (weight sin^2), theta2 (weight sin), then phi.
    s1, c1 = np.sin(theta), np.cos(theta)
    s2, c2 = s1, c1
    u = np.empty((level, level, phi.size, 4))
    u[..., 0] = s1[:, None, None] * s2[None, :, None] * np.cos(phi)[None, None, :]
    u[..., 1] = s1[:, None, None] * s2[None, :, None] * np.sin(phi)[None, None, :]
    u[..., 2] = s1[:, None, None] * c2[None, :, None]
    u[..., 3] = c1[:, None, None] * np.ones_like(phi)[None, None, :]
    vals = np.linalg.norm(u / axes, axis=-1)
    vals *= (s1**2)[:, None, None] * s2[None, :, None]
    return float(np.einsum("i,j,k,ijk->", w_theta, w_theta, w_phi, vals))
