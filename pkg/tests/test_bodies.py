"""Convex-body support functions, boundary samplers, and reference volumes.

Numeric targets come from closed forms (ball intrinsic volumes, spheroid
surface area) or from scipy quadrature evaluated inside the test, so every
comparison is against an independently computed value.
"""

from __future__ import annotations

import math

import numpy as np
import pytest
from scipy import integrate, special

from polylab.bodies import (
    ConvexBody,
    kappa,
    reference_intrinsic_volume,
    sample_boundary,
    sample_boundary_batch,
    sample_sphere,
    sample_sphere_batch,
    support_function,
)
from polylab.errors import ContractViolation, UnsupportedReferenceError
from polylab.rng import scratch_stream


# ---------------------------------------------------------------------------
# body construction


def test_ball_factory_and_radius():
    b = ConvexBody.ball(2.0, dim=3)
    assert b.is_ball
    assert b.radius == 2.0
    assert b.semiaxes == (2.0, 2.0, 2.0)
    assert b.label() == "ball(2)"


def test_ellipsoid_factory_collapses_to_ball_on_equal_axes():
    assert ConvexBody.ellipsoid((1.5, 1.5)).is_ball
    e = ConvexBody.ellipsoid((1.0, 2.0))
    assert not e.is_ball
    assert e.label() == "ellipsoid(1;2)"


def test_body_validation():
    with pytest.raises(ContractViolation):
        ConvexBody("torus", 3, (1.0, 1.0, 1.0))
    with pytest.raises(ContractViolation):
        ConvexBody.ball(1.0, dim=1)
    with pytest.raises(ContractViolation):
        ConvexBody.ball(1.0, dim=7)
    with pytest.raises(ContractViolation):
        ConvexBody.ellipsoid((1.0, -2.0))
    with pytest.raises(ContractViolation):
        ConvexBody.ellipsoid((1.0, math.inf))
    with pytest.raises(ContractViolation):
        ConvexBody("ball", 2, (1.0, 2.0))
    with pytest.raises(ContractViolation):
        ConvexBody("ball", 3, (1.0, 1.0))


# ---------------------------------------------------------------------------
# support function


def test_support_function_examples():
    assert support_function(ConvexBody.ball(1.0, dim=3), np.array([1.0, 0, 0])) == 1.0
    e = ConvexBody.ellipsoid((1.0, 2.0))
    assert support_function(e, np.array([0.0, 1.0])) == pytest.approx(2.0, abs=1e-15)
    u = np.array([1.0, 1.0]) / math.sqrt(2.0)
    assert support_function(e, u) == pytest.approx(math.sqrt(2.5), abs=1e-12)


def test_support_function_rejects_non_unit_direction():
    with pytest.raises(ContractViolation):
        support_function(ConvexBody.ball(1.0, dim=2), np.array([1.0, 1.0]))


def test_ball_width_is_diameter_in_every_direction():
    body = ConvexBody.ball(1.5, dim=4)
    rng = scratch_stream(7)
    for _ in range(20):
        u = sample_sphere(4, rng)
        width = support_function(body, u) + support_function(body, -u)
        assert width == pytest.approx(3.0, abs=1e-12)


def test_ellipsoid_width_is_twice_support():
    e = ConvexBody.ellipsoid((1.0, 2.0, 3.0))
    rng = scratch_stream(8)
    for _ in range(20):
        u = sample_sphere(3, rng)
        h = support_function(e, u)
        assert support_function(e, -u) == pytest.approx(h, abs=1e-12)


# ---------------------------------------------------------------------------
# kappa


def test_kappa_small_dimensions():
    assert kappa(0) == 1.0
    assert kappa(1) == 2.0
    assert kappa(2) == pytest.approx(math.pi, abs=1e-15)
    assert kappa(3) == pytest.approx(4.0 * math.pi / 3.0, abs=1e-15)
    assert kappa(4) == pytest.approx(math.pi**2 / 2.0, abs=1e-15)


def test_kappa_matches_gamma_formula():
    for d in range(11):
        expected = math.pi ** (d / 2.0) / math.gamma(1.0 + d / 2.0)
        assert kappa(d) == pytest.approx(expected, rel=1e-14)


def test_kappa_rejects_negative_dimension():
    with pytest.raises(ContractViolation):
        kappa(-1)


# ---------------------------------------------------------------------------
# sphere sampling


def test_sample_sphere_unit_norm():
    for d in range(2, 7):
        rng = scratch_stream(100 + d)
        for _ in range(50):
            x = sample_sphere(d, rng)
            assert x.shape == (d,)
            assert abs(np.linalg.norm(x) - 1.0) < 1e-12


def test_sample_sphere_batch_unit_norm_and_determinism():
    a = sample_sphere_batch(3, 1000, scratch_stream(5))
    b = sample_sphere_batch(3, 1000, scratch_stream(5))
    np.testing.assert_array_equal(a, b)
    np.testing.assert_allclose(np.linalg.norm(a, axis=1), 1.0, atol=1e-12)


def test_sample_sphere_isotropy():
    m = 100_000
    x = sample_sphere_batch(3, m, scratch_stream(11))
    # Coordinate means vanish by symmetry; each coordinate has variance 1/3.
    assert np.all(np.abs(x.mean(axis=0)) < 3.0 / math.sqrt(3 * m))
    sq = x[:, 0] ** 2
    stderr = sq.std(ddof=1) / math.sqrt(m)
    assert abs(sq.mean() - 1.0 / 3.0) < 3.0 * stderr


# ---------------------------------------------------------------------------
# boundary sampling


def test_ball_boundary_norm():
    rng = scratch_stream(21)
    body = ConvexBody.ball(1.0, dim=2)
    for _ in range(50):
        x = sample_boundary(body, rng)
        assert abs(np.linalg.norm(x) - 1.0) < 1e-12
    scaled = ConvexBody.ball(2.5, dim=3)
    pts = sample_boundary_batch(scaled, 500, scratch_stream(22))
    np.testing.assert_allclose(np.linalg.norm(pts, axis=1), 2.5, atol=1e-11)


def test_ellipsoid_boundary_membership():
    axes = (1.0, 2.0, 0.5)
    body = ConvexBody.ellipsoid(axes)
    pts = sample_boundary_batch(body, 2000, scratch_stream(23))
    residual = np.abs((pts / np.array(axes)) ** 2 @ np.ones(3) - 1.0)
    assert residual.max() < 1e-10


def test_ellipsoid_boundary_determinism():
    body = ConvexBody.ellipsoid((1.0, 2.0))
    a = sample_boundary_batch(body, 100, scratch_stream(24))
    b = sample_boundary_batch(body, 100, scratch_stream(24))
    np.testing.assert_array_equal(a, b)


def test_ellipse_boundary_upper_half_fraction():
    m = 100_000
    pts = sample_boundary_batch(ConvexBody.ellipsoid((1.0, 2.0)), m, scratch_stream(25))
    frac = float(np.mean(pts[:, 1] > 0.0))
    assert abs(frac - 0.5) < 3.0 * math.sqrt(0.25 / m)


def _ellipse_arc_fraction(t_lo: float, t_hi: float) -> float:
    # Arc-length measure of the parameter arc [t_lo, t_hi] of
    # (cos t, 2 sin t), normalized by the full perimeter.
    speed = lambda t: math.sqrt(math.sin(t) ** 2 + 4.0 * math.cos(t) ** 2)
    part, _ = integrate.quad(speed, t_lo, t_hi, epsabs=1e-10, epsrel=1e-12)
    total, _ = integrate.quad(speed, 0.0, 2.0 * math.pi, epsabs=1e-10, epsrel=1e-12)
    return part / total


def test_ellipse_boundary_matches_arc_length_measure():
    m = 100_000
    pts = sample_boundary_batch(ConvexBody.ellipsoid((1.0, 2.0)), m, scratch_stream(26))
    t = np.mod(np.arctan2(pts[:, 1] / 2.0, pts[:, 0]), 2.0 * math.pi)
    for t_hi in (math.pi / 2.0, math.pi / 4.0):
        target = _ellipse_arc_fraction(0.0, t_hi)
        frac = float(np.mean(t <= t_hi))
        stderr = math.sqrt(target * (1.0 - target) / m)
        assert abs(frac - target) < 3.0 * stderr, (t_hi, frac, target)


def test_ellipse_quadrant_fraction_is_one_quarter():
    # Reflection symmetry forces each quadrant arc to carry 1/4 of the
    # perimeter; the quadrature oracle must agree.
    assert _ellipse_arc_fraction(0.0, math.pi / 2.0) == pytest.approx(0.25, abs=1e-9)


# ---------------------------------------------------------------------------
# reference intrinsic volumes


def test_ball_reference_values_d3():
    b = ConvexBody.ball(1.0, dim=3)
    assert reference_intrinsic_volume(b, 1) == pytest.approx(4.0, rel=1e-12)
    assert reference_intrinsic_volume(b, 2) == pytest.approx(2.0 * math.pi, rel=1e-12)
    assert reference_intrinsic_volume(b, 3) == pytest.approx(4.0 * math.pi / 3.0, rel=1e-12)


def test_ball_reference_values_d2():
    b = ConvexBody.ball(1.0, dim=2)
    assert reference_intrinsic_volume(b, 1) == pytest.approx(math.pi, rel=1e-12)
    assert reference_intrinsic_volume(b, 2) == pytest.approx(math.pi, rel=1e-12)


def test_ball_reference_matches_binomial_kappa_formula():
    for d in range(2, 7):
        b = ConvexBody.ball(1.0, dim=d)
        for ell in range(1, d + 1):
            expected = math.comb(d, ell) * kappa(d) / kappa(d - ell)
            assert reference_intrinsic_volume(b, ell) == pytest.approx(expected, rel=1e-12)


def test_ball_reference_homogeneity():
    for r in (0.5, 1.0, 2.0):
        for d in (2, 3, 4):
            base = ConvexBody.ball(1.0, dim=d)
            scaled = ConvexBody.ball(r, dim=d)
            for ell in range(1, d + 1):
                assert reference_intrinsic_volume(scaled, ell) == pytest.approx(
                    reference_intrinsic_volume(base, ell) * r**ell, rel=1e-12
                )


def test_ellipse_reference_area_and_half_perimeter():
    e = ConvexBody.ellipsoid((1.0, 2.0))
    assert reference_intrinsic_volume(e, 2) == pytest.approx(2.0 * math.pi, rel=1e-12)
    # Perimeter of the ellipse with semi-axes 1 and 2 via the complete
    # elliptic integral: 4 * 2 * E(1 - (1/2)^2).
    half_perimeter = 4.0 * special.ellipe(0.75)
    assert half_perimeter == pytest.approx(4.844224110273838, abs=1e-12)
    assert reference_intrinsic_volume(e, 1) == pytest.approx(half_perimeter, rel=1e-8)


def test_spheroid_reference_half_surface_area():
    # Prolate spheroid semi-axes (1, 1, 2): closed-form surface area
    # 2*pi*(1 + (c/e)*asin(e)) with e = sqrt(1 - 1/c^2), c = 2.
    e = math.sqrt(1.0 - 0.25)
    area = 2.0 * math.pi * (1.0 + (2.0 / e) * math.asin(e))
    body = ConvexBody.ellipsoid((1.0, 1.0, 2.0))
    assert reference_intrinsic_volume(body, 2) == pytest.approx(area / 2.0, rel=1e-8)
    assert reference_intrinsic_volume(body, 3) == pytest.approx(
        kappa(3) * 2.0, rel=1e-12
    )


def test_triaxial_ellipsoid_volume_and_half_surface():
    body = ConvexBody.ellipsoid((1.0, 2.0, 3.0))
    assert reference_intrinsic_volume(body, 3) == pytest.approx(kappa(3) * 6.0, rel=1e-12)
    # Independent oracle: Legendre form of the ellipsoid surface area via
    # scipy's incomplete elliptic integrals, axes c > b > a.
    c, b, a = 3.0, 2.0, 1.0
    phi = math.acos(a / c)
    k2 = (c**2 * (b**2 - a**2)) / (b**2 * (c**2 - a**2))
    F = special.ellipkinc(phi, k2)
    E = special.ellipeinc(phi, k2)
    area = 2.0 * math.pi * a**2 + (2.0 * math.pi * b * c / math.sin(phi)) * (
        E * math.sin(phi) ** 2 + F * math.cos(phi) ** 2
    )
    assert reference_intrinsic_volume(body, 2) == pytest.approx(area / 2.0, rel=1e-8)


def test_unsupported_reference_combinations():
    with pytest.raises(UnsupportedReferenceError):
        reference_intrinsic_volume(ConvexBody.ellipsoid((1.0, 2.0, 3.0)), 1)
    with pytest.raises(UnsupportedReferenceError):
        reference_intrinsic_volume(ConvexBody.ellipsoid((1.0, 2.0, 3.0, 4.0)), 2)


def test_reference_ell_out_of_range():
    b = ConvexBody.ball(1.0, dim=3)
    with pytest.raises(ContractViolation):
        reference_intrinsic_volume(b, 0)
    with pytest.raises(ContractViolation):
        reference_intrinsic_volume(b, 4)
