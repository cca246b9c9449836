"""Statistical primitives: log-log power-law fits, the Kolmogorov distance
to the standard normal, and supporting moment helpers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ContractViolation

_SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class FitResult:
    """Ordinary least squares fit of ``log y`` against ``log x``.

    ``points`` keeps the fitted ``(log x, log y)`` pairs so callers can plot
    or re-check the fit.
    """

    slope: float
    intercept: float
    slope_stderr: float
    r_squared: float
    points: tuple[tuple[float, float], ...]


def fit_power_law(pairs) -> FitResult:
    """Fit ``y = C * x**slope`` through at least three positive points."""
    data = [(float(x), float(y)) for x, y in pairs]
    if len(data) < 3:
        raise ContractViolation("a power-law fit needs at least three points")
    if any(x <= 0.0 or y <= 0.0 for x, y in data):
        raise ContractViolation("power-law fits require positive coordinates")
    lx = np.log([x for x, _ in data])
    ly = np.log([y for _, y in data])
    m = lx.size
    mx, my = lx.mean(), ly.mean()
    sxx = float(((lx - mx) ** 2).sum())
    if sxx <= 0.0:
        raise ContractViolation("abscissae must not all coincide")
    slope = float(((lx - mx) * (ly - my)).sum() / sxx)
    intercept = my - slope * mx
    resid = ly - (intercept + slope * lx)
    sse = float((resid**2).sum())
    sst = float(((ly - my) ** 2).sum())
    r_squared = 1.0 if sst <= 0.0 else min(1.0, max(0.0, 1.0 - sse / sst))
    slope_stderr = math.sqrt(max(sse, 0.0) / (m - 2) / sxx)
    points = tuple((float(a), float(b)) for a, b in zip(lx, ly))
    return FitResult(slope, float(intercept), slope_stderr, r_squared, points)


def normal_cdf(x: float) -> float:
    """Standard normal distribution function.

    Built on ``math.erfc`` for full double accuracy in both tails; the
    negative branch is computed directly from the tail so that the
    reflection ``normal_cdf(-x) = 1 - normal_cdf(x)`` holds to within one
    rounding of the complement.
    """
    x = float(x)
    if math.isnan(x):
        raise ContractViolation("normal_cdf requires a real argument")
    tail = 0.5 * math.erfc(abs(x) / _SQRT2)
    return tail if x < 0.0 else 1.0 - tail


def kolmogorov_distance(samples, cdf=normal_cdf) -> float:
    """Sup-distance between the empirical law of ``samples`` and ``cdf``.

    Evaluates ``max_i max(i/m - F(x_(i)), F(x_(i)) - (i-1)/m)`` over the
    sorted sample, which equals the exact supremum for a continuous ``F``.
    """
    xs = np.sort(np.asarray(list(samples), dtype=float))
    m = xs.size
    if m == 0:
        raise ContractViolation("kolmogorov distance needs at least one sample")
    if not np.all(np.isfinite(xs)):
        raise ContractViolation("samples must be finite")
    f = np.array([cdf(x) for x in xs])
    upper = (np.arange(1, m + 1) / m) - f
    lower = f - (np.arange(m) / m)
    return float(np.maximum(upper, lower).max())


def standardize(values: np.ndarray) -> np.ndarray:
    """Centre and scale by the sample mean and standard deviation (ddof=1)."""
    values = np.asarray(values, dtype=float)
    if values.size < 2:
        raise ContractViolation("standardisation needs at least two values")
    sd = float(values.std(ddof=1))
    if sd <= 0.0:
        raise ContractViolation("sample variance is zero")
    return (values - values.mean()) / sd


def sample_skewness(values: np.ndarray) -> float:
    """Moment skewness m3 / m2^(3/2) of the sample."""
    values = np.asarray(values, dtype=float)
    centred = values - values.mean()
    m2 = float((centred**2).mean())
    if m2 <= 0.0:
        raise ContractViolation("sample variance is zero")
    return float((centred**3).mean() / m2**1.5)


def variance_with_jackknife(values: np.ndarray) -> tuple[float, float]:
    """Sample variance (ddof=1) and its delete-one jackknife standard error."""
    values = np.asarray(values, dtype=float)
    r = values.size
    if r < 3:
        raise ContractViolation("jackknife needs at least three values")
    s1 = float(values.sum())
    s2 = float((values**2).sum())
    var = float(values.var(ddof=1))
    loo_mean = (s1 - values) / (r - 1)
    loo_var = (s2 - values**2 - (r - 1) * loo_mean**2) / (r - 2)
    stderr = math.sqrt((r - 1) / r * float(((loo_var - loo_var.mean()) ** 2).sum()))
    return var, stderr
