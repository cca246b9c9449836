"""Built-in pass/fail thresholds for each experiment kind.

These encode the package's headline claims -- variance and deficit scaling
exponents, normal-approximation quality, containment reliability, cap
relations, and angle concentration -- with fixed tolerances.  The CLI's
``--check`` flag and the service responses evaluate them on a finished
report.
"""

from __future__ import annotations

from ..caps import BOUNDARY_TO_VOLUME, VOLUME_TO_BOUNDARY, cap_exponent_target
from .config import ExperimentKind, ExperimentReport

VARIANCE_SLOPE_TOL = 0.35
DEFICIT_SLOPE_TOL = 0.15
CLT_THRESHOLDS = {2: 0.05, 3: 0.06}
CLT_DEFAULT_THRESHOLD = 0.08
CONTAINMENT_MAX_FAILURE = 0.01
CAP_SLOPE_TOL = 0.02
GRASSMANN_SLOPE_TOL = 0.15
EFRON_STEIN_SLOPE_TOL = 0.4
EFRON_STEIN_MIN_RATIO = 0.8


def variance_slope_target(d: int) -> float:
    return -(d + 3) / (d - 1)


def deficit_slope_target(d: int) -> float:
    return -2.0 / (d - 1)


def evaluate_checks(report: ExperimentReport) -> dict:
    """Threshold verdicts for a report: ``{"passed": bool, "criteria": [...]}``."""
    criteria: list[dict] = []
    kind = report.kind
    d = report.config.get("body", {}).get("dim") or report.config.get("d")
    if kind is ExperimentKind.VARIANCE:
        target = variance_slope_target(d)
        for label, fit in sorted(report.fits.items()):
            criteria.append(
                _slope_criterion(
                    f"variance slope {label}", fit.slope, target, VARIANCE_SLOPE_TOL
                )
            )
        if not report.fits:
            criteria.append(_missing("variance slope"))
    elif kind is ExperimentKind.MEAN_DEFICIT:
        target = deficit_slope_target(d)
        for label, fit in sorted(report.fits.items()):
            criteria.append(
                _slope_criterion(
                    f"deficit slope {label}", fit.slope, target, DEFICIT_SLOPE_TOL
                )
            )
        if not report.fits:
            criteria.append(_missing("deficit slope"))
    elif kind is ExperimentKind.CLT:
        threshold = CLT_THRESHOLDS.get(d, CLT_DEFAULT_THRESHOLD)
        for label, result in sorted((report.clt or {}).items()):
            n, d_k, _ = result.per_n[-1]
            criteria.append(
                {
                    "name": f"kolmogorov distance {label} at n={n}",
                    "actual": d_k,
                    "threshold": threshold,
                    "passed": d_k < threshold,
                }
            )
        if not report.clt:
            criteria.append(_missing("kolmogorov distance"))
    elif kind is ExperimentKind.CONTAINMENT:
        row = report.per_n[-1]
        criteria.append(
            {
                "name": f"containment failure fraction at n={row['n']}",
                "actual": row["failure_fraction"],
                "threshold": CONTAINMENT_MAX_FAILURE,
                "passed": row["failure_fraction"] <= CONTAINMENT_MAX_FAILURE,
            }
        )
    elif kind is ExperimentKind.EFRON_STEIN:
        target = variance_slope_target(d)
        for label, fit in sorted(report.fits.items()):
            criteria.append(
                _slope_criterion(
                    f"diagnostic slope {label}",
                    fit.slope,
                    target,
                    EFRON_STEIN_SLOPE_TOL,
                )
            )
        worst = min((r["ratio"] for r in report.ratios or []), default=None)
        criteria.append(
            {
                "name": "min J/Var ratio",
                "actual": worst,
                "threshold": EFRON_STEIN_MIN_RATIO,
                "passed": worst is not None and worst >= EFRON_STEIN_MIN_RATIO,
            }
        )
    elif kind is ExperimentKind.GRASSMANN:
        ell = report.config["ell"]
        fit = report.fits.get("angle")
        if fit is None:
            criteria.append(_missing("angle slope"))
        else:
            criteria.append(
                _slope_criterion(
                    "angle slope", fit.slope, float(d - ell), GRASSMANN_SLOPE_TOL
                )
            )
    elif kind is ExperimentKind.CAPS:
        for direction in (VOLUME_TO_BOUNDARY, BOUNDARY_TO_VOLUME):
            fit = report.fits.get(direction)
            if fit is None:
                criteria.append(_missing(f"cap slope {direction}"))
                continue
            criteria.append(
                _slope_criterion(
                    f"cap slope {direction}",
                    fit.slope,
                    cap_exponent_target(d, direction),
                    CAP_SLOPE_TOL,
                )
            )
    return {"passed": all(c["passed"] for c in criteria), "criteria": criteria}


def _slope_criterion(name: str, actual: float, target: float, tol: float) -> dict:
    return {
        "name": name,
        "actual": actual,
        "target": target,
        "tolerance": tol,
        "passed": abs(actual - target) <= tol,
    }


def _missing(name: str) -> dict:
    return {"name": name, "actual": None, "passed": False}
