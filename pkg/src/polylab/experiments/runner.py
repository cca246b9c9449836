"""Experiment runners.

Each replication derives its random stream from ``(master_seed, n,
replication)`` alone, so results do not depend on execution order.  With
``threads > 1`` replication chunks run in worker processes; outcomes are
written into arrays indexed by replication and reduced in fixed order, which
keeps every emitted number byte-identical across thread counts.

The mean-deficit experiment instead uses one stream per replication and
evaluates nested prefix hulls, so all sample sizes of a replication share
points (common random numbers); that removes most of the between-n noise
from the deficit curve.
"""

from __future__ import annotations

import logging
import time
from concurrent.futures import ProcessPoolExecutor
from math import ceil

import numpy as np

from ..bodies import ConvexBody, reference_intrinsic_volume, sample_boundary_batch
from ..caps import (
    BOUNDARY_TO_VOLUME,
    VOLUME_TO_BOUNDARY,
    cap_exponent_check,
    contains_surface_body,
    surface_body_radius,
    tau_threshold,
)
from ..errors import ConfigError, ContractViolation, DegeneracyError
from ..hull import Polytope, convex_hull
from ..measures import (
    ProjectionPanel,
    has_exact_path,
    intrinsic_volume,
)
from ..rng import RngStream, point_stream, prefix_stream, retry_stream, scratch_stream
from ..stats import (
    fit_power_law,
    kolmogorov_distance,
    sample_skewness,
    standardize,
    variance_with_jackknife,
)
from .config import (
    CltResult,
    ExperimentConfig,
    ExperimentKind,
    ExperimentReport,
    RunRecord,
    config_echo,
)

log = logging.getLogger(__name__)

VARIANCE_FLOOR = 1e-28


# ---------------------------------------------------------------------------
# per-replication building blocks


def _build_panels(cfg: ExperimentConfig) -> dict[int, ProjectionPanel | None]:
    """One shared panel per estimated order; exact orders need none."""
    panels: dict[int, ProjectionPanel | None] = {}
    for ell in cfg.ells:
        if has_exact_path(cfg.dim, ell):
            panels[ell] = None
        else:
            panels[ell] = ProjectionPanel.generate(
                cfg.dim, ell, cfg.panel_size, cfg.master_seed
            )
    return panels


def _hull_of(body: ConvexBody, count: int, rng: RngStream) -> tuple[Polytope, np.ndarray]:
    pts = sample_boundary_batch(body, count, rng)
    return convex_hull(pts, body.dim), pts


def _cell_values(cfg, panels, n: int, rep: int):
    """Values (and aux values) for one (n, replication) cell.

    A degenerate hull (probability zero) triggers exactly one resample from
    the perturbed retry stream; a second failure propagates.
    """
    kind = cfg.kind
    extra = 1 if kind is ExperimentKind.EFRON_STEIN else 0
    try:
        rng = point_stream(cfg.master_seed, n, rep)
        pts = sample_boundary_batch(cfg.body, n + extra, rng)
        hull_n = convex_hull(pts[:n], cfg.dim)
        hull_n1 = convex_hull(pts, cfg.dim) if extra else None
    except DegeneracyError:
        rng = retry_stream(cfg.master_seed, n, rep)
        pts = sample_boundary_batch(cfg.body, n + extra, rng)
        hull_n = convex_hull(pts[:n], cfg.dim)
        hull_n1 = convex_hull(pts, cfg.dim) if extra else None
    if kind is ExperimentKind.CONTAINMENT:
        level = tau_threshold(n, cfg.c_alpha)
        failed = not contains_surface_body(hull_n, level)
        return np.array([1.0 if failed else 0.0]), None
    values = np.array(
        [intrinsic_volume(hull_n, ell, panels[ell]) for ell in cfg.ells]
    )
    if hull_n1 is None:
        return values, None
    aux = np.array(
        [intrinsic_volume(hull_n1, ell, panels[ell]) for ell in cfg.ells]
    )
    return values, aux


def _deficit_rep_values(cfg, panels, rep: int) -> np.ndarray:
    """Prefix-hull values for one replication: shape (len(n_grid), len(ells))."""
    n_max = cfg.n_grid[-1]
    try:
        rng = prefix_stream(cfg.master_seed, rep)
        pts = sample_boundary_batch(cfg.body, n_max, rng)
        return _prefix_values(cfg, panels, pts)
    except DegeneracyError:
        rng = retry_stream(cfg.master_seed, 0, rep)
        pts = sample_boundary_batch(cfg.body, n_max, rng)
        return _prefix_values(cfg, panels, pts)


def _prefix_values(cfg, panels, pts: np.ndarray) -> np.ndarray:
    out = np.empty((len(cfg.n_grid), len(cfg.ells)))
    for i, n in enumerate(cfg.n_grid):
        hull_n = convex_hull(pts[:n], cfg.dim)
        out[i] = [intrinsic_volume(hull_n, ell, panels[ell]) for ell in cfg.ells]
    return out


def run_replication(cfg: ExperimentConfig, n: int, rep: int) -> list[RunRecord]:
    """All records of one (n, replication) cell, one per requested order."""
    if n not in cfg.n_grid:
        raise ConfigError(f"n={n} is not on the configured grid")
    if not (0 <= rep < cfg.replications):
        raise ConfigError(f"replication {rep} out of range")
    panels = _build_panels(cfg)
    if cfg.kind is ExperimentKind.MEAN_DEFICIT:
        row = _deficit_rep_values(cfg, panels, rep)[cfg.n_grid.index(n)]
        return [
            RunRecord(n, rep, ell, float(v)) for ell, v in zip(cfg.ells, row)
        ]
    values, aux = _cell_values(cfg, panels, n, rep)
    if cfg.kind is ExperimentKind.CONTAINMENT:
        return [RunRecord(n, rep, 0, float(values[0]))]
    if aux is None:
        return [
            RunRecord(n, rep, ell, float(v)) for ell, v in zip(cfg.ells, values)
        ]
    return [
        RunRecord(n, rep, ell, float(v), float(a))
        for ell, v, a in zip(cfg.ells, values, aux)
    ]


# ---------------------------------------------------------------------------
# parallel collection

_CHUNKS_PER_WORKER = 4


def _grid_chunk(args):
    cfg, n, lo, hi = args
    panels = _build_panels(cfg)
    width = 1 if cfg.kind is ExperimentKind.CONTAINMENT else len(cfg.ells)
    pair = cfg.kind is ExperimentKind.EFRON_STEIN
    out = np.empty((hi - lo, width, 2 if pair else 1))
    for rep in range(lo, hi):
        values, aux = _cell_values(cfg, panels, n, rep)
        out[rep - lo, :, 0] = values
        if pair:
            out[rep - lo, :, 1] = aux
    return out


def _deficit_chunk(args):
    cfg, lo, hi = args
    panels = _build_panels(cfg)
    out = np.empty((hi - lo, len(cfg.n_grid), len(cfg.ells)))
    for rep in range(lo, hi):
        out[rep - lo] = _deficit_rep_values(cfg, panels, rep)
    return out


def _chunk_ranges(total: int, threads: int) -> list[tuple[int, int]]:
    chunks = max(1, threads * _CHUNKS_PER_WORKER)
    size = ceil(total / chunks)
    return [(lo, min(lo + size, total)) for lo in range(0, total, size)]


def _run_tasks(worker, tasks: list, threads: int) -> list[np.ndarray]:
    if threads <= 1 or len(tasks) <= 1:
        return [worker(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(worker, tasks))


def _collect_grid(cfg: ExperimentConfig, threads: int) -> dict[int, np.ndarray]:
    """Per-n value arrays, shape (replications, width, 1 or 2)."""
    tasks = [
        (cfg, n, lo, hi)
        for n in cfg.n_grid
        for lo, hi in _chunk_ranges(cfg.replications, threads)
    ]
    results = _run_tasks(_grid_chunk, tasks, threads)
    out: dict[int, np.ndarray] = {}
    cursor = 0
    for n in cfg.n_grid:
        parts = []
        for _ in _chunk_ranges(cfg.replications, threads):
            parts.append(results[cursor])
            cursor += 1
        out[n] = np.concatenate(parts, axis=0)
    return out


def _collect_prefix(cfg: ExperimentConfig, threads: int) -> np.ndarray:
    """Prefix-hull values, shape (replications, len(n_grid), len(ells))."""
    tasks = [
        (cfg, lo, hi) for lo, hi in _chunk_ranges(cfg.replications, threads)
    ]
    results = _run_tasks(_deficit_chunk, tasks, threads)
    return np.concatenate(results, axis=0)


def _records_from_grid(cfg, per_n, pair: bool) -> list[RunRecord]:
    records = []
    ells = (0,) if cfg.kind is ExperimentKind.CONTAINMENT else cfg.ells
    for n in cfg.n_grid:
        block = per_n[n]
        for rep in range(cfg.replications):
            for j, ell in enumerate(ells):
                aux = float(block[rep, j, 1]) if pair else None
                records.append(
                    RunRecord(n, rep, ell, float(block[rep, j, 0]), aux)
                )
    return records


# ---------------------------------------------------------------------------
# experiments


def run_variance_experiment(
    cfg: ExperimentConfig, threads: int = 1
) -> ExperimentReport:
    """Per-n sample variances of V_ell with a log-log slope fit per order."""
    _expect_kind(cfg, ExperimentKind.VARIANCE)
    t0 = time.perf_counter()
    per_n = _collect_grid(cfg, threads)
    report = _new_report(cfg)
    report.records = _records_from_grid(cfg, per_n, pair=False)
    for j, ell in enumerate(cfg.ells):
        fit_points = []
        for n in cfg.n_grid:
            values = per_n[n][:, j, 0]
            var, jack = variance_with_jackknife(values)
            report.per_n.append(
                {
                    "n": n,
                    "ell": ell,
                    "variance": var,
                    "jackknife_stderr": jack,
                    "mean": float(values.mean()),
                }
            )
            if var < VARIANCE_FLOOR:
                msg = (
                    f"variance {var:.3e} at n={n}, ell={ell} is below the "
                    f"floor {VARIANCE_FLOOR:.0e}; dropped from the fit"
                )
                log.warning(msg)
                report.warnings.append(msg)
                continue
            fit_points.append((n, var))
        if len(fit_points) >= 3:
            report.fits[f"ell={ell}"] = fit_power_law(fit_points)
        else:
            report.warnings.append(
                f"fewer than three usable variances for ell={ell}; no fit"
            )
    report.elapsed_seconds = time.perf_counter() - t0
    return report


def run_mean_deficit_experiment(
    cfg: ExperimentConfig, threads: int = 1
) -> ExperimentReport:
    """Mean deficit against the reference V_ell, with slope and plateau."""
    _expect_kind(cfg, ExperimentKind.MEAN_DEFICIT)
    t0 = time.perf_counter()
    values = _collect_prefix(cfg, threads)
    report = _new_report(cfg)
    report.plateau = {}
    for rep in range(cfg.replications):
        for i, n in enumerate(cfg.n_grid):
            for j, ell in enumerate(cfg.ells):
                report.records.append(
                    RunRecord(n, rep, ell, float(values[rep, i, j]))
                )
    rate = 2.0 / (cfg.dim - 1)
    for j, ell in enumerate(cfg.ells):
        reference = reference_intrinsic_volume(cfg.body, ell)
        fit_points = []
        plateau_rows = []
        for i, n in enumerate(cfg.n_grid):
            sample = values[:, i, j]
            deficit = reference - float(sample.mean())
            stderr = float(sample.std(ddof=1)) / np.sqrt(cfg.replications)
            report.per_n.append(
                {
                    "n": n,
                    "ell": ell,
                    "mean": float(sample.mean()),
                    "deficit": deficit,
                    "stderr": stderr,
                    "reference": reference,
                }
            )
            if deficit <= 0.0:
                msg = (
                    f"non-positive deficit {deficit:.3e} at n={n}, ell={ell};"
                    " dropped from the fit"
                )
                log.warning(msg)
                report.warnings.append(msg)
                continue
            fit_points.append((n, deficit))
            plateau_rows.append((n, deficit * n**rate))
        if len(fit_points) >= 3:
            report.fits[f"ell={ell}"] = fit_power_law(fit_points)
        if len(plateau_rows) >= 2:
            (na, ca), (nb, cb) = plateau_rows[-2], plateau_rows[-1]
            consistent = abs(ca - cb) <= 0.1 * max(abs(ca), abs(cb))
            report.plateau[f"ell={ell}"] = {
                "rows": [{"n": n, "plateau": c} for n, c in plateau_rows],
                "last_two": [
                    {"n": na, "plateau": ca},
                    {"n": nb, "plateau": cb},
                ],
                "consistent": consistent,
            }
    report.elapsed_seconds = time.perf_counter() - t0
    return report


def run_clt_experiment(
    cfg: ExperimentConfig, threads: int = 1
) -> ExperimentReport:
    """Kolmogorov distance of sample-standardised V_ell to the normal law."""
    _expect_kind(cfg, ExperimentKind.CLT)
    t0 = time.perf_counter()
    per_n = _collect_grid(cfg, threads)
    report = _new_report(cfg)
    report.records = _records_from_grid(cfg, per_n, pair=False)
    report.clt = {}
    for j, ell in enumerate(cfg.ells):
        rows = []
        for n in cfg.n_grid:
            values = per_n[n][:, j, 0]
            w = standardize(values)
            d_k = kolmogorov_distance(w)
            skew = sample_skewness(values)
            rows.append((n, d_k, skew))
            report.per_n.append(
                {"n": n, "ell": ell, "kolmogorov": d_k, "skewness": skew}
            )
        report.clt[f"ell={ell}"] = CltResult(tuple(rows))
    report.elapsed_seconds = time.perf_counter() - t0
    return report


def run_containment_experiment(
    cfg: ExperimentConfig, threads: int = 1
) -> ExperimentReport:
    """Frequency with which hulls fail to contain the surface body."""
    _expect_kind(cfg, ExperimentKind.CONTAINMENT)
    t0 = time.perf_counter()
    per_n = _collect_grid(cfg, threads)
    report = _new_report(cfg)
    report.records = _records_from_grid(cfg, per_n, pair=False)
    for n in cfg.n_grid:
        flags = per_n[n][:, 0, 0]
        level = tau_threshold(n, cfg.c_alpha)
        report.per_n.append(
            {
                "n": n,
                "tau": level,
                "radius": surface_body_radius(level, cfg.dim),
                "failure_fraction": float(flags.mean()),
                "failures": int(flags.sum()),
            }
        )
    report.elapsed_seconds = time.perf_counter() - t0
    return report


def efron_stein_estimate(
    cfg: ExperimentConfig, threads: int = 1
) -> ExperimentReport:
    """One-extra-point diagnostic J(n) = n * E[(V(K_{n+1}) - V(K_n))^2].

    Each replication evaluates the functional on the hull of n points and on
    the hull of the same points plus one more drawn from the same stream, so
    the difference isolates the marginal effect of a single point.  J(n)
    bounds the variance from above; the report carries the per-n ratios
    J(n) / Var as well as a log-log fit of J.
    """
    _expect_kind(cfg, ExperimentKind.EFRON_STEIN)
    t0 = time.perf_counter()
    per_n = _collect_grid(cfg, threads)
    report = _new_report(cfg)
    report.records = _records_from_grid(cfg, per_n, pair=True)
    report.ratios = []
    for j, ell in enumerate(cfg.ells):
        fit_points = []
        for n in cfg.n_grid:
            block = per_n[n]
            values = block[:, j, 0]
            diffs = block[:, j, 1] - values
            j_value = n * float((diffs**2).mean())
            var = float(values.var(ddof=1))
            ratio = j_value / var if var > 0.0 else float("inf")
            report.ratios.append(
                {
                    "n": n,
                    "ell": ell,
                    "j_value": j_value,
                    "variance": var,
                    "ratio": ratio,
                }
            )
            report.per_n.append(
                {"n": n, "ell": ell, "j_value": j_value, "variance": var}
            )
            if j_value < VARIANCE_FLOOR:
                msg = (
                    f"J={j_value:.3e} at n={n}, ell={ell} is below the floor;"
                    " dropped from the fit"
                )
                log.warning(msg)
                report.warnings.append(msg)
                continue
            fit_points.append((n, j_value))
        if len(fit_points) >= 3:
            report.fits[f"ell={ell}"] = fit_power_law(fit_points)
    report.elapsed_seconds = time.perf_counter() - t0
    return report


def grassmann_angle_probabilities(
    d: int,
    ell: int,
    a_grid,
    samples: int,
    rng: RngStream,
    batch_size: int = 200_000,
) -> np.ndarray:
    """P(angle(e_1, L) <= a) for Haar-random ell-subspaces, per grid value.

    Subspaces are realised as the column spans of Gaussian matrices via a
    batched QR factorisation (span equality makes the QR sign convention
    irrelevant); the angle is arccos of the projection norm of ``e_1``.
    """
    if not (1 <= ell <= d):
        raise ContractViolation("subspace dimension out of range")
    if samples < 1:
        raise ContractViolation("samples must be positive")
    grid = np.asarray(sorted(float(a) for a in a_grid))
    if grid.size == 0 or grid[0] <= 0.0 or grid[-1] > np.pi / 2:
        raise ContractViolation("angles must lie in (0, pi/2]")
    counts = np.zeros(grid.size, dtype=np.int64)
    remaining = samples
    while remaining > 0:
        chunk = min(batch_size, remaining)
        g = rng.standard_normal((chunk, d, ell))
        q = np.linalg.qr(g)[0]
        proj = np.linalg.norm(q[:, 0, :], axis=1)
        angles = np.arccos(np.clip(proj, 0.0, 1.0))
        counts += (angles[:, None] <= grid[None, :]).sum(axis=0)
        remaining -= chunk
    return counts / samples


def run_grassmannian_experiment(
    d: int,
    ell: int,
    a_grid,
    samples: int,
    master_seed: int = 0,
    name: str = "grassmann",
) -> ExperimentReport:
    """Angle-concentration fit: log P(angle <= a) against log a."""
    t0 = time.perf_counter()
    rng = scratch_stream(master_seed, ell)
    grid = sorted(float(a) for a in a_grid)
    probs = grassmann_angle_probabilities(d, ell, grid, samples, rng)
    report = ExperimentReport(
        name=name,
        kind=ExperimentKind.GRASSMANN,
        config={
            "kind": ExperimentKind.GRASSMANN.value,
            "name": name,
            "d": d,
            "ell": ell,
            "a_grid": list(grid),
            "samples": samples,
            "master_seed": master_seed,
        },
        records=[],
        per_n=[],
    )
    fit_points = []
    for idx, (a, p) in enumerate(zip(grid, probs)):
        report.records.append(RunRecord(samples, idx, ell, float(p), float(a)))
        report.per_n.append({"a": a, "probability": float(p), "ell": ell})
        if p > 0.0:
            fit_points.append((a, p))
        else:
            msg = f"no hits at angle {a:.3e}; dropped from the fit"
            log.warning(msg)
            report.warnings.append(msg)
    if len(fit_points) >= 3:
        report.fits["angle"] = fit_power_law(fit_points)
    else:
        report.warnings.append("fewer than three positive probabilities; no fit")
    report.elapsed_seconds = time.perf_counter() - t0
    return report


def run_caps_experiment(
    d: int, eps_grid, name: str = "caps"
) -> ExperimentReport:
    """Both cap-relation fits (volume vs boundary measure) for one dimension."""
    t0 = time.perf_counter()
    grid = sorted(float(e) for e in eps_grid)
    report = ExperimentReport(
        name=name,
        kind=ExperimentKind.CAPS,
        config={
            "kind": ExperimentKind.CAPS.value,
            "name": name,
            "d": d,
            "eps_grid": list(grid),
        },
        records=[],
        per_n=[],
    )
    for direction in (VOLUME_TO_BOUNDARY, BOUNDARY_TO_VOLUME):
        fit = cap_exponent_check(d, grid, direction)
        report.fits[direction] = fit
        for idx, (lx, ly) in enumerate(fit.points):
            report.records.append(
                RunRecord(d, idx, 0, float(np.exp(ly)), float(np.exp(lx)))
            )
            report.per_n.append(
                {
                    "direction": direction,
                    "eps": float(np.exp(lx)),
                    "value": float(np.exp(ly)),
                }
            )
    report.elapsed_seconds = time.perf_counter() - t0
    return report


RUNNERS = {
    ExperimentKind.VARIANCE: run_variance_experiment,
    ExperimentKind.MEAN_DEFICIT: run_mean_deficit_experiment,
    ExperimentKind.CLT: run_clt_experiment,
    ExperimentKind.CONTAINMENT: run_containment_experiment,
    ExperimentKind.EFRON_STEIN: efron_stein_estimate,
}


def _expect_kind(cfg: ExperimentConfig, kind: ExperimentKind) -> None:
    if cfg.kind is not kind:
        raise ConfigError(f"config kind is {cfg.kind}, expected {kind}")


def _new_report(cfg: ExperimentConfig) -> ExperimentReport:
    return ExperimentReport(
        name=cfg.name,
        kind=cfg.kind,
        config=config_echo(cfg),
        records=[],
        per_n=[],
    )
