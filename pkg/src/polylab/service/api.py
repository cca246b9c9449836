"""Request-to-response functions shared by the HTTP app and the CLI."""

from __future__ import annotations

import os
from dataclasses import asdict

from pydantic import ValidationError

from ..errors import ConfigError
from ..experiments import (
    RUNNERS,
    ExperimentConfig,
    ExperimentKind,
    ExperimentReport,
    evaluate_checks,
    run_caps_experiment,
    run_grassmannian_experiment,
)
from .schemas import (
    BodyModel,
    CampaignEntry,
    CampaignModel,
    CampaignResponse,
    CapsRequest,
    CheckModel,
    CltModel,
    ExperimentRequest,
    ExperimentResponse,
    FitModel,
    GrassmannRequest,
)

POINT_KINDS = tuple(k.value for k in RUNNERS)


def build_response(
    report: ExperimentReport,
    dim: int,
    body_label: str,
    include_records: bool = True,
) -> ExperimentResponse:
    """Assemble the wire shape of a finished report, checks included."""
    clt = None
    if report.clt is not None:
        clt = {
            label: CltModel(
                standardization=r.standardization, per_n=list(r.per_n)
            )
            for label, r in report.clt.items()
        }
    records = None
    if include_records:
        records = [
            (r.n, r.replication, r.ell, r.value, r.aux) for r in report.records
        ]
    return ExperimentResponse(
        name=report.name,
        kind=report.kind.value,
        dim=dim,
        body_label=body_label,
        config=report.config,
        per_n=report.per_n,
        fits={k: FitModel(**asdict(f)) for k, f in report.fits.items()},
        clt=clt,
        plateau=report.plateau,
        ratios=report.ratios,
        warnings=list(report.warnings),
        check=CheckModel(**evaluate_checks(report)),
        records=records,
        elapsed_seconds=report.elapsed_seconds,
    )


def run_point_experiment(kind: str, req: ExperimentRequest) -> ExperimentResponse:
    """Run one of the point-sampling experiments named by ``kind``."""
    try:
        kind_enum = ExperimentKind(kind)
    except ValueError as exc:
        raise ConfigError(f"unknown experiment kind {kind!r}") from exc
    runner = RUNNERS.get(kind_enum)
    if runner is None:
        raise ConfigError(f"{kind} is not a point-sampling experiment")
    body = req.body.to_body()
    cfg = ExperimentConfig(
        kind=kind_enum,
        body=body,
        n_grid=tuple(req.n_grid),
        replications=req.replications,
        master_seed=req.master_seed,
        ells=tuple(req.ell) if isinstance(req.ell, list) else (req.ell,),
        panel_size=req.panel_size,
        c_alpha=req.c_alpha,
        name=req.name,
    )
    report = runner(cfg, threads=req.threads)
    return build_response(report, body.dim, body.label(), req.include_records)


def run_grassmann(req: GrassmannRequest) -> ExperimentResponse:
    report = run_grassmannian_experiment(
        req.d, req.ell, req.a_grid, req.samples, req.master_seed, req.name
    )
    return build_response(report, req.d, "ball(1)", req.include_records)


def run_caps(req: CapsRequest) -> ExperimentResponse:
    report = run_caps_experiment(req.d, req.eps_grid, req.name)
    return build_response(report, req.d, "ball(1)", req.include_records)


def entry_to_request(
    entry: CampaignEntry, threads: int = 1
) -> tuple[str, ExperimentRequest | GrassmannRequest | CapsRequest]:
    """Convert one campaign entry into the request its kind expects."""
    kind = str(entry.kind)
    try:
        if kind == ExperimentKind.GRASSMANN.value:
            return kind, GrassmannRequest(
                name=entry.name,
                d=_require(entry.d, entry, "d"),
                ell=_scalar_ell(entry),
                a_grid=_require(entry.a_grid, entry, "a_grid"),
                samples=_require(entry.samples, entry, "samples"),
                master_seed=entry.master_seed,
            )
        if kind == ExperimentKind.CAPS.value:
            return kind, CapsRequest(
                name=entry.name,
                d=_require(entry.d, entry, "d"),
                eps_grid=_require(entry.eps_grid, entry, "eps_grid"),
            )
        return kind, ExperimentRequest(
            name=entry.name,
            body=entry.body if entry.body is not None else BodyModel(),
            ell=entry.ell if entry.ell is not None else [],
            n_grid=_require(entry.n_grid, entry, "n_grid"),
            replications=_require(entry.replications, entry, "replications"),
            master_seed=entry.master_seed,
            panel_size=entry.panel_size,
            c_alpha=entry.c_alpha,
            threads=threads,
        )
    except ValidationError as exc:
        raise ConfigError(
            f"campaign entry {entry.name!r}: {exc.errors()[0]['msg']}"
        ) from exc


def run_campaign(campaign: CampaignModel) -> CampaignResponse:
    """Run every campaign entry in order and collect the responses."""
    threads = campaign.threads or (os.cpu_count() or 1)
    results = []
    for entry in campaign.experiments:
        kind, req = entry_to_request(entry, threads)
        if kind == ExperimentKind.GRASSMANN.value:
            results.append(run_grassmann(req))
        elif kind == ExperimentKind.CAPS.value:
            results.append(run_caps(req))
        else:
            results.append(run_point_experiment(kind, req))
    return CampaignResponse(results=results)


def _require(value, entry: CampaignEntry, field: str):
    if value is None:
        raise ConfigError(
            f"campaign entry {entry.name!r} ({entry.kind}) is missing {field!r}"
        )
    return value


def _scalar_ell(entry: CampaignEntry) -> int:
    ell = _require(entry.ell, entry, "ell")
    if isinstance(ell, list):
        if len(ell) != 1:
            raise ConfigError(
                f"campaign entry {entry.name!r} needs a single ell, got {ell}"
            )
        return int(ell[0])
    return int(ell)
