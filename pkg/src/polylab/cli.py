"""Command-line front end.

Each experiment subcommand builds a request, runs it through the service
layer (in process by default, over HTTP when ``--server`` is given), and
writes three artifacts per experiment into the output directory:
``<name>_records.csv``, ``<name>_summary.json``, and ``<name>_loglog.svg``.

Sample-size grids accept ``start:stop:xK`` (geometric with ratio K), a
comma-separated list, or a single value.  The environment variable
``POLYLAB_SEED`` overrides every configured master seed.  Exit codes: 0 on
success, 2 on configuration errors, 3 when ``--check`` finds a failed
threshold.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import httpx
from pydantic import ValidationError

from .errors import ConfigError, PolylabError
from .experiments.checks import deficit_slope_target, variance_slope_target
from .experiments.config import RunRecord
from .reporting import emit_csv, emit_summary_json, emit_svg_loglog
from .service import (
    BodyModel,
    CampaignModel,
    CapsRequest,
    ExperimentRequest,
    ExperimentResponse,
    GrassmannRequest,
)
from .service.api import POINT_KINDS, run_campaign, run_caps, run_grassmann
from .service.api import run_point_experiment
from .service.schemas import CampaignResponse
from .stats import fit_power_law

ENV_SEED = "POLYLAB_SEED"


# ---------------------------------------------------------------------------
# grid parsing


def _split_geometric(text: str) -> tuple[str, str, str]:
    parts = text.split(":")
    if len(parts) != 3 or not parts[2].lower().startswith("x"):
        raise ConfigError(
            f"grid {text!r} must look like start:stop:xK, a comma list, or a "
            "single value"
        )
    return parts[0], parts[1], parts[2][1:]


def parse_int_grid(text: str) -> list[int]:
    """Integer grid: ``32:1024:x2``, ``32,64,128``, or ``256``."""
    text = text.strip()
    try:
        if ":" in text:
            start_s, stop_s, ratio_s = _split_geometric(text)
            start, stop, ratio = int(start_s), int(stop_s), float(ratio_s)
            if start < 1 or stop < start or ratio <= 1.0:
                raise ConfigError(
                    f"grid {text!r} needs 1 <= start <= stop and ratio > 1"
                )
            grid, value = [], start
            while value <= stop:
                grid.append(value)
                bumped = int(round(value * ratio))
                if bumped <= value:
                    raise ConfigError(f"grid {text!r} does not increase")
                value = bumped
            return grid
        if "," in text:
            return [int(p) for p in text.split(",") if p.strip()]
        return [int(text)]
    except ValueError as exc:
        raise ConfigError(f"grid {text!r} is not an integer grid") from exc


def parse_float_grid(text: str) -> list[float]:
    """Float grid with the same three syntaxes as :func:`parse_int_grid`."""
    text = text.strip()
    try:
        if ":" in text:
            start_s, stop_s, ratio_s = _split_geometric(text)
            start, stop, ratio = float(start_s), float(stop_s), float(ratio_s)
            if not (0.0 < start <= stop) or ratio <= 1.0:
                raise ConfigError(
                    f"grid {text!r} needs 0 < start <= stop and ratio > 1"
                )
            grid, value = [], start
            while value <= stop * (1.0 + 1e-12):
                grid.append(value)
                value *= ratio
            return grid
        if "," in text:
            return [float(p) for p in text.split(",") if p.strip()]
        return [float(text)]
    except ValueError as exc:
        raise ConfigError(f"grid {text!r} is not a numeric grid") from exc


def _env_seed() -> int | None:
    raw = os.environ.get(ENV_SEED)
    if raw is None or raw == "":
        return None
    try:
        return int(raw)
    except ValueError as exc:
        raise ConfigError(f"{ENV_SEED} must be an integer, got {raw!r}") from exc


def _resolve_threads(threads: int) -> int:
    if threads < 0:
        raise ConfigError("threads must be >= 0 (0 = one worker per CPU)")
    return threads if threads > 0 else (os.cpu_count() or 1)


# ---------------------------------------------------------------------------
# artifact emission


def _svg_series(response: ExperimentResponse):
    """Series, reference slope, and fallback note for the log-log chart."""
    kind = response.kind
    if kind in ("variance", "efron-stein"):
        reference = variance_slope_target(response.dim)
    elif kind == "mean-deficit":
        reference = deficit_slope_target(response.dim)
    elif kind == "grassmann":
        reference = float(response.dim - response.config["ell"])
    else:
        reference = None
    series = [(label, fit) for label, fit in sorted(response.fits.items())]
    if series:
        return series, reference, None
    if kind == "clt":
        groups: dict[int, list[tuple[float, float]]] = {}
        for row in response.per_n:
            groups.setdefault(row["ell"], []).append(
                (float(row["n"]), row["kolmogorov"])
            )
        for ell, pairs in sorted(groups.items()):
            usable = [(n, y) for n, y in pairs if y > 0.0]
            if len(usable) >= 3:
                series.append((f"ell={ell}", fit_power_law(usable)))
        return series, None, "kolmogorov distances are all zero"
    if kind == "containment":
        usable = [
            (float(row["n"]), row["failure_fraction"])
            for row in response.per_n
            if row["failure_fraction"] > 0.0
        ]
        if len(usable) >= 3:
            series.append(("failure fraction", fit_power_law(usable)))
        return series, None, "no containment failures observed"
    return series, reference, "no fit available"


def write_outputs(response: ExperimentResponse, out_dir: Path) -> list[Path]:
    """Emit the three per-experiment files and return their paths."""
    out_dir.mkdir(parents=True, exist_ok=True)
    base = out_dir / response.name
    csv_path = base.parent / f"{base.name}_records.csv"
    json_path = base.parent / f"{base.name}_summary.json"
    svg_path = base.parent / f"{base.name}_loglog.svg"

    records = [RunRecord(*row) for row in response.records or []]
    emit_csv(csv_path, response.name, response.body_label, response.dim, records)

    summary = response.model_dump(
        exclude={"records", "elapsed_seconds", "body_label", "dim"},
        exclude_none=True,
    )
    emit_summary_json(json_path, summary)

    series, reference, note = _svg_series(response)
    emit_svg_loglog(
        svg_path,
        series,
        title=f"{response.name} ({response.kind})",
        reference_slope=reference,
        note=note,
    )
    return [csv_path, json_path, svg_path]


def _print_check(response: ExperimentResponse) -> None:
    for c in response.check.criteria:
        status = "PASS" if c.passed else "FAIL"
        actual = "n/a" if c.actual is None else f"{c.actual:.6g}"
        if c.target is not None:
            bound = f"target={c.target:.6g} tol={c.tolerance:.6g}"
        elif c.threshold is not None:
            bound = f"threshold={c.threshold:.6g}"
        else:
            bound = ""
        print(f"[{status}] {response.name}: {c.name} actual={actual} {bound}".rstrip())


# ---------------------------------------------------------------------------
# remote mode


def _post(server: str, path: str, payload: dict) -> dict:
    with httpx.Client(base_url=server, timeout=None) as client:
        resp = client.post(path, json=payload)
    if resp.status_code in (400, 422):
        try:
            detail = resp.json()["detail"]
        except Exception:
            detail = resp.text
        raise ConfigError(f"server rejected the request: {detail}")
    resp.raise_for_status()
    return resp.json()


def _dispatch_point(kind: str, req: ExperimentRequest, server: str | None):
    if server is None:
        return run_point_experiment(kind, req)
    doc = _post(server, f"/experiments/{kind}", req.model_dump(mode="json"))
    return ExperimentResponse.model_validate(doc)


def _dispatch_grassmann(req: GrassmannRequest, server: str | None):
    if server is None:
        return run_grassmann(req)
    doc = _post(server, "/experiments/grassmann", req.model_dump(mode="json"))
    return ExperimentResponse.model_validate(doc)


def _dispatch_caps(req: CapsRequest, server: str | None):
    if server is None:
        return run_caps(req)
    doc = _post(server, "/experiments/caps", req.model_dump(mode="json"))
    return ExperimentResponse.model_validate(doc)


def _dispatch_campaign(model: CampaignModel, server: str | None):
    if server is None:
        return run_campaign(model)
    doc = _post(server, "/campaign", model.model_dump(mode="json"))
    return CampaignResponse.model_validate(doc)


# ---------------------------------------------------------------------------
# subcommands


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--name", default="", help="experiment name (file prefix)")
    parser.add_argument("--seed", type=int, default=0, help="master seed")
    parser.add_argument("--out", default=".", help="output directory")
    parser.add_argument(
        "--check",
        action="store_true",
        help="evaluate built-in thresholds; exit 3 if any fail",
    )
    parser.add_argument(
        "--server", default=None, help="base URL of a running service"
    )


def _add_point_args(parser: argparse.ArgumentParser, with_ell: bool) -> None:
    parser.add_argument(
        "--body", choices=("ball", "ellipsoid"), default="ball"
    )
    parser.add_argument("--d", type=int, default=3, help="ambient dimension")
    parser.add_argument("--radius", type=float, default=1.0)
    parser.add_argument(
        "--semiaxes", default=None, help="comma-separated ellipsoid semiaxes"
    )
    if with_ell:
        parser.add_argument(
            "--ell",
            required=True,
            help="intrinsic volume order(s), comma-separated",
        )
        parser.add_argument(
            "--panel-size",
            type=int,
            default=0,
            help="projection panel size for orders without an exact path",
        )
    parser.add_argument(
        "--n", required=True, help="sample sizes: start:stop:xK, list, or value"
    )
    parser.add_argument("--reps", type=int, required=True, help="replications")
    parser.add_argument(
        "--threads", type=int, default=1, help="worker processes (0 = auto)"
    )
    _add_common(parser)


def _point_request(args: argparse.Namespace, kind: str) -> ExperimentRequest:
    semiaxes = (
        [float(p) for p in args.semiaxes.split(",") if p.strip()]
        if args.semiaxes
        else None
    )
    body = BodyModel(
        kind=args.body, dim=args.d, radius=args.radius, semiaxes=semiaxes
    )
    seed = _env_seed()
    try:
        return ExperimentRequest(
            name=args.name or kind,
            body=body,
            ell=parse_int_grid(args.ell) if getattr(args, "ell", None) else [],
            n_grid=parse_int_grid(args.n),
            replications=args.reps,
            master_seed=seed if seed is not None else args.seed,
            panel_size=getattr(args, "panel_size", 0),
            c_alpha=getattr(args, "c_alpha", 1.0),
            threads=_resolve_threads(args.threads),
        )
    except ValidationError as exc:
        raise ConfigError(exc.errors()[0]["msg"]) from exc


def _finish(response_list, out_dir: Path, check: bool) -> int:
    for response in response_list:
        for path in write_outputs(response, out_dir):
            print(f"wrote {path}")
        if check:
            _print_check(response)
    if check and not all(r.check.passed for r in response_list):
        return 3
    return 0


def _cmd_point(kind: str, args: argparse.Namespace) -> int:
    req = _point_request(args, kind)
    response = _dispatch_point(kind, req, args.server)
    return _finish([response], Path(args.out), args.check)


def _cmd_grassmann(args: argparse.Namespace) -> int:
    seed = _env_seed()
    try:
        req = GrassmannRequest(
            name=args.name or "grassmann",
            d=args.d,
            ell=args.ell,
            a_grid=parse_float_grid(args.a_grid),
            samples=args.samples,
            master_seed=seed if seed is not None else args.seed,
        )
    except ValidationError as exc:
        raise ConfigError(exc.errors()[0]["msg"]) from exc
    response = _dispatch_grassmann(req, args.server)
    return _finish([response], Path(args.out), args.check)


def _cmd_caps(args: argparse.Namespace) -> int:
    try:
        req = CapsRequest(
            name=args.name or "caps", d=args.d, eps_grid=parse_float_grid(args.eps)
        )
    except ValidationError as exc:
        raise ConfigError(exc.errors()[0]["msg"]) from exc
    response = _dispatch_caps(req, args.server)
    return _finish([response], Path(args.out), args.check)


def _cmd_campaign(args: argparse.Namespace) -> int:
    config_path = Path(args.config)
    try:
        raw = json.loads(config_path.read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise ConfigError(f"campaign file {config_path} does not exist") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"campaign file {config_path} is not valid JSON: {exc}") from exc
    try:
        model = CampaignModel.model_validate(raw)
    except ValidationError as exc:
        raise ConfigError(f"invalid campaign file: {exc.errors()[0]['msg']}") from exc
    seed = _env_seed()
    if seed is not None:
        for entry in model.experiments:
            entry.master_seed = seed
    if args.threads is not None:
        model.threads = args.threads
    out_dir = Path(args.out or model.output_dir or ".")
    campaign_response = _dispatch_campaign(model, args.server)
    return _finish(campaign_response.results, out_dir, args.check)


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=args.host, port=args.port, log_level="info")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="polylab",
        description="Monte Carlo experiments on random inscribed polytopes.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    for kind in POINT_KINDS:
        p = sub.add_parser(kind, help=f"run the {kind} experiment")
        _add_point_args(p, with_ell=kind != "containment")
        if kind == "containment":
            p.add_argument(
                "--c-alpha",
                type=float,
                default=1.0,
                help="constant in the threshold c*log(n)/n",
            )
        p.set_defaults(func=lambda a, k=kind: _cmd_point(k, a))

    g = sub.add_parser("grassmann", help="angle concentration on the Grassmannian")
    g.add_argument("--d", type=int, required=True)
    g.add_argument("--ell", type=int, required=True)
    g.add_argument(
        "--a-grid", required=True, help="angles: start:stop:xK, list, or value"
    )
    g.add_argument("--samples", type=int, required=True)
    _add_common(g)
    g.set_defaults(func=_cmd_grassmann)

    c = sub.add_parser("caps", help="cap volume/boundary-measure relations")
    c.add_argument("--d", type=int, required=True)
    c.add_argument(
        "--eps", required=True, help="cap sizes: start:stop:xK, list, or value"
    )
    _add_common(c)
    c.set_defaults(func=_cmd_caps)

    camp = sub.add_parser("campaign", help="run every experiment of a JSON campaign")
    camp.add_argument("--config", required=True, help="campaign JSON file")
    camp.add_argument("--out", default=None, help="output directory override")
    camp.add_argument(
        "--threads", type=int, default=None, help="worker processes (0 = auto)"
    )
    camp.add_argument("--check", action="store_true")
    camp.add_argument("--server", default=None)
    camp.set_defaults(func=_cmd_campaign)

    s = sub.add_parser("serve", help="start the HTTP service")
    s.add_argument("--host", default="127.0.0.1")
    s.add_argument("--port", type=int, default=8000)
    s.set_defaults(func=_cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except PolylabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entrypoint() -> None:
    sys.exit(main(sys.argv[1:]))


if __name__ == "__main__":
    entrypoint()
