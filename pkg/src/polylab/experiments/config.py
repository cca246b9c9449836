"""Experiment configuration and result containers.

An ``ExperimentConfig`` pins everything a run depends on -- body, intrinsic
volume orders, sample-size grid, replication count, master seed, panel size,
and containment constant -- so that rerunning a config reproduces every
record bit for bit.  Random streams inside a run are derived solely from
``(master_seed, n, replication)``; consequently several intrinsic-volume
orders can share the hulls of one run, which is why ``ells`` is a tuple.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

from ..bodies import ConvexBody
from ..errors import ConfigError, UnsupportedReferenceError
from ..measures import has_exact_path
from ..stats import FitResult

_N_MAX = (1 << 24) - 1


class ExperimentKind(str, Enum):
    VARIANCE = "variance"
    MEAN_DEFICIT = "mean-deficit"
    CLT = "clt"
    CONTAINMENT = "containment"
    GRASSMANN = "grassmann"
    EFRON_STEIN = "efron-stein"
    CAPS = "caps"

    def __str__(self) -> str:  # keep f-strings free of the enum prefix
        return self.value


# Kinds whose per-n statistics are meaningless below a minimal replication count.
_STATISTICAL_KINDS = {
    ExperimentKind.VARIANCE,
    ExperimentKind.MEAN_DEFICIT,
    ExperimentKind.CLT,
    ExperimentKind.CONTAINMENT,
    ExperimentKind.EFRON_STEIN,
}
MIN_REPLICATIONS = 100

# Kinds that evaluate intrinsic volumes of the sampled hulls.
_VOLUME_KINDS = {
    ExperimentKind.VARIANCE,
    ExperimentKind.MEAN_DEFICIT,
    ExperimentKind.CLT,
    ExperimentKind.EFRON_STEIN,
}


@dataclass(frozen=True)
class ExperimentConfig:
    """Complete, validated description of one experiment run."""

    kind: ExperimentKind
    body: ConvexBody
    n_grid: tuple[int, ...]
    replications: int
    master_seed: int = 0
    ells: tuple[int, ...] = ()
    panel_size: int = 0
    c_alpha: float = 1.0
    name: str = ""

    def __post_init__(self) -> None:
        kind = ExperimentKind(self.kind)
        object.__setattr__(self, "kind", kind)
        ells = self.ells
        if isinstance(ells, int):
            ells = (ells,)
        ells = tuple(int(e) for e in ells)
        object.__setattr__(self, "ells", ells)
        object.__setattr__(self, "n_grid", tuple(int(n) for n in self.n_grid))
        if not self.name:
            object.__setattr__(self, "name", kind.value)
        self._validate()

    def _validate(self) -> None:
        d = self.body.dim
        if not self.n_grid:
            raise ConfigError("n_grid must not be empty")
        if list(self.n_grid) != sorted(set(self.n_grid)):
            raise ConfigError("n_grid must be strictly increasing")
        if self.n_grid[0] < d + 1:
            raise ConfigError(
                f"the smallest n must be at least dim + 1 = {d + 1}"
            )
        if self.n_grid[-1] > _N_MAX:
            raise ConfigError(f"n values must not exceed {_N_MAX}")
        if self.replications < 1:
            raise ConfigError("replications must be positive")
        if (
            self.kind in _STATISTICAL_KINDS
            and self.replications < MIN_REPLICATIONS
        ):
            raise ConfigError(
                f"{self.kind} needs at least {MIN_REPLICATIONS} replications"
            )
        if self.replications > _N_MAX:
            raise ConfigError(f"replications must not exceed {_N_MAX}")
        if not self.c_alpha > 0.0:
            raise ConfigError("c_alpha must be positive")
        if self.panel_size < 0 or self.panel_size == 1:
            raise ConfigError("panel_size must be 0 (unused) or at least 2")
        if self.kind in _VOLUME_KINDS:
            if not self.ells:
                raise ConfigError(f"{self.kind} requires at least one ell")
            for ell in self.ells:
                if not (1 <= ell <= d):
                    raise ConfigError(f"ell must lie in [1, {d}], got {ell}")
                if not has_exact_path(d, ell) and self.panel_size == 0:
                    raise ConfigError(
                        f"V_{ell} in dimension {d} has no exact path; "
                        "set panel_size"
                    )
        if self.kind is ExperimentKind.MEAN_DEFICIT:
            from ..bodies import reference_intrinsic_volume

            for ell in self.ells:
                try:
                    reference_intrinsic_volume(self.body, ell)
                except UnsupportedReferenceError as exc:
                    raise ConfigError(str(exc)) from exc

    @property
    def dim(self) -> int:
        return self.body.dim


@dataclass(frozen=True)
class RunRecord:
    """One scalar outcome of one replication.

    ``aux`` carries the secondary value some experiments produce (for the
    one-extra-point diagnostic it is the functional of the larger hull);
    containment failures store value one, successes zero, with ``ell`` zero.
    """

    n: int
    replication: int
    ell: int
    value: float
    aux: float | None = None


@dataclass(frozen=True)
class CltResult:
    """Normal-approximation summary: rows of (n, Kolmogorov distance, skewness)."""

    per_n: tuple[tuple[int, float, float], ...]
    standardization: str = "sample-moments"


@dataclass
class ExperimentReport:
    """Everything a run produced: records, per-n summaries, and fits.

    ``fits`` is keyed by a stable label (``"ell=2"`` for volume experiments,
    the direction name for cap-relation fits).  Kind-specific sections are
    ``None`` when they do not apply.
    """

    name: str
    kind: ExperimentKind
    config: dict
    records: list[RunRecord]
    per_n: list[dict]
    fits: dict[str, FitResult] = field(default_factory=dict)
    clt: dict[str, CltResult] | None = None
    plateau: dict[str, dict] | None = None
    ratios: list[dict] | None = None
    warnings: list[str] = field(default_factory=list)
    elapsed_seconds: float = 0.0


def config_echo(cfg: ExperimentConfig) -> dict:
    """JSON-ready snapshot of a config, sufficient to rerun it exactly."""
    return {
        "kind": cfg.kind.value,
        "name": cfg.name,
        "body": {
            "kind": cfg.body.kind,
            "dim": cfg.body.dim,
            "semiaxes": list(cfg.body.semiaxes),
        },
        "ells": list(cfg.ells),
        "n_grid": list(cfg.n_grid),
        "replications": cfg.replications,
        "master_seed": cfg.master_seed,
        "panel_size": cfg.panel_size,
        "c_alpha": cfg.c_alpha,
    }


def normalize_ells(ells: int | Sequence[int]) -> tuple[int, ...]:
    if isinstance(ells, int):
        return (ells,)
    return tuple(int(e) for e in ells)
