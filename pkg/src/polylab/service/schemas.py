"""Pydantic request and response models for the experiment service."""

from __future__ import annotations

from typing import Literal

from pydantic import AliasChoices, BaseModel, Field, field_validator, model_validator

from ..bodies import ConvexBody
from ..errors import ConfigError

PointKind = Literal["variance", "mean-deficit", "clt", "containment", "efron-stein"]
AnyKind = Literal[
    "variance",
    "mean-deficit",
    "clt",
    "containment",
    "efron-stein",
    "grassmann",
    "caps",
]


class BodyModel(BaseModel):
    kind: Literal["ball", "ellipsoid"] = "ball"
    dim: int = Field(default=3, ge=2, le=6)
    radius: float = Field(default=1.0, gt=0.0)
    semiaxes: list[float] | None = None

    @model_validator(mode="after")
    def _ball_from_semiaxes(self) -> "BodyModel":
        # A config echo stores every body through its semiaxes; accept that
        # shape for balls as long as it does not contradict explicit fields.
        if self.kind == "ball" and self.semiaxes:
            if len(set(self.semiaxes)) != 1:
                raise ValueError("a ball's semiaxes must all be equal")
            if "radius" in self.model_fields_set and not (
                abs(self.radius - self.semiaxes[0]) <= 1e-12 * self.radius
            ):
                raise ValueError("radius contradicts the given semiaxes")
            if "dim" in self.model_fields_set and self.dim != len(self.semiaxes):
                raise ValueError("dim contradicts the given semiaxes")
            self.radius = float(self.semiaxes[0])
            self.dim = len(self.semiaxes)
        return self

    def to_body(self) -> ConvexBody:
        if self.kind == "ball":
            return ConvexBody.ball(self.radius, self.dim)
        if not self.semiaxes:
            raise ConfigError("an ellipsoid needs its semiaxes")
        return ConvexBody.ellipsoid(self.semiaxes)


class ExperimentRequest(BaseModel):
    """Request for the point-sampling experiments (kind set by the endpoint)."""

    name: str = ""
    body: BodyModel = Field(default_factory=BodyModel)
    ell: int | list[int] = Field(default_factory=list)
    n_grid: list[int]
    replications: int = Field(ge=1)
    master_seed: int = 0
    panel_size: int = Field(default=0, ge=0)
    c_alpha: float = Field(default=1.0, gt=0.0)
    threads: int = Field(default=1, ge=1)
    include_records: bool = True


class GrassmannRequest(BaseModel):
    name: str = "grassmann"
    d: int = Field(ge=2, le=6)
    ell: int = Field(ge=1)
    a_grid: list[float]
    samples: int = Field(ge=1)
    master_seed: int = 0
    include_records: bool = True


class CapsRequest(BaseModel):
    name: str = "caps"
    d: int = Field(ge=2, le=6)
    eps_grid: list[float]
    include_records: bool = True


class FitModel(BaseModel):
    slope: float
    intercept: float
    slope_stderr: float
    r_squared: float
    points: list[tuple[float, float]]


class CltModel(BaseModel):
    standardization: str
    per_n: list[tuple[int, float, float]]


class CheckCriterion(BaseModel):
    name: str
    actual: float | None = None
    target: float | None = None
    threshold: float | None = None
    tolerance: float | None = None
    passed: bool


class CheckModel(BaseModel):
    passed: bool
    criteria: list[CheckCriterion]


RecordRow = tuple[int, int, int, float, float | None]


class ExperimentResponse(BaseModel):
    name: str
    kind: str
    dim: int
    body_label: str
    config: dict
    per_n: list[dict]
    fits: dict[str, FitModel] = Field(default_factory=dict)
    clt: dict[str, CltModel] | None = None
    plateau: dict | None = None
    ratios: list[dict] | None = None
    warnings: list[str] = Field(default_factory=list)
    check: CheckModel
    records: list[RecordRow] | None = None
    elapsed_seconds: float = 0.0


class CampaignEntry(BaseModel):
    """One experiment of a campaign file; fields beyond ``kind`` and ``name``
    are kind-specific and validated on conversion."""

    kind: AnyKind
    name: str = ""
    body: BodyModel | None = None
    ell: int | list[int] | None = Field(
        default=None, validation_alias=AliasChoices("ell", "ells")
    )
    n_grid: list[int] | None = None
    replications: int | None = None
    master_seed: int = 0
    panel_size: int = 0
    c_alpha: float = 1.0
    d: int | None = None
    a_grid: list[float] | None = None
    samples: int | None = None
    eps_grid: list[float] | None = None

    @model_validator(mode="after")
    def _default_name(self) -> "CampaignEntry":
        if not self.name:
            self.name = self.kind
        return self


class CampaignModel(BaseModel):
    experiments: list[CampaignEntry]
    output_dir: str | None = None
    threads: int = Field(default=1, ge=0)  # 0 = one worker per CPU

    @field_validator("experiments")
    @classmethod
    def _unique_names(cls, entries: list[CampaignEntry]) -> list[CampaignEntry]:
        names = [e.name or e.kind for e in entries]
        if len(set(names)) != len(names):
            raise ValueError("campaign experiment names must be unique")
        return entries


class CampaignResponse(BaseModel):
    results: list[ExperimentResponse]
