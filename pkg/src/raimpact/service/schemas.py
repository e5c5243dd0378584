"""Request/response models for the pipeline service."""

from __future__ import annotations

from typing import Any

from pydantic import BaseModel, Field


class HealthResponse(BaseModel):
    status: str
    version: str


class ConfigEnvelope(BaseModel):
    """Pipeline config payload; validated against PipelineConfig server-side."""

    config: dict[str, Any]


class ValidateResponse(BaseModel):
    valid: bool
    config_hash: str | None = None
    errors: list[str] = Field(default_factory=list)


class RunResponse(BaseModel):
    manifest: dict[str, Any]


class StageResponse(BaseModel):
    stage: str
    summary: dict[str, Any]


class KaplanMeierRequest(BaseModel):
    rows: list[tuple[int, bool]] = Field(description="(time, is_event) per subject")


class SurvivalPointModel(BaseModel):
    time: int
    at_risk: int
    events: int
    censored: int
    survival: float


class KaplanMeierResponse(BaseModel):
    points: list[SurvivalPointModel]
    n_subjects: int
    median_crossing: int | None


class GiniRequest(BaseModel):
    counts: list[int]


class ValueResponse(BaseModel):
    value: float


class TwoProportionRequest(BaseModel):
    k1: int
    n1: int
    k2: int
    n2: int


class WelchRequest(BaseModel):
    sample_a: list[float]
    sample_b: list[float]


class PearsonRequest(BaseModel):
    x: list[float]
    y: list[float]


class TestResponse(BaseModel):
    statistic: float
    p_value: float
    df: float | None = None


class PercentileRequest(BaseModel):
    values: list[float]
    p: float
