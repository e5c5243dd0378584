"""FastAPI application exposing pipeline runs, single stages, and metric helpers.

Error mapping: invalid configs surface as 422 (client error), stage failures
as 500 with the failed stage named in the detail.  The CLI translates these
into its exit codes.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from .. import __version__
from ..metrics import (
    MetricError,
    gini_simpson,
    pearson,
    two_proportion_z_test,
    welch_t_test,
)
from ..pipeline import ConfigError, PipelineConfig, StageFailure, STAGES, run, run_stage
from ..survival import kaplan_meier, median_crossing
from ..vectors import percentile_threshold
from .schemas import (
    ConfigEnvelope,
    GiniRequest,
    HealthResponse,
    KaplanMeierRequest,
    KaplanMeierResponse,
    PearsonRequest,
    PercentileRequest,
    RunResponse,
    StageResponse,
    SurvivalPointModel,
    TestResponse,
    TwoProportionRequest,
    ValidateResponse,
    ValueResponse,
    WelchRequest,
)


def _parse_config(envelope: ConfigEnvelope) -> PipelineConfig:
    try:
        return PipelineConfig.from_payload(envelope.config)
    except ConfigError as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc


def create_app() -> FastAPI:
    app = FastAPI(title="raimpact", version=__version__)

    @app.get("/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse(status="ok", version=__version__)

    @app.post("/validate", response_model=ValidateResponse)
    def validate(envelope: ConfigEnvelope) -> ValidateResponse:
        try:
            cfg = PipelineConfig.from_payload(envelope.config)
            cfg.check_paths()
        except ConfigError as exc:
            return ValidateResponse(valid=False, errors=[str(exc)])
        return ValidateResponse(valid=True, config_hash=cfg.config_hash())

    @app.post("/run", response_model=RunResponse)
    def run_pipeline(envelope: ConfigEnvelope) -> RunResponse:
        cfg = _parse_config(envelope)
        try:
            manifest = run(cfg)
        except ConfigError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        except StageFailure as exc:
            raise HTTPException(
                status_code=500, detail={"stage": exc.stage, "error": exc.cause}
            ) from exc
        return RunResponse(manifest=manifest)

    @app.post("/stages/{stage}", response_model=StageResponse)
    def run_single_stage(stage: str, envelope: ConfigEnvelope) -> StageResponse:
        if stage not in STAGES:
            raise HTTPException(status_code=404, detail=f"unknown stage {stage!r}")
        cfg = _parse_config(envelope)
        try:
            summary = run_stage(cfg, stage)
        except ConfigError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        except StageFailure as exc:
            raise HTTPException(
                status_code=500, detail={"stage": exc.stage, "error": exc.cause}
            ) from exc
        return StageResponse(stage=stage, summary=summary)

    @app.post("/compute/kaplan-meier", response_model=KaplanMeierResponse)
    def compute_km(req: KaplanMeierRequest) -> KaplanMeierResponse:
        try:
            curve = kaplan_meier(req.rows)
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        return KaplanMeierResponse(
            points=[
                SurvivalPointModel(
                    time=p.time,
                    at_risk=p.at_risk,
                    events=p.events,
                    censored=p.censored,
                    survival=float(p.survival),
                )
                for p in curve.points
            ],
            n_subjects=curve.n_subjects,
            median_crossing=median_crossing(curve),
        )

    @app.post("/compute/gini-simpson", response_model=ValueResponse)
    def compute_gini(req: GiniRequest) -> ValueResponse:
        try:
            return ValueResponse(value=gini_simpson(req.counts))
        except MetricError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc

    @app.post("/compute/two-proportion-z", response_model=TestResponse)
    def compute_z(req: TwoProportionRequest) -> TestResponse:
        try:
            result = two_proportion_z_test(req.k1, req.n1, req.k2, req.n2)
        except MetricError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        return TestResponse(statistic=result.statistic, p_value=result.p_value, df=result.df)

    @app.post("/compute/welch-t", response_model=TestResponse)
    def compute_welch(req: WelchRequest) -> TestResponse:
        try:
            result = welch_t_test(req.sample_a, req.sample_b)
        except MetricError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        return TestResponse(statistic=result.statistic, p_value=result.p_value, df=result.df)

    @app.post("/compute/pearson", response_model=TestResponse)
    def compute_pearson(req: PearsonRequest) -> TestResponse:
        try:
            result = pearson(req.x, req.y)
        except MetricError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        return TestResponse(statistic=result.statistic, p_value=result.p_value, df=result.df)

    @app.post("/compute/percentile", response_model=ValueResponse)
    def compute_percentile(req: PercentileRequest) -> ValueResponse:
        try:
            return ValueResponse(value=percentile_threshold(req.values, req.p))
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc

    return app
