"""HTTP/JSON prediction service for what-if queries against one trained model.

The model artifact is loaded once at startup and never retrained; handlers
share it read-only, so identical requests get identical responses under any
concurrency. No request is persisted: case inputs are sensitive.
"""

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from .. import __version__
from ..errors import DataValidationError
from ..forest import importance
from ..hurdle import import_model, predict_case
from .schemas import (
    CoefficientsResponse,
    CoefficientTerm,
    FeatureDoc,
    HealthResponse,
    ImportanceItem,
    ImportancesResponse,
    PredictRequest,
    PredictResponse,
    SchemaResponse,
)

_VALIDATION_STATUS = {
    "unknown_feature": 400,
    "missing_required": 400,
    "invariant": 400,
    "type_mismatch": 422,
}


def _amount_str(value):
    return repr(float(value))


def create_app(model_path=None, model=None):
    """Build the FastAPI app around one loaded hurdle model."""
    if model is None:
        if model_path is None:
            raise ValueError("either model_path or a loaded model is required")
        model = import_model(model_path)

    app = FastAPI(title="alimony what-if service", version=__version__)
    app.state.model = model
    # Desk-scale tool without authentication; the browser client is served
    # from another local port, so allow cross-origin reads.
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )

    @app.exception_handler(Exception)
    async def internal_error(request: Request, exc: Exception):
        # Never leak internals.
        return JSONResponse(status_code=500, content={"error": "internal server error"})

    @app.get("/health", response_model=HealthResponse)
    def health():
        return HealthResponse(status="ok", model_fingerprint=model.fingerprint)

    @app.get("/schema", response_model=SchemaResponse)
    def schema_doc():
        features = []
        for spec in model.schema.features:
            features.append(
                FeatureDoc(
                    name=spec.name,
                    kind=spec.kind,
                    role=spec.role,
                    allow_missing=spec.allow_missing,
                    unit=spec.unit if spec.kind == "numeric" else None,
                    levels=list(spec.levels) if spec.kind == "categorical" else None,
                )
            )
        return SchemaResponse(
            schema_version=model.schema.schema_version,
            features=features,
            target_grant=model.schema.target_grant,
            target_amount=model.schema.target_amount,
            flag_monthly_payment=model.schema.flag_monthly_payment,
            flag_parties_agreed=model.schema.flag_parties_agreed,
            model_fingerprint=model.fingerprint,
        )

    @app.post("/predict", response_model=PredictResponse)
    def predict(request: PredictRequest):
        try:
            breakdown = predict_case(model, request.values)
        except DataValidationError as exc:
            status = _VALIDATION_STATUS.get(exc.kind, 400)
            return JSONResponse(
                status_code=status,
                content={"error": str(exc), "field": exc.column},
            )
        if request.mode is not None and request.mode != model.config.combination_mode:
            if request.mode == "label":
                adjusted = breakdown.amount_raw if breakdown.grant_label == 1 else 0.0
            else:
                adjusted = breakdown.grant_probability * breakdown.amount_raw
        else:
            adjusted = breakdown.amount_adjusted
        warnings = []
        if breakdown.clipped:
            warnings.append("negative regression output clipped to 0")
        return PredictResponse(
            grant_probability=breakdown.grant_probability,
            grant_label=breakdown.grant_label,
            amount_raw=_amount_str(breakdown.amount_raw),
            amount_adjusted=_amount_str(adjusted),
            model_fingerprint=model.fingerprint,
            warnings=warnings,
        )

    @app.get("/importances", response_model=ImportancesResponse)
    def importances():
        extra = set(model.schema.extra_legal_names())
        entries = [
            ImportanceItem(
                feature=e.feature,
                score=e.score,
                role="extra_legal" if e.feature in extra else "legal",
            )
            for e in importance(model.classifier, method="frequency_weighted")
        ]
        return ImportancesResponse(method="frequency_weighted", entries=entries)

    @app.get("/coefficients", response_model=CoefficientsResponse)
    def coefficients():
        reg = model.regressor
        return CoefficientsResponse(
            kind=model.config.regressor_kind,
            tau=getattr(reg, "tau", None),
            intercept=reg.intercept,
            terms=[
                CoefficientTerm(name=n, estimate=v)
                for n, v in zip(reg.column_names, reg.coefficients)
            ],
        )

    return app
