"""Pydantic request/response models for the prediction service.

Monetary amounts travel as decimal strings (shortest round-trip repr) so
clients never re-parse floats for display.
"""

from typing import Any, Literal, Optional

from pydantic import BaseModel, Field


class PredictRequest(BaseModel):
    values: dict[str, Any] = Field(default_factory=dict)
    mode: Optional[Literal["label", "probability"]] = None


class PredictResponse(BaseModel):
    grant_probability: float
    grant_label: int
    amount_raw: str
    amount_adjusted: str
    model_fingerprint: str
    warnings: list[str] = Field(default_factory=list)


class HealthResponse(BaseModel):
    status: str
    model_fingerprint: str


class FeatureDoc(BaseModel):
    name: str
    kind: str
    role: str
    allow_missing: bool
    unit: Optional[str] = None
    levels: Optional[list[str]] = None


class SchemaResponse(BaseModel):
    schema_version: int
    features: list[FeatureDoc]
    target_grant: str
    target_amount: str
    flag_monthly_payment: str
    flag_parties_agreed: str
    model_fingerprint: str


class ImportanceItem(BaseModel):
    feature: str
    score: float
    role: str


class ImportancesResponse(BaseModel):
    method: str
    entries: list[ImportanceItem]


class CoefficientTerm(BaseModel):
    name: str
    estimate: float


class CoefficientsResponse(BaseModel):
    kind: str
    tau: Optional[float] = None
    intercept: float
    terms: list[CoefficientTerm]
