"""Synthetic case generator with known ground truth.

Real court data is confidential, so tests and demos run against generated
datasets: a logistic process decides the grant, a linear process with
gaussian noise sets the amount, and an optional per-court shift injects an
extra-legal effect that the audit must detect. The generating parameters are
embedded in the dataset metadata.
"""

import math
from dataclasses import asdict, dataclass

import numpy as np

from .data import CaseRecord, Dataset, _normalize_seed
from .schema import DatasetSchema, FeatureSpec


@dataclass(frozen=True)
class SyntheticFeature:
    """Generation recipe for one feature column."""

    name: str
    kind: str = "numeric"  # numeric | count | boolean
    unit: str = "unitless"
    role: str = "legal"
    loc: float = 0.0       # mean (numeric), poisson lambda (count), true-rate (boolean)
    scale: float = 1.0     # sd, numeric only
    allow_missing: bool = False
    missing_rate: float = 0.0


@dataclass(frozen=True)
class SeatBias:
    """Per-court shifts applied to the grant and amount processes."""

    n_seats: int
    grant_shift: tuple
    amount_shift: tuple
    feature_name: str = "court_seat"

    def __post_init__(self):
        object.__setattr__(self, "grant_shift", tuple(float(v) for v in self.grant_shift))
        object.__setattr__(self, "amount_shift", tuple(float(v) for v in self.amount_shift))
        if self.n_seats < 2:
            raise ValueError("seat bias needs at least 2 seats")
        if len(self.grant_shift) != self.n_seats or len(self.amount_shift) != self.n_seats:
            raise ValueError("grant_shift and amount_shift must have one entry per seat")

    def levels(self):
        return tuple(f"seat_{i}" for i in range(self.n_seats))


@dataclass(frozen=True)
class SyntheticConfig:
    n_cases: int
    seed: int
    grant_coefficients: dict
    amount_coefficients: dict
    amount_intercept: float
    noise_sd: float
    grant_intercept: float = 0.0
    seat_bias: SeatBias = None
    features: tuple = ()          # defaults derived from the coefficient keys
    monthly_rate: float = 0.0     # exact-count flagging
    agreed_rate: float = 0.0
    agreed_noise_sd: float = None  # optional lower noise for agreed cases

    def __post_init__(self):
        if self.n_cases < 1:
            raise ValueError("n_cases must be >= 1")
        if self.noise_sd < 0:
            raise ValueError("noise_sd must be >= 0")
        feats = tuple(self.features)
        if not feats:
            names = sorted(set(self.grant_coefficients) | set(self.amount_coefficients))
            feats = tuple(SyntheticFeature(name=n) for n in names)
        object.__setattr__(self, "features", feats)
        names = {f.name for f in self.features}
        unknown = (set(self.grant_coefficients) | set(self.amount_coefficients)) - names
        if unknown:
            raise ValueError(f"coefficients reference unknown features: {sorted(unknown)}")

    def to_dict(self):
        d = asdict(self)
        d["features"] = [asdict(f) for f in self.features]
        d["seat_bias"] = asdict(self.seat_bias) if self.seat_bias else None
        return d


def _build_schema(config):
    specs = []
    for f in config.features:
        specs.append(
            FeatureSpec(
                name=f.name,
                kind=f.kind,
                role=f.role,
                allow_missing=f.allow_missing,
                unit=f.unit if f.kind == "numeric" else "unitless",
            )
        )
    if config.seat_bias is not None:
        specs.append(
            FeatureSpec(
                name=config.seat_bias.feature_name,
                kind="categorical",
                role="extra_legal",
                levels=config.seat_bias.levels(),
            )
        )
    return DatasetSchema(features=tuple(specs))


def _exact_count_mask(rng, n, rate):
    k = int(math.floor(rate * n + 0.5))
    mask = np.zeros(n, dtype=bool)
    if k > 0:
        mask[rng.permutation(n)[:k]] = True
    return mask


def generate_synthetic(config):
    """Draw a dataset from the configured two-process ground truth.

    Fully deterministic given the seed. Grant and amount processes see the
    true feature values; missingness is applied afterwards, so imputation
    error is part of what models must cope with.
    """
    rng = np.random.default_rng(_normalize_seed(config.seed))
    n = config.n_cases
    schema = _build_schema(config)

    columns = {}
    for f in config.features:
        if f.kind == "numeric":
            columns[f.name] = f.loc + f.scale * rng.standard_normal(n)
        elif f.kind == "count":
            columns[f.name] = rng.poisson(max(f.loc, 0.0), n).astype(np.float64)
        elif f.kind == "boolean":
            columns[f.name] = (rng.random(n) < f.loc).astype(np.float64)
        else:
            raise ValueError(f"unsupported synthetic feature kind {f.kind!r}")

    seats = None
    if config.seat_bias is not None:
        seats = rng.integers(0, config.seat_bias.n_seats, n)

    logit = np.full(n, float(config.grant_intercept))
    for name, w in config.grant_coefficients.items():
        logit += float(w) * columns[name]
    if seats is not None:
        logit += np.asarray(config.seat_bias.grant_shift)[seats]
    p_grant = 1.0 / (1.0 + np.exp(-logit))
    grant = rng.random(n) < p_grant

    mean_amount = np.full(n, float(config.amount_intercept))
    for name, w in config.amount_coefficients.items():
        mean_amount += float(w) * columns[name]
    if seats is not None:
        mean_amount += np.asarray(config.seat_bias.amount_shift)[seats]
    noise = rng.standard_normal(n)

    monthly = _exact_count_mask(rng, n, config.monthly_rate)
    agreed = _exact_count_mask(rng, n, config.agreed_rate)

    sd = np.full(n, float(config.noise_sd))
    if config.agreed_noise_sd is not None:
        sd[agreed] = float(config.agreed_noise_sd)
    amount = np.where(grant, np.maximum(0.0, mean_amount + sd * noise), 0.0)

    missing = {}
    for f in config.features:
        if f.allow_missing and f.missing_rate > 0:
            missing[f.name] = rng.random(n) < f.missing_rate

    records = []
    spec_of = {f.name: f for f in config.features}
    for i in range(n):
        values = {}
        for name, col in columns.items():
            if name in missing and missing[name][i]:
                values[name] = None
                continue
            f = spec_of[name]
            if f.kind == "numeric":
                values[name] = float(col[i])
            elif f.kind == "count":
                values[name] = int(col[i])
            else:
                values[name] = bool(col[i])
        if seats is not None:
            values[config.seat_bias.feature_name] = f"seat_{seats[i]}"
        records.append(
            CaseRecord(
                values=values,
                grant=bool(grant[i]),
                amount=float(amount[i]),
                monthly_payment=bool(monthly[i]),
                parties_agreed=bool(agreed[i]),
            )
        )
    return Dataset(
        schema=schema,
        records=tuple(records),
        metadata={"synthetic_truth": config.to_dict()},
    )


def demo_config(n_cases=4000, seed=20130101):
    """Domain-flavored default used by the CLI and service demos."""
    features = (
        SyntheticFeature("wife_salary", unit="euros", loc=1800.0, scale=700.0,
                         allow_missing=True, missing_rate=0.05),
        SyntheticFeature("husband_salary", unit="euros", loc=2200.0, scale=900.0,
                         allow_missing=True, missing_rate=0.05),
        SyntheticFeature("marriage_years", unit="years", loc=18.0, scale=8.0),
        SyntheticFeature("children_count", kind="count", loc=1.6),
        SyntheticFeature("wife_works", kind="boolean", loc=0.62),
        SyntheticFeature("pension_requested", unit="euros", loc=600.0, scale=400.0),
        SyntheticFeature("pension_offered", unit="euros", loc=250.0, scale=200.0),
        SyntheticFeature("capital_once_requested", unit="euros", loc=30000.0, scale=20000.0),
        SyntheticFeature("capital_once_offered", unit="euros", loc=12000.0, scale=9000.0),
        SyntheticFeature("temporary_pension_offered", unit="euros", loc=400.0, scale=250.0),
    )
    return SyntheticConfig(
        n_cases=n_cases,
        seed=seed,
        features=features,
        grant_intercept=-0.2,
        grant_coefficients={
            "wife_salary": -0.0012,
            "husband_salary": 0.0011,
            "marriage_years": 0.06,
            "children_count": 0.25,
            "wife_works": -0.9,
            "pension_requested": 0.0012,
        },
        amount_intercept=8000.0,
        amount_coefficients={
            "capital_once_requested": 0.45,
            "capital_once_offered": 0.70,
            "pension_requested": 14.0,
            "pension_offered": -6.0,
            "temporary_pension_offered": 9.0,
            "wife_salary": -4.0,
            "marriage_years": 350.0,
        },
        noise_sd=4000.0,
        agreed_noise_sd=800.0,
        seat_bias=SeatBias(
            n_seats=6,
            grant_shift=(0.0, 0.3, -0.3, 0.6, -0.6, 0.0),
            amount_shift=(0.0, 1200.0, -1200.0, 2500.0, -2500.0, 0.0),
        ),
        monthly_rate=0.08,
        agreed_rate=0.55,
    )
