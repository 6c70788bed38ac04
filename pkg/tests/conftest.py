import pytest

from alipred.forest import ForestConfig
from alipred.hurdle import HurdleConfig
from alipred.schema import DatasetSchema, FeatureSpec
from alipred.synth import SeatBias, SyntheticConfig, SyntheticFeature, generate_synthetic


def two_process_config(seed, n_cases=2000, noise_sd=1000.0, seat=True,
                       grant_shift=(2.0, -2.0, 0.0), amount_shift=(0.0, 0.0, 0.0),
                       grant_intercept=-0.3, agreed_rate=0.4):
    """Standard test generator: logistic grant on (a, b), linear amount on (a, c),
    one pure-noise feature d, optional 3-seat extra-legal effect."""
    return SyntheticConfig(
        n_cases=n_cases,
        seed=seed,
        grant_intercept=grant_intercept,
        grant_coefficients={"a": 1.2, "b": -0.8},
        amount_coefficients={"a": 3000.0, "c": 1500.0},
        amount_intercept=10000.0,
        noise_sd=noise_sd,
        features=(
            SyntheticFeature("a"),
            SyntheticFeature("b"),
            SyntheticFeature("c"),
            SyntheticFeature("d"),
        ),
        seat_bias=SeatBias(n_seats=3, grant_shift=grant_shift, amount_shift=amount_shift)
        if seat else None,
        agreed_rate=agreed_rate,
    )


def small_forest(seed=0, n_trees=25, **kwargs):
    return ForestConfig(n_trees=n_trees, seed=seed, **kwargs)


def seat_bias_audit_config(seed, n_cases=1200, n_seats=6, shift=4.0, coef=0.8):
    """Audit regime: a many-court extra-legal effect that dwarfs the legal
    features, so the seat must surface at the top of the importance ranking.
    With shift=0 the seat carries no signal at all."""
    shifts = tuple(shift if i % 2 == 0 else -shift for i in range(n_seats))
    amount_shifts = tuple(
        (1000.0 * s / abs(shift)) if shift else 0.0 for s in shifts
    )
    return SyntheticConfig(
        n_cases=n_cases, seed=seed, grant_intercept=0.0,
        grant_coefficients={"a": coef, "b": -coef * 0.7},
        amount_coefficients={"a": 3000.0, "c": 1500.0},
        amount_intercept=10000.0, noise_sd=1000.0,
        features=(SyntheticFeature("a"), SyntheticFeature("b"),
                  SyntheticFeature("c"), SyntheticFeature("d")),
        seat_bias=SeatBias(n_seats=n_seats, grant_shift=shifts,
                           amount_shift=amount_shifts),
        agreed_rate=0.4,
    )


@pytest.fixture(scope="session")
def standard_dataset():
    return generate_synthetic(two_process_config(seed=7))


@pytest.fixture(scope="session")
def standard_hurdle_config():
    return HurdleConfig(forest=small_forest(seed=5))


@pytest.fixture
def tiny_schema():
    return DatasetSchema(
        features=(
            FeatureSpec("income", kind="numeric", unit="euros", allow_missing=True),
            FeatureSpec("years", kind="numeric", unit="years"),
            FeatureSpec("children", kind="count"),
            FeatureSpec("employed", kind="boolean"),
            FeatureSpec("region", kind="categorical", levels=("north", "south", "west"),
                        role="extra_legal"),
        )
    )
