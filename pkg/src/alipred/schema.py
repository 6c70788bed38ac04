"""Feature specs, dataset schema, and the JSON sidecar file.

The schema is always read from a sidecar file, never inferred from the CSV:
silent type inference is a correctness hazard for monetary columns.
"""

import hashlib
import json
from dataclasses import dataclass, field

from .errors import SchemaError

SCHEMA_FILE_VERSION = 1

FEATURE_KINDS = ("numeric", "count", "boolean", "categorical")
FEATURE_ROLES = ("legal", "extra_legal")
NUMERIC_UNITS = ("euros", "months", "years", "unitless")


@dataclass(frozen=True)
class FeatureSpec:
    """One input variable of a case record."""

    name: str
    kind: str
    role: str = "legal"
    allow_missing: bool = False
    unit: str = "unitless"
    levels: tuple = ()

    def __post_init__(self):
        if not self.name:
            raise SchemaError("feature name must be non-empty")
        if self.kind not in FEATURE_KINDS:
            raise SchemaError(f"feature {self.name!r}: unknown kind {self.kind!r}")
        if self.role not in FEATURE_ROLES:
            raise SchemaError(f"feature {self.name!r}: unknown role {self.role!r}")
        if self.kind == "numeric" and self.unit not in NUMERIC_UNITS:
            raise SchemaError(f"feature {self.name!r}: unknown unit {self.unit!r}")
        object.__setattr__(self, "levels", tuple(self.levels))
        if self.kind == "categorical":
            if not self.levels:
                raise SchemaError(f"categorical feature {self.name!r} has no levels")
            if len(set(self.levels)) != len(self.levels):
                raise SchemaError(f"categorical feature {self.name!r} has duplicate levels")
        elif self.levels:
            raise SchemaError(f"feature {self.name!r}: levels only allowed for categoricals")

    def to_dict(self):
        d = {
            "name": self.name,
            "kind": self.kind,
            "role": self.role,
            "allow_missing": self.allow_missing,
        }
        if self.kind == "numeric":
            d["unit"] = self.unit
        if self.kind == "categorical":
            d["levels"] = list(self.levels)
        return d

    @classmethod
    def from_dict(cls, d):
        try:
            return cls(
                name=d["name"],
                kind=d["kind"],
                role=d.get("role", "legal"),
                allow_missing=bool(d.get("allow_missing", False)),
                unit=d.get("unit", "unitless"),
                levels=tuple(d.get("levels", ())),
            )
        except KeyError as exc:
            raise SchemaError(f"feature entry missing field {exc}") from exc


@dataclass(frozen=True)
class DatasetSchema:
    """Ordered feature specs plus the names of the target and flag columns."""

    features: tuple
    target_grant: str = "grant"
    target_amount: str = "amount"
    flag_monthly_payment: str = "monthly_payment"
    flag_parties_agreed: str = "parties_agreed"
    schema_version: int = SCHEMA_FILE_VERSION

    def __post_init__(self):
        object.__setattr__(self, "features", tuple(self.features))
        names = [f.name for f in self.features]
        if len(set(names)) != len(names):
            dupes = sorted({n for n in names if names.count(n) > 1})
            raise SchemaError(f"duplicate feature names: {dupes}")
        reserved = {
            self.target_grant,
            self.target_amount,
            self.flag_monthly_payment,
            self.flag_parties_agreed,
        }
        if len(reserved) != 4:
            raise SchemaError("target and flag column names must be distinct")
        clash = reserved & set(names)
        if clash:
            raise SchemaError(f"target/flag columns listed among features: {sorted(clash)}")
        if not any(f.role == "legal" for f in self.features):
            raise SchemaError("schema must contain at least one feature with role=legal")

    @property
    def feature_names(self):
        return tuple(f.name for f in self.features)

    def feature(self, name):
        for f in self.features:
            if f.name == name:
                return f
        raise SchemaError(f"unknown feature {name!r}")

    def extra_legal_names(self):
        return tuple(f.name for f in self.features if f.role == "extra_legal")

    def to_dict(self):
        return {
            "schema_version": self.schema_version,
            "features": [f.to_dict() for f in self.features],
            "target_grant": self.target_grant,
            "target_amount": self.target_amount,
            "flag_monthly_payment": self.flag_monthly_payment,
            "flag_parties_agreed": self.flag_parties_agreed,
        }

    @classmethod
    def from_dict(cls, d):
        if not isinstance(d, dict):
            raise SchemaError("schema document must be a JSON object")
        version = d.get("schema_version")
        if version != SCHEMA_FILE_VERSION:
            raise SchemaError(
                f"unsupported schema_version {version!r} (expected {SCHEMA_FILE_VERSION})"
            )
        feats = d.get("features")
        if not isinstance(feats, list) or not feats:
            raise SchemaError("schema document needs a non-empty 'features' list")
        return cls(
            features=tuple(FeatureSpec.from_dict(f) for f in feats),
            target_grant=d.get("target_grant", "grant"),
            target_amount=d.get("target_amount", "amount"),
            flag_monthly_payment=d.get("flag_monthly_payment", "monthly_payment"),
            flag_parties_agreed=d.get("flag_parties_agreed", "parties_agreed"),
            schema_version=version,
        )

    def fingerprint(self):
        """Stable hash of the schema content; stored in model artifacts."""
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def load_schema(path):
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"schema file {path} is not valid JSON: {exc}") from exc
    return DatasetSchema.from_dict(doc)


def save_schema(schema, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(schema.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
