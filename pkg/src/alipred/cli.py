"""Command-line pipeline: generate, train, evaluate, audit, predict, serve.

A single JSON config file drives every command; flags override the file.
Seeds always come from the config or flags, never the wall clock, and no
output embeds a timestamp, so rerunning a command with identical inputs
rewrites byte-identical files.

Exit codes: 0 ok, 1 internal, 2 usage/config, 3 data/schema validation,
4 training, 5 model artifact. Errors print one machine-parsable line:
``alipred: code=<NAME> msg=<text>``.
"""

import json
import sys
from pathlib import Path

import click

from . import __version__
from .audit import render_audit_text, run_audit
from .data import filter_cases, load_dataset, save_dataset, train_test_split
from .errors import (
    ArtifactError,
    ConvergenceError,
    DataValidationError,
    RankDeficiencyError,
    SchemaError,
    TrainingError,
)
from .evaluation import classification_report, compare_models, pca_projection, render_comparison_text
from .forest import ForestConfig, predict_proba_many
from .hurdle import HurdleConfig, StepwiseSettings, export_model, import_model, predict_case, train_hurdle
from .synth import SeatBias, SyntheticConfig, SyntheticFeature, demo_config, generate_synthetic

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_TRAINING = 4
EXIT_ARTIFACT = 5


class CliError(Exception):
    def __init__(self, code, name, message):
        super().__init__(message)
        self.code = code
        self.name = name


def _fail(code, name, message):
    raise CliError(code, name, message)


def _load_config(path):
    if path is None:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError:
        _fail(EXIT_USAGE, "CONFIG_NOT_FOUND", f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        _fail(EXIT_USAGE, "CONFIG_INVALID", f"config file {path} is not valid JSON: {exc}")


def _resolve(config, overrides):
    """Merge defaults <- config file <- flags (flags win)."""
    merged = {
        "seed": 0,
        "test_fraction": 0.25,
        "subset": "all",
        "paths": {},
        "hurdle": {},
        "audit": {},
        "synthetic": None,
        "service": {},
    }
    for key, value in config.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key].update(value)
        else:
            merged[key] = value
    for key, value in overrides.items():
        if value is not None:
            merged[key] = value
    return merged


def _path(cfg, key, flag_value, default=None, required=False, must_exist=False):
    value = flag_value or cfg["paths"].get(key) or default
    if value is None:
        if required:
            _fail(EXIT_USAGE, "MISSING_PATH", f"no {key} path given (flag or config paths.{key})")
        return None
    p = Path(value)
    if must_exist and not p.exists():
        code, name = (EXIT_ARTIFACT, "ARTIFACT_NOT_FOUND") if key == "model" else (
            EXIT_USAGE, "FILE_NOT_FOUND")
        _fail(code, name, f"{key} file not found: {p}")
    return p


def _hurdle_config(cfg, mode=None, exclude=None):
    h = dict(cfg.get("hurdle") or {})
    forest = ForestConfig.from_dict({**{"seed": cfg.get("seed", 0)}, **(h.get("forest") or {})})
    stepwise = h.get("stepwise")
    if stepwise:
        stepwise = StepwiseSettings(**stepwise)
    excluded = h.get("excluded_features") or []
    if exclude:
        excluded = [f.strip() for f in exclude.split(",") if f.strip()]
    try:
        return HurdleConfig(
            classifier_features=h.get("classifier_features"),
            regressor_features=h.get("regressor_features"),
            regressor_kind=h.get("regressor_kind", "ols"),
            tau=h.get("tau", 0.5),
            combination_mode=mode or h.get("combination_mode", "label"),
            excluded_features=tuple(excluded),
            forest=forest,
            stepwise=stepwise,
        )
    except (ValueError, TrainingError) as exc:
        _fail(EXIT_USAGE, "CONFIG_INVALID", str(exc))


def _synthetic_config(cfg):
    s = cfg.get("synthetic")
    if not s:
        return demo_config(seed=cfg.get("seed", 0))
    try:
        features = tuple(SyntheticFeature(**f) for f in s.get("features", []))
        seat = s.get("seat_bias")
        return SyntheticConfig(
            n_cases=s["n_cases"],
            seed=s.get("seed", cfg.get("seed", 0)),
            grant_intercept=s.get("grant_intercept", 0.0),
            grant_coefficients=s.get("grant_coefficients", {}),
            amount_coefficients=s.get("amount_coefficients", {}),
            amount_intercept=s.get("amount_intercept", 0.0),
            noise_sd=s.get("noise_sd", 0.0),
            seat_bias=SeatBias(**seat) if seat else None,
            features=features,
            monthly_rate=s.get("monthly_rate", 0.0),
            agreed_rate=s.get("agreed_rate", 0.0),
            agreed_noise_sd=s.get("agreed_noise_sd"),
        )
    except (KeyError, TypeError, ValueError) as exc:
        _fail(EXIT_USAGE, "CONFIG_INVALID", f"bad synthetic config: {exc}")


def _write_json(path, payload):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True, indent=2)
        fh.write("\n")


def _write_text(path, text):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def _load_filtered(cfg, data_flag, schema_flag, subset):
    data_path = _path(cfg, "data", data_flag, required=True, must_exist=True)
    schema_path = _path(cfg, "schema", schema_flag, required=True, must_exist=True)
    dataset = load_dataset(data_path, schema_path)
    result = filter_cases(dataset, exclude_monthly=True, subset=subset)
    return result.dataset


def _run(fn):
    try:
        fn()
    except CliError as exc:
        click.echo(f"alipred: code={exc.name} msg={exc}", err=True)
        sys.exit(exc.code)
    except (SchemaError, DataValidationError) as exc:
        click.echo(f"alipred: code=DATA_INVALID msg={exc}", err=True)
        sys.exit(EXIT_DATA)
    except (TrainingError, RankDeficiencyError, ConvergenceError) as exc:
        click.echo(f"alipred: code=TRAINING_FAILED msg={exc}", err=True)
        sys.exit(EXIT_TRAINING)
    except ArtifactError as exc:
        click.echo(f"alipred: code=ARTIFACT_ERROR msg={exc}", err=True)
        sys.exit(EXIT_ARTIFACT)
    except Exception as exc:  # pragma: no cover - unexpected
        click.echo(f"alipred: code=INTERNAL msg={exc}", err=True)
        sys.exit(EXIT_INTERNAL)


config_option = click.option("--config", "config_path", type=click.Path(), default=None,
                             help="JSON run-config file; flags override it.")
seed_option = click.option("--seed", type=int, default=None, help="RNG seed override.")
out_option = click.option("--out", "out_flag", type=click.Path(), default=None,
                          help="Output directory.")
data_option = click.option("--data", "data_flag", type=click.Path(), default=None)
schema_option = click.option("--schema", "schema_flag", type=click.Path(), default=None)
model_option = click.option("--model", "model_flag", type=click.Path(), default=None)
subset_option = click.option("--subset", type=click.Choice(["all", "agreed", "contested"]),
                             default=None, help="Case subsample to work on.")
mode_option = click.option("--mode", type=click.Choice(["label", "probability"]), default=None,
                           help="Combination mode override.")
exclude_option = click.option("--exclude", type=str, default=None,
                              help="Comma-separated feature names to exclude.")


@click.group()
@click.version_option(version=__version__, prog_name="alipred")
def main():
    """Alimony grant/amount prediction pipeline."""


@main.command()
@config_option
@seed_option
@out_option
def generate(config_path, seed, out_flag):
    """Write a synthetic dataset: CSV, schema sidecar, and ground truth."""

    def body():
        cfg = _resolve(_load_config(config_path), {"seed": seed})
        out = Path(out_flag or cfg["paths"].get("out") or "out")
        synth_cfg = _synthetic_config(cfg)
        dataset = generate_synthetic(synth_cfg)
        out.mkdir(parents=True, exist_ok=True)
        save_dataset(dataset, out / "data.csv", out / "schema.json")
        _write_json(out / "truth.json", dataset.metadata["synthetic_truth"])
        click.echo(f"wrote {out / 'data.csv'} ({len(dataset)} cases), schema.json, truth.json")

    _run(body)


@main.command()
@config_option
@seed_option
@data_option
@schema_option
@out_option
@subset_option
@mode_option
@exclude_option
def train(config_path, seed, data_flag, schema_flag, out_flag, subset, mode, exclude):
    """Train the grant classifier and amount model; write the artifact."""

    def body():
        cfg = _resolve(_load_config(config_path), {"seed": seed, "subset": subset})
        out = Path(out_flag or cfg["paths"].get("out") or "out")
        dataset = _load_filtered(cfg, data_flag, schema_flag, cfg["subset"])
        hconfig = _hurdle_config(cfg, mode=mode, exclude=exclude)
        model = train_hurdle(dataset, hconfig)
        out.mkdir(parents=True, exist_ok=True)
        artifact = _path(cfg, "model", None, default=out / "model.artifact")
        export_model(model, artifact)
        _write_json(out / "training.json", {
            "artifact": Path(artifact).name,
            "fingerprint": model.fingerprint,
            "subset": cfg["subset"],
            **model.training,
        })
        click.echo(f"wrote {artifact} (fingerprint {model.fingerprint[:12]})")

    _run(body)


@main.command()
@config_option
@seed_option
@data_option
@schema_option
@model_option
@out_option
@subset_option
def evaluate(config_path, seed, data_flag, schema_flag, model_flag, out_flag, subset):
    """Compare the four model variants on a held-out split; write reports."""

    def body():
        cfg = _resolve(_load_config(config_path), {"seed": seed, "subset": subset})
        out = Path(out_flag or cfg["paths"].get("out") or "out")
        artifact_path = _path(cfg, "model", model_flag, default=Path(out) / "model.artifact",
                              must_exist=True)
        model = import_model(artifact_path)
        dataset = _load_filtered(cfg, data_flag, schema_flag, cfg["subset"])
        if dataset.schema.fingerprint() != model.fingerprint:
            _fail(EXIT_ARTIFACT, "FINGERPRINT_MISMATCH",
                  "dataset schema does not match the model artifact")
        train_split, test_split = train_test_split(
            dataset, cfg["test_fraction"], cfg["seed"]
        )
        tables = compare_models(train_split, test_split, model.config)
        cls_matrix = model.classifier_encoder.transform(test_split)
        probs = predict_proba_many(model.classifier, cls_matrix.rows)
        cls_report = classification_report(test_split.grant_labels(), probs)
        _write_text(out / "comparison.txt", render_comparison_text(tables))
        _write_json(out / "comparison.json", {
            "tables": [t.to_dict() for t in tables],
            "seed": cfg["seed"],
            "test_fraction": cfg["test_fraction"],
        })
        _write_json(out / "classification.json", cls_report.to_dict())
        click.echo(f"wrote {out / 'comparison.txt'}, comparison.json, classification.json")

    _run(body)


@main.command()
@config_option
@seed_option
@data_option
@schema_option
@out_option
@mode_option
@exclude_option
def audit(config_path, seed, data_flag, schema_flag, out_flag, mode, exclude):
    """Importance ranking, extra-legal flags, with/without retrain deltas."""

    def body():
        cfg = _resolve(_load_config(config_path), {"seed": seed})
        out = Path(out_flag or cfg["paths"].get("out") or "out")
        dataset = _load_filtered(cfg, data_flag, schema_flag, "all")
        hconfig = _hurdle_config(cfg, mode=mode, exclude=exclude)
        acfg = cfg.get("audit") or {}
        report = run_audit(
            dataset, hconfig,
            flag_rank_k=acfg.get("flag_rank_k", 15),
            test_fraction=cfg["test_fraction"],
            seed=cfg["seed"],
        )
        _write_text(out / "audit.txt", render_audit_text(report))
        _write_json(out / "audit.json", report.to_dict())
        click.echo(f"wrote {out / 'audit.txt'}, audit.json")

    _run(body)


@main.command()
@config_option
@model_option
@out_option
@mode_option
@click.argument("case_file", type=click.Path())
def predict(config_path, model_flag, out_flag, mode, case_file):
    """Predict one or more cases from a JSON file of feature maps."""

    def body():
        cfg = _resolve(_load_config(config_path), {})
        out = Path(out_flag or cfg["paths"].get("out") or "out")
        artifact_path = _path(cfg, "model", model_flag, default=Path(out) / "model.artifact",
                              must_exist=True)
        model = import_model(artifact_path)
        case_path = Path(case_file)
        if not case_path.exists():
            _fail(EXIT_USAGE, "FILE_NOT_FOUND", f"case file not found: {case_path}")
        with open(case_path, encoding="utf-8") as fh:
            payload = json.load(fh)
        cases = payload if isinstance(payload, list) else [payload]
        results = []
        for i, values in enumerate(cases):
            breakdown = predict_case(model, values)
            if mode and mode != model.config.combination_mode:
                if mode == "label":
                    adjusted = breakdown.amount_raw if breakdown.grant_label else 0.0
                else:
                    adjusted = breakdown.grant_probability * breakdown.amount_raw
                breakdown = breakdown.__class__(
                    grant_probability=breakdown.grant_probability,
                    grant_label=breakdown.grant_label,
                    amount_raw=breakdown.amount_raw,
                    amount_adjusted=adjusted,
                    clipped=breakdown.clipped,
                )
            results.append(breakdown.to_dict())
        _write_json(out / "predictions.json", results)
        click.echo(json.dumps(results, sort_keys=True, indent=2))

    _run(body)


@main.command("export-plot")
@config_option
@seed_option
@data_option
@schema_option
@model_option
@out_option
def export_plot(config_path, seed, data_flag, schema_flag, model_flag, out_flag):
    """Write (pc1, predicted, actual) triples for external plotting."""

    def body():
        cfg = _resolve(_load_config(config_path), {"seed": seed})
        out = Path(out_flag or cfg["paths"].get("out") or "out")
        artifact_path = _path(cfg, "model", model_flag, default=Path(out) / "model.artifact",
                              must_exist=True)
        model = import_model(artifact_path)
        dataset = _load_filtered(cfg, data_flag, schema_flag, "all")
        if dataset.schema.fingerprint() != model.fingerprint:
            _fail(EXIT_ARTIFACT, "FINGERPRINT_MISMATCH",
                  "dataset schema does not match the model artifact")
        _, test_split = train_test_split(dataset, cfg["test_fraction"], cfg["seed"])
        reg_matrix = model.regressor_encoder.transform(test_split)
        design = reg_matrix.rows[:, list(model.regressor_columns)]
        if design.shape[1] < 2:
            _fail(EXIT_TRAINING, "TOO_FEW_COLUMNS",
                  "need at least 2 regressor columns for the projection")
        predicted = [predict_case(model, r.values).amount_adjusted for r in test_split.records]
        projection = pca_projection(
            design, predicted, test_split.amounts(),
            column_names=[model.regressor.column_names[i]
                          for i in range(design.shape[1])],
        )
        out.mkdir(parents=True, exist_ok=True)
        lines = ["pc1,predicted,actual"]
        lines += [f"{a!r},{b!r},{c!r}" for a, b, c in projection.cases]
        _write_text(out / "pca.csv", "\n".join(lines) + "\n")
        _write_json(out / "pca.json", {
            "explained_variance_ratio": projection.explained_variance_ratio,
            "loadings": list(projection.loadings),
            "columns": list(projection.column_names),
            "dropped_columns": list(projection.dropped_columns),
        })
        click.echo(
            f"wrote {out / 'pca.csv'} "
            f"(first component explains {projection.explained_variance_ratio:.1%})"
        )

    _run(body)


@main.command()
@config_option
@model_option
@click.option("--host", default=None)
@click.option("--port", type=int, default=None)
def serve(config_path, model_flag, host, port):
    """Run the prediction service over the trained artifact."""

    def body():
        import uvicorn

        from .service import create_app

        cfg = _resolve(_load_config(config_path), {})
        artifact_path = _path(cfg, "model", model_flag, default=Path("out") / "model.artifact",
                              must_exist=True)
        app = create_app(model_path=artifact_path)
        service_cfg = cfg.get("service") or {}
        uvicorn.run(
            app,
            host=host or service_cfg.get("host", "127.0.0.1"),
            port=port or service_cfg.get("port", 8000),
            log_level="warning",
        )

    _run(body)


if __name__ == "__main__":
    main()
