"""Extra-legal-factor audit.

Trains the model twice: once with the schema's extra-legal features included
(baseline) and once without them (clean), ranks the baseline's importances,
flags extra-legal features appearing in the top ranks, and reports metric
deltas on a held-out split. Flagging is rank-based, not threshold-based:
importance magnitudes are only comparable within one fitted model. The audit
reports both models rather than deciding; the actual exclusion stays a
configuration act.
"""

from dataclasses import dataclass, replace

import numpy as np

from . import forest as rf
from .data import train_test_split
from .evaluation import classification_report
from .hurdle import predict_case, train_hurdle


@dataclass(frozen=True)
class AuditMetrics:
    accuracy: float
    auc: float
    median_ae: float

    def to_dict(self):
        return {"accuracy": self.accuracy, "auc": self.auc, "median_ae": self.median_ae}


@dataclass(frozen=True)
class AuditReport:
    ranking: tuple          # ImportanceEntry list from the baseline classifier
    flagged: tuple          # (feature, rank, score) for extra-legal in top k
    extra_legal: tuple
    flag_rank_k: int
    baseline: AuditMetrics
    clean: AuditMetrics     # None when the audit degenerates
    deltas: dict            # clean minus baseline
    notes: tuple

    def to_dict(self):
        return {
            "ranking": [
                {"feature": e.feature, "score": e.score, "method": e.method}
                for e in self.ranking
            ],
            "flagged": [
                {"feature": f, "rank": r, "score": s} for f, r, s in self.flagged
            ],
            "extra_legal": list(self.extra_legal),
            "flag_rank_k": self.flag_rank_k,
            "baseline": self.baseline.to_dict() if self.baseline else None,
            "clean": self.clean.to_dict() if self.clean else None,
            "deltas": dict(self.deltas),
            "notes": list(self.notes),
        }


def importance_table(model, top_n=15):
    """(feature, score) pairs, highest first; ties break by feature name."""
    entries = rf.importance(model.classifier, method="frequency_weighted")
    return [(e.feature, e.score) for e in entries[:top_n]]


def _strip(names, drop):
    return tuple(n for n in names if n not in drop) or None


def _audit_config(config, excluded):
    """Rebuild the hurdle config with the given exclusion set, removing the
    newly excluded names from any explicit feature list."""
    excluded = tuple(sorted(excluded))
    cls = config.classifier_features
    reg = config.regressor_features
    if cls is not None:
        cls = _strip(cls, set(excluded))
    if reg is not None:
        reg = _strip(reg, set(excluded))
    return replace(
        config,
        classifier_features=cls,
        regressor_features=reg,
        excluded_features=excluded,
    )


def _evaluate(model, test):
    breakdowns = [predict_case(model, r.values) for r in test.records]
    labels = test.grant_labels()
    probs = np.array([b.grant_probability for b in breakdowns])
    adjusted = np.array([b.amount_adjusted for b in breakdowns])
    report = classification_report(labels, probs)
    median_ae = float(np.median(np.abs(test.amounts() - adjusted)))
    return AuditMetrics(accuracy=report.accuracy, auc=report.auc, median_ae=median_ae)


def run_audit(dataset, config, flag_rank_k=15, test_fraction=0.25, seed=0):
    """Rank importances, flag extra-legal features, retrain without them.

    With no extra-legal features in the schema the audit degenerates: it
    still emits the baseline ranking and metrics, with an explanatory note.
    """
    extra_legal = dataset.schema.extra_legal_names()
    notes = []
    train, test = train_test_split(dataset, test_fraction, seed)

    non_extra_exclusions = set(config.excluded_features) - set(extra_legal)
    baseline_config = _audit_config(config, non_extra_exclusions)
    baseline_model = train_hurdle(train, baseline_config)
    ranking = tuple(rf.importance(baseline_model.classifier, "frequency_weighted"))
    baseline_metrics = _evaluate(baseline_model, test)

    if not extra_legal:
        notes.append(
            "schema marks no feature as extra_legal; audit degenerates to the "
            "importance ranking of the full model"
        )
        return AuditReport(
            ranking=ranking,
            flagged=(),
            extra_legal=(),
            flag_rank_k=flag_rank_k,
            baseline=baseline_metrics,
            clean=None,
            deltas={},
            notes=tuple(notes),
        )

    flagged = []
    for rank, entry in enumerate(ranking, start=1):
        if rank > flag_rank_k:
            break
        if entry.feature in extra_legal:
            flagged.append((entry.feature, rank, entry.score))

    clean_config = _audit_config(
        config, set(config.excluded_features) | set(extra_legal)
    )
    clean_model = train_hurdle(train, clean_config)
    clean_metrics = _evaluate(clean_model, test)
    deltas = {
        "accuracy": clean_metrics.accuracy - baseline_metrics.accuracy,
        "auc": (clean_metrics.auc - baseline_metrics.auc)
        if clean_metrics.auc is not None and baseline_metrics.auc is not None else None,
        "median_ae": clean_metrics.median_ae - baseline_metrics.median_ae,
    }
    if not flagged:
        notes.append(
            f"no extra-legal feature ranked in the top {flag_rank_k} of the "
            "baseline importance ranking"
        )
    return AuditReport(
        ranking=ranking,
        flagged=tuple(flagged),
        extra_legal=extra_legal,
        flag_rank_k=flag_rank_k,
        baseline=baseline_metrics,
        clean=clean_metrics,
        deltas=deltas,
        notes=tuple(notes),
    )


def render_audit_text(report, top_n=15):
    lines = ["importance ranking (frequency-weighted, baseline model)"]
    lines.append(f"{'rank':>4}  {'feature':<34}{'score':>12}  role")
    extra = set(report.extra_legal)
    for rank, entry in enumerate(report.ranking[:top_n], start=1):
        role = "extra-legal" if entry.feature in extra else "legal"
        lines.append(f"{rank:>4}  {entry.feature:<34}{entry.score:>12.6f}  {role}")
    lines.append("")
    if report.flagged:
        lines.append(f"flagged extra-legal features (top {report.flag_rank_k}):")
        for feature, rank, score in report.flagged:
            lines.append(f"  rank {rank}: {feature} (score {score:.6f})")
    else:
        lines.append("flagged extra-legal features: none")
    lines.append("")
    lines.append(f"{'metric':<12}{'baseline':>12}{'clean':>12}{'delta':>12}")
    if report.clean is not None:
        for key in ("accuracy", "auc", "median_ae"):
            b = getattr(report.baseline, key)
            c = getattr(report.clean, key)
            d = report.deltas.get(key)
            fmt = (lambda v: f"{v:>12.4f}" if v is not None else f"{'n/a':>12}")
            lines.append(f"{key:<12}{fmt(b)}{fmt(c)}{fmt(d)}")
    else:
        for key in ("accuracy", "auc", "median_ae"):
            b = getattr(report.baseline, key)
            bs = f"{b:.4f}" if b is not None else "n/a"
            lines.append(f"{key:<12}{bs:>12}{'n/a':>12}{'n/a':>12}")
    for note in report.notes:
        lines.append("")
        lines.append(f"note: {note}")
    lines.append("")
    return "\n".join(lines)
