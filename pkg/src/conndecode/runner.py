"""Batch execution of a RunConfig over its outcome queue and threshold sweep."""

import logging
import platform
import time
from dataclasses import dataclass, field

import numpy as np

from . import __version__, features, ingest, metrics, network, significance, validation
from .config import ConfigError

log = logging.getLogger(__name__)


@dataclass
class EntryResult:
    outcome: str
    threshold: object  # ThresholdSpec or None
    task: str
    label: str
    design: features.DesignMatrix = None
    y: np.ndarray = None
    encoding: dict = None
    cv: validation.CVResult = None
    nuisance_cv: validation.CVResult = None
    summary: object = None  # ClassificationMetrics or RegressionMetrics
    nuisance_summary: object = None
    confusion: metrics.ConfusionMatrix = None
    nuisance_confusion: metrics.ConfusionMatrix = None
    roc: metrics.Curve = None
    pr: metrics.Curve = None
    auc_parametric_p: float = None
    permutation: significance.PermutationResult = None
    permutation_p: float = None
    nuisance_permutation_p: float = None
    weights: significance.FeatureWeightReport = None
    residuals: np.ndarray = None
    dropped: tuple = ()
    error: str = None
    seconds: float = 0.0

    @property
    def ok(self):
        return self.error is None


@dataclass
class ResultBundle:
    entries: list
    config: dict
    metadata: dict = field(default_factory=dict)

    @property
    def failed(self):
        return [e for e in self.entries if not e.ok]


def threshold_label(th):
    return "raw" if th is None else th.label


def load_data(cfg):
    labels = ingest.read_node_labels(cfg.data.node_labels) if cfg.data.node_labels else None
    dyn = cfg.dynamic()
    if dyn is None:
        data = ingest.load_connectivity_set(cfg.data.manifest, labels)
    else:
        ts = ingest.load_time_series_set(cfg.data.manifest, labels)
        data = network.dynamic_connectivity(ts, dyn)
    sheet = ingest.load_variable_sheet(cfg.data.variables)
    return data, sheet


def check_outcomes(cfg, sheet):
    """Fail before any computation if an outcome does not suit the learner's task."""
    task = cfg.model_spec().task
    for name in cfg.outcomes:
        if name not in sheet.columns:
            raise ConfigError(f"outcome {name!r} is not a variable sheet column")
        col = sheet.columns[name]
        if task == "regression" and col.kind != "continuous":
            raise ConfigError(f"outcome {name!r} is categorical but {cfg.model.learner} regresses")
        if task == "classification" and col.kind == "continuous":
            levels = {v for v in col.values if v == v}
            if len(levels) != 2:
                raise ConfigError(f"outcome {name!r} is continuous but {cfg.model.learner} classifies")
    for name in cfg.features.additional + cfg.features.nuisance:
        if name not in sheet.columns:
            raise ConfigError(f"feature column {name!r} is not a variable sheet column")


def evaluate_entry(dm, y, spec, sig, workers=1, entry=None):
    """CV, metrics and significance for one design matrix; fills ``entry``."""
    task = spec.task
    nuis_cols = dm.columns(("nuisance",))
    folds = validation.make_folds(y, spec.cv.k_folds, task, spec.cv.seed)
    if nuis_cols:
        cv, ncv = validation.run_with_nuisance(dm, y, spec, folds=folds)
    else:
        cv = validation.run_cross_validation(dm, y, spec, folds=folds)
        ncv = None
    entry.cv, entry.nuisance_cv = cv, ncv

    if task == "classification":
        entry.roc = metrics.roc_curve(y, cv.decision)
        entry.pr = metrics.pr_curve(y, cv.decision)
        entry.confusion = metrics.confusion_matrix(y, cv.predicted)
        entry.summary = metrics.classification_metrics(entry.confusion, entry.roc.auc, entry.pr.auc)
        entry.auc_parametric_p = significance.parametric_auc_p(y, cv.decision)
        if ncv is not None:
            entry.nuisance_confusion = metrics.confusion_matrix(y, ncv.predicted)
            entry.nuisance_summary = metrics.classification_metrics(
                entry.nuisance_confusion, metrics.roc_curve(y, ncv.decision).auc,
                metrics.pr_curve(y, ncv.decision).auc)
    else:
        entry.summary = metrics.regression_metrics(y, cv.predicted)
        try:
            entry.residuals = metrics.standardized_residuals(y, cv.predicted)
        except ValueError as exc:
            log.warning("residuals unavailable: %s", exc)
        if ncv is not None:
            entry.nuisance_summary = metrics.regression_metrics(y, ncv.predicted)

    perm = None
    if sig.n_permutations > 0:
        perm = significance.permutation_test(dm, y, spec, sig, observed=cv,
                                             nuisance_cols=nuis_cols or None, workers=workers)
        tail = significance.DEFAULT_TAIL[perm.null.metric]
        entry.permutation = perm
        entry.permutation_p = significance.permutation_p(perm.null.observed, perm.null, tail)
        if ncv is not None:
            perm.nuisance_null.observed = significance.model_metric(ncv, perm.null.metric)
            entry.nuisance_permutation_p = significance.permutation_p(
                perm.nuisance_null.observed, perm.nuisance_null, tail)
    entry.weights = significance.weight_report(cv, dm, sig, perm)
    return entry


def run_config(cfg):
    """Run every (outcome, threshold) pair in queue order.

    A failing entry is recorded with its error and the rest continue.
    """
    t0 = time.perf_counter()
    spec = cfg.model_spec()
    sig = cfg.significance_config()
    sig.metric_for(spec.task)
    data, sheet = load_data(cfg)
    check_outcomes(cfg, sheet)
    selection = cfg.selection()
    entries = []
    for outcome in cfg.outcomes:
        for th in cfg.threshold_specs():
            label = threshold_label(th)
            entry = EntryResult(outcome, th, spec.task, label)
            t1 = time.perf_counter()
            try:
                cohort = ingest.align_subjects(data, sheet, outcome)
                dm = features.assemble_design_matrix(cohort, selection, th, cfg.features.nuisance)
                y, enc = features.outcome_vector(cohort.sheet, outcome, dm.subjects, spec.task)
                entry.design, entry.y, entry.encoding = dm, y, enc
                entry.dropped = cohort.dropped + dm.dropped
                evaluate_entry(dm, y, spec, sig, cfg.workers, entry)
            except Exception as exc:  # queue isolation: record and continue
                log.error("%s / %s failed: %s", outcome, label, exc)
                entry.error = f"{type(exc).__name__}: {exc}"
            entry.seconds = time.perf_counter() - t1
            entries.append(entry)
    meta = {
        "version": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "seeds": {"global": cfg.seed, "cv": spec.cv.seed, "permutation": sig.seed},
        "seconds": time.perf_counter() - t0,
        "entries": [{"outcome": e.outcome, "threshold": e.label, "ok": e.ok, "error": e.error,
                     "seconds": e.seconds} for e in entries],
    }
    return ResultBundle(entries, cfg.snapshot(), meta)
