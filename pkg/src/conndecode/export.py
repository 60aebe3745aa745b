"""CSV export of a ResultBundle.

Numbers are written as the shortest decimal that round-trips (``repr``);
undefined values as ``undefined``.
"""

import csv
import math
from pathlib import Path

import numpy as np
import yaml

UNDEFINED = "undefined"


class ExportError(OSError):
    pass


def fmt(v):
    if v is None:
        return UNDEFINED
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return UNDEFINED
        return repr(v)
    return str(v)


def write_csv(path, header, rows):
    try:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for r in rows:
                w.writerow([fmt(v) for v in r])
    except OSError as exc:
        raise ExportError(f"cannot write {path}: {exc}") from exc
    return path


def entry_dir(root, entry):
    safe = "".join(c if c.isalnum() or c in "-_." else "_" for c in entry.outcome)
    return Path(root) / safe / entry.label


def _metric_rows(model, summary, cm):
    rows = []
    if cm is not None:
        for k in ("TP", "FP", "FN", "TN"):
            v = getattr(cm, k)
            rows.append((model, k, v))
            rows.append((model, f"{k}_percent", 100.0 * v / cm.n))
    for k, v in summary.as_dict().items():
        rows.append((model, k, v))
    return rows


def metrics_rows(e):
    rows = _metric_rows("full", e.summary, e.confusion)
    if e.auc_parametric_p is not None:
        rows.append(("full", "roc_auc_parametric_p", e.auc_parametric_p))
    if e.permutation is not None:
        m = e.permutation.null.metric
        rows.append(("full", f"{m}_permutation_p", e.permutation_p))
    if e.nuisance_summary is not None:
        rows += _metric_rows("nuisance", e.nuisance_summary, e.nuisance_confusion)
        if e.permutation is not None:
            rows.append(("nuisance", f"{e.permutation.null.metric}_permutation_p",
                         e.nuisance_permutation_p))
    return rows


def export_entry(e, d):
    d.mkdir(parents=True, exist_ok=True)
    written = []
    cv = e.cv
    written.append(write_csv(d / "metrics.csv", ["model", "metric", "value"], metrics_rows(e)))

    head = ["subject", "fold", "actual", "decision_value", "predicted"]
    cols = [cv.subjects, cv.fold, cv.actual, cv.decision, cv.predicted]
    if e.nuisance_cv is not None:
        head += ["nuisance_decision_value", "nuisance_predicted"]
        cols += [e.nuisance_cv.decision, e.nuisance_cv.predicted]
    written.append(write_csv(d / "predictions.csv", head, zip(*cols)))

    w = e.weights
    head = ["name", "weight", "parametric_p", "permutation_p", "corrected_p", "significant"]
    extra = sorted(w.extra_significant)
    head += [f"significant_at_{a!r}" for a in extra]
    rows = []
    for j, name in enumerate(w.names):
        rows.append([name, w.weights[j], w.parametric_p[j],
                     None if w.permutation_p is None else w.permutation_p[j],
                     w.corrected_p[j], bool(w.significant[j])]
                    + [bool(w.extra_significant[a][j]) for a in extra])
    written.append(write_csv(d / "weights.csv", head, rows))
    written.append(write_csv(
        d / "weights_per_fold.csv", ["name"] + [f"fold_{f + 1}" for f in range(cv.k)],
        ([name] + list(w.per_fold[:, j]) for j, name in enumerate(w.names))))

    rows = []
    for f, (params, cols_sel, model) in enumerate(zip(cv.winners, cv.selected, cv.models), 1):
        names = [e.design.feature_names[j] for j in cols_sel]
        rows += [(f, n, v) for n, v in zip(names, model.w)]
        rows.append((f, "(intercept)", model.b))
    written.append(write_csv(d / "model_weights.csv", ["fold", "feature", "weight"], rows))

    learner = e.cv.models[0].learner
    rows = []
    for f in range(1, cv.k + 1):
        test = cv.fold == f
        rows.append((f, int((~test).sum()), int(test.sum()), cv.winners[f - 1].describe(learner),
                     len(cv.selected[f - 1])))
    written.append(write_csv(d / "folds.csv",
                             ["fold", "n_train", "n_test", "hyperparameters", "n_features"], rows))

    if e.permutation is not None:
        p = e.permutation
        head = ["permutation", p.null.metric]
        if p.nuisance_null is not None:
            head.append(f"nuisance_{p.null.metric}")
        head += [f"w_{n}" for n in w.names]
        rows = []
        for b in range(len(p.null.samples)):
            r = [b + 1, p.null.samples[b]]
            if p.nuisance_null is not None:
                r.append(p.nuisance_null.samples[b])
            rows.append(r + list(p.null_weights[b]))
        written.append(write_csv(d / "null_distribution.csv", head, rows))

    if e.task == "classification":
        for c in (e.roc, e.pr):
            written.append(write_csv(d / f"{c.kind}.csv", ["threshold", "x", "y"],
                                     zip(c.thresholds, c.x, c.y)))
    else:
        resid = e.residuals if e.residuals is not None else [None] * len(cv.actual)
        written.append(write_csv(d / "residuals.csv",
                                 ["subject", "actual", "predicted", "residual", "standardized"],
                                 zip(cv.subjects, cv.actual, cv.predicted,
                                     cv.actual - cv.predicted, resid)))
    return written


def export_results(bundle, directory):
    """Write every entry's CSVs plus the config snapshot and run metadata."""
    root = Path(directory)
    try:
        root.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ExportError(f"cannot create {root}: {exc}") from exc
    written = []
    for e in bundle.entries:
        if e.ok:
            written += export_entry(e, entry_dir(root, e))
    snap = root / "config_snapshot.yaml"
    snap.write_text(yaml.safe_dump(bundle.config, sort_keys=False))
    meta = root / "run_metadata.yaml"
    body = dict(bundle.metadata)
    body["entries"] = [dict(x, dropped=[list(d) for d in e.dropped], encoding=e.encoding)
                       for x, e in zip(bundle.metadata.get("entries", []), bundle.entries)]
    meta.write_text(yaml.safe_dump(body, sort_keys=False))
    return written + [snap, meta]
