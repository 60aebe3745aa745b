"""Performance metrics over pooled out-of-fold predictions.

Ratios that evaluate to 0/0 are returned as ``None`` ("undefined"), never
as 0, so degenerate results stay visible in reports.
"""

import math
from dataclasses import asdict, dataclass

import numpy as np

_trapz = getattr(np, "trapezoid", None) or np.trapz


@dataclass(frozen=True)
class ConfusionMatrix:
    TP: int
    FP: int
    FN: int
    TN: int

    @property
    def n(self):
        return self.TP + self.FP + self.FN + self.TN


@dataclass(frozen=True)
class ClassificationMetrics:
    accuracy: float
    error: float
    precision: float
    recall: float
    specificity: float
    f1: float
    mcc: float
    roc_auc: float = None
    pr_auc: float = None

    def as_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class RegressionMetrics:
    r_squared: float
    rae: float
    rmse: float
    nrmse: float
    rse: float
    mae: float

    def as_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class Curve:
    kind: str
    x: np.ndarray
    y: np.ndarray
    thresholds: np.ndarray  # one per point; +inf for the origin point
    auc: float


def _ratio(a, b):
    return a / b if b else None


def confusion_matrix(actual, predicted):
    actual = np.asarray(actual)
    predicted = np.asarray(predicted)
    if actual.shape != predicted.shape:
        raise ValueError("actual and predicted lengths differ")
    pos = actual > 0
    ppos = predicted > 0
    return ConfusionMatrix(int(np.sum(pos & ppos)), int(np.sum(~pos & ppos)),
                           int(np.sum(pos & ~ppos)), int(np.sum(~pos & ~ppos)))


def classification_metrics(cm, roc_auc=None, pr_auc=None):
    n = cm.n
    if n == 0:
        raise ValueError("empty confusion matrix")
    tp, fp, fn, tn = cm.TP, cm.FP, cm.FN, cm.TN
    acc = (tp + tn) / n
    precision = _ratio(tp, tp + fp)
    recall = _ratio(tp, tp + fn)
    spec = _ratio(tn, tn + fp)
    if precision is None or recall is None:
        f1 = None
    else:
        f1 = _ratio(2 * precision * recall, precision + recall)
    denom = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn)
    mcc = (tp * tn - fp * fn) / math.sqrt(denom) if denom else 0.0
    return ClassificationMetrics(acc, 1.0 - acc, precision, recall, spec, f1, mcc, roc_auc, pr_auc)


def _threshold_counts(actual, scores):
    """Cumulative (TP, FP) at each distinct score, highest first, starting from (0, 0)."""
    actual = np.asarray(actual)
    scores = np.asarray(scores, dtype=float)
    pos = actual > 0
    n_pos = int(pos.sum())
    n_neg = len(pos) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("curve needs both classes")
    order = np.argsort(-scores, kind="stable")
    s = scores[order]
    p = pos[order]
    tps = np.cumsum(p)
    fps = np.cumsum(~p)
    last = np.r_[np.flatnonzero(np.diff(s) != 0), len(s) - 1]
    tp = np.r_[0, tps[last]]
    fp = np.r_[0, fps[last]]
    thr = np.r_[np.inf, s[last]]
    return tp, fp, thr, n_pos, n_neg


def roc_curve(actual, scores):
    """Pooled ROC; one point per distinct score, tied scores moving diagonally."""
    tp, fp, thr, n_pos, n_neg = _threshold_counts(actual, scores)
    fpr = fp / n_neg
    tpr = tp / n_pos
    return Curve("roc", fpr, tpr, thr, float(_trapz(tpr, fpr)))


def pr_curve(actual, scores):
    """Precision-recall curve; precision is 1 at the zero-predicted-positives point."""
    tp, fp, thr, n_pos, _ = _threshold_counts(actual, scores)
    recall = tp / n_pos
    called = tp + fp
    precision = np.where(called > 0, tp / np.maximum(called, 1), 1.0)
    return Curve("pr", recall, precision, thr, float(_trapz(precision, recall)))


def mann_whitney_auc(actual, scores):
    """U / (n+ n-) with ties counted one half, computed from midranks."""
    actual = np.asarray(actual)
    scores = np.asarray(scores, dtype=float)
    pos = actual > 0
    n_pos = int(pos.sum())
    n_neg = len(pos) - n_pos
    ranks = midranks(scores)
    u = ranks[pos].sum() - n_pos * (n_pos + 1) / 2
    return u / (n_pos * n_neg)


def midranks(x):
    x = np.asarray(x, dtype=float)
    order = np.argsort(x, kind="stable")
    ranks = np.empty(len(x))
    xs = x[order]
    i = 0
    while i < len(x):
        j = i
        while j + 1 < len(x) and xs[j + 1] == xs[i]:
            j += 1
        ranks[order[i:j + 1]] = (i + j) / 2 + 1
        i = j + 1
    return ranks


def regression_metrics(y, yhat):
    y = np.asarray(y, dtype=float)
    yhat = np.asarray(yhat, dtype=float)
    if y.shape != yhat.shape:
        raise ValueError("y and yhat lengths differ")
    if len(y) < 2:
        raise ValueError("need at least two observations")
    err = y - yhat
    ss_res = float(err @ err)
    dev = y - y.mean()
    ss_tot = float(dev @ dev)
    abs_tot = float(np.abs(dev).sum())
    rng = float(y.max() - y.min())
    rmse = math.sqrt(ss_res / len(y))
    rse = _ratio(ss_res, ss_tot)
    return RegressionMetrics(
        r_squared=None if rse is None else 1.0 - rse,
        rae=_ratio(float(np.abs(err).sum()), abs_tot),
        rmse=rmse,
        nrmse=_ratio(rmse, rng),
        rse=rse,
        mae=float(np.abs(err).mean()),
    )


def standardized_residuals(y, yhat):
    r = np.asarray(y, dtype=float) - np.asarray(yhat, dtype=float)
    if len(r) < 2:
        raise ValueError("need at least two residuals")
    sd = r.std(ddof=1)
    if sd == 0:
        raise ValueError("residuals have zero variance")
    return (r - r.mean()) / sd
