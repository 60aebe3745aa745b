"""Design-matrix assembly, per-fold Z-scoring and univariate feature ranking."""

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import network

log = logging.getLogger(__name__)

KINDS = ("graph_measure", "edge", "additional", "nuisance")


@dataclass(frozen=True)
class FeatureSelection:
    edges: bool = False
    graph_measures: tuple = ()
    additional: tuple = ()

    def __post_init__(self):
        if not (self.edges or self.graph_measures or self.additional):
            raise ValueError("feature selection names no source")


@dataclass(frozen=True)
class ThresholdSpec:
    rule: str = "proportional"
    value: float = 1.0
    binarize: bool = True

    @property
    def label(self):
        return f"{self.rule}_{self.value:g}" + ("" if self.binarize else "_w")


@dataclass(frozen=True)
class DesignMatrix:
    X: np.ndarray
    feature_names: tuple
    feature_kind: tuple
    subjects: tuple
    dropped: tuple = ()
    meta: dict = field(default_factory=dict)

    @property
    def p(self):
        return self.X.shape[1]

    def columns(self, kinds):
        return [j for j, k in enumerate(self.feature_kind) if k in kinds]

    def subset(self, cols):
        cols = list(cols)
        return DesignMatrix(self.X[:, cols], tuple(self.feature_names[j] for j in cols),
                            tuple(self.feature_kind[j] for j in cols), self.subjects,
                            self.dropped, self.meta)


def edge_vector(m):
    iu, ju = np.triu_indices(m.shape[0], 1)
    return np.asarray(m)[iu, ju]


def edge_names(labels):
    n = len(labels)
    return [f"edge_{labels[i]}_{labels[j]}" for i in range(n) for j in range(i + 1, n)]


def assemble_design_matrix(cohort, selection, threshold=None, nuisance=()):
    """Concatenate graph measures, raw edges and sheet variables per subject.

    Column blocks appear in the order graph measures, edges, additional
    variables, nuisance variables. Subjects with a missing value in any
    selected sheet column are dropped and reported in ``dropped``.
    """
    data = cohort.data
    if not hasattr(data, "matrices"):
        raise TypeError("cohort payload must be connectivity matrices; summarize time series first")
    labels = data.node_labels
    blocks = []
    names = []
    kinds = []
    meta = {}

    if selection.graph_measures:
        th = threshold or ThresholdSpec()
        rows = []
        gnames = None
        neg = 0
        for m in data.matrices:
            g = network.threshold_matrix(m, th.rule, th.value, th.binarize)
            neg += g.negative_edges_removed
            res = network.graph_measures(g, selection.graph_measures)
            vec = []
            cur = []
            for meas in network.MEASURES:
                if meas not in selection.graph_measures:
                    continue
                v = res[meas]
                if meas in network.NODAL_MEASURES:
                    vec.extend(v)
                    cur.extend(f"{meas}_{lab}" for lab in labels)
                else:
                    vec.append(v)
                    cur.append(meas)
            rows.append(vec)
            gnames = cur
        blocks.append(np.array(rows, dtype=float))
        names += gnames
        kinds += ["graph_measure"] * len(gnames)
        meta["threshold"] = th.label
        meta["negative_edges_removed"] = neg

    if selection.edges:
        blocks.append(np.array([edge_vector(m) for m in data.matrices]))
        en = edge_names(labels)
        names += en
        kinds += ["edge"] * len(en)

    sheet = cohort.sheet
    for kind, cols in (("additional", selection.additional), ("nuisance", tuple(nuisance))):
        for c in cols:
            col = sheet.column(c)
            blocks.append(col.encoded()[:, None])
            names.append(c)
            kinds.append(kind)
            if col.kind == "binary":
                meta.setdefault("encodings", {})[c] = {col.levels[0]: -1, col.levels[1]: 1}

    if len(set(names)) != len(names):
        raise ValueError("duplicate feature names in design matrix")
    X = np.hstack(blocks)
    bad = ~np.all(np.isfinite(X), axis=1)
    dropped = []
    for i in np.flatnonzero(bad):
        s = cohort.subjects[i]
        miss = [names[j] for j in np.flatnonzero(~np.isfinite(X[i]))]
        dropped.append((s, "missing " + ",".join(miss)))
        log.info("dropping subject %s: missing %s", s, miss)
    if bad.all():
        raise ValueError("all subjects dropped for missing values")
    subjects = tuple(s for s, b in zip(cohort.subjects, bad) if not b)
    return DesignMatrix(X[~bad], tuple(names), tuple(kinds), subjects, tuple(dropped), meta)


def outcome_vector(sheet, name, subjects, task):
    """Outcome aligned to ``subjects``. Classification targets come back as -1/+1.

    Binary categorical columns map their first-seen label to -1. A numeric
    column with exactly two distinct values maps the smaller one to -1.
    Returns ``(y, encoding)``.
    """
    col = sheet.column(name)
    idx = [sheet.subjects.index(s) for s in subjects]
    if task == "classification":
        if col.kind == "binary":
            y = col.encoded()[idx]
            return y, {col.levels[0]: -1, col.levels[1]: 1}
        vals = np.asarray(col.values, dtype=float)[idx]
        levels = np.unique(vals)
        if len(levels) != 2:
            raise ValueError(f"outcome {name!r} is continuous; classification needs two classes")
        return np.where(vals == levels[0], -1.0, 1.0), {repr(float(levels[0])): -1,
                                                         repr(float(levels[1])): 1}
    if col.kind != "continuous":
        raise ValueError(f"outcome {name!r} is categorical; regression needs a continuous outcome")
    return np.asarray(col.values, dtype=float)[idx], None


@dataclass(frozen=True)
class Scaler:
    means: np.ndarray
    stds: np.ndarray
    constant_mask: np.ndarray


def fit_scaler(X_train):
    X_train = np.asarray(X_train, dtype=float)
    if X_train.shape[0] < 2:
        raise ValueError("scaler needs at least two training rows")
    means = X_train.mean(axis=0)
    stds = X_train.std(axis=0, ddof=1)
    const = ~(stds > 0)
    if const.any():
        log.debug("%d zero-variance training features map to 0", int(const.sum()))
    stds = np.where(const, 1.0, stds)
    return Scaler(means, stds, const)


def apply_scaler(s, X):
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != len(s.means):
        raise ValueError(f"expected {len(s.means)} columns, got {X.shape[-1]}")
    Z = (X - s.means) / s.stds
    Z[:, s.constant_mask] = 0.0
    return Z


@dataclass(frozen=True)
class FeatureRanking:
    scores: np.ndarray
    order: np.ndarray


def abs_correlation(X, y):
    """|Pearson r| of each column with ``y``; zero-variance columns give 0."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    yc = y - y.mean()
    Xc = X - X.mean(axis=0)
    sx = np.sqrt((Xc ** 2).sum(axis=0))
    sy = math.sqrt(float(yc @ yc))
    num = Xc.T @ yc
    out = np.zeros(X.shape[1])
    ok = sx > 1e-12 * max(1.0, float(np.abs(X).max(initial=0.0)))
    out[ok] = np.abs(num[ok]) / (sx[ok] * sy)
    return np.minimum(out, 1.0)


def rank_features(X, y, task="classification"):
    y = np.asarray(y, dtype=float)
    if np.all(y == y[0]):
        raise ValueError("cannot rank features against a constant outcome")
    scores = abs_correlation(X, y)
    order = np.lexsort((np.arange(len(scores)), -scores))
    return FeatureRanking(scores, order)


def select_top_fraction(r, t):
    if not 0 < t <= 1:
        raise ValueError("feature fraction must be in (0, 1]")
    k = math.ceil(t * len(r.order) - 1e-12)
    return np.sort(r.order[:max(k, 1)])
