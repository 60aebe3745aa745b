"""K-fold and nested cross-validation with per-fold scaling.

Layout of a nested run, for each outer fold:

1. split into outer-train T and outer-test S;
2. Z-score with statistics from T only;
3. choose hyperparameters: fixed ones if given, otherwise a grid search by
   K-fold CV inside T (the middle loop), where each middle fold optionally
   ranks features on its own training split and keeps the top fraction;
4. with the winning hyperparameters re-rank on T, train on T and predict S.
"""

import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import features, learners
from .learners import HyperParams, SolverOptions
from .rng import SplitMix64, derive_seed

log = logging.getLogger(__name__)


class CVError(RuntimeError):
    pass


@dataclass(frozen=True)
class CVConfig:
    k_folds: int = 5
    nested: bool = False
    grid_steps: int = 3
    feature_fraction: float = None
    seed: int = 0
    manual_params: HyperParams = None

    def __post_init__(self):
        if self.k_folds < 2:
            raise ValueError("k_folds must be >= 2")
        if self.nested and self.grid_steps < 2:
            raise ValueError("grid_steps must be >= 2")
        if self.feature_fraction is not None and not 0 < self.feature_fraction <= 1:
            raise ValueError("feature_fraction must be in (0, 1]")


@dataclass(frozen=True)
class ModelSpec:
    learner: str
    cv: CVConfig = CVConfig()
    default_params: HyperParams = HyperParams()
    solver: SolverOptions = SolverOptions()

    @property
    def task(self):
        return learners.task_of(self.learner)

    @property
    def searches(self):
        return self.cv.nested and self.cv.manual_params is None


@dataclass
class CVResult:
    subjects: tuple
    actual: np.ndarray
    decision: np.ndarray
    predicted: np.ndarray
    fold: np.ndarray  # 1-based outer fold per subject
    winners: list
    selected: list
    models: list
    scalers: list
    grid_scores: list = field(default_factory=list)
    feature_names: tuple = ()

    @property
    def k(self):
        return len(self.models)


def make_folds(y, k, task, seed):
    """Seeded shuffle, then round-robin dealing into k folds (within class when classifying).

    Returns an int array of 1-based fold ids.
    """
    y = np.asarray(y)
    n = len(y)
    if k < 2:
        raise ValueError("K must be >= 2")
    if k > n:
        raise ValueError(f"K={k} exceeds sample count {n}")
    perm = SplitMix64(seed).permutation(n)
    if task == "classification":
        order = []
        for cls in np.unique(y):
            members = [i for i in perm if y[i] == cls]
            if len(members) < k:
                raise ValueError(f"class {cls:g} has {len(members)} members, fewer than K={k}")
            order.extend(members)
    else:
        order = perm
    folds = np.empty(n, dtype=int)
    for pos, i in enumerate(order):
        folds[i] = pos % k + 1
    return folds


def _logspace(lo, hi, n):
    return [float(10.0 ** e) for e in np.linspace(lo, hi, n)]


def hyperparameter_grid(learner, n_steps, base=HyperParams()):
    """Grid ordered from strongest to weakest regularization.

    C and lambda: even log10 steps over [1e-2, 1e3]; alpha: even steps over
    [0, 1]; nu: 1/N, 2/N, ..., 1.
    """
    if n_steps < 2:
        raise ValueError("grid needs N >= 2")
    if learner == "svc":
        return [replace(base, C=c) for c in _logspace(-2, 3, n_steps)]
    if learner == "svr":
        return [replace(base, nu=i / n_steps) for i in range(1, n_steps + 1)]
    if learner in ("enet_regression", "enet_classifier"):
        alphas = [float(a) for a in np.linspace(0.0, 1.0, n_steps)]
        lams = _logspace(-2, 3, n_steps)[::-1]
        return [replace(base, alpha=a, lam=lam) for lam in lams for a in alphas]
    raise ValueError(f"unknown learner {learner!r}")


def _score(task, y, pred):
    if task == "classification":
        return float(np.mean(pred == y))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if ss_tot == 0:
        return -math.inf
    return 1.0 - float(np.sum((y - pred) ** 2)) / ss_tot


def _select(Xs, y, spec):
    t = spec.cv.feature_fraction
    if t is None:
        return np.arange(Xs.shape[1])
    ranking = features.rank_features(Xs, y, spec.task)
    return features.select_top_fraction(ranking, t)


def _middle_k(y_train, k, task):
    n = len(y_train)
    if task == "classification":
        counts = [int(np.sum(y_train == c)) for c in np.unique(y_train)]
        if len(counts) < 2:
            raise CVError("outer training split holds a single class")
        # every middle training split keeps >= 2 per class: (k-1)/k * c >= 2
        km = min(k, min(counts))
        while km > 2 and min(c - math.ceil(c / km) for c in counts) < 2:
            km -= 1
        return km
    return min(k, n)


def grid_search(X, y, spec, seed, grid=None):
    """Middle loop: K-fold CV over the grid inside a training split.

    Returns (winning params, list of pooled scores per grid point).
    """
    task = spec.task
    grid = grid or hyperparameter_grid(spec.learner, spec.cv.grid_steps, spec.default_params)
    km = _middle_k(y, spec.cv.k_folds, task)
    folds = make_folds(y, km, task, seed)
    preds = np.full((len(grid), len(y)), np.nan)
    used = np.zeros(len(y), dtype=bool)
    for f in range(1, km + 1):
        tr = folds != f
        te = ~tr
        if task == "classification" and len(np.unique(y[tr])) < 2:
            log.warning("middle fold %d has a single class; skipped", f)
            continue
        sc = features.fit_scaler(X[tr])
        Xtr = features.apply_scaler(sc, X[tr])
        Xte = features.apply_scaler(sc, X[te])
        cols = _select(Xtr, y[tr], spec)
        for g, params in enumerate(grid):
            try:
                m = learners.train(spec.learner, Xtr[:, cols], y[tr], params, spec.solver)
            except ValueError as exc:
                raise CVError(f"middle fold {f}, grid point {g} ({params}): {exc}") from exc
            preds[g, te] = learners.predict(m, Xte[:, cols])[1]
        used |= te
    if not used.any():
        raise CVError("every middle fold was degenerate")
    scores = [_score(task, y[used], preds[g, used]) for g in range(len(grid))]
    best = int(np.argmax(scores))  # first maximum = lowest grid index
    return grid[best], scores


def run_cross_validation(X, y, spec, subjects=None, fold_params=None, folds=None):
    """Outer K-fold loop with optional middle grid search and feature selection.

    ``X`` may be a DesignMatrix or an array. ``fold_params`` (one HyperParams
    per outer fold) bypasses the middle loop; ``folds`` overrides the fold
    assignment.
    """
    names = ()
    if isinstance(X, features.DesignMatrix):
        subjects = subjects or X.subjects
        names = X.feature_names
        X = X.X
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n = len(y)
    if X.shape[0] != n:
        raise ValueError("X and y disagree on sample count")
    subjects = tuple(subjects) if subjects is not None else tuple(str(i) for i in range(n))
    task = spec.task
    cv = spec.cv
    if folds is None:
        folds = make_folds(y, cv.k_folds, task, cv.seed)
    k = int(folds.max())

    decision = np.empty(n)
    predicted = np.empty(n)
    winners, selected, models, scalers, grid_scores = [], [], [], [], []
    for f in range(1, k + 1):
        tr = folds != f
        te = ~tr
        sc = features.fit_scaler(X[tr])
        Xtr = features.apply_scaler(sc, X[tr])
        Xte = features.apply_scaler(sc, X[te])
        scores = None
        if fold_params is not None:
            params = fold_params[f - 1]
        elif cv.manual_params is not None:
            params = cv.manual_params
        elif cv.nested:
            params, scores = grid_search(X[tr], y[tr], spec, derive_seed(cv.seed, f))
        else:
            params = spec.default_params
        cols = _select(Xtr, y[tr], spec)
        try:
            m = learners.train(spec.learner, Xtr[:, cols], y[tr], params, spec.solver)
        except ValueError as exc:
            raise CVError(f"outer fold {f} ({params}): {exc}") from exc
        decision[te], predicted[te] = learners.predict(m, Xte[:, cols])
        winners.append(params)
        selected.append(cols)
        models.append(m)
        scalers.append(sc)
        grid_scores.append(scores)
    return CVResult(subjects, y.copy(), decision, predicted, folds, winners, selected, models,
                    scalers, grid_scores, names)


def run_with_nuisance(dm, y, spec, folds=None):
    """Full model on every column plus a nuisance-only model on the same folds."""
    ncols = dm.columns(("nuisance",))
    if not ncols:
        raise ValueError("no nuisance columns in design matrix")
    if folds is None:
        folds = make_folds(y, spec.cv.k_folds, spec.task, spec.cv.seed)
    full = run_cross_validation(dm, y, spec, folds=folds)
    nuis = run_cross_validation(dm.subset(ncols), y, spec, folds=folds)
    return full, nuis
