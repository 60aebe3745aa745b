"""Feature weights, parametric p-values, permutation testing and p-value correction."""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from . import features, metrics
from .rng import SplitMix64, derive_seed
from .validation import CVError, make_folds, run_cross_validation

log = logging.getLogger(__name__)

P_FLOOR = 1e-300
NULL_METRICS = {"classification": ("auc", "accuracy", "error"), "regression": ("r_squared",)}
DEFAULT_TAIL = {"auc": "greater", "accuracy": "greater", "error": "less", "r_squared": "greater"}


@dataclass(frozen=True)
class SignificanceConfig:
    n_permutations: int = 0
    alpha: float = 0.05
    correction: str = "fdr"
    seed: int = 1
    null_metric: str = None  # None -> auc (classification) / r_squared (regression)
    fast: bool = False
    extra_alphas: tuple = ()

    def __post_init__(self):
        if self.n_permutations < 0:
            raise ValueError("n_permutations must be >= 0")
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must be in (0, 1)")
        if self.correction not in ("none", "fdr", "bonferroni"):
            raise ValueError(f"unknown correction {self.correction!r}")

    def metric_for(self, task):
        m = self.null_metric or ("auc" if task == "classification" else "r_squared")
        if m not in NULL_METRICS[task]:
            raise ValueError(f"null metric {m!r} is not available for {task}")
        return m


@dataclass
class NullDistribution:
    metric: str
    samples: np.ndarray
    observed: float


@dataclass
class FeatureWeightReport:
    names: tuple
    weights: np.ndarray
    per_fold: np.ndarray  # K x p, nan where undefined
    n_folds_used: np.ndarray
    parametric_p: np.ndarray = None
    permutation_p: np.ndarray = None
    corrected_p: np.ndarray = None
    significant: np.ndarray = None
    corrected_source: str = None
    extra_significant: dict = field(default_factory=dict)


def _corr_columns(X, v):
    """Pearson r of each column of X with v; nan where either side is constant."""
    X = np.asarray(X, dtype=float)
    v = np.asarray(v, dtype=float)
    Xc = X - X.mean(axis=0)
    vc = v - v.mean()
    sx = np.sqrt((Xc ** 2).sum(axis=0))
    sv = math.sqrt(float(vc @ vc))
    out = np.full(X.shape[1], np.nan)
    if sv == 0:
        return out
    ok = sx > 0
    out[ok] = np.clip((Xc[:, ok].T @ vc) / (sx[ok] * sv), -1.0, 1.0)
    return out


def haufe_feature_weights(cv, X):
    """Mean over outer folds of corr(feature, out-of-fold decision value)."""
    names = ()
    if isinstance(X, features.DesignMatrix):
        names = X.feature_names
        X = X.X
    X = np.asarray(X, dtype=float)
    k = cv.k
    per_fold = np.full((k, X.shape[1]), np.nan)
    usable = False
    for f in range(1, k + 1):
        te = cv.fold == f
        if te.sum() < 3:
            continue
        usable = True
        per_fold[f - 1] = _corr_columns(X[te], cv.decision[te])
    if not usable:
        raise ValueError("every outer fold has fewer than 3 test subjects")
    used = np.isfinite(per_fold).sum(axis=0)
    with np.errstate(invalid="ignore"):
        weights = np.where(used > 0, np.nansum(per_fold, axis=0) / np.maximum(used, 1), 0.0)
    return FeatureWeightReport(tuple(names) or tuple(f"x{j + 1}" for j in range(X.shape[1])),
                               weights, per_fold, used)


def correlation_p(r, n):
    """Two-sided p for a Pearson r with n pairs, t test on n - 2 df."""
    r = np.asarray(r, dtype=float)
    if n < 4:
        raise ValueError("need at least 4 pairs")
    df = n - 2
    out = np.ones_like(r)
    full = np.abs(r) >= 1
    mid = ~full & np.isfinite(r)
    t = r[mid] * np.sqrt(df / (1 - r[mid] ** 2))
    out[mid] = 2 * stats.t.sf(np.abs(t), df)
    out[full] = P_FLOOR
    return np.clip(out, P_FLOOR, 1.0)


def parametric_weight_p(cv, X):
    """Per-feature p from the correlation over all pooled out-of-fold pairs."""
    if isinstance(X, features.DesignMatrix):
        X = X.X
    r = _corr_columns(X, cv.decision)
    r = np.where(np.isfinite(r), r, 0.0)
    return correlation_p(r, len(cv.decision))


def parametric_auc_p(actual, scores):
    """One-sided p for AUC > 0.5 from the tie-corrected normal approximation to U."""
    actual = np.asarray(actual)
    scores = np.asarray(scores, dtype=float)
    pos = actual > 0
    n1 = int(pos.sum())
    n2 = len(pos) - n1
    if n1 == 0 or n2 == 0:
        raise ValueError("AUC test needs both classes")
    n = n1 + n2
    ranks = metrics.midranks(scores)
    u = ranks[pos].sum() - n1 * (n1 + 1) / 2
    _, counts = np.unique(scores, return_counts=True)
    tie = float(np.sum(counts ** 3 - counts))
    var = n1 * n2 / 12.0 * ((n + 1) - tie / (n * (n - 1)))
    if var <= 0:
        return 0.5
    z = (u - n1 * n2 / 2) / math.sqrt(var)
    return max(0.5 * math.erfc(z / math.sqrt(2)), P_FLOOR)


def model_metric(cv, name):
    """Scalar performance of a CV result; nan when undefined."""
    if name == "auc":
        return metrics.roc_curve(cv.actual, cv.decision).auc
    if name in ("accuracy", "error"):
        acc = float(np.mean(cv.predicted == cv.actual))
        return acc if name == "accuracy" else 1.0 - acc
    if name == "r_squared":
        r2 = metrics.regression_metrics(cv.actual, cv.predicted).r_squared
        return math.nan if r2 is None else r2
    raise ValueError(f"unknown metric {name!r}")


def permutation_p(observed, null, tail="greater"):
    """Add-one permutation p-value; never below 1/(P+1)."""
    samples = null.samples if isinstance(null, NullDistribution) else np.asarray(null, dtype=float)
    n_perm = len(samples)
    if n_perm < 1:
        raise ValueError("empty null distribution")
    greater = (1 + np.sum(samples >= observed)) / (n_perm + 1)
    less = (1 + np.sum(samples <= observed)) / (n_perm + 1)
    if tail == "greater":
        return float(greater)
    if tail == "less":
        return float(less)
    if tail == "two_sided":
        return float(min(1.0, 2 * min(greater, less)))
    raise ValueError(f"unknown tail {tail!r}")


def correct_pvalues(p, method, alpha=0.05):
    """Bonferroni or Benjamini-Hochberg adjustment; returns (adjusted, reject)."""
    p = np.asarray(p, dtype=float)
    m = len(p)
    if m == 0:
        raise ValueError("empty p-value list")
    if method == "none":
        return p.copy(), p <= alpha
    if method == "bonferroni":
        adj = np.minimum(1.0, m * p)
        return adj, adj <= alpha
    if method == "fdr":
        order = np.argsort(p, kind="stable")
        ps = p[order]
        ranks = np.arange(1, m + 1)
        below = np.flatnonzero(ps <= ranks / m * alpha)
        reject = np.zeros(m, dtype=bool)
        if below.size:
            reject[order[:below[-1] + 1]] = True
        stepped = np.minimum.accumulate((ps * m / ranks)[::-1])[::-1]
        adj = np.empty(m)
        adj[order] = np.minimum(stepped, 1.0)
        return adj, reject
    raise ValueError(f"unknown correction {method!r}")


@dataclass
class PermutationResult:
    null: NullDistribution
    null_weights: np.ndarray  # P x p
    nuisance_null: NullDistribution = None
    redraws: int = 0


MAX_REDRAWS = 100


def _one_permutation(b, X, y, spec, cfg, metric, fold_params, nuisance_cols):
    redraw = 0
    while True:
        seed = derive_seed(cfg.seed, b, redraw)
        yb = y[SplitMix64(seed).permutation(len(y))]
        try:
            folds = make_folds(yb, spec.cv.k_folds, spec.task, spec.cv.seed)
            cv = run_cross_validation(X, yb, spec, fold_params=fold_params, folds=folds)
            weights = haufe_feature_weights(cv, X).weights
            nuis = None
            if nuisance_cols:
                cvn = run_cross_validation(X[:, nuisance_cols], yb, spec, fold_params=fold_params,
                                           folds=folds)
                nuis = model_metric(cvn, metric)
            return model_metric(cv, metric), weights, nuis, redraw
        except (CVError, ValueError) as exc:
            redraw += 1
            if redraw > MAX_REDRAWS:
                raise CVError(f"permutation {b}: {exc}") from exc
            log.info("permutation %d redrawn (%s)", b, exc)


def permutation_test(X, y, spec, cfg, observed=None, nuisance_cols=None, workers=1):
    """Rerun the whole CV pipeline on P seeded permutations of the outcome.

    Features and nuisance columns stay fixed. In ``cfg.fast`` mode the
    observed run's per-fold winning hyperparameters are reused instead of
    rerunning the grid search (an approximation). ``observed`` is the CV result
    on the real outcome; the observed metrics are filled in from it.
    """
    if cfg.n_permutations < 1:
        raise ValueError("permutation test needs P >= 1")
    if isinstance(X, features.DesignMatrix):
        X = X.X
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    metric = cfg.metric_for(spec.task)
    fold_params = None
    if cfg.fast:
        if observed is None:
            raise ValueError("fast permutation mode needs the observed CV result")
        fold_params = observed.winners
    nuisance_cols = list(nuisance_cols) if nuisance_cols else None

    def job(b):
        return _one_permutation(b, X, y, spec, cfg, metric, fold_params, nuisance_cols)

    idx = range(1, cfg.n_permutations + 1)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(job, idx))
    else:
        results = [job(b) for b in idx]

    obs = model_metric(observed, metric) if observed is not None else math.nan
    null = NullDistribution(metric, np.array([r[0] for r in results]), obs)
    nuis = None
    if nuisance_cols:
        nuis = NullDistribution(metric, np.array([r[2] for r in results]), math.nan)
    redraws = sum(r[3] for r in results)
    if redraws:
        log.info("%d permutation redraws", redraws)
    return PermutationResult(null, np.vstack([r[1] for r in results]), nuis, redraws)


def weight_report(cv, dm, cfg, perm=None):
    """Weights with parametric, permutation and corrected p-values."""
    rep = haufe_feature_weights(cv, dm)
    rep.parametric_p = parametric_weight_p(cv, dm)
    source = rep.parametric_p
    rep.corrected_source = "parametric"
    if perm is not None:
        rep.permutation_p = np.array([
            permutation_p(w, perm.null_weights[:, j], "two_sided")
            for j, w in enumerate(rep.weights)])
        source = rep.permutation_p
        rep.corrected_source = "permutation"
    rep.corrected_p, rep.significant = correct_pvalues(source, cfg.correction, cfg.alpha)
    for a in cfg.extra_alphas:
        rep.extra_significant[a] = correct_pvalues(source, cfg.correction, a)[1]
    return rep
