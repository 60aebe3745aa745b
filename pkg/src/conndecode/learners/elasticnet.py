"""Elastic-net regression and binomial classification by coordinate descent.

Penalty is lam * (alpha*|w|_1 + (1-alpha)/2 * |w|_2^2) with the loss scaled
by 1/n, as in glmnet; the intercept is never penalized.
"""

import numpy as np

from . import _kernels
from .base import LinearModel, SolverOptions, check_pm1, log


def _check(alpha, lam):
    if not 0 <= alpha <= 1:
        raise ValueError("alpha must be in [0, 1]")
    if not lam > 0:
        raise ValueError("lambda must be positive")


def _weighted_fit(X, z, v, alpha, lam, w0, opts):
    """Solve the penalized weighted least-squares problem; returns (w, b, sweeps, change)."""
    vs = v.sum()
    xm = (v @ X) / vs
    zm = (v @ z) / vs
    Xc = np.ascontiguousarray(X - xm)
    w, sweeps, change = _kernels.enet_cd(Xc, z - zm, v, float(lam), float(alpha), w0.copy(),
                                         opts.enet_tol, opts.enet_max_sweeps)
    return w, float(zm - xm @ w), sweeps, change


def train_elastic_net_regression(X, y, alpha=0.5, lam=0.1, opts=SolverOptions()):
    _check(alpha, lam)
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n, p = X.shape
    v = np.full(n, 1.0 / n)
    w, b, sweeps, change = _weighted_fit(X, y, v, alpha, lam, np.zeros(p), opts)
    if change >= opts.enet_tol:
        log.warning("elastic net hit %d sweeps (last change %.3g)", sweeps, change)
    r = y - X @ w - b
    obj = 0.5 * np.mean(r ** 2) + lam * (alpha * np.abs(w).sum() + (1 - alpha) / 2 * w @ w)
    return LinearModel(w, b, "enet_regression",
                       {"sweeps": int(sweeps), "max_change": float(change), "objective": float(obj)})


PROB_EPS = 1e-5


def train_elastic_net_classifier(X, y, alpha=0.5, lam=0.1, opts=SolverOptions()):
    """Penalized logistic regression by IRLS with an inner coordinate-descent solve.

    Labels are -1/+1; the decision value is w.x + b (the log-odds of +1).
    """
    _check(alpha, lam)
    X = np.asarray(X, dtype=float)
    y = check_pm1(y)
    n, p = X.shape
    t = (y > 0).astype(float)
    pbar = t.mean()
    w = np.zeros(p)
    b = float(np.log(pbar / (1 - pbar)))
    total_sweeps = 0
    converged = False
    it = 0
    for it in range(1, opts.irls_max_iter + 1):
        eta = X @ w + b
        prob = 1.0 / (1.0 + np.exp(-eta))
        prob = np.clip(prob, PROB_EPS, 1 - PROB_EPS)
        wt = prob * (1 - prob)
        zwork = eta + (t - prob) / wt
        w_new, b_new, sweeps, _ = _weighted_fit(X, zwork, wt / n, alpha, lam, w, opts)
        total_sweeps += sweeps
        change = max(np.max(np.abs(w_new - w), initial=0.0), abs(b_new - b))
        w, b = w_new, b_new
        if change < opts.enet_tol:
            converged = True
            break
    if not converged:
        log.warning("elastic-net classifier: IRLS stopped after %d iterations", it)
    eta = X @ w + b
    nll = np.mean(np.logaddexp(0.0, -y * eta))
    obj = nll + lam * (alpha * np.abs(w).sum() + (1 - alpha) / 2 * w @ w)
    return LinearModel(w, b, "enet_classifier",
                       {"irls_iterations": it, "sweeps": int(total_sweeps),
                        "converged": converged, "objective": float(obj)})
