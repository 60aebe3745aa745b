"""Linear C-SVC and nu-SVR solved in the dual with pairwise (SMO) updates.

Both keep the intercept unpenalized, so the equality constraint on the dual
variables forces two-coordinate steps rather than single-coordinate ones.
"""

import numpy as np

from . import _kernels
from .base import LinearModel, SolverOptions, check_pm1, log


def _gap_warning(name, gap, tol):
    if gap > tol:
        log.warning("%s did not converge: KKT gap %.3g > %.3g", name, gap, tol)


def train_linear_svc(X, y, C=1.0, opts=SolverOptions()):
    """Soft-margin linear SVM: min 0.5|w|^2 + C * sum hinge(y_i (w.x_i + b))."""
    if not C > 0:
        raise ValueError("C must be positive")
    X = np.ascontiguousarray(X, dtype=float)
    y = check_pm1(y)
    n = len(y)
    K = X @ X.T
    idx = np.arange(n)
    z, G, steps, gap, trace = _kernels.smo(
        K, idx, y, -np.ones(n), np.full(n, float(C)), np.zeros(n), False,
        opts.svm_tol, opts.svm_max_epochs)
    _gap_warning("linear SVC", gap, opts.svm_tol)

    # intercept from free vectors, else midpoint of the feasible interval
    yG = y * G
    at_ub = z >= C
    at_lb = z <= 0
    free = ~(at_ub | at_lb)
    if free.any():
        rho = yG[free].mean()
    else:
        upper = np.concatenate([yG[at_ub & (y < 0)], yG[at_lb & (y > 0)]])
        lower = np.concatenate([yG[at_ub & (y > 0)], yG[at_lb & (y < 0)]])
        ub = upper.min() if upper.size else np.inf
        lb = lower.max() if lower.size else -np.inf
        rho = (ub + lb) / 2
    w = X.T @ (z * y)
    diag = {"steps": int(steps), "epochs": steps / n, "kkt_gap": float(gap),
            "dual_objective": float(trace[-1]), "objective_trace": trace.copy(),
            "dual_coef": z.copy(), "n_support": int(np.count_nonzero(z > 0))}
    return LinearModel(w, float(-rho), "svc", diag)


def train_nu_svr(X, y, nu=0.5, opts=SolverOptions()):
    """nu-SVR with a linear kernel.

    Primal: min 0.5|w|^2 + C (n*nu*eps + sum(xi_i + xi*_i)), with the tube
    width eps learned. C is a per-sample penalty (libsvm's scaling) and
    defaults to 1.
    """
    if not 0 < nu <= 1:
        raise ValueError("nu must be in (0, 1]")
    X = np.ascontiguousarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n = len(y)
    if n < 2:
        raise ValueError("nu-SVR needs at least two samples")
    C = opts.svr_C
    box = C
    K = X @ X.T
    idx = np.concatenate([np.arange(n), np.arange(n)])
    yz = np.concatenate([np.ones(n), -np.ones(n)])
    p = np.concatenate([-y, y])
    z = np.zeros(2 * n)
    remaining = C * nu * n / 2
    for i in range(n):
        a = min(remaining, box)
        z[i] = z[i + n] = a
        remaining -= a
    z, G, steps, gap, trace = _kernels.smo(
        K, idx, yz, p, np.full(2 * n, box), z, True, opts.svm_tol, opts.svm_max_epochs)
    _gap_warning("nu-SVR", gap, opts.svm_tol)

    def group_r(mask):
        g = G[mask]
        zz = z[mask]
        at_ub = zz >= box
        at_lb = zz <= 0
        free = ~(at_ub | at_lb)
        if free.any():
            return g[free].mean()
        ub = g[at_lb].min() if at_lb.any() else np.inf
        lb = g[at_ub].max() if at_ub.any() else -np.inf
        return (ub + lb) / 2

    r1 = group_r(yz > 0)
    r2 = group_r(yz < 0)
    rho = (r1 - r2) / 2
    eps = -(r1 + r2) / 2
    coef = z[:n] - z[n:]
    w = X.T @ coef
    diag = {"steps": int(steps), "epochs": steps / (2 * n), "kkt_gap": float(gap),
            "dual_objective": float(trace[-1]), "objective_trace": trace.copy(),
            "dual_coef": coef, "epsilon": float(eps),
            "n_support": int(np.count_nonzero(np.abs(coef) > 0))}
    return LinearModel(w, float(-rho), "svr", diag)
