import logging
from dataclasses import dataclass, field

import numpy as np

log = logging.getLogger(__name__)

CLASSIFIERS = ("svc", "enet_classifier")
REGRESSORS = ("svr", "enet_regression")
LEARNERS = CLASSIFIERS + REGRESSORS


def task_of(learner):
    if learner in CLASSIFIERS:
        return "classification"
    if learner in REGRESSORS:
        return "regression"
    raise ValueError(f"unknown learner {learner!r}; expected one of {LEARNERS}")


@dataclass(frozen=True)
class HyperParams:
    C: float = 1.0
    nu: float = 0.5
    alpha: float = 0.5
    lam: float = 0.1

    def relevant(self, learner):
        if learner == "svc":
            return {"C": self.C}
        if learner == "svr":
            return {"nu": self.nu}
        return {"alpha": self.alpha, "lambda": self.lam}

    def describe(self, learner):
        return ";".join(f"{k}={v!r}" for k, v in self.relevant(learner).items())


@dataclass(frozen=True)
class SolverOptions:
    """Tolerances and caps shared by the solvers; defaults are the documented ones."""
    svm_tol: float = 1e-6
    svm_max_epochs: int = 10_000
    enet_tol: float = 1e-7
    enet_max_sweeps: int = 10_000
    irls_max_iter: int = 100
    svr_C: float = 1.0


@dataclass(frozen=True)
class LinearModel:
    w: np.ndarray
    b: float
    learner: str
    diagnostics: dict = field(default_factory=dict)

    @property
    def is_classifier(self):
        return self.learner in CLASSIFIERS


def check_pm1(y):
    y = np.asarray(y, dtype=float)
    if not np.all((y == 1) | (y == -1)):
        raise ValueError("classification labels must be -1/+1")
    if np.all(y == y[0]):
        raise ValueError("training labels contain a single class")
    return y


def decision_function(m, X):
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != len(m.w):
        raise ValueError(f"model has {len(m.w)} features, input has {X.shape[-1]}")
    return X @ m.w + m.b


def predict(m, X):
    """Return (decision values, predictions). Classifier labels use sign with sign(0) = +1."""
    vals = decision_function(m, X)
    if m.is_classifier:
        return vals, np.where(vals >= 0, 1.0, -1.0)
    return vals, vals.copy()
