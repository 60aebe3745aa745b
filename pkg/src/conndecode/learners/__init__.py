from .base import (CLASSIFIERS, LEARNERS, REGRESSORS, HyperParams, LinearModel,
                   SolverOptions, decision_function, predict, task_of)
from .elasticnet import train_elastic_net_classifier, train_elastic_net_regression
from .svm import train_linear_svc, train_nu_svr


def train(learner, X, y, params, opts=SolverOptions()):
    """Dispatch to the learner named by ``learner`` with the relevant hyperparameters."""
    if learner == "svc":
        return train_linear_svc(X, y, params.C, opts)
    if learner == "svr":
        return train_nu_svr(X, y, params.nu, opts)
    if learner == "enet_regression":
        return train_elastic_net_regression(X, y, params.alpha, params.lam, opts)
    if learner == "enet_classifier":
        return train_elastic_net_classifier(X, y, params.alpha, params.lam, opts)
    raise ValueError(f"unknown learner {learner!r}")


__all__ = [
    "CLASSIFIERS", "LEARNERS", "REGRESSORS", "HyperParams", "LinearModel", "SolverOptions",
    "decision_function", "predict", "task_of", "train", "train_elastic_net_classifier",
    "train_elastic_net_regression", "train_linear_svc", "train_nu_svr",
]
