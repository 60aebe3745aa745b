"""Result figures, saved as standalone SVG files.

Each ``*_figure`` function returns a matplotlib Figure so callers can inspect
or restyle it; ``render_plots`` writes the full set for a bundle.
"""

import logging
import math

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .export import entry_dir  # noqa: E402

log = logging.getLogger(__name__)

FULL_COLOR = "tab:blue"
NUISANCE_COLOR = "tab:red"
GOOD = "#4caf50"
BAD = "#e57373"

STYLE = {
    "svg.hashsalt": "conndecode",
    "svg.fonttype": "none",
    "font.size": 10,
    "axes.spines.top": False,
    "axes.spines.right": False,
}


def sturges_bins(n):
    return int(math.ceil(math.log2(n))) + 1 if n > 1 else 1


def confusion_figure(cm):
    fig, ax = plt.subplots(figsize=(4, 4))
    cells = [[("TP", cm.TP, GOOD), ("FN", cm.FN, BAD)],
             [("FP", cm.FP, BAD), ("TN", cm.TN, GOOD)]]
    for r, row in enumerate(cells):
        for c, (name, v, color) in enumerate(row):
            ax.add_patch(plt.Rectangle((c, 1 - r), 1, 1, facecolor=color, edgecolor="white", lw=2))
            ax.text(c + 0.5, 1.5 - r, f"{name}\n{v}\n{100.0 * v / cm.n:.1f}%",
                    ha="center", va="center")
    ax.set_xlim(0, 2)
    ax.set_ylim(0, 2)
    ax.set_xticks([0.5, 1.5], ["predicted +", "predicted -"])
    ax.set_yticks([1.5, 0.5], ["actual +", "actual -"])
    ax.set_title("Confusion matrix")
    return fig


def roc_figure(curve, nuisance=None):
    fig, ax = plt.subplots(figsize=(4.5, 4.5))
    ax.plot([0, 1], [0, 1], ls="--", color="grey", lw=1, label="chance (AUC 0.5)")
    ax.plot(curve.x, curve.y, color=FULL_COLOR, label=f"full (AUC {curve.auc:.3f})")
    if nuisance is not None:
        ax.plot(nuisance.x, nuisance.y, color=NUISANCE_COLOR,
                label=f"nuisance only (AUC {nuisance.auc:.3f})")
    ax.set_xlabel("False positive rate")
    ax.set_ylabel("True positive rate")
    ax.set_title("ROC")
    ax.legend(loc="lower right", frameon=False)
    return fig


def pr_figure(curve):
    fig, ax = plt.subplots(figsize=(4.5, 4.5))
    ax.plot(curve.x, curve.y, color=FULL_COLOR, label=f"AUC {curve.auc:.3f}")
    ax.set_xlabel("Recall")
    ax.set_ylabel("Precision")
    ax.set_ylim(0, 1.05)
    ax.set_title("Precision-recall")
    ax.legend(loc="lower left", frameon=False)
    return fig


def weights_figure(report, max_features=40):
    order = np.argsort(-np.abs(report.weights), kind="stable")[:max_features]
    fig, ax = plt.subplots(figsize=(6, 0.25 * len(order) + 1.5))
    colors = [GOOD if report.significant[j] else "grey" for j in order]
    ax.barh(np.arange(len(order)), report.weights[order], color=colors)
    ax.set_yticks(np.arange(len(order)), [report.names[j] for j in order])
    ax.invert_yaxis()
    ax.axvline(0, color="black", lw=0.8)
    ax.set_xlabel("Mean fold-wise correlation with predictions")
    ax.set_title("Feature weights (green: significant)")
    return fig


def null_figure(null, nuisance=None):
    fig, ax = plt.subplots(figsize=(5, 3.5))
    bins = sturges_bins(len(null.samples))
    ax.hist(null.samples, bins=bins, color=FULL_COLOR, alpha=0.6, label="full null")
    ax.axvline(null.observed, color=FULL_COLOR, lw=2, label="full observed")
    if nuisance is not None:
        ax.hist(nuisance.samples, bins=bins, color=NUISANCE_COLOR, alpha=0.4,
                label="nuisance-only null")
        ax.axvline(nuisance.observed, color=NUISANCE_COLOR, lw=2, ls="--",
                   label="nuisance-only observed")
    ax.set_xlabel(null.metric)
    ax.set_ylabel("count")
    ax.set_title("Permutation null distribution")
    ax.legend(frameon=False, fontsize=8)
    return fig


def _fit_line(ax, x, y, color):
    if np.ptp(x) > 0:
        slope, icpt = np.polyfit(x, y, 1)
        xs = np.array([x.min(), x.max()])
        ax.plot(xs, slope * xs + icpt, color=color, lw=1.2)


def scatter_figure(actual, predicted, r_squared, nuisance_predicted=None, nuisance_r2=None):
    fig, ax = plt.subplots(figsize=(4.5, 4.5))
    r2 = "undefined" if r_squared is None else f"{r_squared:.3f}"
    ax.scatter(actual, predicted, s=14, color=FULL_COLOR, label=f"full (R² {r2})")
    _fit_line(ax, np.asarray(actual), np.asarray(predicted), FULL_COLOR)
    if nuisance_predicted is not None:
        nr2 = "undefined" if nuisance_r2 is None else f"{nuisance_r2:.3f}"
        ax.scatter(actual, nuisance_predicted, s=14, color=NUISANCE_COLOR,
                   label=f"nuisance only (R² {nr2})")
        _fit_line(ax, np.asarray(actual), np.asarray(nuisance_predicted), NUISANCE_COLOR)
    ax.set_xlabel("Actual")
    ax.set_ylabel("Predicted")
    ax.set_title("Actual vs predicted")
    ax.legend(frameon=False, fontsize=8)
    return fig


def residuals_figure(predicted, standardized):
    fig, ax = plt.subplots(figsize=(4.5, 3.5))
    ax.scatter(predicted, standardized, s=14, color=FULL_COLOR)
    ax.axhline(0, color="grey", lw=0.8)
    for h in (-2, 2):
        ax.axhline(h, color="grey", lw=0.8, ls=":")
    ax.set_xlabel("Predicted")
    ax.set_ylabel("Standardized residual")
    ax.set_title("Residuals")
    return fig


def entry_figures(e):
    """Figures for one bundle entry, keyed by file stem. Missing inputs skip a plot."""
    figs = {}
    if e.task == "classification":
        figs["confusion_matrix"] = confusion_figure(e.confusion)
        nroc = None
        if e.nuisance_cv is not None:
            from .metrics import roc_curve
            nroc = roc_curve(e.y, e.nuisance_cv.decision)
        figs["roc"] = roc_figure(e.roc, nroc)
        figs["pr"] = pr_figure(e.pr)
    else:
        ncv = e.nuisance_cv
        figs["scatter"] = scatter_figure(
            e.cv.actual, e.cv.predicted, e.summary.r_squared,
            None if ncv is None else ncv.predicted,
            None if e.nuisance_summary is None else e.nuisance_summary.r_squared)
        if e.residuals is not None:
            figs["residuals"] = residuals_figure(e.cv.predicted, e.residuals)
        else:
            log.info("%s/%s: residuals plot skipped", e.outcome, e.label)
    figs["weights"] = weights_figure(e.weights)
    if e.permutation is not None:
        figs["null_distribution"] = null_figure(e.permutation.null, e.permutation.nuisance_null)
    else:
        log.info("%s/%s: no permutations, null histogram skipped", e.outcome, e.label)
    return figs


def render_plots(bundle, directory):
    written = []
    with plt.rc_context(STYLE):
        for e in bundle.entries:
            if not e.ok:
                continue
            d = entry_dir(directory, e)
            d.mkdir(parents=True, exist_ok=True)
            for stem, fig in entry_figures(e).items():
                path = d / f"{stem}.svg"
                fig.savefig(path, format="svg", bbox_inches="tight", metadata={"Date": None})
                plt.close(fig)
                written.append(path)
    return written
