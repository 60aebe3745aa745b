"""Graphs from connectivity matrices and a small set of graph measures."""

import math
from collections import deque
from dataclasses import dataclass

import numpy as np

MEASURES = ("degree", "strength", "clustering", "char_path_length", "global_efficiency")
NODAL_MEASURES = ("degree", "strength", "clustering")
BINARY_ONLY = ("clustering", "char_path_length", "global_efficiency")


@dataclass(frozen=True)
class Graph:
    adjacency: np.ndarray
    kind: str  # "binary" or "weighted"
    threshold_record: tuple  # (rule, value)
    negative_edges_removed: int = 0

    @property
    def n(self):
        return self.adjacency.shape[0]

    @property
    def n_edges(self):
        return int(np.count_nonzero(np.triu(self.adjacency, 1)))


@dataclass(frozen=True)
class DynamicConfig:
    width: int
    step: int = 1
    summary: str = "mean"

    def __post_init__(self):
        if self.width < 2:
            raise ValueError("window width must be >= 2")
        if self.step < 1:
            raise ValueError("window step must be >= 1")
        if self.summary not in ("mean", "std"):
            raise ValueError(f"unknown dynamic summary {self.summary!r}")


def threshold_matrix(m, rule, value, binarize=True):
    """Keep edges of ``m`` by absolute weight cutoff or by strongest fraction.

    Negative weights are zeroed before the rule is applied. For the
    proportional rule exactly ``round(value * N(N-1)/2)`` edges survive
    (fewer if there are not enough positive edges); on ties the edge with the
    larger row-major index is dropped first.
    """
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("matrix must be square")
    if np.isnan(m).any():
        raise ValueError("matrix contains NaN")
    n = m.shape[0]
    iu, ju = np.triu_indices(n, 1)
    w = m[iu, ju].copy()
    n_neg = int(np.count_nonzero(w < 0))
    w[w < 0] = 0.0

    if rule == "absolute":
        keep = (w >= value) & (w > 0)
    elif rule == "proportional":
        if not 0 < value <= 1:
            raise ValueError("proportional threshold must be in (0, 1]")
        n_keep = int(round(value * len(w)))
        # stable sort on -w keeps lower row-major index first among ties
        order = np.argsort(-w, kind="stable")[:n_keep]
        keep = np.zeros(len(w), dtype=bool)
        keep[order] = True
        keep &= w > 0
    else:
        raise ValueError(f"unknown threshold rule {rule!r}")

    adj = np.zeros((n, n))
    adj[iu, ju] = np.where(keep, 1.0 if binarize else w, 0.0)
    adj = adj + adj.T
    return Graph(adj, "binary" if binarize else "weighted", (rule, float(value)), n_neg)


def sliding_windows(ts, cfg, subject=None):
    """Pearson correlation matrix of each window ``[w*step, w*step + width)``."""
    ts = np.asarray(ts, dtype=float)
    t = ts.shape[0]
    if cfg.width > t:
        raise ValueError(f"window width {cfg.width} exceeds series length {t}")
    n_windows = (t - cfg.width) // cfg.step + 1
    out = []
    for w in range(n_windows):
        seg = ts[w * cfg.step: w * cfg.step + cfg.width]
        sd = seg.std(axis=0)
        flat = np.flatnonzero(sd == 0)
        if flat.size:
            who = f"subject {subject}, " if subject is not None else ""
            raise ValueError(f"{who}window {w}: node {int(flat[0])} is constant")
        c = np.corrcoef(seg, rowvar=False)
        np.fill_diagonal(c, 1.0)
        out.append(c)
    return out


def summarize_dynamic(mats, summary="mean"):
    """Element-wise mean or sample std across windows."""
    stack = np.stack([np.asarray(m, dtype=float) for m in mats])
    # deviations from the first window keep identical windows exact
    base = stack[0]
    dev = stack - base
    if summary == "mean":
        return base + dev.mean(axis=0)
    if summary == "std":
        if len(stack) < 2:
            raise ValueError("std summary needs at least two windows")
        return dev.std(axis=0, ddof=1)
    raise ValueError(f"unknown dynamic summary {summary!r}")


def shortest_path_lengths(g):
    """Hop-count distances by BFS from every node; inf where unreachable."""
    if g.kind != "binary":
        raise ValueError("shortest paths are only implemented for binary graphs")
    a = g.adjacency
    n = a.shape[0]
    nbrs = [np.flatnonzero(a[i]) for i in range(n)]
    d = np.full((n, n), np.inf)
    for s in range(n):
        d[s, s] = 0
        q = deque([s])
        while q:
            u = q.popleft()
            for v in nbrs[u]:
                if d[s, v] == np.inf:
                    d[s, v] = d[s, u] + 1
                    q.append(v)
    return d


def graph_measures(g, selection):
    """Compute the requested measures.

    Nodal measures come back as length-N arrays; ``char_path_length`` and
    ``global_efficiency`` as floats. ``disconnected_pairs`` is added whenever
    a path measure is requested.
    """
    selection = set(selection)
    if not selection:
        raise ValueError("empty measure selection")
    unknown = selection - set(MEASURES)
    if unknown:
        raise ValueError(f"unknown graph measures {sorted(unknown)}")
    if g.kind != "binary" and selection & set(BINARY_ONLY):
        raise ValueError(f"{sorted(selection & set(BINARY_ONLY))} need a binary graph")

    a = g.adjacency
    n = g.n
    out = {}
    if "degree" in selection:
        out["degree"] = (a != 0).sum(axis=1).astype(float)
    if "strength" in selection:
        out["strength"] = a.sum(axis=1)
    if "clustering" in selection:
        k = a.sum(axis=1)
        tri = np.diag(a @ a @ a) / 2.0
        denom = k * (k - 1)
        cc = np.zeros(n)
        ok = k >= 2
        cc[ok] = 2.0 * tri[ok] / denom[ok]
        out["clustering"] = cc
    if selection & {"char_path_length", "global_efficiency"}:
        d = shortest_path_lengths(g)
        off = ~np.eye(n, dtype=bool)
        dd = d[off]
        finite = np.isfinite(dd)
        out["disconnected_pairs"] = int((~finite).sum() // 2)
        if "char_path_length" in selection:
            out["char_path_length"] = float(dd[finite].mean()) if finite.any() else math.nan
        if "global_efficiency" in selection:
            inv = np.zeros_like(dd)
            inv[finite] = 1.0 / dd[finite]
            out["global_efficiency"] = float(inv.mean()) if n > 1 else 0.0
    return out


def dynamic_connectivity(ts_set, cfg):
    """Turn each subject's time series into one summarized window matrix."""
    from .ingest import ConnectivityDataset

    mats = []
    for sid, ts in zip(ts_set.subjects, ts_set.series):
        m = summarize_dynamic(sliding_windows(ts, cfg, subject=sid), cfg.summary)
        if cfg.summary == "mean":
            np.fill_diagonal(m, 1.0)
        m.setflags(write=False)
        mats.append(m)
    diagonal = "unit" if cfg.summary == "mean" else "zero"
    return ConnectivityDataset(ts_set.subjects, ts_set.node_labels, tuple(mats), diagonal)
