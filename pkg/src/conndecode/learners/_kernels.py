"""Compiled inner loops: pairwise dual solver (SMO) and elastic-net coordinate descent."""

import numpy as np
from numba import njit

TAU = 1e-12
INF = np.inf


@njit(cache=True, nogil=True)
def _q(K, idx, yz, i, j):
    return yz[i] * yz[j] * K[idx[i], idx[j]]


@njit(cache=True, nogil=True)
def smo(K, idx, yz, p, ub, z, two_groups, tol, max_epochs):
    """Minimize 0.5 z'Qz + p'z subject to 0 <= z <= ub and yz'z fixed.

    ``Q[i, j] = yz[i] yz[j] K[idx[i], idx[j]]``. With ``two_groups`` the sum
    of z within each label group is also held fixed (nu formulations) and
    working pairs are drawn from a single group. Working-set selection uses
    second-order information. ``z`` must be feasible on entry.

    Returns (z, G, steps, gap, objective trace per epoch).
    """
    m = z.shape[0]
    G = p.copy()
    QD = np.empty(m)
    for i in range(m):
        QD[i] = _q(K, idx, yz, i, i)
    for j in range(m):
        if z[j] != 0.0:
            for k in range(m):
                G[k] += _q(K, idx, yz, k, j) * z[j]

    trace = np.empty(max_epochs + 1)
    n_trace = 0
    obj = 0.0
    for k in range(m):
        obj += 0.5 * z[k] * (G[k] + p[k])
    trace[0] = obj
    n_trace = 1

    max_steps = max_epochs * m
    steps = 0
    gap = INF
    while True:
        # --- working-set selection ---
        gi_p = -INF
        ip = -1
        gi_n = -INF
        in_ = -1
        for t in range(m):
            if yz[t] > 0:
                if z[t] < ub[t]:
                    if -G[t] >= gi_p:
                        gi_p = -G[t]
                        ip = t
            else:
                if z[t] > 0:
                    if G[t] >= gi_n:
                        gi_n = G[t]
                        in_ = t
        if not two_groups:
            # single group: merge candidates
            if gi_n > gi_p:
                gi_p = gi_n
                ip = in_
            gi_n = gi_p
            in_ = ip
        g2_p = -INF
        g2_n = -INF
        jbest = -1
        obj_min = INF
        for j in range(m):
            if yz[j] > 0:
                if z[j] > 0:
                    if two_groups:
                        gmax = gi_p
                        i = ip
                    else:
                        gmax = gi_p
                        i = ip
                    if G[j] >= g2_p:
                        g2_p = G[j]
                    if i >= 0:
                        gd = gmax + G[j]
                        if gd > 0:
                            if two_groups:
                                quad = QD[i] + QD[j] - 2.0 * _q(K, idx, yz, i, j)
                            else:
                                quad = QD[i] + QD[j] - 2.0 * yz[i] * _q(K, idx, yz, i, j)
                            if quad <= 0:
                                quad = TAU
                            od = -(gd * gd) / quad
                            if od <= obj_min:
                                jbest = j
                                obj_min = od
            else:
                if z[j] < ub[j]:
                    if two_groups:
                        gmax = gi_n
                        i = in_
                    else:
                        gmax = gi_p
                        i = ip
                    if -G[j] >= g2_n:
                        g2_n = -G[j]
                    if i >= 0:
                        gd = gmax - G[j]
                        if gd > 0:
                            if two_groups:
                                quad = QD[i] + QD[j] - 2.0 * _q(K, idx, yz, i, j)
                            else:
                                quad = QD[i] + QD[j] + 2.0 * yz[i] * _q(K, idx, yz, i, j)
                            if quad <= 0:
                                quad = TAU
                            od = -(gd * gd) / quad
                            if od <= obj_min:
                                jbest = j
                                obj_min = od
        if two_groups:
            gap = max(gi_p + g2_p, gi_n + g2_n)
        else:
            gap = gi_p + max(g2_p, g2_n)
        if gap < tol or jbest == -1 or steps >= max_steps:
            break
        j = jbest
        if two_groups:
            i = ip if yz[j] > 0 else in_
        else:
            i = ip

        # --- analytic pair update ---
        old_i = z[i]
        old_j = z[j]
        qij = _q(K, idx, yz, i, j)
        ci = ub[i]
        cj = ub[j]
        if yz[i] != yz[j]:
            quad = QD[i] + QD[j] + 2.0 * qij
            if quad <= 0:
                quad = TAU
            delta = (-G[i] - G[j]) / quad
            diff = z[i] - z[j]
            z[i] += delta
            z[j] += delta
            if diff > 0:
                if z[j] < 0:
                    z[j] = 0.0
                    z[i] = diff
            else:
                if z[i] < 0:
                    z[i] = 0.0
                    z[j] = -diff
            if diff > ci - cj:
                if z[i] > ci:
                    z[i] = ci
                    z[j] = ci - diff
            else:
                if z[j] > cj:
                    z[j] = cj
                    z[i] = cj + diff
        else:
            quad = QD[i] + QD[j] - 2.0 * qij
            if quad <= 0:
                quad = TAU
            delta = (G[i] - G[j]) / quad
            s = z[i] + z[j]
            z[i] -= delta
            z[j] += delta
            if s > ci:
                if z[i] > ci:
                    z[i] = ci
                    z[j] = s - ci
            else:
                if z[j] < 0:
                    z[j] = 0.0
                    z[i] = s
            if s > cj:
                if z[j] > cj:
                    z[j] = cj
                    z[i] = s - cj
            else:
                if z[i] < 0:
                    z[i] = 0.0
                    z[j] = s
        di = z[i] - old_i
        dj = z[j] - old_j
        for k in range(m):
            G[k] += _q(K, idx, yz, k, i) * di + _q(K, idx, yz, k, j) * dj
        steps += 1
        if steps % m == 0 and n_trace < trace.shape[0]:
            obj = 0.0
            for k in range(m):
                obj += 0.5 * z[k] * (G[k] + p[k])
            trace[n_trace] = obj
            n_trace += 1

    obj = 0.0
    for k in range(m):
        obj += 0.5 * z[k] * (G[k] + p[k])
    if n_trace < trace.shape[0]:
        trace[n_trace] = obj
        n_trace += 1
    else:
        trace[n_trace - 1] = obj
    return z, G, steps, gap, trace[:n_trace]


@njit(cache=True, nogil=True)
def enet_cd(Xc, zc, v, lam, alpha, w, tol, max_sweeps):
    """Cyclic coordinate descent for

        0.5 * sum_i v_i (zc_i - x_i.w)^2 + lam*(alpha*|w|_1 + (1-alpha)/2*|w|^2)

    on pre-centered data (weighted means already removed). ``w`` is the
    starting point and is updated in place. Returns (w, sweeps, max_change).
    """
    n, p = Xc.shape
    r = zc.copy()
    for j in range(p):
        if w[j] != 0.0:
            for i in range(n):
                r[i] -= Xc[i, j] * w[j]
    c = np.zeros(p)
    for j in range(p):
        s = 0.0
        for i in range(n):
            s += v[i] * Xc[i, j] * Xc[i, j]
        c[j] = s
    l1 = lam * alpha
    l2 = lam * (1.0 - alpha)
    sweeps = 0
    max_change = INF
    while sweeps < max_sweeps:
        max_change = 0.0
        for j in range(p):
            denom = c[j] + l2
            if denom <= 0.0:
                new = 0.0
            else:
                g = c[j] * w[j]
                for i in range(n):
                    g += v[i] * Xc[i, j] * r[i]
                if g > l1:
                    new = (g - l1) / denom
                elif g < -l1:
                    new = (g + l1) / denom
                else:
                    new = 0.0
            d = new - w[j]
            if d != 0.0:
                for i in range(n):
                    r[i] -= Xc[i, j] * d
                w[j] = new
                if abs(d) > max_change:
                    max_change = abs(d)
        sweeps += 1
        if max_change < tol:
            break
    return w, sweeps, max_change
