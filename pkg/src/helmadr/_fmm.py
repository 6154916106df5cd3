"""Numba kernels for the factored eikonal local solver and fast marching.

The unknown is the factor t1 in tau = tau0*t1, where tau0 is the analytic
distance from the source.  One-sided upwind differences turn the factored
eikonal equation |tau0*grad(t1) + t1*grad(tau0)|^2 = kappa^2 into a scalar
quadratic A*t1^2 + B*t1 + C = 0 per node; the larger root is the causal
(viscosity) one.

All kernels work on flat float64 arrays with index k = i1*n2 + i2.  The
``usable`` mask marks neighbor values allowed in upwind stencils: the
accepted set during fast marching, every finite value during sweeping.
"""

from __future__ import annotations

import numpy as np
from numba import njit

INF = np.inf
FAR, NARROW, ACCEPTED = 0, 1, 2


@njit(cache=True)
def _heap_push(keys, idxs, size, key, idx):
    i = size
    while i > 0:
        p = (i - 1) >> 1
        kp = keys[p]
        ip = idxs[p]
        if kp > key or (kp == key and ip > idx):
            keys[i] = kp
            idxs[i] = ip
            i = p
        else:
            break
    keys[i] = key
    idxs[i] = idx
    return size + 1


@njit(cache=True)
def _heap_pop(keys, idxs, size):
    key = keys[0]
    idx = idxs[0]
    size -= 1
    lk = keys[size]
    li = idxs[size]
    i = 0
    while True:
        c = 2 * i + 1
        if c >= size:
            break
        if c + 1 < size and (
            keys[c + 1] < keys[c] or (keys[c + 1] == keys[c] and idxs[c + 1] < idxs[c])
        ):
            c += 1
        if keys[c] < lk or (keys[c] == lk and idxs[c] < li):
            keys[i] = keys[c]
            idxs[i] = idxs[c]
            i = c
        else:
            break
    keys[i] = lk
    idxs[i] = li
    return key, idx, size


@njit(cache=True)
def _larger_root(A, B, C):
    """Larger real root of A t^2 + B t + C = 0 (stable form); ok flag first."""
    if A == 0.0:
        if B == 0.0:
            return False, 0.0
        return True, -C / B
    disc = B * B - 4.0 * A * C
    if disc < 0.0:
        return False, 0.0
    sq = np.sqrt(disc)
    if B >= 0.0:
        qq = -0.5 * (B + sq)
    else:
        qq = -0.5 * (B - sq)
    r1 = qq / A
    if qq != 0.0:
        r2 = C / qq
        if r2 > r1:
            r1 = r2
    return True, r1


@njit(cache=True)
def _axis_data(k, i, size, stride, h, tau1, tau, usable, order):
    """Upwind one-sided difference data for one axis at node k.

    Picks the neighbor side with the smaller travel time.  Returns
    (have, a1, b1, have2, a2, b2, nbt) where d(t1)/dx ~ a*t1[k] + b for the
    first/second order variants and nbt is the contributing neighbor's tau.
    """
    tm = INF
    tp = INF
    if i > 0 and usable[k - stride] == ACCEPTED:
        tm = tau[k - stride]
    if i < size - 1 and usable[k + stride] == ACCEPTED:
        tp = tau[k + stride]
    if tm == INF and tp == INF:
        return False, 0.0, 0.0, False, 0.0, 0.0, 0.0
    if tm <= tp:
        s = -1
        nbt = tm
    else:
        s = 1
        nbt = tp
    nb1 = k + s * stride
    a1 = -s / h
    b1 = s * tau1[nb1] / h
    have2 = False
    a2 = 0.0
    b2 = 0.0
    if order == 2:
        j2 = i + 2 * s
        if 0 <= j2 < size:
            nb2 = k + 2 * s * stride
            # standard guard: the in-line second value must not exceed the first
            if usable[nb2] == ACCEPTED and tau[nb2] <= tau[nb1] + 1e-12 * (1.0 + tau[nb1]):
                have2 = True
                a2 = -s * 3.0 / (2.0 * h)
                b2 = s * (4.0 * tau1[nb1] - tau1[nb2]) / (2.0 * h)
    return True, a1, b1, have2, a2, b2, nbt


@njit(cache=True)
def _causal(cand_tau, nbt):
    return cand_tau >= nbt - 1e-12 * (1.0 + nbt)


@njit(cache=True)
def _node_candidate(k, n1, n2, h1, h2, tau0, g01, g02, kappa, tau1, tau, usable, order):
    """Candidate t1 at node k from usable neighbor values; -1.0 if none."""
    t0 = tau0[k]
    ksq = kappa[k] * kappa[k]
    i1 = k // n2
    i2 = k - i1 * n2
    hA, a1A, b1A, s2A, a2A, b2A, ntA = _axis_data(k, i1, n1, n2, h1, tau1, tau, usable, order)
    hB, a1B, b1B, s2B, a2B, b2B, ntB = _axis_data(k, i2, n2, 1, h2, tau1, tau, usable, order)
    if not hA and not hB:
        return -1.0
    g0A = g01[k]
    g0B = g02[k]

    # full two-axis update with the per-axis selected orders
    if hA and hB:
        if s2A:
            pA = t0 * a2A + g0A
            qA = t0 * b2A
        else:
            pA = t0 * a1A + g0A
            qA = t0 * b1A
        if s2B:
            pB = t0 * a2B + g0B
            qB = t0 * b2B
        else:
            pB = t0 * a1B + g0B
            qB = t0 * b1B
        ok, t = _larger_root(pA * pA + pB * pB, 2.0 * (pA * qA + pB * qB), qA * qA + qB * qB - ksq)
        if ok and t > 0.0:
            cand = t0 * t
            nmax = max(ntA, ntB)
            if _causal(cand, nmax):
                return t

    # one-axis updates: second order if admissible, else first order
    best = INF
    best_t1 = -1.0
    for axis in range(2):
        if axis == 0:
            have, sec, a1, b1, a2, b2, g0, nbt = hA, s2A, a1A, b1A, a2A, b2A, g0A, ntA
        else:
            have, sec, a1, b1, a2, b2, g0, nbt = hB, s2B, a1B, b1B, a2B, b2B, g0B, ntB
        if not have:
            continue
        done = False
        if sec:
            p = t0 * a2 + g0
            q = t0 * b2
            ok, t = _larger_root(p * p, 2.0 * p * q, q * q - ksq)
            if ok and t > 0.0 and _causal(t0 * t, nbt):
                if t0 * t < best:
                    best = t0 * t
                    best_t1 = t
                done = True
        if not done:
            p = t0 * a1 + g0
            q = t0 * b1
            ok, t = _larger_root(p * p, 2.0 * p * q, q * q - ksq)
            if ok and t > 0.0 and _causal(t0 * t, nbt):
                if t0 * t < best:
                    best = t0 * t
                    best_t1 = t
    if best_t1 > 0.0:
        return best_t1

    # no admissible root from any subset: accept the one-axis first-order
    # root (always exists away from the seeded source block)
    for axis in range(2):
        if axis == 0:
            have, a1, b1, g0, nbt, h = hA, a1A, b1A, g0A, ntA, h1
        else:
            have, a1, b1, g0, nbt, h = hB, a1B, b1B, g0B, ntB, h2
        if not have:
            continue
        p = t0 * a1 + g0
        q = t0 * b1
        ok, t = _larger_root(p * p, 2.0 * p * q, q * q - ksq)
        if not (ok and t > 0.0):
            # degenerate direction: Dijkstra-like bound tau_nb + h*kappa
            t = (nbt + h * kappa[k]) / t0
        if best_t1 < 0.0 or t0 * t < best:
            best = t0 * t
            best_t1 = t
    return best_t1


@njit(cache=True)
def _seed(n1, n2, tau0, kappa, src1, src2, tau1, tau, state):
    """Accept the source and its in-grid 8-neighborhood at t1 = kappa(x0)."""
    ks = src1 * n2 + src2
    kap0 = kappa[ks]
    seeds = np.empty(9, np.int64)
    nseed = 0
    for d1 in range(-1, 2):
        for d2 in range(-1, 2):
            j1 = src1 + d1
            j2 = src2 + d2
            if 0 <= j1 < n1 and 0 <= j2 < n2:
                kk = j1 * n2 + j2
                tau1[kk] = kap0
                tau[kk] = tau0[kk] * kap0
                state[kk] = ACCEPTED
                seeds[nseed] = kk
                nseed += 1
    # order seeds by (tau, index) for a monotone acceptance record
    for a in range(nseed):
        m = a
        for b in range(a + 1, nseed):
            if tau[seeds[b]] < tau[seeds[m]] or (
                tau[seeds[b]] == tau[seeds[m]] and seeds[b] < seeds[m]
            ):
                m = b
        tmp = seeds[a]
        seeds[a] = seeds[m]
        seeds[m] = tmp
    return seeds, nseed


@njit(cache=True)
def _relax_neighbors(
    kk, n1, n2, h1, h2, tau0, g01, g02, kappa, tau1, tau, state, order, heap_keys, heap_idx, hsize
):
    i1 = kk // n2
    i2 = kk - i1 * n2
    for mv in range(4):
        if mv == 0:
            j1, j2 = i1 - 1, i2
        elif mv == 1:
            j1, j2 = i1 + 1, i2
        elif mv == 2:
            j1, j2 = i1, i2 - 1
        else:
            j1, j2 = i1, i2 + 1
        if not (0 <= j1 < n1 and 0 <= j2 < n2):
            continue
        nb = j1 * n2 + j2
        if state[nb] == ACCEPTED:
            continue
        t = _node_candidate(nb, n1, n2, h1, h2, tau0, g01, g02, kappa, tau1, tau, state, order)
        if t > 0.0 and tau0[nb] * t < tau[nb]:
            tau1[nb] = t
            tau[nb] = tau0[nb] * t
            state[nb] = NARROW
            if hsize >= heap_keys.shape[0]:
                return -1
            hsize = _heap_push(heap_keys, heap_idx, hsize, tau[nb], nb)
    return hsize


@njit(cache=True)
def _march(n1, n2, h1, h2, tau0, g01, g02, kappa, src1, src2, order):
    n = n1 * n2
    tau1 = np.full(n, INF)
    tau = np.full(n, INF)
    state = np.zeros(n, np.uint8)
    cap = 6 * n + 16
    heap_keys = np.empty(cap, np.float64)
    heap_idx = np.empty(cap, np.int64)
    hsize = 0
    order_idx = np.empty(n, np.int64)
    order_tau = np.empty(n, np.float64)

    seeds, nseed = _seed(n1, n2, tau0, kappa, src1, src2, tau1, tau, state)
    naccept = 0
    for s_i in range(nseed):
        order_idx[naccept] = seeds[s_i]
        order_tau[naccept] = tau[seeds[s_i]]
        naccept += 1

    for s_i in range(nseed):
        hsize = _relax_neighbors(
            seeds[s_i], n1, n2, h1, h2, tau0, g01, g02, kappa, tau1, tau, state, order,
            heap_keys, heap_idx, hsize,
        )
        if hsize < 0:
            return tau1, tau, order_idx, order_tau, -naccept

    while hsize > 0:
        key, idx, hsize = _heap_pop(heap_keys, heap_idx, hsize)
        if state[idx] == ACCEPTED:
            continue
        if key > tau[idx]:
            continue  # stale entry
        state[idx] = ACCEPTED
        order_idx[naccept] = idx
        order_tau[naccept] = tau[idx]
        naccept += 1
        hsize = _relax_neighbors(
            idx, n1, n2, h1, h2, tau0, g01, g02, kappa, tau1, tau, state, order,
            heap_keys, heap_idx, hsize,
        )
        if hsize < 0:
            return tau1, tau, order_idx, order_tau, -naccept

    return tau1, tau, order_idx, order_tau, naccept


@njit(cache=True)
def _sweep(n1, n2, h1, h2, tau0, g01, g02, kappa, src1, src2, order, tol, max_sweeps):
    """Gauss-Seidel sweeping twin of _march: the same local update iterated in
    four alternating grid orderings with monotone-decrease enforcement."""
    n = n1 * n2
    tau1 = np.full(n, INF)
    tau = np.full(n, INF)
    usable = np.zeros(n, np.uint8)
    frozen = np.zeros(n, np.uint8)

    ks = src1 * n2 + src2
    kap0 = kappa[ks]
    for d1 in range(-1, 2):
        for d2 in range(-1, 2):
            j1 = src1 + d1
            j2 = src2 + d2
            if 0 <= j1 < n1 and 0 <= j2 < n2:
                kk = j1 * n2 + j2
                tau1[kk] = kap0
                tau[kk] = tau0[kk] * kap0
                usable[kk] = ACCEPTED
                frozen[kk] = 1

    sweeps = 0
    delta = INF
    for sweep in range(max_sweeps):
        delta = 0.0
        for direction in range(4):
            if direction == 0:
                s1, e1, st1, s2, e2, st2 = 0, n1, 1, 0, n2, 1
            elif direction == 1:
                s1, e1, st1, s2, e2, st2 = n1 - 1, -1, -1, 0, n2, 1
            elif direction == 2:
                s1, e1, st1, s2, e2, st2 = 0, n1, 1, n2 - 1, -1, -1
            else:
                s1, e1, st1, s2, e2, st2 = n1 - 1, -1, -1, n2 - 1, -1, -1
            for i1 in range(s1, e1, st1):
                for i2 in range(s2, e2, st2):
                    k = i1 * n2 + i2
                    if frozen[k] == 1:
                        continue
                    t = _node_candidate(
                        k, n1, n2, h1, h2, tau0, g01, g02, kappa, tau1, tau, usable, order
                    )
                    if t <= 0.0:
                        continue
                    ct = tau0[k] * t
                    if ct < tau[k]:
                        if tau[k] == INF:
                            delta = INF
                        else:
                            ch = tau1[k] - t
                            if ch > delta:
                                delta = ch
                        tau1[k] = t
                        tau[k] = ct
                        usable[k] = ACCEPTED
        sweeps = sweep + 1
        if delta <= tol:
            break
    return tau1, sweeps, delta
