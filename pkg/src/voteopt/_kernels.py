"""Numeric kernels compiled under the active backend.

Everything here is nopython-compatible: float64/int64 arrays in, plain
tuples out. The public wrappers live in :mod:`voteopt.qpsolve`.
"""

from __future__ import annotations

import numpy as np

from ._backend import jit_kernel

# ipm_solve status codes
IPM_CONVERGED = 0
IPM_MAX_ITER = 1
IPM_DIVERGED = 2


@jit_kernel
def ipm_solve(qdiag, c, a_eq, b_eq, g_in, h_in, tol, max_iter):
    """Primal-dual interior point with Mehrotra predictor-corrector steps.

    Maximizes ``c.w - sum(qdiag * w**2)`` subject to ``a_eq @ w == b_eq``,
    ``g_in @ w >= h_in`` and ``w >= 0`` (bounds are folded into the
    inequality block, so the scaled normal matrix stays positive definite
    even in the linear case qdiag == 0).

    Returns ``(w, y, z, status, iters, res_stat, res_primal, res_comp)``
    where y/z are the equality/inequality multipliers of the best iterate.
    """
    nv = c.shape[0]
    me = b_eq.shape[0]
    mi = h_in.shape[0]
    mt = mi + nv

    gf = np.empty((mt, nv))
    hf = np.empty(mt)
    for r in range(mi):
        for k in range(nv):
            gf[r, k] = g_in[r, k]
        hf[r] = h_in[r]
    for k in range(nv):
        for k2 in range(nv):
            gf[mi + k, k2] = 0.0
        gf[mi + k, k] = 1.0
        hf[mi + k] = 0.0

    two_q = 2.0 * qdiag
    w = np.full(nv, 1.0)
    y = np.zeros(me)
    s = np.ones(mt)
    z = np.ones(mt)

    best_err = np.inf
    best_w = w.copy()
    best_y = y.copy()
    best_z = z.copy()
    best_stat = np.inf
    best_primal = np.inf
    best_comp = np.inf

    status = IPM_MAX_ITER
    iters = 0
    stall = 0

    for _ in range(max_iter):
        iters += 1

        rd = two_q * w - c - gf.T @ z
        if me > 0:
            rd -= a_eq.T @ y
            rp = a_eq @ w - b_eq
        else:
            rp = np.zeros(0)
        gw = gf @ w
        rg = gw - s - hf
        mu = (s @ z) / mt

        if not np.isfinite(mu) or mu > 1e14:
            status = IPM_DIVERGED
            break

        res_stat = 0.0
        for k in range(nv):
            if abs(rd[k]) > res_stat:
                res_stat = abs(rd[k])
        res_primal = 0.0
        for r in range(me):
            if abs(rp[r]) > res_primal:
                res_primal = abs(rp[r])
        for r in range(mt):
            v = hf[r] - gw[r]
            if v > res_primal:
                res_primal = v
        err = max(res_stat, res_primal, mu)
        if err < best_err:
            if err < 0.5 * best_err:
                stall = 0
            best_err = err
            best_w = w.copy()
            best_y = y.copy()
            best_z = z.copy()
            best_stat = res_stat
            best_primal = res_primal
            best_comp = mu
        else:
            stall += 1
        if err <= tol:
            status = IPM_CONVERGED
            break
        if stall > 30:
            break

        d = z / s
        h_mat = gf.T @ (d.reshape(mt, 1) * gf)
        for k in range(nv):
            h_mat[k, k] += two_q[k] + 1e-12

        comp = s * z
        rhs1 = -rd - gf.T @ ((comp + z * rg) / s)

        if me > 0:
            kkt = np.zeros((nv + me, nv + me))
            for r in range(nv):
                for k in range(nv):
                    kkt[r, k] = h_mat[r, k]
            for r in range(me):
                for k in range(nv):
                    kkt[k, nv + r] = -a_eq[r, k]
                    kkt[nv + r, k] = a_eq[r, k]
                kkt[nv + r, nv + r] = -1e-10
            rhs = np.empty(nv + me)
            rhs[:nv] = rhs1
            rhs[nv:] = -rp
            sol = np.linalg.solve(kkt, rhs)
            dw = sol[:nv]
        else:
            sol = np.linalg.solve(h_mat, rhs1)
            dw = sol

        ds = gf @ dw + rg
        dz = -(comp + z * ds) / s

        ap = 1.0
        ad = 1.0
        for r in range(mt):
            if ds[r] < 0.0:
                cand = -0.99 * s[r] / ds[r]
                if cand < ap:
                    ap = cand
            if dz[r] < 0.0:
                cand = -0.99 * z[r] / dz[r]
                if cand < ad:
                    ad = cand
        mu_aff = ((s + ap * ds) @ (z + ad * dz)) / mt
        ratio = mu_aff / mu
        if ratio < 0.0:
            ratio = 0.0
        elif ratio > 1.0:
            ratio = 1.0
        sigma = ratio * ratio * ratio

        comp2 = comp + ds * dz - sigma * mu
        rhs1 = -rd - gf.T @ ((comp2 + z * rg) / s)
        if me > 0:
            rhs = np.empty(nv + me)
            rhs[:nv] = rhs1
            rhs[nv:] = -rp
            sol = np.linalg.solve(kkt, rhs)
            dw = sol[:nv]
            dy = sol[nv:]
        else:
            dw = np.linalg.solve(h_mat, rhs1)
            dy = np.zeros(0)

        ds = gf @ dw + rg
        dz = -(comp2 + z * ds) / s

        ap = 1.0
        ad = 1.0
        for r in range(mt):
            if ds[r] < 0.0:
                cand = -0.99 * s[r] / ds[r]
                if cand < ap:
                    ap = cand
            if dz[r] < 0.0:
                cand = -0.99 * z[r] / dz[r]
                if cand < ad:
                    ad = cand

        w = w + ap * dw
        s = s + ap * ds
        z = z + ad * dz
        if me > 0:
            y = y + ad * dy

        ok = True
        for k in range(nv):
            if not np.isfinite(w[k]):
                ok = False
        if not ok:
            status = IPM_DIVERGED
            break

    if status == IPM_CONVERGED:
        return w, y, z, status, iters, best_stat, best_primal, best_comp
    return (
        best_w,
        best_y,
        best_z,
        status,
        iters,
        best_stat,
        best_primal,
        best_comp,
    )


@jit_kernel
def fill_compositions(out, units, parts):
    """Fill ``out`` with every composition of ``units`` into ``parts`` slots.

    Reverse-lexicographic order, first row (units, 0, ..., 0). ``out`` must
    be a preallocated int64 array of shape (C(units+parts-1, parts-1), parts).
    """
    cur = np.zeros(parts, dtype=np.int64)
    cur[0] = units
    row = 0
    for k in range(parts):
        out[row, k] = cur[k]
    row += 1
    if parts == 1:
        return row
    while cur[parts - 1] != units:
        tail = cur[parts - 1]
        j = parts - 2
        while cur[j] == 0:
            j -= 1
        cur[j] -= 1
        cur[j + 1] = tail + 1
        for k in range(j + 2, parts):
            cur[k] = 0
        if j + 1 != parts - 1:
            cur[parts - 1] = 0
        for k in range(parts):
            out[row, k] = cur[k]
        row += 1
    return row
