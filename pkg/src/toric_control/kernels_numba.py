"""numba versions of the hot loops. Same signatures as :mod:`kernels_numpy`.

All kernels release the GIL so sweeps can run them from worker threads.
"""
from __future__ import annotations

import math

import numpy as np
from numba import njit

_opts = dict(cache=True, nogil=True, fastmath=False)

STEP_CAP = 30.0


@njit(**_opts)
def log_basis(H, Hx):
    ns, nf = Hx.shape
    npts = H.shape[0]
    out = np.zeros((ns, npts))
    for s in range(ns):
        for a in range(npts):
            acc = 0.0
            for e in range(nf):
                k = H[a, e]
                if k == 0:
                    continue
                h = Hx[s, e]
                if h <= 0.0:
                    acc = -np.inf
                    break
                acc += k * math.log(h)
            out[s, a] = acc
    return out


@njit(**_opts)
def normalized_coefficients(L, logw):
    ns, npts = L.shape
    P = np.empty((ns, npts))
    for s in range(ns):
        zmax = -np.inf
        for a in range(npts):
            z = L[s, a] + logw[a]
            if z > zmax:
                zmax = z
        tot = 0.0
        for a in range(npts):
            v = math.exp(L[s, a] + logw[a] - zmax)
            P[s, a] = v
            tot += v
        for a in range(npts):
            P[s, a] /= tot
    return P


@njit(**_opts)
def _eval(A, logw, y, u, p):
    """Fill ``p`` with the softmax weights and return the objective value."""
    npts, k = A.shape
    zmax = -np.inf
    for a in range(npts):
        z = logw[a]
        for i in range(k):
            z += u[i] * (A[a, i] - y[i])
        p[a] = z
        if z > zmax:
            zmax = z
    tot = 0.0
    for a in range(npts):
        v = math.exp(p[a] - zmax)
        p[a] = v
        tot += v
    for a in range(npts):
        p[a] /= tot
    return zmax + math.log(tot)


@njit(**_opts)
def _solve_small(M, b):
    """Gaussian elimination with partial pivoting on a tiny dense system, in place."""
    k = b.shape[0]
    for c in range(k):
        piv = c
        for r in range(c + 1, k):
            if abs(M[r, c]) > abs(M[piv, c]):
                piv = r
        if M[piv, c] == 0.0:
            return False
        if piv != c:
            for j in range(k):
                M[c, j], M[piv, j] = M[piv, j], M[c, j]
            b[c], b[piv] = b[piv], b[c]
        for r in range(c + 1, k):
            f = M[r, c] / M[c, c]
            for j in range(c, k):
                M[r, j] -= f * M[c, j]
            b[r] -= f * b[c]
    for c in range(k - 1, -1, -1):
        acc = b[c]
        for j in range(c + 1, k):
            acc -= M[c, j] * b[j]
        b[c] = acc / M[c, c]
    return True


@njit(**_opts)
def moment_inverse(A, logw, Y, tol, maxiter):
    ns, k = Y.shape
    npts = A.shape[0]
    P = np.empty((ns, npts))
    resid = np.empty(ns)
    u = np.zeros(k)
    ut = np.zeros(k)
    p = np.empty(npts)
    pt = np.empty(npts)
    g = np.empty(k)
    mu = np.empty(k)
    step = np.empty(k)
    Hm = np.empty((k, k))
    span = 0.0
    for i in range(k):
        span = max(span, A[:, i].max() - A[:, i].min())
    span = max(span, 1.0)
    for s in range(ns):
        y = Y[s]
        u[:] = 0.0
        f = _eval(A, logw, y, u, p)
        r = np.inf
        for _ in range(maxiter):
            for i in range(k):
                acc = 0.0
                for a in range(npts):
                    acc += p[a] * A[a, i]
                mu[i] = acc
                g[i] = acc - y[i]
            r = 0.0
            for i in range(k):
                if abs(g[i]) > r:
                    r = abs(g[i])
            if r <= tol:
                break
            for i in range(k):
                for j in range(k):
                    acc = 0.0
                    for a in range(npts):
                        acc += p[a] * A[a, i] * A[a, j]
                    Hm[i, j] = acc - mu[i] * mu[j]
            for i in range(k):
                step[i] = -g[i]
            ok = _solve_small(Hm, step)
            slope = 0.0
            for i in range(k):
                slope += g[i] * step[i]
            if not ok or not slope < 0.0:
                slope = 0.0
                for i in range(k):
                    step[i] = -g[i]
                    slope -= g[i] * g[i]
            # trust region: no logit moves by more than STEP_CAP in one step
            big = 0.0
            for i in range(k):
                big += abs(step[i])
            big *= span
            if big > STEP_CAP:
                for i in range(k):
                    step[i] *= STEP_CAP / big
                slope *= STEP_CAP / big
            alpha = 1.0
            moved = False
            for _ls in range(60):
                for i in range(k):
                    ut[i] = u[i] + alpha * step[i]
                ft = _eval(A, logw, y, ut, pt)
                accept = ft <= f + 1e-4 * alpha * slope
                if not accept and ft - f <= 1e-13 * (1.0 + abs(f)):
                    # decrease is below rounding of f: judge by the gradient
                    rt = 0.0
                    for i in range(k):
                        acc = -y[i]
                        for a in range(npts):
                            acc += pt[a] * A[a, i]
                        if abs(acc) > rt:
                            rt = abs(acc)
                    accept = rt < r
                if accept:
                    u[:] = ut
                    p[:] = pt
                    f = ft
                    moved = True
                    break
                alpha *= 0.5
            if not moved:
                break
        P[s] = p
        resid[s] = r
    return P, resid


@njit(**_opts)
def directed_hausdorff_sq(X, Y):
    """Brute force with early exit.

    The scan over Y for the i-th point of X starts at the proportional index,
    so samples listed in matching order find a near neighbour immediately.
    """
    nx = X.shape[0]
    ny = Y.shape[0]
    cmax = 0.0
    for i in range(nx):
        x0 = X[i, 0]
        x1 = X[i, 1]
        x2 = X[i, 2]
        start = (i * ny) // nx
        cmin = np.inf
        below = False
        for t in range(ny):
            j = start + t
            if j >= ny:
                j -= ny
            dx = x0 - Y[j, 0]
            dy = x1 - Y[j, 1]
            dz = x2 - Y[j, 2]
            d2 = dx * dx + dy * dy + dz * dz
            if d2 < cmax:
                below = True
                break
            if d2 < cmin:
                cmin = d2
        if not below and cmin > cmax:
            cmax = cmin
    return cmax


@njit(**_opts)
def _build_grid(Y, lo, h, dims):
    ny = Y.shape[0]
    ncell = dims[0] * dims[1] * dims[2]
    cell = np.empty(ny, dtype=np.int64)
    counts = np.zeros(ncell + 1, dtype=np.int64)
    for j in range(ny):
        c = 0
        for ax in range(3):
            q = int((Y[j, ax] - lo[ax]) / h)
            if q < 0:
                q = 0
            if q >= dims[ax]:
                q = dims[ax] - 1
            c = c * dims[ax] + q
        cell[j] = c
        counts[c + 1] += 1
    for c in range(ncell):
        counts[c + 1] += counts[c]
    order = np.empty(ny, dtype=np.int64)
    fill = counts[:-1].copy()
    for j in range(ny):
        order[fill[cell[j]]] = j
        fill[cell[j]] += 1
    return counts, order


@njit(**_opts)
def directed_hausdorff_sq_indexed(X, Y):
    """Uniform-grid index over Y; rings of cells are searched outward per query."""
    ny = Y.shape[0]
    lo = np.empty(3)
    hi = np.empty(3)
    for ax in range(3):
        lo[ax] = Y[:, ax].min()
        hi[ax] = Y[:, ax].max()
    ext = 0.0
    for ax in range(3):
        ext = max(ext, hi[ax] - lo[ax])
    if ext == 0.0:
        ext = 1.0
    # about one point per cell on a two-dimensional sheet
    h = ext / max(1.0, math.sqrt(ny))
    dims = np.empty(3, dtype=np.int64)
    while True:
        tot = 1
        for ax in range(3):
            dims[ax] = int((hi[ax] - lo[ax]) / h) + 1
            tot *= dims[ax]
        if tot <= 4 * ny + 8:
            break
        h *= 1.5
    counts, order = _build_grid(Y, lo, h, dims)
    maxr = max(dims[0], max(dims[1], dims[2]))
    cmax = 0.0
    cc = np.empty(3, dtype=np.int64)
    for i in range(X.shape[0]):
        for ax in range(3):
            q = int((X[i, ax] - lo[ax]) / h)
            if q < 0:
                q = 0
            if q >= dims[ax]:
                q = dims[ax] - 1
            cc[ax] = q
        best = np.inf
        done = False
        for r in range(maxr + 1):
            for a0 in range(max(0, cc[0] - r), min(dims[0], cc[0] + r + 1)):
                for a1 in range(max(0, cc[1] - r), min(dims[1], cc[1] + r + 1)):
                    for a2 in range(max(0, cc[2] - r), min(dims[2], cc[2] + r + 1)):
                        if max(abs(a0 - cc[0]), max(abs(a1 - cc[1]), abs(a2 - cc[2]))) != r:
                            continue
                        c = (a0 * dims[1] + a1) * dims[2] + a2
                        for t in range(counts[c], counts[c + 1]):
                            j = order[t]
                            dx = X[i, 0] - Y[j, 0]
                            dy = X[i, 1] - Y[j, 1]
                            dz = X[i, 2] - Y[j, 2]
                            d2 = dx * dx + dy * dy + dz * dz
                            if d2 < best:
                                best = d2
            if best < cmax:
                done = True
                break
            # every cell in later rings is at least r·h away
            if best <= (r * h) * (r * h):
                break
        if not done and best > cmax:
            cmax = best
    return cmax
