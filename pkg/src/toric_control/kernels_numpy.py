"""Pure-numpy versions of the hot loops. Same signatures as :mod:`kernels_numba`."""
from __future__ import annotations

import numpy as np
from scipy.spatial import cKDTree

STEP_CAP = 30.0


def log_basis(H: np.ndarray, Hx: np.ndarray) -> np.ndarray:
    """``log β_a(x) = Σ_e H[a,e]·log h_e(x)`` with ``0·log 0 = 0``.

    ``H`` is (npts, nfacets) integer, ``Hx`` is (nsamples, nfacets) with the
    facet values at the samples; tiny negative values are clipped to zero.
    """
    Hx = np.maximum(Hx, 0.0)
    with np.errstate(divide="ignore"):
        lh = np.log(Hx)
    out = np.zeros((Hx.shape[0], H.shape[0]))
    for e in range(H.shape[1]):
        col = H[:, e].astype(np.float64)
        with np.errstate(invalid="ignore"):
            term = lh[:, e : e + 1] * col[None, :]
        # 0^0 = 1: a zero exponent contributes nothing even where h_e = 0
        term[:, col == 0] = 0.0
        out += term
    return out


def normalized_coefficients(L: np.ndarray, logw: np.ndarray) -> np.ndarray:
    """Row-wise softmax of ``L + logw``; rows sum to one."""
    Z = L + logw[None, :]
    zmax = Z.max(axis=1, keepdims=True)
    P = np.exp(Z - zmax)
    P /= P.sum(axis=1, keepdims=True)
    return P


def _objective(A, logw, Y, U):
    # f(u) = log Σ_a w_a exp(u·(a - y)), evaluated stably
    Z = logw[None, :] + U @ A.T - np.sum(U * Y, axis=1, keepdims=True)
    zmax = Z.max(axis=1, keepdims=True)
    E = np.exp(Z - zmax)
    S = E.sum(axis=1, keepdims=True)
    return (zmax + np.log(S))[:, 0], E / S


def moment_inverse(A: np.ndarray, logw: np.ndarray, Y: np.ndarray, tol: float, maxiter: int):
    """Simplex points ``p`` with ``p ∝ w_a exp(u·a)`` and ``Σ p_a a = y`` for each row y.

    Damped Newton on the convex objective ``log Σ w_a exp(u·(a-y))``, whose
    gradient is ``μ(u) - y`` and Hessian the covariance of ``a`` under ``p``.
    Returns ``(P, residual)`` with the final max-norm gradient per row.
    """
    ns, k = Y.shape
    span = max(float(np.ptp(A, axis=0).max()) if A.size else 0.0, 1.0)
    U = np.zeros((ns, k))
    f, P = _objective(A, logw, Y, U)
    resid = np.full(ns, np.inf)
    active = np.ones(ns, dtype=bool)
    for _ in range(maxiter):
        idx = np.nonzero(active)[0]
        if idx.size == 0:
            break
        Pa = P[idx]
        mu = Pa @ A
        g = mu - Y[idx]
        resid[idx] = np.abs(g).max(axis=1)
        conv = resid[idx] <= tol
        active[idx[conv]] = False
        idx, Pa, mu, g = idx[~conv], Pa[~conv], mu[~conv], g[~conv]
        if idx.size == 0:
            break
        Hs = np.einsum("sa,ai,aj->sij", Pa, A, A) - mu[:, :, None] * mu[:, None, :]
        Hs += 1e-300 * np.eye(k)[None]
        try:
            step = -np.linalg.solve(Hs, g[:, :, None])[:, :, 0]
        except np.linalg.LinAlgError:
            step = -g
        slope = np.sum(g * step, axis=1)
        bad = ~(slope < 0)
        step[bad] = -g[bad]
        slope[bad] = -np.sum(g[bad] * g[bad], axis=1)
        # trust region: no logit moves by more than STEP_CAP in one step
        big = np.abs(step).sum(axis=1) * span
        shrink = np.where(big > STEP_CAP, STEP_CAP / np.maximum(big, 1e-300), 1.0)
        step *= shrink[:, None]
        slope *= shrink
        alpha = np.ones(idx.size)
        f0 = f[idx]
        todo = np.ones(idx.size, dtype=bool)
        for _ls in range(60):
            Ut = U[idx] + alpha[:, None] * step
            ft, Pt = _objective(A, logw, Y[idx], Ut)
            ok = ft <= f0 + 1e-4 * alpha * slope
            # decrease below rounding of f: judge by the gradient instead
            noisy = ~ok & (ft - f0 <= 1e-13 * (1.0 + np.abs(f0)))
            if noisy.any():
                rt = np.abs(Pt @ A - Y[idx]).max(axis=1)
                ok |= noisy & (rt < resid[idx])
            take = todo & ok
            sel = idx[take]
            U[sel] = Ut[take]
            f[sel] = ft[take]
            P[sel] = Pt[take]
            todo &= ~ok
            if not todo.any():
                break
            alpha[todo] *= 0.5
        # rows whose line search stalled are at the floating point floor
        active[idx[todo]] = False
    return P, resid


def directed_hausdorff_sq(X: np.ndarray, Y: np.ndarray, chunk: int = 2048) -> float:
    """``max_x min_y |x-y|^2`` by chunked brute force."""
    best = 0.0
    for s in range(0, X.shape[0], chunk):
        Xc = X[s : s + chunk]
        dx = Xc[:, 0:1] - Y[None, :, 0]
        dy = Xc[:, 1:2] - Y[None, :, 1]
        dz = Xc[:, 2:3] - Y[None, :, 2]
        d2 = dx * dx + dy * dy + dz * dz
        best = max(best, float(d2.min(axis=1).max()))
    return best


def directed_hausdorff_sq_indexed(X: np.ndarray, Y: np.ndarray) -> float:
    """Spatial-index variant; the numpy path uses a k-d tree."""
    d, _ = cKDTree(Y).query(X, k=1)
    return float(np.max(d) ** 2)
