"""Backend dispatch for the numerical kernels.

Both backends stay importable so they can be compared; the active one is
chosen by ``TORIC_CONTROL_NUMBA`` (see :mod:`toric_control._config`).
"""
from __future__ import annotations

import numpy as np

from . import _config
from . import kernels_numpy as numpy_backend

if _config.USE_NUMBA:
    from . import kernels_numba as numba_backend

    _active = numba_backend
else:  # pragma: no cover - exercised with the env flag
    numba_backend = None
    _active = numpy_backend

BACKEND = "numba" if _config.USE_NUMBA else "numpy"


def backend(name: str | None = None):
    if name is None:
        return _active
    if name == "numpy":
        return numpy_backend
    if name == "numba":
        if numba_backend is None:
            raise RuntimeError("numba backend disabled (TORIC_CONTROL_NUMBA=0 or numba missing)")
        return numba_backend
    raise ValueError(f"unknown backend {name!r}")


def _f64(a):
    return np.ascontiguousarray(a, dtype=np.float64)


def log_basis(H, Hx, impl=None):
    return backend(impl).log_basis(np.ascontiguousarray(H, dtype=np.int64), _f64(Hx))


def normalized_coefficients(L, logw, impl=None):
    return backend(impl).normalized_coefficients(_f64(L), _f64(logw))


def moment_inverse(A, logw, Y, impl=None, tol=None, maxiter=None):
    tol = _config.NEWTON_TOL if tol is None else tol
    maxiter = _config.NEWTON_MAXITER if maxiter is None else maxiter
    Y = _f64(Y)
    if Y.shape[0] == 0:
        return np.zeros((0, len(logw))), np.zeros(0)
    return backend(impl).moment_inverse(_f64(A), _f64(logw), Y, float(tol), int(maxiter))


def _pad3(X):
    X = _f64(X)
    if X.shape[1] == 3:
        return X
    out = np.zeros((X.shape[0], 3))
    out[:, : X.shape[1]] = X
    return out


def directed_hausdorff(X, Y, method="brute", impl=None) -> float:
    """``max_x min_y |x - y|`` for point arrays with at most three columns."""
    X, Y = _pad3(X), _pad3(Y)
    b = backend(impl)
    if method == "brute":
        return float(np.sqrt(b.directed_hausdorff_sq(X, Y)))
    if method == "grid":
        return float(np.sqrt(b.directed_hausdorff_sq_indexed(X, Y)))
    raise ValueError(f"unknown method {method!r}")
