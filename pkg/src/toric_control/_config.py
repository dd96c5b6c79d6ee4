"""Runtime switches.

``TORIC_CONTROL_NUMBA=0`` forces the pure-numpy kernels even when numba is
installed. The flag is read once at import time.
"""
import os

_flag = os.environ.get("TORIC_CONTROL_NUMBA", "1").strip().lower()
NUMBA_REQUESTED = _flag not in ("0", "false", "no", "off")

try:
    import numba  # noqa: F401

    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    NUMBA_AVAILABLE = False

USE_NUMBA = NUMBA_REQUESTED and NUMBA_AVAILABLE

# Newton settings for inverting the moment map
NEWTON_TOL = 1e-13
NEWTON_MAXITER = 200
