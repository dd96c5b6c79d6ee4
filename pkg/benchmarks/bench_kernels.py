"""Compare the numba kernels against the pure-numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 3] [-m 65]

Each row reports the best of ``--repeat`` timings after one warm-up call
(which also triggers numba compilation), plus the max deviation between the
two backends' results.
"""
import argparse
import time

import numpy as np

from toric_control import artifact_io as aio
from toric_control import kernels
from toric_control.degeneration import convergence_sweep


def best_of(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def cases(m):
    rng = np.random.default_rng(0)
    A = np.array([[i, j] for j in range(4) for i in range(4)], dtype=float)
    logw = np.log(rng.uniform(0.5, 9, 16)) + np.log(625.0) * rng.integers(0, 3, 16)
    Y = rng.uniform(0.01, 2.99, size=(m * m, 2))
    H = rng.integers(0, 4, size=(16, 4))
    Hx = rng.uniform(0, 3, size=(m * m, 4))
    X = rng.normal(size=(m * m, 3))
    Z = X + 1e-3 * rng.normal(size=X.shape)
    Wfar = rng.normal(size=(m * m, 3)) + 0.5
    exp = aio.load_experiment(aio.data_path("bicubic_fig3"))
    return {
        "log_basis": lambda impl: kernels.log_basis(H, Hx, impl=impl),
        "moment_inverse": lambda impl: kernels.moment_inverse(A, logw, Y, impl=impl)[0],
        "hausdorff brute (near)": lambda impl: kernels.directed_hausdorff(X, Z, "brute", impl),
        "hausdorff brute (far)": lambda impl: kernels.directed_hausdorff(X, Wfar, "brute", impl),
        "hausdorff grid (far)": lambda impl: kernels.directed_hausdorff(X, Wfar, "grid", impl),
        "bicubic sweep": lambda impl: np.array(
            convergence_sweep(exp.spec, exp.lifting, exp.schedule, m, impl=impl).distances
        ),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("-m", "--resolution", type=int, default=65)
    args = ap.parse_args(argv)
    if kernels.numba_backend is None:
        raise SystemExit("numba backend disabled; unset TORIC_CONTROL_NUMBA to compare")
    print(f"m={args.resolution} ({args.resolution ** 2} samples), best of {args.repeat}")
    print(f"{'kernel':<24}{'numpy [s]':>12}{'numba [s]':>12}{'speedup':>10}{'max |diff|':>14}")
    for name, fn in cases(args.resolution).items():
        tn, a = best_of(lambda: fn("numpy"), args.repeat)
        tb, b = best_of(lambda: fn("numba"), args.repeat)
        diff = float(np.max(np.abs(np.asarray(a, float) - np.asarray(b, float))))
        print(f"{name:<24}{tn:>12.4f}{tb:>12.4f}{tn / tb:>10.1f}{diff:>14.2e}")


if __name__ == "__main__":
    main()
