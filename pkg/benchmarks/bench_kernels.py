"""Time the numba and numpy versions of each hot kernel on the same inputs.

    python benchmarks/bench_kernels.py [--repeat 5]

Compilation happens in a warm-up call and is not counted.  The last column is
the largest difference between the two backends' outputs, relative to the
largest output entry; for the series it is relative to the sum of |terms|,
since many of those points sit deep in cancellation.
"""

import argparse
import time

import numpy as np

from fracdirac import _accel, _kernels


def series_case(rng):
    zs = rng.uniform(-15, 15, 20_000) + 1j * rng.uniform(-15, 15, 20_000)

    def run():
        vals, abs_sum = _kernels.ml_series_many(0.7, 1.0, zs, 1e-15, 10_000)[:2]
        return vals, abs_sum

    return run


def abm_case(rng):
    A = rng.normal(size=(8, 8)) * 0.3 + 0j
    taylor = np.tile(rng.normal(size=8) + 0j, (4001, 1))
    return lambda: _kernels.abm_linear(A, taylor, 0.6, 5e-4)


def rl_case(rng):
    t = np.linspace(0.0, 1.0, 4001)
    vals = np.stack([np.cos(3 * t), t**2, np.exp(-t)], axis=1) + 0j
    return lambda: _kernels.rl_integral_all(0.5, vals, t[1])


def conv_case(rng):
    w = rng.uniform(size=8000)
    d = rng.normal(size=(8000, 4)) + 0j
    return lambda: _kernels.interval_convolution(w, d)


CASES = {
    "ml series (20k points)": series_case,
    "ABM predictor-corrector (8x8, 4000 steps)": abm_case,
    "RL integral, all nodes (4000)": rl_case,
    "interval convolution (8000)": conv_case,
}


def best_time(fn, repeat):
    fn()  # warm-up / JIT compile
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if not _accel.HAVE_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")

    print(f"{'kernel':<44} {'numba [s]':>10} {'numpy [s]':>10} {'speed-up':>9} {'rel diff':>10}")
    for name, make in CASES.items():
        fn = make(np.random.default_rng(0))
        with _accel.backend("numba"):
            t_nb, out_nb = best_time(fn, args.repeat)
        with _accel.backend("numpy"):
            t_np, out_np = best_time(fn, args.repeat)
        if isinstance(out_np, tuple):
            (out_nb, _), (out_np, scale) = out_nb, out_np
        else:
            scale = np.max(np.abs(out_np))
        diff = np.max(np.abs(out_nb - out_np) / scale)
        print(f"{name:<44} {t_nb:>10.4f} {t_np:>10.4f} {t_np / t_nb:>8.1f}x {diff:>10.2e}")


if __name__ == "__main__":
    main()
