"""Time the numba kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--steps 65536] [--repeat 5]

Both implementations are imported directly, so the env flag does not matter
here.  Times are best-of-``repeat`` after one warmup call.
"""
import argparse
import time

import numpy as np

from levelcross.kernels import numba_impl, numpy_impl
from levelcross.paths import circle_path
from levelcross.propagator import hamiltonian_coeffs


def best_of(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--steps", type=int, default=2 ** 16)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    path = circle_path(1.0, np.pi / 2, 100.0)
    dt = path.T / args.steps
    coeffs = np.ascontiguousarray(hamiltonian_coeffs(path, (np.arange(args.steps) + 0.5) * dt))
    psi0 = np.array([1, -1], dtype=np.complex128) / np.sqrt(2)
    keep = np.unique(np.linspace(0, args.steps, 4096).astype(np.int64))
    steps = numpy_impl.expm_steps(coeffs, dt)

    print(f"n_steps = {args.steps}, best of {args.repeat}")
    print(f"{'kernel':<14}{'numpy (ms)':>12}{'numba (ms)':>12}{'speedup':>10}")
    for name, call in [
        ("expm_steps", lambda m: m.expm_steps(coeffs, dt)),
        ("euler_steps", lambda m: m.euler_steps(coeffs, dt)),
        ("propagate", lambda m: m.propagate(steps, psi0, keep)),
    ]:
        a = best_of(lambda: call(numpy_impl), args.repeat)
        b = best_of(lambda: call(numba_impl), args.repeat)
        print(f"{name:<14}{a * 1e3:>12.3f}{b * 1e3:>12.3f}{a / b:>10.1f}")

    ua, sa = numpy_impl.propagate(steps, psi0, keep)
    ub, sb = numba_impl.propagate(numba_impl.expm_steps(coeffs, dt), psi0, keep)
    print(f"max |state difference| between backends: {np.max(np.abs(sa - sb)):.2e}")


if __name__ == "__main__":
    main()
