"""Time the numba kernels against the pure-numpy fallback.

Usage: python3 benchmarks/bench_kernels.py [--n-enb N] [--n-ue N]
Run with HETNETSIM_NO_NUMBA unset so both backends are importable.
"""

import argparse
import time

import numpy as np

from hetnetsim import _kernels


def _time(fn, *args, repeat=5, warmup=1):
    for _ in range(warmup):
        fn(*args)
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n-enb", type=int, default=400)
    ap.add_argument("--n-ue", type=int, default=8000)
    ap.add_argument("--n-bands", type=int, default=3)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    rx = rng.exponential(1.0, size=args.n_enb)
    band = rng.integers(0, args.n_bands, size=args.n_enb)
    is_micro = rng.random(args.n_enb) < 0.8
    rx_mat = rng.exponential(1.0, size=(args.n_ue, args.n_enb))

    pairs = [("sir_from_rx", (rx, band, args.n_bands)),
             ("serve_ues", (rx_mat, band, is_micro, args.n_bands, 1.0, True))]

    print(f"active backend: {_kernels.backend_name()}")
    print(f"{'kernel':<14}{'numpy [ms]':>12}{'numba [ms]':>12}{'speedup':>9}")
    for name, call_args in pairs:
        np_fn = getattr(_kernels, name + "_numpy")
        t_np = _time(np_fn, *call_args, repeat=args.repeat)
        nb_fn = getattr(_kernels, name + "_numba", None)
        if nb_fn is None:
            print(f"{name:<14}{t_np * 1e3:>12.3f}{'n/a':>12}{'n/a':>9}")
            continue
        assert np.allclose(np_fn(*call_args), nb_fn(*call_args))
        t_nb = _time(nb_fn, *call_args, repeat=args.repeat)
        print(f"{name:<14}{t_np * 1e3:>12.3f}{t_nb * 1e3:>12.3f}"
              f"{t_np / t_nb:>8.2f}x")


if __name__ == "__main__":
    main()
