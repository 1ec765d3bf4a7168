"""Time the numba kernels against their numpy twins.

    python benchmarks/bench_kernels.py [--repeat 5] [--json out.json]
"""

import argparse
import json
import time

import numpy as np

from firey_lab import _kernels


def best_of(fn, args, repeat):
    fn(*args)  # warm-up (includes compilation for numba)
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        times.append(time.perf_counter() - t0)
    return min(times)


def cases(rng):
    ang = rng.uniform(0, 2 * np.pi, 4096)
    ux, uy = np.cos(ang), np.sin(ang)
    px, py = rng.normal(size=2000), rng.normal(size=2000)
    yield "support_max 4096 x 2000", "support_max", (ux, uy, px, py)
    fa = np.sort(rng.uniform(0, 2 * np.pi, 2048))
    c = rng.uniform(0.5, 1.5, 2048)
    yield "ratio_min 4096 x 2048", "ratio_min", (c, np.cos(fa), np.sin(fa), ux, uy)
    a = rng.normal(size=1025) / (1 + np.arange(1025)) ** 2
    b = rng.normal(size=1025) / (1 + np.arange(1025)) ** 2
    yield "trig_eval 1025 modes x 4096", "trig_eval", (a, b, ang)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--json", default=None, help="also write the table as JSON")
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    rows = []
    print(f"{'kernel':32s} {'numpy [ms]':>12s} {'numba [ms]':>12s} {'speed-up':>9s}")
    for label, name, data in cases(rng):
        t_np = best_of(getattr(_kernels, name + "_numpy"), data, args.repeat)
        if _kernels.HAS_NUMBA:
            t_nb = best_of(getattr(_kernels, name + "_numba"), data, args.repeat)
        else:
            t_nb = float("nan")
        rows.append({"kernel": label, "numpy_s": t_np, "numba_s": t_nb})
        print(f"{label:32s} {1e3 * t_np:12.2f} {1e3 * t_nb:12.2f} {t_np / t_nb:9.1f}")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(rows, fh, indent=2)


if __name__ == "__main__":
    main()
