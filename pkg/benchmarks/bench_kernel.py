"""Time one full-window CUSUM KS scan with each backend.

Compares the numba sweep, the numba kinetic tree and the pure-numpy sweep
on scenario-3 style data and checks that all three return the same answer.

    python3 benchmarks/bench_kernel.py --T 1000 2000 4000 --n 1 --repeats 5
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from kscpd import Dataset
from kscpd.kernel import _scan_one, _scan_one_numpy

BACKENDS = {
    "numba-sweep": lambda d: _scan_one(d.values, d.offsets, 0, d.T, 1),
    "numba-kinetic": lambda d: _scan_one(d.values, d.offsets, 0, d.T, 2),
    "numba-auto": lambda d: _scan_one(d.values, d.offsets, 0, d.T, 0),
    "numpy-sweep": lambda d: _scan_one_numpy(d.values, d.offsets, 0, d.T),
}


def best_time(fn, data, repeats):
    fn(data)  # compile / warm caches
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn(data)
        times.append(time.perf_counter() - t0)
    return min(times), out


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--T", type=int, nargs="+", default=[1000, 2000, 4000, 8000])
    p.add_argument("--n", type=int, default=1, help="observations per time point")
    p.add_argument("--repeats", type=int, default=5)
    p.add_argument("--skip-numpy-above", type=int, default=4000,
                   help="skip the numpy sweep for larger T (it is quadratic)")
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args(argv)

    rng = np.random.default_rng(args.seed)
    print(f"{'T':>7} {'n_total':>8} " + " ".join(f"{b:>14}" for b in BACKENDS) + "   (ms, best of repeats)")
    for T in args.T:
        mean = (np.arange(T) * 6 // T) % 2
        data = Dataset(mean[:, None] + rng.standard_normal((T, args.n)))
        row, answers = [], []
        for name, fn in BACKENDS.items():
            if name == "numpy-sweep" and T > args.skip_numpy_above:
                row.append(f"{'-':>14}")
                continue
            secs, out = best_time(fn, data, args.repeats)
            answers.append((float(out[0]), int(out[1]), float(out[2])))
            row.append(f"{secs * 1e3:14.2f}")
        agree = "ok" if all(a == answers[0] for a in answers) else "MISMATCH"
        print(f"{T:>7} {data.n_total:>8} " + " ".join(row) + f"   {agree}")


if __name__ == "__main__":
    main()
