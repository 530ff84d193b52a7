"""Time the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--json out.json]

Prints one row per kernel: best wall time for each backend and the speedup.
The inputs mirror one density transport step at M = 32 with a K = 2 velocity
and one direct mollifier convolution with a 5-cell kernel.
"""
import argparse
import json
import timeit

import numpy as np

from hallmhd import kernels
from hallmhd.mollifier import build_mollifier
from hallmhd.spectral_basis import TorusDomain, enumerate_modes


def cases(M=32, seed=0):
    rng = np.random.default_rng(seed)
    d = TorusDomain(2 * np.pi, M)
    basis = enumerate_modes(d, 2)
    amps = basis.amplitudes(rng.standard_normal(basis.n))
    pts = d.points()
    field = rng.uniform(1.0, 2.0, (M,) * 3)
    idx = rng.uniform(0, M, (M ** 3, 3))
    moll = build_mollifier(5 * d.dx, d)
    return {
        "eval_modes": lambda b: kernels.eval_modes(amps, basis.kvecs, d.kappa, pts, backend=b),
        "tricubic_clipped": lambda b: kernels.tricubic_clipped(field, idx, backend=b),
        "convolve_direct": lambda b: kernels.convolve_direct(field, moll.offsets, moll.weights, backend=b),
    }


def run(repeat=5, M=32):
    rows = []
    for name, fn in cases(M).items():
        row = {"kernel": name}
        for b in kernels.backends():
            fn(b)  # warm up
            row[b] = min(timeit.repeat(lambda: fn(b), number=1, repeat=repeat))
        if "compiled" in row:
            row["speedup"] = row["python"] / row["compiled"]
        rows.append(row)
    return rows


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--M", type=int, default=32)
    ap.add_argument("--json", default=None, help="also write the rows to this file")
    args = ap.parse_args(argv)
    rows = run(args.repeat, args.M)
    print(f"{'kernel':<18} {'python [s]':>11} {'compiled [s]':>13} {'speedup':>8}")
    for r in rows:
        comp = f"{r['compiled']:13.4f}" if "compiled" in r else f"{'n/a':>13}"
        sp = f"{r['speedup']:8.1f}" if "speedup" in r else f"{'':>8}"
        print(f"{r['kernel']:<18} {r['python']:11.4f} {comp} {sp}")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(rows, fh, indent=2)


if __name__ == "__main__":
    main()
