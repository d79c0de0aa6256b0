"""Compare the compiled and pure-Python kernel backends.

Usage::

    python3 benchmarks/bench_kernels.py [--repeat 5] [--json out.json]

Times each kernel on workloads shaped like the ones the simulator produces
(decoder tables over short sequences, encoder matching over a codebook),
checks that both backends return the same values, and prints a table.
"""
from __future__ import annotations

import argparse
import json
import platform
import sys
import timeit

import numpy as np

from covertkey import _kernels, oneshot
from covertkey.probcore import Pmf


def workloads(rng):
    # decoder table: every x in {0,1}^8 against a 64-entry codebook
    xs = oneshot.all_sequences(2, 8)
    ys = rng.integers(0, 2, size=(64, 8))
    # long sequences: one x against 512 candidates of length 200
    x_long = rng.integers(0, 2, size=200)
    ys_long = rng.integers(0, 3, size=(512, 200))
    # encoder matching: one y against 4096 entries of length 12
    entries = rng.integers(0, 2, size=(4096, 12))
    return [
        ("mi_matrix 256x64, n=8", "mi_matrix", (xs, ys, 2, 2)),
        ("mi_rows 512 rows, n=200", "mi_rows", (x_long, ys_long, 2, 3)),
        ("row_matches 4096 rows, n=12", "row_matches", (entries[17], entries)),
    ]


def time_call(fn, args, repeat):
    number = 1
    while timeit.timeit(lambda: fn(*args), number=number) < 0.05:
        number *= 2
    return min(timeit.repeat(lambda: fn(*args), number=number, repeat=repeat)) / number


def end_to_end(repeat):
    """Full decoder table for a small codebook, through the public API."""
    cb = oneshot.gen_codebook(Pmf.uniform((0, 1)), 8, 4, 4, 4, np.random.default_rng(1))
    return time_call(lambda: oneshot.decoder_table(cb, 2), (), repeat)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--json", help="also write results to this path")
    args = ap.parse_args(argv)

    py, cy = _kernels.python_backend, _kernels.compiled_backend
    if cy is None:
        print("compiled backend not available; only the pure-Python timings are shown")
    rng = np.random.default_rng(0)
    rows = []
    for label, name, call_args in workloads(rng):
        row = {"workload": label, "python_s": time_call(getattr(py, name), call_args, args.repeat)}
        if cy is not None:
            a, b = getattr(py, name)(*call_args), getattr(cy, name)(*call_args)
            if not np.allclose(a, b, atol=1e-12):
                print(f"backends disagree on {label}", file=sys.stderr)
                return 1
            row["cython_s"] = time_call(getattr(cy, name), call_args, args.repeat)
            row["speedup"] = row["python_s"] / row["cython_s"]
        rows.append(row)
    rows.append({"workload": f"decoder_table via {_kernels.BACKEND}", "active_s": end_to_end(args.repeat)})

    print(f"python {platform.python_version()}, numpy {np.__version__}, active backend {_kernels.BACKEND}")
    print(f"{'workload':<32}{'python':>12}{'cython':>12}{'speedup':>10}")
    for r in rows[:-1]:
        cyt = f"{r['cython_s'] * 1e6:10.1f}us" if "cython_s" in r else f"{'-':>12}"
        sp = f"{r['speedup']:9.1f}x" if "speedup" in r else f"{'-':>10}"
        print(f"{r['workload']:<32}{r['python_s'] * 1e6:10.1f}us{cyt}{sp}")
    last = rows[-1]
    print(f"{last['workload']:<32}{last['active_s'] * 1e6:10.1f}us")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(rows, fh, indent=2)
    return 0


if __name__ == "__main__":
    sys.exit(main())
