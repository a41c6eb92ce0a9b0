#!/usr/bin/env python3
"""Times the compiled solver kernel against the pure-Python fallback.

The hot path of every experiment is the bisection solve of the combined-SNR
equation, alone or over all 2**n relay subsets. This script times both
backends on identical inputs and reports the speedup.

Usage: python benchmarks/bench_kernels.py [--relays N] [--repeats R]
"""

import argparse
import time

import numpy as np

from coalnet._kernels import _pure

try:
    from coalnet._kernels import _fast
except ImportError:
    _fast = None

GAMMA = 10.0
NOISE = 1e-6


def make_case(rng, n):
    g_sd = rng.uniform(1.1e-6, 1e-4)
    return {
        "g_sd": g_sd,
        "g_sr": rng.uniform(1e-7, 1e-2, size=n),
        "g_rd": rng.uniform(1e-7, 1e-2, size=n),
        "p_rel": rng.uniform(0.5, 10.0, size=n),
        "p_d": GAMMA * NOISE / g_sd,
    }


def time_single_solves(impl, case, repeats):
    n = len(case["g_sr"])
    start = time.perf_counter()
    acc = 0.0
    for _ in range(repeats):
        acc += impl.solve_p0(
            case["g_sd"], case["g_sr"], case["g_rd"], case["p_rel"],
            NOISE, GAMMA, case["p_d"],
        )
    elapsed = time.perf_counter() - start
    return elapsed / repeats, acc


def time_table(impl, case, repeats):
    start = time.perf_counter()
    out = None
    for _ in range(repeats):
        out = impl.p0_table(
            case["g_sd"], case["g_sr"], case["g_rd"], case["p_rel"],
            NOISE, GAMMA, case["p_d"],
        )
    elapsed = time.perf_counter() - start
    return elapsed / repeats, out


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--relays", type=int, default=12,
                        help="relay count for the subset-table benchmark")
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    case = make_case(rng, args.relays)

    backends = [("pure-python", _pure)]
    if _fast is not None:
        backends.append(("compiled", _fast))
    else:
        print("compiled kernel not built; timing the fallback only")

    print(f"single solve, {args.relays} relays, {args.repeats * 2000} calls:")
    singles = {}
    for label, impl in backends:
        per_call, acc = time_single_solves(impl, case, args.repeats * 2000)
        singles[label] = per_call
        print(f"  {label:>12}: {per_call * 1e6:9.2f} us/solve")
    print(f"subset table, 2**{args.relays} = {1 << args.relays} solves, "
          f"{args.repeats} fills:")
    tables = {}
    results = {}
    for label, impl in backends:
        per_fill, out = time_table(impl, case, args.repeats)
        tables[label] = per_fill
        results[label] = out
        print(f"  {label:>12}: {per_fill:9.3f} s/fill")
    if _fast is not None:
        agree = np.allclose(results["pure-python"], results["compiled"], rtol=1e-11)
        print(f"backends agree to solver tolerance: {agree}")
        print(f"speedup: single {singles['pure-python'] / singles['compiled']:.1f}x, "
              f"table {tables['pure-python'] / tables['compiled']:.1f}x")


if __name__ == "__main__":
    main()
