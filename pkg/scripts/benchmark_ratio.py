"""Asymmetric/symmetric runtime ratio of the two-stage estimator over sample sizes.

    python3 scripts/benchmark_ratio.py --d 8 200 --repeats 10
"""
from __future__ import annotations

import argparse
import json

from censcorr.harness import BENCH_N_GRID, benchmark_runtime, benchmark_table, benchmark_to_dict, synth_generate


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--d", type=int, nargs="+", default=[8, 200], help="variable counts to benchmark")
    ap.add_argument("--n-values", type=int, nargs="+", default=list(BENCH_N_GRID))
    ap.add_argument("--iters", type=int, default=30)
    ap.add_argument("--repeats", type=int, default=10)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--json", action="store_true", help="print JSON records instead of tables")
    args = ap.parse_args()

    out = {}
    for d in args.d:
        ds = synth_generate(d, max(args.n_values), 0.5, args.seed)
        rows = benchmark_runtime(ds, args.n_values, iters=args.iters, repeats=args.repeats, seed=args.seed)
        if args.json:
            out[str(d)] = benchmark_to_dict(rows)
        else:
            print(f"d = {d}")
            print(benchmark_table(rows))
            print()
    if args.json:
        print(json.dumps(out, indent=2))


if __name__ == "__main__":
    main()
