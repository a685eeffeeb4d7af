"""Exact vs exhaustive enumeration over a grid of random instance sizes.

    python scripts/bench.py [--sizes 25,50,100] [--q 5,10] [--seed 2015]

Each cell has one fixed input and q candidate outputs drawn from U[50, 100).
"""

import argparse

from robustdea.cli import bench_cell


def ints(text):
    return [int(t) for t in text.split(",")]


def main(argv=None):
    ap = argparse.ArgumentParser(description="exact vs exhaustive enumeration")
    ap.add_argument("--sizes", type=ints, default=[25, 50])
    ap.add_argument("--q", type=ints, default=[5, 10])
    ap.add_argument("--seed", type=int, default=2015)
    args = ap.parse_args(argv)
    print(f"{'n':>5} {'q':>3} {'exact LPs':>10} {'all LPs':>10} {'LP %':>7} {'time %':>7} match")
    for n in args.sizes:
        for q in args.q:
            c = bench_cell(n, q, args.seed)
            print(f"{n:>5} {q:>3} {c['alg_lps']:>10} {c['total_lps']:>10} {c['ratio_percent_lps']:>6.1f}% "
                  f"{c['ratio_percent_time']:>6.1f}% {c['scores_match']}")


if __name__ == "__main__":
    main()
