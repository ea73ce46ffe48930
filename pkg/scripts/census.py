"""rKt / Kt histograms for every string length up to --max-m, as CSV."""
import argparse
import sys

from pseudodet.kolmogorov import ComplexityBudget, counting_bound_holds, rkt_census


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--max-m", type=int, default=10)
    ap.add_argument("--measure", choices=["rKt", "Kt"], default="rKt")
    args = ap.parse_args()
    b = ComplexityBudget()
    w = sys.stdout.write
    w("m,value,count,counting_bound_ok\n")
    for m in range(1, args.max_m + 1):
        hist = rkt_census(m, b, args.measure)
        ok = counting_bound_holds(hist, b)
        for v in sorted(hist, key=lambda v: (v is None, v)):
            w(f"{m},{'none' if v is None else v},{hist[v]},{ok}\n")


if __name__ == "__main__":
    main()
