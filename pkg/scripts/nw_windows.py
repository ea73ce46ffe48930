"""Worst distinguishing advantage of tests that read w output positions of
the canonical generator, by exhaustive seed enumeration."""
import argparse
from collections import Counter
from fractions import Fraction
from itertools import combinations, product

from pseudodet.nwprg import PseudodetPrgConfig, pseudodet_prg, seed_length


def worst_window(outs, n, w):
    best, where = Fraction(0), None
    for pos in combinations(range(n), w):
        joint = Counter("".join(o[p] for p in pos) for o in outs)
        tv = sum(max(Fraction(0), Fraction(c, len(outs)) - Fraction(1, 2**w)) for c in joint.values())
        if tv > best:
            best, where = tv, pos
    return best, where


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=12)
    ap.add_argument("--eps", type=float, default=0.9)
    ap.add_argument("--max-window", type=int, default=3)
    args = ap.parse_args()
    cfg = PseudodetPrgConfig(eps=args.eps)
    ell = seed_length(args.n, args.eps)
    outs = [pseudodet_prg(cfg, args.n, "".join(z)) for z in product("01", repeat=ell)]
    print("window,worst_advantage,positions")
    for w in range(1, args.max_window + 1):
        tv, pos = worst_window(outs, args.n, w)
        print(f"{w},{tv},{' '.join(map(str, pos or ()))}")


if __name__ == "__main__":
    main()
