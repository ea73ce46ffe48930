"""Success frequency of the guess-the-seed prime finder against its
expected value, for the identity generator at several lengths."""
import argparse

from pseudodet.machines import SeededSampler
from pseudodet.nwprg import IdentityGenerator
from pseudodet.primes import prime_density, random_seed_prime


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--trials", type=int, default=100_000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    print("n,density,hits,trials,expected,z")
    for n in range(4, 13):
        rep = random_seed_prime(n, args.trials, SeededSampler("prime-rates", n, 1, args.seed), IdentityGenerator(n))
        print(f"{n},{float(prime_density(n)):.5f},{rep.hits},{rep.trials},{rep.expected},{rep.z:.2f}")


if __name__ == "__main__":
    main()
