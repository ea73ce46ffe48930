"""Primes from generator outputs: succinct representations, a low-probability
random generator, and witnesses for their time-bounded complexity."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import BudgetError, ParameterError
from .kolmogorov import log_cost
from .machines import ECHO, JMP, OUT0, OUT1, RDI, SeededSampler, ToyProgram, exec_program
from .manifest import load_manifest
from .nwprg import ENUM_CAP, ConstantGenerator, Generator, IdentityGenerator
from .parallel import first_index

MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
NOT_APPLICABLE = "NOT-APPLICABLE"


def is_prime(v: int) -> bool:
    """Miller-Rabin with a base set that is exact below 2^64."""
    if v < 0:
        raise ValueError("negative input")
    if v >= 1 << 64:
        raise BudgetError("is_prime is exact only below 2^64")
    if v < 2:
        return False
    for p in MR_BASES:
        if v % p == 0:
            return v == p
    d, s = v - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in MR_BASES:
        x = pow(a, d, v)
        if x in (1, v - 1):
            continue
        for _ in range(s - 1):
            x = x * x % v
            if x == v - 1:
                break
        else:
            return False
    return True


def trial_division_primes(limit: int) -> np.ndarray:
    sieve = np.ones(limit, dtype=bool)
    sieve[:2] = False
    for q in range(2, math.isqrt(limit - 1) + 1):
        if sieve[q]:
            sieve[q * q :: q] = False
    return sieve


def prime_density(n: int) -> Fraction:
    """Fraction of primes among the integers in [0, 2^n)."""
    if n > 26:
        raise BudgetError("density enumeration capped at 26 bits")
    return Fraction(int(trial_division_primes(1 << n).sum()), 1 << n)


def _value(bits: str, n: int) -> int:
    return int(bits[:n], 2)


@dataclass(frozen=True)
class SuccinctPrime:
    seed: str
    prime: int
    n: int
    generator: Generator

    def __post_init__(self):
        if _value(self.generator.generate(self.seed), self.n) != self.prime:
            raise AssertionError("seed does not expand to the prime")
        if not is_prime(self.prime):
            raise AssertionError(f"{self.prime} is not prime")

    def as_json(self) -> dict:
        return {"seed": self.seed, "prime": self.prime, "n": self.n, "generator": self.generator.describe()}


def _check(g: Generator, n: int):
    if g.seed_len > ENUM_CAP:
        raise BudgetError(f"seed length {g.seed_len} > {ENUM_CAP}")
    if not 1 <= n <= 64 or g.output_len < n:
        raise ParameterError("need 1 <= n <= 64 and at least n output bits")


@dataclass(frozen=True)
class _PrimeOutput:
    g: Generator
    n: int

    def __call__(self, seed: str) -> bool:
        return is_prime(_value(self.g.generate(seed), self.n))


def _seeds(g: Generator) -> list[str]:
    return [format(v, f"0{g.seed_len}b") if g.seed_len else "" for v in range(1 << g.seed_len)]


def find_prime_via_prg(g: Generator, n: int, workers: int = 1) -> SuccinctPrime | None:
    """First seed in lexicographic order whose n-bit output prefix, read
    most significant bit first, is prime."""
    _check(g, n)
    seeds = _seeds(g)
    k = first_index(_PrimeOutput(g, n), seeds, workers, chunk=4096)
    if k is None:
        return None
    return SuccinctPrime(seeds[k], _value(g.generate(seeds[k]), n), n, g)


@dataclass(frozen=True)
class RateReport:
    status: str
    trials: int
    hits: int
    expected: Fraction | None

    @property
    def frequency(self) -> float | None:
        return self.hits / self.trials if self.trials else None

    @property
    def sigma(self) -> float | None:
        if not self.trials or self.expected is None:
            return None
        p = float(self.expected)
        return math.sqrt(p * (1 - p) / self.trials)

    @property
    def z(self) -> float | None:
        s = self.sigma
        if s is None or s == 0:
            return None
        return (self.frequency - float(self.expected)) / s

    def as_json(self) -> dict:
        return {
            "status": self.status,
            "trials": self.trials,
            "hits": self.hits,
            "frequency": self.frequency,
            "expected": None if self.expected is None else str(self.expected),
            "z": self.z,
        }


def random_seed_prime(n: int, trials: int, sampler: SeededSampler, g: Generator, advice: int | None = None) -> RateReport:
    """Guess the advice bit and the seed at random; a run succeeds iff the
    advice is 1 and the seed expands to the canonical prime. Advice 0 makes
    the run output 0^n. Passing ``advice`` fixes the bit instead of guessing."""
    target = find_prime_via_prg(g, n)
    if target is None:
        return RateReport(NOT_APPLICABLE, trials, 0, None)
    hitting = {int(s, 2) if s else 0 for s in _seeds(g) if _value(g.generate(s), n) == target.prime}
    share = Fraction(len(hitting), 1 << g.seed_len)
    expected = share if advice == 1 else Fraction(0) if advice == 0 else share / 2
    if trials == 0:
        return RateReport("EMPTY", 0, 0, expected)
    rng = sampler.rng
    adv = rng.integers(0, 2, size=trials) if advice is None else np.full(trials, advice)
    seeds = rng.integers(0, 1 << g.seed_len, size=trials)
    hits = int(np.sum((adv == 1) & np.isin(seeds, list(hitting))))
    return RateReport("OK", trials, hits, expected)


@dataclass(frozen=True)
class PrimeWitness:
    program: ToyProgram
    aux: str
    t: int
    cost: int
    bound: int

    @property
    def output(self) -> str:
        return exec_program(self.program, self.aux, self.t, "0" * self.t).output


COPY_PRINTER = ToyProgram.of((RDI, ECHO), JMP)


def rk_poly_prime_witness(sp: SuccinctPrime, eps: float | None = None) -> PrimeWitness:
    """(program, seed) pair printing the prime's n-bit encoding; cost |M| + |a|.
    Only generators that a memoryless toy program can run are supported."""
    target = format(sp.prime, f"0{sp.n}b")
    g = sp.generator
    if isinstance(g, IdentityGenerator):
        prog, aux, t = COPY_PRINTER, sp.seed[: sp.n], 2 * sp.n - 1
    elif isinstance(g, ConstantGenerator):
        prog = ToyProgram.of(*(OUT1 if c == "1" else OUT0 for c in target))
        aux, t = "", sp.n
    else:
        raise BudgetError(f"{type(g).__name__} has no toy-program expansion")
    cost = prog.description_length + len(aux)
    ell = len(sp.seed) if eps is None else math.ceil(sp.n**eps - 1e-12)
    w = PrimeWitness(prog, aux, t, cost, ell + load_manifest().prime_witness_overhead)
    if w.output != target:
        raise AssertionError("witness does not replay to the prime")
    return w
