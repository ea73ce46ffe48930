"""Brute-force Kt, rKt and rK^t over the toy machine.

All three measures come from one sweep over (program, auxiliary input)
pairs. A program is enumerated only through its behavioural
representatives: every instruction byte is replaced by the smallest byte
that behaves identically at that position, so the lexicographically first
witness of each cost is still found.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import product
from typing import Iterator

from .errors import BudgetError
from .machines import BRF, ECHO, JMP, OUT0, OUT1, RDI, RND, ToyProgram, instr, output_distribution

CENSUS_MAX_LENGTH = 12


@dataclass(frozen=True)
class ComplexityBudget:
    max_program_bits: int = 24
    max_aux_bits: int = 8
    max_log_t: int = 4
    delta: Fraction = Fraction(2, 3)

    def __post_init__(self):
        if min(self.max_program_bits, self.max_log_t) < 1 or self.max_aux_bits < 0:
            raise ValueError("budget caps must be positive")
        if not Fraction(1, 2) < Fraction(self.delta) <= 1:
            raise ValueError("delta must lie in (1/2, 1]")
        object.__setattr__(self, "delta", Fraction(self.delta))

    @property
    def max_instructions(self) -> int:
        return self.max_program_bits // 8

    @property
    def max_steps(self) -> int:
        return 1 << self.max_log_t


@dataclass(frozen=True)
class Witness:
    program: ToyProgram
    aux: str
    t: int

    def sort_key(self):
        return (self.program.code, self.aux, self.t)


@dataclass(frozen=True)
class ComplexityReport:
    measure: str
    x: str
    value: int | None
    witness: Witness | None
    exhausted: bool = True
    probability: Fraction | None = None


def log_cost(t: int) -> int:
    return math.ceil(math.log2(t)) if t > 1 else 0


def cost_of(w: Witness, measure: str) -> int:
    base = w.program.description_length + len(w.aux)
    return base if measure == "rK^t" else base + log_cost(w.t)


def literal_bound(x: str) -> int:
    return 8 * (len(x) + 1) + log_cost(len(x) + 1)


def _position_classes(k: int, pc: int) -> list[int]:
    """Smallest byte of each behaviour class for position pc of k."""
    out = [0, instr(OUT0), instr(OUT1), instr(RND), instr(RND, ECHO), instr(RDI), instr(RDI, ECHO)]
    out += [instr(BRF, off) for off in range(min(k - pc, 32))]
    out += [instr(JMP, j) for j in range(min(k + 1, 32))]
    return sorted(out)


def representative_programs(max_instructions: int) -> Iterator[bytes]:
    """Behavioural representatives, by length then lexicographically."""
    for k in range(1, max_instructions + 1):
        for code in product(*(_position_classes(k, pc) for pc in range(k))):
            yield bytes(code)


def _profile(code: bytes, a: str, steps: int, randomized: bool):
    """Output mass at every time bound 1..steps, plus the furthest input read.

    Returns (per_t, depth, max_read) where per_t[t-1] maps an output string
    to its weight out of 2^depth.
    """
    size = len(code)
    per_t: list[dict[str, int]] = [dict() for _ in range(steps)]
    max_read = -1
    alen = len(a)
    stack = [(0, 0, 0, 0, "", 0)]
    while stack:
        pc, ip, last, s, out, rnd = stack.pop()
        w = 1 << (steps - rnd)
        while s < steps:
            if pc >= size:
                break
            b = code[pc]
            op = b & 7
            s += 1
            if op == 0 or op == 7:
                break
            if op == 1:
                out += "0"
                pc += 1
            elif op == 2:
                out += "1"
                pc += 1
            elif op == 3:
                pc += 1
                if randomized:
                    rnd += 1
                    w >>= 1
                    nb = out + "1" if b & 8 else out
                    stack.append((pc, ip, 1, s, nb, rnd))
                    d = per_t[s - 1]
                    d[nb] = d.get(nb, 0) + w
                last = 0
                if b & 8:
                    out += "0"
            elif op == 4:
                if ip > max_read:
                    max_read = ip
                last = 1 if ip < alen and a[ip] == "1" else 0
                ip += 1
                if b & 8:
                    out += "1" if last else "0"
                pc += 1
            elif op == 5:
                pc = pc + 1 + (b >> 3) if last else pc + 1
            else:
                pc = b >> 3
            d = per_t[s - 1]
            d[out] = d.get(out, 0) + w
        while s < steps:
            s += 1
            d = per_t[s - 1]
            d[out] = d.get(out, 0) + w
    return per_t, steps, max_read


@dataclass
class _Index:
    best: dict[str, tuple] = field(default_factory=dict)
    near: dict[str, list] = field(default_factory=dict)


def _aux_strings(code: bytes, steps: int, randomized: bool, max_aux: int):
    """Auxiliary inputs worth trying: every bit of a must actually be read."""
    frontier = [""]
    while frontier:
        a = frontier.pop()
        prof = _profile(code, a, steps, randomized)
        if a and prof[2] < len(a) - 1:
            continue
        yield a, prof
        if prof[2] >= len(a) and len(a) < max_aux:
            frontier.append(a + "1")
            frontier.append(a + "0")


def _build_index(budget: ComplexityBudget, measure: str, fixed_t: int | None, keep_near: bool) -> _Index:
    steps = budget.max_steps if fixed_t is None else fixed_t
    randomized = measure != "Kt"
    delta = budget.delta
    near_floor = Fraction(1, 3)
    idx = _Index()
    best = idx.best
    for code in representative_programs(budget.max_instructions):
        has_rdi = any(b & 7 == RDI for b in code)
        uses_rnd = randomized and any(b & 7 == RND for b in code)
        pairs = _aux_strings(code, steps, uses_rnd, budget.max_aux_bits) if has_rdi else [("", _profile(code, "", steps, uses_rnd))]
        for a, (per_t, depth, _) in pairs:
            base = 8 * len(code) + len(a)
            denom = 1 << depth
            seen_here: set[str] = set()
            for t in range(1, steps + 1):
                cost = base if measure == "rK^t" else base + log_cost(t)
                for x, wgt in per_t[t - 1].items():
                    if not x:
                        continue
                    if wgt * delta.denominator >= delta.numerator * denom:
                        key = (cost, code, a, t)
                        cur = best.get(x)
                        if cur is None or key < cur[0]:
                            best[x] = (key, Fraction(wgt, denom))
                    if keep_near and x not in seen_here and 3 * wgt >= denom:
                        seen_here.add(x)
                        idx.near.setdefault(x, []).append(((cost, code, a, t), Fraction(wgt, denom)))
    return idx


@lru_cache(maxsize=16)
def _index(budget: ComplexityBudget, measure: str, fixed_t: int | None = None, keep_near: bool = False) -> _Index:
    return _build_index(budget, measure, fixed_t, keep_near)


def _report(measure: str, x: str, idx: _Index) -> ComplexityReport:
    if not x:
        raise ValueError("x must be non-empty")
    hit = idx.best.get(x)
    if hit is None:
        return ComplexityReport(measure, x, None, None, True)
    (cost, code, a, t), p = hit
    return ComplexityReport(measure, x, cost, Witness(ToyProgram(code), a, t), True, p)


def kt(x: str, b: ComplexityBudget = ComplexityBudget()) -> ComplexityReport:
    return _report("Kt", x, _index(b, "Kt"))


def rkt(x: str, b: ComplexityBudget = ComplexityBudget()) -> ComplexityReport:
    return _report("rKt", x, _index(b, "rKt"))


def rk_t(x: str, t: int, b: ComplexityBudget = ComplexityBudget()) -> ComplexityReport:
    """Randomized t-time-bounded complexity: runs may stop at any t' <= t."""
    if t > b.max_steps:
        raise BudgetError(f"time bound {t} exceeds the exact cap {b.max_steps}")
    return _report("rK^t", x, _index(b, "rK^t", t))


def replay_probability(w: Witness, x: str, deterministic: bool = False) -> Fraction:
    """Recompute Pr[program(aux) = x] at the witness time bound."""
    if deterministic:
        from .machines import exec_program

        return Fraction(int(exec_program(w.program, w.aux, w.t, "0" * w.t).output == x))
    return output_distribution(w.program, w.aux, w.t).prob(x)


def rkt_census(m: int, b: ComplexityBudget = ComplexityBudget(), measure: str = "rKt") -> Counter:
    """Histogram value -> count over all 2^m strings; None counts strings
    without a witness inside the budget."""
    if not 1 <= m <= CENSUS_MAX_LENGTH:
        raise BudgetError(f"census length {m} outside 1..{CENSUS_MAX_LENGTH}")
    idx = _index(b, measure)
    hist: Counter = Counter()
    for bits in product("01", repeat=m):
        hit = idx.best.get("".join(bits))
        hist[hit[0][0] if hit else None] += 1
    return hist


def census_values(m: int, b: ComplexityBudget = ComplexityBudget()) -> dict[str, int | None]:
    idx = _index(b, "rKt")
    out = {}
    for bits in product("01", repeat=m):
        x = "".join(bits)
        hit = idx.best.get(x)
        out[x] = hit[0][0] if hit else None
    return out


def count_at_most(hist: Counter, s: int) -> int:
    return sum(c for v, c in hist.items() if v is not None and v <= s)


def counting_bound_holds(hist: Counter, b: ComplexityBudget) -> bool:
    finite = [v for v in hist if v is not None]
    top = max(finite, default=0)
    return all(count_at_most(hist, s) < (2 ** (s + 1)) * b.max_log_t for s in range(top + 1))


ACCEPT, REJECT = "ACCEPT", "REJECT"


def gap_mrkt(y: str, b: ComplexityBudget = ComplexityBudget(), randomness: str | None = None, samples: int = 64) -> str:
    """Decide Gap-MrKtP on y: REJECT iff (estimated) rKt(y) < |y|/2.

    With randomness=None the decision uses the exact oracle. Otherwise the
    witness probabilities of every plausible candidate program are estimated
    by running it on tapes drawn from a generator seeded by ``randomness``,
    so the answer is a function of the random string, as a randomized
    decider's would be.
    """
    m = len(y)
    if not 1 <= m <= CENSUS_MAX_LENGTH:
        raise BudgetError(f"length {m} outside census range 1..{CENSUS_MAX_LENGTH}")
    if randomness is None:
        value = rkt(y, b).value
    else:
        value = _mc_rkt(y, b, randomness, samples)
    return REJECT if value is not None and 2 * value < m else ACCEPT


def _mc_rkt(y: str, b: ComplexityBudget, randomness: str, samples: int) -> int | None:
    import numpy as np

    from .machines import exec_program

    idx = _index(b, "rKt", None, True)
    seed = int(randomness, 2) if randomness else 0
    rng = np.random.default_rng([seed, len(randomness)])
    for (cost, code, a, t), p in sorted(idx.near.get(y, []), key=lambda kv: kv[0]):
        if p == 1:
            return cost
        prog = ToyProgram(code)
        tapes = rng.integers(0, 2, size=(samples, t), dtype=np.uint8)
        hits = sum(exec_program(prog, a, t, "".join("1" if v else "0" for v in row)).output == y for row in tapes)
        if hits * b.delta.denominator >= b.delta.numerator * samples:
            return cost
    return None


def promise_instances(n: int, eps: float, b: ComplexityBudget = ComplexityBudget(), t: int | None = None):
    """(YES, NO): rK^t at most n^eps versus at least n - 1 (no witness counts as NO)."""
    if not 1 <= n <= CENSUS_MAX_LENGTH:
        raise BudgetError(f"length {n} outside census range")
    t = b.max_steps if t is None else t
    idx = _index(b, "rK^t", t)
    yes, no = [], []
    for bits in product("01", repeat=n):
        x = "".join(bits)
        hit = idx.best.get(x)
        value = hit[0][0] if hit else None
        if value is not None and value <= n**eps:
            yes.append(x)
        elif value is None or value >= n - 1:
            no.append(x)
    return yes, no
