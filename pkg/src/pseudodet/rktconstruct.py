"""Constructing strings of high randomized time-bounded complexity, and the
truth-table embeddings between languages and such strings."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from .capp import CappGenConfig, CappInstance, capp_pseudodet
from .circuits import Circuit, circuit_from_truth_table
from .errors import BudgetError, ParameterError
from .kolmogorov import ACCEPT, CENSUS_MAX_LENGTH, ComplexityBudget, gap_mrkt, log_cost, rkt
from .machines import BRF, HALT, JMP, OUT0, OUT1, RDI, ToyProgram, accepts, exec_program, instr
from .manifest import load_manifest
from .parallel import first_index

THRESHOLD = Fraction(1, 3) + Fraction(1, 10)
FACT51_MAX_N = 4
EXACT, MC = "exact", "mc"


@dataclass(frozen=True)
class RndSearchInstance:
    n: int
    d: int

    def __post_init__(self):
        if self.m < 1:
            raise ParameterError("target length must be at least 1")

    @property
    def m(self) -> int:
        return math.ceil(self.d * math.log2(self.n)) if self.n > 1 else 0

    @property
    def required(self) -> Fraction:
        return Fraction(self.m, 2)


@dataclass(frozen=True)
class ConstructResult:
    string: str | None
    index: int | None
    oracle_rkt: int | None

    @property
    def failed(self) -> bool:
        return self.string is None

    def as_json(self) -> dict:
        return {"string": self.string, "oracle_rkt": self.oracle_rkt, "canonical": True}


def decider_circuit(a: str, b_mode: str, budget: ComplexityBudget, rand_bits: int, samples: int) -> Circuit:
    """C^a: B's acceptance of a as a function of B's random bits."""
    if b_mode == EXACT:
        return circuit_from_truth_table([int(gap_mrkt(a, budget) == ACCEPT)], 0)
    if b_mode == MC:
        table = [
            int(gap_mrkt(a, budget, format(y, f"0{rand_bits}b"), samples) == ACCEPT)
            for y in range(1 << rand_bits)
        ]
        return circuit_from_truth_table(table, rand_bits)
    raise ParameterError(f"unknown decider mode {b_mode!r}")


def _reject_all(a: str, *_args) -> Circuit:
    return circuit_from_truth_table([0], 0)


@dataclass(frozen=True)
class _Accepts:
    capp: CappGenConfig
    b_mode: str
    budget: ComplexityBudget
    rand_bits: int
    samples: int
    degenerate: bool

    def __call__(self, a: str) -> bool:
        make = _reject_all if self.degenerate else decider_circuit
        c = make(a, self.b_mode, self.budget, self.rand_bits, self.samples)
        return capp_pseudodet(CappInstance.fit(c), self.capp).mu > THRESHOLD


def construct_high_rkt(
    inst: RndSearchInstance,
    capp: CappGenConfig = CappGenConfig(),
    b_mode: str = EXACT,
    budget: ComplexityBudget = ComplexityBudget(),
    rand_bits: int = 4,
    samples: int = 64,
    degenerate: bool = False,
    workers: int = 1,
) -> ConstructResult:
    """First a in lexicographic order whose estimated acceptance by the
    gap decider exceeds 1/3 + 1/10. ``degenerate`` swaps in a decider that
    rejects everything, which must make the search fail."""
    return high_rkt_string(inst.m, capp, b_mode, budget, rand_bits, samples, degenerate, workers)


def high_rkt_string(m, capp=CappGenConfig(), b_mode=EXACT, budget=ComplexityBudget(), rand_bits=4, samples=64, degenerate=False, workers=1):
    if not 1 <= m <= CENSUS_MAX_LENGTH:
        raise BudgetError(f"length {m} outside census range 1..{CENSUS_MAX_LENGTH}")
    candidates = [format(v, f"0{m}b") for v in range(1 << m)]
    pred = _Accepts(capp, b_mode, budget, rand_bits, samples, degenerate)
    k = first_index(pred, candidates, workers)
    if k is None:
        return ConstructResult(None, None, None)
    a = candidates[k]
    return ConstructResult(a, k, rkt(a, budget).value)


# Witnesses for prefixes of truth tables.

@dataclass(frozen=True)
class DeciderSpec:
    """A deterministic decider: runs on x followed by the advice, accepts iff
    its first output bit is 1 within ``time`` steps."""

    program: ToyProgram
    time: int
    advice: str = ""

    def decide(self, x: str) -> int:
        r = exec_program(self.program, x + self.advice, self.time, "0" * self.time)
        return int(accepts(r))


def constant_decider(bit: int = 0) -> DeciderSpec:
    return DeciderSpec(ToyProgram.of(OUT1 if bit else OUT0), 1)


def parity_decider(n: int) -> DeciderSpec:
    """Unrolled two-state automaton over n input bits. Jump targets are 5-bit
    operands, which caps n at 4."""
    if not 0 <= n <= 4:
        raise ParameterError("parity decider supports n in 0..4")
    even = [6 * j for j in range(n + 1)]
    odd = [6 * j + 3 for j in range(n)] + [6 * n + 2]
    code: list[int] = []
    for j in range(n):
        for here, flip, stay in ((even[j], odd[j + 1], even[j + 1]), (odd[j], even[j + 1], odd[j + 1])):
            code += [instr(RDI), instr(BRF, flip - (here + 2)), instr(JMP, stay)]
    code += [instr(OUT0), instr(HALT), instr(OUT1), instr(HALT)]
    return DeciderSpec(ToyProgram(bytes(code)), 3 * n + 1)


def language_table(decide: Callable[[str], int], n: int) -> str:
    return "".join(str(decide(format(i, f"0{n}b") if n else "")) for i in range(1 << n))


@dataclass(frozen=True)
class TruthTableString:
    n: int
    bits: str
    prefix: int

    def __post_init__(self):
        if len(self.bits) != 1 << self.n:
            raise ValueError("table must have 2^n bits")
        if not 0 <= self.prefix <= len(self.bits):
            raise ValueError("prefix longer than the table")


def period(bits: str) -> int:
    for p in range(1, len(bits) + 1):
        if all(bits[i] == bits[i % p] for i in range(len(bits))):
            return p
    return len(bits)


def period_printer(block: str) -> ToyProgram:
    """Prints ``block`` forever, one bit every two steps."""
    code = []
    for k, c in enumerate(block):
        code.append(instr(OUT1 if c == "1" else OUT0))
        code.append(instr(JMP, 0) if k == len(block) - 1 else instr(BRF, 0))
    return ToyProgram(bytes(code))


@dataclass(frozen=True)
class Fact51Witness:
    program: ToyProgram
    t: int
    cost: int
    bound: int
    prefix: str

    @property
    def replays(self) -> bool:
        return exec_program(self.program, "", self.t, "0" * self.t).output == self.prefix


def fact51_witness(spec: DeciderSpec, n: int, ell: int, c_prime: int | None = None, c0: int | None = None) -> Fact51Witness:
    """Printer for the first ell membership bits of the decider's language at
    length n. Cost is |M| + ceil(log t); the auxiliary input is empty since the
    advice is folded into the printed table."""
    if not 0 <= n <= FACT51_MAX_N:
        raise BudgetError(f"n = {n} outside 0..{FACT51_MAX_N}")
    if not 1 <= ell <= 1 << n:
        raise ParameterError("prefix length must lie in 1..2^n")
    man = load_manifest()
    c_prime = man.fact51_c_prime if c_prime is None else c_prime
    c0 = man.fact51_c0 if c0 is None else c0
    table = language_table(spec.decide, n)
    prog = period_printer(table[: period(table)])
    t = 2 * ell - 1
    cost = prog.description_length + log_cost(t)
    logs = log_cost(ell) + log_cost(spec.time) + len(spec.advice) + log_cost(max(n, 1))
    w = Fact51Witness(prog, t, cost, c_prime * logs + c0, table[:ell])
    if not w.replays:
        raise AssertionError("witness does not print the table prefix")
    if w.cost > w.bound:
        raise AssertionError(f"witness cost {w.cost} exceeds bound {w.bound}")
    return w


# Embeddings.

def embed_length(n: int, t_n: int, eps: float, c_prime: int | None = None) -> int:
    c_prime = load_manifest().fact51_c_prime if c_prime is None else c_prime
    if not 0 < eps <= 1:
        raise ParameterError("eps must lie in (0, 1]")
    return max(1, math.ceil(10 * c_prime / eps * math.log2(max(t_n, 2))))


def embed_hard_language(supplier: Callable[[int], str], n: int, t_n: int, eps: float, c_prime: int | None = None) -> TruthTableString:
    """Table of length 2^n whose first m(n) bits are supplier(m(n)), rest 0."""
    m = embed_length(n, t_n, eps, c_prime)
    if m > 1 << n:
        raise ParameterError(f"m(n) = {m} exceeds 2^n = {1 << n}")
    w = supplier(m)
    if w is None or len(w) != m:
        raise ParameterError("supplier returned no string of the requested length")
    return TruthTableString(n, w + "0" * ((1 << n) - m), m)


def extract_string(decide: Callable[[str], int], n: int, m: int) -> str:
    if not 1 << n <= m:
        raise ParameterError("need 2^n <= m")
    if m > 1 << 16:
        raise BudgetError("string too long")
    return language_table(decide, n) + "0" * (m - (1 << n))
