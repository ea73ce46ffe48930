"""Toy universal probabilistic machine.

A program is a byte string. Each byte is one instruction: the low three
bits select the opcode, the high five bits are the operand.

    0 HALT   stop
    1 OUT0   append "0" to the output
    2 OUT1   append "1" to the output
    3 RND    read the next random-tape bit; operand bit 0 set => also output it
    4 RDI    read the next input bit (0 past the end); operand bit 0 => echo
    5 BRF    if the last bit read is 1, jump to pc + 1 + operand
    6 JMP    jump to operand (absolute)
    7 -      invalid, behaves as HALT

Jumping outside the program halts. Every instruction executed costs one
step, and a run that has not halted after ``t`` steps is cut off with
whatever output it has produced so far.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator

import numpy as np

from .errors import BudgetError, InputShapeError

HALT, OUT0, OUT1, RND, RDI, BRF, JMP, BAD = range(8)
OPCODE_NAMES = ("HALT", "OUT0", "OUT1", "RND", "RDI", "BRF", "JMP", "BAD")
ECHO = 1

# Exact output distributions are computed by full branching; past this many
# steps the tree can get too large to be a sensible default.
EXACT_STEP_CAP = 64


def instr(op: int, operand: int = 0) -> int:
    if not 0 <= op < 8 or not 0 <= operand < 32:
        raise ValueError(f"bad instruction ({op}, {operand})")
    return (operand << 3) | op


@dataclass(frozen=True)
class ToyProgram:
    code: bytes

    def __post_init__(self):
        if len(self.code) == 0:
            raise ValueError("a program has at least one instruction")

    @classmethod
    def of(cls, *instructions: int | tuple[int, int]) -> "ToyProgram":
        out = []
        for ins in instructions:
            if isinstance(ins, tuple):
                out.append(instr(*ins))
            else:
                out.append(instr(ins))
        return cls(bytes(out))

    @property
    def description_length(self) -> int:
        return 8 * len(self.code)

    def __len__(self) -> int:
        return len(self.code)

    def decoded(self) -> list[tuple[int, int]]:
        return [(b & 7, b >> 3) for b in self.code]

    def hex(self) -> str:
        return self.code.hex()

    @classmethod
    def from_hex(cls, text: str) -> "ToyProgram":
        return cls(bytes.fromhex(text.strip()))

    def bits(self) -> str:
        return "".join(format(b, "08b") for b in self.code)

    def uses_randomness(self) -> bool:
        return any(b & 7 == RND for b in self.code)

    def __str__(self) -> str:
        parts = []
        for op, arg in self.decoded():
            name = OPCODE_NAMES[op]
            if op in (BRF, JMP) or (op in (RND, RDI) and arg & ECHO):
                parts.append(f"{name}:{arg}")
            else:
                parts.append(name)
        return "[" + ", ".join(parts) + "]"


@dataclass(frozen=True)
class RunResult:
    output: str
    steps_used: int
    random_bits_consumed: int
    halted: bool


def exec_program(m: ToyProgram, a: str, t: int, tape: str) -> RunResult:
    if t < 1:
        raise ValueError("step budget must be at least 1")
    if len(tape) < t:
        raise InputShapeError(f"tape has {len(tape)} bits, budget is {t}")
    code = m.code
    size = len(code)
    pc = ip = rp = 0
    last = 0
    out: list[str] = []
    steps = 0
    while steps < t:
        if pc >= size:
            return RunResult("".join(out), steps, rp, True)
        b = code[pc]
        op, arg = b & 7, b >> 3
        steps += 1
        if op == HALT or op == BAD:
            return RunResult("".join(out), steps, rp, True)
        if op == OUT0:
            out.append("0")
            pc += 1
        elif op == OUT1:
            out.append("1")
            pc += 1
        elif op == RND:
            last = 1 if tape[rp] == "1" else 0
            rp += 1
            if arg & ECHO:
                out.append(str(last))
            pc += 1
        elif op == RDI:
            last = 1 if ip < len(a) and a[ip] == "1" else 0
            ip += 1
            if arg & ECHO:
                out.append(str(last))
            pc += 1
        elif op == BRF:
            pc = pc + 1 + arg if last else pc + 1
        else:  # JMP
            pc = arg
    # Falling off the end costs no step; landing on HALT after the last step
    # does not count as halting.
    return RunResult("".join(out), steps, rp, pc >= size)


def accepts(result: RunResult) -> bool:
    return result.output[:1] == "1"


@dataclass(frozen=True)
class OutputDistribution:
    entries: dict[str, Fraction]

    def prob(self, x: str) -> Fraction:
        return self.entries.get(x, Fraction(0))

    def dyadic(self, x: str) -> tuple[int, int]:
        return to_dyadic(self.prob(x))

    def accept_mass(self) -> Fraction:
        return sum((p for x, p in self.entries.items() if x[:1] == "1"), Fraction(0))

    def total(self) -> Fraction:
        return sum(self.entries.values(), Fraction(0))

    def top(self) -> tuple[str, Fraction]:
        return max(self.entries.items(), key=lambda kv: (kv[1], kv[0]))


def to_dyadic(p: Fraction) -> tuple[int, int]:
    """(numerator, log2 denominator) of a dyadic rational in lowest terms."""
    den = p.denominator
    if den & (den - 1):
        raise ValueError(f"{p} is not dyadic")
    return p.numerator, den.bit_length() - 1


def from_dyadic(num: int, logden: int) -> Fraction:
    return Fraction(num, 1 << logden)


def _branches(code: bytes, a: str, t: int) -> Iterator[tuple[str, int, bool]]:
    """Every run of the machine as (output, random bits used, halted).

    Runs are enumerated by branching on both values of each random bit, so
    a leaf's weight is 2^-(random bits used).
    """
    size = len(code)
    stack = [(0, 0, 0, 0, "", 0)]  # pc, input pos, last bit, steps, output, rnd
    while stack:
        pc, ip, last, steps, out, rnd = stack.pop()
        while True:
            if pc >= size:
                yield out, rnd, True
                break
            if steps == t:
                yield out, rnd, False
                break
            b = code[pc]
            op, arg = b & 7, b >> 3
            steps += 1
            if op == HALT or op == BAD:
                yield out, rnd, True
                break
            if op == OUT0:
                out += "0"
                pc += 1
            elif op == OUT1:
                out += "1"
                pc += 1
            elif op == RND:
                rnd += 1
                echo = arg & ECHO
                stack.append((pc + 1, ip, 1, steps, out + "1" if echo else out, rnd))
                last = 0
                if echo:
                    out += "0"
                pc += 1
            elif op == RDI:
                last = 1 if ip < len(a) and a[ip] == "1" else 0
                ip += 1
                if arg & ECHO:
                    out += "1" if last else "0"
                pc += 1
            elif op == BRF:
                pc = pc + 1 + arg if last else pc + 1
            else:
                pc = arg


def output_distribution(m: ToyProgram, a: str, t: int, cap: int = EXACT_STEP_CAP) -> OutputDistribution:
    if t > cap:
        raise BudgetError(f"step budget {t} exceeds exact-enumeration cap {cap}")
    if t < 1:
        raise ValueError("step budget must be at least 1")
    acc: dict[str, int] = {}
    depth = 0
    leaves = []
    for out, rnd, _ in _branches(m.code, a, t):
        leaves.append((out, rnd))
        depth = max(depth, rnd)
    for out, rnd in leaves:
        acc[out] = acc.get(out, 0) + (1 << (depth - rnd))
    return OutputDistribution({x: Fraction(c, 1 << depth) for x, c in sorted(acc.items())})


def sample_outputs(m: ToyProgram, a: str, t: int, runs: int, seed: int) -> dict[str, int]:
    """Monte Carlo counterpart of output_distribution."""
    rng = np.random.default_rng(seed)
    counts: dict[str, int] = {}
    tapes = rng.integers(0, 2, size=(runs, t), dtype=np.uint8)
    for row in tapes:
        out = exec_program(m, a, t, "".join("1" if v else "0" for v in row)).output
        counts[out] = counts.get(out, 0) + 1
    return counts


# Enumeration. Programs of k instructions occupy indices
# [offset(k), offset(k) + 256^k), offset(1) = 0, and within a block the index
# is the big-endian value of the bytecode. Index 0 is therefore [HALT].

def _offset(k: int) -> int:
    return (256**k - 256) // 255


def enumerate_machines(i: int) -> ToyProgram:
    if i < 0:
        raise ValueError("machine index must be non-negative")
    k = 1
    while i >= _offset(k + 1):
        k += 1
    return ToyProgram((i - _offset(k)).to_bytes(k, "big"))


def encode_machine(m: ToyProgram) -> int:
    return _offset(len(m.code)) + int.from_bytes(m.code, "big")


def write_programs(path, programs: Iterable[ToyProgram]) -> None:
    with open(path, "w") as fh:
        for p in programs:
            fh.write(p.hex() + "\n")


def read_programs(path) -> list[ToyProgram]:
    with open(path) as fh:
        return [ToyProgram.from_hex(line) for line in fh if line.strip()]


@dataclass
class SeededSampler:
    """Reproducible stream of random bits for a named generator procedure."""

    name: str
    n: int
    time_bound: int
    seed: int
    _rng: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self):
        digest = hashlib.sha256(f"{self.name}|{self.n}|{self.time_bound}".encode()).digest()
        salt = int.from_bytes(digest[:8], "big")
        self._rng = np.random.default_rng([self.seed, salt])

    @property
    def rng(self) -> np.random.Generator:
        return self._rng

    def bits(self, count: int) -> str:
        return "".join("1" if v else "0" for v in self._rng.integers(0, 2, size=count))

    def bit_array(self, shape) -> np.ndarray:
        return self._rng.integers(0, 2, size=shape, dtype=np.uint8)

    def integers(self, low: int, high: int, size=None):
        return self._rng.integers(low, high, size=size)

    def tape(self) -> str:
        return self.bits(self.time_bound)

    def spawn(self, label: str) -> "SeededSampler":
        return SeededSampler(f"{self.name}/{label}", self.n, self.time_bound, self.seed)
