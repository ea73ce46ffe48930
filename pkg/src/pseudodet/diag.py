"""The diagonal language against clocked probabilistic machines, the
reduction to a hard language, and harnesses that check both."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .capp import CappGenConfig, CappInstance, capp_exact, capp_pseudodet
from .circuits import Circuit, compile_machine_to_circuit
from .errors import BudgetError, ParameterError
from .machines import SeededSampler, ToyProgram, enumerate_machines
from .parallel import map_ordered

HALF = Fraction(1, 2)
PROMISE_GAP = Fraction(1, 6)
DIFFERS, AGREES, NOT_APPLICABLE, CAPP_FAILED = "DIFFERS", "AGREES", "NOT-APPLICABLE", "CAPP-FAILED"


def index_width(n: int) -> int:
    return math.ceil(math.log2(n)) if n > 1 else 0


@dataclass(frozen=True)
class DiagInput:
    n: int
    i: int

    @property
    def raw(self) -> str:
        w = index_width(self.n)
        return "1" * (self.n - w) + (format(self.i, f"0{w}b") if w else "")

    @classmethod
    def parse(cls, x: str) -> "DiagInput | None":
        n = len(x)
        if n == 0:
            return None
        w = index_width(n)
        head, tail = x[: n - w], x[n - w :]
        if head.count("1") != len(head):
            return None
        return cls(n, int(tail, 2) if tail else 0)

    @classmethod
    def of(cls, i: int, n: int) -> "DiagInput":
        if not 0 <= i < 1 << index_width(n):
            raise ParameterError(f"index {i} does not fit in {index_width(n)} bits")
        return cls(n, i)


def diagonal_circuit(x: DiagInput, d: int) -> Circuit:
    prog = enumerate_machines(x.i)
    c = compile_machine_to_circuit(prog, x.raw, x.n**d)
    if c.description_length > x.n**d:
        raise BudgetError(f"compiled circuit for machine {x.i} has {c.description_length} bits > n^d")
    return c


def _instance(x: DiagInput, d: int) -> CappInstance:
    c = diagonal_circuit(x, d)
    return CappInstance.padded(x.n, c, d)


def diag_decide(x: str | DiagInput, capp: CappGenConfig = CappGenConfig(), d: int = 2) -> int:
    """Accept iff the canonical CAPP estimate for C_i is at most 1/2."""
    parsed = DiagInput.parse(x) if isinstance(x, str) else x
    if parsed is None:
        return 0
    mu = capp_pseudodet(_instance(parsed, d), capp).mu
    return int(mu <= HALF)


@dataclass(frozen=True)
class DiagEnsemble:
    """Uniform over the machine indices of width ceil(log n)."""

    n: int
    d: int

    @property
    def support_size(self) -> int:
        return 1 << index_width(self.n)

    def mass(self, i: int) -> Fraction:
        return Fraction(1, self.support_size)

    def support(self) -> list[DiagInput]:
        return [DiagInput(self.n, i) for i in range(self.support_size)]

    def sample(self, sampler: SeededSampler) -> tuple[DiagInput, Circuit]:
        i = int(sampler.integers(0, self.support_size))
        x = DiagInput(self.n, i)
        return x, diagonal_circuit(x, self.d)

    def sampler(self, seed: int) -> SeededSampler:
        return SeededSampler("diag-ensemble", self.n, index_width(self.n), seed)


def diag_ensemble(n: int, d: int) -> DiagEnsemble:
    return DiagEnsemble(n, d)


@dataclass(frozen=True)
class VerifyReport:
    i: int
    n: int
    verdict: str
    acceptance: Fraction
    mu: Fraction | None
    decision: int | None

    @property
    def capp_err(self) -> Fraction | None:
        return None if self.mu is None else abs(self.mu - self.acceptance)


def diag_verify(i: int, n: int, capp: CappGenConfig = CappGenConfig(), d: int = 2) -> VerifyReport:
    x = DiagInput.of(i, n)
    inst = _instance(x, d)
    acc = capp_exact(inst).mu
    if abs(acc - HALF) < PROMISE_GAP:
        return VerifyReport(i, n, NOT_APPLICABLE, acc, None, None)
    mu = capp_pseudodet(inst, capp).mu
    decision = int(mu <= HALF)
    if abs(mu - acc) > Fraction(1, 10):
        return VerifyReport(i, n, CAPP_FAILED, acc, mu, decision)
    majority = int(acc > HALF)
    return VerifyReport(i, n, DIFFERS if decision != majority else AGREES, acc, mu, decision)


def promise_respecting(n: int, count: int, capp: CappGenConfig = CappGenConfig(), d: int = 2) -> list[VerifyReport]:
    out = []
    for i in range(1 << index_width(n)):
        rep = diag_verify(i, n, capp, d)
        if rep.verdict != NOT_APPLICABLE:
            out.append(rep)
            if len(out) == count:
                break
    return out


def sweep_row(args):
    i, n, capp, d = args
    rep = diag_verify(i, n, capp, d)
    err = "" if rep.capp_err is None else str(rep.capp_err)
    return f"{i},{n},{rep.verdict},{err}"


def diag_sweep(ns, indices=None, capp: CappGenConfig = CappGenConfig(), d: int = 2, workers: int = 1) -> str:
    jobs = []
    for n in ns:
        idx = range(1 << index_width(n)) if indices is None else indices
        jobs.extend((i, n, capp, d) for i in idx)
    rows = map_ordered(sweep_row, jobs, workers)
    return "i,n,verdict,capp_err\n" + "".join(r + "\n" for r in rows)


# Reduction to the hard language.

def _frame(bits: str) -> str:
    return "".join(c + c for c in format(len(bits), "b")) + "01" + bits


def _unframe(bits: str, pos: int) -> tuple[str, int]:
    v = ""
    while bits[pos : pos + 2] != "01":
        pair = bits[pos : pos + 2]
        if pair not in ("00", "11"):
            raise ParameterError("malformed frame")
        v += pair[0]
        pos += 2
    size = int(v, 2) if v else 0
    pos += 2
    return bits[pos : pos + size], pos + size


@dataclass(frozen=True)
class HardInstance:
    program: ToyProgram
    x: str
    t: int

    def __post_init__(self):
        if self.t < 1:
            raise ParameterError("clock must be at least 1")

    def encode(self) -> str:
        return _frame(self.program.bits()) + _frame(self.x) + "1" * self.t

    @property
    def framing(self) -> int:
        return len(self.encode()) - self.program.description_length - len(self.x) - self.t

    @classmethod
    def decode(cls, w: str) -> "HardInstance":
        pbits, pos = _unframe(w, 0)
        x, pos = _unframe(w, pos)
        clock = w[pos:]
        if not clock or clock.count("1") != len(clock) or len(pbits) % 8:
            raise ParameterError("malformed hard instance")
        code = bytes(int(pbits[k : k + 8], 2) for k in range(0, len(pbits), 8))
        return cls(ToyProgram(code), x, len(clock))


def hardness_reduce(m: ToyProgram, x: str, t: int) -> HardInstance:
    return HardInstance(m, x, t)


def hard_language_decide(w: HardInstance | str, capp: CappGenConfig = CappGenConfig()) -> int:
    """1 iff the canonical CAPP estimate for the machine's clocked circuit is >= 1/2."""
    inst = HardInstance.decode(w) if isinstance(w, str) else w
    c = compile_machine_to_circuit(inst.program, inst.x, inst.t)
    return int(capp_pseudodet(CappInstance.fit(c), capp).mu >= HALF)
