"""Combinatorial designs, the Nisan-Wigderson generator, distinguisher
advantage, and next-bit predictor extraction by the hybrid argument."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Sequence

import numpy as np

from .circuits import (
    Circuit,
    CircuitBuilder,
    circuit_from_truth_table,
    enumeration_patterns,
    eval_circuit,
    eval_packed,
    popcount,
    row_mask,
)
from .errors import BudgetError, InputShapeError, ParameterError

ENUM_CAP = 24


class DesignError(ParameterError):
    pass


@dataclass(frozen=True)
class Design:
    ell: int
    k: int
    alpha: int
    sets: tuple[tuple[int, ...], ...]

    @property
    def m(self) -> int:
        return len(self.sets)

    def verify(self) -> None:
        for i, s in enumerate(self.sets):
            if len(set(s)) != self.k or any(not 0 <= v < self.ell for v in s):
                raise DesignError(f"set {i} is not a {self.k}-subset of [{self.ell}]")
        for i, j in combinations(range(self.m), 2):
            if len(set(self.sets[i]) & set(self.sets[j])) > self.alpha:
                raise DesignError(f"sets {i} and {j} share more than {self.alpha} elements")


def build_design(ell: int, k: int, m: int, alpha: int) -> Design:
    """Greedy: scan k-subsets in lexicographic order, keep each one that
    meets every kept set in at most alpha points."""
    if not 1 <= k <= ell or m < 1 or alpha < 0:
        raise DesignError(f"infeasible parameters ell={ell} k={k} m={m} alpha={alpha}")
    chosen: list[tuple[int, ...]] = []
    masks: list[int] = []
    for cand in combinations(range(ell), k):
        cm = sum(1 << v for v in cand)
        if all((cm & other).bit_count() <= alpha for other in masks):
            chosen.append(cand)
            masks.append(cm)
            if len(chosen) == m:
                d = Design(ell, k, alpha, tuple(chosen))
                d.verify()
                return d
    raise DesignError(f"greedy design stuck at set {len(chosen)} (of {m}) for ell={ell} k={k} alpha={alpha}")


class Generator:
    """Seed -> output map whose output bits each read a few seed bits."""

    seed_len: int
    output_len: int

    def deps(self, i: int) -> tuple[int, ...]:
        raise NotImplementedError

    def bit_circuit(self, i: int) -> Circuit:
        """Circuit computing output bit i from the seed bits deps(i), in order."""
        raise NotImplementedError

    def generate(self, seed: str) -> str:
        if len(seed) != self.seed_len:
            raise InputShapeError(f"seed must have {self.seed_len} bits, got {len(seed)}")
        return "".join(
            str(eval_circuit(self.bit_circuit(i), "".join(seed[j] for j in self.deps(i))))
            for i in range(self.output_len)
        )

    def describe(self) -> dict:
        raise NotImplementedError


_ID_BIT = circuit_from_truth_table([0, 1], 1)


@dataclass(frozen=True)
class IdentityGenerator(Generator):
    length: int

    @property
    def seed_len(self) -> int:
        return self.length

    @property
    def output_len(self) -> int:
        return self.length

    def deps(self, i):
        return (i,)

    def bit_circuit(self, i):
        return _ID_BIT

    def generate(self, seed: str) -> str:
        if len(seed) != self.length:
            raise InputShapeError(f"seed must have {self.length} bits")
        return seed

    def describe(self):
        return {"family": "identity", "length": self.length}


@dataclass(frozen=True)
class ConstantGenerator(Generator):
    value: str
    seed_len: int = 1

    @property
    def output_len(self) -> int:
        return len(self.value)

    def deps(self, i):
        return ()

    def bit_circuit(self, i):
        return circuit_from_truth_table([int(self.value[i])], 0)

    def generate(self, seed: str) -> str:
        if len(seed) != self.seed_len:
            raise InputShapeError(f"seed must have {self.seed_len} bits")
        return self.value

    def describe(self):
        return {"family": "constant", "value": self.value, "seed_len": self.seed_len}


@dataclass(frozen=True)
class NWGenerator(Generator):
    design: Design
    hard_fn: tuple[int, ...]
    _circuit: Circuit = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if len(self.hard_fn) != 1 << self.design.k:
            raise ParameterError(f"truth table must have 2^{self.design.k} entries")
        object.__setattr__(self, "_circuit", circuit_from_truth_table(self.hard_fn, self.design.k))

    @property
    def seed_len(self) -> int:
        return self.design.ell

    @property
    def output_len(self) -> int:
        return self.design.m

    def deps(self, i):
        return self.design.sets[i]

    def bit_circuit(self, i):
        return self._circuit

    def generate(self, seed: str) -> str:
        if len(seed) != self.seed_len:
            raise InputShapeError(f"seed must have {self.seed_len} bits, got {len(seed)}")
        out = []
        for s in self.design.sets:
            idx = 0
            for v in s:
                idx = (idx << 1) | (seed[v] == "1")
            out.append("1" if self.hard_fn[idx] else "0")
        return "".join(out)

    def describe(self):
        d = self.design
        return {"ell": d.ell, "k": d.k, "m": d.m, "alpha": d.alpha, "hard_fn": table_to_hex(self.hard_fn)}


def table_to_hex(table: Sequence[int]) -> str:
    bits = "".join(str(int(b)) for b in table)
    width = max(1, (len(bits) + 3) // 4)
    return format(int(bits, 2), f"0{width}x")


def table_from_hex(text: str, k: int) -> tuple[int, ...]:
    v = int(text, 16)
    n = 1 << k
    if v >> n:
        raise ParameterError(f"hex truth table wider than 2^{k} bits")
    return tuple(int(c) for c in format(v, f"0{n}b"))


@dataclass(frozen=True)
class NWConfig:
    ell: int = 16
    k: int = 4
    m: int = 8
    alpha: int = 2
    hard_fn: str = "lk-surrogate"

    def table(self) -> tuple[int, ...]:
        if self.hard_fn == "lk-surrogate":
            from .structured import surrogate_truth_table

            return surrogate_truth_table(self.k)
        return table_from_hex(self.hard_fn, self.k)

    def generator(self) -> NWGenerator:
        return NWGenerator(build_design(self.ell, self.k, self.m, self.alpha), self.table())

    @classmethod
    def from_json(cls, text: str) -> "NWConfig":
        data = json.loads(text)
        return cls(**{k: data[k] for k in ("ell", "k", "m", "alpha", "hard_fn") if k in data})

    def to_json(self) -> str:
        return json.dumps({"ell": self.ell, "k": self.k, "m": self.m, "alpha": self.alpha, "hard_fn": self.hard_fn}, sort_keys=True)


def nw_generate(g: NWGenerator, seed: str) -> str:
    return g.generate(seed)


# Exact acceptance probabilities of circuits over mixed seed/uniform inputs.

def _prob_over(
    c: Circuit,
    wires: dict[int, tuple[str, object]],
    g: Generator | None,
    extra: Circuit | None = None,
) -> Fraction:
    """Exact Pr[c = 1] where each input position of c is fed by
    ("seed", output index of g), ("free", fresh uniform bit id) or ("const", bit).

    If ``extra`` is given the event is c XNOR extra, with extra's inputs fed
    the same way.
    """
    cones = [(c, c.cone_inputs())]
    if extra is not None:
        cones.append((extra, extra.cone_inputs()))
    seed_vars: set[int] = set()
    free_vars: set = set()
    for _, cone in cones:
        for pos in cone:
            kind, ref = wires[pos]
            if kind == "seed":
                seed_vars.update(g.deps(ref))
            elif kind == "free":
                free_vars.add(ref)
    order = [("s", v) for v in sorted(seed_vars)] + [("f", v) for v in sorted(free_vars, key=repr)]
    r = len(order)
    if r > ENUM_CAP:
        raise BudgetError(f"{r} relevant random bits exceed the enumeration cap {ENUM_CAP}")
    cols = dict(zip(order, enumeration_patterns(r)))
    words = max(1, (1 << r) // 64)
    zeros = np.zeros(words, dtype=np.uint64)
    cache: dict[int, np.ndarray] = {}

    def column(pos):
        kind, ref = wires[pos]
        if kind == "const":
            return ~zeros if ref else zeros
        if kind == "free":
            return cols[("f", ref)]
        if ref not in cache:
            deps = g.deps(ref)
            cache[ref] = eval_packed(g.bit_circuit(ref), {j: cols[("s", v)] for j, v in enumerate(deps)}, words)
        return cache[ref]

    outs = [eval_packed(circ, {p: column(p) for p in cone}, words) for circ, cone in cones]
    hit = outs[0] if extra is None else ~(outs[0] ^ outs[1])
    return Fraction(popcount(hit & row_mask(1 << r)), 1 << r)


def acceptance_under(c: Circuit, g: Generator) -> Fraction:
    """Pr_z[c(G(z)) = 1], with G's output truncated to c's arity."""
    if g.output_len < c.input_arity:
        raise ParameterError(f"generator outputs {g.output_len} bits, circuit reads {c.input_arity}")
    return _prob_over(c, {i: ("seed", i) for i in range(c.input_arity)}, g)


def acceptance_uniform(c: Circuit) -> Fraction:
    return _prob_over(c, {i: ("free", i) for i in range(c.input_arity)}, None)


@dataclass(frozen=True)
class DistinguisherReport:
    advantage: Fraction | float
    mode: str
    p_uniform: Fraction | float
    p_generator: Fraction | float
    threshold: Fraction | None = None

    @property
    def distinguishes(self) -> bool | None:
        return None if self.threshold is None else self.advantage >= self.threshold


def _check_caps(g: Generator, d: Circuit):
    if g.seed_len > 20 or g.output_len > 20:
        raise BudgetError("exact advantage needs seed and output length <= 20")
    if d.input_arity > g.output_len:
        raise ParameterError("distinguisher reads more bits than the generator outputs")


def advantage_exact(d: Circuit, g: Generator, threshold: Fraction | None = None) -> DistinguisherReport:
    _check_caps(g, d)
    pu, pg = acceptance_uniform(d), acceptance_under(d, g)
    return DistinguisherReport(abs(pu - pg), "EXACT", pu, pg, threshold)


def advantage_sample(d: Circuit, g: Generator, s: int, sampler, threshold=None) -> DistinguisherReport:
    """Monte Carlo advantage from s uniform strings and s uniform seeds,
    evaluated 64 rows per word."""
    if s < 1:
        raise ValueError("need at least one sample")
    if d.input_arity > g.output_len:
        raise ParameterError("distinguisher reads more bits than the generator outputs")
    rng = sampler.rng
    words = (s + 63) // 64
    mask = row_mask(s)

    def draw():
        return rng.integers(0, 1 << 64, size=words, dtype=np.uint64)

    cone = d.cone_inputs()
    uni = {i: draw() for i in cone}
    seed_cols = [draw() for _ in range(g.seed_len)]
    out_cols = {i: eval_packed(g.bit_circuit(i), {j: seed_cols[v] for j, v in enumerate(g.deps(i))}, words) for i in cone}
    pu = popcount(eval_packed(d, uni, words) & mask) / s
    pg = popcount(eval_packed(d, out_cols, words) & mask) / s
    return DistinguisherReport(abs(pu - pg), "SAMPLED", pu, pg, threshold)


@dataclass(frozen=True)
class PredictorResult:
    position: int | None
    predictor: Circuit | None
    advantage: Fraction
    hybrids: tuple[Fraction, ...]
    total: Fraction

    @property
    def found(self) -> bool:
        return self.predictor is not None


def hybrid_probabilities(d: Circuit, g: Generator) -> list[Fraction]:
    """p_i = Pr[D = 1] on H_i: first i bits from G, the rest uniform."""
    _check_caps(g, d)
    m = d.input_arity
    out = []
    for i in range(m + 1):
        wires = {p: ("seed", p) if p < i else ("free", p) for p in range(m)}
        out.append(_prob_over(d, wires, g))
    return out


def hybrid_predictor(d: Circuit, g: Generator) -> PredictorResult:
    """Turn a distinguisher into a next-bit predictor.

    Picks the hybrid step with the largest gap in the direction of the total
    advantage, so the gap is at least |advantage| / m. The predictor sees
    bits before position i of G(z) and fresh bits r_i..r_m; it outputs r_i
    when D accepts (prefix, r) and its complement otherwise (flipped if the
    advantage is negative).
    """
    hyb = hybrid_probabilities(d, g)
    m = d.input_arity
    total = hyb[-1] - hyb[0]
    if total == 0:
        return PredictorResult(None, None, Fraction(0), tuple(hyb), total)
    sign = 1 if total > 0 else -1
    gaps = [sign * (hyb[i + 1] - hyb[i]) for i in range(m)]
    pos = max(range(m), key=lambda i: (gaps[i], -i))
    # Predictor circuit: inputs 0..m-1 are (prefix bits, then fresh bits).
    b = CircuitBuilder(m)
    remap = {}
    for k, gate in enumerate(d.gates):
        if gate.kind == "INPUT":
            remap[k] = b.input(gate.index)
        elif gate.kind == "CONST0":
            remap[k] = b.const(0)
        elif gate.kind == "CONST1":
            remap[k] = b.const(1)
        elif gate.kind == "NOT":
            remap[k] = b.not_(remap[gate.args[0]])
        else:
            x, y = (remap[a] for a in gate.args)
            remap[k] = {"AND2": b.and_, "OR2": b.or_, "XOR2": b.xor_}[gate.kind](x, y)
    dout = remap[d.output]
    r = b.input(pos)
    guess = b.xor_(dout, r)
    if sign > 0:
        guess = b.not_(guess)
    pred = b.build(guess)
    adv = predictor_advantage(pred, g, pos)
    return PredictorResult(pos, pred, adv, tuple(hyb), total)


def predictor_advantage(pred: Circuit, g: Generator, pos: int) -> Fraction:
    """Pr[pred(G(z)_{<pos}, r) = G(z)_pos] - 1/2, exactly."""
    m = pred.input_arity
    wires = {p: ("seed", p) if p < pos else ("free", p) for p in range(m)}
    return _agreement(pred, wires, g, pos) - Fraction(1, 2)


def _agreement(pred: Circuit, wires, g: Generator, pos: int) -> Fraction:
    # Build a circuit with one extra input carrying G_pos and test equality.
    m = pred.input_arity
    b = CircuitBuilder(m + 1)
    remap = {}
    for k, gate in enumerate(pred.gates):
        if gate.kind == "INPUT":
            remap[k] = b.input(gate.index)
        elif gate.kind in ("CONST0", "CONST1"):
            remap[k] = b.const(gate.kind == "CONST1")
        elif gate.kind == "NOT":
            remap[k] = b.not_(remap[gate.args[0]])
        else:
            x, y = (remap[a] for a in gate.args)
            remap[k] = {"AND2": b.and_, "OR2": b.or_, "XOR2": b.xor_}[gate.kind](x, y)
    eq = b.not_(b.xor_(remap[pred.output], b.input(m)))
    circ = b.build(eq)
    return _prob_over(circ, {**wires, m: ("seed", pos)}, g)


@dataclass(frozen=True)
class PseudodetPrgConfig:
    eps: float = 0.5
    k: int = 4
    alpha: int = 2
    c: int = 1
    d: int = 1
    advice: int | None = None

    def __post_init__(self):
        if not 0 < self.eps < 1:
            raise ParameterError("eps must lie in (0, 1)")


def seed_length(n: int, eps: float) -> int:
    return math.ceil(n**eps - 1e-12)


def pseudodet_prg(cfg: PseudodetPrgConfig, n: int, x: str, sampler=None, table=None, hp=None) -> str:
    """G_n(x): the NW output over the surrogate truth table when the advice
    bit for n is 1, the all-zeros string when it is 0."""
    ell = seed_length(n, cfg.eps)
    if len(x) != ell:
        raise InputShapeError(f"seed for n={n} must have {ell} bits, got {len(x)}")
    advice = cfg.advice
    if advice is None:
        from .structured import HierarchyParams, TimeBoundTable, good_length

        table = table or TimeBoundTable.constant(1, n)
        advice = int(good_length(n, table, hp or HierarchyParams()).good)
    if not advice:
        return "0" * n
    from .structured import surrogate_truth_table

    if ell < cfg.k:
        raise ParameterError(f"seed length {ell} is shorter than the design set size {cfg.k}")
    g = NWGenerator(build_design(ell, cfg.k, n, cfg.alpha), surrogate_truth_table(cfg.k))
    return g.generate(x)
