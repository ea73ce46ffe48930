"""Gate-list Boolean circuits, netlist I/O, bit-parallel evaluation, and the
machine-to-circuit compiler."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import InputShapeError, ParameterError
from .machines import BAD, BRF, ECHO, HALT, JMP, OUT0, OUT1, RDI, RND, ToyProgram

INPUT, CONST0, CONST1, NOT, AND2, OR2, XOR2 = "INPUT", "CONST0", "CONST1", "NOT", "AND2", "OR2", "XOR2"
GATE_KINDS = (INPUT, CONST0, CONST1, NOT, AND2, OR2, XOR2)
_ARITY = {INPUT: 0, CONST0: 0, CONST1: 0, NOT: 1, AND2: 2, OR2: 2, XOR2: 2}

# Size constant for compiled circuits: gates <= K * |M| * t * ceil(log2(t + 1)).
# Measured over random programs of up to 6 instructions; see tests.
COMPILE_K = 8


@dataclass(frozen=True)
class Gate:
    kind: str
    args: tuple[int, ...] = ()
    # For INPUT gates, the position of the input bit.
    index: int = -1


@dataclass(frozen=True)
class Circuit:
    input_arity: int
    gates: tuple[Gate, ...]
    output: int
    trailer: str = ""

    def __post_init__(self):
        if not self.gates:
            raise ParameterError("circuit has no gates")
        if not 0 <= self.output < len(self.gates):
            raise ParameterError("output index out of range")
        for k, g in enumerate(self.gates):
            if g.kind not in _ARITY or len(g.args) != _ARITY[g.kind]:
                raise ParameterError(f"gate {k}: malformed {g}")
            if any(not 0 <= a < k for a in g.args):
                raise ParameterError(f"gate {k}: operands must precede the gate")
            if g.kind == INPUT and not 0 <= g.index < self.input_arity:
                raise ParameterError(f"gate {k}: input index {g.index} out of range")

    @property
    def size(self) -> int:
        return len(self.gates)

    @property
    def description_length(self) -> int:
        return 8 * len(to_netlist(self).encode())

    def cone_inputs(self) -> list[int]:
        """Input positions that can influence the output, ascending."""
        seen = [False] * len(self.gates)
        seen[self.output] = True
        used = set()
        for k in range(self.output, -1, -1):
            if not seen[k]:
                continue
            g = self.gates[k]
            if g.kind == INPUT:
                used.add(g.index)
            for a in g.args:
                seen[a] = True
        return sorted(used)

    def padded_to(self, bits: int) -> "Circuit":
        """Pad the netlist with comment bytes so it is exactly ``bits`` long."""
        if bits % 8:
            raise ParameterError("padding target must be a whole number of bytes")
        bare = Circuit(self.input_arity, self.gates, self.output)
        need = bits // 8 - len(to_netlist(bare).encode())
        if need < 0:
            raise ParameterError(f"netlist already has {bare.description_length} bits > {bits}")
        trailer = "" if need == 0 else "#" * (need - 1) + "\n"
        return Circuit(self.input_arity, self.gates, self.output, trailer)


def eval_circuit(c: Circuit, x: str) -> int:
    if len(x) != c.input_arity:
        raise InputShapeError(f"circuit takes {c.input_arity} bits, got {len(x)}")
    vals = [0] * len(c.gates)
    for k, g in enumerate(c.gates):
        kind = g.kind
        if kind == INPUT:
            vals[k] = 1 if x[g.index] == "1" else 0
        elif kind == CONST0:
            vals[k] = 0
        elif kind == CONST1:
            vals[k] = 1
        elif kind == NOT:
            vals[k] = 1 - vals[g.args[0]]
        elif kind == AND2:
            vals[k] = vals[g.args[0]] & vals[g.args[1]]
        elif kind == OR2:
            vals[k] = vals[g.args[0]] | vals[g.args[1]]
        else:
            vals[k] = vals[g.args[0]] ^ vals[g.args[1]]
    return vals[c.output]


# Netlist text

def to_netlist(c: Circuit) -> str:
    lines = [f"inputs {c.input_arity}"]
    for k, g in enumerate(c.gates):
        if g.kind == INPUT:
            lines.append(f"g{k} = INPUT {g.index}")
        else:
            lines.append(" ".join([f"g{k} = {g.kind}"] + [f"g{a}" for a in g.args]))
    lines.append(f"output g{c.output}")
    return "\n".join(lines) + "\n" + c.trailer


def _ref(tok: str) -> int:
    if not tok.startswith("g") or not tok[1:].isdigit():
        raise ParameterError(f"bad gate reference {tok!r}")
    return int(tok[1:])


def from_netlist(text: str) -> Circuit:
    lines = text.split("\n")
    head = lines[0].split()
    if len(head) != 2 or head[0] != "inputs":
        raise ParameterError("netlist must start with 'inputs <n>'")
    arity = int(head[1])
    gates: list[Gate] = []
    k = 1
    while k < len(lines) and not lines[k].startswith("output"):
        toks = lines[k].split()
        if len(toks) < 3 or toks[1] != "=" or _ref(toks[0]) != len(gates):
            raise ParameterError(f"line {k + 1}: expected 'g{len(gates)} = <OP> ...'")
        kind = toks[2]
        if kind == INPUT:
            gates.append(Gate(INPUT, (), int(toks[3])))
        elif kind in _ARITY:
            gates.append(Gate(kind, tuple(_ref(t) for t in toks[3:])))
        else:
            raise ParameterError(f"line {k + 1}: unknown gate {kind!r}")
        k += 1
    if k >= len(lines):
        raise ParameterError("netlist has no output line")
    out = _ref(lines[k].split()[1])
    trailer = "\n".join(lines[k + 1:])
    for line in lines[k + 1:]:
        if line and not line.startswith("#"):
            raise ParameterError("only comment lines may follow the output line")
    return Circuit(arity, tuple(gates), out, trailer)


def write_netlist(path, c: Circuit) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(to_netlist(c))


def read_netlist(path) -> Circuit:
    with open(path, newline="") as fh:
        return from_netlist(fh.read())


class CircuitBuilder:
    """Hash-consing builder with constant folding."""

    def __init__(self, input_arity: int):
        self.input_arity = input_arity
        self.gates: list[Gate] = []
        self._memo: dict[tuple, int] = {}

    def _add(self, kind: str, args: tuple[int, ...] = (), index: int = -1) -> int:
        key = (kind, args, index)
        got = self._memo.get(key)
        if got is None:
            got = len(self.gates)
            self.gates.append(Gate(kind, args, index))
            self._memo[key] = got
        return got

    def input(self, i: int) -> int:
        if not 0 <= i < self.input_arity:
            raise ParameterError(f"input {i} out of range")
        return self._add(INPUT, (), i)

    def const(self, v: int) -> int:
        return self._add(CONST1 if v else CONST0)

    def _constval(self, g: int):
        kind = self.gates[g].kind
        return 1 if kind == CONST1 else 0 if kind == CONST0 else None

    def not_(self, a: int) -> int:
        v = self._constval(a)
        if v is not None:
            return self.const(1 - v)
        if self.gates[a].kind == NOT:
            return self.gates[a].args[0]
        return self._add(NOT, (a,))

    def and_(self, a: int, b: int) -> int:
        va, vb = self._constval(a), self._constval(b)
        if va == 0 or vb == 0:
            return self.const(0)
        if va == 1:
            return b
        if vb == 1 or a == b:
            return a
        return self._add(AND2, (min(a, b), max(a, b)))

    def or_(self, a: int, b: int) -> int:
        va, vb = self._constval(a), self._constval(b)
        if va == 1 or vb == 1:
            return self.const(1)
        if va == 0:
            return b
        if vb == 0 or a == b:
            return a
        return self._add(OR2, (min(a, b), max(a, b)))

    def xor_(self, a: int, b: int) -> int:
        va, vb = self._constval(a), self._constval(b)
        if va is not None and vb is not None:
            return self.const(va ^ vb)
        if va is not None:
            return self.not_(b) if va else b
        if vb is not None:
            return self.not_(a) if vb else a
        if a == b:
            return self.const(0)
        return self._add(XOR2, (min(a, b), max(a, b)))

    def mux(self, sel: int, if0: int, if1: int) -> int:
        if if0 == if1:
            return if0
        return self.or_(self.and_(sel, if1), self.and_(self.not_(sel), if0))

    def build(self, output: int) -> Circuit:
        """Keep only gates in the output's cone, renumbered in order."""
        keep = [False] * len(self.gates)
        keep[output] = True
        for k in range(output, -1, -1):
            if keep[k]:
                for a in self.gates[k].args:
                    keep[a] = True
        remap = {}
        out: list[Gate] = []
        for k, g in enumerate(self.gates):
            if keep[k]:
                remap[k] = len(out)
                out.append(Gate(g.kind, tuple(remap[a] for a in g.args), g.index))
        return Circuit(self.input_arity, tuple(out), remap[output])


def circuit_from_truth_table(table: Sequence[int], arity: int) -> Circuit:
    """Multiplexer tree; input 0 is the most significant bit of the row index."""
    if len(table) != 1 << arity:
        raise ParameterError("truth table length must be 2^arity")
    b = CircuitBuilder(arity)
    layer = [b.const(int(v)) for v in table]
    for var in range(arity - 1, -1, -1):
        sel = b.input(var)
        layer = [b.mux(sel, layer[2 * j], layer[2 * j + 1]) for j in range(len(layer) // 2)]
    return b.build(layer[0])


# Bit-parallel evaluation over packed uint64 words.

_LOW_PATTERNS = [
    0xAAAAAAAAAAAAAAAA,
    0xCCCCCCCCCCCCCCCC,
    0xF0F0F0F0F0F0F0F0,
    0xFF00FF00FF00FF00,
    0xFFFF0000FFFF0000,
    0xFFFFFFFF00000000,
]


def enumeration_patterns(r: int) -> list[np.ndarray]:
    """Packed columns of the 2^r-row table of all assignments.

    Row u assigns bit j of u to variable j.
    """
    words = max(1, (1 << r) // 64)
    idx = np.arange(words, dtype=np.uint64)
    cols = []
    for j in range(r):
        if j < 6:
            cols.append(np.full(words, _LOW_PATTERNS[j], dtype=np.uint64))
        else:
            cols.append(np.where((idx >> np.uint64(j - 6)) & np.uint64(1), ~np.uint64(0), np.uint64(0)).astype(np.uint64))
    return cols


def row_mask(rows: int) -> np.ndarray:
    words = max(1, (rows + 63) // 64)
    mask = np.full(words, ~np.uint64(0), dtype=np.uint64)
    if rows % 64:
        mask[-1] = np.uint64((1 << (rows % 64)) - 1)
    return mask


def pack_bool(v: np.ndarray) -> np.ndarray:
    """Pack a boolean vector into little-endian uint64 words."""
    padded = np.zeros(max(64, ((len(v) + 63) // 64) * 64), dtype=bool)
    padded[: len(v)] = v
    return np.packbits(padded, bitorder="little").view("<u8").astype(np.uint64)


def eval_packed(c: Circuit, inputs: Mapping[int, np.ndarray], words: int) -> np.ndarray:
    """Evaluate on packed rows; inputs maps input position to a word array.

    Inputs outside the output cone may be omitted.
    """
    last_use = [-1] * len(c.gates)
    for k, g in enumerate(c.gates):
        for a in g.args:
            last_use[a] = k
    last_use[c.output] = len(c.gates)
    zeros = np.zeros(words, dtype=np.uint64)
    ones = ~zeros
    vals: dict[int, np.ndarray] = {}
    for k, g in enumerate(c.gates):
        if last_use[k] < 0:
            continue
        kind = g.kind
        if kind == INPUT:
            v = inputs[g.index]
        elif kind == CONST0:
            v = zeros
        elif kind == CONST1:
            v = ones
        elif kind == NOT:
            v = ~vals[g.args[0]]
        elif kind == AND2:
            v = vals[g.args[0]] & vals[g.args[1]]
        elif kind == OR2:
            v = vals[g.args[0]] | vals[g.args[1]]
        else:
            v = vals[g.args[0]] ^ vals[g.args[1]]
        vals[k] = v
        for a in g.args:
            if last_use[a] == k:
                del vals[a]
    return vals[c.output]


def popcount(words: np.ndarray) -> int:
    return int(np.bitwise_count(words).sum())


def count_accepting(c: Circuit, cap: int = 24) -> tuple[int, int]:
    """(number of accepting assignments to the cone inputs, cone size)."""
    from .errors import BudgetError

    cone = c.cone_inputs()
    r = len(cone)
    if r > cap:
        raise BudgetError(f"circuit depends on {r} inputs, exact cap is {cap}")
    cols = enumeration_patterns(r)
    words = max(1, (1 << r) // 64)
    out = eval_packed(c, dict(zip(cone, cols)), words)
    return popcount(out & row_mask(1 << r)), r


# Machine-to-circuit compilation.

def compile_size_bound(m: ToyProgram, t: int) -> int:
    return COMPILE_K * len(m.code) * t * max(1, math.ceil(math.log2(t + 1)))


def compile_machine_to_circuit(m: ToyProgram, a: str, t: int) -> Circuit:
    """Circuit over t random-tape bits that is 1 iff the clocked run accepts.

    Simulates every reachable configuration (pc, input position, last bit,
    random bits used) symbolically, one step at a time, merging identical
    configurations with OR. Only runs that have not yet output anything are
    tracked; the first output bit settles acceptance.
    """
    if t < 1:
        raise ValueError("step budget must be at least 1")
    code = m.code
    size = len(code)
    b = CircuitBuilder(t)
    accept = b.const(0)
    states: dict[tuple[int, int, int, int], int] = {(0, 0, 0, 0): b.const(1)}
    for _ in range(t):
        nxt: dict[tuple[int, int, int, int], int] = {}

        def go(key, g):
            if key[0] >= size:
                return
            prev = nxt.get(key)
            nxt[key] = g if prev is None else b.or_(prev, g)

        for (pc, ip, last, rnd), g in states.items():
            op, arg = code[pc] & 7, code[pc] >> 3
            if op in (HALT, BAD, OUT0):
                continue
            if op == OUT1:
                accept = b.or_(accept, g)
            elif op == RND:
                y = b.input(rnd)
                if arg & ECHO:
                    accept = b.or_(accept, b.and_(g, y))
                else:
                    go((pc + 1, ip, 1, rnd + 1), b.and_(g, y))
                    go((pc + 1, ip, 0, rnd + 1), b.and_(g, b.not_(y)))
            elif op == RDI:
                bit = 1 if ip < len(a) and a[ip] == "1" else 0
                if arg & ECHO:
                    if bit:
                        accept = b.or_(accept, g)
                else:
                    go((pc + 1, ip + 1, bit, rnd), g)
            elif op == BRF:
                go((pc + 1 + arg if last else pc + 1, ip, last, rnd), g)
            else:
                go((arg, ip, last, rnd), g)
        states = nxt
        if not states:
            break
    return b.build(accept)
