"""A self-correctable, downward self-reducible, checkable, paddable language
built on the permanent over a prime field, and the padded language L_k.

The decision language: a bit string y is split into a d x d matrix of
``entry_bits``-wide entries (row-major, most significant bit first, reduced
mod p) followed by an index j; y is in the language iff bit j of
Perm(A) mod p is 1. Bits past the index field are ignored.
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import permutations, product
from typing import Callable, Sequence

from .errors import BudgetError, OracleError, ParameterError
from .machines import ECHO, JMP, RDI, SeededSampler, ToyProgram, enumerate_machines, exec_program

Matrix = tuple[tuple[int, ...], ...]
MAX_DIMENSION = 8
UNKNOWN = "?"
ACCEPT = "ACCEPT"


def is_prime_small(p: int) -> bool:
    if p < 2:
        return False
    return all(p % q for q in range(2, math.isqrt(p) + 1))


def as_matrix(rows, p: int) -> Matrix:
    return tuple(tuple(int(v) % p for v in row) for row in rows)


@dataclass(frozen=True)
class PermInstance:
    matrix: Matrix
    p: int = 13
    target_bit: int = 0

    def __post_init__(self):
        if not is_prime_small(self.p):
            raise ParameterError(f"{self.p} is not prime")
        n = len(self.matrix)
        if any(len(r) != n for r in self.matrix):
            raise ParameterError("matrix must be square")
        object.__setattr__(self, "matrix", as_matrix(self.matrix, self.p))

    @property
    def dimension(self) -> int:
        return len(self.matrix)


def instance_to_text(inst: PermInstance) -> str:
    """Dimension, p, then the row-major entries, whitespace separated."""
    return " ".join(map(str, [inst.dimension, inst.p, *(v for row in inst.matrix for v in row)])) + "\n"


def instance_from_text(text: str) -> PermInstance:
    toks = [int(t) for t in text.split()]
    if len(toks) < 2 or len(toks) != 2 + toks[0] ** 2:
        raise ParameterError("matrix file must hold dimension, p and dimension^2 entries")
    n, p, vals = toks[0], toks[1], toks[2:]
    return PermInstance(tuple(tuple(vals[r * n : (r + 1) * n]) for r in range(n)), p)


def perm_eval(a: Matrix | PermInstance, p: int | None = None) -> int:
    """Permanent mod p by Ryser's formula with Gray-code subset updates."""
    if isinstance(a, PermInstance):
        a, p = a.matrix, a.p
    if p is None or not is_prime_small(p):
        raise ParameterError(f"{p} is not prime")
    n = len(a)
    if n == 0:
        return 1 % p
    if n > MAX_DIMENSION:
        raise BudgetError(f"dimension {n} above {MAX_DIMENSION}")
    sums = [0] * n
    total = 0
    prev = 0
    for k in range(1, 1 << n):
        gray = k ^ (k >> 1)
        j = (gray ^ prev).bit_length() - 1
        sign = 1 if gray & (1 << j) else -1
        for i in range(n):
            sums[i] += sign * a[i][j]
        prev = gray
        prod = 1
        for s in sums:
            prod *= s
        total += -prod if bin(gray).count("1") % 2 else prod
    return ((-1) ** n * total) % p


def perm_naive(a: Matrix, p: int) -> int:
    n = len(a)
    total = 0
    for sigma in permutations(range(n)):
        prod = 1
        for i in range(n):
            prod *= a[i][sigma[i]]
        total += prod
    return total % p


def minor(a: Matrix, row: int, col: int) -> Matrix:
    return tuple(tuple(v for j, v in enumerate(r) if j != col) for i, r in enumerate(a) if i != row)


def perm_dsr(a: Matrix, oracle: Callable[[Matrix], int], p: int) -> int:
    """First-row expansion; asks the oracle for every minor (dimension queries)."""
    n = len(a)
    if n < 2:
        raise ParameterError("downward self-reduction needs dimension >= 2")
    total = 0
    for j in range(n):
        v = oracle(minor(a, 0, j))
        if v is None:
            raise OracleError(f"oracle gave no answer on minor {j}")
        total += a[0][j] * v
    return total % p


class CountingOracle:
    def __init__(self, fn: Callable[[Matrix], int]):
        self.fn = fn
        self.calls: list[Matrix] = []

    def __call__(self, a: Matrix) -> int:
        self.calls.append(a)
        return self.fn(a)


def honest_oracle(p: int) -> Callable[[Matrix], int]:
    return lambda a: perm_eval(a, p)


def _hash_unit(salt: str, payload: bytes) -> float:
    h = hashlib.blake2b(payload, digest_size=8, key=salt.encode()[:64]).digest()
    return int.from_bytes(h, "big") / 2**64


@dataclass
class CorruptOracle:
    """Permanent oracle that is wrong on a fixed pseudorandom fraction of
    inputs (a table fixed by ``salt``), and right everywhere else."""

    p: int
    rate: float
    salt: str = "corrupt"

    def corrupted(self, a: Matrix) -> bool:
        return _hash_unit(self.salt, repr(a).encode()) < self.rate

    def __call__(self, a: Matrix) -> int:
        v = perm_eval(a, self.p)
        if self.corrupted(a):
            return (v + 1) % self.p
        return v


def lagrange_at(xs: Sequence[int], ys: Sequence[int], x: int, p: int) -> int:
    total = 0
    for i, (xi, yi) in enumerate(zip(xs, ys)):
        num, den = 1, 1
        for k, xk in enumerate(xs):
            if k != i:
                num = num * (x - xk) % p
                den = den * (xi - xk) % p
        total += yi * num * pow(den, -1, p)
    return total % p


def _axpy(a: Matrix, t: int, b: Matrix, p: int) -> Matrix:
    return tuple(tuple((x + t * y) % p for x, y in zip(ra, rb)) for ra, rb in zip(a, b))


def perm_selfcorrect(a: Matrix, oracle: Callable[[Matrix], int], trials: int, sampler: SeededSampler, p: int) -> int:
    """Random self-reduction plus majority vote.

    Each trial picks a uniform matrix B and asks the oracle for Perm(A + tB)
    at t = 1..n+1; these are values of a degree-n polynomial whose value at
    0 is Perm(A). Each query point is individually uniform, so a corruption
    rate rho spoils a trial with probability at most (n+1) rho.
    """
    n = len(a)
    if p <= 2 * n + 2:
        raise ParameterError(f"need p > 2n + 2 = {2 * n + 2}, got {p}")
    if n == 0:
        return 1 % p
    votes: dict[int, int] = {}
    rng = sampler.rng
    ts = list(range(1, n + 2))
    for _ in range(trials):
        b = tuple(tuple(int(v) for v in row) for row in rng.integers(0, p, size=(n, n)))
        ys = []
        for t in ts:
            v = oracle(_axpy(a, t, b, p))
            ys.append(0 if v is None else int(v) % p)
        q0 = lagrange_at(ts, ys, 0, p)
        votes[q0] = votes.get(q0, 0) + 1
    return max(votes.items(), key=lambda kv: (kv[1], -kv[0]))[0]


def checker_round_error(n: int, p: int) -> Fraction:
    """Soundness error of one checker round: sum over levels of deg/p."""
    return sum((Fraction((k - 1) ** 2, p) for k in range(2, n + 1)), Fraction(0))


def checker_repetitions(n: int, p: int, target_log2: int = 20) -> int:
    err = checker_round_error(n, p)
    if err == 0:
        return 1
    if err >= 1:
        raise ParameterError(f"field too small for dimension {n}: round error {err}")
    return math.ceil(target_log2 / -math.log2(err))


def _interp_matrix(mats: Sequence[Matrix], x: int, p: int) -> Matrix:
    """Entrywise Lagrange interpolation through mats at nodes 1..len(mats)."""
    nodes = list(range(1, len(mats) + 1))
    weights = []
    for i, xi in enumerate(nodes):
        num, den = 1, 1
        for k, xk in enumerate(nodes):
            if k != i:
                num = num * (x - xk) % p
                den = den * (xi - xk) % p
        weights.append(num * pow(den, -1, p) % p)
    size = len(mats[0])
    return tuple(
        tuple(sum(w * m[r][c] for w, m in zip(weights, mats)) % p for c in range(size)) for r in range(size)
    )


def _check_round(a: Matrix, claim: int, oracle, rng, p: int) -> bool:
    cur, n = a, len(a)
    while n > 1:
        minors = [minor(cur, 0, j) for j in range(n)]
        deg = (n - 1) ** 2
        xs = list(range(deg + 1))
        ys = []
        for x in xs:
            v = oracle(_interp_matrix(minors, x, p))
            if v is None:
                return False
            ys.append(int(v) % p)
        if sum(cur[0][j] * lagrange_at(xs, ys, j + 1, p) for j in range(n)) % p != claim % p:
            return False
        r = int(rng.integers(0, p))
        cur, claim = _interp_matrix(minors, r, p), lagrange_at(xs, ys, r, p)
        n -= 1
    if n == 0:
        return claim % p == 1 % p
    return cur[0][0] % p == claim % p


def perm_check(a: Matrix, claimed: int | None, oracle, sampler: SeededSampler, p: int, reps: int | None = None):
    """Instance checker for Perm(A) = claimed.

    One round walks down the dimensions: the minors of the first-row
    expansion are joined by a matrix polynomial D(x) with D(j) = minor j,
    the oracle is asked for Perm(D(x)) at (n-1)^2 + 1 points, the implied
    polynomial must reproduce the claim, and the claim moves to a random
    point. Rounds are repeated until the error is below 2^-20. Returns
    (ACCEPT, claimed) or UNKNOWN.
    """
    n = len(a)
    if n and p <= max(2 * n + 2, (n - 1) ** 2):
        raise ParameterError(f"field GF({p}) too small for dimension {n}")
    if claimed is None:
        return UNKNOWN
    reps = checker_repetitions(n, p) if reps is None else reps
    rng = sampler.rng
    for _ in range(reps):
        if not _check_round(a, claimed, oracle, rng, p):
            return UNKNOWN
    return (ACCEPT, claimed % p)


def instance_check(a: Matrix, oracle, sampler: SeededSampler, p: int, reps: int | None = None):
    """Checker in its usual form: the claimed value is the oracle's own answer."""
    res = perm_check(a, oracle(a), oracle, sampler, p, reps)
    return res if res == UNKNOWN else res[1]


# Padding

def pad_matrix(a: Matrix, m: int) -> Matrix:
    """Block-diagonal extension by an identity block; the permanent is unchanged."""
    n = len(a)
    if m <= n:
        raise ParameterError(f"target dimension {m} must exceed {n}")
    rows = [tuple(r) + (0,) * (m - n) for r in a]
    for i in range(n, m):
        rows.append(tuple(1 if j == i else 0 for j in range(m)))
    return tuple(rows)


def _length_code(v: int) -> str:
    return "".join(c + c for c in format(v, "b")) + "01"


@dataclass(frozen=True)
class PaddedString:
    payload: str
    length: int

    @property
    def bits(self) -> str:
        head = _length_code(len(self.payload)) + self.payload
        return head + "0" * (self.length - len(head))


def pad_bits(x: str | PaddedString, m: int) -> PaddedString:
    """Length-prefixed framing: doubled-bit length, '01', payload, zero fill."""
    payload = x.payload if isinstance(x, PaddedString) else x
    if m <= len(payload) or m < len(_length_code(len(payload))) + len(payload):
        raise ParameterError(f"cannot pad {len(payload)} bits into {m}")
    return PaddedString(payload, m)


def unpad_bits(bits: str) -> str:
    i, v = 0, ""
    while bits[i : i + 2] != "01":
        pair = bits[i : i + 2]
        if pair not in ("00", "11"):
            raise ParameterError("malformed length prefix")
        v += pair[0]
        i += 2
    size = int(v, 2) if v else 0
    return bits[i + 2 : i + 2 + size]


def pad(x, m):
    if isinstance(x, PermInstance):
        return PermInstance(pad_matrix(x.matrix, m), x.p, x.target_bit)
    if isinstance(x, tuple):
        return pad_matrix(x, m)
    return pad_bits(x, m)


# The bit-string decision language.

@dataclass(frozen=True)
class SurrogateLanguage:
    p: int = 19
    entry_bits: int = 5

    def __post_init__(self):
        if not is_prime_small(self.p):
            raise ParameterError(f"{self.p} is not prime")
        if (1 << self.entry_bits) < self.p and self.entry_bits > 1:
            raise ParameterError("entries too narrow for the field")

    @property
    def index_bits(self) -> int:
        return max(0, math.ceil(math.log2(self.entry_bits))) if self.entry_bits > 1 else 0

    def dimension_for(self, length: int) -> int:
        if length < self.index_bits:
            return -1
        d = 0
        while self.entry_bits * (d + 1) ** 2 + self.index_bits <= length:
            d += 1
        return d

    def encoded_length(self, d: int) -> int:
        return self.entry_bits * d * d + self.index_bits

    def encode(self, a: Matrix, j: int) -> str:
        e = self.entry_bits
        body = "".join(format(v % self.p if e > 1 else v & 1, f"0{e}b") for row in a for v in row)
        idx = format(j, f"0{self.index_bits}b") if self.index_bits else ""
        return body + idx

    def parse(self, y: str):
        """(matrix, bit index, ignored tail) or None if y is too short."""
        d = self.dimension_for(len(y))
        if d < 0:
            return None
        e = self.entry_bits
        vals = [int(y[e * k : e * (k + 1)], 2) % self.p for k in range(d * d)]
        a = tuple(tuple(vals[r * d : (r + 1) * d]) for r in range(d))
        cut = e * d * d
        j = int(y[cut : cut + self.index_bits], 2) if self.index_bits else 0
        return a, j, y[cut + self.index_bits :]

    def member(self, y: str) -> int:
        parsed = self.parse(y)
        if parsed is None:
            return 0
        a, j, _ = parsed
        if len(a) > MAX_DIMENSION:
            raise BudgetError(f"instance dimension {len(a)} above {MAX_DIMENSION}")
        if j >= self.entry_bits:
            return 0
        return (perm_eval(a, self.p) >> j) & 1


DEFAULT_LANGUAGE = SurrogateLanguage()
NW_LANGUAGE = SurrogateLanguage(p=19, entry_bits=1)


def surrogate_truth_table(k: int) -> tuple[int, ...]:
    """Truth table on k-bit inputs (row index most significant bit first) of
    the 0/1-entry version of the decision language."""
    return tuple(NW_LANGUAGE.member(format(w, f"0{k}b")) if k else NW_LANGUAGE.member("") for w in range(1 << k))


# Good input lengths for L_k.

@dataclass(frozen=True)
class TimeBoundTable:
    values: tuple[int, ...]
    source: str = "INJECTED"

    def __post_init__(self):
        if any(b < a for a, b in zip(self.values, self.values[1:])):
            raise ParameterError("time-bound table must be non-decreasing")

    @classmethod
    def constant(cls, c: int, up_to: int) -> "TimeBoundTable":
        return cls(tuple([c] * (up_to + 1)))

    @classmethod
    def from_function(cls, fn, up_to: int) -> "TimeBoundTable":
        return cls(tuple(fn(i) for i in range(up_to + 1)))

    def __call__(self, i: int) -> int:
        if i >= len(self.values):
            raise ParameterError(f"time bound undefined at {i}")
        return self.values[i]

    def to_csv(self) -> str:
        return "n,T\n" + "".join(f"{i},{v}\n" for i, v in enumerate(self.values))

    @classmethod
    def from_csv(cls, text: str, source: str = "INJECTED") -> "TimeBoundTable":
        rows = [line.split(",") for line in text.strip().splitlines()[1:]]
        if [int(r[0]) for r in rows] != list(range(len(rows))):
            raise ParameterError("T-table rows must be n = 0, 1, 2, ...")
        return cls(tuple(int(r[1]) for r in rows), source)


@dataclass(frozen=True)
class HierarchyParams:
    k: int = 1
    delta: Fraction = Fraction(1, 20)
    lam: int = 1

    def __post_init__(self):
        object.__setattr__(self, "delta", Fraction(self.delta))
        if self.k < 1:
            raise ParameterError("k must be at least 1")
        if not 0 < self.delta < Fraction(1, 18):
            raise ParameterError("delta must lie in (0, 1/18)")


@dataclass(frozen=True)
class GoodLength:
    m: int
    r: int | None
    ell: int | None
    good: bool


def dominates(ell: int, t: int, hp: HierarchyParams) -> bool:
    """2^ell >= t^(delta / 3k), compared exactly: 2^(ell * 3k * q) >= t^p
    for delta = p/q."""
    p, q = hp.delta.numerator, hp.delta.denominator
    return 1 << (ell * 3 * hp.k * q) >= t**p


def decompositions(m: int):
    """All (r, ell) with m = r + 2^ell and m > 2r."""
    out = []
    # Smaller ell leave r >= m/2; start one below the first viable ell so the
    # filter below still sees a competitor.
    ell = max(0, m.bit_length() - 2)
    while (1 << ell) <= m:
        r = m - (1 << ell)
        if m > 2 * r:
            out.append((r, ell))
        ell += 1
    return out


def good_length(m: int, table: TimeBoundTable, hp: HierarchyParams = HierarchyParams()) -> GoodLength:
    # The table is non-decreasing, so T(r) is the largest of T(0..r).
    cands = [(r, ell) for r, ell in decompositions(m) if dominates(ell, table(r), hp)]
    if len(cands) > 1:
        raise AssertionError(f"length {m} decomposes in more than one way")
    if not cands:
        dec = decompositions(m)
        r, ell = dec[0] if dec else (None, None)
        return GoodLength(m, r, ell, False)
    r, ell = cands[0]
    return GoodLength(m, r, ell, True)


def good_sequence(m: int, table: TimeBoundTable, hp: HierarchyParams = HierarchyParams()) -> tuple[int, ...]:
    g = good_length(m, table, hp)
    if not g.good:
        raise ParameterError(f"{m} is not a good length")
    seq = tuple(i + (1 << g.ell) for i in range(g.r + 1))
    for i, mi in enumerate(seq):
        gi = good_length(mi, table, hp)
        if not (gi.good and gi.r == i and gi.ell == g.ell):
            raise AssertionError(f"member {mi} of the sequence for {m} is not good with r = {i}")
    return seq


def decide_Lk(x: str, table: TimeBoundTable, hp: HierarchyParams, advice: int, lang: SurrogateLanguage = DEFAULT_LANGUAGE) -> int:
    """x = yz with |y| = r(|x|): accept iff y is in the surrogate language.

    Rejects outright when the advice bit is 0 (or the length is not good).
    """
    if not advice:
        return 0
    g = good_length(len(x), table, hp)
    if not g.good:
        return 0
    return lang.member(x[: g.r])


@dataclass
class CorruptBitOracle:
    """L_k oracle at one length, wrong on a fixed pseudorandom set of inputs."""

    table: TimeBoundTable
    hp: HierarchyParams
    rate: float
    salt: str = "lk"
    lang: SurrogateLanguage = DEFAULT_LANGUAGE
    bad_pad: str | None = None
    calls: int = 0

    def __call__(self, x: str) -> int:
        self.calls += 1
        v = decide_Lk(x, self.table, self.hp, 1, self.lang)
        if self.bad_pad is not None:
            g = good_length(len(x), self.table, self.hp)
            if x[g.r :] == self.bad_pad:
                return 1 - v
        if _hash_unit(self.salt, x.encode()) < self.rate:
            return 1 - v
        return v


def lk_selfcorrect(
    x: str,
    oracle: Callable[[str], int],
    sampler: SeededSampler,
    table: TimeBoundTable,
    hp: HierarchyParams = HierarchyParams(),
    lang: SurrogateLanguage = DEFAULT_LANGUAGE,
    trials: int = 5,
    pad_votes: int | None = None,
) -> int:
    """Self-corrector for L_k at a good length m.

    Runs the permanent self-corrector on y's matrix; each value it needs is
    assembled bit by bit from L_k queries, and each bit query y' is answered
    by the majority over ``pad_votes`` (default 100 m) strings y'z with
    uniformly random pads z.
    """
    m = len(x)
    g = good_length(m, table, hp)
    if not g.good:
        return 0
    y = x[: g.r]
    parsed = lang.parse(y)
    if parsed is None:
        return 0
    a, j, tail = parsed
    if j >= lang.entry_bits:
        return 0
    if len(a) == 0:
        return lang.member(y)
    votes = 100 * m if pad_votes is None else pad_votes
    zlen = m - g.r
    rng = sampler.rng

    def bit_query(yq: str) -> int:
        pads = rng.integers(0, 2, size=(votes, zlen), dtype="uint8")
        ones = sum(oracle(yq + "".join("1" if v else "0" for v in row)) for row in pads)
        return int(2 * ones > votes)

    def value_oracle(mat: Matrix) -> int:
        v = 0
        for b in range(lang.entry_bits):
            v |= bit_query(lang.encode(mat, b) + tail) << b
        return v % lang.p

    val = perm_selfcorrect(a, value_oracle, trials, sampler, lang.p)
    return (val >> j) & 1


# Search over programs, trusting only checked answers.

COPY_PROGRAM = ToyProgram.of((RDI, ECHO), JMP)
PLANT_INDEX = 16


def encode_matrix_input(a: Matrix, entry_bits: int) -> str:
    return "".join(format(v, f"0{entry_bits}b") for row in a for v in row)


def program_oracle(prog: ToyProgram, steps: int, sampler: SeededSampler, p: int, entry_bits: int):
    """Permanent oracle answered by running prog for ``steps`` steps on the
    encoded matrix; the first entry_bits output bits are the answer."""

    def oracle(a: Matrix):
        out = exec_program(prog, encode_matrix_input(a, entry_bits), steps, sampler.bits(steps)).output
        if len(out) < entry_bits:
            return None
        return int(out[:entry_bits], 2) % p

    return oracle


def stage_of(index: int) -> int:
    """First stage at which a program index is tried (stage m tries the
    indices of bit length floor(log2 m))."""
    return 1 << index.bit_length() if index else 1


def stage_indices(m: int) -> range:
    length = m.bit_length() - 1
    return range(0, 1) if length == 0 else range(1 << (length - 1), 1 << length)


@dataclass(frozen=True)
class SearchResult:
    answer: int | None
    stage: int | None
    index: int | None


def optimal_search(
    inst: PermInstance,
    budget: int,
    sampler: SeededSampler,
    plant: dict[int, ToyProgram] | None = None,
    entry_bits: int = 5,
    reps: int | None = None,
) -> SearchResult:
    """For m = 1..budget, run the checker with every program of the stage as
    its oracle (clocked at m steps); return the first non-'?' answer."""
    plant = {PLANT_INDEX: COPY_PROGRAM} if plant is None else plant
    p = inst.p
    for m in range(1, budget + 1):
        for i in stage_indices(m):
            prog = plant.get(i) or enumerate_machines(i)
            oracle = program_oracle(prog, m, sampler, p, entry_bits)
            res = instance_check(inst.matrix, oracle, sampler, p, reps)
            if res != UNKNOWN:
                return SearchResult(res, m, i)
    return SearchResult(None, None, None)


def estimate_T(max_n: int, runs: int, sampler: SeededSampler, budget: int = 64, **search_kw) -> TimeBoundTable:
    """Empirical T: for each dimension i, the least stage by which the search
    answered correctly in a (1 - 1/i) fraction of runs; running max over i.
    Dimensions the search never solves within budget get budget + 1."""
    values = [1]
    for i in range(1, max_n + 1):
        stages = []
        for _ in range(runs):
            a = tuple(tuple(int(v) for v in row) for row in sampler.rng.integers(0, 13, size=(i, i)))
            inst = PermInstance(a, 13)
            res = optimal_search(inst, budget, sampler, **search_kw)
            ok = res.answer is not None and res.answer == perm_eval(inst)
            stages.append(res.stage if ok else budget + 1)
        need = math.ceil((1 - Fraction(1, i)) * runs)
        stages.sort()
        t_i = 1 if need == 0 else stages[need - 1]
        values.append(max(values[-1], t_i))
    return TimeBoundTable(tuple(values), "EMPIRICAL")
