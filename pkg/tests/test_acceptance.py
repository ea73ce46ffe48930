"""The twelve acceptance criteria. Each prints one PASS/FAIL line and fails
the test on FAIL. Runs standalone with ``python tests/test_acceptance.py``."""
from __future__ import annotations

import math
import sys
import time
from fractions import Fraction
from itertools import combinations, product
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from strategies import random_circuit  # noqa: E402

from pseudodet.capp import CappGenConfig, CappInstance, capp_exact, capp_prg, capp_pseudodet, capp_sample, success_rate  # noqa: E402
from pseudodet.circuits import compile_machine_to_circuit  # noqa: E402
from pseudodet.diag import DIFFERS, DiagInput, diag_decide, diag_ensemble, hard_language_decide, hardness_reduce, promise_respecting  # noqa: E402
from pseudodet.kolmogorov import ComplexityBudget, counting_bound_holds, rkt, rkt_census  # noqa: E402
from pseudodet.machines import SeededSampler, enumerate_machines  # noqa: E402
from pseudodet.manifest import load_manifest  # noqa: E402
from pseudodet.nwprg import IdentityGenerator, NWGenerator, advantage_exact, build_design, hybrid_predictor, hybrid_probabilities  # noqa: E402
from pseudodet.parallel import map_ordered  # noqa: E402
from pseudodet.primes import find_prime_via_prg, is_prime, random_seed_prime  # noqa: E402
from pseudodet.rktconstruct import EXACT, RndSearchInstance, constant_decider, construct_high_rkt, fact51_witness, parity_decider  # noqa: E402
from pseudodet.structured import (  # noqa: E402
    UNKNOWN, CorruptOracle, PLANT_INDEX, PermInstance, TimeBoundTable, estimate_T, good_length, good_sequence,
    honest_oracle, instance_check, optimal_search, pad_bits, pad_matrix, perm_check, perm_dsr, perm_eval,
    perm_selfcorrect, stage_of, unpad_bits,
)


def _matrix(rng, n, p):
    return tuple(tuple(int(v) for v in row) for row in rng.integers(0, p, size=(n, n)))


def c1_capp_oracles():
    rng = SeededSampler("acc-1", 12, 1, 0).rng
    close = exact_hits = 0
    for k in range(200):
        c = random_circuit(rng, int(rng.integers(1, 13)), int(rng.integers(1, 40)))
        mu = capp_exact(c).mu
        est = capp_sample(c, 100_000, SeededSampler("acc-1", 12, k, 0)).mu
        close += abs(est - mu) <= Fraction(1, 50)
        exact_hits += capp_prg(c, IdentityGenerator(c.input_arity)).mu == mu
    ok = close >= 198 and exact_hits == 200
    return ok, f"sampled within 0.02 on {close}/200, identity exact on {exact_hits}/200"


def c2_pseudodeterminism():
    x32 = [DiagInput(32, i) for i in range(32)]
    insts = [CappInstance.padded(32, compile_machine_to_circuit(enumerate_machines(i), x.raw, 64), 2) for i, x in
             ((x.i, x) for x in x32[:8])]
    hard = [hardness_reduce(enumerate_machines(i), "01", 6) for i in range(40)]
    jobs = {
        "capp_pseudodet": (capp_pseudodet, insts),
        "diag_decide": (diag_decide, x32),
        "hard_language_decide": (hard_language_decide, hard),
    }
    bad = []
    for name, (fn, items) in jobs.items():
        outs = {repr(map_ordered(fn, items, w)) for w in (1, 4) for _ in range(5)}
        if len(outs) != 1:
            bad.append(name)
    rk = {repr(construct_high_rkt(RndSearchInstance(16, 2), workers=w)) for w in (1, 4) for _ in range(5)}
    pr = {repr(find_prime_via_prg(IdentityGenerator(16), 16, workers=w)) for w in (1, 4) for _ in range(5)}
    if len(rk) != 1:
        bad.append("construct_high_rkt")
    if len(pr) != 1:
        bad.append("find_prime_via_prg")
    return not bad, "all five identical over 10 runs and workers {1, 4}" if not bad else f"varied: {bad}"


def c3_success_on_ensemble():
    n = 32
    ens = diag_ensemble(n, 2)
    insts = [CappInstance.padded(n, c, 2) for c in (ens.sample(ens.sampler(s))[1] for s in range(4 * n))]
    support = [CappInstance.padded(n, compile_machine_to_circuit(enumerate_machines(x.i), x.raw, n * n), 2) for x in ens.support()]
    rate = success_rate(support, capp_pseudodet)
    sampled = success_rate(insts, capp_pseudodet)
    ok = rate == 1 and sampled == 1 and rate >= 1 - Fraction(1, 3 * n)
    return ok, f"success over full support {rate}, over {len(insts)} samples {sampled}"


def c4_diagonal_difference():
    reps = promise_respecting(32, 8)
    verdicts = [r.verdict for r in reps]
    ok = len(reps) == 8 and all(v == DIFFERS for v in verdicts)
    return ok, f"machines {[r.i for r in reps]}: {verdicts.count(DIFFERS)}/8 DIFFERS"


def c5_counting():
    b = ComplexityBudget()
    hist = rkt_census(8, b)
    high = sum(c for v, c in hist.items() if v is None or v >= 0.2 * 8)
    ok = 3 * high >= 2 * 256 and counting_bound_holds(hist, b)
    return ok, f"{high}/256 with rkt >= 1.6; counting bound holds for every s: {counting_bound_holds(hist, b)}"


def c6_algorithm2():
    out = []
    for n in (8, 16):
        inst = RndSearchInstance(n, 2)
        res = construct_high_rkt(inst, b_mode=EXACT)
        value = None if res.failed else rkt(res.string).value
        out.append((n, res.string, value, not res.failed and value is not None and value >= inst.required))
    ok = all(r[3] for r in out)
    return ok, "; ".join(f"n={n}: {s} rkt={v}" for n, s, v, _ in out)


def c7_structural():
    # dsr: dimensions 2 and 3 over all of GF(5), dimension 4 over all 0/1 matrices.
    p = 5
    all2 = {a: perm_eval(a, p) for a in (tuple(e[r * 2 : r * 2 + 2] for r in range(2)) for e in product(range(p), repeat=4))}
    dsr_bad = sum(perm_dsr(a, honest_oracle(p), p) != v for a, v in all2.items())
    vals = np.array(list(product(range(p), repeat=9)), dtype=np.int64).reshape(-1, 3, 3)
    direct = sum(vals[:, 0, s[0]] * vals[:, 1, s[1]] * vals[:, 2, s[2]] for s in
                 ((0, 1, 2), (0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0))) % p
    for a_arr, v in zip(vals, direct):
        a = tuple(map(tuple, a_arr.tolist()))
        dsr_bad += perm_dsr(a, all2.__getitem__, p) != v
    all3 = {}
    for e in product(range(2), repeat=16):
        a = tuple(e[r * 4 : r * 4 + 4] for r in range(4))
        dsr_bad += perm_dsr(a, lambda m: all3.setdefault(m, perm_eval(m, p)), p) != perm_eval(a, p)

    s = SeededSampler("acc-7", 4, 1, 0)
    q = 13
    corrected = 0
    for r in range(1000):
        a = _matrix(s.rng, 4, q)
        corrected += perm_selfcorrect(a, CorruptOracle(q, 0.01, f"acc7-{r}"), 5, s, q) == perm_eval(a, q)

    flip = lambda m: (perm_eval(m, q) + 1) % q
    wrong = 0
    for _ in range(500):
        a = _matrix(s.rng, 3, q)
        wrong += instance_check(a, flip, s, q) != UNKNOWN
    for _ in range(500):
        a = _matrix(s.rng, 3, q)
        wrong += perm_check(a, perm_eval(a, q) + 1, honest_oracle(q), s, q) != UNKNOWN

    padded = 0
    for r in range(20):
        a = _matrix(s.rng, 1 + r % 4, q)
        x = "".join(map(str, s.rng.integers(0, 2, 5 + r)))
        padded += perm_eval(pad_matrix(a, len(a) + 1 + r % 3), q) == perm_eval(a, q) and unpad_bits(pad_bits(x, 40).bits) == x
    ok = dsr_bad == 0 and corrected >= 750 and wrong <= 333 and padded == 20
    return ok, (f"dsr mismatches {dsr_bad} (GF(5) dims 2-3, 0/1 dim 4); self-correct {corrected}/1000; "
                f"checker wrong-accepts {wrong}/1000; padding exact {padded}/20")


def c8_good_lengths():
    tables = [TimeBoundTable.constant(1, 4096), TimeBoundTable.from_function(lambda i: 1 + i**3, 4096),
              TimeBoundTable.from_function(lambda i: 2 ** (4 * i), 4096)]
    good = checked = 0
    for table in tables:
        for m in range(1, 4097):
            g = good_length(m, table)  # raises on a second decomposition
            if g.good:
                good += 1
                checked += len(good_sequence(m, table))  # asserts goodness of every member
    return True, f"{good} good lengths over 3 tables, {checked} sequence members re-checked"


def c9_optimal():
    s = SeededSampler("acc-9", 1, 1, 0)
    stage = stage_of(PLANT_INDEX)
    agree = at_stage = 0
    for _ in range(200):
        v = int(s.rng.integers(0, 13))
        res = optimal_search(PermInstance(((v,),), 13), 64, s)
        agree += res.answer == v
        at_stage += res.stage == stage
    table = estimate_T(2, 5, SeededSampler("acc-9T", 2, 1, 0), budget=40)
    mono = list(table.values) == sorted(table.values)
    ok = agree >= 190 and at_stage == 200 and mono
    return ok, f"answered at stage {stage} in {at_stage}/200, correct {agree}/200; T = {table.values}"


def c10_nw():
    d = build_design(16, 4, 8, 2)
    sets_ok = all(len(set(x)) == 4 and max(x) < 16 for x in d.sets) and all(
        len(set(a) & set(b)) <= 2 for a, b in combinations(d.sets, 2)) and len(set(d.sets)) == 8
    rng = SeededSampler("acc-10", 16, 1, 0).rng
    tele = total = cases = pred_ok = 0
    for ell in range(4, 17):
        for _ in range(6):
            k, alpha = (2, 1) if ell < 8 else (4, 2)
            m = int(rng.integers(2, min(9, ell)))
            design = build_design(ell, k, m, alpha)
            total += 1
            g = NWGenerator(design, tuple(int(v) for v in rng.integers(0, 2, 1 << k)))
            dist = random_circuit(rng, m, int(rng.integers(3, 16)))
            hyb = hybrid_probabilities(dist, g)
            adv = advantage_exact(dist, g)
            tele += hyb[0] == adv.p_uniform and hyb[-1] == adv.p_generator and sum(
                hyb[i + 1] - hyb[i] for i in range(len(hyb) - 1)) == hyb[-1] - hyb[0]
            res = hybrid_predictor(dist, g)
            if res.found:
                cases += 1
                pred_ok += res.advantage >= abs(res.total) / m
    ok = sets_ok and tele == total and pred_ok == cases and cases > 0
    return ok, f"design valid: {sets_ok}; telescoping exact {tele}/{total}; predictor bound {pred_ok}/{cases}"


def c11_fact51():
    man = load_manifest()
    worst = []
    steps_ok = True
    for n in range(1, 5):
        for spec in (constant_decider(0), constant_decider(1), parity_decider(n)):
            ws = {ell: fact51_witness(spec, n, ell) for ell in range(1, (1 << n) + 1)}
            worst.append(max(w.cost - w.bound for w in ws.values()))
            doubles = [1 << j for j in range(1, n + 1)]
            steps_ok &= all(ws[2 * e].cost - ws[e].cost == 1 for e in doubles[:-1])
    ok = max(worst) <= 0 and steps_ok
    return ok, f"C'={man.fact51_c_prime}, c0={man.fact51_c0}; max cost - bound {max(worst)}; +1 per doubling: {steps_ok}"


def c12_primes():
    sp = find_prime_via_prg(IdentityGenerator(16), 16)
    first = next(v for v in range(1 << 16) if v > 1 and all(v % q for q in range(2, math.isqrt(v) + 1)))
    rep = random_seed_prime(8, 100_000, SeededSampler("acc-12", 8, 1, 0), IdentityGenerator(8))
    sieve = np.ones(10**6, dtype=bool)
    sieve[:2] = False
    for q in range(2, 1001):
        if sieve[q]:
            sieve[q * q :: q] = False
    mr_bad = sum(is_prime(v) != bool(sieve[v]) for v in range(10**6))
    ok = sp.prime == first and abs(rep.z) <= 3 and rep.expected == Fraction(1, 2) / 256 and mr_bad == 0
    return ok, f"first prime {sp.prime} (enumeration {first}); rate {rep.hits}/100000 z={rep.z:.2f}; MR mismatches {mr_bad}"


CRITERIA = [
    (1, "CAPP oracle agreement", c1_capp_oracles, 120),
    (2, "pseudodeterminism", c2_pseudodeterminism, 60),
    (3, "success on the diagonal ensemble", c3_success_on_ensemble, 120),
    (4, "diagonal difference", c4_diagonal_difference, 300),
    (5, "counting argument", c5_counting, 600),
    (6, "high-complexity construction", c6_algorithm2, 600),
    (7, "structural properties", c7_structural, 300),
    (8, "good-length combinatorics", c8_good_lengths, 60),
    (9, "optimal search", c9_optimal, 600),
    (10, "NW machinery", c10_nw, 300),
    (11, "truth-table prefix witness", c11_fact51, 120),
    (12, "primes", c12_primes, 180),
]


def evaluate(num, name, fn, limit):
    start = time.perf_counter()
    try:
        ok, detail = fn()
    except Exception as e:  # a crash is a FAIL, reported like any other
        ok, detail = False, f"{type(e).__name__}: {e}"
    took = time.perf_counter() - start
    if took > limit:
        ok, detail = False, f"{detail}; took {took:.1f}s > {limit}s"
    line = f"CRITERION {num:2d} {'PASS' if ok else 'FAIL'} [{took:6.1f}s] {name}: {detail}"
    return ok, line


@pytest.mark.parametrize("num,name,fn,limit", CRITERIA, ids=[f"c{c[0]:02d}" for c in CRITERIA])
def test_criterion(num, name, fn, limit, capsys):
    ok, line = evaluate(num, name, fn, limit)
    with capsys.disabled():
        print("\n" + line)
    assert ok, line


if __name__ == "__main__":
    results = [evaluate(*c) for c in CRITERIA]
    for _, line in results:
        print(line)
    sys.exit(0 if all(ok for ok, _ in results) else 1)
