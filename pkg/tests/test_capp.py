from fractions import Fraction
from itertools import product

import pytest
from hypothesis import given, strategies as st

from pseudodet.capp import (
    CappEstimate, CappGenConfig, CappInstance, FixedGenConfig, capp_exact, capp_n_size, capp_prg, capp_pseudodet,
    capp_sample, capp_success, success_rate,
)
from pseudodet.circuits import CircuitBuilder, circuit_from_truth_table, eval_circuit
from pseudodet.diag import diag_ensemble
from pseudodet.errors import ParameterError
from pseudodet.machines import SeededSampler
from pseudodet.nwprg import ConstantGenerator, IdentityGenerator, NWConfig, build_design, NWGenerator
from strategies import balanced_table, circuits, random_circuit


def xor3():
    b = CircuitBuilder(3)
    return b.build(b.xor_(b.xor_(b.input(0), b.input(1)), b.input(2)))


def and2():
    b = CircuitBuilder(2)
    return b.build(b.and_(b.input(0), b.input(1)))


def brute(c):
    hits = sum(eval_circuit(c, "".join(x)) for x in product("01", repeat=c.input_arity))
    return Fraction(hits, 2**c.input_arity)


def test_exact_small_cases():
    assert capp_exact(circuit_from_truth_table([1], 0)).mu == 1
    assert capp_exact(and2()).mu == Fraction(1, 4)
    assert capp_exact(xor3()).mu == Fraction(1, 2)


@given(circuits(max_arity=12, max_gates=30))
def test_exact_and_identity_agree_with_brute_force(c):
    mu = brute(c)
    assert capp_exact(c).mu == mu
    assert capp_prg(c, IdentityGenerator(c.input_arity)).mu == mu


def test_sample_constant_zero():
    c = circuit_from_truth_table([0], 0)
    assert capp_sample(c, 1000, SeededSampler("s", 1, 1, 0)).mu == 0


def test_sample_xor_concentrates():
    good = sum(
        abs(capp_sample(xor3(), 10_000, SeededSampler("xor", 3, 1, seed)).mu - Fraction(1, 2)) <= Fraction(1, 50)
        for seed in range(100)
    )
    assert good >= 99


def test_sample_is_seed_deterministic():
    a = capp_sample(xor3(), 5000, SeededSampler("d", 3, 1, 7))
    b = capp_sample(xor3(), 5000, SeededSampler("d", 3, 1, 7))
    assert a == b
    num, logden = a.dyadic
    assert Fraction(num, 2**logden) == a.mu


def test_constant_generator_gives_point_value():
    c = and2()
    assert capp_prg(c, ConstantGenerator("11")).mu == 1
    assert capp_prg(c, ConstantGenerator("10")).mu == 0


def test_nw_generator_fools_random_small_circuits():
    rng = SeededSampler("nw-fool", 10, 1, 5).rng
    g = NWGenerator(build_design(16, 4, 10, 2), balanced_table(rng, 4))
    circuits_ = [random_circuit(rng, 10, 15) for _ in range(50)]
    close = sum(abs(capp_prg(c, g).mu - capp_exact(c).mu) <= Fraction(1, 10) for c in circuits_)
    assert close >= 45, close


def test_biased_hard_function_leaks_through_single_bits():
    # The surrogate table has 6 ones out of 16, so every output bit is biased.
    table = NWConfig().table()
    assert sum(table) == 6
    g = NWConfig(m=8).generator()
    first_bit = circuit_from_truth_table([0, 1], 1)
    assert capp_prg(first_bit, g).mu == Fraction(3, 8)


def test_pseudodet_is_canonical():
    c = xor3()
    inst = CappInstance.fit(c)
    for cfg in (CappGenConfig(), CappGenConfig("nw", eps=0.9), FixedGenConfig(NWConfig(m=8))):
        runs = {capp_pseudodet(inst, cfg) for _ in range(10)}
        assert len(runs) == 1
    assert capp_pseudodet(inst).mu == capp_exact(inst).mu


def test_self_check_passes_on_honest_estimates():
    inst = CappInstance.fit(xor3())
    est = capp_pseudodet(inst, CappGenConfig(self_checks=200), SeededSampler("sc", 4, 1, 0))
    assert est.mu == Fraction(1, 2)


def test_success_predicate():
    inst = CappInstance.fit(xor3())
    assert capp_success(inst, capp_exact(inst))
    assert not capp_success(inst, CappEstimate(Fraction(7, 10), "SAMPLED", False))


def test_success_rate_over_machine_ensemble():
    n = 32
    ens = diag_ensemble(n, 2)
    insts = [CappInstance.padded(n, c, 2) for c in (ens.sample(ens.sampler(s))[1] for s in range(2 * n))]
    assert success_rate(insts, capp_pseudodet) == 1
    assert success_rate(insts, capp_pseudodet) >= 1 - Fraction(1, 3 * n)


def test_batch_success_rate_for_sampling():
    sampler = SeededSampler("batch", 8, 1, 1)
    rng = sampler.rng
    insts = [circuit_from_truth_table([int(v) for v in rng.integers(0, 2, 64)], 6) for _ in range(100)]
    rate = success_rate(insts, lambda c: capp_sample(c, 2000, sampler))
    assert rate == 1


def test_instance_size_limits():
    big = circuit_from_truth_table([0, 1] * 8, 4)
    with pytest.raises(ParameterError):
        CappInstance(2, big, 2)
    fit = CappInstance.fit(big)
    assert fit.n**2 >= big.description_length
    padded = CappInstance.padded(fit.n + 1, big)
    assert padded.circuit.description_length == ((fit.n + 1) ** 2) // 8 * 8


def test_linear_size_parameter():
    assert capp_n_size(16) == 16 * 16
    assert capp_n_size(1) == 1
