"""Witness cost against the bound for every prefix length and decider."""
from pseudodet.rktconstruct import constant_decider, fact51_witness, parity_decider

print("decider,n,ell,cost,bound")
for n in range(1, 5):
    for name, spec in (("zero", constant_decider(0)), ("one", constant_decider(1)), ("parity", parity_decider(n))):
        for ell in range(1, (1 << n) + 1):
            w = fact51_witness(spec, n, ell)
            print(f"{name},{n},{ell},{w.cost},{w.bound}")
