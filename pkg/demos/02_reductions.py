# From a general instance to a balanced one, and from balanced to ternary form.
import numpy as np

from leezk.problems import SdInstance, Variant, check_witness, decide_bruteforce, sample_instance
from leezk.reductions import (
    accumulate,
    expand_witness,
    extract_witness,
    lift_witness,
    pad_to_weight,
    to_balanced,
    to_ternary,
)
from leezk.ring import lee_weight, random_matrix, syndrome

m, ell = 7, 3
rng = np.random.default_rng(2)
e = np.array([-2, 0, 1, 3, -1, -1])
H = random_matrix(6, 3, m, rng)

# a general instance only bounds the weight
general = SdInstance(H, syndrome(e, H, m), 8, m, Variant.GENERAL)
red = to_balanced(general)
print(f"balanced target: H_pm {red.target.H.shape}, w = {red.target.w}, nbar = {red.nbar}")

g = lift_witness(red, e)
print("lifted witness:", g.tolist(), " weight", lee_weight(g), " sum", g.sum())
print("target accepts it:", check_witness(red.target, g))
back, wt = extract_witness(red, g)
print("extracted:", back.tolist(), "weight", wt)

# balanced -> ternary: expand, pad to the exact weight, accumulate back
ep = expand_witness(e, m)
f = pad_to_weight(ep, 10, ell)
print("e'  =", ep.reshape(-1, ell).tolist())
print("e'' =", f.reshape(-1, ell).tolist())
print("block sums of e'':", accumulate(f, ell).tolist())

inst = SdInstance(H, syndrome(e, H, m), 10, m)
tern = to_ternary(inst)
print("e'' solves the ternary instance:", check_witness(tern, f))

# desk-scale decision: the two formulations agree
small, _ = sample_instance(3, 1, 2, 5, rng)
unsolvable = SdInstance(small.H, [1, -1], 2, 5)
for name, inst in (("planted", small), ("other s", unsolvable)):
    print(f"{name}: balanced oracle {decide_bruteforce(inst, 10**3)},"
          f" ternary oracle {decide_bruteforce(to_ternary(inst), 10**3)}")
