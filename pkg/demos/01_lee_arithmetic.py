# Lee weight, balance and syndromes over Z_7 with centered representatives.
import numpy as np

from leezk.ring import center_mod, is_balanced, lee_distance, lee_weight, random_matrix, syndrome

m = 7
print("canonical forms of 5, 0, -4 mod 7:", [center_mod(x, m) for x in (5, 0, -4)])

e = np.array([-2, 0, 1, 3, -1, -1])
print("e =", e.tolist())
print("Lee weight:", lee_weight(e), " integer sum:", e.sum(), " balanced:", is_balanced(e, m))

# distance wraps around: 3 and -3 are neighbours in Z_7
print("d(3, -3) =", lee_distance([3], [-3], m), " d(1, -1) =", lee_distance([1], [-1], m))

# even moduli keep +l as the single representative of l == -l
print("canonical -4 mod 8:", center_mod(-4, 8), " (4, 4) balanced mod 8:", is_balanced([4, 4], 8))

rng = np.random.default_rng(1)
H = random_matrix(6, 3, m, rng)
print("H =\n", H)
print("syndrome e H =", syndrome(e, H, m).tolist())
