# Size of the largest response against the closed-form bit count.
import numpy as np

from leezk.analysis import rewind_open_all
from leezk.problems import sample_instance
from leezk.protocol import comm_cost_bits, message_sizes, prover_commit

for n, k, m, w in [(425, 229, 4, 200), (20, 10, 7, 20), (100, 50, 7, 60)]:
    bits = comm_cost_bits(n, k, m)
    inst, e = sample_instance(n, k, w, m, np.random.default_rng(7))
    state, cm = prover_commit(inst, e, np.random.default_rng(8))
    sizes = {ch.name: 8 * message_sizes(cm, r, m)["response"] for ch, r in rewind_open_all(state).items()}
    print(f"n={n} k={k} m={m}: formula {bits:,.0f} bits, measured {sizes}, "
          f"ratio {max(sizes.values()) / bits:.3f}")
