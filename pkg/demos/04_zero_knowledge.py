# Simulated views are accepted and look like real ones; skipping the
# permutation does not.
import numpy as np

from leezk.analysis import simulate_view, transcript_distribution_test
from leezk.problems import sample_instance
from leezk.protocol import Challenge, prover_commit, prover_respond, verifier_check

rng = np.random.default_rng(4)
inst, e = sample_instance(8, 4, 6, 7, rng)
samples = 2000

for ch in Challenge:
    sims = [simulate_view(inst, ch, rng) for _ in range(samples)]
    ok = sum(bool(verifier_check(inst, v.commit_message, ch, v.response)) for v in sims)
    real = []
    for _ in range(samples):
        state, _ = prover_commit(inst, e, rng)
        real.append(prover_respond(state, ch))
    rep = transcript_distribution_test(real, sims)
    print(f"{ch.name}: simulator accepted {ok}/{samples}; real vs simulated p = {rep['p_value']:.3f}")

identity = np.arange(1, inst.n * inst.ell + 1)
leaky = []
for _ in range(samples):
    state, _ = prover_commit(inst, e, rng, permutation=identity)
    leaky.append(prover_respond(state, Challenge.B))
sims = [simulate_view(inst, Challenge.B, rng) for _ in range(samples)]
rep = transcript_distribution_test(leaky, sims)
print(f"identity permutation vs simulator: p = {rep['p_value']:.2e} (worst feature {rep['worst_feature']})")
