# Provers without a witness get through two challenges out of three, and
# answering all three on one commitment is exactly what yields a witness.
import numpy as np

from leezk.analysis import (
    STRATEGIES,
    cheating_prover_round,
    cheating_sessions,
    extract,
    rewind_open_all,
    soundness_trial,
)
from leezk.problems import check_witness, sample_instance
from leezk.protocol import Challenge, prover_commit, verifier_check

rng = np.random.default_rng(5)
inst, e = sample_instance(10, 5, 10, 7, rng)

for strat in STRATEGIES:
    cm, responder = cheating_prover_round(inst, strat, rng)
    tags = {ch.name: verifier_check(inst, cm, ch, responder(ch)) for ch in Challenge}
    print(strat.name, {k: (v.accepted, v.check) for k, v in tags.items()})

for strat in STRATEGIES:
    rep = soundness_trial(inst, strat, 3000, rng)
    print(f"{strat.name}: per-round acceptance {rep['rate']:.3f} (z = {rep['z']:+.2f})")

sess = cheating_sessions(inst, STRATEGIES[2], 2000, 24, rng)
print(f"t=24 sessions: {sess['accepted']}/{sess['sessions']} accepted, expected {sess['expected']:.3f}")

# extractor: three accepted answers to one commitment give a witness
state, cm = prover_commit(inst, e, rng)
found = extract(inst, cm, rewind_open_all(state))
print("extracted", found.tolist(), "valid:", check_witness(inst, found))
