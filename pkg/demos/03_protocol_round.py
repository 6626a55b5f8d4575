# One round by hand, then a full session.
import numpy as np

from leezk.analysis import rewind_open_all
from leezk.problems import sample_instance
from leezk.protocol import (
    encode_response,
    prover_commit,
    prover_respond,
    run_session,
    verifier_challenge,
    verifier_check,
)

rng = np.random.default_rng(3)
inst, e = sample_instance(n=12, k=6, w=12, m=7, rng=rng)
print(f"instance n={inst.n} k={inst.k} m={inst.m} w={inst.w}; witness {e.tolist()}")

state, cm = prover_commit(inst, e, rng)
print("f (prover's ternary witness):", state.f.tolist())
print("commitments:", [d.hex()[:12] for d in cm.digests])

ch = verifier_challenge(rng)
resp = prover_respond(state, ch)
print(f"challenge {ch.name}: opens slots {resp.slots()}, {len(encode_response(resp, inst.m))} bytes")
print("verdict:", verifier_check(inst, cm, ch, resp))

# a state answers one challenge only
try:
    prover_respond(state, ch)
except RuntimeError as exc:
    print("second answer refused:", exc)

# every challenge would have been fine (test-only rewind on a fresh state)
state, cm = prover_commit(inst, e, rng)
for c, r in rewind_open_all(state).items():
    print(f"  {c.name}: {verifier_check(inst, cm, c, r)}")

report = run_session(inst, e, 24, rng)
print("24-round session:", report.summary()["accepted"], f"{report.total_bytes} bytes exchanged")
