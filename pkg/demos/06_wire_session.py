# Prover and verifier exchanging frames, a recorded transcript, and a tamper.
import io

import numpy as np

from leezk.problems import sample_instance
from leezk.wire import HEADER, MsgType, read_frame, record_local_session, replay_transcript

rng = np.random.default_rng(6)
inst, e = sample_instance(10, 5, 8, 7, rng)
data, report = record_local_session(inst, e, 8, np.random.default_rng(1), np.random.default_rng(2))
print(f"session accepted: {report.accepted}, transcript {len(data)} bytes")

stream = io.BytesIO(data)
kinds = []
while (frame := read_frame(stream)) is not None:
    kinds.append(frame.msg_type.name)
print("frames:", kinds[:6], "...")

print("replay:", replay_transcript(inst, data).accepted)

stream = io.BytesIO(data)
while True:
    start = stream.tell()
    if read_frame(stream).msg_type is MsgType.RESPONSE:
        break
bad = bytearray(data)
bad[start + HEADER.size + 60] ^= 0x01
rep = replay_transcript(inst, bytes(bad))
print("after flipping one response bit:", rep.accepted, rep.rounds[-1].verdict)
