"""The three-challenge commit/challenge/response protocol.

One round:

1. the prover turns its balanced witness ``e`` into the ternary ``f``
   (weight exactly ``w``), masks ``H = R + T`` with a uniform ``R``, expands
   and row-permutes ``R`` and ``T`` by a uniform ``pi``, and commits to
   ``R, T, a = f R~, b = f T~, pi, R~_pi, T~_pi, f_pi`` in that order;
2. the verifier picks one challenge among A, B, C;
3. the prover opens the matching slots and the verifier runs its checks.

Messages have byte encodings (commit message, one-byte challenge, response)
used verbatim by :mod:`leezk.wire`.
"""
from __future__ import annotations

import enum
import math
import struct
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import _bits
from .commitments import (
    DIGEST_SIZE,
    SALT_SIZE,
    Kind,
    Opening,
    Slot,
    commit,
    decode_object,
    encode_object,
    is_permutation,
    make_opening,
    verify_opening,
)
from .problems import SdInstance, Variant, check_witness
from .reductions import expand_matrix, ternary_witness
from .ring import center_mod, lee_weight, random_matrix, syndrome

FRAME_OVERHEAD = 6  # version, type, 4-byte length


class Challenge(enum.IntEnum):
    A = 0
    B = 1
    C = 2


OPENED_SLOTS = {
    Challenge.A: (Slot.R, Slot.T, Slot.PI, Slot.R_PI, Slot.T_PI),
    Challenge.B: (Slot.A, Slot.B, Slot.R_PI, Slot.F_PI),
    Challenge.C: (Slot.A, Slot.B, Slot.T_PI, Slot.F_PI),
}

CHECK_NAMES = ("opening", "range", "a1", "a2", "b1", "b2", "b3", "b4", "c1", "c2", "c3", "c4")


class ProtocolMisuse(RuntimeError):
    """A prover round state was asked to answer more than one challenge."""


@dataclass(frozen=True)
class CommitMessage:
    digests: tuple

    def __post_init__(self):
        if len(self.digests) != len(Slot):
            raise ValueError(f"commit message needs {len(Slot)} digests")
        if any(len(d) != DIGEST_SIZE for d in self.digests):
            raise ValueError("every digest must be 32 bytes")

    def __getitem__(self, slot: Slot) -> bytes:
        return self.digests[Slot(slot) - 1]

    def to_bytes(self) -> bytes:
        return b"".join(self.digests)

    @classmethod
    def from_bytes(cls, data: bytes) -> "CommitMessage":
        if len(data) != DIGEST_SIZE * len(Slot):
            raise ValueError(f"commit message must be {DIGEST_SIZE * len(Slot)} bytes, got {len(data)}")
        return cls(tuple(bytes(data[i:i + DIGEST_SIZE]) for i in range(0, len(data), DIGEST_SIZE)))


def encode_challenge(ch: Challenge) -> bytes:
    return bytes([Challenge(ch)])


def decode_challenge(data: bytes) -> Challenge:
    if len(data) != 1 or data[0] > 2:
        raise ValueError(f"invalid challenge encoding {bytes(data)!r}")
    return Challenge(data[0])


@dataclass(frozen=True)
class Response:
    challenge: Challenge
    openings: tuple

    def slots(self) -> tuple:
        return tuple(o.tag for o in self.openings)

    def to_bytes(self, m: int) -> bytes:
        return encode_response(self, m)


# Response wire layout:
#   u8 challenge, u8 count, then per opening:
#   u8 tag, 32-byte salt, u32 LE length, packed object.
# The packed object stores each element in the minimal fixed bit width for
# its kind; the receiver rebuilds the canonical payload before hashing.

def _pack_object(kind: Kind, obj, m: int) -> bytes:
    obj = np.asarray(obj, dtype=np.int64)
    if kind is Kind.MATRIX:
        rows, cols = obj.shape
        head = struct.pack("<II", rows, cols)
        lo = -(m // 2) if m % 2 else -(m // 2) + 1
        return head + _bits.pack(obj.reshape(-1) - lo, _bits.width_for(m))
    count = obj.shape[0]
    head = struct.pack("<I", count)
    if kind is Kind.VECTOR:
        lo = -(m // 2) if m % 2 else -(m // 2) + 1
        return head + _bits.pack(obj - lo, _bits.width_for(m))
    if kind is Kind.TERNARY:
        return head + _bits.pack(obj + 1, 2)
    return head + _bits.pack(obj - 1, _bits.width_for(count))


def _unpack_object(kind: Kind, data: bytes, m: int) -> np.ndarray:
    lo = -(m // 2) if m % 2 else -(m // 2) + 1
    if kind is Kind.MATRIX:
        if len(data) < 8:
            raise ValueError("truncated packed matrix")
        rows, cols = struct.unpack_from("<II", data)
        flat = _bits.unpack(data[8:], rows * cols, _bits.width_for(m))
        return (flat + lo).reshape(rows, cols)
    if len(data) < 4:
        raise ValueError("truncated packed object")
    (count,) = struct.unpack_from("<I", data)
    body = data[4:]
    if kind is Kind.VECTOR:
        return _bits.unpack(body, count, _bits.width_for(m)) + lo
    if kind is Kind.TERNARY:
        return _bits.unpack(body, count, 2) - 1
    return _bits.unpack(body, count, _bits.width_for(count)) + 1


def encode_response(resp: Response, m: int) -> bytes:
    parts = [bytes([Challenge(resp.challenge), len(resp.openings)])]
    for op in resp.openings:
        obj = decode_object(op.tag, op.payload)
        packed = _pack_object(Slot(op.tag).kind, obj, m)
        parts.append(bytes([op.tag]) + op.salt + struct.pack("<I", len(packed)) + packed)
    return b"".join(parts)


def decode_response(data: bytes, m: int) -> Response:
    """Parse a response body; raises ``ValueError`` on any malformation."""
    data = bytes(data)
    if len(data) < 2:
        raise ValueError("truncated response")
    ch = decode_challenge(data[:1])
    count = data[1]
    pos = 2
    openings = []
    for _ in range(count):
        if len(data) < pos + 1 + SALT_SIZE + 4:
            raise ValueError("truncated opening header")
        tag = data[pos]
        salt = data[pos + 1:pos + 1 + SALT_SIZE]
        (length,) = struct.unpack_from("<I", data, pos + 1 + SALT_SIZE)
        pos += 1 + SALT_SIZE + 4
        if len(data) < pos + length:
            raise ValueError("truncated opening body")
        try:
            kind = Slot(tag).kind
        except ValueError:
            raise ValueError(f"unknown tag {tag}") from None
        obj = _unpack_object(kind, data[pos:pos + length], m)
        pos += length
        _, payload = encode_object(Slot(tag), obj)
        openings.append(Opening(tag, salt, payload))
    if pos != len(data):
        raise ValueError("trailing bytes after response")
    return Response(ch, tuple(openings))


@dataclass(frozen=True)
class Verdict:
    accepted: bool
    check: str | None = None
    detail: str = ""

    def __bool__(self):
        return self.accepted

    @classmethod
    def accept(cls) -> "Verdict":
        return cls(True)

    @classmethod
    def reject(cls, check: str, detail: str = "") -> "Verdict":
        return cls(False, check, detail)

    def to_bytes(self) -> bytes:
        reason = "" if self.accepted else f"{self.check}:{self.detail}"
        return bytes([1 if self.accepted else 0]) + reason.encode()

    @classmethod
    def from_bytes(cls, data: bytes) -> "Verdict":
        if not data or data[0] > 1:
            raise ValueError("invalid verdict encoding")
        if data[0] == 1:
            return cls.accept()
        check, _, detail = bytes(data[1:]).decode("utf-8", "replace").partition(":")
        return cls.reject(check, detail)


@dataclass(eq=False)
class ProverRoundState:
    instance: SdInstance
    e: np.ndarray
    f: np.ndarray
    R: np.ndarray
    T: np.ndarray
    a: np.ndarray
    b: np.ndarray
    perm: np.ndarray
    R_pi: np.ndarray
    T_pi: np.ndarray
    f_pi: np.ndarray
    openings: dict
    consumed: bool = False


def permute_rows(M, perm) -> np.ndarray:
    """Row i of the result is row ``perm[i]`` (1-based images) of ``M``."""
    return np.asarray(M)[np.asarray(perm) - 1]


def random_permutation(size: int, rng: np.random.Generator) -> np.ndarray:
    return rng.permutation(size).astype(np.int64) + 1


def prover_commit(inst: SdInstance, e, rng: np.random.Generator, *, permutation=None):
    """First prover move; returns ``(state, commit_message)``.

    ``permutation`` overrides the uniform choice of ``pi`` and exists only for
    tests and negative controls.
    """
    if inst.variant is not Variant.BALANCED:
        raise ValueError("the protocol runs on balanced instances")
    e = np.asarray(e, dtype=np.int64)
    if not check_witness(inst, e):
        raise ValueError("e is not a witness of the instance")
    mod = inst.modulus
    ell = mod.ell
    f = ternary_witness(e, inst.w, mod)
    R = random_matrix(inst.n, inst.r, mod, rng)
    T = center_mod(inst.H - R, mod)
    R_t = expand_matrix(R, ell)
    T_t = expand_matrix(T, ell)
    a = syndrome(f, R_t, mod)
    b = syndrome(f, T_t, mod)
    if permutation is None:
        perm = random_permutation(inst.n * ell, rng)
    else:
        perm = np.asarray(permutation, dtype=np.int64)
    R_pi = permute_rows(R_t, perm)
    T_pi = permute_rows(T_t, perm)
    f_pi = f[perm - 1]
    objects = {
        Slot.R: R, Slot.T: T, Slot.A: a, Slot.B: b,
        Slot.PI: perm, Slot.R_PI: R_pi, Slot.T_PI: T_pi, Slot.F_PI: f_pi,
    }
    openings = {slot: make_opening(slot, objects[slot], rng) for slot in Slot}
    state = ProverRoundState(inst, e, f, R, T, a, b, perm, R_pi, T_pi, f_pi, openings)
    return state, commit_openings(openings)


def commit_openings(openings: dict) -> CommitMessage:
    return CommitMessage(tuple(commit(openings[slot]) for slot in Slot))


def open_slots(openings: dict, ch: Challenge) -> Response:
    ch = Challenge(ch)
    return Response(ch, tuple(openings[slot] for slot in OPENED_SLOTS[ch]))


def verifier_challenge(rng: np.random.Generator) -> Challenge:
    return Challenge(int(rng.integers(3)))


def prover_respond(state: ProverRoundState, ch: Challenge) -> Response:
    if state.consumed:
        raise ProtocolMisuse("round state already answered a challenge")
    state.consumed = True
    return open_slots(state.openings, ch)


def _range_check(inst: SdInstance, slot: Slot, obj: np.ndarray) -> str | None:
    mod = inst.modulus
    N = inst.n * mod.ell
    if slot in (Slot.R, Slot.T):
        shape = (inst.n, inst.r)
    elif slot in (Slot.R_PI, Slot.T_PI):
        shape = (N, inst.r)
    elif slot in (Slot.A, Slot.B):
        shape = (inst.r,)
    elif slot is Slot.PI:
        return None if is_permutation(obj, N) else "pi is not a permutation of 1..n*l"
    else:
        if obj.shape != (N,):
            return f"f_pi has shape {obj.shape}, expected ({N},)"
        if obj.size and (obj.min() < -1 or obj.max() > 1):
            return "f_pi is not ternary"
        return None
    if obj.shape != shape:
        return f"{slot.name} has shape {obj.shape}, expected {shape}"
    if not mod.is_canonical(obj):
        return f"{slot.name} has non-canonical entries"
    return None


def verifier_check(inst: SdInstance, cm: CommitMessage, ch: Challenge, resp: Response) -> Verdict:
    """Verify one response; every failure is a :class:`Verdict` rejection."""
    try:
        return _verify(inst, cm, ch, resp)
    except Exception as exc:  # adversarial input must never crash the verifier
        return Verdict.reject("opening", f"malformed message: {exc!r}")


def _verify(inst, cm, ch, resp) -> Verdict:
    ch = Challenge(ch)
    expected = OPENED_SLOTS[ch]
    if not isinstance(resp, Response) or resp.challenge != ch:
        return Verdict.reject("opening", "response does not answer this challenge")
    if resp.slots() != tuple(int(s) for s in expected):
        return Verdict.reject("opening", f"opened slots {resp.slots()} != {tuple(map(int, expected))}")
    for slot, op in zip(expected, resp.openings):
        if not verify_opening(cm[slot], op):
            return Verdict.reject("opening", f"{slot.name} does not open its commitment")

    objs = {}
    for slot, op in zip(expected, resp.openings):
        try:
            objs[slot] = decode_object(op.tag, op.payload)
        except ValueError as exc:
            return Verdict.reject("range", f"{slot.name} is not well formed: {exc}")
        problem = _range_check(inst, slot, objs[slot])
        if problem:
            return Verdict.reject("range", problem)

    mod = inst.modulus
    if ch is Challenge.A:
        R, T, perm = objs[Slot.R], objs[Slot.T], objs[Slot.PI]
        if not np.array_equal(center_mod(R + T, mod), inst.H):
            return Verdict.reject("a1", "R + T != H")
        ell = mod.ell
        if not (np.array_equal(permute_rows(expand_matrix(R, ell), perm), objs[Slot.R_PI])
                and np.array_equal(permute_rows(expand_matrix(T, ell), perm), objs[Slot.T_PI])):
            return Verdict.reject("a2", "permuted expanded matrices are not formed properly")
        return Verdict.accept()

    name = "b" if ch is Challenge.B else "c"
    a, b, f_pi = objs[Slot.A], objs[Slot.B], objs[Slot.F_PI]
    if not np.array_equal(center_mod(a + b, mod), inst.s):
        return Verdict.reject(f"{name}1", "a + b != s")
    if ch is Challenge.B:
        if not np.array_equal(syndrome(f_pi, objs[Slot.R_PI], mod), a):
            return Verdict.reject("b2", "f_pi R~_pi != a")
    else:
        if not np.array_equal(syndrome(f_pi, objs[Slot.T_PI], mod), b):
            return Verdict.reject("c2", "f_pi T~_pi != b")
    if lee_weight(f_pi) != inst.w:
        return Verdict.reject(f"{name}3", f"weight {lee_weight(f_pi)} != w = {inst.w}")
    if int(f_pi.sum()) != 0:
        return Verdict.reject(f"{name}4", "f_pi is not balanced")
    return Verdict.accept()


@dataclass
class RoundTranscript:
    commit_message: CommitMessage
    challenge: Challenge
    response: Response
    verdict: Verdict
    sizes: dict = field(default_factory=dict)


@dataclass
class SessionReport:
    accepted: bool
    rounds: list

    @property
    def verdicts(self) -> list:
        return [r.verdict for r in self.rounds]

    @property
    def total_bytes(self) -> int:
        return sum(sum(r.sizes.values()) for r in self.rounds)

    def summary(self) -> dict:
        return {
            "accepted": self.accepted,
            "rounds": len(self.rounds),
            "verdicts": [
                {"challenge": r.challenge.name, "accepted": r.verdict.accepted, "check": r.verdict.check}
                for r in self.rounds
            ],
            "total_bytes": self.total_bytes,
        }


def message_sizes(cm: CommitMessage, resp: Response, m: int) -> dict:
    """Framed sizes of the three messages of a round."""
    return {
        "commit": FRAME_OVERHEAD + len(cm.to_bytes()),
        "challenge": FRAME_OVERHEAD + 1,
        "response": FRAME_OVERHEAD + len(encode_response(resp, m)),
    }


RoundProver = Callable[[], tuple]  # () -> (CommitMessage, responder(ch) -> Response)


def run_rounds(inst: SdInstance, new_round: RoundProver, t: int,
               verifier_rng: np.random.Generator, *, stop_on_reject: bool = False,
               measure: bool = True) -> SessionReport:
    """Drive ``t`` sequential rounds against any round prover."""
    if t < 1:
        raise ValueError("need at least one round")
    rounds = []
    for _ in range(t):
        cm, responder = new_round()
        ch = verifier_challenge(verifier_rng)
        resp = responder(ch)
        verdict = verifier_check(inst, cm, ch, resp)
        sizes = message_sizes(cm, resp, inst.m) if measure else {}
        rounds.append(RoundTranscript(cm, ch, resp, verdict, sizes))
        if stop_on_reject and not verdict:
            break
    accepted = len(rounds) == t and all(r.verdict.accepted for r in rounds)
    return SessionReport(accepted, rounds)


def honest_round(inst: SdInstance, e, rng: np.random.Generator) -> RoundProver:
    def new_round():
        state, cm = prover_commit(inst, e, rng)
        return cm, lambda ch: prover_respond(state, ch)
    return new_round


def run_session(inst: SdInstance, e, t: int, rng: np.random.Generator,
                verifier_rng: np.random.Generator | None = None, **kw) -> SessionReport:
    """``t`` honest rounds with fresh randomness each.

    With a single generator, prover and verifier draws interleave on it; pass
    ``verifier_rng`` to give the verifier its own stream (what the networked
    runner does).
    """
    return run_rounds(inst, honest_round(inst, e, rng), t,
                      rng if verifier_rng is None else verifier_rng, **kw)


def comm_cost_bits(n: int, k: int, m: int) -> float:
    """Size in bits of the largest response (R, T, pi, R~_pi, T~_pi)."""
    if not (1 <= n and 0 <= k <= n and m >= 4):
        raise ValueError("need n >= 1, 0 <= k <= n, m >= 4")
    ell = m // 2
    N = n * ell
    lm = math.log2(m)
    return 2 * n * (n - k) * lm + N * math.log2(N) + 2 * N * (n - k) * lm
