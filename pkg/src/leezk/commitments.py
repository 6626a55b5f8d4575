"""Salted SHA-256 commitments over canonically encoded protocol objects.

A digest is ``SHA256(version || tag || salt || payload)`` where ``tag`` names
the protocol slot (and therefore the object kind) and ``payload`` is the
canonical encoding from :mod:`leezk.ring`. The construction is computationally
binding and hiding; nothing stronger is claimed.
"""
from __future__ import annotations

import enum
import hashlib
import secrets
import struct
from dataclasses import dataclass

import numpy as np

from . import ring

COMMIT_VERSION = 1
DIGEST_SIZE = 32
SALT_SIZE = 32


class Kind(enum.Enum):
    MATRIX = "matrix"
    VECTOR = "vector"
    PERMUTATION = "permutation"
    TERNARY = "ternary"


class Slot(enum.IntEnum):
    """Commitment slots, in commit-message order; the value is the domain tag."""

    R = 1
    T = 2
    A = 3
    B = 4
    PI = 5
    R_PI = 6
    T_PI = 7
    F_PI = 8

    @property
    def kind(self) -> Kind:
        return _SLOT_KIND[self]


_SLOT_KIND = {
    Slot.R: Kind.MATRIX,
    Slot.T: Kind.MATRIX,
    Slot.A: Kind.VECTOR,
    Slot.B: Kind.VECTOR,
    Slot.PI: Kind.PERMUTATION,
    Slot.R_PI: Kind.MATRIX,
    Slot.T_PI: Kind.MATRIX,
    Slot.F_PI: Kind.TERNARY,
}


@dataclass(frozen=True)
class Opening:
    tag: int
    salt: bytes
    payload: bytes

    def __post_init__(self):
        if len(self.salt) != SALT_SIZE:
            raise ValueError(f"salt must be {SALT_SIZE} bytes")
        if not 0 <= self.tag <= 255:
            raise ValueError("tag must fit one byte")


# Permutations are stored as 1-based images, as in pi(1), ..., pi(N).

def encode_permutation(images) -> bytes:
    images = np.asarray(images).reshape(-1)
    return struct.pack("<I", images.shape[0]) + images.astype("<u4").tobytes()


def decode_permutation(data: bytes) -> np.ndarray:
    if len(data) < 4:
        raise ValueError("truncated permutation header")
    (count,) = struct.unpack_from("<I", data)
    if len(data) != 4 + 4 * count:
        raise ValueError(f"permutation payload length {len(data)} does not match count {count}")
    return np.frombuffer(data, dtype="<u4", offset=4).astype(np.int64)


def is_permutation(images, size: int) -> bool:
    images = np.asarray(images)
    if images.shape != (size,):
        return False
    return bool(np.array_equal(np.sort(images), np.arange(1, size + 1)))


_ENCODERS = {
    Kind.MATRIX: ring.encode_matrix,
    Kind.VECTOR: ring.encode_vector,
    Kind.TERNARY: ring.encode_vector,
    Kind.PERMUTATION: encode_permutation,
}
_DECODERS = {
    Kind.MATRIX: ring.decode_matrix,
    Kind.VECTOR: ring.decode_vector,
    Kind.TERNARY: ring.decode_vector,
    Kind.PERMUTATION: decode_permutation,
}


def encode_object(slot: Slot, obj) -> tuple[int, bytes]:
    slot = Slot(slot)
    return int(slot), _ENCODERS[slot.kind](obj)


def decode_object(tag: int, payload: bytes) -> np.ndarray:
    """Inverse of :func:`encode_object`. Structural checks only, no range checks."""
    try:
        slot = Slot(tag)
    except ValueError:
        raise ValueError(f"unknown tag {tag}") from None
    return _DECODERS[slot.kind](payload)


def fresh_salt(rng: np.random.Generator | None = None) -> bytes:
    """32 salt bytes; from ``rng`` if given (reproducible), else the OS CSPRNG."""
    if rng is None:
        return secrets.token_bytes(SALT_SIZE)
    return rng.bytes(SALT_SIZE)


def make_opening(slot: Slot, obj, rng: np.random.Generator | None = None) -> Opening:
    tag, payload = encode_object(slot, obj)
    return Opening(tag, fresh_salt(rng), payload)


def commit(opening: Opening) -> bytes:
    h = hashlib.sha256()
    h.update(bytes([COMMIT_VERSION, opening.tag]))
    h.update(opening.salt)
    h.update(opening.payload)
    return h.digest()


def verify_opening(digest: bytes, opening: Opening) -> bool:
    return len(digest) == DIGEST_SIZE and secrets.compare_digest(commit(opening), digest)
