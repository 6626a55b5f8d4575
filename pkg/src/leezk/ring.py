"""Exact arithmetic over Z_m with centered representatives.

Vectors and matrices are plain ``numpy`` int64 arrays whose entries are kept
in the canonical centered range of a :class:`Modulus`:

* odd ``m = 2l + 1``: ``{-l, ..., l}``
* even ``m = 2l``: ``{-l + 1, ..., l}`` (the shared class ``-l == l`` is always
  written ``+l``)

Every operation returns canonical values, so representatives never drift.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

MAX_MODULUS = 65535  # centered representatives must fit a signed 16-bit int


@dataclass(frozen=True)
class Modulus:
    m: int

    def __post_init__(self):
        if not isinstance(self.m, (int, np.integer)) or isinstance(self.m, bool):
            raise TypeError(f"modulus must be an integer, got {type(self.m).__name__}")
        if not 4 <= self.m <= MAX_MODULUS:
            raise ValueError(f"modulus must satisfy 4 <= m <= {MAX_MODULUS}, got {self.m}")
        object.__setattr__(self, "m", int(self.m))

    @property
    def ell(self) -> int:
        return self.m // 2

    @property
    def is_odd(self) -> bool:
        return self.m % 2 == 1

    @property
    def lo(self) -> int:
        """Smallest canonical representative."""
        return -self.ell if self.is_odd else -self.ell + 1

    @property
    def hi(self) -> int:
        return self.ell

    def values(self) -> np.ndarray:
        """All canonical representatives in increasing order."""
        return np.arange(self.lo, self.hi + 1, dtype=np.int64)

    def center(self, x):
        """Reduce an integer or integer array to the canonical range."""
        if isinstance(x, (int, np.integer)):
            return int((int(x) - self.lo) % self.m + self.lo)
        x = np.asarray(x, dtype=np.int64)
        return (x - self.lo) % self.m + self.lo

    def is_canonical(self, x) -> bool:
        x = np.asarray(x)
        if x.size == 0:
            return True
        if x.dtype.kind not in "iu":
            return False
        return bool(x.min() >= self.lo and x.max() <= self.hi)

    def inverse(self, c: int) -> int:
        return pow(int(c), -1, self.m)

    def __repr__(self):
        return f"Modulus(m={self.m})"


def as_modulus(m) -> Modulus:
    return m if isinstance(m, Modulus) else Modulus(int(m))


def center_mod(x, m):
    return as_modulus(m).center(x)


def vector(entries, m) -> np.ndarray:
    """Build a canonical vector from arbitrary integers."""
    return as_modulus(m).center(np.asarray(entries, dtype=np.int64).reshape(-1))


def matrix(rows, m) -> np.ndarray:
    arr = np.asarray(rows, dtype=np.int64)
    if arr.ndim != 2:
        raise ValueError(f"matrix must be 2-dimensional, got shape {arr.shape}")
    return as_modulus(m).center(arr)


def lee_weight(v) -> int:
    """Sum of absolute values of the centered entries."""
    return int(np.abs(np.asarray(v, dtype=np.int64)).sum())


def lee_distance(x, y, m) -> int:
    x = np.asarray(x, dtype=np.int64)
    y = np.asarray(y, dtype=np.int64)
    if x.shape != y.shape:
        raise ValueError(f"length mismatch: {x.shape} vs {y.shape}")
    return lee_weight(center_mod(x - y, m))


def vector_sum(v) -> int:
    """Integer (not modular) sum of the entries."""
    return int(np.asarray(v, dtype=np.int64).sum())


def is_balanced(v, m) -> bool:
    """True when positive and negative entries carry equal Lee weight.

    For odd m this is ``vector_sum(v) == 0``. For even m an entry equal to
    ``l`` stands for the class ``l == -l``, whose sign may be chosen freely;
    the vector is balanced when some choice of those signs sums to zero.
    """
    mod = as_modulus(m)
    v = np.asarray(v, dtype=np.int64)
    if mod.is_odd:
        return vector_sum(v) == 0
    ell = mod.ell
    free = int(np.count_nonzero(v == ell))
    rest = int(v[v != ell].sum())
    # rest + ell * (free - 2j) == 0 for some 0 <= j <= free
    num = rest + ell * free
    if num % (2 * ell):
        return False
    return 0 <= num // (2 * ell) <= free


def balanced_representatives(v, m) -> np.ndarray:
    """Integer representatives of ``v`` whose sum is zero.

    Identity for odd m. For even m, a suitable number of ``+l`` entries
    (leftmost first) are rewritten as ``-l``. Raises if ``v`` is not balanced.
    """
    mod = as_modulus(m)
    v = np.array(v, dtype=np.int64)
    if not is_balanced(v, mod):
        raise ValueError("vector is not balanced")
    if mod.is_odd:
        return v
    ell = mod.ell
    free_idx = np.flatnonzero(v == ell)
    rest = int(v[v != ell].sum())
    flips = (rest + ell * len(free_idx)) // (2 * ell)
    v[free_idx[:flips]] = -ell
    return v


def syndrome(v, H, m) -> np.ndarray:
    """``v @ H`` reduced to the canonical range."""
    v = np.asarray(v, dtype=np.int64)
    H = np.asarray(H, dtype=np.int64)
    if H.ndim != 2 or v.ndim != 1 or v.shape[0] != H.shape[0]:
        raise ValueError(f"dimension mismatch: vector {v.shape} times matrix {H.shape}")
    return center_mod(v @ H, m)


def random_matrix(rows: int, cols: int, m, rng: np.random.Generator) -> np.ndarray:
    mod = as_modulus(m)
    return rng.integers(mod.lo, mod.hi + 1, size=(rows, cols), dtype=np.int64)


def random_vector(n: int, m, rng: np.random.Generator) -> np.ndarray:
    mod = as_modulus(m)
    return rng.integers(mod.lo, mod.hi + 1, size=n, dtype=np.int64)


# Canonical byte encoding: int16 LE elements, uint32 LE lengths.

_U32 = struct.Struct("<I")
_U32x2 = struct.Struct("<II")


def encode_elements(x) -> bytes:
    x = np.asarray(x, dtype=np.int64)
    if x.size and (x.min() < -32768 or x.max() > 32767):
        raise ValueError("element does not fit a signed 16-bit representative")
    return x.astype("<i2").tobytes()


def encode_vector(v) -> bytes:
    v = np.asarray(v).reshape(-1)
    return _U32.pack(v.shape[0]) + encode_elements(v)


def encode_matrix(M) -> bytes:
    M = np.asarray(M)
    if M.ndim != 2:
        raise ValueError("matrix must be 2-dimensional")
    rows, cols = M.shape
    return _U32x2.pack(rows, cols) + encode_elements(M.reshape(-1))


def decode_vector(data: bytes) -> np.ndarray:
    if len(data) < 4:
        raise ValueError("truncated vector header")
    (count,) = _U32.unpack_from(data)
    if len(data) != 4 + 2 * count:
        raise ValueError(f"vector payload length {len(data)} does not match count {count}")
    return np.frombuffer(data, dtype="<i2", offset=4).astype(np.int64)


def decode_matrix(data: bytes) -> np.ndarray:
    if len(data) < 8:
        raise ValueError("truncated matrix header")
    rows, cols = _U32x2.unpack_from(data)
    if len(data) != 8 + 2 * rows * cols:
        raise ValueError(f"matrix payload length {len(data)} does not match {rows}x{cols}")
    return np.frombuffer(data, dtype="<i2", offset=8).astype(np.int64).reshape(rows, cols)
