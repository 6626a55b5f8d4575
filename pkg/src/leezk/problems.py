"""Syndrome decoding instances in the Lee metric.

Three variants share one container:

* ``GENERAL``: find ``e`` with ``e @ H == s`` and ``wt(e) <= w``.
* ``BALANCED``: additionally ``sum(e) == 0`` and ``w`` even, ``w <= n(l-1)``.
* ``TERNARY``: ``H`` is the row-expanded matrix (each row repeated ``l``
  times); find ``f`` in ``{-1,0,1}^(n l)`` with ``f @ H == s``, weight exactly
  ``w`` and ``sum(f) == 0``.
"""
from __future__ import annotations

import enum
import json
from dataclasses import dataclass

import numpy as np

from .ring import (
    Modulus,
    as_modulus,
    center_mod,
    is_balanced,
    lee_weight,
    matrix,
    random_matrix,
    syndrome,
    vector,
)


class Variant(str, enum.Enum):
    GENERAL = "general"
    BALANCED = "balanced"
    TERNARY = "ternary"


class BudgetExceeded(Exception):
    """The brute-force search space is larger than the allowed budget."""


@dataclass(frozen=True, eq=False)
class SdInstance:
    H: np.ndarray
    s: np.ndarray
    w: int
    modulus: Modulus
    variant: Variant = Variant.BALANCED

    def __post_init__(self):
        mod = as_modulus(self.modulus)
        object.__setattr__(self, "modulus", mod)
        object.__setattr__(self, "variant", Variant(self.variant))
        H = matrix(self.H, mod)
        s = vector(self.s, mod)
        H.setflags(write=False)
        s.setflags(write=False)
        object.__setattr__(self, "H", H)
        object.__setattr__(self, "s", s)
        w = int(self.w)
        object.__setattr__(self, "w", w)
        if w < 0:
            raise ValueError("w must be nonnegative")
        if H.shape[1] != s.shape[0]:
            raise ValueError(f"H has {H.shape[1]} columns but s has length {s.shape[0]}")
        if self.variant is Variant.TERNARY and H.shape[0] % mod.ell:
            raise ValueError("ternary instance needs an expanded matrix with n*l rows")
        if self.variant is not Variant.GENERAL:
            if w % 2:
                raise ValueError(f"{self.variant.value} instance needs even w, got {w}")
            if w > self.n * (mod.ell - 1):
                raise ValueError(f"w={w} exceeds n(l-1)={self.n * (mod.ell - 1)}")

    @property
    def m(self) -> int:
        return self.modulus.m

    @property
    def ell(self) -> int:
        return self.modulus.ell

    @property
    def n(self) -> int:
        """Code length of the underlying (unexpanded) problem."""
        rows = self.H.shape[0]
        return rows // self.ell if self.variant is Variant.TERNARY else rows

    @property
    def r(self) -> int:
        """Syndrome length ``n - k``."""
        return self.H.shape[1]

    @property
    def k(self) -> int:
        return self.n - self.r

    @property
    def witness_length(self) -> int:
        return self.H.shape[0]

    def search_space(self) -> int:
        base = 3 if self.variant is Variant.TERNARY else self.m
        return base ** self.witness_length


def check_witness(inst: SdInstance, e) -> bool:
    e = np.asarray(e)
    if e.ndim != 1 or e.shape[0] != inst.witness_length:
        raise ValueError(
            f"witness length {e.shape} does not match {inst.variant.value} instance "
            f"(expected {inst.witness_length})"
        )
    if e.dtype.kind not in "iu":
        return False
    e = e.astype(np.int64)
    mod = inst.modulus
    if inst.variant is Variant.TERNARY:
        if e.size and (e.min() < -1 or e.max() > 1):
            return False
        if lee_weight(e) != inst.w or int(e.sum()) != 0:
            return False
    else:
        if not mod.is_canonical(e):
            return False
        if lee_weight(e) > inst.w:
            return False
        if inst.variant is Variant.BALANCED and not is_balanced(e, mod):
            return False
    return bool(np.array_equal(syndrome(e, inst.H, mod), inst.s))


def _lex_candidates(values: np.ndarray, length: int, start: int, stop: int) -> np.ndarray:
    """Rows ``start..stop-1`` of the lexicographic enumeration of values^length."""
    base = len(values)
    idx = np.arange(start, stop, dtype=np.int64)
    powers = base ** np.arange(length - 1, -1, -1, dtype=np.int64)
    digits = (idx[:, None] // powers[None, :]) % base
    return values[digits]


def decide_bruteforce(inst: SdInstance, budget: int, chunk: int = 1 << 16):
    """Exhaustive decision oracle; returns the first witness or ``None``.

    Candidates run over centered representatives in increasing order
    (``{-1,0,1}`` for the ternary variant), vectors in lexicographic order
    with the first coordinate most significant.
    """
    space = inst.search_space()
    if space > budget:
        raise BudgetExceeded(f"search space {space} exceeds budget {budget}")
    mod = inst.modulus
    length = inst.witness_length
    if inst.variant is Variant.TERNARY:
        values = np.array([-1, 0, 1], dtype=np.int64)
    else:
        values = mod.values()
    H = inst.H
    s = inst.s
    for start in range(0, space, chunk):
        cands = _lex_candidates(values, length, start, min(space, start + chunk))
        ok = np.all(center_mod(cands @ H, mod) == s, axis=1)
        weights = np.abs(cands).sum(axis=1)
        if inst.variant is Variant.TERNARY:
            ok &= (weights == inst.w) & (cands.sum(axis=1) == 0)
        else:
            ok &= weights <= inst.w
        hits = np.flatnonzero(ok)
        if inst.variant is Variant.BALANCED:
            hits = [i for i in hits if is_balanced(cands[i], mod)]
        if len(hits):
            return cands[hits[0]].copy()
    return None


def random_ternary(length: int, w: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform ternary vector with exactly w/2 ones and w/2 minus-ones."""
    if w % 2 or not 0 <= w <= length:
        raise ValueError(f"cannot place weight {w} in length {length}")
    f = np.zeros(length, dtype=np.int64)
    pos = rng.permutation(length)[:w]
    f[pos[: w // 2]] = 1
    f[pos[w // 2:]] = -1
    return f


def sample_instance(n: int, k: int, w: int, m, rng: np.random.Generator):
    """Planted balanced instance and its witness.

    The witness is the block-wise accumulation of a uniform ternary vector
    of weight ``w`` over ``n*l`` positions, so it is balanced with weight at
    most ``w`` without rejection sampling.
    """
    mod = as_modulus(m)
    if not 1 <= k < n:
        raise ValueError(f"need 1 <= k < n, got n={n}, k={k}")
    if w < 0 or w % 2 or w > n * (mod.ell - 1):
        raise ValueError(f"need even 0 <= w <= n(l-1) = {n * (mod.ell - 1)}, got {w}")
    H = random_matrix(n, n - k, mod, rng)
    f = random_ternary(n * mod.ell, w, rng)
    e = mod.center(f.reshape(n, mod.ell).sum(axis=1))
    inst = SdInstance(H, syndrome(e, H, mod), w, mod, Variant.BALANCED)
    return inst, e


# JSON file format: variant, m, n, k, w, H (row-major nested lists), s, optional e.

def instance_to_dict(inst: SdInstance, e=None) -> dict:
    d = {
        "variant": inst.variant.value,
        "m": inst.m,
        "n": inst.n,
        "k": inst.k,
        "w": inst.w,
        "H": inst.H.tolist(),
        "s": inst.s.tolist(),
    }
    if e is not None:
        d["e"] = np.asarray(e, dtype=np.int64).tolist()
    return d


def instance_from_dict(d: dict):
    """Returns ``(instance, e_or_None)``; raises ``ValueError`` on bad input."""
    try:
        variant = Variant(d["variant"])
        mod = Modulus(int(d["m"]))
        H = np.asarray(d["H"], dtype=np.int64)
        s = np.asarray(d["s"], dtype=np.int64)
        w = int(d["w"])
        n, k = int(d["n"]), int(d["k"])
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed instance: {exc!r}") from exc
    if H.ndim != 2:
        raise ValueError("H must be a 2-dimensional array")
    if not mod.is_canonical(H) or not mod.is_canonical(s):
        raise ValueError("H and s must hold centered representatives")
    inst = SdInstance(H, s, w, mod, variant)
    if (inst.n, inst.k) != (n, k):
        raise ValueError(f"declared n={n}, k={k} disagree with H shape {H.shape}")
    e = d.get("e")
    if e is not None:
        e = np.asarray(e, dtype=np.int64)
        if e.ndim != 1 or e.shape[0] != inst.witness_length:
            raise ValueError("e has the wrong length")
    return inst, e


def dump_instance(inst: SdInstance, path, e=None):
    with open(path, "w") as fh:
        json.dump(instance_to_dict(inst, e), fh)
        fh.write("\n")


def load_instance(path):
    with open(path) as fh:
        return instance_from_dict(json.load(fh))
