"""Constructive reductions between the syndrome decoding variants.

``to_balanced`` / ``lift_witness`` / ``extract_witness`` turn a general
instance into a balanced one of length ``2 * nbar`` and move witnesses across.
``expand_matrix`` / ``expand_witness`` / ``pad_to_weight`` / ``accumulate``
move between a balanced witness ``e`` in Z_m^n and a ternary ``f`` of length
``n * l`` with weight exactly ``w``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .problems import SdInstance, Variant, check_witness
from .ring import (
    as_modulus,
    balanced_representatives,
    center_mod,
    is_balanced,
    lee_weight,
    syndrome,
)


@dataclass(frozen=True, eq=False)
class BalancedReduction:
    source: SdInstance
    target: SdInstance
    c: int

    @property
    def pad(self) -> int:
        """Length of the forced-zero tail appended to the source witness."""
        return self.nbar - self.source.n

    @property
    def nbar(self) -> int:
        return self.target.witness_length // 2


def to_balanced(inst: SdInstance, c: int | None = None) -> BalancedReduction:
    """Reduce a general instance to a balanced one.

    ``c`` must be a unit mod m; it defaults to 2 for odd m and is required for
    even m. The target is ``(H_pm, c * sbar, 2w)`` with ``H_pm`` stacking
    ``Hbar`` over ``-(c-1) * Hbar``. Since no vector of Z_m^n weighs more than
    ``n*l``, a source bound above that is clamped to ``n*l`` first.
    """
    mod = inst.modulus
    if c is None:
        if not mod.is_odd:
            raise ValueError("even modulus: pass an explicit c with gcd(m, c) = 1")
        c = 2
    c = int(c)
    if math.gcd(mod.m, c) != 1:
        raise ValueError(f"gcd(m={mod.m}, c={c}) != 1")
    n, r = inst.H.shape
    ell = mod.ell
    pad = -(-n // (ell - 1))
    nbar = n + pad
    Hbar = np.zeros((nbar, r + pad), dtype=np.int64)
    Hbar[:n, :r] = inst.H
    Hbar[n:, r:] = np.eye(pad, dtype=np.int64)
    sbar = np.concatenate([inst.s, np.zeros(pad, dtype=np.int64)])
    H_pm = center_mod(np.vstack([Hbar, -(c - 1) * Hbar]), mod)
    w = min(inst.w, n * ell)
    target = SdInstance(H_pm, center_mod(c * sbar, mod), 2 * w, mod, Variant.BALANCED)
    return BalancedReduction(inst, target, c)


def lift_witness(red: BalancedReduction, e) -> np.ndarray:
    """``(ebar | -ebar)`` with ``ebar = (e | 0)``."""
    if not check_witness(red.source, e):
        raise ValueError("e is not a witness of the source instance")
    mod = red.source.modulus
    ebar = np.concatenate([np.asarray(e, dtype=np.int64), np.zeros(red.pad, dtype=np.int64)])
    return center_mod(np.concatenate([ebar, -ebar]), mod)


def extract_witness(red: BalancedReduction, g):
    """Recover a source solution from any ``g`` with ``g @ H_pm == c * sbar``.

    Returns ``(e, lee_weight(e))``. Only the syndrome equation is guaranteed;
    the weight is reported, not asserted.
    """
    mod = red.source.modulus
    g = np.asarray(g, dtype=np.int64)
    if g.shape != (2 * red.nbar,):
        raise ValueError(f"g must have length {2 * red.nbar}")
    if not np.array_equal(syndrome(g, red.target.H, mod), red.target.s):
        raise ValueError("g does not satisfy the target syndrome equation")
    gl, gr = g[: red.nbar], g[red.nbar:]
    ebar = center_mod(mod.inverse(red.c) * (gl - (red.c - 1) * gr), mod)
    if np.any(ebar[red.source.n:]):
        raise ValueError("forced-zero tail of the extracted vector is nonzero")
    e = ebar[: red.source.n]
    return e, lee_weight(e)


def expand_matrix(H, ell: int) -> np.ndarray:
    """Repeat every row of ``H`` ``ell`` times, keeping row order."""
    return np.repeat(np.asarray(H, dtype=np.int64), ell, axis=0)


def expand_witness(e, m) -> np.ndarray:
    """Ternary block form: block i is |e_i| copies of sign(e_i) then zeros."""
    mod = as_modulus(m)
    ell = mod.ell
    e = np.asarray(e, dtype=np.int64)
    if not mod.is_canonical(e):
        raise ValueError("e must hold centered representatives")
    if not mod.is_odd and is_balanced(e, mod):
        # even m: pick signs for the +-l entries so the blocks stay balanced
        e = balanced_representatives(e, mod)
    cols = np.arange(ell)
    blocks = np.where(cols[None, :] < np.abs(e)[:, None], np.sign(e)[:, None], 0)
    return blocks.reshape(-1).astype(np.int64)


def pad_to_weight(ep, w: int, ell: int) -> np.ndarray:
    """Raise the weight of a balanced ternary vector to exactly ``w``.

    Scanning blocks left to right, the leftmost two zeros of the first block
    holding at least two zeros become ``(+1, -1)``; repeat until done.
    """
    f = np.array(ep, dtype=np.int64)
    if f.ndim != 1 or f.shape[0] % ell:
        raise ValueError("length must be a multiple of l")
    if f.size and (f.min() < -1 or f.max() > 1):
        raise ValueError("vector must be ternary")
    if int(f.sum()) != 0:
        raise ValueError("vector must be balanced")
    weight = lee_weight(f)
    n = f.shape[0] // ell
    if w % 2 or w < weight or w > n * (ell - 1):
        raise ValueError(f"need even w with {weight} <= w <= n(l-1) = {n * (ell - 1)}, got {w}")
    blocks = f.reshape(n, ell)
    i = 0
    while weight < w:
        while np.count_nonzero(blocks[i] == 0) < 2:
            i += 1
        zeros = np.flatnonzero(blocks[i] == 0)
        blocks[i, zeros[0]] = 1
        blocks[i, zeros[1]] = -1
        weight += 2
    return blocks.reshape(-1)


def accumulate(f, ell: int) -> np.ndarray:
    """Block-wise sums of ``f`` (blocks of length ``ell``)."""
    f = np.asarray(f, dtype=np.int64)
    if f.ndim != 1 or f.shape[0] % ell:
        raise ValueError(f"length {f.shape} is not divisible by l={ell}")
    return f.reshape(-1, ell).sum(axis=1)


def to_ternary(inst: SdInstance) -> SdInstance:
    """The ternary formulation of a balanced instance (same s and w)."""
    if inst.variant is not Variant.BALANCED:
        raise ValueError("to_ternary expects a balanced instance")
    H_t = expand_matrix(inst.H, inst.ell)
    return SdInstance(H_t, inst.s, inst.w, inst.modulus, Variant.TERNARY)


def ternary_witness(e, w: int, m) -> np.ndarray:
    """``pad_to_weight(expand_witness(e), w)``: the prover's f."""
    mod = as_modulus(m)
    if not is_balanced(e, mod):
        raise ValueError("e must be balanced")
    return pad_to_weight(expand_witness(e, mod), w, mod.ell)
