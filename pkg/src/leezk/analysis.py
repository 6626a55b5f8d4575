"""Simulator, scripted cheating provers, extractor and transcript statistics.

These are executable versions of the arguments behind completeness,
soundness and zero knowledge, used by the test-suite and the ``simulate`` and
``bench`` commands. Reports are plain JSON-serializable dicts.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from .commitments import Slot, decode_object, make_opening
from .problems import SdInstance, check_witness, random_ternary
from .protocol import (
    Challenge,
    CommitMessage,
    ProverRoundState,
    Response,
    commit_openings,
    open_slots,
    permute_rows,
    random_permutation,
    verifier_challenge,
    verifier_check,
)
from .reductions import accumulate, expand_matrix
from .ring import center_mod, random_matrix, random_vector, syndrome


def trial_rngs(seed: int, count: int) -> list:
    """Independent per-trial generators: ``SeedSequence(seed).spawn(count)``."""
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(count)]


# -- zero-knowledge simulator ---------------------------------------------

@dataclass
class SimulatedView:
    challenge: Challenge
    objects: dict
    commit_message: CommitMessage
    response: Response


def simulate_view(inst: SdInstance, ch: Challenge, rng: np.random.Generator) -> SimulatedView:
    """Produce an accepting view for ``ch`` without the witness.

    Unopened slots are commitments to freshly sampled objects of the right
    shape; their contents never leave the simulator.
    """
    ch = Challenge(ch)
    mod = inst.modulus
    ell = mod.ell
    N = inst.n * ell
    R = random_matrix(inst.n, inst.r, mod, rng)
    T = center_mod(inst.H - R, mod)
    perm = random_permutation(N, rng)
    R_pi = permute_rows(expand_matrix(R, ell), perm)
    T_pi = permute_rows(expand_matrix(T, ell), perm)
    g = random_ternary(N, inst.w, rng)
    if ch is Challenge.A:
        a = random_vector(inst.r, mod, rng)
        b = center_mod(inst.s - a, mod)
    elif ch is Challenge.B:
        a = syndrome(g, R_pi, mod)
        b = center_mod(inst.s - a, mod)
    else:
        b = syndrome(g, T_pi, mod)
        a = center_mod(inst.s - b, mod)
    objects = {
        Slot.R: R, Slot.T: T, Slot.A: a, Slot.B: b,
        Slot.PI: perm, Slot.R_PI: R_pi, Slot.T_PI: T_pi, Slot.F_PI: g,
    }
    openings = {slot: make_opening(slot, objects[slot], rng) for slot in Slot}
    resp = open_slots(openings, ch)
    opened = {Slot(op.tag): objects[Slot(op.tag)] for op in resp.openings}
    return SimulatedView(ch, opened, commit_openings(openings), resp)


# -- cheating provers -------------------------------------------------------

@dataclass(frozen=True)
class CheatStrategy:
    """A prover without a witness that prepares answers for two challenges."""

    covers: frozenset

    def __post_init__(self):
        covers = frozenset(Challenge(c) for c in self.covers)
        if len(covers) != 2:
            raise ValueError("a cheating strategy covers exactly two challenges")
        object.__setattr__(self, "covers", covers)

    @property
    def uncovered(self) -> Challenge:
        (ch,) = set(Challenge) - self.covers
        return ch

    @property
    def name(self) -> str:
        return "".join(sorted(c.name for c in self.covers))

    @classmethod
    def from_name(cls, name: str) -> "CheatStrategy":
        return cls(frozenset(Challenge[c] for c in name.upper()))


STRATEGIES = (CheatStrategy.from_name("AB"), CheatStrategy.from_name("AC"),
              CheatStrategy.from_name("BC"))


def cheating_prover_round(inst: SdInstance, strat: CheatStrategy, rng: np.random.Generator):
    """Commit like a prover that has no witness; returns ``(cm, responder)``.

    AB / AC: honest masking, but ``f_pi`` is a random balanced ternary ``g``
    with ``a`` (resp. ``b``) computed from it and the other share forced to
    ``s - a``; challenge C (resp. B) exposes ``g T~_pi != b``.
    BC: ``g`` satisfies both share equations because ``T~_pi`` has one
    doctored row, which challenge A exposes.
    """
    mod = inst.modulus
    ell = mod.ell
    N = inst.n * ell
    if inst.w < 2:
        raise ValueError("cheating strategies need w >= 2")
    R = random_matrix(inst.n, inst.r, mod, rng)
    T = center_mod(inst.H - R, mod)
    perm = random_permutation(N, rng)
    R_pi = permute_rows(expand_matrix(R, ell), perm)
    T_pi = permute_rows(expand_matrix(T, ell), perm)
    H_pi = permute_rows(expand_matrix(inst.H, ell), perm)
    while True:
        g = random_ternary(N, inst.w, rng)
        gap = center_mod(inst.s - syndrome(g, H_pi, mod), mod)
        if np.any(gap):  # g must not happen to be a ternary witness
            break
    uncovered = strat.uncovered
    if uncovered is Challenge.C:
        a = syndrome(g, R_pi, mod)
        b = center_mod(inst.s - a, mod)
    elif uncovered is Challenge.B:
        b = syndrome(g, T_pi, mod)
        a = center_mod(inst.s - b, mod)
    else:
        j = int(np.flatnonzero(g)[0])
        T_pi = T_pi.copy()
        T_pi[j] = center_mod(T_pi[j] + g[j] * gap, mod)
        a = syndrome(g, R_pi, mod)
        b = syndrome(g, T_pi, mod)
    objects = {
        Slot.R: R, Slot.T: T, Slot.A: a, Slot.B: b,
        Slot.PI: perm, Slot.R_PI: R_pi, Slot.T_PI: T_pi, Slot.F_PI: g,
    }
    openings = {slot: make_opening(slot, objects[slot], rng) for slot in Slot}
    return commit_openings(openings), lambda ch: open_slots(openings, ch)


def soundness_trial(inst: SdInstance, strat: CheatStrategy, rounds: int,
                    rng: np.random.Generator) -> dict:
    """Uniformly challenged single rounds against one cheating strategy."""
    counts = {ch.name: [0, 0] for ch in Challenge}  # [asked, accepted]
    checks = {}
    accepted = 0
    for _ in range(rounds):
        cm, responder = cheating_prover_round(inst, strat, rng)
        ch = verifier_challenge(rng)
        verdict = verifier_check(inst, cm, ch, responder(ch))
        counts[ch.name][0] += 1
        if verdict:
            counts[ch.name][1] += 1
            accepted += 1
        else:
            checks[verdict.check] = checks.get(verdict.check, 0) + 1
    rate = accepted / rounds
    sigma = np.sqrt((2 / 3) * (1 / 3) / rounds)
    return {
        "strategy": strat.name,
        "rounds": rounds,
        "accepted": accepted,
        "rate": rate,
        "sigma": float(sigma),
        "z": float((rate - 2 / 3) / sigma),
        "per_challenge": {k: {"asked": v[0], "accepted": v[1]} for k, v in counts.items()},
        "reject_checks": checks,
    }


def cheating_sessions(inst: SdInstance, strat: CheatStrategy, sessions: int, t: int,
                      rng: np.random.Generator) -> dict:
    """Count sessions of ``t`` rounds a cheating prover gets accepted in."""
    accepted = 0
    for _ in range(sessions):
        for _ in range(t):
            cm, responder = cheating_prover_round(inst, strat, rng)
            ch = verifier_challenge(rng)
            if not verifier_check(inst, cm, ch, responder(ch)):
                break
        else:
            accepted += 1
    return {"strategy": strat.name, "sessions": sessions, "t": t, "accepted": accepted,
            "expected": sessions * (2 / 3) ** t}


# -- extractor ----------------------------------------------------------------

class BindingBreak(Exception):
    """Two different openings verified against the same commitment."""


def rewind_open_all(state: ProverRoundState) -> dict:
    """TEST-ONLY rewind: answer all three challenges from one round state.

    A real prover never does this; it is how the extractor argument is run.
    """
    return {ch: open_slots(state.openings, ch) for ch in Challenge}


def extract(inst: SdInstance, cm: CommitMessage, responses: dict):
    """Recover a witness from accepted answers to all three challenges.

    Returns ``None`` if some answer is rejected. Raises :class:`BindingBreak`
    if the answers open a shared slot to different values.
    """
    for ch in Challenge:
        if not verifier_check(inst, cm, ch, responses[ch]):
            return None
    opened = {}
    for ch in Challenge:
        for op in responses[ch].openings:
            slot = Slot(op.tag)
            if slot in opened and opened[slot] != op:
                raise BindingBreak(f"slot {slot.name} opened two ways under one digest")
            opened[slot] = op
    perm = decode_object(Slot.PI, opened[Slot.PI].payload)
    f_pi = decode_object(Slot.F_PI, opened[Slot.F_PI].payload)
    f = np.empty_like(f_pi)
    f[perm - 1] = f_pi
    return center_mod(accumulate(f, inst.ell), inst.modulus)


def extractor_succeeds(inst: SdInstance, cm: CommitMessage, responses: dict) -> bool:
    e = extract(inst, cm, responses)
    return e is not None and check_witness(inst, e)


# -- transcript statistics ----------------------------------------------------

def view_objects(view) -> dict:
    """Opened objects of a view, keyed by slot."""
    if isinstance(view, SimulatedView):
        return view.objects
    if isinstance(view, Response):
        return {Slot(op.tag): decode_object(op.tag, op.payload) for op in view.openings}
    return {Slot(k): np.asarray(v) for k, v in view.items()}


def _bin(x, size: int, bins: int = 10) -> int:
    return int(x) * min(bins, size) // max(size, 1)


def _features(objs: dict) -> dict:
    out = {}
    for slot, obj in objs.items():
        name = slot.name
        kind = slot.kind.value
        if kind == "matrix":
            out[f"{name}[0,0]"] = int(obj[0, 0])
            out[f"{name}[-1,-1]"] = int(obj[-1, -1])
        elif kind == "vector":
            out[f"{name}[0]"] = int(obj[0])
            out[f"{name}[-1]"] = int(obj[-1])
        elif kind == "permutation":
            out[f"{name}(first)"] = _bin(obj[0] - 1, len(obj))
            out[f"{name}(last)"] = _bin(obj[-1] - 1, len(obj))
        else:
            out[f"{name}[0]"] = int(obj[0])
            out[f"{name}[-1]"] = int(obj[-1])
            nz = np.flatnonzero(obj)
            out[f"{name}(first nonzero)"] = _bin(nz[0], len(obj)) if nz.size else -1
    return out


def transcript_distribution_test(views_x, views_y, min_samples: int = 50) -> dict:
    """Two-sample homogeneity test between two collections of views.

    Each view contributes one observation of a handful of categorical
    features (corner entries of opened matrices and vectors, binned
    permutation images, entries and first-nonzero position of ``f_pi``). Each
    feature gets a chi-squared contingency test; the reported p-value is the
    Bonferroni-adjusted minimum.
    """
    xs = [_features(view_objects(v)) for v in views_x]
    ys = [_features(view_objects(v)) for v in views_y]
    if len(xs) < min_samples or len(ys) < min_samples:
        raise ValueError(f"need at least {min_samples} views per arm, got {len(xs)} and {len(ys)}")
    keys = set(xs[0])
    if any(set(f) != keys for f in xs + ys):
        raise ValueError("views do not open the same slots")
    per_feature = {}
    for key in sorted(keys):
        vx = np.array([f[key] for f in xs])
        vy = np.array([f[key] for f in ys])
        cats = np.union1d(vx, vy)
        if len(cats) < 2:
            per_feature[key] = {"statistic": 0.0, "p_value": 1.0, "dof": 0}
            continue
        table = np.array([[np.count_nonzero(vx == c) for c in cats],
                          [np.count_nonzero(vy == c) for c in cats]])
        res = stats.chi2_contingency(table, correction=False)
        per_feature[key] = {"statistic": float(res.statistic), "p_value": float(res.pvalue),
                            "dof": int(res.dof)}
    worst = min(per_feature, key=lambda k: per_feature[k]["p_value"])
    p = min(1.0, per_feature[worst]["p_value"] * len(per_feature))
    return {
        "statistic": per_feature[worst]["statistic"],
        "p_value": p,
        "worst_feature": worst,
        "samples": [len(xs), len(ys)],
        "features": per_feature,
    }


def revealed_shape_ok(inst: SdInstance, resp: Response) -> bool:
    """A revealed ``f_pi`` has exactly w/2 ones, w/2 minus-ones, rest zeros."""
    for op in resp.openings:
        if Slot(op.tag) is Slot.F_PI:
            f = decode_object(op.tag, op.payload)
            half = inst.w // 2
            return (np.count_nonzero(f == 1) == half and np.count_nonzero(f == -1) == half
                    and np.count_nonzero(f == 0) == len(f) - inst.w)
    return True
