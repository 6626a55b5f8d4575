import json

import numpy as np
import pytest

from leezk import analysis
from leezk.analysis import (
    STRATEGIES,
    BindingBreak,
    CheatStrategy,
    cheating_prover_round,
    cheating_sessions,
    extract,
    extractor_succeeds,
    rewind_open_all,
    simulate_view,
    soundness_trial,
    transcript_distribution_test,
    trial_rngs,
    view_objects,
)
from leezk.commitments import Opening, Slot
from leezk.problems import check_witness, sample_instance
from leezk.protocol import Challenge, prover_commit, prover_respond, verifier_check
from leezk.ring import center_mod


def test_trial_rngs_split_rule():
    a = trial_rngs(5, 3)
    b = [np.random.default_rng(s) for s in np.random.SeedSequence(5).spawn(3)]
    assert [g.integers(1 << 30) for g in a] == [g.integers(1 << 30) for g in b]


@pytest.mark.parametrize("ch", list(Challenge))
def test_simulator_always_accepted(ch):
    rng = np.random.default_rng(int(ch))
    for trial in range(1000):
        inst, _ = sample_instance(5, 2, 4, 7, rng) if trial % 100 == 0 else (inst, None)
        view = simulate_view(inst, ch, rng)
        assert verifier_check(inst, view.commit_message, ch, view.response).accepted
        objs = view.objects
        if ch is Challenge.A:
            assert np.array_equal(center_mod(objs[Slot.R] + objs[Slot.T], 7), inst.H)
        else:
            g = objs[Slot.F_PI]
            assert np.count_nonzero(g == 1) == np.count_nonzero(g == -1) == inst.w // 2


def test_strategy_names():
    assert [s.name for s in STRATEGIES] == ["AB", "AC", "BC"]
    assert CheatStrategy.from_name("ba").uncovered is Challenge.C
    with pytest.raises(ValueError):
        CheatStrategy(frozenset({Challenge.A}))


@pytest.mark.parametrize("strat", STRATEGIES, ids=lambda s: s.name)
def test_cheater_per_tag_outcomes(strat):
    rng = np.random.default_rng(42)
    inst, _ = sample_instance(6, 3, 6, 7, rng)
    for _ in range(50):
        cm, responder = cheating_prover_round(inst, strat, rng)
        outcomes = {ch: verifier_check(inst, cm, ch, responder(ch)) for ch in Challenge}
        for ch, v in outcomes.items():
            assert v.accepted == (ch in strat.covers), (ch, v)
        # a cheater answering all three never yields a witness
        assert not extractor_succeeds(inst, cm, {ch: responder(ch) for ch in Challenge})


def test_cheater_needs_weight():
    inst, _ = sample_instance(4, 2, 0, 7, np.random.default_rng(0))
    with pytest.raises(ValueError):
        cheating_prover_round(inst, STRATEGIES[0], np.random.default_rng(0))


def test_soundness_trial_report():
    inst, _ = sample_instance(5, 2, 4, 7, np.random.default_rng(1))
    rep = soundness_trial(inst, STRATEGIES[2], 600, np.random.default_rng(2))
    json.dumps(rep)
    assert rep["per_challenge"]["A"]["accepted"] == 0
    assert rep["per_challenge"]["B"]["accepted"] == rep["per_challenge"]["B"]["asked"]
    assert set(rep["reject_checks"]) == {"a2"}
    assert abs(rep["z"]) < 4
    sess = cheating_sessions(inst, STRATEGIES[0], 200, 24, np.random.default_rng(3))
    assert sess["accepted"] == 0 and sess["expected"] < 0.02


def test_extractor_on_honest_states():
    rng = np.random.default_rng(8)
    for _ in range(30):
        inst, e = sample_instance(6, 3, 8, 7, rng)
        state, cm = prover_commit(inst, e, rng)
        got = extract(inst, cm, rewind_open_all(state))
        assert check_witness(inst, got)


def test_extractor_flags_binding_break(monkeypatch, small_instance):
    inst, e = small_instance
    state, cm = prover_commit(inst, e, np.random.default_rng(0))
    resps = rewind_open_all(state)
    b = resps[Challenge.B]
    forged = list(b.openings)
    forged[0] = Opening(forged[0].tag, bytes(32), forged[0].payload)
    resps[Challenge.B] = type(b)(b.challenge, tuple(forged))
    assert extract(inst, cm, resps) is None  # the forged salt does not open
    monkeypatch.setattr(analysis, "verifier_check", lambda *a: True)
    with pytest.raises(BindingBreak):
        extract(inst, cm, resps)


def test_distribution_test_contract(small_instance):
    inst, e = small_instance
    rng = np.random.default_rng(0)
    views = [simulate_view(inst, Challenge.B, rng) for _ in range(300)]
    rep = transcript_distribution_test(views[:150], views[150:])
    assert 0 <= rep["p_value"] <= 1 and rep["samples"] == [150, 150]
    json.dumps(rep)
    with pytest.raises(ValueError):
        transcript_distribution_test(views[:10], views[10:20])
    a_views = [simulate_view(inst, Challenge.A, rng) for _ in range(60)]
    with pytest.raises(ValueError):
        transcript_distribution_test(views[:60], a_views)


def test_view_objects_accepts_responses(small_instance):
    inst, e = small_instance
    state, _ = prover_commit(inst, e, np.random.default_rng(0))
    objs = view_objects(prover_respond(state, Challenge.C))
    assert set(objs) == {Slot.A, Slot.B, Slot.T_PI, Slot.F_PI}
    assert np.array_equal(objs[Slot.F_PI], state.f_pi)
