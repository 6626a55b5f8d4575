import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from leezk.problems import (
    BudgetExceeded,
    SdInstance,
    Variant,
    check_witness,
    decide_bruteforce,
    dump_instance,
    instance_from_dict,
    instance_to_dict,
    load_instance,
    random_ternary,
    sample_instance,
)
from leezk.reductions import expand_matrix, to_ternary
from leezk.ring import lee_weight, random_matrix, syndrome

from oracles import all_solutions, replay_planted_weights

E1 = np.array([-2, 0, 1, 3, -1, -1])


def balanced_with(e, m=7, w=8, seed=0, k=3):
    H = random_matrix(len(e), len(e) - k, m, np.random.default_rng(seed))
    return SdInstance(H, syndrome(e, H, m), w, m, Variant.BALANCED)


def test_check_witness_examples():
    inst = balanced_with(E1)
    assert check_witness(inst, E1)
    unbalanced = np.zeros(6, dtype=np.int64)
    unbalanced[0] = 1
    inst1 = SdInstance(inst.H, syndrome(unbalanced, inst.H, 7), 8, 7)
    assert not check_witness(inst1, unbalanced)
    # the same vector is fine for the general problem
    assert check_witness(SdInstance(inst.H, inst1.s, 8, 7, Variant.GENERAL), unbalanced)


def test_check_witness_ternary_exact_weight():
    inst = to_ternary(balanced_with(E1, w=10))
    N = inst.witness_length
    f = np.zeros(N, dtype=np.int64)
    f[: 10 // 2 + 1] = 1
    assert not check_witness(inst, f)
    with pytest.raises(ValueError):
        check_witness(inst, np.zeros(N - 1, dtype=np.int64))


def test_check_witness_rejects_weight_and_range():
    inst = balanced_with(E1, w=6)
    assert not check_witness(inst, E1)  # weight 8 > 6
    assert not check_witness(balanced_with(E1), E1 + 7)  # non-canonical
    assert not check_witness(balanced_with(E1), E1.astype(float))


def test_instance_validation():
    H = np.zeros((4, 2), dtype=np.int64)
    with pytest.raises(ValueError):
        SdInstance(H, [0, 0], 3, 7)  # odd w
    with pytest.raises(ValueError):
        SdInstance(H, [0, 0], 10, 7)  # w > n(l-1) = 8
    with pytest.raises(ValueError):
        SdInstance(H, [0, 0, 0], 2, 7)
    with pytest.raises(ValueError):
        SdInstance(np.zeros((5, 2)), [0, 0], 2, 7, Variant.TERNARY)
    inst = SdInstance(H, [0, 0], 11, 7, Variant.GENERAL)
    assert (inst.n, inst.k, inst.r) == (4, 2, 2)
    with pytest.raises(ValueError):
        inst.H[0, 0] = 1  # read-only


def test_decide_planted_and_zero():
    inst, e = sample_instance(4, 2, 4, 5, np.random.default_rng(3))
    found = decide_bruteforce(inst, 10**4)
    assert found is not None and check_witness(inst, found)
    eye = SdInstance(np.eye(2, dtype=np.int64), [0, 0], 0, 5)
    assert decide_bruteforce(eye, 100).tolist() == [0, 0]


def test_decide_budget_refuses():
    inst, _ = sample_instance(6, 3, 4, 7, np.random.default_rng(0))
    with pytest.raises(BudgetExceeded):
        decide_bruteforce(inst, 7**6 - 1)
    with pytest.raises(BudgetExceeded):
        decide_bruteforce(to_ternary(inst), 10**5)


def test_decide_matches_second_enumeration():
    rng = np.random.default_rng(11)
    seen_no = 0
    for _ in range(30):
        H = random_matrix(3, 2, 5, rng)
        for s0 in range(-2, 3):
            for s1 in range(-2, 3):
                for variant in (Variant.BALANCED, Variant.GENERAL):
                    inst = SdInstance(H, [s0, s1], 2, 5, variant)
                    sols = all_solutions(H.tolist(), [s0, s1], 5, w=2,
                                         balanced=variant is Variant.BALANCED)
                    got = decide_bruteforce(inst, 10**3)
                    if not sols:
                        assert got is None
                        seen_no += 1
                    else:
                        # first in lexicographic order
                        assert tuple(got.tolist()) == sols[0]
    assert seen_no > 0


def test_decide_no_case_ternary():
    rng = np.random.default_rng(2)
    for _ in range(50):
        inst = SdInstance(random_matrix(3, 2, 5, rng), rng.integers(-2, 3, 2), 2, 5)
        if not all_solutions(inst.H.tolist(), inst.s.tolist(), 5, w=2, balanced=True):
            assert decide_bruteforce(inst, 200) is None
            assert decide_bruteforce(to_ternary(inst), 3**6) is None
            return
    pytest.fail("no No-instance found")


def test_sample_instance_examples():
    inst, e = sample_instance(6, 3, 10, 7, np.random.default_rng(0))
    assert check_witness(inst, e) and inst.variant is Variant.BALANCED
    inst0, e0 = sample_instance(6, 3, 0, 7, np.random.default_rng(0))
    assert not e0.any() and not inst0.s.any()
    for bad in [(6, 3, 3, 7), (6, 3, 14, 7), (6, 6, 2, 7), (6, 0, 2, 7)]:
        with pytest.raises(ValueError):
            sample_instance(*bad, np.random.default_rng(0))


def test_sample_weight_distribution_matches_replay():
    rng = np.random.default_rng(2024)
    ours = [lee_weight(sample_instance(8, 4, 6, 7, rng)[1]) for _ in range(1000)]
    theirs = replay_planted_weights(8, 6, 7, 1000, seed=99)
    cats = sorted(set(ours) | set(theirs))
    table = [[ours.count(c) for c in cats], [theirs.count(c) for c in cats]]
    assert stats.chi2_contingency(table).pvalue > 0.01
    assert max(ours) <= 6


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([5, 7, 8, 9, 11]), st.integers(2, 9))
def test_planted_witness_always_checks(seed, m, n):
    rng = np.random.default_rng(seed)
    ell = m // 2
    k = int(rng.integers(1, n))
    w = 2 * int(rng.integers(0, n * (ell - 1) // 2 + 1))
    inst, e = sample_instance(n, k, w, m, rng)
    assert check_witness(inst, e)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_decide_finds_planted(seed):
    inst, _ = sample_instance(3, 1, 2, 5, np.random.default_rng(seed))
    assert decide_bruteforce(inst, 10**3) is not None
    f = decide_bruteforce(to_ternary(inst), 10**3)
    assert f is not None
    assert np.count_nonzero(f == 1) == np.count_nonzero(f == -1) == inst.w // 2


@given(st.integers(0, 2**32 - 1), st.integers(0, 6))
def test_random_ternary_shape(seed, half):
    f = random_ternary(12, 2 * half, np.random.default_rng(seed))
    assert np.count_nonzero(f == 1) == np.count_nonzero(f == -1) == half


def test_json_round_trip(tmp_path):
    inst, e = sample_instance(5, 2, 4, 7, np.random.default_rng(8))
    d = instance_to_dict(inst, e)
    assert set(d) == {"variant", "m", "n", "k", "w", "H", "s", "e"}
    path = tmp_path / "inst.json"
    dump_instance(inst, path, e)
    back, e2 = load_instance(path)
    assert np.array_equal(back.H, inst.H) and np.array_equal(back.s, inst.s)
    assert back.w == inst.w and back.variant is inst.variant and np.array_equal(e2, e)
    tern = to_ternary(inst)
    tback, none = instance_from_dict(json.loads(json.dumps(instance_to_dict(tern))))
    assert none is None and tback.n == 5 and np.array_equal(tback.H, expand_matrix(inst.H, 3))


@pytest.mark.parametrize("edit", [
    lambda d: d.pop("H"),
    lambda d: d.update(n=99),
    lambda d: d.update(variant="weird"),
    lambda d: d.update(H=[[9, 9], [9, 9]]),
    lambda d: d.update(e=[1, 2]),
    lambda d: d.update(m="x"),
])
def test_json_rejects_malformed(edit):
    inst, e = sample_instance(5, 2, 4, 7, np.random.default_rng(8))
    d = instance_to_dict(inst, e)
    edit(d)
    with pytest.raises(ValueError):
        instance_from_dict(d)
