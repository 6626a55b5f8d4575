import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from leezk.commitments import Slot, make_opening  # noqa: E402
from leezk.problems import sample_instance  # noqa: E402
from leezk.protocol import commit_openings, open_slots, prover_commit  # noqa: E402

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def small_instance():
    """(inst, e) at n=6, k=3, m=7, w=6."""
    return sample_instance(6, 3, 6, 7, np.random.default_rng(77))


def state_objects(state):
    return {
        Slot.R: state.R, Slot.T: state.T, Slot.A: state.a, Slot.B: state.b,
        Slot.PI: state.perm, Slot.R_PI: state.R_pi, Slot.T_PI: state.T_pi, Slot.F_PI: state.f_pi,
    }


def doctored_round(inst, e, rng, mutate):
    """Honest round whose objects are edited by ``mutate`` and then re-committed.

    Models a prover that commits to wrong values, so openings stay valid and
    only the content checks can object.
    """
    state, _ = prover_commit(inst, e, rng)
    objs = {k: np.array(v, copy=True) for k, v in state_objects(state).items()}
    mutate(objs)
    openings = {slot: make_opening(slot, objs[slot], rng) for slot in Slot}
    return commit_openings(openings), (lambda ch: open_slots(openings, ch)), objs
