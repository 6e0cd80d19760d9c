import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from nidss.clinical import default_schema
from nidss.dbn import DbnSpec
from nidss.models import default_ground_truth, default_structure
from nidss.network import Cpt, Network, Variable


def make_chain_spec(p0=0.2, p_stay=0.7, p_flip=0.1, p_pos_yes=0.9, p_pos_no=0.2) -> DbnSpec:
    """Two-state result chain with one noisy observation per day."""
    state = Variable("state", ("yes", "no"))
    obs = Variable("obs", ("pos", "neg"))
    trans = Cpt("state", state.states, ("state",), (state.states,),
                np.array([[p_stay, 1 - p_stay], [p_flip, 1 - p_flip]]))
    emit = Cpt("obs", obs.states, ("state",), (state.states,),
               np.array([[p_pos_yes, 1 - p_pos_yes], [p_pos_no, 1 - p_pos_no]]))
    init = Cpt("state", state.states, (), (), np.array([p0, 1 - p0]))
    return DbnSpec(
        static_slice=Network([], []),
        slice_template=Network([state, obs], [trans, emit]),
        initial_cpts={"state": init},
        inter_slice_arcs=[("state", "state")],
        bridge_arcs=[],
        result_node="state",
    ).check()


@pytest.fixture(scope="session")
def chain_spec():
    return make_chain_spec()


@pytest.fixture(scope="session")
def schema():
    return default_schema()


@pytest.fixture(scope="session")
def ground_truth(schema):
    return default_ground_truth(schema)


@pytest.fixture(scope="session")
def structure(schema):
    return default_structure(schema)
