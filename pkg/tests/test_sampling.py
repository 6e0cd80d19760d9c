import numpy as np
import pytest

from randnets import random_network

from nidss import _kernels
from nidss.inference import _pack, joint_probability, joint_table
from nidss.network import Cpt, Network, Variable, check_network
from nidss.sampling import sample, sample_codes, sample_dataset


def deterministic_net():
    a = Variable("A", ("x", "y"))
    b = Variable("B", ("u", "v"))
    return check_network(Network([a, b], [
        Cpt("A", a.states, (), (), np.array([0.0, 1.0])),
        Cpt("B", b.states, ("A",), (a.states,), np.array([[1.0, 0.0], [0.0, 1.0]])),
    ]))


def test_one_hot_cpts_give_unique_assignment():
    net = deterministic_net()
    for seed in range(5):
        assert sample(net, seed) == {"A": "y", "B": "v"}


def test_certain_root_always_yes():
    x = Variable("X", ("yes", "no"))
    net = check_network(Network([x], [Cpt("X", x.states, (), (), np.array([1.0, 0.0]))]))
    codes = sample_codes(net, 1000, seed=4)
    assert (codes == 0).all()


def test_empirical_frequency_matches_parameter():
    x = Variable("X", ("yes", "no"))
    net = check_network(Network([x], [Cpt("X", x.states, (), (), np.array([0.3, 0.7]))]))
    codes = sample_codes(net, 100_000, seed=12)
    assert abs((codes[:, 0] == 0).mean() - 0.3) < 0.01


def test_fixed_seed_is_deterministic():
    rng = np.random.default_rng(2)
    net = random_network(rng, n_vars=6)
    assert sample(net, 99) == sample(net, 99)
    assert np.array_equal(sample_codes(net, 50, seed=1), sample_codes(net, 50, seed=1))


def test_backends_produce_identical_draws_and_joints():
    # the numpy fallback must agree bit-for-bit with whichever backend is
    # active, because sampling consumes pre-drawn uniforms
    rng = np.random.default_rng(31)
    net = random_network(rng, n_vars=8, max_states=3)
    p = _pack(net)
    uniforms = np.random.default_rng(77).random((200, len(p.names)))
    active = _kernels.sample_many(p.cards, p.axes_flat, p.axes_off,
                                  p.tables_flat, p.tab_off, p.topo, uniforms)
    fallback = _kernels._sample_many_numpy(p.cards, p.axes_flat, p.axes_off,
                                           p.tables_flat, p.tab_off, p.topo, uniforms)
    assert np.array_equal(active, fallback)

    jt = joint_table(net)
    jt_numpy = _kernels._joint_table_numpy(p.cards, p.axes_flat, p.axes_off,
                                           p.tables_flat, p.tab_off)
    assert np.array_equal(jt, jt_numpy)


def test_empirical_joint_converges_to_joint_probability():
    rng = np.random.default_rng(41)
    net = random_network(rng, n_vars=4, max_states=2, p_edge=0.7)
    data = sample_dataset(net, 20_000, seed=5)
    counts = {}
    for row in data.rows:
        key = tuple(row[n] for n in net.names)
        counts[key] = counts.get(key, 0) + 1
    for key, count in counts.items():
        p = joint_probability(net, dict(zip(net.names, key)))
        assert abs(count / len(data) - p) < 0.02
