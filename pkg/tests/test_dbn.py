import numpy as np
import pytest

from conftest import make_chain_spec
from randnets import random_dbn_spec, random_timeline

from nidss.dbn import (
    DbnSpec,
    EvidenceTimeline,
    day_name,
    filter_day,
    forward_equals_unrolled,
    predict_trajectory,
    restrict_timeline,
    spec_from_dict,
    spec_to_dict,
    unroll,
)
from nidss.errors import ImpossibleEvidenceError, InvalidNetworkError
from nidss.inference import joint_probability, posterior
from nidss.network import Cpt, Network, Variable, check_network


def small_spec(n_static=2, n_template=3):
    statics = [Variable(f"f{i}", ("a", "b")) for i in range(n_static)]
    static_cpts = [Cpt(v.name, v.states, (), (), np.array([0.4, 0.6])) for v in statics]
    r = Variable("r", ("yes", "no"))
    others = [Variable(f"o{i}", ("a", "b")) for i in range(n_template - 1)]
    template_cpts = [Cpt("r", r.states, ("f0", "r"), (statics[0].states, r.states),
                         np.array([[[0.7, 0.3], [0.2, 0.8]], [[0.5, 0.5], [0.1, 0.9]]]))]
    template_cpts += [Cpt(v.name, v.states, ("r",), (r.states,),
                          np.array([[0.8, 0.2], [0.3, 0.7]])) for v in others]
    return DbnSpec(
        static_slice=check_network(Network(statics, static_cpts)),
        slice_template=Network([r] + others, template_cpts),
        initial_cpts={"r": Cpt("r", r.states, ("f0",), (statics[0].states,),
                               np.array([[0.25, 0.75], [0.05, 0.95]]))},
        inter_slice_arcs=[("r", "r")],
        bridge_arcs=[("f0", "r")],
        result_node="r",
    ).check()


# --- structure and unrolling --------------------------------------------------


def test_unroll_node_count():
    net = unroll(small_spec(2, 3), 4)
    assert len(net.variables) == 2 + 3 * 4


def test_unroll_t1_has_no_inter_slice_arcs():
    net = unroll(small_spec(), 1)
    # day-1 result uses the initial CPT: parents are the bridge static only
    assert net.cpts[day_name("r", 1)].parents == ("f0",)


def test_unroll_day_boundary_and_wiring():
    net = unroll(small_spec(), 3)
    assert net.cpts[day_name("r", 2)].parents == ("f0", day_name("r", 1))
    assert net.cpts[day_name("o0", 3)].parents == (day_name("r", 3),)


def test_unroll_arc_count_identity():
    rng = np.random.default_rng(6)
    for _ in range(10):
        spec = random_dbn_spec(rng)
        n_intra = sum(
            sum(1 for p in cpt.parents
                if p in spec.slice_template._by_name and p not in spec.inter_parents(cpt.child))
            for cpt in spec.slice_template.cpts.values()
        )
        n_static_arcs = sum(len(c.parents) for c in spec.static_slice.cpts.values())
        for T in (1, 2, 3):
            net = unroll(spec, T)
            arcs = sum(len(c.parents) for c in net.cpts.values())
            expected = (n_static_arcs + T * n_intra + (T - 1) * len(spec.inter_slice_arcs)
                        + T * len(spec.bridge_arcs))
            assert arcs == expected


def test_default_clinical_slice_contents(ground_truth):
    names = ground_truth.slice_template.names
    assert len(names) == 42
    assert sum(1 for n in names if n.startswith("act_")) == 10
    assert sum(1 for n in names if n.startswith("examinf_")) == 30
    assert "sens" in names and "result_t" in names
    net = unroll(ground_truth, 3)
    assert len(net.variables) == 11 + 3 * 42


def test_spec_validation_catches_breaches():
    spec = small_spec()
    # missing initial cpt
    broken = DbnSpec(spec.static_slice, spec.slice_template, {},
                     spec.inter_slice_arcs, spec.bridge_arcs, "r")
    assert any("initial" in v for v in broken.validate())
    # static parent without a bridge declaration
    broken = DbnSpec(spec.static_slice, spec.slice_template, spec.initial_cpts,
                     spec.inter_slice_arcs, [], "r")
    assert any("bridge" in v for v in broken.validate())
    # result node must exist with yes/no states
    broken = DbnSpec(spec.static_slice, spec.slice_template, spec.initial_cpts,
                     spec.inter_slice_arcs, spec.bridge_arcs, "o0")
    assert any("yes/no" in v for v in broken.validate())
    with pytest.raises(InvalidNetworkError):
        broken.check()


def test_spec_rejects_name_collisions_and_day_separator():
    r = Variable("r", ("yes", "no"))
    f = Variable("r", ("a", "b"))
    spec = DbnSpec(
        static_slice=check_network(Network([f], [Cpt("r", f.states, (), (), np.array([0.5, 0.5]))])),
        slice_template=Network([r], [Cpt("r", r.states, (), (), np.array([0.5, 0.5]))]),
        initial_cpts={}, inter_slice_arcs=[], bridge_arcs=[], result_node="r",
    )
    assert any("share names" in v for v in spec.validate())


def test_spec_json_round_trip(tmp_path):
    spec = small_spec()
    data = spec_to_dict(spec)
    loaded = spec_from_dict(data)
    assert loaded.slice_template.names == spec.slice_template.names
    assert loaded.inter_slice_arcs == spec.inter_slice_arcs
    assert np.array_equal(loaded.initial_cpts["r"].table, spec.initial_cpts["r"].table)


# --- filtering ----------------------------------------------------------------


def enumeration_filter(spec, timeline, t):
    """Independent oracle: brute-force posterior on the truncated unrolled net."""
    return filter_day(spec, timeline, t, engine="enumeration").prob("yes")


def test_chain_fixture_matches_hand_forward_steps(chain_spec):
    timeline = EvidenceTimeline({}, [{"obs": "pos"}, {"obs": "pos"}])
    # verify against the enumeration oracle first, then pin the constants
    oracle = [enumeration_filter(chain_spec, timeline, t) for t in (1, 2)]
    assert oracle[0] == pytest.approx(0.18 / 0.34, abs=1e-12)
    for t, pinned in ((1, 0.52941), (2, 0.76344)):
        p = filter_day(chain_spec, timeline, t).prob("yes")
        assert p == pytest.approx(oracle[t - 1], abs=1e-9)
        assert p == pytest.approx(pinned, abs=1e-4)


def test_chain_trajectory_composes_filter_steps(chain_spec):
    timeline = EvidenceTimeline({}, [{"obs": "pos"}, {"obs": "pos"}])
    trace = predict_trajectory(chain_spec, timeline)
    assert trace.days == [1, 2]
    assert trace.probability(1) == pytest.approx(0.52941, abs=1e-4)
    assert trace.probability(2) == pytest.approx(0.76344, abs=1e-4)


def test_no_evidence_reduces_to_prior_chain(chain_spec):
    timeline = EvidenceTimeline({}, [{}, {}, {}])
    # hand recursion: p1 = 0.2, p_{t+1} = 0.7 p_t + 0.1 (1 - p_t)
    expected, p = [], 0.2
    for _ in range(3):
        expected.append(p)
        p = 0.7 * p + 0.1 * (1 - p)
    trace = predict_trajectory(chain_spec, timeline)
    for t in (1, 2, 3):
        assert trace.probability(t) == pytest.approx(expected[t - 1], abs=1e-12)
        assert enumeration_filter(chain_spec, timeline, t) == pytest.approx(expected[t - 1], abs=1e-9)


def test_uniform_observations_equal_pure_chain():
    spec = make_chain_spec(p_pos_yes=0.5, p_pos_no=0.5)
    observed = EvidenceTimeline({}, [{"obs": "pos"}, {"obs": "neg"}])
    expected = [0.2, 0.7 * 0.2 + 0.1 * 0.8]
    for t in (1, 2):
        assert filter_day(spec, observed, t).prob("yes") == pytest.approx(expected[t - 1], abs=1e-12)


def test_all_engines_agree_on_static_bridge_spec():
    spec = small_spec()
    timeline = EvidenceTimeline({"f1": "a"}, [{"o0": "a"}, {}, {"o0": "b", "o1": "b"}])
    for t in (1, 2, 3):
        pf = filter_day(spec, timeline, t, engine="forward").probs
        pu = filter_day(spec, timeline, t, engine="unrolled").probs
        pe = filter_day(spec, timeline, t, engine="enumeration").probs
        assert np.max(np.abs(pf - pu)) < 1e-9
        assert np.max(np.abs(pf - pe)) < 1e-9


def test_static_evidence_on_bridge_parent_is_respected():
    spec = small_spec()
    timeline = EvidenceTimeline({"f0": "b"}, [{"o0": "a"}])
    pf = filter_day(spec, timeline, 1, engine="forward").prob("yes")
    pe = filter_day(spec, timeline, 1, engine="enumeration").prob("yes")
    assert pf == pytest.approx(pe, abs=1e-12)
    # with f0 pinned to "b" the day-1 prior is 0.05; one positive-ish obs updates it
    assert pf == pytest.approx(0.05 * 0.8 / (0.05 * 0.8 + 0.95 * 0.3), abs=1e-9)


def test_filter_rejects_out_of_range_day(chain_spec):
    timeline = EvidenceTimeline({}, [{"obs": "pos"}])
    with pytest.raises(IndexError):
        filter_day(chain_spec, timeline, 2)
    with pytest.raises(IndexError):
        filter_day(chain_spec, timeline, 0)


def test_timeline_rejects_result_binding(chain_spec):
    with pytest.raises(ValueError, match="result"):
        EvidenceTimeline({}, [{"state": "yes"}]).check(chain_spec)


def test_impossible_evidence_raises_typed_error():
    spec = make_chain_spec(p0=1.0, p_stay=1.0, p_flip=0.0, p_pos_yes=1.0, p_pos_no=0.0)
    timeline = EvidenceTimeline({}, [{"obs": "neg"}])
    for engine in ("forward", "unrolled", "enumeration"):
        with pytest.raises(ImpossibleEvidenceError):
            filter_day(spec, timeline, 1, engine=engine)


def test_prefix_causality_random_sweep():
    rng = np.random.default_rng(101)
    for _ in range(10):
        spec = random_dbn_spec(rng)
        timeline = random_timeline(rng, spec, n_days=3)
        full = predict_trajectory(spec, timeline)
        for t in (1, 2):
            prefix = predict_trajectory(spec, timeline.prefix(t))
            assert prefix.entries == full.entries[:len(prefix.entries)]


def test_forward_equals_unrolled_chain(chain_spec):
    timeline = EvidenceTimeline({}, [{"obs": "pos"}, {"obs": "neg"}])
    report = forward_equals_unrolled(chain_spec, timeline)
    assert report["max_abs_deviation"] < 1e-9


def test_forward_equals_unrolled_deterministic_spec_is_exact():
    spec = make_chain_spec(p0=1.0, p_stay=1.0, p_flip=0.0, p_pos_yes=1.0, p_pos_no=0.0)
    timeline = EvidenceTimeline({}, [{"obs": "pos"}, {"obs": "pos"}])
    report = forward_equals_unrolled(spec, timeline)
    assert report["max_abs_deviation"] == 0.0


def test_forward_equals_unrolled_random_sweep():
    rng = np.random.default_rng(55)
    for _ in range(10):
        spec = random_dbn_spec(rng)
        timeline = random_timeline(rng, spec, n_days=int(rng.integers(1, 4)))
        report = forward_equals_unrolled(spec, timeline)
        assert report["max_abs_deviation"] < 1e-9


def test_unrolled_joint_factorises_over_slices():
    rng = np.random.default_rng(77)
    spec = random_dbn_spec(rng, max_static=2, max_temporal=3, max_days=3)
    T = 3
    net = unroll(spec, T)
    full = {}
    for name in net.names:
        var = net.variable(name)
        full[name] = var.states[int(rng.integers(var.card))]
    # independent regrouping: static factors once, then one factor product
    # per slice with parents resolved across the slice boundary
    static_names = set(spec.static_slice.names)
    product = 1.0
    for name in spec.static_slice.names:
        cpt = spec.static_slice.cpts[name]
        product *= float(cpt.row({p: full[p] for p in cpt.parents})[
            spec.static_slice.variable(name).index(full[name])])
    for d in range(1, T + 1):
        for v in spec.slice_template.variables:
            inter_ps = spec.inter_parents(v.name)
            src = spec.slice_template.cpts[v.name]
            if d == 1 and inter_ps:
                src = spec.initial_cpts[v.name]
            given = {}
            for p in src.parents:
                if p in static_names:
                    given[p] = full[p]
                elif p in inter_ps:
                    given[p] = full[day_name(p, d - 1)]
                else:
                    given[p] = full[day_name(p, d)]
            product *= float(src.row(given)[v.index(full[day_name(v.name, d)])])
    assert joint_probability(net, full) == pytest.approx(product, rel=1e-12)


def test_state_relabeling_leaves_result_probability_unchanged(chain_spec):
    relabeled = make_chain_spec()
    obs = Variable("obs", ("neg", "pos"))  # permuted labels
    emit = Cpt("obs", obs.states, ("state",), (("yes", "no"),),
               np.array([[0.1, 0.9], [0.8, 0.2]]))
    relabeled = DbnSpec(
        static_slice=relabeled.static_slice,
        slice_template=Network([relabeled.slice_template.variable("state"), obs],
                               [relabeled.slice_template.cpts["state"], emit]),
        initial_cpts=relabeled.initial_cpts,
        inter_slice_arcs=relabeled.inter_slice_arcs,
        bridge_arcs=relabeled.bridge_arcs,
        result_node="state",
    ).check()
    t1 = EvidenceTimeline({}, [{"obs": "pos"}, {"obs": "pos"}])
    for t in (1, 2):
        assert (filter_day(chain_spec, t1, t).prob("yes")
                == pytest.approx(filter_day(relabeled, t1, t).prob("yes"), abs=1e-12))


def test_spec_rejects_unknown_static_result_node():
    spec = small_spec()
    with pytest.raises(InvalidNetworkError):
        DbnSpec(spec.static_slice, spec.slice_template, spec.initial_cpts,
                spec.inter_slice_arcs, spec.bridge_arcs, "r",
                static_result_node="missing").check()


def test_trajectory_day0_entry_for_clinical_spec(ground_truth):
    timeline = EvidenceTimeline({"sex": "male"}, [])
    trace = predict_trajectory(ground_truth, timeline)
    assert trace.days == [0]
    base = posterior(ground_truth.static_slice, "result", {"sex": "male"}).prob("yes")
    assert trace.probability(0) == pytest.approx(base, abs=1e-12)


def test_restrict_timeline_drops_unmodelled_variables(ground_truth):
    timeline = EvidenceTimeline({"sex": "male", "dsj": "3-7d"}, [{"act_1": "yes"}])
    restricted = restrict_timeline(timeline, ground_truth)
    assert "dsj" not in restricted.static_evidence
    assert restricted.static_evidence == {"sex": "male"}
    assert restricted.per_day == [{"act_1": "yes"}]
