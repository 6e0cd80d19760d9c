"""Default model structures over the clinical schema.

The default static slice treats the stay-level infection class as the root
and every other admission attribute as its child (the conditional form
P(attribute | class)). The default temporal slice hangs each daily
measurement off the per-day infection node, which carries the only
slice-to-slice arc plus a bridge from the static class; the day-1 copy is
seeded from the static class alone. The derived stay-length variable stays
out of the default structure (its value is fixed by the simulated stay,
not by the model).
"""

from __future__ import annotations

import numpy as np

from .clinical import ClinicalSchema
from .dbn import DbnSpec
from .network import Cpt, Network, Variable


def _uniform_cpt(child: Variable, parents: list[Variable]) -> Cpt:
    shape = tuple(p.card for p in parents) + (child.card,)
    table = np.full(shape, 1.0 / child.card)
    return Cpt(child.name, child.states, tuple(p.name for p in parents),
               tuple(p.states for p in parents), table)


def _structure_parts(schema: ClinicalSchema):
    result = schema.fixed(schema.result_fixed)
    statics = [v for v in schema.fixed_variables if v.name != "dsj"]
    attrs = [v for v in statics if v.name != result.name]
    result_t = schema.temporal(schema.result_temporal)
    obs = [v for v in schema.temporal_variables if v.name != result_t.name]
    return result, statics, attrs, result_t, obs


def default_structure(schema: ClinicalSchema) -> DbnSpec:
    """Structure-only spec (uniform probabilities) for parameter fitting."""
    result, statics, attrs, result_t, obs = _structure_parts(schema)
    static_cpts = [_uniform_cpt(result, [])]
    static_cpts += [_uniform_cpt(v, [result]) for v in attrs]
    template_cpts = [_uniform_cpt(result_t, [result, result_t])]
    template_cpts += [_uniform_cpt(v, [result_t]) for v in obs]
    return DbnSpec(
        static_slice=Network(statics, static_cpts),
        slice_template=Network([result_t] + obs, template_cpts),
        initial_cpts={result_t.name: _uniform_cpt(result_t, [result])},
        inter_slice_arcs=[(result_t.name, result_t.name)],
        bridge_arcs=[(result.name, result_t.name)],
        result_node=result_t.name,
        static_result_node=result.name,
    ).check()


def _attr_row(n_states: int, attr_index: int, class_index: int) -> list[float]:
    weights = [
        1.0 + ((i + 1) * (attr_index + 2) + 3 * class_index) % 5
        for i in range(n_states)
    ]
    total = sum(weights)
    return [w / total for w in weights]


def default_ground_truth(schema: ClinicalSchema) -> DbnSpec:
    """A fully specified model used as the cohort simulator's ground truth.

    Daily measurements are moderately informative about the infection
    state; the infection, once present, persists for the rest of the stay.
    """
    result, statics, attrs, result_t, obs = _structure_parts(schema)
    yes, no = result.states.index("yes"), result.states.index("no")

    static_cpts = [Cpt(result.name, result.states, (), (), np.array([0.3, 0.7]))]
    for j, v in enumerate(attrs):
        table = np.stack([_attr_row(v.card, j, 0), _attr_row(v.card, j, 1)])
        static_cpts.append(Cpt(v.name, v.states, (result.name,), (result.states,), table))

    def yn_row(p_yes):
        return [p_yes, 1.0 - p_yes]

    # transition table axes: (static class, previous day, today)
    trans = np.zeros((2, 2, 2))
    trans[yes, yes] = yn_row(1.0)     # infection persists
    trans[yes, no] = yn_row(0.16)
    trans[no, yes] = yn_row(1.0)
    trans[no, no] = yn_row(0.015)
    template_cpts = [Cpt(result_t.name, result_t.states,
                         (result.name, result_t.name),
                         (result.states, result_t.states), trans)]
    init = np.zeros((2, 2))
    init[yes] = yn_row(0.28)
    init[no] = yn_row(0.03)
    initial = Cpt(result_t.name, result_t.states, (result.name,), (result.states,), init)

    for k, v in enumerate(obs):
        if v.card == 2:
            p_ni = 0.25 + 0.03 * ((k * 7) % 11)     # in [0.25, 0.55]
            p_clear = 0.06 + 0.02 * ((k * 5) % 10)  # in [0.06, 0.24]
            table = np.array([yn_row(p_ni), yn_row(p_clear)])
        else:
            base = np.array([
                [1.5 + ((k + i) % 3) for i in range(v.card)],
                [1.0 + ((2 * k + i) % 4) for i in range(v.card)],
            ])
            table = base / base.sum(axis=1, keepdims=True)
        template_cpts.append(Cpt(v.name, v.states, (result_t.name,),
                                 (result_t.states,), table))

    return DbnSpec(
        static_slice=Network(statics, static_cpts),
        slice_template=Network([result_t] + obs, template_cpts),
        initial_cpts={result_t.name: initial},
        inter_slice_arcs=[(result_t.name, result_t.name)],
        bridge_arcs=[(result.name, result_t.name)],
        result_node=result_t.name,
        static_result_node=result.name,
    ).check()
