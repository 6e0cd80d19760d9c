"""Exact inference on discrete networks.

Two independent routes compute the same posteriors:

* brute-force enumeration over the full joint table (the reference path,
  refused above `MAX_ENUM_LOG2` joint states), and
* variable elimination with a greedy min-degree ordering (the fast path).

Probabilities returned to callers are always linear-scale in [0, 1];
elimination rescales intermediate factors so long products cannot
underflow, which keeps "evidence is impossible" an exact-zero condition.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import (
    EnumerationLimitError,
    ImpossibleEvidenceError,
    IncompleteAssignmentError,
)
from .network import Assignment, Distribution, Network

# Brute force refuses joint state spaces above 2**22.
MAX_ENUM_LOG2 = 22


def joint_probability(net: Network, full: Assignment) -> float:
    """Probability of one complete assignment: the product of its CPT entries.

    Factors multiply in sorted-name order, so permuting a network's
    variable list never changes the returned value, not even in the last
    bit.
    """
    missing = [v.name for v in net.variables if v.name not in full]
    if missing:
        raise IncompleteAssignmentError(f"assignment leaves variables unbound: {missing}")
    net.validate_assignment(full)
    p = 1.0
    for name in sorted(net.names):
        cpt = net.cpts[name]
        row = cpt.row({q: full[q] for q in cpt.parents})
        p *= float(row[net.variable(name).index(full[name])])
    return p


# --- packed form shared by both routes ---------------------------------------


class _Packed:
    def __init__(self, net: Network):
        self.names = net.names
        self.index = {n: i for i, n in enumerate(self.names)}
        cards = [net.variable(n).card for n in self.names]
        axes, tables = [], []
        for n in self.names:
            cpt = net.cpts[n]
            axes.append([self.index[p] for p in cpt.parents] + [self.index[n]])
            tables.append(cpt.table)
        (self.cards, self.axes_flat, self.axes_off,
         self.tables_flat, self.tab_off) = _kernels.pack_tables(cards, axes, tables)
        self.topo = np.asarray([self.index[n] for n in net.topological_order()], dtype=np.int64)

    def codes(self, assignment: Assignment, net: Network) -> dict[int, int]:
        return {self.index[k]: net.variable(k).index(v) for k, v in assignment.items()}


def _pack(net: Network) -> _Packed:
    cached = getattr(net, "_packed", None)
    if cached is None:
        cached = _Packed(net)
        net._packed = cached
    return cached


def joint_table(net: Network) -> np.ndarray:
    """Full joint table over all variables, axes in `net.names` order."""
    if net.log2_state_space() > MAX_ENUM_LOG2:
        raise EnumerationLimitError(
            f"joint state space exceeds 2**{MAX_ENUM_LOG2}; enumeration refused"
        )
    p = _pack(net)
    return _kernels.joint_table(p.cards, p.axes_flat, p.axes_off, p.tables_flat, p.tab_off)


def _posterior_enumeration(net, query_names, evidence):
    p = _pack(net)
    joint = joint_table(net)
    indexer = [slice(None)] * len(p.names)
    for i, code in p.codes(evidence, net).items():
        indexer[i] = code
    reduced = joint[tuple(indexer)]
    kept = [n for n in p.names if n not in evidence]
    keep_axes = tuple(kept.index(q) for q in query_names)
    sum_axes = tuple(i for i in range(len(kept)) if i not in keep_axes)
    table = reduced.sum(axis=sum_axes) if sum_axes else reduced
    table = np.transpose(table, np.argsort(np.argsort(keep_axes))) if len(query_names) > 1 else table
    z = float(table.sum())
    if z == 0.0:
        raise ImpossibleEvidenceError("evidence has probability zero under the model")
    return table / z


# --- variable elimination -----------------------------------------------------


@dataclass
class Factor:
    """A nonnegative table over a sorted tuple of variable indices."""

    vars: tuple[int, ...]
    table: np.ndarray


def factor_product(a: Factor, b: Factor, cards) -> Factor:
    union = tuple(sorted(set(a.vars) | set(b.vars)))
    def expand(f):
        shape = [1] * len(union)
        for v, size in zip(f.vars, f.table.shape):
            shape[union.index(v)] = size
        # f.vars is sorted, so axes already align once singleton axes are added
        return f.table.reshape(shape)
    return Factor(union, expand(a) * expand(b))


def factor_marginalize(f: Factor, var: int) -> Factor:
    ax = f.vars.index(var)
    return Factor(tuple(v for v in f.vars if v != var), f.table.sum(axis=ax))


def factor_reduce(f: Factor, var: int, code: int) -> Factor:
    ax = f.vars.index(var)
    return Factor(tuple(v for v in f.vars if v != var), np.take(f.table, code, axis=ax))


def _min_degree_order(scopes, hidden):
    """Greedy elimination order: repeatedly pick the variable with the
    smallest connected-neighbour set in the current factor graph."""
    neighbours = {h: set() for h in hidden}
    live = [set(s) for s in scopes]
    for s in live:
        for v in s:
            if v in neighbours:
                neighbours[v] |= s - {v}
    order = []
    remaining = set(hidden)
    while remaining:
        v = min(remaining, key=lambda x: (len(neighbours[x] & remaining), x))
        order.append(v)
        remaining.discard(v)
        merged = (neighbours[v] & remaining)
        for u in merged:
            neighbours[u] |= merged - {u}
    return order


def eliminate(factors: list[Factor], cards, query_vars, hidden) -> np.ndarray:
    """Sum out `hidden` from the factor product; return the unnormalised
    table over `query_vars` (sorted order) times an implicit positive scale.

    Each intermediate factor is rescaled by its maximum, so a zero result
    means the evidence is structurally impossible, not underflow.
    """
    factors = list(factors)
    for v in _min_degree_order([f.vars for f in factors], hidden):
        touching = [f for f in factors if v in f.vars]
        rest = [f for f in factors if v not in f.vars]
        if not touching:
            continue
        prod = touching[0]
        for f in touching[1:]:
            prod = factor_product(f, prod, cards)
        new = factor_marginalize(prod, v)
        m = float(new.table.max()) if new.table.size else 0.0
        if m == 0.0:
            raise ImpossibleEvidenceError("evidence has probability zero under the model")
        factors = rest + [Factor(new.vars, new.table / m)]
    result = Factor((), np.array(1.0))
    for f in factors:
        result = factor_product(result, f, cards)
    order = tuple(sorted(query_vars))
    missing = [v for v in order if v not in result.vars]
    if missing:
        # query variable dropped out (it was disconnected): uniform over it
        for v in missing:
            result = factor_product(result, Factor((v,), np.ones(int(cards[v]))), cards)
    return result.table


def _posterior_ve(net, query_names, evidence):
    p = _pack(net)
    ev = p.codes(evidence, net)
    query_set = {p.index[q] for q in query_names}

    # barren-node pruning: an unobserved non-query variable with no kept
    # children integrates to one and can be dropped outright (exactly)
    keep = set(range(len(p.names)))
    parents_of = {
        v: [int(a) for a in p.axes_flat[p.axes_off[v]:p.axes_off[v + 1] - 1]]
        for v in range(len(p.names))
    }
    while True:
        referenced = set()
        for v in keep:
            referenced.update(parents_of[v])
        barren = [
            v for v in keep
            if v not in ev and v not in query_set and v not in referenced
        ]
        if not barren:
            break
        keep.difference_update(barren)

    factors = []
    for v in sorted(keep):
        axes = tuple(int(a) for a in p.axes_flat[p.axes_off[v]:p.axes_off[v + 1]])
        shape = tuple(int(p.cards[a]) for a in axes)
        table = p.tables_flat[p.tab_off[v]:p.tab_off[v + 1]].reshape(shape)
        order = np.argsort(axes, kind="stable")
        f = Factor(tuple(sorted(axes)), np.transpose(table, tuple(order)))
        for var, code in ev.items():
            if var in f.vars:
                f = factor_reduce(f, var, code)
        if not f.vars:
            if float(f.table) == 0.0:
                raise ImpossibleEvidenceError("evidence has probability zero under the model")
            continue  # positive scalar: only scales the normaliser
        factors.append(f)
    query_vars = [p.index[q] for q in query_names]
    hidden = [i for i in sorted(keep) if i not in ev and i not in query_set]
    table = eliminate(factors, p.cards, query_vars, hidden)
    # axes of `table` follow sorted query order; restore requested order
    sorted_q = sorted(query_vars)
    perm = tuple(sorted_q.index(v) for v in query_vars)
    table = np.transpose(table, perm) if len(query_vars) > 1 else table
    z = float(table.sum())
    if z == 0.0:
        raise ImpossibleEvidenceError("evidence has probability zero under the model")
    return table / z


def posterior(net: Network, query: str, evidence: Assignment | None = None,
              method: str = "auto") -> Distribution:
    """Exact conditional distribution P(query | evidence).

    ``method``: ``"ve"`` (default under ``"auto"``) or ``"enumeration"``
    for the brute-force reference path.
    """
    evidence = dict(evidence or {})
    if query in evidence:
        raise ValueError(f"query variable {query!r} is bound in the evidence")
    net.validate_assignment(evidence)
    var = net.variable(query)
    if method in ("auto", "ve"):
        probs = _posterior_ve(net, [query], evidence)
    elif method == "enumeration":
        probs = _posterior_enumeration(net, [query], evidence)
    else:
        raise ValueError(f"unknown inference method {method!r}")
    return Distribution(query, var.states, probs)


def posterior_joint(net: Network, queries: list[str], evidence: Assignment | None = None,
                    method: str = "auto") -> tuple[list[str], np.ndarray]:
    """Joint posterior over several query variables, axes in `queries` order."""
    evidence = dict(evidence or {})
    for q in queries:
        if q in evidence:
            raise ValueError(f"query variable {q!r} is bound in the evidence")
    net.validate_assignment(evidence)
    if method in ("auto", "ve"):
        table = _posterior_ve(net, queries, evidence)
    elif method == "enumeration":
        table = _posterior_enumeration(net, queries, evidence)
    else:
        raise ValueError(f"unknown inference method {method!r}")
    return list(queries), table
