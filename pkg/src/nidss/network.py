"""Discrete Bayesian networks: variables, CPTs, validation and JSON i/o.

A `Network` is a directed acyclic graph of categorical variables with one
conditional probability table per variable. Networks are immutable after
construction; inference never mutates them, so any number of readers can
share one instance.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import FormatError, InvalidNetworkError

# In-memory CPT rows must sum to one within this tolerance.
ROW_SUM_TOL = 1e-9
# Files are allowed a looser tolerance (decimal serialisation); rows are
# renormalised on load so the in-memory invariant still holds.
ROW_SUM_TOL_LOAD = 1e-6

# An assignment binds variable names to state labels.
Assignment = dict[str, str]


@dataclass(frozen=True)
class Variable:
    """A categorical variable with a fixed, ordered set of state labels."""

    name: str
    states: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(self.states))
        if not self.name:
            raise ValueError("variable name must be non-empty")
        if len(self.states) < 2:
            raise ValueError(f"variable {self.name!r} needs at least two states")
        if len(set(self.states)) != len(self.states):
            raise ValueError(f"variable {self.name!r} has duplicate state labels")

    @property
    def card(self) -> int:
        return len(self.states)

    def index(self, state: str) -> int:
        try:
            return self.states.index(state)
        except ValueError:
            raise ValueError(
                f"{state!r} is not a state of variable {self.name!r}"
            ) from None


class Cpt:
    """Conditional probability table: one probability row per parent-state combination.

    The table is dense, shaped ``(*parent_cards, child_card)``, with parent
    axes in the declared parent order and rows indexed by parent states in
    their declared order. A CPT is self-contained (it carries the state
    labels of its child and parents) so fragments can reference variables
    defined elsewhere.
    """

    def __init__(self, child, child_states, parents, parent_states, table):
        self.child = child
        self.child_states = tuple(child_states)
        self.parents = tuple(parents)
        self.parent_states = tuple(tuple(s) for s in parent_states)
        if len(self.parents) != len(self.parent_states):
            raise ValueError(f"cpt of {child!r}: parents and parent_states differ in length")
        expected = tuple(len(s) for s in self.parent_states) + (len(self.child_states),)
        table = np.asarray(table, dtype=np.float64).reshape(expected)
        table.setflags(write=False)
        self.table = table

    @classmethod
    def from_rows(cls, child, child_states, parents, parent_states, rows):
        """Build from a mapping of parent-state tuples to probability vectors.

        `rows` must contain exactly one entry per element of the Cartesian
        product of the parent state sets.
        """
        parent_states = [tuple(s) for s in parent_states]
        combos = list(itertools.product(*parent_states))
        if set(rows) != set(combos):
            missing = [c for c in combos if c not in rows]
            extra = [c for c in rows if c not in set(combos)]
            raise ValueError(
                f"cpt of {child!r}: rows do not cover the parent-state product "
                f"(missing {missing[:3]}, extra {extra[:3]})"
            )
        shape = tuple(len(s) for s in parent_states) + (len(tuple(child_states)),)
        table = np.empty(shape, dtype=np.float64)
        for combo in combos:
            idx = tuple(ps.index(s) for ps, s in zip(parent_states, combo))
            table[idx] = np.asarray(rows[combo], dtype=np.float64)
        return cls(child, child_states, parents, parent_states, table)

    def row(self, given: Assignment) -> np.ndarray:
        """Probability vector over the child's states for one parent combination."""
        idx = tuple(
            ps.index(given[p]) for p, ps in zip(self.parents, self.parent_states)
        )
        return self.table[idx]

    def rows(self):
        """Iterate ``(parent_state_tuple, probability_vector)`` in product order."""
        for combo in itertools.product(*self.parent_states):
            idx = tuple(ps.index(s) for ps, s in zip(self.parent_states, combo))
            yield combo, self.table[idx]

    def violations(self, tol: float = ROW_SUM_TOL) -> list[str]:
        out = []
        flat = self.table.reshape(-1, len(self.child_states))
        for i, row in enumerate(flat):
            combo = self._combo_of(i)
            if np.any(row < 0.0) or np.any(row > 1.0):
                out.append(f"cpt of {self.child!r}, row {combo}: entry outside [0, 1]")
            s = float(row.sum())
            if abs(s - 1.0) > tol:
                out.append(f"cpt of {self.child!r}, row {combo}: sums to {s:.12g}")
        return out

    def _combo_of(self, flat_index):
        combo = []
        for ps in reversed(self.parent_states):
            flat_index, r = divmod(flat_index, len(ps))
            combo.append(ps[r])
        return tuple(reversed(combo))

    def renormalized(self) -> "Cpt":
        """Copy with each row divided by its sum (no-op for exact rows)."""
        flat = self.table.reshape(-1, len(self.child_states)).copy()
        sums = flat.sum(axis=1, keepdims=True)
        if np.any(sums <= 0.0):
            raise ValueError(f"cpt of {self.child!r} has a zero-sum row")
        flat = flat / sums
        return Cpt(self.child, self.child_states, self.parents, self.parent_states,
                   flat.reshape(self.table.shape))

    def __eq__(self, other):
        return (
            isinstance(other, Cpt)
            and self.child == other.child
            and self.child_states == other.child_states
            and self.parents == other.parents
            and self.parent_states == other.parent_states
            and np.array_equal(self.table, other.table)
        )

    def __repr__(self):
        return f"Cpt({self.child!r}, parents={list(self.parents)})"


class Network:
    """A set of variables plus one CPT per variable.

    The constructor performs only cheap structural checks; call
    `validate_network` (or load through `load_network`) to enforce the full
    invariant set including acyclicity and row normalisation.
    """

    def __init__(self, variables, cpts):
        self.variables = list(variables)
        names = [v.name for v in self.variables]
        if len(set(names)) != len(names):
            raise ValueError("duplicate variable names in network")
        self._by_name = {v.name: v for v in self.variables}
        if isinstance(cpts, dict):
            cpts = list(cpts.values())
        self.cpts = {c.child: c for c in cpts}
        if len(self.cpts) != len(cpts):
            raise ValueError("duplicate cpt for a child variable")

    def variable(self, name: str) -> Variable:
        try:
            return self._by_name[name]
        except KeyError:
            raise KeyError(f"unknown variable {name!r}") from None

    @property
    def names(self) -> list[str]:
        return [v.name for v in self.variables]

    def parents_of(self, name: str) -> tuple[str, ...]:
        return self.cpts[name].parents

    def topological_order(self) -> list[str]:
        """Variable names ordered parents-before-children; raises on cycles."""
        indeg = {v.name: 0 for v in self.variables}
        children: dict[str, list[str]] = {v.name: [] for v in self.variables}
        for cpt in self.cpts.values():
            if cpt.child not in indeg:
                continue
            for p in cpt.parents:
                # unknown parents are reported by validate_network
                if p in children:
                    children[p].append(cpt.child)
                    indeg[cpt.child] += 1
        ready = sorted(n for n, d in indeg.items() if d == 0)
        order = []
        while ready:
            n = ready.pop(0)
            order.append(n)
            for ch in sorted(children[n]):
                indeg[ch] -= 1
                if indeg[ch] == 0:
                    ready.append(ch)
            ready.sort()
        if len(order) != len(self.variables):
            cyclic = sorted(n for n, d in indeg.items() if d > 0)
            raise InvalidNetworkError([f"cycle through {','.join(cyclic)}"])
        return order

    def log2_state_space(self) -> float:
        return float(sum(np.log2(v.card) for v in self.variables))

    def validate_assignment(self, assignment: Assignment, partial: bool = True):
        """Check bound states exist; with ``partial=False`` require every variable bound."""
        for name, state in assignment.items():
            self.variable(name).index(state)
        if not partial:
            missing = [v.name for v in self.variables if v.name not in assignment]
            if missing:
                from .errors import IncompleteAssignmentError

                raise IncompleteAssignmentError(
                    f"assignment leaves variables unbound: {missing}"
                )


def validate_network(net: Network, tol: float = ROW_SUM_TOL) -> list[str]:
    """Return all invariant violations (empty list means the network is valid).

    Checks: one CPT per variable, parents exist with matching state sets,
    CPT rows in [0, 1] summing to one, and global acyclicity.
    """
    violations = []
    for v in net.variables:
        if v.name not in net.cpts:
            violations.append(f"variable {v.name!r} has no cpt")
    for cpt in net.cpts.values():
        if cpt.child not in net._by_name:
            violations.append(f"cpt child {cpt.child!r} is not a network variable")
            continue
        if cpt.child_states != net.variable(cpt.child).states:
            violations.append(f"cpt of {cpt.child!r}: child states differ from variable states")
        for p, ps in zip(cpt.parents, cpt.parent_states):
            if p not in net._by_name:
                violations.append(f"cpt of {cpt.child!r}: unknown parent {p!r}")
            elif net.variable(p).states != ps:
                violations.append(f"cpt of {cpt.child!r}: parent {p!r} states differ from variable states")
        violations.extend(cpt.violations(tol))
    try:
        net.topological_order()
    except InvalidNetworkError as exc:
        violations.extend(exc.violations)
    return violations


def check_network(net: Network, tol: float = ROW_SUM_TOL) -> Network:
    """Raise `InvalidNetworkError` when the network violates any invariant."""
    violations = validate_network(net, tol)
    if violations:
        raise InvalidNetworkError(violations)
    return net


@dataclass
class Distribution:
    """A normalised probability vector over one variable's states."""

    variable: str
    states: tuple[str, ...]
    probs: np.ndarray

    def __post_init__(self):
        self.states = tuple(self.states)
        self.probs = np.asarray(self.probs, dtype=np.float64)
        if self.probs.shape != (len(self.states),):
            raise ValueError("probs length differs from state count")
        if np.any(self.probs < -1e-12) or abs(float(self.probs.sum()) - 1.0) > ROW_SUM_TOL:
            raise ValueError(f"distribution over {self.variable!r} is not normalised")

    def prob(self, state: str) -> float:
        return float(self.probs[self.states.index(state)])

    def as_dict(self) -> dict[str, float]:
        return {s: float(p) for s, p in zip(self.states, self.probs)}


@dataclass
class Dataset:
    """Complete rows over a fixed column set, ready for parameter fitting."""

    columns: tuple[str, ...]
    rows: list[Assignment] = field(default_factory=list)

    def __post_init__(self):
        self.columns = tuple(self.columns)
        colset = set(self.columns)
        for i, row in enumerate(self.rows):
            missing = colset - set(row)
            if missing:
                raise ValueError(f"row {i} leaves columns unbound: {sorted(missing)}")

    def __len__(self):
        return len(self.rows)


# --- JSON serialisation -----------------------------------------------------
#
# {"variables": [{"name": ..., "states": [...]}],
#  "cpts": [{"child": ..., "parents": [...],
#            "rows": [{"given": {parent: state, ...}, "probs": [...]}]}]}


def network_to_dict(net: Network) -> dict:
    return {
        "variables": [{"name": v.name, "states": list(v.states)} for v in net.variables],
        "cpts": [cpt_to_dict(net.cpts[v.name]) for v in net.variables],
    }


def cpt_to_dict(cpt: Cpt) -> dict:
    rows = [
        {"given": dict(zip(cpt.parents, combo)), "probs": [float(p) for p in probs]}
        for combo, probs in cpt.rows()
    ]
    return {"child": cpt.child, "parents": list(cpt.parents), "rows": rows}


def cpt_from_dict(data: dict, states_of) -> Cpt:
    """Rebuild a CPT; ``states_of(name)`` supplies each variable's state tuple."""
    child = data["child"]
    parents = list(data["parents"])
    parent_states = [tuple(states_of(p)) for p in parents]
    child_states = tuple(states_of(child))
    rows = {}
    for row in data["rows"]:
        given = row["given"]
        if set(given) != set(parents):
            raise FormatError(f"cpt of {child!r}: row 'given' keys differ from parents")
        combo = tuple(given[p] for p in parents)
        rows[combo] = row["probs"]
    return Cpt.from_rows(child, child_states, parents, parent_states, rows)


def network_from_dict(data: dict) -> Network:
    try:
        variables = [Variable(v["name"], tuple(v["states"])) for v in data["variables"]]
        by_name = {v.name: v for v in variables}
        cpts = [cpt_from_dict(c, lambda n: by_name[n].states) for c in data["cpts"]]
    except KeyError as exc:
        raise FormatError(f"network json is missing key {exc}") from None
    net = Network(variables, cpts)
    # Loose row-sum tolerance on load, then renormalise so the in-memory
    # invariant (1e-9) holds exactly.
    violations = validate_network(net, tol=ROW_SUM_TOL_LOAD)
    if violations:
        raise InvalidNetworkError(violations)
    net = Network(variables, [c.renormalized() for c in cpts])
    return check_network(net)


def save_network(net: Network, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(network_to_dict(net), fh, indent=2)
        fh.write("\n")


def load_network(path) -> Network:
    with open(path, encoding="utf-8") as fh:
        return network_from_dict(json.load(fh))
