"""Maximum-likelihood parameter estimation with additive smoothing.

Each CPT entry is estimated as::

    (count(child = s, parents = u) + alpha) / (count(parents = u) + alpha * |child states|)

``alpha = 0`` gives the bare maximum-likelihood estimate; parent
configurations never seen in the data then fall back to a uniform row,
which is flagged in the fit report instead of failing (sparse clinical
data guarantees unseen configurations).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import SchemaMismatchError
from .network import Cpt, Dataset, Network, Variable, check_network


@dataclass
class Structure:
    """A network skeleton: variables plus a parent list per variable."""

    variables: list[Variable]
    parents: dict[str, tuple[str, ...]]

    def __post_init__(self):
        by_name = {v.name: v for v in self.variables}
        for child, ps in self.parents.items():
            if child not in by_name:
                raise ValueError(f"structure parent map names unknown variable {child!r}")
            for p in ps:
                if p not in by_name:
                    raise ValueError(f"structure: unknown parent {p!r} of {child!r}")
        for v in self.variables:
            self.parents.setdefault(v.name, ())

    @classmethod
    def of(cls, net: Network) -> "Structure":
        return cls(list(net.variables), {n: net.parents_of(n) for n in net.names})


@dataclass
class FitReport:
    """What the estimator did: row usage and uniform-row fallbacks."""

    rows_used: dict[str, int] = field(default_factory=dict)
    uniform_rows: list[tuple[str, dict[str, str]]] = field(default_factory=list)
    alpha: float = 0.0

    def merged_with(self, other: "FitReport") -> "FitReport":
        merged = FitReport(dict(self.rows_used), list(self.uniform_rows), self.alpha)
        merged.rows_used.update(other.rows_used)
        merged.uniform_rows.extend(other.uniform_rows)
        return merged


def _encode_column(rows, name, states):
    index = {s: i for i, s in enumerate(states)}
    out = np.full(len(rows), -1, dtype=np.int64)
    for i, row in enumerate(rows):
        value = row.get(name)
        if value is None:
            continue
        code = index.get(value)
        if code is None:
            raise SchemaMismatchError(name, value)
        out[i] = code
    return out


def fit_cpt(child: Variable, parents: list[Variable], rows, alpha: float,
            parent_columns: list[str] | None = None):
    """Estimate one CPT from observation rows (dicts of variable -> state).

    ``parent_columns`` optionally names the row key holding each parent's
    value (used when a variable appears under several roles, e.g. its own
    previous-day copy). Rows missing any value in the CPT's scope are
    skipped. Returns ``(cpt, uniform_parent_combos, rows_used)``.
    """
    if alpha < 0:
        raise ValueError("smoothing pseudo-count alpha must be >= 0")
    if parent_columns is None:
        parent_columns = [p.name for p in parents]
    child_codes = _encode_column(rows, child.name, child.states)
    parent_codes = [
        _encode_column(rows, col, p.states) for p, col in zip(parents, parent_columns)
    ]
    mask = child_codes >= 0
    for pc in parent_codes:
        mask &= pc >= 0
    n_used = int(mask.sum())
    card = child.card
    n_cfg = 1
    for p in parents:
        n_cfg *= p.card
    cfg = np.zeros(n_used, dtype=np.int64)
    for p, pc in zip(parents, parent_codes):
        cfg = cfg * p.card + pc[mask]
    counts = np.bincount(cfg * card + child_codes[mask], minlength=n_cfg * card)
    counts = counts.reshape(n_cfg, card).astype(np.float64)
    row_totals = counts.sum(axis=1, keepdims=True)
    uniform = []
    if alpha > 0:
        table = (counts + alpha) / (row_totals + alpha * card)
    else:
        table = np.empty_like(counts)
        with np.errstate(invalid="ignore"):
            table = counts / np.where(row_totals == 0.0, 1.0, row_totals)
        for r in np.flatnonzero(row_totals[:, 0] == 0.0):
            table[r] = 1.0 / card
            uniform.append(int(r))
    cpt = Cpt(
        child.name,
        child.states,
        tuple(p.name for p in parents),
        tuple(p.states for p in parents),
        table.reshape(tuple(p.card for p in parents) + (card,)),
    )
    uniform_combos = [cpt._combo_of(r) for r in uniform]
    given = [dict(zip(cpt.parents, combo)) for combo in uniform_combos]
    return cpt, given, n_used


def fit_parameters(structure: Structure | Network, data: Dataset, alpha: float = 1.0):
    """Fit every CPT of a structure from complete data rows.

    Accepts either a `Structure` or an existing `Network` (whose
    probabilities are ignored). Returns ``(network, fit_report)``.
    """
    if isinstance(structure, Network):
        structure = Structure.of(structure)
    by_name = {v.name: v for v in structure.variables}
    missing = [v.name for v in structure.variables if v.name not in data.columns]
    if missing:
        raise SchemaMismatchError(missing[0], None,
                                  f"data columns do not cover variables: {missing}")
    report = FitReport(alpha=alpha)
    cpts = []
    for v in structure.variables:
        parents = [by_name[p] for p in structure.parents[v.name]]
        cpt, uniform_given, used = fit_cpt(v, parents, data.rows, alpha)
        cpts.append(cpt)
        report.rows_used[v.name] = used
        report.uniform_rows.extend((v.name, g) for g in uniform_given)
    return check_network(Network(structure.variables, cpts)), report
