"""Two-part dynamic Bayesian networks and exact per-day filtering.

A `DbnSpec` couples a static network (admission-time variables, evaluated
once) with a temporal slice template replicated for every hospital day.
Arcs between consecutive slices make the process first-order Markov; bridge
arcs tie static variables into every slice. `unroll` flattens the spec into
an ordinary network with day-suffixed names (``var@3``), and `filter_day`
computes P(result at day t | evidence through day t) either by a forward
recursion over the result chain or by variable elimination on the unrolled
network; both routes are exact and must agree.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    EnumerationLimitError,
    FormatError,
    ImpossibleEvidenceError,
    InvalidNetworkError,
    SchemaMismatchError,
)
from .inference import MAX_ENUM_LOG2, posterior, posterior_joint
from .learning import FitReport, Structure, fit_cpt, fit_parameters
from .network import (
    ROW_SUM_TOL_LOAD,
    Assignment,
    Cpt,
    Dataset,
    Distribution,
    Network,
    Variable,
    check_network,
    cpt_from_dict,
    cpt_to_dict,
    network_from_dict,
    network_to_dict,
    validate_network,
)

DAY_SEP = "@"
RESULT_STATES = ("yes", "no")


def day_name(name: str, day: int) -> str:
    return f"{name}{DAY_SEP}{day}"


@dataclass
class DbnSpec:
    """Static slice, slice template, and the arcs that stitch them together.

    Template CPT parent names are interpreted against the declared arcs: a
    parent named in ``inter_slice_arcs`` for that child refers to the
    previous day's copy, a static parent must be declared in
    ``bridge_arcs``, and every other parent is the same-day copy. Variables
    with a previous-day parent need a separate initial CPT for day 1 (same
    parents minus the previous-day ones).
    """

    static_slice: Network
    slice_template: Network
    initial_cpts: dict[str, Cpt]
    inter_slice_arcs: list[tuple[str, str]]
    bridge_arcs: list[tuple[str, str]]
    result_node: str
    static_result_node: str | None = None

    def __post_init__(self):
        self.inter_slice_arcs = [tuple(a) for a in self.inter_slice_arcs]
        self.bridge_arcs = [tuple(a) for a in self.bridge_arcs]

    # -- structure helpers -----------------------------------------------

    def inter_parents(self, child: str) -> set[str]:
        return {p for p, c in self.inter_slice_arcs if c == child}

    def bridge_parents(self, child: str) -> set[str]:
        return {p for p, c in self.bridge_arcs if c == child}

    def resolve_static_result(self) -> str | None:
        """Static counterpart of the result node (admission-time class)."""
        if self.static_result_node is not None:
            return self.static_result_node
        for v in self.static_slice.variables:
            if v.name == "result" and "yes" in v.states:
                return v.name
        return None

    # -- validation --------------------------------------------------------

    def validate(self) -> list[str]:
        out = list(validate_network(self.static_slice))
        static_names = set(self.static_slice.names)
        template_names = set(self.slice_template.names)
        overlap = static_names & template_names
        if overlap:
            out.append(f"static and temporal variables share names: {sorted(overlap)}")
        for name in itertools.chain(static_names, template_names):
            if DAY_SEP in name:
                out.append(f"variable name {name!r} contains reserved character {DAY_SEP!r}")
        if self.result_node not in template_names:
            out.append(f"result node {self.result_node!r} is not a temporal variable")
        elif set(self.slice_template.variable(self.result_node).states) != set(RESULT_STATES):
            out.append(f"result node {self.result_node!r} must have states yes/no")
        srn = self.static_result_node
        if srn is not None and srn not in static_names:
            out.append(f"static result node {srn!r} is not a static variable")

        for p, c in self.inter_slice_arcs:
            if p not in template_names or c not in template_names:
                out.append(f"inter-slice arc ({p!r}, {c!r}) must join temporal variables")
        for s, c in self.bridge_arcs:
            if s not in static_names:
                out.append(f"bridge arc source {s!r} is not a static variable")
            if c not in template_names:
                out.append(f"bridge arc target {c!r} is not a temporal variable")
        if len(set(self.inter_slice_arcs)) != len(self.inter_slice_arcs):
            out.append("duplicate inter-slice arcs")
        if len(set(self.bridge_arcs)) != len(self.bridge_arcs):
            out.append("duplicate bridge arcs")

        intra: dict[str, list[str]] = {}
        for v in self.slice_template.variables:
            cpt = self.slice_template.cpts.get(v.name)
            if cpt is None:
                out.append(f"temporal variable {v.name!r} has no cpt")
                continue
            if cpt.child_states != v.states:
                out.append(f"cpt of {v.name!r}: child states differ from variable states")
            if len(set(cpt.parents)) != len(cpt.parents):
                out.append(f"cpt of {v.name!r}: duplicate parent names")
            inter_ps = self.inter_parents(v.name)
            bridge_ps = self.bridge_parents(v.name)
            intra[v.name] = []
            for p, ps in zip(cpt.parents, cpt.parent_states):
                if p in static_names:
                    if p not in bridge_ps:
                        out.append(f"cpt of {v.name!r}: static parent {p!r} lacks a bridge arc")
                    ref = self.static_slice.variable(p).states
                elif p in template_names:
                    if p not in inter_ps:
                        intra[v.name].append(p)
                    ref = self.slice_template.variable(p).states
                else:
                    out.append(f"cpt of {v.name!r}: unknown parent {p!r}")
                    continue
                if ps != ref:
                    out.append(f"cpt of {v.name!r}: parent {p!r} states differ from variable states")
            for p in inter_ps:
                if p not in cpt.parents:
                    out.append(f"inter-slice arc ({p!r}, {v.name!r}) declared but absent from the cpt")
            for s in bridge_ps:
                if s not in cpt.parents:
                    out.append(f"bridge arc ({s!r}, {v.name!r}) declared but absent from the cpt")
            out.extend(cpt.violations())

            init = self.initial_cpts.get(v.name)
            if inter_ps:
                expected = tuple(p for p in cpt.parents if p not in inter_ps)
                if init is None:
                    out.append(f"temporal variable {v.name!r} needs an initial cpt for day 1")
                else:
                    if init.parents != expected:
                        out.append(
                            f"initial cpt of {v.name!r}: parents {list(init.parents)} differ "
                            f"from the non-temporal transition parents {list(expected)}"
                        )
                    if init.child_states != v.states:
                        out.append(f"initial cpt of {v.name!r}: child states differ")
                    out.extend(f"initial {msg}" for msg in init.violations())
            elif init is not None:
                out.append(f"initial cpt given for {v.name!r}, which has no previous-day parent")

        # same-day parent graph must be acyclic (previous-day arcs always
        # point forward in time and can never close a cycle)
        seen: set[str] = set()
        visiting: set[str] = set()

        def visit(node):
            if node in seen:
                return True
            if node in visiting:
                return False
            visiting.add(node)
            ok = all(visit(p) for p in intra.get(node, []))
            visiting.discard(node)
            seen.add(node)
            return ok

        for name in sorted(intra):
            if not visit(name):
                out.append(f"same-day parent cycle through {name!r}")
                break
        return out

    def check(self) -> "DbnSpec":
        violations = self.validate()
        if violations:
            raise InvalidNetworkError(violations)
        return self


def unroll(spec: DbnSpec, T: int) -> Network:
    """Flatten the spec into one network: statics once, T day copies.

    Day-1 variables whose previous-day parent does not exist use their
    initial CPT; later days use the transition CPT with parents renamed to
    the proper day copies.
    """
    if T < 1:
        raise ValueError("day count T must be >= 1")
    variables = list(spec.static_slice.variables)
    cpts = [spec.static_slice.cpts[v.name] for v in spec.static_slice.variables]
    static_names = set(spec.static_slice.names)
    for d in range(1, T + 1):
        for v in spec.slice_template.variables:
            variables.append(Variable(day_name(v.name, d), v.states))
            inter_ps = spec.inter_parents(v.name)
            src = spec.slice_template.cpts[v.name]
            if d == 1 and inter_ps:
                src = spec.initial_cpts[v.name]
            renamed = []
            for p in src.parents:
                if p in static_names:
                    renamed.append(p)
                elif p in inter_ps:
                    renamed.append(day_name(p, d - 1))
                else:
                    renamed.append(day_name(p, d))
            cpts.append(Cpt(day_name(v.name, d), src.child_states, renamed,
                            src.parent_states, src.table))
    return check_network(Network(variables, cpts))


@dataclass
class EvidenceTimeline:
    """Admission evidence plus one (possibly partial) observation set per day."""

    static_evidence: Assignment = field(default_factory=dict)
    per_day: list[Assignment] = field(default_factory=list)

    @property
    def n_days(self) -> int:
        return len(self.per_day)

    def day(self, d: int) -> Assignment:
        return self.per_day[d - 1]

    def prefix(self, t: int) -> "EvidenceTimeline":
        return EvidenceTimeline(dict(self.static_evidence), [dict(x) for x in self.per_day[:t]])

    def check(self, spec: DbnSpec) -> "EvidenceTimeline":
        for name, state in self.static_evidence.items():
            spec.static_slice.variable(name).index(state)
        for i, day in enumerate(self.per_day, start=1):
            for name, state in day.items():
                if name == spec.result_node:
                    raise ValueError(
                        f"day {i} binds the result node {name!r}; it is the query, never evidence"
                    )
                spec.slice_template.variable(name).index(state)
        return self


def restrict_timeline(timeline: EvidenceTimeline, spec: DbnSpec) -> EvidenceTimeline:
    """Drop bindings of variables the spec does not model (e.g. derived
    schema variables absent from the default structure)."""
    static_names = set(spec.static_slice.names)
    template_names = set(spec.slice_template.names) - {spec.result_node}
    return EvidenceTimeline(
        {k: v for k, v in timeline.static_evidence.items() if k in static_names},
        [{k: v for k, v in day.items() if k in template_names} for day in timeline.per_day],
    )


@dataclass
class PredictionTrace:
    """Per-day infection probabilities, one entry per evidenced day.

    A day-0 entry carries the admission-time (static model) baseline when
    the spec names a static result variable.
    """

    entries: list[tuple[int, float]] = field(default_factory=list)

    @property
    def days(self) -> list[int]:
        return [d for d, _ in self.entries]

    def probability(self, day: int) -> float:
        for d, p in self.entries:
            if d == day:
                return p
        raise KeyError(f"no trace entry for day {day}")

    def as_dicts(self) -> list[dict]:
        return [{"day": d, "probability": p} for d, p in self.entries]


# --- filtering ---------------------------------------------------------------


def _forward_eligible(spec: DbnSpec) -> bool:
    """The forward recursion applies when the result node forms the only
    temporal chain and every other temporal variable hangs off the result
    and static bridges alone."""
    r = spec.result_node
    if any(arc != (r, r) for arc in spec.inter_slice_arcs):
        return False
    static_names = set(spec.static_slice.names)
    for v in spec.slice_template.variables:
        cpt = spec.slice_template.cpts[v.name]
        if v.name == r:
            allowed = static_names | ({r} if (r, r) in spec.inter_slice_arcs else set())
        else:
            allowed = static_names | {r}
        if any(p not in allowed for p in cpt.parents):
            return False
    return True


def _unrolled_evidence(spec: DbnSpec, timeline: EvidenceTimeline, t: int) -> Assignment:
    ev = dict(timeline.static_evidence)
    for d in range(1, t + 1):
        for name, state in timeline.day(d).items():
            ev[day_name(name, d)] = state
    return ev


def _filter_forward(spec: DbnSpec, timeline: EvidenceTimeline, t: int) -> np.ndarray:
    r = spec.result_node
    r_var = spec.slice_template.variable(r)
    r_card = r_var.card
    trans = spec.slice_template.cpts[r]
    has_prev = r in spec.inter_parents(r)
    init = spec.initial_cpts[r] if has_prev else trans

    # static variables that couple the days: parents of the result CPTs
    # plus parents of every observed temporal variable
    static_names = set(spec.static_slice.names)
    coupled = {p for p in trans.parents if p in static_names}
    coupled |= {p for p in init.parents if p in static_names}
    for d in range(1, t + 1):
        for name in timeline.day(d):
            coupled |= {p for p in spec.slice_template.cpts[name].parents if p in static_names}
    u_names = sorted(coupled)

    # coupling statics observed at admission are pinned; the rest carry the
    # static posterior as a weight (this call also rejects impossible
    # static evidence)
    evidence = timeline.static_evidence
    free = [n for n in u_names if n not in evidence]
    _, w_free = posterior_joint(spec.static_slice, free, evidence)
    choices = []
    for n in u_names:
        states = spec.static_slice.variable(n).states
        choices.append((evidence[n],) if n in evidence else states)

    def weight(combo):
        idx = tuple(
            spec.static_slice.variable(n).index(combo[i])
            for i, n in enumerate(u_names) if n in free
        )
        return float(w_free[idx]) if free else float(w_free)

    def rows_for(cpt, u_combo, result_state=None):
        given = {}
        for p in cpt.parents:
            if p in u_names:
                given[p] = u_combo[u_names.index(p)]
            elif p == r and result_state is not None:
                given[p] = result_state
        return cpt.row(given)

    def emission(d, u_combo):
        like = np.ones(r_card)
        for name, state in timeline.day(d).items():
            cpt = spec.slice_template.cpts[name]
            code = spec.slice_template.variable(name).index(state)
            if r in cpt.parents:
                for k, rs in enumerate(r_var.states):
                    like[k] *= float(rows_for(cpt, u_combo, rs)[code])
            else:
                like *= float(rows_for(cpt, u_combo)[code])
        return like

    combos = list(itertools.product(*choices)) if u_names else [()]
    alpha = np.zeros((len(combos), r_card))
    for i, u_combo in enumerate(combos):
        alpha[i] = weight(u_combo) * rows_for(init, u_combo) * emission(1, u_combo)
    total = float(alpha.sum())
    if total == 0.0:
        raise ImpossibleEvidenceError("evidence has probability zero under the model")
    alpha /= total

    for d in range(2, t + 1):
        new = np.zeros_like(alpha)
        for i, u_combo in enumerate(combos):
            if has_prev:
                predicted = np.zeros(r_card)
                for j, prev in enumerate(r_var.states):
                    predicted += alpha[i, j] * rows_for(trans, u_combo, prev)
            else:
                predicted = float(alpha[i].sum()) * rows_for(trans, u_combo)
            new[i] = predicted * emission(d, u_combo)
        total = float(new.sum())
        if total == 0.0:
            raise ImpossibleEvidenceError("evidence has probability zero under the model")
        alpha = new / total

    probs = alpha.sum(axis=0)
    return probs / probs.sum()


def filter_day(spec: DbnSpec, timeline: EvidenceTimeline, t: int,
               engine: str = "auto") -> Distribution:
    """Exact P(result at day t | static evidence, day evidence through t).

    ``engine``: ``"auto"`` picks the forward recursion when the structure
    allows it and falls back to variable elimination on the unrolled
    network; ``"forward"``, ``"unrolled"`` and ``"enumeration"`` force a
    specific route.
    """
    timeline.check(spec)
    if not 1 <= t <= timeline.n_days:
        raise IndexError(f"day {t} outside the evidenced range 1..{timeline.n_days}")
    states = spec.slice_template.variable(spec.result_node).states
    if engine == "auto":
        engine = "forward" if _forward_eligible(spec) else "unrolled"
    if engine == "forward":
        if not _forward_eligible(spec):
            raise ValueError("spec structure does not admit the forward recursion")
        return Distribution(day_name(spec.result_node, t), states, _filter_forward(spec, timeline, t))
    if engine in ("unrolled", "enumeration"):
        net = unroll(spec, t)
        ev = _unrolled_evidence(spec, timeline, t)
        method = "enumeration" if engine == "enumeration" else "ve"
        return posterior(net, day_name(spec.result_node, t), ev, method=method)
    raise ValueError(f"unknown filtering engine {engine!r}")


def admission_baseline(spec: DbnSpec, static_evidence: Assignment) -> float:
    """Admission-time probability that the result is "yes".

    Uses the static result node when the spec has one; otherwise the
    prior-predictive day-1 marginal of the result node given the statics.
    """
    srn = spec.resolve_static_result()
    if srn is not None:
        return posterior(spec.static_slice, srn, static_evidence).prob("yes")
    net = unroll(spec, 1)
    return posterior(net, day_name(spec.result_node, 1), dict(static_evidence)).prob("yes")


def predict_trajectory(spec: DbnSpec, timeline: EvidenceTimeline,
                       engine: str = "auto") -> PredictionTrace:
    """Incremental per-day risk: entry i conditions on evidence through day
    i only, so extending the timeline never changes earlier entries."""
    timeline.check(spec)
    entries: list[tuple[int, float]] = []
    if spec.resolve_static_result() is not None:
        entries.append((0, admission_baseline(spec, timeline.static_evidence)))
    for t in range(1, timeline.n_days + 1):
        entries.append((t, filter_day(spec, timeline, t, engine=engine).prob("yes")))
    return PredictionTrace(entries)


def forward_equals_unrolled(spec: DbnSpec, timeline: EvidenceTimeline) -> dict:
    """Consistency oracle: run two independent exact routes over every day
    and report the maximum absolute deviation of the result posterior."""
    timeline.check(spec)
    fast = "forward" if _forward_eligible(spec) else "unrolled"
    per_day = []
    max_dev = 0.0
    for t in range(1, timeline.n_days + 1):
        net = unroll(spec, t)
        reference = "enumeration" if net.log2_state_space() <= MAX_ENUM_LOG2 else "unrolled"
        if reference == "unrolled" and fast == "unrolled":
            raise EnumerationLimitError(
                "no independent route pair: structure rules out the forward "
                "recursion and the state space rules out enumeration"
            )
        a = filter_day(spec, timeline, t, engine=fast)
        b = filter_day(spec, timeline, t, engine=reference)
        dev = float(np.max(np.abs(a.probs - b.probs)))
        per_day.append({"day": t, "deviation": dev, "fast": fast, "reference": reference})
        max_dev = max(max_dev, dev)
    return {"max_abs_deviation": max_dev, "per_day": per_day}


# --- parameter fitting over a whole spec --------------------------------------


def fit_dbn(structure: DbnSpec, static_rows: list[Assignment],
            slice_rows: list[dict], alpha: float = 1.0) -> tuple[DbnSpec, FitReport]:
    """Fit every CPT of a spec structure (its probability values are ignored).

    ``static_rows`` hold one assignment per patient over the static
    variables. ``slice_rows`` hold one row per (patient, day) with the
    day's temporal values, the patient's static values, a ``"day"`` index,
    and previous-day values under ``"prev:<name>"`` keys. Rows missing a
    value in a CPT's scope are skipped for that CPT.
    """
    static_cols = tuple(structure.static_slice.names)
    static_net, report = fit_parameters(
        Structure.of(structure.static_slice),
        Dataset(static_cols, [{k: r[k] for k in static_cols} for r in static_rows]),
        alpha,
    )
    report.alpha = alpha

    template_vars = list(structure.slice_template.variables)
    lookup: dict[str, object] = {v.name: v for v in template_vars}
    lookup.update({v.name: v for v in structure.static_slice.variables})

    trans_cpts = []
    initial_cpts: dict[str, Cpt] = {}
    for v in template_vars:
        cpt = structure.slice_template.cpts[v.name]
        inter_ps = structure.inter_parents(v.name)
        parents = [lookup[p] for p in cpt.parents]
        columns = [f"prev:{p}" if p in inter_ps else p for p in cpt.parents]
        rows = [r for r in slice_rows if r.get("day", 2) >= 2] if inter_ps else slice_rows
        fitted, uniform_given, used = fit_cpt(v, parents, rows, alpha, parent_columns=columns)
        trans_cpts.append(fitted)
        report.rows_used[v.name] = used
        report.uniform_rows.extend((v.name, g) for g in uniform_given)
        if inter_ps:
            init_src = structure.initial_cpts[v.name]
            init_parents = [lookup[p] for p in init_src.parents]
            day1 = [r for r in slice_rows if r.get("day") == 1]
            fitted_init, uniform_init, used_init = fit_cpt(v, init_parents, day1, alpha)
            initial_cpts[v.name] = fitted_init
            report.rows_used[f"initial:{v.name}"] = used_init
            report.uniform_rows.extend((f"initial:{v.name}", g) for g in uniform_init)

    fitted_spec = DbnSpec(
        static_slice=static_net,
        slice_template=Network(template_vars, trans_cpts),
        initial_cpts=initial_cpts,
        inter_slice_arcs=list(structure.inter_slice_arcs),
        bridge_arcs=list(structure.bridge_arcs),
        result_node=structure.result_node,
        static_result_node=structure.static_result_node,
    )
    return fitted_spec.check(), report


# --- JSON i/o -----------------------------------------------------------------


def spec_to_dict(spec: DbnSpec) -> dict:
    template = network_to_dict(spec.slice_template)
    template["initial_cpts"] = [
        cpt_to_dict(spec.initial_cpts[name]) for name in sorted(spec.initial_cpts)
    ]
    out = {
        "static_slice": network_to_dict(spec.static_slice),
        "slice_template": template,
        "inter_slice_arcs": [list(a) for a in spec.inter_slice_arcs],
        "bridge_arcs": [list(a) for a in spec.bridge_arcs],
        "result_node": spec.result_node,
    }
    if spec.static_result_node is not None:
        out["static_result_node"] = spec.static_result_node
    return out


def _load_cpt(data: dict, states_of) -> Cpt:
    cpt = cpt_from_dict(data, states_of)
    violations = cpt.violations(ROW_SUM_TOL_LOAD)
    if violations:
        raise InvalidNetworkError(violations)
    return cpt.renormalized()


def spec_from_dict(data: dict) -> DbnSpec:
    try:
        static = network_from_dict(data["static_slice"])
        tdata = data["slice_template"]
        tvars = [Variable(v["name"], tuple(v["states"])) for v in tdata["variables"]]
        by_name = {v.name: v for v in tvars}

        def states_of(name):
            if name in by_name:
                return by_name[name].states
            return static.variable(name).states

        tcpts = [_load_cpt(c, states_of) for c in tdata["cpts"]]
        initial = {}
        for c in tdata.get("initial_cpts", []):
            cpt = _load_cpt(c, states_of)
            initial[cpt.child] = cpt
        spec = DbnSpec(
            static_slice=static,
            slice_template=Network(tvars, tcpts),
            initial_cpts=initial,
            inter_slice_arcs=[tuple(a) for a in data["inter_slice_arcs"]],
            bridge_arcs=[tuple(a) for a in data["bridge_arcs"]],
            result_node=data["result_node"],
            static_result_node=data.get("static_result_node"),
        )
    except KeyError as exc:
        raise FormatError(f"spec json is missing key {exc}") from None
    return spec.check()


def save_spec(spec: DbnSpec, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(spec_to_dict(spec), fh, indent=2)
        fh.write("\n")


def load_spec(path) -> DbnSpec:
    with open(path, encoding="utf-8") as fh:
        return spec_from_dict(json.load(fh))
