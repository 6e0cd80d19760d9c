"""Clinical schema, record ingestion and transformation.

Covers the data-preparation half of the pipeline: reading the fixed and
daily CSV files, cleaning them against the schema, discretising raw values
(age, dates, stay length) into categorical states, and producing both the
training rows for parameter fitting and the per-patient evidence timelines
for prediction.

File formats
------------
fixed file   CSV with header
             ``patient_id,sex,age,entry_date,exit_date,orig,detorig,priseAnti,knaus,diag,ant,cissue,ni_ever``
             (dates ISO-8601).
daily file   long-format CSV with header ``patient_id,day,variable,value``;
             one observation per row, ``variable`` a temporal schema code
             such as ``act_3``, ``examinf_17`` or ``sens``.
schema file  JSON listing variables, states and bin edges; the built-in
             default covers the standard ICU variable set.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from datetime import date

from .dbn import EvidenceTimeline
from .errors import BinningError, FormatError, SchemaMismatchError
from .network import Assignment, Dataset, Variable

FIXED_HEADER = [
    "patient_id", "sex", "age", "entry_date", "exit_date", "orig", "detorig",
    "priseAnti", "knaus", "diag", "ant", "cissue", "ni_ever",
]
DAILY_HEADER = ["patient_id", "day", "variable", "value"]

N_ACTS = 10
N_EXAMS = 30

# categorical fixed-file columns copied through as states
_DIRECT_FIXED = ["sex", "orig", "detorig", "priseAnti", "knaus", "diag", "ant", "cissue"]


@dataclass
class BinRule:
    """Half-open numeric bins [edge_i, edge_i+1); the last bin is unbounded."""

    source: str
    edges: list[float]
    labels: list[str]

    def __post_init__(self):
        if len(self.labels) != len(self.edges):
            raise ValueError("one label per lower edge required")
        if sorted(self.edges) != list(self.edges):
            raise ValueError("bin edges must be ascending")

    def state_of(self, variable: str, value: float) -> str:
        if value < self.edges[0]:
            raise BinningError(variable, value)
        for i in range(len(self.edges) - 1, -1, -1):
            if value >= self.edges[i]:
                return self.labels[i]
        raise BinningError(variable, value)


SEASONS = {
    12: "winter", 1: "winter", 2: "winter",
    3: "spring", 4: "spring", 5: "spring",
    6: "summer", 7: "summer", 8: "summer",
    9: "autumn", 10: "autumn", 11: "autumn",
}


@dataclass
class ClinicalSchema:
    """Variables, state sets and discretisation rules for the ICU records."""

    fixed_variables: list[Variable]
    temporal_variables: list[Variable]
    bins: dict[str, BinRule]
    outcome_fixed: tuple[str, ...] = ("result", "cissue")
    outcome_temporal: tuple[str, ...] = ("result_t",)
    result_fixed: str = "result"
    result_temporal: str = "result_t"

    def __post_init__(self):
        self._fixed = {v.name: v for v in self.fixed_variables}
        self._temporal = {v.name: v for v in self.temporal_variables}

    def fixed(self, name: str) -> Variable:
        return self._fixed[name]

    def temporal(self, name: str) -> Variable:
        return self._temporal[name]

    def has_temporal(self, name: str) -> bool:
        return name in self._temporal

    def admission_variables(self) -> list[Variable]:
        """Fixed variables a physician can supply at admission (no outcomes,
        no derived stay length)."""
        skip = set(self.outcome_fixed) | {"dsj"}
        return [v for v in self.fixed_variables if v.name not in skip]

    def entry_variables(self) -> list[Variable]:
        """Temporal variables enterable as daily observations."""
        skip = set(self.outcome_temporal)
        return [v for v in self.temporal_variables if v.name not in skip]


def default_schema(include_temporal_cissue: bool = False) -> ClinicalSchema:
    """The built-in ICU variable set.

    Ten daily care acts and thirty infectious examinations, an antibiotic
    sensitivity reading and the per-day infection state; fixed admission
    attributes plus the stay-level outcome pair (result, cissue). The stay
    length ``dsj`` is derived from the entry/exit dates and kept as a fixed
    variable. The per-day issue variable exists in the wider variable set
    but stays disabled unless requested.
    """
    yn = ("yes", "no")
    fixed = [
        Variable("sex", ("male", "female")),
        Variable("age1", ("0-15", "16-40", "41-65", "66+")),
        Variable("periode_entr", ("winter", "spring", "summer", "autumn")),
        Variable("orig", ("home", "hospital_transfer", "emergency")),
        Variable("detorig", ("none", "medical", "surgical")),
        Variable("priseAnti", yn),
        Variable("knaus", ("A", "B", "C", "D")),
        Variable("cissue", ("dead", "survived")),
        Variable("diag", ("medical", "surgical", "trauma")),
        Variable("ant", ("none", "moderate", "severe")),
        Variable("result", yn),
        Variable("dsj", ("0-2d", "3-7d", "8-14d", "15d+")),
    ]
    temporal = [Variable(f"act_{i}", yn) for i in range(1, N_ACTS + 1)]
    temporal += [Variable(f"examinf_{j}", yn) for j in range(1, N_EXAMS + 1)]
    temporal.append(Variable("sens", ("sensitive", "resistant", "not_tested")))
    if include_temporal_cissue:
        temporal.append(Variable("cissue_t", ("dead", "survived")))
    temporal.append(Variable("result_t", yn))
    bins = {
        "age1": BinRule("age", [0, 16, 41, 66], ["0-15", "16-40", "41-65", "66+"]),
        "dsj": BinRule("stay_days", [0, 3, 8, 15], ["0-2d", "3-7d", "8-14d", "15d+"]),
    }
    outcome_temporal = ("result_t", "cissue_t") if include_temporal_cissue else ("result_t",)
    return ClinicalSchema(fixed, temporal, bins, outcome_temporal=outcome_temporal)


def schema_to_dict(schema: ClinicalSchema) -> dict:
    return {
        "fixed_variables": [{"name": v.name, "states": list(v.states)} for v in schema.fixed_variables],
        "temporal_variables": [{"name": v.name, "states": list(v.states)} for v in schema.temporal_variables],
        "bins": {
            name: {"source": rule.source, "edges": rule.edges, "labels": rule.labels}
            for name, rule in schema.bins.items()
        },
        "outcome_fixed": list(schema.outcome_fixed),
        "outcome_temporal": list(schema.outcome_temporal),
    }


def schema_from_dict(data: dict) -> ClinicalSchema:
    try:
        return ClinicalSchema(
            [Variable(v["name"], tuple(v["states"])) for v in data["fixed_variables"]],
            [Variable(v["name"], tuple(v["states"])) for v in data["temporal_variables"]],
            {
                name: BinRule(rule["source"], list(rule["edges"]), list(rule["labels"]))
                for name, rule in data["bins"].items()
            },
            outcome_fixed=tuple(data.get("outcome_fixed", ("result", "cissue"))),
            outcome_temporal=tuple(data.get("outcome_temporal", ("result_t",))),
        )
    except KeyError as exc:
        raise FormatError(f"schema json is missing key {exc}") from None


def load_schema(path) -> ClinicalSchema:
    with open(path, encoding="utf-8") as fh:
        return schema_from_dict(json.load(fh))


def save_schema(schema: ClinicalSchema, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(schema_to_dict(schema), fh, indent=2)
        fh.write("\n")


@dataclass
class PatientRecord:
    """Raw per-patient data after ingestion: fixed attributes plus one
    observation dict per hospitalisation day (day 1 = first 24 h)."""

    patient_id: str
    fixed: dict
    days: dict[int, dict[str, str]] = field(default_factory=dict)

    @property
    def stay_days(self) -> int:
        delta = (self.fixed["exit_date"] - self.fixed["entry_date"]).days
        return max(delta, 1)


@dataclass
class CleaningReport:
    """What ingestion kept, dropped and why."""

    rows_read: int = 0
    rows_kept: int = 0
    rows_dropped: int = 0
    corrections: list[tuple[str, str, str]] = field(default_factory=list)

    def drop(self, patient_id: str, fld: str, reason: str):
        self.rows_dropped += 1
        self.corrections.append((patient_id, fld, reason))

    def as_dict(self) -> dict:
        return {
            "rows_read": self.rows_read,
            "rows_kept": self.rows_kept,
            "rows_dropped": self.rows_dropped,
            "corrections": [
                {"patient_id": p, "field": f, "reason": r} for p, f, r in self.corrections
            ],
        }


def _read_rows(path, expected_header):
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise FormatError(f"{path}: empty file, expected header {expected_header}") from None
        if header != expected_header:
            raise FormatError(f"{path}: header {header} does not match {expected_header}")
        return [dict(zip(expected_header, row)) for row in reader]


def ingest(fixed_file, daily_file, schema: ClinicalSchema):
    """Read and clean the two CSV files into patient records.

    Rows that violate the schema (unknown states, unparseable values,
    unknown patients, days outside the stay) are dropped and logged in the
    cleaning report; values are never coerced silently.
    """
    report = CleaningReport()
    records: dict[str, PatientRecord] = {}

    for row in _read_rows(fixed_file, FIXED_HEADER):
        report.rows_read += 1
        pid = row["patient_id"]
        if not pid:
            report.drop(pid, "patient_id", "empty patient id")
            continue
        if pid in records:
            report.drop(pid, "patient_id", "duplicate patient id")
            continue
        try:
            age = int(row["age"])
            entry = date.fromisoformat(row["entry_date"])
            exit_ = date.fromisoformat(row["exit_date"])
        except ValueError as exc:
            report.drop(pid, "age/dates", f"unparseable value: {exc}")
            continue
        if age < 0:
            report.drop(pid, "age", "age below zero")
            continue
        if exit_ < entry:
            report.drop(pid, "exit_date", "exit date before entry date")
            continue
        fixed = {"age": age, "entry_date": entry, "exit_date": exit_}
        bad = None
        for name in _DIRECT_FIXED:
            if row[name] not in schema.fixed(name).states:
                bad = (name, row[name])
                break
        if bad is None and row["ni_ever"] not in schema.fixed(schema.result_fixed).states:
            bad = ("ni_ever", row["ni_ever"])
        if bad is not None:
            report.drop(pid, bad[0], f"unknown state {bad[1]!r}")
            continue
        for name in _DIRECT_FIXED:
            fixed[name] = row[name]
        fixed["ni_ever"] = row["ni_ever"]
        records[pid] = PatientRecord(pid, fixed)
        report.rows_kept += 1

    for row in _read_rows(daily_file, DAILY_HEADER):
        report.rows_read += 1
        pid = row["patient_id"]
        record = records.get(pid)
        if record is None:
            report.drop(pid, "patient_id", "unknown patient id in daily file")
            continue
        try:
            day = int(row["day"])
        except ValueError:
            report.drop(pid, "day", f"unparseable day {row['day']!r}")
            continue
        if not 1 <= day <= record.stay_days:
            report.drop(pid, "day", "day out of stay range")
            continue
        name = row["variable"]
        if not schema.has_temporal(name):
            report.drop(pid, "variable", f"unknown temporal variable {name!r}")
            continue
        if row["value"] not in schema.temporal(name).states:
            report.drop(pid, name, f"unknown state {row['value']!r}")
            continue
        record.days.setdefault(day, {})[name] = row["value"]
        report.rows_kept += 1

    return list(records.values()), report


def discretize(record: PatientRecord, schema: ClinicalSchema):
    """Map one record's raw values onto schema states.

    Returns ``(static_assignment, per_day_assignments)`` where the per-day
    list covers days 1..stay_days (days without observations stay empty).
    Deterministic; raises `BinningError` for raw values outside all bins.
    """
    fixed = record.fixed
    static: Assignment = {name: fixed[name] for name in _DIRECT_FIXED}
    static["age1"] = schema.bins["age1"].state_of("age1", fixed["age"])
    static["periode_entr"] = SEASONS[fixed["entry_date"].month]
    stay_raw = (fixed["exit_date"] - fixed["entry_date"]).days
    static["dsj"] = schema.bins["dsj"].state_of("dsj", stay_raw)
    static[schema.result_fixed] = fixed["ni_ever"]
    per_day = [dict(record.days.get(d, {})) for d in range(1, record.stay_days + 1)]
    return static, per_day


def result_labels(record: PatientRecord, schema: ClinicalSchema) -> list[str]:
    """Per-day infection labels. An infection, once recorded, persists for
    the rest of the stay; unrecorded days before any event count as "no"."""
    code = schema.result_temporal
    recorded = {d: obs.get(code) for d, obs in record.days.items() if code in obs}
    ni_days = [d for d, v in recorded.items() if v == "yes"]
    first = min(ni_days) if ni_days else None
    labels = []
    for d in range(1, record.stay_days + 1):
        if first is not None and d >= first:
            labels.append("yes")
        else:
            labels.append(recorded.get(d, "no"))
    return labels


@dataclass
class TrainingData:
    """Everything the learner and the predictor need from a cohort."""

    static_data: Dataset
    slice_rows: list[dict]
    timelines: list[tuple[str, EvidenceTimeline]]
    labels: dict[str, list[str]]


def to_dataset(records: list[PatientRecord], schema: ClinicalSchema) -> TrainingData:
    """Turn discretised records into fitting rows and prediction timelines.

    Slice rows carry the day's observations, the per-day infection label,
    the patient's static assignment and previous-day values under
    ``prev:`` keys. Timelines leave every outcome variable unbound: they
    are the quantities being predicted.
    """
    static_cols = tuple(v.name for v in schema.fixed_variables)
    static_rows = []
    slice_rows: list[dict] = []
    timelines = []
    labels: dict[str, list[str]] = {}
    outcome_t = set(schema.outcome_temporal)
    outcome_f = set(schema.outcome_fixed)
    for record in records:
        static, per_day = discretize(record, schema)
        static_rows.append(static)
        day_labels = result_labels(record, schema)
        labels[record.patient_id] = day_labels
        prev: dict[str, str] = {}
        for d, obs in enumerate(per_day, start=1):
            row = dict(static)
            row.update(obs)
            row[schema.result_temporal] = day_labels[d - 1]
            row["day"] = d
            for name, value in prev.items():
                row[f"prev:{name}"] = value
            slice_rows.append(row)
            prev = dict(obs)
            prev[schema.result_temporal] = day_labels[d - 1]
        timelines.append((
            record.patient_id,
            EvidenceTimeline(
                {k: v for k, v in static.items() if k not in outcome_f},
                [{k: v for k, v in obs.items() if k not in outcome_t} for obs in per_day],
            ),
        ))
    return TrainingData(Dataset(static_cols, static_rows), slice_rows, timelines, labels)
