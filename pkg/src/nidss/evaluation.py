"""Thresholded classification and the evaluation metric suite.

Metrics follow the standard confusion-matrix definitions: accuracy
(classification rate), positive predictive value and negative predictive
value. Predictive values are reported as absent (None) when their
denominator is empty, never as zero.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

from .clinical import ClinicalSchema, PatientRecord, to_dataset
from .dbn import DbnSpec, predict_trajectory, restrict_timeline

YES, NO = "yes", "no"


def classify(p: float, threshold: float) -> str:
    """"yes" iff p >= threshold (a boundary case raises the alarm)."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability {p} outside [0, 1]")
    if not 0.0 <= threshold <= 1.0:
        raise ValueError(f"threshold {threshold} outside [0, 1]")
    return YES if p >= threshold else NO


@dataclass
class ConfusionMatrix:
    tn: int = 0
    fp: int = 0
    fn: int = 0
    tp: int = 0

    def __post_init__(self):
        if min(self.tn, self.fp, self.fn, self.tp) < 0:
            raise ValueError("confusion counts must be non-negative")

    @property
    def total(self) -> int:
        return self.tn + self.fp + self.fn + self.tp

    def as_dict(self) -> dict:
        return {"tn": self.tn, "fp": self.fp, "fn": self.fn, "tp": self.tp}


def confusion(predicted: list[str], actual: list[str]) -> ConfusionMatrix:
    """Count predictions against outcomes; both lists hold yes/no labels."""
    if len(predicted) != len(actual):
        raise ValueError("predicted and actual differ in length")
    if not predicted:
        raise ValueError("cannot build a confusion matrix from zero cases")
    m = ConfusionMatrix()
    for p, a in zip(predicted, actual):
        if p not in (YES, NO) or a not in (YES, NO):
            raise ValueError(f"labels must be yes/no, got ({p!r}, {a!r})")
        if a == NO:
            if p == NO:
                m.tn += 1
            else:
                m.fp += 1
        else:
            if p == NO:
                m.fn += 1
            else:
                m.tp += 1
    return m


@dataclass
class MetricsReport:
    accuracy: float
    ppv: float | None
    npv: float | None
    threshold: float | None
    total: int

    def as_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "ppv": self.ppv,
            "npv": self.npv,
            "threshold": self.threshold,
            "total": self.total,
        }

    def as_text(self) -> str:
        def fmt(x, digits=4):
            return "absent" if x is None else f"{x:.{digits}f}"

        lines = [
            f"{'cases':<22}{self.total}",
            f"{'accuracy':<22}{fmt(self.accuracy)}",
            f"{'ppv':<22}{fmt(self.ppv)}",
            f"{'npv':<22}{fmt(self.npv)}",
        ]
        if self.threshold is not None:
            lines.append(f"{'threshold':<22}{self.threshold}")
        lines.append(
            f"{'rounded (2 dp)':<22}"
            f"{fmt(self.accuracy, 2)} / {fmt(self.ppv, 2)} / {fmt(self.npv, 2)}"
        )
        return "\n".join(lines)


def metrics(m: ConfusionMatrix, threshold: float | None = None) -> MetricsReport:
    """accuracy = (tn+tp)/total; ppv = tp/(tp+fp); npv = tn/(tn+fn)."""
    if m.total < 1:
        raise ValueError("confusion matrix is empty")
    ppv = m.tp / (m.tp + m.fp) if (m.tp + m.fp) > 0 else None
    npv = m.tn / (m.tn + m.fn) if (m.tn + m.fn) > 0 else None
    return MetricsReport(
        accuracy=(m.tn + m.tp) / m.total,
        ppv=ppv,
        npv=npv,
        threshold=threshold,
        total=m.total,
    )


def evaluate_model(spec: DbnSpec, records: list[PatientRecord], schema: ClinicalSchema,
                   threshold: float = 0.5, horizon: str = "per-stay"):
    """Run the model over test records and score it.

    ``per-stay`` (default): one prediction per patient, alarm when any
    day's filtered probability crosses the threshold, outcome "yes" when
    the patient caught an infection at any point. ``per-day``: one
    prediction per (patient, day) against that day's infection label.

    Returns ``(metrics_report, confusion_matrix, predictions)`` where
    predictions maps patient id to its per-day probability trace.
    """
    if horizon not in ("per-stay", "per-day"):
        raise ValueError(f"unknown horizon {horizon!r}")
    data = to_dataset(records, schema)
    predicted, actual = [], []
    predictions: dict[str, list[tuple[int, float]]] = {}
    for pid, timeline in data.timelines:
        trace = predict_trajectory(spec, restrict_timeline(timeline, spec))
        predictions[pid] = trace.entries
        labels = data.labels[pid]
        day_probs = [p for d, p in trace.entries if d >= 1]
        if horizon == "per-stay":
            predicted.append(classify(max(day_probs), threshold))
            actual.append(YES if YES in labels else NO)
        else:
            for p, label in zip(day_probs, labels):
                predicted.append(classify(p, threshold))
                actual.append(label)
    m = confusion(predicted, actual)
    return metrics(m, threshold), m, predictions


def write_histogram_csv(m: ConfusionMatrix, path) -> None:
    """Observed-vs-predicted counts for external plotting."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["actual", "predicted", "count"])
        writer.writerow([NO, NO, m.tn])
        writer.writerow([NO, YES, m.fp])
        writer.writerow([YES, NO, m.fn])
        writer.writerow([YES, YES, m.tp])
