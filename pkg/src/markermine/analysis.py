"""Accuracy and frequency reporting over predictions and marker counts.

Reports are machine-readable first (JSON / TSV); any human-facing or
graphical rendering is a thin layer over these structures.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import ExportError
from .linclass import LinearModel

REPORT_SCHEMA_VERSION = 1


@dataclass(frozen=True)
class MarkerAccuracy:
    correct: int
    total: int

    @property
    def accuracy(self) -> float:
        return self.correct / self.total


@dataclass
class AccuracyReport:
    overall: float
    per_marker: dict[str, MarkerAccuracy]
    baseline_majority: float
    k_for_hit: int

    def to_dict(self) -> dict:
        return {
            "schema_version": REPORT_SCHEMA_VERSION,
            "overall": self.overall,
            "baseline_majority": self.baseline_majority,
            "k_for_hit": self.k_for_hit,
            "per_marker": {
                m: {"correct": a.correct, "total": a.total, "accuracy": a.accuracy}
                for m, a in sorted(self.per_marker.items())
            },
        }


def majority_baseline(labels: Sequence[str]) -> float:
    """Accuracy of always predicting the most frequent label."""
    if not labels:
        raise ValueError("empty label multiset")
    counts = Counter(labels)
    return max(counts.values()) / len(labels)


def accuracy_report(
    predictions: Sequence[Sequence[str]],
    gold: Sequence[str],
    k_for_hit: int = 1,
) -> AccuracyReport:
    """Top-k hit rate overall and per gold marker."""
    if len(predictions) != len(gold):
        raise ValueError(f"{len(predictions)} prediction rows for {len(gold)} gold labels")
    if not gold:
        raise ValueError("empty evaluation set")
    if k_for_hit < 1:
        raise ValueError(f"k_for_hit must be >= 1, got {k_for_hit}")
    correct: Counter = Counter()
    total: Counter = Counter()
    for preds, g in zip(predictions, gold):
        total[g] += 1
        if g in list(preds)[:k_for_hit]:
            correct[g] += 1
    per_marker = {m: MarkerAccuracy(correct[m], total[m]) for m in total}
    overall = sum(correct.values()) / sum(total.values())
    return AccuracyReport(
        overall=overall,
        per_marker=per_marker,
        baseline_majority=majority_baseline(gold),
        k_for_hit=k_for_hit,
    )


def extremes(report: AccuracyReport, n: int) -> tuple[list[str], list[str]]:
    """The n hardest and n easiest markers by accuracy (ties lexicographic)."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    items = list(report.per_marker.items())
    bottom = [m for m, a in sorted(items, key=lambda kv: (kv[1].accuracy, kv[0]))][:n]
    top = [m for m, a in sorted(items, key=lambda kv: (-kv[1].accuracy, kv[0]))][:n]
    return bottom, top


@dataclass
class FrequencyReport:
    rows: list[tuple[str, int]]
    cap: int | None

    def to_dict(self) -> dict:
        return {
            "schema_version": REPORT_SCHEMA_VERSION,
            "cap": self.cap,
            "rows": [{"marker": m, "count": c} for m, c in self.rows],
        }


def frequency_report(frequency_map: Mapping[str, int], cap: int | None = None) -> FrequencyReport:
    """Counts in descending order with the subsampling threshold attached."""
    rows = sorted(frequency_map.items(), key=lambda kv: (-kv[1], kv[0]))
    return FrequencyReport(rows=rows, cap=cap)


def export_marker_vectors(model: LinearModel) -> dict[str, np.ndarray]:
    """Label-weight rows normalized to unit Euclidean norm.

    The output rows of a trained marker predictor double as embeddings for
    the markers themselves; zero rows cannot be normalized and abort the
    export.
    """
    out = {}
    for label, row in zip(model.labels, model.output_table):
        vec = np.asarray(row, dtype=np.float64)
        norm = float(np.linalg.norm(vec))
        if norm == 0.0:
            raise ExportError(f"label {label!r} has a zero weight row; train the model first")
        out[label] = vec / norm
    return out


def write_marker_vectors(vectors: Mapping[str, np.ndarray], path) -> None:
    """Embeddings TSV: label, then one column per dimension."""
    with open(path, "w", encoding="utf-8") as f:
        for label in sorted(vectors):
            values = "\t".join(repr(float(v)) for v in vectors[label])
            f.write(f"{label}\t{values}\n")
