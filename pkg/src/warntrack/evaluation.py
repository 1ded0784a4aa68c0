"""False-positive metrics for tracking reports against ground-truth labels.

A tracker decision is a warning declared resolved or newly introduced. The
decision is a false positive when the warning's true status says otherwise;
warnings without a label are assumed persistent, so every unlabeled
decision counts against the tracker. Precision is measured over the union
of both decision categories.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence, TextIO

from .errors import MalformedReport, SchemaViolation, UnknownWarningId
from .model import EvolutionStatus, TrackingReport

LABEL_HEADER = ("warning_id", "true_status")


@dataclass(frozen=True)
class GroundTruthLabel:
    warning_id: str
    true_status: EvolutionStatus


@dataclass(frozen=True)
class CategoryMetrics:
    """FP counts for one decision category (resolved or newly introduced)."""

    fp_count: int
    total_count: int

    def __post_init__(self):
        if self.fp_count < 0 or self.total_count < 0:
            raise SchemaViolation("metric counts must be non-negative")
        if self.fp_count > self.total_count:
            raise SchemaViolation(
                f"fp_count {self.fp_count} exceeds total {self.total_count}"
            )

    @property
    def fp_rate(self) -> float:
        if self.total_count == 0:
            return 0.0
        return self.fp_count / self.total_count


@dataclass(frozen=True)
class MetricsReport:
    resolved: CategoryMetrics
    newly_introduced: CategoryMetrics

    @classmethod
    def from_counts(
        cls, fp_resolved: int, total_resolved: int, fp_new: int, total_new: int
    ) -> "MetricsReport":
        return cls(
            resolved=CategoryMetrics(fp_resolved, total_resolved),
            newly_introduced=CategoryMetrics(fp_new, total_new),
        )

    @property
    def combined_fp(self) -> int:
        return self.resolved.fp_count + self.newly_introduced.fp_count

    @property
    def combined_total(self) -> int:
        return self.resolved.total_count + self.newly_introduced.total_count

    @property
    def combined_fp_rate(self) -> float:
        if self.combined_total == 0:
            return 0.0
        return self.combined_fp / self.combined_total

    @property
    def precision(self) -> float:
        return 1.0 - self.combined_fp_rate


def _truth_table(labels: Iterable[GroundTruthLabel]) -> dict[str, EvolutionStatus]:
    truth: dict[str, EvolutionStatus] = {}
    for label in labels:
        if label.warning_id in truth:
            raise SchemaViolation(f"duplicate label for warning {label.warning_id}")
        truth[label.warning_id] = label.true_status
    return truth


def compute_metrics(
    report: TrackingReport, labels: Iterable[GroundTruthLabel]
) -> MetricsReport:
    """Score one report's decisions; unlabeled warnings count as persistent."""
    truth = _truth_table(labels)
    known = report.all_pre_ids() | report.all_post_ids()
    for wid in truth:
        if wid not in known:
            raise UnknownWarningId(f"label references no warning in the report: {wid}")
    fp_resolved = sum(
        1
        for wid in report.resolved
        if truth.get(wid, EvolutionStatus.PERSISTENT) is not EvolutionStatus.RESOLVED
    )
    fp_new = sum(
        1
        for wid in report.newly_introduced
        if truth.get(wid, EvolutionStatus.PERSISTENT)
        is not EvolutionStatus.NEWLY_INTRODUCED
    )
    return MetricsReport.from_counts(
        fp_resolved, len(report.resolved), fp_new, len(report.newly_introduced)
    )


def aggregate_metrics(parts: Sequence[MetricsReport]) -> MetricsReport:
    """Sum per-pair (or per-project) counts into one report."""
    return MetricsReport.from_counts(
        sum(p.resolved.fp_count for p in parts),
        sum(p.resolved.total_count for p in parts),
        sum(p.newly_introduced.fp_count for p in parts),
        sum(p.newly_introduced.total_count for p in parts),
    )


@dataclass(frozen=True)
class ApproachComparison:
    soa: MetricsReport
    improved: MetricsReport

    @property
    def resolved_fp_delta(self) -> float:
        return self.improved.resolved.fp_rate - self.soa.resolved.fp_rate

    @property
    def new_fp_delta(self) -> float:
        return (
            self.improved.newly_introduced.fp_rate
            - self.soa.newly_introduced.fp_rate
        )

    @property
    def precision_delta(self) -> float:
        return self.improved.precision - self.soa.precision


def compare_approaches(
    soa: MetricsReport, improved: MetricsReport
) -> ApproachComparison:
    return ApproachComparison(soa=soa, improved=improved)


def _percent(rate: float) -> str:
    return f"{rate * 100:.1f}%"


def _cell(metrics: CategoryMetrics) -> str:
    return f"{_percent(metrics.fp_rate)} ({metrics.fp_count}/{metrics.total_count})"


def render_metrics(metrics: MetricsReport, name: str = "approach") -> str:
    lines = [
        f"{name}:",
        f"  resolved FP:          {_cell(metrics.resolved)}",
        f"  newly-introduced FP:  {_cell(metrics.newly_introduced)}",
        f"  combined FP:          {_cell(CategoryMetrics(metrics.combined_fp, metrics.combined_total))}",
        f"  precision:            {_percent(metrics.precision)}",
    ]
    return "\n".join(lines)


def render_comparison(comparison: ApproachComparison) -> str:
    """Two-column FP table, one row per decision category."""
    soa, improved = comparison.soa, comparison.improved
    rows = [
        ("", "FP (soa)", "FP (improved)"),
        ("Resolved", _cell(soa.resolved), _cell(improved.resolved)),
        (
            "Newly-Introduced",
            _cell(soa.newly_introduced),
            _cell(improved.newly_introduced),
        ),
        (
            "Combined",
            _cell(CategoryMetrics(soa.combined_fp, soa.combined_total)),
            _cell(CategoryMetrics(improved.combined_fp, improved.combined_total)),
        ),
        ("Precision", _percent(soa.precision), _percent(improved.precision)),
    ]
    widths = [max(len(row[i]) for row in rows) for i in range(3)]
    out = []
    for row in rows:
        out.append("  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)).rstrip())
    out.append(f"precision delta: {comparison.precision_delta * 100:+.1f} points")
    return "\n".join(out)


def read_labels(source: Path | str | TextIO) -> list[GroundTruthLabel]:
    """Labels from a two-column csv with a warning_id,true_status header."""
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8", newline="") as handle:
            return _read_labels_from(handle)
    return _read_labels_from(source)


def _read_labels_from(handle: TextIO) -> list[GroundTruthLabel]:
    reader = csv.reader(handle)
    try:
        header = next(reader)
    except StopIteration:
        raise MalformedReport("labels file is empty; expected a header row") from None
    if tuple(h.strip() for h in header) != LABEL_HEADER:
        raise MalformedReport(
            f"labels header must be {','.join(LABEL_HEADER)}, got {header}"
        )
    labels = []
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != 2:
            raise MalformedReport(f"labels line {lineno}: expected 2 columns, got {row}")
        try:
            status = EvolutionStatus.from_text(row[1])
        except SchemaViolation as err:
            raise MalformedReport(f"labels line {lineno}: {err}") from None
        labels.append(GroundTruthLabel(warning_id=row[0].strip(), true_status=status))
    return labels


def write_labels(labels: Iterable[GroundTruthLabel], target: Path | str | TextIO) -> None:
    if isinstance(target, (str, Path)):
        with open(target, "w", encoding="utf-8", newline="") as handle:
            _write_labels_to(labels, handle)
        return
    _write_labels_to(labels, target)


def _write_labels_to(labels: Iterable[GroundTruthLabel], handle: TextIO) -> None:
    writer = csv.writer(handle, lineterminator="\n")
    writer.writerow(LABEL_HEADER)
    for label in labels:
        writer.writerow((label.warning_id, label.true_status.value))


def labels_to_text(labels: Iterable[GroundTruthLabel]) -> str:
    buffer = io.StringIO()
    _write_labels_to(labels, buffer)
    return buffer.getvalue()
