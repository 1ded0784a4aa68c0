"""Metadata rewriting driven by refactoring records.

Before the improved pipeline matches anything, each pre warning is
rewritten to the coordinates the refactorings imply for the post revision:
renamed methods get their new name, moved classes and files their new
location, and line ranges shift with the recorded displacement. Every
record's applicability is judged against the ORIGINAL warning, so record
order cannot chain one rewrite onto another; when two records disagree on
a field the first one wins and the disagreement is logged.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterable, Sequence

from .errors import SchemaViolation
from .ingest import CodeElementRef, RefactoringKind, RefactoringRecord
from .model import Side, WarningInstance, WarningSet, warning_id

_REWRITABLE_FIELDS = ("method_name", "class_name", "file_path", "start_line", "end_line")


@dataclass(frozen=True)
class RewriteEntry:
    """One warning's rewrite outcome: what changed and what was refused."""

    original_id: str
    rewritten_id: str
    changed_fields: tuple[str, ...]
    conflicts: tuple[str, ...] = ()


def _range_present(ref: CodeElementRef) -> bool:
    return ref.start_line > 0 and ref.end_line > 0


def _enclosed(w: WarningInstance, ref: CodeElementRef) -> bool:
    return (
        _range_present(ref)
        and ref.start_line <= w.start_line
        and w.end_line <= ref.end_line
    )


def _record_changes(w: WarningInstance, rec: RefactoringRecord) -> dict[str, object]:
    """Field assignments one record implies for one warning; empty when the
    record does not apply. All gates look at the original warning."""
    kind = rec.kind
    before, after = rec.before, rec.after
    changes: dict[str, object] = {}
    applied = False
    if kind is RefactoringKind.RENAME_METHOD:
        if before.file_path == w.file_path and (
            (before.method_name != "" and before.method_name == w.method_name)
            or _enclosed(w, before)
        ):
            applied = True
            changes["method_name"] = after.method_name
    elif kind in (RefactoringKind.RENAME_CLASS, RefactoringKind.MOVE_CLASS):
        if before.class_name != "" and before.class_name == w.class_name:
            applied = True
            changes["class_name"] = after.class_name
            if after.file_path:
                changes["file_path"] = after.file_path
    elif kind is RefactoringKind.MOVE_RENAME_FILE:
        if before.file_path == w.file_path:
            applied = True
            changes["file_path"] = after.file_path
    elif kind is RefactoringKind.EXTRACT_METHOD:
        if before.file_path == w.file_path and _enclosed(w, before):
            applied = True
            changes["method_name"] = after.method_name
            if after.file_path:
                changes["file_path"] = after.file_path
    if (
        applied
        and _enclosed(w, before)
        and before.file_path == w.file_path
        and _range_present(after)
    ):
        delta = after.start_line - before.start_line
        if w.start_line + delta >= 1:
            changes["start_line"] = w.start_line + delta
            changes["end_line"] = w.end_line + delta
    return changes


def _rewrite(
    w: WarningInstance, records: Sequence[RefactoringRecord]
) -> tuple[WarningInstance, tuple[str, ...], tuple[str, ...]]:
    assigned: dict[str, object] = {}
    conflicts: list[str] = []
    for idx, rec in enumerate(records):
        if rec.kind is RefactoringKind.OTHER:
            continue
        for fname, value in _record_changes(w, rec).items():
            if fname not in assigned:
                assigned[fname] = value
            elif assigned[fname] != value:
                conflicts.append(
                    f"record {idx} ({rec.kind.value}) wants {fname}={value!r}; "
                    f"keeping {assigned[fname]!r}"
                )
    effective = {
        fname: value for fname, value in assigned.items() if value != getattr(w, fname)
    }
    if not effective:
        return w, (), tuple(conflicts)
    try:
        rewritten = replace(w, **effective)
    except SchemaViolation:
        # A bad range shift (or an empty replacement name) would produce an
        # invalid warning; drop the offending fields rather than abort.
        conflicts.append(f"rewrite of {sorted(effective)} rejected as invalid")
        safe = {
            k: v
            for k, v in effective.items()
            if k not in ("start_line", "end_line")
        }
        try:
            rewritten = replace(w, **safe) if safe else w
            effective = safe
        except SchemaViolation:
            return w, (), tuple(conflicts)
    return rewritten, tuple(sorted(effective)), tuple(conflicts)


def rewrite_warning(
    w: WarningInstance, records: Sequence[RefactoringRecord]
) -> WarningInstance:
    """The warning as the refactorings leave it; unchanged fields stay
    bitwise-identical and the original keeps its own id."""
    if w.side is not Side.PRE:
        raise SchemaViolation("only pre-commit warnings are rewritten")
    rewritten, _, _ = _rewrite(w, records)
    return rewritten


def rewrite_set(
    pre: WarningSet, records: Sequence[RefactoringRecord]
) -> tuple[WarningSet, tuple[RewriteEntry, ...]]:
    """Rewrite every member of a pre set; returns the rewritten set and a
    log with one entry per warning that changed or had conflicts.

    If two warnings would collide after rewriting (same metadata and
    ordinal), the later one keeps its original coordinates and the clash is
    logged; cardinality is always preserved.
    """
    accepted: list[WarningInstance] = []
    log: list[RewriteEntry] = []
    seen: set[tuple] = set()
    max_ordinal: dict[tuple, int] = {}

    def key_of(w: WarningInstance) -> tuple:
        return (w.metadata_key(), w.ordinal)

    for w in pre:
        rewritten, changed, conflicts = _rewrite(w, records)
        notes = list(conflicts)
        if changed and key_of(rewritten) in seen:
            notes.append("rewrite collides with another warning; kept original")
            rewritten, changed = w, ()
        if key_of(rewritten) in seen:
            meta = rewritten.metadata_key()
            bumped = max_ordinal.get(meta, rewritten.ordinal) + 1
            notes.append(f"ordinal bumped to {bumped} to keep the set unique")
            rewritten = replace(rewritten, ordinal=bumped)
            changed = tuple(sorted(set(changed) | {"ordinal"}))
        seen.add(key_of(rewritten))
        meta = rewritten.metadata_key()
        max_ordinal[meta] = max(max_ordinal.get(meta, -1), rewritten.ordinal)
        accepted.append(rewritten)
        if changed or notes:
            log.append(
                RewriteEntry(
                    original_id=warning_id(w),
                    rewritten_id=warning_id(rewritten),
                    changed_fields=tuple(changed),
                    conflicts=tuple(notes),
                )
            )
    return WarningSet.from_warnings(Side.PRE, accepted), tuple(log)


def original_ids(log: Iterable[RewriteEntry]) -> dict[str, str]:
    """Map each rewritten id back to the id the warning had before
    rewriting; ids absent from the map were never changed."""
    return {
        e.rewritten_id: e.original_id
        for e in log
        if e.rewritten_id != e.original_id
    }
