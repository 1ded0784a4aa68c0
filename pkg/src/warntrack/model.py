"""Core data model: warnings, warning sets, matches, and tracking reports.

All types are immutable after construction and safe to share between
threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, NamedTuple

from .errors import DuplicateMatch, FileMissing, IdCollision, SchemaViolation


class Side(Enum):
    """Which revision of the commit pair a warning belongs to."""

    PRE = "PRE"
    POST = "POST"


class EvolutionStatus(Enum):
    """Evolution status of one warning across a commit."""

    PERSISTENT = "persistent"
    RESOLVED = "resolved"
    NEWLY_INTRODUCED = "newly_introduced"

    @classmethod
    def from_text(cls, text: str) -> "EvolutionStatus":
        try:
            return cls(text.strip().lower())
        except ValueError:
            raise SchemaViolation(f"unknown evolution status: {text!r}") from None


class Strategy(Enum):
    """How a matched pair of warnings was established."""

    EXACT = "EXACT"
    LOCATION = "LOCATION"
    SNIPPET = "SNIPPET"
    HASH = "HASH"
    REFACTOR_EXACT = "REFACTOR_EXACT"
    HUNGARIAN = "HUNGARIAN"


class Approach(Enum):
    """Tracking pipeline variant."""

    SOA = "SOA"
    IMPROVED = "IMPROVED"


def canonicalize_path(path: str) -> str:
    """Normalize separators to '/' and strip leading './' segments."""
    p = path.replace("\\", "/")
    while p.startswith("./"):
        p = p[2:]
    return p


@dataclass(frozen=True)
class WarningInstance:
    """One static-analysis warning, reduced to the metadata used for matching.

    ``ordinal`` disambiguates warnings whose metadata is otherwise identical
    within one report (detectors can emit the same rule twice on one range);
    it is assigned in report order.
    """

    warning_type: str
    file_path: str
    start_line: int
    end_line: int
    side: Side
    project: str = ""
    class_name: str = ""
    method_name: str = ""
    field_name: str = ""
    ordinal: int = 0

    def __post_init__(self):
        object.__setattr__(self, "file_path", canonicalize_path(self.file_path))
        if not self.warning_type:
            raise SchemaViolation("warning_type must be non-empty")
        if not self.file_path:
            raise SchemaViolation("file_path must be non-empty")
        if self.start_line < 1 or self.end_line < 1:
            raise SchemaViolation(
                f"line numbers are 1-based, got [{self.start_line}, {self.end_line}]"
            )
        if self.start_line > self.end_line:
            raise SchemaViolation(
                f"start_line {self.start_line} > end_line {self.end_line}"
            )
        if self.ordinal < 0:
            raise SchemaViolation(f"ordinal must be >= 0, got {self.ordinal}")

    @property
    def line_range(self) -> tuple[int, int]:
        return (self.start_line, self.end_line)

    def metadata_key(self) -> tuple:
        """Identity of the warning minus side and ordinal."""
        return (
            self.warning_type,
            self.class_name,
            self.method_name,
            self.field_name,
            self.file_path,
            self.start_line,
            self.end_line,
        )

    def sort_key(self) -> tuple:
        """Canonical in-set ordering key."""
        return (
            self.file_path,
            self.start_line,
            self.end_line,
            self.warning_type,
            self.ordinal,
        )


_FNV64_OFFSET = 0xCBF29CE484222325
_FNV64_PRIME = 0x100000001B3


def _fnv1a64(data: bytes) -> int:
    h = _FNV64_OFFSET
    for byte in data:
        h ^= byte
        h = (h * _FNV64_PRIME) & 0xFFFFFFFFFFFFFFFF
    return h


def warning_id(w: WarningInstance) -> str:
    """Stable identifier of a warning instance.

    FNV-1a 64-bit digest (lowercase hex, 16 chars) of the canonical string
    ``side|warning_type|file_path|start_line|end_line|class_name|
    method_name|field_name|ordinal`` encoded as UTF-8. Equal inputs give
    equal ids across runs and platforms.
    """
    canonical = "|".join(
        (
            w.side.value,
            w.warning_type,
            w.file_path,
            str(w.start_line),
            str(w.end_line),
            w.class_name,
            w.method_name,
            w.field_name,
            str(w.ordinal),
        )
    )
    return format(_fnv1a64(canonical.encode("utf-8")), "016x")


def metadata_equal(a: WarningInstance, b: WarningInstance) -> bool:
    """True iff the matching metadata of two warnings is identical.

    Compares warning_type, class_name, method_name, field_name, file_path
    and the line range; side and ordinal are deliberately excluded.
    """
    return a.metadata_key() == b.metadata_key()


@dataclass(frozen=True)
class WarningSet:
    """An ordered, canonically sorted collection of same-side warnings."""

    side: Side
    warnings: tuple[WarningInstance, ...]

    def __post_init__(self):
        seen_meta = set()
        ids: dict[str, WarningInstance] = {}
        for w in self.warnings:
            if w.side is not self.side:
                raise SchemaViolation(
                    f"warning side {w.side.value} differs from set side {self.side.value}"
                )
            # project is not part of warning identity (it is absent from the
            # id digest), so uniqueness is over metadata plus ordinal.
            key = (w.metadata_key(), w.ordinal)
            if key in seen_meta:
                raise SchemaViolation(f"duplicate (metadata, ordinal) in set: {key}")
            seen_meta.add(key)
            wid = warning_id(w)
            other = ids.get(wid)
            if other is not None:
                raise IdCollision(
                    f"id {wid} produced by two distinct warnings: {other} and {w}"
                )
            ids[wid] = w
        object.__setattr__(self, "_by_id", ids)

    @classmethod
    def from_warnings(
        cls, side: Side, warnings: Iterable[WarningInstance]
    ) -> "WarningSet":
        """Build a set in canonical order. Sorting is stable, so warnings with
        equal sort keys keep their input order."""
        ordered = sorted(warnings, key=WarningInstance.sort_key)
        return cls(side=side, warnings=tuple(ordered))

    def __len__(self) -> int:
        return len(self.warnings)

    def __iter__(self):
        return iter(self.warnings)

    def ids(self) -> list[str]:
        return [warning_id(w) for w in self.warnings]

    def by_id(self, wid: str) -> WarningInstance:
        return self._by_id[wid]  # type: ignore[attr-defined]

    def id_map(self) -> dict[str, WarningInstance]:
        return dict(self._by_id)  # type: ignore[attr-defined]


@dataclass(frozen=True)
class CommitPair:
    """The two revisions a tracking run compares."""

    pre_commit_id: str
    post_commit_id: str
    pre_root: Path
    post_root: Path

    def validate_roots(self):
        """Check both source roots exist; called at pipeline start."""
        for root in (self.pre_root, self.post_root):
            if not Path(root).is_dir():
                raise FileMissing(str(root))


class Match(NamedTuple):
    """One established pre/post pairing with its provenance."""

    pre_id: str
    post_id: str
    strategy: Strategy
    score: float


@dataclass(frozen=True)
class TrackingReport:
    """Final classification of every warning in a commit pair.

    Matched warnings are persistent; unmatched pre warnings are resolved and
    unmatched post warnings are newly introduced. The match list is a
    one-to-one mapping.
    """

    approach: Approach
    matches: tuple[Match, ...]
    resolved: tuple[str, ...]
    newly_introduced: tuple[str, ...]
    pre_commit_id: str = ""
    post_commit_id: str = ""
    rewrite_log: tuple = ()
    notes: tuple[str, ...] = ()

    def __post_init__(self):
        pre_ids = [m.pre_id for m in self.matches]
        post_ids = [m.post_id for m in self.matches]
        for name, seq in (("pre", pre_ids), ("post", post_ids)):
            if len(set(seq)) != len(seq):
                seen: set[str] = set()
                dupes = sorted({i for i in seq if i in seen or seen.add(i)})
                raise DuplicateMatch(f"{name} id matched more than once: {dupes}")
        if set(pre_ids) & set(self.resolved):
            raise SchemaViolation("a pre id is both matched and resolved")
        if set(post_ids) & set(self.newly_introduced):
            raise SchemaViolation("a post id is both matched and newly introduced")
        for m in self.matches:
            if not 0.0 <= m.score <= 1.0:
                raise SchemaViolation(f"match score out of [0,1]: {m}")

    @property
    def persistent_count(self) -> int:
        return len(self.matches)

    def all_pre_ids(self) -> set[str]:
        return {m.pre_id for m in self.matches} | set(self.resolved)

    def all_post_ids(self) -> set[str]:
        return {m.post_id for m in self.matches} | set(self.newly_introduced)


def verify_partition(
    report: TrackingReport, pre: WarningSet, post: WarningSet
) -> None:
    """Raise SchemaViolation unless the report partitions both sets exactly."""
    if report.all_pre_ids() != set(pre.ids()):
        raise SchemaViolation("report does not partition the pre warning set")
    if report.all_post_ids() != set(post.ids()):
        raise SchemaViolation("report does not partition the post warning set")
    if len(report.matches) + len(report.resolved) != len(pre):
        raise SchemaViolation("pre partition sizes do not add up")
    if len(report.matches) + len(report.newly_introduced) != len(post):
        raise SchemaViolation("post partition sizes do not add up")
