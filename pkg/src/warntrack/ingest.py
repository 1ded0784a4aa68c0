"""Parsers for warning reports, refactoring records, and source trees.

All parsers are pure functions of the input bytes: identical bytes give an
identical WarningSet, ordinals included. SourceTree adds a thread-safe
per-file cache so one pipeline run reads each file at most once.
"""

from __future__ import annotations

import json
import threading
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping

from .errors import FileMissing, MalformedReport, MissingAttribute, SchemaViolation
from .model import Side, WarningInstance, WarningSet, canonicalize_path


def _split_lines(text: str) -> tuple[str, ...]:
    """Split on "\\n" / "\\r\\n" terminators only; a trailing terminator adds
    no empty line. Lone "\\r" is content, not a terminator."""
    if not text:
        return ()
    parts = text.split("\n")
    if parts and parts[-1] == "":
        parts.pop()
    return tuple(p[:-1] if p.endswith("\r") else p for p in parts)


@dataclass
class SourceTree:
    """Lazy, cached view of one revision's checked-out files.

    Reads are safe from multiple threads; each file is read and decoded at
    most once (per-file fill locks). Absent files raise FileMissing on every
    access so callers can treat them as fully added/deleted.
    """

    root: Path
    _cache: dict[str, tuple[str, ...]] = field(default_factory=dict, repr=False)
    _locks: dict[str, threading.Lock] = field(default_factory=dict, repr=False)
    _registry_lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def __post_init__(self):
        self.root = Path(self.root)

    @classmethod
    def in_memory(cls, files: Mapping[str, str]) -> "SourceTree":
        """Tree backed by literal file contents; used by tests and the
        corpus generator before files hit disk."""
        tree = cls(root=Path("."))
        for path, text in files.items():
            tree._cache[canonicalize_path(path)] = _split_lines(text)
        tree._cache_only = True  # type: ignore[attr-defined]
        return tree

    def has_file(self, file_path: str) -> bool:
        key = canonicalize_path(file_path)
        if key in self._cache:
            return True
        if getattr(self, "_cache_only", False):
            return False
        return (self.root / key).is_file()

    def lines(self, file_path: str) -> tuple[str, ...]:
        key = canonicalize_path(file_path)
        cached = self._cache.get(key)
        if cached is not None:
            return cached
        if getattr(self, "_cache_only", False):
            raise FileMissing(key, str(self.root))
        with self._registry_lock:
            lock = self._locks.setdefault(key, threading.Lock())
        with lock:
            cached = self._cache.get(key)
            if cached is not None:
                return cached
            full = self.root / key
            if not full.is_file():
                raise FileMissing(key, str(self.root))
            lines = _split_lines(full.read_bytes().decode("utf-8", errors="replace"))
            self._cache[key] = lines
            return lines


def load_source(tree: SourceTree, file_path: str) -> tuple[str, ...]:
    """Lines of one file, 1-based addressing by convention of the callers."""
    return tree.lines(file_path)


class RefactoringKind(Enum):
    RENAME_METHOD = "RENAME_METHOD"
    RENAME_CLASS = "RENAME_CLASS"
    MOVE_CLASS = "MOVE_CLASS"
    MOVE_RENAME_FILE = "MOVE_RENAME_FILE"
    EXTRACT_METHOD = "EXTRACT_METHOD"
    OTHER = "OTHER"


@dataclass(frozen=True)
class CodeElementRef:
    """One side of a refactoring: where an element lived and what it was
    called. Fields that do not apply stay ""/0."""

    file_path: str = ""
    class_name: str = ""
    method_name: str = ""
    field_name: str = ""
    start_line: int = 0
    end_line: int = 0

    def __post_init__(self):
        object.__setattr__(self, "file_path", canonicalize_path(self.file_path))
        if self.start_line < 0 or self.end_line < 0:
            raise SchemaViolation(f"negative line in element ref: {self}")


@dataclass(frozen=True)
class RefactoringRecord:
    kind: RefactoringKind
    before: CodeElementRef
    after: CodeElementRef

    def __post_init__(self):
        if self.kind is not RefactoringKind.OTHER:
            if not self.before.file_path or not self.after.file_path:
                raise MalformedReport(
                    f"{self.kind.value} record needs file paths on both sides"
                )


_KIND_BY_TEXT = {
    "rename method": RefactoringKind.RENAME_METHOD,
    "rename class": RefactoringKind.RENAME_CLASS,
    "move class": RefactoringKind.MOVE_CLASS,
    "move and rename class": RefactoringKind.MOVE_CLASS,
    "move file": RefactoringKind.MOVE_RENAME_FILE,
    "rename file": RefactoringKind.MOVE_RENAME_FILE,
    "move and rename file": RefactoringKind.MOVE_RENAME_FILE,
    "extract method": RefactoringKind.EXTRACT_METHOD,
    "extract and move method": RefactoringKind.EXTRACT_METHOD,
}


def _classify_kind(text: str) -> RefactoringKind:
    return _KIND_BY_TEXT.get(" ".join(text.lower().split()), RefactoringKind.OTHER)


def _parse_xml(data: bytes) -> ET.Element:
    try:
        return ET.fromstring(data)
    except ET.ParseError as err:
        line, column = err.position
        raise MalformedReport(
            f"invalid XML at line {line}, column {column}: {err}"
        ) from err


def _require_attr(elem: ET.Element, name: str, context: str) -> str:
    value = elem.get(name)
    if value is None:
        raise MissingAttribute(f"<{elem.tag}> in {context} lacks attribute {name!r}")
    return value


def _int_attr(elem: ET.Element, name: str, context: str) -> int:
    raw = _require_attr(elem, name, context)
    try:
        return int(raw)
    except ValueError as err:
        raise MalformedReport(
            f"<{elem.tag}> in {context}: attribute {name!r} is not an integer: {raw!r}"
        ) from err


def _strip_root(path: str, root: str | Path | None) -> str:
    cleaned = canonicalize_path(path)
    if root is None:
        return cleaned
    prefix = canonicalize_path(str(root)).rstrip("/")
    if prefix and cleaned.startswith(prefix + "/"):
        return cleaned[len(prefix) + 1 :]
    return cleaned


def _finish_set(side: Side, raw: Iterable[WarningInstance]) -> WarningSet:
    """Assign ordinals in document order among metadata duplicates, then
    build the canonical set."""
    counts: dict[tuple, int] = {}
    out = []
    for w in raw:
        key = w.metadata_key()
        ordinal = counts.get(key, 0)
        counts[key] = ordinal + 1
        out.append(w if ordinal == 0 else replace(w, ordinal=ordinal))
    return WarningSet.from_warnings(side, out)


def _basename_class(file_path: str) -> str:
    stem = file_path.rsplit("/", 1)[-1]
    return stem.rsplit(".", 1)[0] if "." in stem else stem


def parse_pmd_report(
    data: bytes,
    side: Side,
    *,
    project: str = "",
    root: str | Path | None = None,
) -> WarningSet:
    """WarningSet from PMD's XML reporter output.

    warning_type comes from the violation's rule attribute; a violation
    without a class attribute falls back to the file basename so exact
    matching stays usable.
    """
    doc = _parse_xml(data)
    raw = []
    for file_elem in doc.iter("file"):
        fname = _require_attr(file_elem, "name", "<pmd>")
        file_path = _strip_root(fname, root)
        for violation in file_elem.iter("violation"):
            context = f"file {fname!r}"
            raw.append(
                WarningInstance(
                    warning_type=_require_attr(violation, "rule", context),
                    file_path=file_path,
                    start_line=_int_attr(violation, "beginline", context),
                    end_line=_int_attr(violation, "endline", context),
                    side=side,
                    project=project,
                    class_name=violation.get("class") or _basename_class(file_path),
                    method_name=violation.get("method", ""),
                    field_name=violation.get("variable", ""),
                )
            )
    return _finish_set(side, raw)


def _pick_primary(elems: list[ET.Element]) -> ET.Element | None:
    for e in elems:
        if e.get("primary", "").lower() == "true":
            return e
    return elems[0] if elems else None


def parse_spotbugs_report(
    data: bytes,
    side: Side,
    *,
    project: str = "",
    root: str | Path | None = None,
) -> WarningSet:
    """WarningSet from SpotBugs' XML reporter output.

    Class/Method/Field and the line range come from the elements marked
    primary="true", falling back to the first of each kind.
    """
    doc = _parse_xml(data)
    raw = []
    for bug in doc.iter("BugInstance"):
        wtype = _require_attr(bug, "type", "<BugCollection>")
        context = f"BugInstance {wtype!r}"
        klass = _pick_primary(bug.findall("Class"))
        method = _pick_primary(bug.findall("Method"))
        fld = _pick_primary(bug.findall("Field"))
        source = _pick_primary(bug.findall("SourceLine"))
        if source is None:
            source = _pick_primary(list(bug.iter("SourceLine")))
        if source is None:
            raise MissingAttribute(f"{context} has no SourceLine element")
        raw.append(
            WarningInstance(
                warning_type=wtype,
                file_path=_strip_root(
                    _require_attr(source, "sourcepath", context), root
                ),
                start_line=_int_attr(source, "start", context),
                end_line=_int_attr(source, "end", context),
                side=side,
                project=project,
                class_name=klass.get("classname", "") if klass is not None else "",
                method_name=method.get("name", "") if method is not None else "",
                field_name=fld.get("name", "") if fld is not None else "",
            )
        )
    return _finish_set(side, raw)


_GENERIC_KEYS = (
    "warning_type",
    "project",
    "class",
    "method",
    "field",
    "file_path",
    "start_line",
    "end_line",
)


def parse_generic_warnings(data: bytes, side: Side) -> WarningSet:
    """WarningSet from the tool-neutral JSON list format."""
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as err:
        raise MalformedReport(
            f"invalid JSON at offset {err.pos}: {err.msg}"
        ) from err
    if not isinstance(doc, list):
        raise MalformedReport(f"expected a top-level list, got {type(doc).__name__}")
    raw = []
    for idx, item in enumerate(doc):
        if not isinstance(item, dict):
            raise MalformedReport(f"record {idx} is not an object")
        for key in ("warning_type", "file_path", "start_line", "end_line"):
            if key not in item:
                raise MissingAttribute(f"record {idx} lacks key {key!r}")
        for key in ("start_line", "end_line"):
            if not isinstance(item[key], int) or isinstance(item[key], bool):
                raise SchemaViolation(f"record {idx}: {key} must be an integer")
        for key in ("warning_type", "project", "class", "method", "field", "file_path"):
            if key in item and not isinstance(item[key], str):
                raise SchemaViolation(f"record {idx}: {key} must be a string")
        raw.append(
            WarningInstance(
                warning_type=item["warning_type"],
                file_path=item["file_path"],
                start_line=item["start_line"],
                end_line=item["end_line"],
                side=side,
                project=item.get("project", ""),
                class_name=item.get("class", ""),
                method_name=item.get("method", ""),
                field_name=item.get("field", ""),
            )
        )
    return _finish_set(side, raw)


def serialize_generic_warnings(warnings: WarningSet) -> bytes:
    """Canonical serialization of a WarningSet in the generic format:
    canonical set order, sorted keys, two-space indent."""
    records = [
        {
            "warning_type": w.warning_type,
            "project": w.project,
            "class": w.class_name,
            "method": w.method_name,
            "field": w.field_name,
            "file_path": w.file_path,
            "start_line": w.start_line,
            "end_line": w.end_line,
        }
        for w in warnings
    ]
    return (json.dumps(records, sort_keys=True, indent=2, ensure_ascii=False) + "\n").encode(
        "utf-8"
    )


_KIND_TEXT = {
    RefactoringKind.RENAME_METHOD: "Rename Method",
    RefactoringKind.RENAME_CLASS: "Rename Class",
    RefactoringKind.MOVE_CLASS: "Move Class",
    RefactoringKind.MOVE_RENAME_FILE: "Move And Rename File",
    RefactoringKind.EXTRACT_METHOD: "Extract Method",
    RefactoringKind.OTHER: "Other",
}


def serialize_refactorings(records: Iterable[RefactoringRecord]) -> bytes:
    """Canonical flat-list serialization accepted by parse_refactorings."""
    def element(ref: CodeElementRef) -> dict:
        return {
            "file": ref.file_path,
            "class": ref.class_name,
            "method": ref.method_name,
            "field": ref.field_name,
            "start_line": ref.start_line,
            "end_line": ref.end_line,
        }

    payload = [
        {
            "type": _KIND_TEXT[r.kind],
            "before": element(r.before),
            "after": element(r.after),
        }
        for r in records
    ]
    return (json.dumps(payload, sort_keys=True, indent=2, ensure_ascii=False) + "\n").encode(
        "utf-8"
    )


def _element_from_mapping(obj: Mapping, context: str) -> CodeElementRef:
    if not isinstance(obj, Mapping):
        raise MalformedReport(f"{context} is not an object")
    def text(key: str) -> str:
        value = obj.get(key, "")
        if not isinstance(value, str):
            raise MalformedReport(f"{context}: {key} must be a string")
        return value
    def number(key: str) -> int:
        value = obj.get(key, 0)
        if not isinstance(value, int) or isinstance(value, bool):
            raise MalformedReport(f"{context}: {key} must be an integer")
        return value
    return CodeElementRef(
        file_path=text("file"),
        class_name=text("class"),
        method_name=text("method"),
        field_name=text("field"),
        start_line=number("start_line"),
        end_line=number("end_line"),
    )


def _element_from_location(obj: Mapping, context: str) -> CodeElementRef:
    if not isinstance(obj, Mapping):
        raise MalformedReport(f"{context} is not an object")
    element_type = str(obj.get("codeElementType", ""))
    element = str(obj.get("codeElement", "") or "")
    class_name = ""
    method_name = ""
    if "METHOD" in element_type:
        method_name = element
    elif "CLASS" in element_type or "TYPE" in element_type:
        class_name = element
    start = obj.get("startLine", 0)
    end = obj.get("endLine", 0)
    if not isinstance(start, int) or not isinstance(end, int):
        raise MalformedReport(f"{context}: startLine/endLine must be integers")
    return CodeElementRef(
        file_path=str(obj.get("filePath", "")),
        class_name=class_name,
        method_name=method_name,
        start_line=start,
        end_line=end,
    )


def _record_from_obj(obj: Mapping, context: str) -> RefactoringRecord:
    if "before" in obj or "after" in obj:
        kind = _classify_kind(str(obj.get("type", "")))
        return RefactoringRecord(
            kind=kind,
            before=_element_from_mapping(obj.get("before", {}), f"{context}.before"),
            after=_element_from_mapping(obj.get("after", {}), f"{context}.after"),
        )
    if "leftSideLocations" in obj or "rightSideLocations" in obj:
        kind = _classify_kind(str(obj.get("type", "")))
        lefts = obj.get("leftSideLocations") or []
        rights = obj.get("rightSideLocations") or []
        if not isinstance(lefts, list) or not isinstance(rights, list):
            raise MalformedReport(f"{context}: side locations must be lists")
        before = (
            _element_from_location(lefts[0], f"{context}.left") if lefts else CodeElementRef()
        )
        after = (
            _element_from_location(rights[0], f"{context}.right") if rights else CodeElementRef()
        )
        return RefactoringRecord(kind=kind, before=before, after=after)
    raise MalformedReport(f"{context} has neither before/after nor side locations")


def parse_refactorings(data: bytes) -> list[RefactoringRecord]:
    """Refactoring records from either the flat record list or the
    per-commit output shape of the usual mining tool.

    Unrecognized kind strings become kind OTHER and are retained in order;
    a recognized kind without file paths on both sides is malformed.
    """
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as err:
        raise MalformedReport(f"invalid JSON at offset {err.pos}: {err.msg}") from err
    if isinstance(doc, dict) and "commits" in doc:
        entries = []
        commits = doc["commits"]
        if not isinstance(commits, list):
            raise MalformedReport("commits must be a list")
        for c_idx, commit in enumerate(commits):
            if not isinstance(commit, dict):
                raise MalformedReport(f"commit {c_idx} is not an object")
            refs = commit.get("refactorings", [])
            if not isinstance(refs, list):
                raise MalformedReport(f"commit {c_idx}: refactorings must be a list")
            entries.extend(refs)
    elif isinstance(doc, dict) and "refactorings" in doc:
        entries = doc["refactorings"]
        if not isinstance(entries, list):
            raise MalformedReport("refactorings must be a list")
    elif isinstance(doc, list):
        entries = doc
    else:
        raise MalformedReport("expected a record list or a commits object")
    out = []
    for idx, obj in enumerate(entries):
        if not isinstance(obj, dict):
            raise MalformedReport(f"record {idx} is not an object")
        out.append(_record_from_obj(obj, f"record {idx}"))
    return out
