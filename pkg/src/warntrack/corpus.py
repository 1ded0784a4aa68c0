"""Seeded generator of synthetic commit pairs with known ground truth.

Every pair mixes scenarios whose correct classification is fixed by
construction: warnings that persist through line shifts and moved blocks
(both cascades recover them), warnings hit by refactorings (recoverable
only with the refactoring records), genuinely resolved and introduced
warnings, and duplicated-snippet traps where greedy claiming strands a
warning that the assignment solver recovers. Scenario kinds use disjoint
warning types, so strategies cannot pair warnings across scenarios.

The per-scenario file contents are salted with the pair index, which keeps
diff alignments unambiguous and context fingerprints dissimilar across
instances of the same scenario kind.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .errors import SchemaViolation
from .evaluation import GroundTruthLabel, write_labels
from .ingest import (
    CodeElementRef,
    RefactoringKind,
    RefactoringRecord,
    SourceTree,
    serialize_generic_warnings,
    serialize_refactorings,
)
from .model import EvolutionStatus, Side, WarningInstance, WarningSet, warning_id

DEFAULT_PAIRS = 50
DEFAULT_SEED = 2024

# one warning type per scenario kind; type gates isolate the scenarios
_TYPE_SHIFT = "UnusedLocalVariable"
_TYPE_MOVE = "EmptyCatchBlock"
_TYPE_RENAME = "NPathComplexity"
_TYPE_CLASS = "GodClass"
_TYPE_FILE = "CyclomaticComplexity"
_TYPE_GONE = "UnusedPrivateField"
_TYPE_FRESH = "ExcessiveMethodLength"
_TYPE_TRAP = "SwitchDensity"
_TYPE_CHURN = "CognitiveComplexity"


@dataclass(frozen=True)
class TrapFixture:
    """A single-file duplicated-snippet layout where greedy claiming fails.

    All warnings are persistent by construction; the file pair is
    self-contained and can be tracked on its own or merged into a larger
    commit pair.
    """

    pre_files: dict[str, str]
    post_files: dict[str, str]
    pre_warnings: tuple[WarningInstance, ...]
    post_warnings: tuple[WarningInstance, ...]

    def pre_set(self) -> WarningSet:
        return WarningSet.from_warnings(Side.PRE, self.pre_warnings)

    def post_set(self) -> WarningSet:
        return WarningSet.from_warnings(Side.POST, self.post_warnings)

    def pre_tree(self) -> SourceTree:
        return SourceTree.in_memory(self.pre_files)

    def post_tree(self) -> SourceTree:
        return SourceTree.in_memory(self.post_files)


@dataclass(frozen=True)
class CommitPairScenario:
    """One generated commit pair: sources, warnings, records, truth."""

    index: int
    name: str
    pre_warnings: WarningSet
    post_warnings: WarningSet
    pre_files: dict[str, str]
    post_files: dict[str, str]
    records: tuple[RefactoringRecord, ...]
    labels: tuple[GroundTruthLabel, ...]
    refactoring_affected_pre: frozenset[str]
    refactoring_affected_post: frozenset[str]
    scenario_counts: dict[str, int]

    def pre_tree(self) -> SourceTree:
        return SourceTree.in_memory(self.pre_files)

    def post_tree(self) -> SourceTree:
        return SourceTree.in_memory(self.post_files)

    def truth(self) -> dict[str, EvolutionStatus]:
        return {label.warning_id: label.true_status for label in self.labels}


def _text(lines: Sequence[str]) -> str:
    return "\n".join(lines) + "\n"


def _filler(tag: str, n: int, what: str) -> list[str]:
    return [f"int {what}_{tag}_{i} = seed_{tag}({i});" for i in range(1, n + 1)]


class _PairBuilder:
    def __init__(self, index: int):
        self.index = index
        self.tag = f"p{index}"
        self.pre_files: dict[str, str] = {}
        self.post_files: dict[str, str] = {}
        self.pre_warnings: list[WarningInstance] = []
        self.post_warnings: list[WarningInstance] = []
        self.records: list[RefactoringRecord] = []
        self.labels: list[GroundTruthLabel] = []
        self.affected_pre: list[str] = []
        self.affected_post: list[str] = []
        self.scenario_counts: dict[str, int] = {}

    def count(self, scenario: str) -> None:
        self.scenario_counts[scenario] = self.scenario_counts.get(scenario, 0) + 1

    def warn(self, side: Side, path: str, start: int, end: int, wtype: str, **kw):
        w = WarningInstance(
            warning_type=wtype,
            file_path=path,
            start_line=start,
            end_line=end,
            side=side,
            **kw,
        )
        (self.pre_warnings if side is Side.PRE else self.post_warnings).append(w)
        return w

    def label(self, w: WarningInstance, status: EvolutionStatus) -> None:
        self.labels.append(GroundTruthLabel(warning_id(w), status))

    def persist(self, *warnings: WarningInstance) -> None:
        for w in warnings:
            self.label(w, EvolutionStatus.PERSISTENT)

    def affected(self, pre: WarningInstance, post: WarningInstance) -> None:
        self.affected_pre.append(warning_id(pre))
        self.affected_post.append(warning_id(post))

    def build(self) -> CommitPairScenario:
        return CommitPairScenario(
            index=self.index,
            name=f"pair_{self.index:03d}",
            pre_warnings=WarningSet.from_warnings(Side.PRE, self.pre_warnings),
            post_warnings=WarningSet.from_warnings(Side.POST, self.post_warnings),
            pre_files=dict(self.pre_files),
            post_files=dict(self.post_files),
            records=tuple(self.records),
            labels=tuple(self.labels),
            refactoring_affected_pre=frozenset(self.affected_pre),
            refactoring_affected_post=frozenset(self.affected_post),
            scenario_counts=dict(self.scenario_counts),
        )


def _line_shift(b: _PairBuilder, rng: random.Random) -> None:
    """Lines inserted above: location matching must follow the shift."""
    tag = f"{b.tag}sh"
    shift = rng.randint(1, 5)
    lines = _filler(tag, 4, "head")
    regions = []
    for k in range(2):
        lines += _filler(f"{tag}{k}", 3, "gap")
        start = len(lines) + 1
        lines += [
            f"boolean flag_{tag}_{k} = probe_{tag}({k});",
            f"if (flag_{tag}_{k}) audit_{tag}_{k}();",
        ]
        regions.append((start, start + 1, k))
    lines += _filler(tag, 3, "tail")
    path = f"src/Shift{b.index}.java"
    b.pre_files[path] = _text(lines)
    b.post_files[path] = _text(_filler(tag, shift, "intro") + lines)
    for start, end, k in regions:
        names = dict(class_name=f"Shift{b.index}", method_name=f"run{k}")
        pre = b.warn(Side.PRE, path, start, end, _TYPE_SHIFT, **names)
        post = b.warn(Side.POST, path, start + shift, end + shift, _TYPE_SHIFT, **names)
        b.persist(pre, post)
    b.count("line_shift")


def _snippet_move(b: _PairBuilder, rng: random.Random, which: int) -> None:
    """The warned block moves below unrelated lines; only its content survives."""
    tag = f"{b.tag}mv{which}"
    head = _filler(tag, 2, "head")
    block = [
        f"try {{ refresh_{tag}(); }}",
        f"catch (IoFault_{tag} e) {{ note_{tag}(e); }}",
        f"finally {{ close_{tag}(); }}",
    ]
    mid = _filler(tag, rng.randint(18, 26), "mid")
    path = f"src/Mover{b.index}_{which}.java"
    b.pre_files[path] = _text(head + block + mid)
    b.post_files[path] = _text(head + mid + block)
    names = dict(class_name=f"Mover{b.index}_{which}", method_name="relocate")
    pre = b.warn(Side.PRE, path, 3, 5, _TYPE_MOVE, **names)
    post = b.warn(
        Side.POST, path, 3 + len(mid), 5 + len(mid), _TYPE_MOVE, **names
    )
    b.persist(pre, post)
    b.count("snippet_move")


def _method_rename(b: _PairBuilder) -> None:
    """Renamed method, also reordered below its sibling: the old lines land
    in a pure deletion, so the diff offers no image to match through."""
    tag = b.tag
    old, new = f"walkTree{tag}", f"descend{tag}"
    path = f"src/Service{b.index}.java"

    def walk(name: str) -> list[str]:
        return [
            f"  void {name}(int a) {{",
            f"    if (a > 0) {{ this.{name}(a - 1); }}",
            f"    trace_{tag}(\"{name} exit\", a);",
            f"  }} /* {tag}w */",
        ]

    head = [
        f"package corpus.gen{tag};",
        f"final class Service{b.index} {{",
        f"  private int depth{tag} = 0;",
    ]
    size = [
        f"  int size{tag}() {{",
        f"    return depth{tag};",
        f"  }} /* {tag}s */",
    ]
    b.pre_files[path] = _text(head + walk(old) + size + ["}"])
    b.post_files[path] = _text(head + size + walk(new) + ["}"])
    pre = b.warn(
        Side.PRE, path, 4, 6, _TYPE_RENAME,
        class_name=f"Service{b.index}", method_name=old,
    )
    post = b.warn(
        Side.POST, path, 7, 9, _TYPE_RENAME,
        class_name=f"Service{b.index}", method_name=new,
    )
    b.records.append(
        RefactoringRecord(
            kind=RefactoringKind.RENAME_METHOD,
            before=CodeElementRef(
                file_path=path, method_name=old, start_line=4, end_line=7
            ),
            after=CodeElementRef(
                file_path=path, method_name=new, start_line=7, end_line=10
            ),
        )
    )
    b.persist(pre, post)
    b.affected(pre, post)
    b.count("method_rename")


def _class_rename_move(b: _PairBuilder) -> None:
    """Renamed class in a renamed file; the old name saturates the context."""
    tag = b.tag
    old, new = f"WidgetA{tag}", f"WidgetB{tag}"
    old_path = f"src/WidgetA{b.index}.java"
    new_path = f"src/widgets/WidgetB{b.index}.java"

    def body(name: str) -> list[str]:
        return [
            f"package corpus.gen{tag};",
            f"public class {name} {{",
            f"  static {name} shared{tag};",
            f"  private int slots{tag} = 4;",
            f"  {name}(int s) {{ slots{tag} = s; }}",
            f"  int grow{tag}(int n) {{",
            f"    return slots{tag} + n;",
            f"  }} /* {tag}g */",
            f"  static {name} make{tag}() {{",
            f"    return new {name}(8);",
            f"  }} /* {tag}m */",
            "}",
        ]

    b.pre_files[old_path] = _text(body(old))
    b.post_files[new_path] = _text(body(new))
    pre = b.warn(Side.PRE, old_path, 2, 11, _TYPE_CLASS, class_name=old)
    post = b.warn(Side.POST, new_path, 2, 11, _TYPE_CLASS, class_name=new)
    b.records.append(
        RefactoringRecord(
            kind=RefactoringKind.RENAME_CLASS,
            before=CodeElementRef(file_path=old_path, class_name=old),
            after=CodeElementRef(file_path=new_path, class_name=new),
        )
    )
    b.persist(pre, post)
    b.affected(pre, post)
    b.count("class_rename_move")


def _file_move_edit(b: _PairBuilder) -> None:
    """File moved to a new directory with edits inside the warned context."""
    tag = b.tag
    old_path = f"src/Util{b.index}.java"
    new_path = f"src/impl/Util{b.index}.java"
    pre_lines = [
        f"package corpus.gen{tag};",
        f"final class Util{b.index} {{",
        f"  static int base{tag} = 3;",
        f"  static int twist{tag}(int v) {{",
        f"    int acc{tag} = v * base{tag};",
        f"    acc{tag} += probe{tag}(v);",
        f"    return acc{tag};",
        f"  }} /* {tag}t */",
        f"  static int probe{tag}(int v) {{ return v - base{tag}; }}",
        "}",
    ]
    post_lines = list(pre_lines)
    post_lines[3] = f"  static int twist{tag}(int v, int w) {{"
    post_lines[5] = f"    acc{tag} += probe{tag}(v) + w;"
    post_lines[8] = f"  static int probe{tag}(int v) {{ return v + base{tag}; }}"
    b.pre_files[old_path] = _text(pre_lines)
    b.post_files[new_path] = _text(post_lines)
    names = dict(class_name=f"Util{b.index}", method_name=f"twist{tag}")
    pre = b.warn(Side.PRE, old_path, 5, 7, _TYPE_FILE, **names)
    post = b.warn(Side.POST, new_path, 5, 7, _TYPE_FILE, **names)
    b.records.append(
        RefactoringRecord(
            kind=RefactoringKind.MOVE_RENAME_FILE,
            before=CodeElementRef(file_path=old_path),
            after=CodeElementRef(file_path=new_path),
        )
    )
    b.persist(pre, post)
    b.affected(pre, post)
    b.count("file_move_edit")


def _true_resolved(b: _PairBuilder) -> None:
    """Two warned regions deleted outright; the rest of the file survives."""
    tag = f"{b.tag}rm"
    path = f"src/Legacy{b.index}.java"
    head = _filler(tag, 3, "keep")
    region_a = [f"private int ghostA_{tag};", f"private int ghostB_{tag};"]
    mid = _filler(tag, 4, "midk")
    region_b = [f"private long relicA_{tag};", f"private long relicB_{tag};"]
    tail = _filler(tag, 3, "tailk")
    b.pre_files[path] = _text(head + region_a + mid + region_b + tail)
    b.post_files[path] = _text(head + mid + tail)
    first = b.warn(
        Side.PRE, path, 4, 5, _TYPE_GONE,
        class_name=f"Legacy{b.index}", field_name=f"ghostA_{tag}",
    )
    second = b.warn(
        Side.PRE, path, 10, 11, _TYPE_GONE,
        class_name=f"Legacy{b.index}", field_name=f"relicA_{tag}",
    )
    b.label(first, EvolutionStatus.RESOLVED)
    b.label(second, EvolutionStatus.RESOLVED)
    b.count("true_resolved")


def _true_new(b: _PairBuilder) -> None:
    """A new file introduces two warnings with no pre-commit counterpart."""
    tag = f"{b.tag}nw"
    path = f"src/Fresh{b.index}.java"
    lines = (
        _filler(tag, 2, "nh")
        + [
            f"int loadA_{tag} = fetch_{tag}(1);",
            f"int loadB_{tag} = fetch_{tag}(2);",
            f"int loadC_{tag} = fetch_{tag}(3);",
        ]
        + _filler(tag, 2, "ng")
        + [
            f"long packA_{tag} = mass_{tag}(1);",
            f"long packB_{tag} = mass_{tag}(2);",
            f"long packC_{tag} = mass_{tag}(3);",
        ]
    )
    b.post_files[path] = _text(lines)
    first = b.warn(
        Side.POST, path, 3, 5, _TYPE_FRESH,
        class_name=f"Fresh{b.index}", method_name="bulkA",
    )
    second = b.warn(
        Side.POST, path, 8, 10, _TYPE_FRESH,
        class_name=f"Fresh{b.index}", method_name="bulkB",
    )
    b.label(first, EvolutionStatus.NEWLY_INTRODUCED)
    b.label(second, EvolutionStatus.NEWLY_INTRODUCED)
    b.count("true_new")


def _drastic_rewrite(b: _PairBuilder) -> None:
    """A method body rewritten away while an unrelated warned block is
    appended: the replacement image and the new warning do not intersect."""
    tag = b.tag
    path = f"src/Core{b.index}.java"
    head = _filler(tag, 3, "corehead")
    tail = _filler(tag, 6, "coretail")
    old_body = _filler(f"{tag}old", 8, "churn")
    new_body = _filler(f"{tag}new", 4, "churn")
    extra = _filler(f"{tag}add", 8, "grind")
    b.pre_files[path] = _text(head + old_body + tail)
    b.post_files[path] = _text(head + new_body + tail + extra)
    pre = b.warn(
        Side.PRE, path, 5, 10, _TYPE_CHURN,
        class_name=f"Core{b.index}", method_name="churn",
    )
    post = b.warn(
        Side.POST, path, 15, 18, _TYPE_CHURN,
        class_name=f"Core{b.index}", method_name="grind",
    )
    b.label(pre, EvolutionStatus.RESOLVED)
    b.label(post, EvolutionStatus.NEWLY_INTRODUCED)
    b.count("drastic_rewrite")


def greedy_trap_2x2(tag: str = "trap2") -> TrapFixture:
    """Duplicated 10-line block, one copy deleted; two post ranges overlap
    the surviving copy. Claimed in range order, the better-located warning
    takes the range the other one needs."""
    block = [f"case {i}: return run_{tag}_{i}();" for i in range(1, 11)]
    sep = [f"default: mark_{tag}();", f"break; /* {tag} */"]
    tail = _filler(tag, 5, "tail")
    path = f"src/Switch_{tag}.java"
    pre_files = {path: _text(block + sep + block + tail)}
    post_files = {path: _text(block + sep + tail)}
    names = dict(class_name=f"Sw_{tag}", method_name="dispatch")

    def warn(side, start, end):
        return WarningInstance(
            warning_type=_TYPE_TRAP, file_path=path,
            start_line=start, end_line=end, side=side, **names,
        )

    return TrapFixture(
        pre_files=pre_files,
        post_files=post_files,
        pre_warnings=(warn(Side.PRE, 1, 10), warn(Side.PRE, 13, 21)),
        post_warnings=(warn(Side.POST, 1, 9), warn(Side.POST, 4, 10)),
    )


def greedy_trap_3x3(tag: str = "trap3") -> TrapFixture:
    """Three copies of a 9-line block (distinct closing lines pin the diff);
    the post file keeps two. Greedy claiming strands the third warning."""
    block = [f"case {i}: return hop_{tag}_{i}();" for i in range(1, 10)]
    ends = [f"int end_{tag}_{k} = {k};" for k in (1, 2, 3)]
    sep1 = [f"default: sweep_{tag}();", f"break; /* s1 {tag} */"]
    sep2 = [f"continue; /* s2 {tag} */", f"hold_{tag}(0);"]
    tail = _filler(tag, 5, "tail")
    path = f"src/Switch_{tag}.java"
    pre_lines = (
        block + [ends[0]] + sep1 + block + [ends[1]] + sep2 + block + [ends[2]] + tail
    )
    post_lines = block + [ends[0]] + sep1 + block + [ends[1]] + tail
    names = dict(class_name=f"Sw_{tag}", method_name="dispatch")

    def warn(side, start, end):
        return WarningInstance(
            warning_type=_TYPE_TRAP, file_path=path,
            start_line=start, end_line=end, side=side, **names,
        )

    return TrapFixture(
        pre_files={path: _text(pre_lines)},
        post_files={path: _text(post_lines)},
        pre_warnings=(
            warn(Side.PRE, 1, 10),
            warn(Side.PRE, 13, 21),
            warn(Side.PRE, 25, 33),
        ),
        post_warnings=(
            warn(Side.POST, 1, 9),
            warn(Side.POST, 4, 10),
            warn(Side.POST, 13, 22),
        ),
    )


def _merge_trap(b: _PairBuilder, fixture: TrapFixture, scenario: str) -> None:
    b.pre_files.update(fixture.pre_files)
    b.post_files.update(fixture.post_files)
    for w in fixture.pre_warnings:
        b.pre_warnings.append(w)
        b.label(w, EvolutionStatus.PERSISTENT)
    for w in fixture.post_warnings:
        b.post_warnings.append(w)
        b.label(w, EvolutionStatus.PERSISTENT)
    b.count(scenario)


def _generate_pair(index: int, rng: random.Random) -> CommitPairScenario:
    b = _PairBuilder(index)
    _line_shift(b, rng)
    for which in range(2):
        _snippet_move(b, rng, which)
    _method_rename(b)
    _class_rename_move(b)
    _file_move_edit(b)
    _true_resolved(b)
    _true_new(b)
    if index % 2 == 0:
        if index % 4 == 0:
            _merge_trap(b, greedy_trap_3x3(f"{b.tag}t3"), "greedy_trap_3x3")
        else:
            _merge_trap(b, greedy_trap_2x2(f"{b.tag}t2"), "greedy_trap_2x2")
    if index % 10 == 0:
        _drastic_rewrite(b)
    return b.build()


def generate_corpus(
    pairs: int = DEFAULT_PAIRS, seed: int = DEFAULT_SEED
) -> tuple[CommitPairScenario, ...]:
    """Deterministic commit-pair scenarios; same arguments, same corpus."""
    if pairs < 1:
        raise SchemaViolation(f"pairs must be >= 1, got {pairs}")
    master = random.Random(seed)
    return tuple(
        _generate_pair(idx, random.Random(master.getrandbits(64)))
        for idx in range(pairs)
    )


def write_corpus(
    corpus: Sequence[CommitPairScenario], out_dir: str | Path
) -> Path:
    """Materialize a corpus on disk; returns the manifest path.

    Layout per pair: pre/ and post/ file trees, generic warning reports,
    a refactoring record list, and a ground-truth label table. The manifest
    lists every pair with paths relative to the corpus root.
    """
    root = Path(out_dir)
    root.mkdir(parents=True, exist_ok=True)
    entries = []
    for pair in corpus:
        pair_dir = root / pair.name
        for rel, files in (("pre", pair.pre_files), ("post", pair.post_files)):
            for path, content in files.items():
                target = pair_dir / rel / path
                target.parent.mkdir(parents=True, exist_ok=True)
                target.write_text(content, encoding="utf-8")
        (pair_dir / "pre").mkdir(exist_ok=True)
        (pair_dir / "post").mkdir(exist_ok=True)
        (pair_dir / "pre_warnings.json").write_bytes(
            serialize_generic_warnings(pair.pre_warnings)
        )
        (pair_dir / "post_warnings.json").write_bytes(
            serialize_generic_warnings(pair.post_warnings)
        )
        (pair_dir / "refactorings.json").write_bytes(
            serialize_refactorings(pair.records)
        )
        write_labels(pair.labels, pair_dir / "labels.csv")
        entries.append(
            {
                "name": pair.name,
                "pre_root": f"{pair.name}/pre",
                "post_root": f"{pair.name}/post",
                "pre_warnings": f"{pair.name}/pre_warnings.json",
                "post_warnings": f"{pair.name}/post_warnings.json",
                "refactorings": f"{pair.name}/refactorings.json",
                "labels": f"{pair.name}/labels.csv",
                "scenarios": pair.scenario_counts,
            }
        )
    manifest = root / "manifest.json"
    payload = {"pair_count": len(corpus), "pairs": entries}
    manifest.write_text(
        json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
    return manifest
