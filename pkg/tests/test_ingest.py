"""Report parsers, refactoring records, and source tree behavior."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import pytest
from hypothesis import given
from hypothesis import strategies as st

from warntrack.errors import (
    FileMissing,
    MalformedReport,
    MissingAttribute,
    SchemaViolation,
)
from warntrack.ingest import (
    CodeElementRef,
    RefactoringKind,
    RefactoringRecord,
    SourceTree,
    load_source,
    parse_generic_warnings,
    parse_pmd_report,
    parse_refactorings,
    parse_spotbugs_report,
    serialize_generic_warnings,
)
from warntrack.model import Side

PMD_ONE = b"""<?xml version="1.0"?>
<pmd version="6.55.0">
  <file name="/work/proj/org/jclouds/ContextBuilder.java">
    <violation beginline="70" endline="75" rule="SE_BAD_FIELD" class="ContextBuilderTest"/>
  </file>
</pmd>
"""

SPOTBUGS_ONE = b"""<?xml version="1.0"?>
<BugCollection version="4.7.3">
  <BugInstance type="SE_BAD_FIELD" priority="2">
    <Class classname="ContextBuilderTest" primary="true">
      <SourceLine sourcepath="org/jclouds/ContextBuilder.java" start="1" end="210"/>
    </Class>
    <SourceLine sourcepath="org/jclouds/ContextBuilder.java" start="70" end="75" primary="true"/>
  </BugInstance>
</BugCollection>
"""


def test_pmd_single_violation():
    ws = parse_pmd_report(PMD_ONE, Side.PRE, project="jclouds", root="/work/proj")
    assert len(ws) == 1
    w = next(iter(ws))
    assert w.warning_type == "SE_BAD_FIELD"
    assert w.file_path == "org/jclouds/ContextBuilder.java"
    assert (w.start_line, w.end_line) == (70, 75)
    assert w.class_name == "ContextBuilderTest"
    assert w.method_name == "" and w.field_name == ""
    assert w.project == "jclouds"


def test_pmd_empty_report():
    assert len(parse_pmd_report(b"<pmd/>", Side.PRE)) == 0


def test_pmd_duplicate_violations_get_ordinals():
    xml = b"""<pmd><file name="a/B.java">
      <violation beginline="5" endline="5" rule="R1" class="B"/>
      <violation beginline="5" endline="5" rule="R1" class="B"/>
    </file></pmd>"""
    ws = parse_pmd_report(xml, Side.POST)
    assert sorted(w.ordinal for w in ws) == [0, 1]
    assert len(set(ws.ids())) == 2


def test_pmd_class_falls_back_to_basename():
    xml = b"""<pmd><file name="src/util/Strings.java">
      <violation beginline="3" endline="4" rule="R2"/>
    </file></pmd>"""
    w = next(iter(parse_pmd_report(xml, Side.PRE)))
    assert w.class_name == "Strings"


def test_pmd_missing_line_attribute():
    xml = b"""<pmd><file name="a/B.java">
      <violation endline="5" rule="R1"/>
    </file></pmd>"""
    with pytest.raises(MissingAttribute):
        parse_pmd_report(xml, Side.PRE)


def test_pmd_invalid_xml_names_position():
    with pytest.raises(MalformedReport) as exc:
        parse_pmd_report(b"<pmd><file", Side.PRE)
    assert "line" in str(exc.value)


def test_spotbugs_primary_source_line_wins():
    ws = parse_spotbugs_report(SPOTBUGS_ONE, Side.PRE)
    w = next(iter(ws))
    assert w.warning_type == "SE_BAD_FIELD"
    assert w.file_path == "org/jclouds/ContextBuilder.java"
    assert (w.start_line, w.end_line) == (70, 75)
    assert w.class_name == "ContextBuilderTest"
    assert w.method_name == ""


def test_spotbugs_method_and_field_names():
    xml = b"""<BugCollection><BugInstance type="NP_NULL">
      <Class classname="A"/>
      <Method name="setUp" signature="()V"/>
      <Field name="cache"/>
      <SourceLine sourcepath="A.java" start="10" end="12"/>
    </BugInstance></BugCollection>"""
    w = next(iter(parse_spotbugs_report(xml, Side.POST)))
    assert w.method_name == "setUp"
    assert w.field_name == "cache"


def test_spotbugs_first_source_line_without_primary():
    xml = b"""<BugCollection><BugInstance type="T">
      <SourceLine sourcepath="A.java" start="3" end="4"/>
      <SourceLine sourcepath="A.java" start="9" end="9"/>
    </BugInstance></BugCollection>"""
    w = next(iter(parse_spotbugs_report(xml, Side.PRE)))
    assert (w.start_line, w.end_line) == (3, 4)


def test_spotbugs_nested_source_line_fallback():
    xml = b"""<BugCollection><BugInstance type="T">
      <Class classname="A">
        <SourceLine sourcepath="A.java" start="7" end="8"/>
      </Class>
    </BugInstance></BugCollection>"""
    w = next(iter(parse_spotbugs_report(xml, Side.PRE)))
    assert (w.start_line, w.end_line) == (7, 8)


def test_spotbugs_empty_collection():
    assert len(parse_spotbugs_report(b"<BugCollection/>", Side.PRE)) == 0


def test_spotbugs_missing_sourcepath():
    xml = b"""<BugCollection><BugInstance type="T">
      <SourceLine start="3" end="4"/>
    </BugInstance></BugCollection>"""
    with pytest.raises(MissingAttribute):
        parse_spotbugs_report(xml, Side.PRE)


GENERIC_ONE = b"""[
  {
    "warning_type": "SE_BAD_FIELD",
    "project": "jclouds",
    "class": "ContextBuilderTest",
    "method": "",
    "field": "",
    "file_path": "org/jclouds/ContextBuilder.java",
    "start_line": 70,
    "end_line": 75
  }
]
"""


def test_generic_single_record():
    ws = parse_generic_warnings(GENERIC_ONE, Side.PRE)
    w = next(iter(ws))
    assert w.warning_type == "SE_BAD_FIELD"
    assert w.class_name == "ContextBuilderTest"
    assert (w.start_line, w.end_line) == (70, 75)


def test_generic_empty_list():
    assert len(parse_generic_warnings(b"[]", Side.PRE)) == 0


def test_generic_inverted_range_rejected():
    data = b'[{"warning_type": "T", "file_path": "a.java", "start_line": 75, "end_line": 70}]'
    with pytest.raises(SchemaViolation):
        parse_generic_warnings(data, Side.PRE)


def test_generic_missing_key():
    data = b'[{"file_path": "a.java", "start_line": 1, "end_line": 2}]'
    with pytest.raises(MissingAttribute):
        parse_generic_warnings(data, Side.PRE)


@pytest.mark.parametrize(
    "data",
    [
        b'{"warnings": []}',
        b"[42]",
        b'[{"warning_type": "T", "file_path": "a", "start_line": "1", "end_line": 2}]',
        b"not json",
    ],
)
def test_generic_malformed_inputs(data):
    with pytest.raises((MalformedReport, SchemaViolation)):
        parse_generic_warnings(data, Side.PRE)


generic_records = st.lists(
    st.fixed_dictionaries(
        {
            "warning_type": st.sampled_from(["T1", "T2"]),
            "project": st.sampled_from(["", "proj"]),
            "class": st.sampled_from(["", "C", "D"]),
            "method": st.sampled_from(["", "m()"]),
            "field": st.sampled_from(["", "f"]),
            "file_path": st.sampled_from(["a.java", "b/c.java"]),
            "start_line": st.integers(min_value=1, max_value=5),
            "end_line": st.integers(min_value=5, max_value=9),
        }
    ),
    max_size=8,
)


@given(generic_records)
def test_generic_round_trip(records):
    import json

    data = json.dumps(records).encode()
    first = parse_generic_warnings(data, Side.POST)
    second = parse_generic_warnings(serialize_generic_warnings(first), Side.POST)
    assert first == second


def test_generic_parse_deterministic():
    assert parse_generic_warnings(GENERIC_ONE, Side.PRE) == parse_generic_warnings(
        GENERIC_ONE, Side.PRE
    )


REF_COMPAT = b"""[
  {"type": "Rename Method",
   "before": {"file": "a/B.java", "class": "B", "method": "m1()", "start_line": 10, "end_line": 20},
   "after": {"file": "a/B.java", "class": "B", "method": "m2()", "start_line": 10, "end_line": 20}},
  {"type": "Inline Variable",
   "before": {"file": "a/B.java"},
   "after": {"file": "a/B.java"}}
]
"""


def test_refactorings_compat_records():
    records = parse_refactorings(REF_COMPAT)
    assert [r.kind for r in records] == [
        RefactoringKind.RENAME_METHOD,
        RefactoringKind.OTHER,
    ]
    first = records[0]
    assert first.before.method_name == "m1()"
    assert first.after.method_name == "m2()"
    assert first.before.file_path == "a/B.java"


def test_refactorings_empty_list():
    assert parse_refactorings(b"[]") == []


def test_refactorings_native_shape():
    data = b"""{
      "commits": [
        {"sha1": "abc", "refactorings": [
          {"type": "Rename Method",
           "leftSideLocations": [
             {"filePath": "a/B.java", "startLine": 10, "endLine": 20,
              "codeElementType": "METHOD_DECLARATION", "codeElement": "m1()"}],
           "rightSideLocations": [
             {"filePath": "a/B.java", "startLine": 10, "endLine": 21,
              "codeElementType": "METHOD_DECLARATION", "codeElement": "m2()"}]}
        ]}
      ]
    }"""
    records = parse_refactorings(data)
    assert len(records) == 1
    rec = records[0]
    assert rec.kind is RefactoringKind.RENAME_METHOD
    assert rec.before.file_path == "a/B.java"
    assert rec.before.method_name == "m1()"
    assert rec.after.method_name == "m2()"
    assert (rec.before.start_line, rec.before.end_line) == (10, 20)


def test_refactorings_recognized_kind_needs_files():
    data = b'[{"type": "Rename Method", "before": {"method": "m1()"}, "after": {"method": "m2()"}}]'
    with pytest.raises(MalformedReport):
        parse_refactorings(data)


def test_refactorings_invalid_json():
    with pytest.raises(MalformedReport):
        parse_refactorings(b"{nope")


def test_refactoring_record_invariant_direct():
    with pytest.raises(MalformedReport):
        RefactoringRecord(
            kind=RefactoringKind.MOVE_CLASS,
            before=CodeElementRef(file_path="a/B.java"),
            after=CodeElementRef(),
        )


def test_source_tree_reads_and_caches(tmp_path):
    target = tmp_path / "pkg" / "A.java"
    target.parent.mkdir()
    target.write_bytes(b"one\ntwo\nthree\n")
    tree = SourceTree(root=tmp_path)
    first = load_source(tree, "pkg/A.java")
    assert first == ("one", "two", "three")
    assert tree.lines("pkg/A.java") is first


def test_source_tree_crlf_equals_lf(tmp_path):
    (tmp_path / "lf.txt").write_bytes(b"a\nb\n")
    (tmp_path / "crlf.txt").write_bytes(b"a\r\nb\r\n")
    tree = SourceTree(root=tmp_path)
    assert tree.lines("lf.txt") == tree.lines("crlf.txt") == ("a", "b")


def test_source_tree_lone_cr_is_content(tmp_path):
    (tmp_path / "f.txt").write_bytes(b"a\rb\n")
    tree = SourceTree(root=tmp_path)
    assert tree.lines("f.txt") == ("a\rb",)


def test_source_tree_no_trailing_empty_line(tmp_path):
    (tmp_path / "f.txt").write_bytes(b"a\nb")
    tree = SourceTree(root=tmp_path)
    assert tree.lines("f.txt") == ("a", "b")


def test_source_tree_missing_file(tmp_path):
    tree = SourceTree(root=tmp_path)
    with pytest.raises(FileMissing):
        tree.lines("nope/Missing.java")
    assert not tree.has_file("nope/Missing.java")


def test_source_tree_concurrent_reads(tmp_path):
    for i in range(20):
        (tmp_path / f"f{i}.txt").write_text(f"content {i}\n")
    tree = SourceTree(root=tmp_path)
    with ThreadPoolExecutor(max_workers=8) as pool:
        results = list(pool.map(lambda i: tree.lines(f"f{i % 20}.txt"), range(200)))
    for i, lines in enumerate(results):
        assert lines == (f"content {i % 20}",)


def test_source_tree_in_memory():
    tree = SourceTree.in_memory({"a/B.java": "x\ny\n"})
    assert tree.lines("a/B.java") == ("x", "y")
    assert tree.has_file("a/B.java")
    with pytest.raises(FileMissing):
        tree.lines("other.java")
