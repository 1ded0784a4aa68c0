"""Per-strategy candidate generation and scoring."""

from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from warntrack.diffing import build_line_mapping, compute_diff
from warntrack.ingest import SourceTree
from warntrack.model import Side, Strategy, WarningInstance, warning_id
from warntrack.strategies import (
    StrategyConfig,
    context_fingerprint,
    exact_match,
    hash_candidates,
    location_candidates,
    normalize_snippet,
    snippet_candidates,
)


def mk(
    path: str = "a/App.java",
    wtype: str = "NP_NULL",
    start: int = 10,
    end: int = 12,
    side: Side = Side.PRE,
    **kw,
) -> WarningInstance:
    return WarningInstance(
        warning_type=wtype,
        file_path=path,
        start_line=start,
        end_line=end,
        side=side,
        **kw,
    )


def post(**kw) -> WarningInstance:
    kw.setdefault("side", Side.POST)
    return mk(**kw)


def identity_mapping(n: int = 40):
    lines = [f"line-{i}" for i in range(n)]
    return build_line_mapping(compute_diff(lines, lines))


# exact matching


def test_exact_identical_sets_all_match():
    pre = [mk(), mk(start=20, end=21, wtype="T2")]
    posts = [post(), post(start=20, end=21, wtype="T2")]
    pairs, pre_rem, post_rem = exact_match(pre, posts)
    assert len(pairs) == 2
    assert pre_rem == [] and post_rem == []
    for a, b in pairs:
        assert a.warning_type == b.warning_type


def test_exact_duplicates_pair_by_ordinal_rank():
    pre = [mk(ordinal=0), mk(ordinal=1)]
    posts = [post(ordinal=0)]
    pairs, pre_rem, post_rem = exact_match(pre, posts)
    assert len(pairs) == 1
    assert pairs[0][0].ordinal == 0 and pairs[0][1].ordinal == 0
    assert [w.ordinal for w in pre_rem] == [1]
    assert post_rem == []


def test_exact_rank_pairing_survives_ordinal_gaps():
    pre = [mk(ordinal=1), mk(ordinal=3)]
    posts = [post(ordinal=0), post(ordinal=2)]
    pairs, pre_rem, post_rem = exact_match(pre, posts)
    assert [(a.ordinal, b.ordinal) for a, b in pairs] == [(1, 0), (3, 2)]
    assert pre_rem == [] and post_rem == []


def test_exact_disjoint_types_no_matches():
    pre = [mk(wtype="T1")]
    posts = [post(wtype="T2")]
    pairs, pre_rem, post_rem = exact_match(pre, posts)
    assert pairs == []
    assert len(pre_rem) == 1 and len(post_rem) == 1


@given(
    pre_n=st.integers(min_value=0, max_value=4),
    post_n=st.integers(min_value=0, max_value=4),
    start=st.integers(min_value=1, max_value=3),
)
def test_exact_conserves_multiplicity(pre_n, post_n, start):
    pre = [mk(start=start, end=start, ordinal=i) for i in range(pre_n)]
    posts = [post(start=start, end=start, ordinal=i) for i in range(post_n)]
    pairs, pre_rem, post_rem = exact_match(pre, posts)
    assert len(pairs) == min(pre_n, post_n)
    assert len(pairs) + len(pre_rem) == pre_n
    assert len(pairs) + len(post_rem) == post_n


# location matching


def test_location_identity_full_overlap():
    pre_w = mk(start=10, end=12)
    cands = location_candidates(pre_w, [post(start=10, end=12)], identity_mapping())
    assert len(cands) == 1
    assert cands[0].strategy is Strategy.LOCATION
    assert cands[0].score == pytest.approx(1.0)


def test_location_deleted_range_is_empty():
    pre_lines = [f"l{i}" for i in range(20)]
    post_lines = pre_lines[:9] + pre_lines[12:]
    mapping = build_line_mapping(compute_diff(pre_lines, post_lines))
    pre_w = mk(start=10, end=12)
    assert location_candidates(pre_w, [post(start=10, end=12)], mapping) == []


def test_location_jaccard_arithmetic():
    pre_w = mk(start=10, end=15)
    cands = location_candidates(pre_w, [post(start=13, end=18)], identity_mapping())
    assert len(cands) == 1
    # image [10,15] vs [13,18]: 3 shared lines of 9 distinct
    assert cands[0].score == pytest.approx(0.5 + 0.5 * (3 / 9))


def test_location_type_gate():
    pre_w = mk(wtype="T1")
    assert (
        location_candidates(pre_w, [post(wtype="T2")], identity_mapping()) == []
    )


def test_location_file_gate():
    pre_w = mk(path="a/App.java")
    others = [post(path="b/Other.java")]
    assert location_candidates(pre_w, others, identity_mapping()) == []


def test_location_sorted_by_score_then_post_id():
    pre_w = mk(start=10, end=15)
    near = post(start=10, end=15)
    far = post(start=14, end=19)
    cands = location_candidates(pre_w, [far, near], identity_mapping())
    assert [c.score for c in cands] == sorted((c.score for c in cands), reverse=True)
    assert cands[0].post_id == warning_id(near)
    # equal-score duplicates tie-break on ascending post id
    twin_a = post(start=12, end=17, ordinal=0)
    twin_b = post(start=12, end=17, ordinal=1)
    twins = location_candidates(pre_w, [twin_b, twin_a], identity_mapping())
    assert [c.post_id for c in twins] == sorted(c.post_id for c in twins)


# snippet matching


BLOCK = [
    "if (value == null) {",
    "    throw new IllegalStateException();",
    "}",
]


def make_sources(pre_at: int, post_at: int, pre_len: int = 60, post_len: int = 60):
    pre_lines = [f"// filler {i}" for i in range(pre_len)]
    post_lines = [f"// filler {i}" for i in range(post_len)]
    pre_lines[pre_at - 1 : pre_at + 2] = BLOCK
    post_lines[post_at - 1 : post_at + 2] = BLOCK
    return pre_lines, post_lines


def test_snippet_moved_block_matches():
    pre_lines, post_lines = make_sources(pre_at=5, post_at=45)
    pre_w = mk(start=5, end=7)
    cands = snippet_candidates(
        pre_w, [post(start=45, end=47)], pre_lines, post_lines
    )
    assert len(cands) == 1
    assert cands[0].strategy is Strategy.SNIPPET
    assert cands[0].score == pytest.approx(0.9)


def test_snippet_one_token_change_rejected():
    pre_lines, post_lines = make_sources(pre_at=5, post_at=45)
    post_lines[45] = "    throw new IllegalArgumentException();"
    pre_w = mk(start=5, end=7)
    assert (
        snippet_candidates(pre_w, [post(start=45, end=47)], pre_lines, post_lines)
        == []
    )


def test_snippet_ignores_indentation_and_blank_lines():
    pre_lines = ["int x = compute();", "use(x);"]
    post_lines = ["", "      int x = compute();", "", "  use(x);"]
    pre_w = mk(start=1, end=2)
    cands = snippet_candidates(pre_w, [post(start=1, end=4)], pre_lines, post_lines)
    assert len(cands) == 1


def test_snippet_duplicate_blocks_yield_two_candidates():
    pre_lines = [f"// filler {i}" for i in range(40)]
    post_lines = [f"// filler {i}" for i in range(40)]
    pre_lines[4:7] = BLOCK
    post_lines[9:12] = BLOCK
    post_lines[29:32] = BLOCK
    pre_w = mk(start=5, end=7)
    posts = [post(start=10, end=12), post(start=30, end=32)]
    cands = snippet_candidates(pre_w, posts, pre_lines, post_lines)
    assert len(cands) == 2
    assert [c.post_id for c in cands] == sorted(c.post_id for c in cands)


def test_snippet_without_sources_is_empty():
    pre_w = mk()
    assert snippet_candidates(pre_w, [post()], None, ["x"]) == []
    assert snippet_candidates(pre_w, [post()], ["x"], None) == []


def test_normalize_snippet_clamps_range():
    lines = ["a", " b ", ""]
    assert normalize_snippet(lines, -5, 99) == ("a", "b")


# hash matching


def unique_context(n: int = 11, salt: str = "p") -> list[str]:
    return [f"stmt_{salt}_{i};" for i in range(n)]


def test_hash_renamed_file_full_similarity():
    body = unique_context()
    pre_tree = SourceTree.in_memory({"old/Name.java": "\n".join(body)})
    post_tree = SourceTree.in_memory({"new/Renamed.java": "\n".join(body)})
    pre_w = mk(path="old/Name.java", start=4, end=8)
    cand_w = post(path="new/Renamed.java", start=4, end=8)
    cands = hash_candidates(pre_w, [cand_w], pre_tree, post_tree)
    assert len(cands) == 1
    assert cands[0].strategy is Strategy.HASH
    assert cands[0].score == pytest.approx(0.5)


def test_hash_disjoint_context_rejected():
    pre_tree = SourceTree.in_memory({"a.java": "\n".join(unique_context(salt="p"))})
    post_tree = SourceTree.in_memory({"b.java": "\n".join(unique_context(salt="q"))})
    pre_w = mk(path="a.java", start=4, end=8)
    cand_w = post(path="b.java", start=4, end=8)
    assert hash_candidates(pre_w, [cand_w], pre_tree, post_tree) == []


def test_hash_threshold_boundary_arithmetic():
    # 11 normalized lines -> 9 shingles; changing the last line perturbs
    # exactly one shingle: Jaccard = 8/10 = threshold.
    body = unique_context()
    changed = list(body)
    changed[-1] = "stmt_changed;"
    pre_tree = SourceTree.in_memory({"a.java": "\n".join(body)})
    post_tree = SourceTree.in_memory({"a.java": "\n".join(changed)})
    pre_w = mk(path="a.java", start=4, end=8)
    cand_w = post(path="a.java", start=4, end=8)
    cands = hash_candidates(pre_w, [cand_w], pre_tree, post_tree)
    assert len(cands) == 1
    assert cands[0].score == pytest.approx(0.5 * 0.8)


def test_hash_below_threshold_rejected():
    body = unique_context()
    changed = list(body)
    changed[5] = "stmt_changed_a;"  # interior line perturbs 3 shingles
    pre_tree = SourceTree.in_memory({"a.java": "\n".join(body)})
    post_tree = SourceTree.in_memory({"a.java": "\n".join(changed)})
    pre_w = mk(path="a.java", start=4, end=8)
    cand_w = post(path="a.java", start=4, end=8)
    assert hash_candidates(pre_w, [cand_w], pre_tree, post_tree) == []


def test_hash_missing_file_is_empty():
    pre_tree = SourceTree.in_memory({})
    post_tree = SourceTree.in_memory({"a.java": "x"})
    pre_w = mk(path="gone.java")
    assert hash_candidates(pre_w, [post(path="a.java")], pre_tree, post_tree) == []


def test_hash_type_gate_across_files():
    body = unique_context()
    pre_tree = SourceTree.in_memory({"a.java": "\n".join(body)})
    post_tree = SourceTree.in_memory({"b.java": "\n".join(body)})
    pre_w = mk(path="a.java", start=4, end=8, wtype="T1")
    cand_w = post(path="b.java", start=4, end=8, wtype="T2")
    assert hash_candidates(pre_w, [cand_w], pre_tree, post_tree) == []


def test_fingerprint_short_context_single_shingle():
    fp = context_fingerprint(["only line"], 1, 1, StrategyConfig())
    assert fp == frozenset({("only line",)})


def test_strategy_config_validation():
    with pytest.raises(Exception):
        StrategyConfig(shingle_size=0)
    with pytest.raises(Exception):
        StrategyConfig(hash_threshold=0.0)


@given(
    pre_start=st.integers(min_value=1, max_value=20),
    pre_span=st.integers(min_value=0, max_value=5),
    post_start=st.integers(min_value=1, max_value=20),
    post_span=st.integers(min_value=0, max_value=5),
)
def test_location_score_bounds(pre_start, pre_span, post_start, post_span):
    pre_w = mk(start=pre_start, end=pre_start + pre_span)
    cand = post(start=post_start, end=post_start + post_span)
    for c in location_candidates(pre_w, [cand], identity_mapping(40)):
        assert 0.5 <= c.score <= 1.0
