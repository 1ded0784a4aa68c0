"""End-to-end tracking pipelines: the greedy cascade and the global one.

Both pipelines start from exact metadata matching and end in the same
classification: matched warnings are persistent, unmatched pre warnings are
resolved, unmatched post warnings are newly introduced. They differ in the
middle. The cascade claims, per pre warning in canonical order, the best
location candidate, else the best snippet candidate, else the best hash
candidate, and a claimed post warning is gone for everyone after it. The
global pipeline first rewrites pre metadata along refactoring records and
re-runs exact matching, then scores all remaining location/snippet
candidates at once and solves them as an assignment problem, so one bad
early pairing cannot strand the rest.
"""

from __future__ import annotations

from dataclasses import replace
from typing import Iterable, Sequence

from .assignment import build_matrix, solve_assignment
from .diffing import LineMapping, build_line_mapping, compute_diff
from .errors import FileMissing, UnknownWarningId
from .ingest import RefactoringRecord, SourceTree
from .model import (
    Approach,
    Match,
    Side,
    Strategy,
    TrackingReport,
    WarningInstance,
    WarningSet,
    verify_partition,
    warning_id,
)
from .refactoring import original_ids, rewrite_set
from .strategies import (
    StrategyConfig,
    exact_match,
    hash_candidates,
    location_candidates,
    snippet_candidates,
)

DEFAULT_MIN_SCORE = 0.5


def _lines_or_none(tree: SourceTree, path: str):
    try:
        return tree.lines(path)
    except FileMissing:
        return None


class _MappingCache:
    """One diff per distinct (pre file, post file) pair, computed lazily.

    None marks a pair where either side is unreadable; those warnings skip
    location matching rather than failing the run.
    """

    def __init__(self, pre_tree: SourceTree, post_tree: SourceTree):
        self._pre = pre_tree
        self._post = post_tree
        self._done: dict[tuple[str, str], LineMapping | None] = {}

    def get(self, pre_path: str, post_path: str) -> LineMapping | None:
        key = (pre_path, post_path)
        if key not in self._done:
            pre_lines = _lines_or_none(self._pre, pre_path)
            post_lines = _lines_or_none(self._post, post_path)
            if pre_lines is None or post_lines is None:
                self._done[key] = None
            else:
                script = compute_diff(pre_lines, post_lines)
                self._done[key] = build_line_mapping(script)
        return self._done[key]


def classify(
    matches: Iterable[Match],
    pre: WarningSet,
    post: WarningSet,
    approach: Approach = Approach.SOA,
    *,
    pre_commit_id: str = "",
    post_commit_id: str = "",
    rewrite_log: tuple = (),
    notes: tuple[str, ...] = (),
) -> TrackingReport:
    """Partition both warning sets around an established match list."""
    match_tuple = tuple(matches)
    pre_ids = pre.ids()
    post_ids = post.ids()
    pre_known = set(pre_ids)
    post_known = set(post_ids)
    for m in match_tuple:
        if m.pre_id not in pre_known:
            raise UnknownWarningId(f"matched pre id {m.pre_id} not in the pre set")
        if m.post_id not in post_known:
            raise UnknownWarningId(f"matched post id {m.post_id} not in the post set")
    matched_pre = {m.pre_id for m in match_tuple}
    matched_post = {m.post_id for m in match_tuple}
    report = TrackingReport(
        approach=approach,
        matches=match_tuple,
        resolved=tuple(i for i in pre_ids if i not in matched_pre),
        newly_introduced=tuple(i for i in post_ids if i not in matched_post),
        pre_commit_id=pre_commit_id,
        post_commit_id=post_commit_id,
        rewrite_log=rewrite_log,
        notes=notes,
    )
    verify_partition(report, pre, post)
    return report


def track_soa(
    pre: WarningSet,
    post: WarningSet,
    pre_src: SourceTree,
    post_src: SourceTree,
    config: StrategyConfig | None = None,
    *,
    pre_commit_id: str = "",
    post_commit_id: str = "",
) -> TrackingReport:
    """Greedy cascade: exact matching, then per remaining pre warning in
    canonical order the first non-empty strategy (location, snippet, hash)
    claims its best-scoring post warning for good."""
    cfg = config if config is not None else StrategyConfig()
    pairs, pre_rest, post_rest = exact_match(pre, post)
    matches = [
        Match(warning_id(a), warning_id(b), Strategy.EXACT, 1.0) for a, b in pairs
    ]
    pool = list(post_rest)
    maps = _MappingCache(pre_src, post_src)
    for w in pre_rest:
        mapping = maps.get(w.file_path, w.file_path)
        cands = location_candidates(w, pool, mapping) if mapping is not None else []
        if not cands:
            cands = snippet_candidates(
                w,
                pool,
                _lines_or_none(pre_src, w.file_path),
                _lines_or_none(post_src, w.file_path),
                cfg,
            )
        if not cands:
            cands = hash_candidates(w, pool, pre_src, post_src, cfg)
        if cands:
            best = cands[0]
            matches.append(Match(best.pre_id, best.post_id, best.strategy, best.score))
            pool = [c for c in pool if warning_id(c) != best.post_id]
    return classify(
        matches,
        pre,
        post,
        Approach.SOA,
        pre_commit_id=pre_commit_id,
        post_commit_id=post_commit_id,
    )


def _surrogates(
    unmatched: Sequence[WarningInstance],
    remainder_set: WarningSet,
    orig_of: dict[str, str],
) -> list[tuple[WarningInstance, WarningInstance]]:
    """(surrogate, original) pairs for the assignment stage.

    The surrogate keeps the original's line range (diffs run against the
    pre-revision content) but takes the rewritten file path, so the
    same-file gate compares post-side paths. Surrogate ids are internal;
    ordinals are bumped if two surrogates would collide.
    """
    out = []
    used: set[str] = set()
    for rw in unmatched:
        rid = warning_id(rw)
        orig = remainder_set.by_id(orig_of.get(rid, rid))
        surrogate = (
            orig
            if rw.file_path == orig.file_path
            else replace(orig, file_path=rw.file_path)
        )
        sid = warning_id(surrogate)
        while sid in used:
            surrogate = replace(surrogate, ordinal=surrogate.ordinal + 1)
            sid = warning_id(surrogate)
        used.add(sid)
        out.append((surrogate, orig))
    return out


def track_improved(
    pre: WarningSet,
    post: WarningSet,
    pre_src: SourceTree,
    post_src: SourceTree,
    records: Sequence[RefactoringRecord] = (),
    config: StrategyConfig | None = None,
    min_score: float = DEFAULT_MIN_SCORE,
    *,
    pre_commit_id: str = "",
    post_commit_id: str = "",
) -> TrackingReport:
    """Refactoring-aware global pipeline.

    Steps: exact matching; metadata rewriting along the records; exact
    matching again over the rewritten remainder; location and snippet
    candidates (no hash) for what is left; one global assignment solve.
    Reported match ids are always the original pre ids.
    """
    cfg = config if config is not None else StrategyConfig()
    pairs, pre_rest, post_rest = exact_match(pre, post)
    matches = [
        Match(warning_id(a), warning_id(b), Strategy.EXACT, 1.0) for a, b in pairs
    ]

    remainder_set = WarningSet.from_warnings(Side.PRE, pre_rest)
    rewritten_set, log = rewrite_set(remainder_set, tuple(records))
    orig_of = original_ids(log)
    notes = tuple(
        f"{entry.original_id}: {note}" for entry in log for note in entry.conflicts
    )

    refactor_pairs, rw_rest, post_rest = exact_match(rewritten_set, post_rest)
    for a, b in refactor_pairs:
        rid = warning_id(a)
        matches.append(
            Match(orig_of.get(rid, rid), warning_id(b), Strategy.REFACTOR_EXACT, 1.0)
        )

    surrogate_pairs = _surrogates(rw_rest, remainder_set, orig_of)
    maps = _MappingCache(pre_src, post_src)
    candidates = []
    for surrogate, orig in surrogate_pairs:
        mapping = maps.get(orig.file_path, surrogate.file_path)
        if mapping is not None:
            candidates.extend(location_candidates(surrogate, post_rest, mapping))
        candidates.extend(
            snippet_candidates(
                surrogate,
                post_rest,
                _lines_or_none(pre_src, orig.file_path),
                _lines_or_none(post_src, surrogate.file_path),
                cfg,
            )
        )
    surrogate_ids = [warning_id(s) for s, _ in surrogate_pairs]
    orig_id_of = {
        warning_id(s): warning_id(o) for s, o in surrogate_pairs
    }
    matrix = build_matrix(candidates, surrogate_ids, [warning_id(w) for w in post_rest])
    for assigned in solve_assignment(matrix, min_score):
        matches.append(
            Match(
                orig_id_of[assigned.pre_id],
                assigned.post_id,
                Strategy.HUNGARIAN,
                assigned.score,
            )
        )

    return classify(
        matches,
        pre,
        post,
        Approach.IMPROVED,
        pre_commit_id=pre_commit_id,
        post_commit_id=post_commit_id,
        rewrite_log=log,
        notes=notes,
    )
