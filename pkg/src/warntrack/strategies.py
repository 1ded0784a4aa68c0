"""Candidate generators and scorers for the individual matching strategies.

Exact matching pairs warnings whose full metadata agrees. The remaining
strategies produce scored CandidatePairs: location matching projects the
warning's line range through the file diff, snippet matching compares the
normalized warned lines for identity, and hash matching fingerprints the
surrounding context so wholesale file moves can still pair up. Score layers
are disjoint by construction: any location candidate (>= 0.5) outranks no
snippet identity (0.9) but every hash candidate (<= 0.5); see the
constants on StrategyConfig.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

from .diffing import LineMapping
from .errors import FileMissing, SchemaViolation
from .ingest import SourceTree
from .model import Strategy, WarningInstance, metadata_equal, warning_id


class CandidatePair(NamedTuple):
    pre_id: str
    post_id: str
    strategy: Strategy
    score: float


_CANDIDATE_STRATEGIES = (Strategy.LOCATION, Strategy.SNIPPET, Strategy.HASH)


def _checked(pair: CandidatePair) -> CandidatePair:
    if pair.strategy not in _CANDIDATE_STRATEGIES:
        raise SchemaViolation(f"not a candidate strategy: {pair.strategy}")
    if not 0.0 <= pair.score <= 1.0:
        raise SchemaViolation(f"candidate score out of range: {pair.score}")
    return pair


@dataclass(frozen=True)
class StrategyConfig:
    """Tunable constants of the heuristic strategies.

    The defaults keep the strategy layers ordered: location scores sit in
    [0.5, 1.0], snippet identity at 0.9, hash scores in [0.4, 0.5].
    """

    context_window: int = 3
    shingle_size: int = 3
    hash_threshold: float = 0.8
    snippet_score: float = 0.9

    def __post_init__(self):
        if self.context_window < 0:
            raise SchemaViolation("context_window must be >= 0")
        if self.shingle_size < 1:
            raise SchemaViolation("shingle_size must be >= 1")
        if not 0.0 < self.hash_threshold <= 1.0:
            raise SchemaViolation("hash_threshold must be in (0, 1]")
        if not 0.0 <= self.snippet_score <= 1.0:
            raise SchemaViolation("snippet_score must be in [0, 1]")


def exact_match(
    pre_warnings: Iterable[WarningInstance],
    post_warnings: Iterable[WarningInstance],
) -> tuple[
    list[tuple[WarningInstance, WarningInstance]],
    list[WarningInstance],
    list[WarningInstance],
]:
    """Pair warnings with identical matching metadata, one-to-one.

    Metadata duplicates are paired by ordinal rank: the k-th duplicate on
    the pre side pairs with the k-th on the post side; the longer group's
    tail lands in the remainder. Pair order follows the pre input order.
    """
    pre_list = list(pre_warnings)
    post_list = list(post_warnings)
    post_groups: dict[tuple, list[WarningInstance]] = defaultdict(list)
    for w in post_list:
        post_groups[w.metadata_key()].append(w)
    for group in post_groups.values():
        group.sort(key=lambda w: w.ordinal)
    rank_taken: dict[tuple, int] = defaultdict(int)

    pairs = []
    pre_remainder = []
    matched_post: set[int] = set()
    for w in sorted(pre_list, key=lambda w: (w.ordinal,)):
        # rank among same-metadata pre duplicates = visit order by ordinal
        key = w.metadata_key()
        rank = rank_taken[key]
        group = post_groups.get(key, ())
        if rank < len(group):
            rank_taken[key] = rank + 1
            pairs.append((w, group[rank]))
            matched_post.add(id(group[rank]))
        else:
            pre_remainder.append(w)
    pre_order = {id(w): i for i, w in enumerate(pre_list)}
    pairs.sort(key=lambda p: pre_order[id(p[0])])
    pre_remainder.sort(key=lambda w: pre_order[id(w)])
    post_remainder = [w for w in post_list if id(w) not in matched_post]
    assert all(metadata_equal(a, b) for a, b in pairs)
    return pairs, pre_remainder, post_remainder


def _sorted_candidates(cands: list[CandidatePair]) -> list[CandidatePair]:
    return sorted(cands, key=lambda c: (-c.score, c.post_id))


def _line_jaccard(a: tuple[int, int], b: tuple[int, int]) -> float:
    inter = min(a[1], b[1]) - max(a[0], b[0]) + 1
    if inter <= 0:
        return 0.0
    union = (a[1] - a[0] + 1) + (b[1] - b[0] + 1) - inter
    return inter / union


def location_candidates(
    pre_w: WarningInstance,
    post_warnings: Iterable[WarningInstance],
    mapping: LineMapping,
) -> list[CandidatePair]:
    """Same-file, same-type candidates whose range intersects the image of
    the pre warning's range under the diff; score = 0.5 + 0.5 * Jaccard."""
    image = mapping.map_range(pre_w.start_line, pre_w.end_line)
    if image is None:
        return []
    pre_id = warning_id(pre_w)
    out = []
    for cand in post_warnings:
        if cand.warning_type != pre_w.warning_type:
            continue
        if cand.file_path != pre_w.file_path:
            continue
        overlap = _line_jaccard(image, cand.line_range)
        if overlap <= 0.0:
            continue
        out.append(
            _checked(
                CandidatePair(
                    pre_id, warning_id(cand), Strategy.LOCATION, 0.5 + 0.5 * overlap
                )
            )
        )
    return _sorted_candidates(out)


def normalize_snippet(lines: Sequence[str], start: int, end: int) -> tuple[str, ...]:
    """Lines [start, end] (1-based, clamped to the file) stripped of
    per-line whitespace, blank lines dropped."""
    lo = max(start, 1)
    hi = min(end, len(lines))
    out = []
    for i in range(lo, hi + 1):
        stripped = lines[i - 1].strip()
        if stripped:
            out.append(stripped)
    return tuple(out)


def snippet_candidates(
    pre_w: WarningInstance,
    post_warnings: Iterable[WarningInstance],
    pre_src: Sequence[str] | None,
    post_src: Sequence[str] | None,
    config: StrategyConfig = StrategyConfig(),
) -> list[CandidatePair]:
    """Same-file, same-type candidates whose normalized warned lines are
    identical to the pre warning's; fixed score (default 0.9)."""
    if pre_src is None or post_src is None:
        return []
    reference = normalize_snippet(pre_src, pre_w.start_line, pre_w.end_line)
    if not reference:
        return []
    pre_id = warning_id(pre_w)
    out = []
    for cand in post_warnings:
        if cand.warning_type != pre_w.warning_type:
            continue
        if cand.file_path != pre_w.file_path:
            continue
        if normalize_snippet(post_src, cand.start_line, cand.end_line) != reference:
            continue
        out.append(
            _checked(
                CandidatePair(
                    pre_id, warning_id(cand), Strategy.SNIPPET, config.snippet_score
                )
            )
        )
    return _sorted_candidates(out)


def context_fingerprint(
    lines: Sequence[str], start: int, end: int, config: StrategyConfig = StrategyConfig()
) -> frozenset[tuple[str, ...]]:
    """Shingle-set fingerprint of the normalized context around a range.

    The context is [start - w, end + w] clamped to the file; shorter
    normalized contexts than one shingle become a single whole-context
    shingle.
    """
    normalized = normalize_snippet(
        lines, start - config.context_window, end + config.context_window
    )
    k = config.shingle_size
    if not normalized:
        return frozenset()
    if len(normalized) < k:
        return frozenset({normalized})
    return frozenset(
        tuple(normalized[i : i + k]) for i in range(len(normalized) - k + 1)
    )


def _set_jaccard(a: frozenset, b: frozenset) -> float:
    if not a and not b:
        return 0.0
    inter = len(a & b)
    union = len(a | b)
    return inter / union


def hash_candidates(
    pre_w: WarningInstance,
    post_warnings: Iterable[WarningInstance],
    pre_tree: SourceTree,
    post_tree: SourceTree,
    config: StrategyConfig = StrategyConfig(),
) -> list[CandidatePair]:
    """Same-type candidates in any file whose context fingerprints reach
    the similarity threshold; score = 0.5 * Jaccard."""
    try:
        pre_src = pre_tree.lines(pre_w.file_path)
    except FileMissing:
        return []
    reference = context_fingerprint(pre_src, pre_w.start_line, pre_w.end_line, config)
    if not reference:
        return []
    pre_id = warning_id(pre_w)
    out = []
    fingerprints: dict[tuple[str, int, int], frozenset] = {}
    for cand in post_warnings:
        if cand.warning_type != pre_w.warning_type:
            continue
        key = (cand.file_path, cand.start_line, cand.end_line)
        if key not in fingerprints:
            try:
                cand_src = post_tree.lines(cand.file_path)
            except FileMissing:
                fingerprints[key] = frozenset()
            else:
                fingerprints[key] = context_fingerprint(
                    cand_src, cand.start_line, cand.end_line, config
                )
        similarity = _set_jaccard(reference, fingerprints[key])
        if similarity < config.hash_threshold:
            continue
        out.append(
            _checked(
                CandidatePair(pre_id, warning_id(cand), Strategy.HASH, 0.5 * similarity)
            )
        )
    return _sorted_candidates(out)
