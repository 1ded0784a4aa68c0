"""Global one-to-one matching over candidate pairs.

Scores are quantized to integers (10^-9 resolution) so optimality and
tie comparisons are exact; the solver is the classic assignment algorithm
with row/column potentials on the padded square matrix. Among equal-total
optima the result is the lexicographically smallest assignment by
(row index, column index): complementary slackness confines every optimal
assignment to the tight cells (potential sum equals cost), so the smallest
assignment is extracted by greedily taking, row by row, the lowest tight
column that still leaves the remaining rows a perfect matching.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, NamedTuple

import numpy as np

from .errors import SchemaViolation, UnknownId
from .model import Strategy
from .strategies import CandidatePair

_SCALE = 10**9

_STRATEGY_RANK = {Strategy.LOCATION: 0, Strategy.SNIPPET: 1, Strategy.HASH: 2}


class AssignedPair(NamedTuple):
    pre_id: str
    post_id: str
    score: float
    strategy: Strategy


@dataclass(frozen=True)
class ScoreMatrix:
    """Best candidate score per (pre, post) pair; 0 where no strategy
    proposed the pair. Row/column order is the caller's id order."""

    pre_ids: tuple[str, ...]
    post_ids: tuple[str, ...]
    scores: tuple[tuple[float, ...], ...]
    strategies: tuple[tuple[Strategy | None, ...], ...]

    def __post_init__(self):
        if len(self.scores) != len(self.pre_ids) or len(self.strategies) != len(
            self.pre_ids
        ):
            raise SchemaViolation("matrix row count != pre id count")
        for row, tags in zip(self.scores, self.strategies):
            if len(row) != len(self.post_ids) or len(tags) != len(self.post_ids):
                raise SchemaViolation("matrix column count != post id count")
            for value in row:
                if not 0.0 <= value <= 1.0:
                    raise SchemaViolation(f"matrix entry out of range: {value}")


def build_matrix(
    candidates: Iterable[CandidatePair],
    pre_ids: Iterable[str],
    post_ids: Iterable[str],
) -> ScoreMatrix:
    """Fold candidates into a matrix, keeping the best score per cell.

    On an exact score tie the earlier-cascade strategy wins (location over
    snippet over hash) so the tag is deterministic.
    """
    pre_tuple = tuple(pre_ids)
    post_tuple = tuple(post_ids)
    row_of = {wid: i for i, wid in enumerate(pre_tuple)}
    col_of = {wid: j for j, wid in enumerate(post_tuple)}
    scores = [[0.0] * len(post_tuple) for _ in pre_tuple]
    tags: list[list[Strategy | None]] = [[None] * len(post_tuple) for _ in pre_tuple]
    for cand in candidates:
        if cand.pre_id not in row_of:
            raise UnknownId(f"candidate pre id {cand.pre_id} not in the pre list")
        if cand.post_id not in col_of:
            raise UnknownId(f"candidate post id {cand.post_id} not in the post list")
        i, j = row_of[cand.pre_id], col_of[cand.post_id]
        current = scores[i][j]
        tag = tags[i][j]
        better = cand.score > current or (
            cand.score == current
            and tag is not None
            and _STRATEGY_RANK[cand.strategy] < _STRATEGY_RANK[tag]
        )
        if tag is None or better:
            scores[i][j] = cand.score
            tags[i][j] = cand.strategy
    return ScoreMatrix(
        pre_ids=pre_tuple,
        post_ids=post_tuple,
        scores=tuple(tuple(r) for r in scores),
        strategies=tuple(tuple(r) for r in tags),
    )


def _min_cost_assign(cost: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Square minimum-cost assignment with potentials.

    Returns (col_of_row, u, v) with u[i] + v[j] <= cost[i, j] everywhere and
    equality on assigned cells, all in exact int64 arithmetic (cost must be
    non-negative).
    """
    n = cost.shape[0]
    INF = np.int64(2**62)
    u = np.zeros(n + 1, dtype=np.int64)
    v = np.zeros(n + 1, dtype=np.int64)
    p = np.zeros(n + 1, dtype=np.int64)
    way = np.zeros(n + 1, dtype=np.int64)
    cost1 = np.zeros((n + 1, n + 1), dtype=np.int64)
    cost1[1:, 1:] = cost
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv = np.full(n + 1, INF, dtype=np.int64)
        used = np.zeros(n + 1, dtype=bool)
        while True:
            used[j0] = True
            i0 = int(p[j0])
            free = ~used
            free[0] = False
            cur = cost1[i0] - u[i0] - v
            improve = free & (cur < minv)
            minv[improve] = cur[improve]
            way[improve] = j0
            masked = np.where(free, minv, INF)
            j1 = int(np.argmin(masked[1:])) + 1
            delta = masked[j1]
            u[p[used]] += delta
            v[used] -= delta
            minv[free] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while j0 != 0:
            j1 = int(way[j0])
            p[j0] = p[j1]
            j0 = j1
    col_of_row = np.zeros(n, dtype=np.int64)
    for j in range(1, n + 1):
        col_of_row[int(p[j]) - 1] = j - 1
    return col_of_row, u[1:].copy(), v[1:].copy()


def _lexicographic_refine(
    tight_rows: list[list[int]],
    col_of_row: list[int],
    real_rows: int,
) -> list[int]:
    """Rewire a tight perfect matching so each real row, in order, holds the
    smallest tight column any optimal assignment can give it."""
    n = len(col_of_row)
    row_of_col = [0] * n
    for r, c in enumerate(col_of_row):
        row_of_col[c] = r
    finalized: set[int] = set()
    for i in range(real_rows):
        current = col_of_row[i]
        for c in tight_rows[i]:
            if c >= current:
                break
            if c in finalized:
                continue
            # Free `current`, hand c to row i, and push the displaced rows
            # along tight edges until one of them reaches the freed column.
            pred: dict[int, int] = {}
            seen_rows = {row_of_col[c]}
            stack = [row_of_col[c]]
            target = current
            found = False
            while stack and not found:
                r = stack.pop()
                for c2 in tight_rows[r]:
                    if c2 == c or c2 in finalized or c2 in pred:
                        continue
                    pred[c2] = r
                    if c2 == target:
                        found = True
                        break
                    nxt = row_of_col[c2]
                    if nxt not in seen_rows:
                        seen_rows.add(nxt)
                        stack.append(nxt)
            if not found:
                continue
            # Flip the augmenting path, then fix row i itself.
            c2 = target
            while True:
                r = pred[c2]
                old = col_of_row[r]
                col_of_row[r] = c2
                row_of_col[c2] = r
                if old == c:
                    break
                c2 = old
            col_of_row[i] = c
            row_of_col[c] = i
            current = c
            break
        finalized.add(current)
    return col_of_row


def solve_assignment(
    matrix: ScoreMatrix, min_score: float = 0.5
) -> list[AssignedPair]:
    """Maximum-total one-to-one assignment over the matrix.

    Rectangular matrices are padded with zero rows/columns internally.
    Cells no strategy proposed (score 0) are never reported, and reported
    pairs must reach min_score; both filters apply after optimization, so
    weak pairs still influence which assignment is optimal.
    """
    if not 0.0 <= min_score <= 1.0:
        raise SchemaViolation(f"min_score out of range: {min_score}")
    rows = len(matrix.pre_ids)
    cols = len(matrix.post_ids)
    if rows == 0 or cols == 0:
        return []
    n = max(rows, cols)
    weights = np.zeros((n, n), dtype=np.int64)
    for i, row in enumerate(matrix.scores):
        weights[i, : len(row)] = [round(s * _SCALE) for s in row]
    cost = weights.max() - weights  # non-negative; same argmax set
    col_of_row, u, v = _min_cost_assign(cost)
    tight = (u[:, None] + v[None, :]) == cost
    tight_rows = [np.nonzero(tight[i])[0].tolist() for i in range(n)]
    assignment = _lexicographic_refine(tight_rows, col_of_row.tolist(), rows)
    min_int = round(min_score * _SCALE)
    out = []
    for i in range(rows):
        c = assignment[i]
        if c >= cols:
            continue
        weight = int(weights[i, c])
        if weight <= 0 or weight < min_int:
            continue
        tag = matrix.strategies[i][c]
        assert tag is not None, "nonzero cell must carry a strategy tag"
        out.append(
            AssignedPair(
                pre_id=matrix.pre_ids[i],
                post_id=matrix.post_ids[c],
                score=matrix.scores[i][c],
                strategy=tag,
            )
        )
    return out
