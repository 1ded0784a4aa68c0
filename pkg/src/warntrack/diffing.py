"""Line-level diffing and the pre-to-post line mapping it induces.

``compute_diff`` produces an LCS-optimal edit script (total EQUAL length
equals the length of a longest common subsequence) using Myers' greedy
O(ND) algorithm with a recorded trace. Ties between equally long common
subsequences are broken deterministically by the canonical greedy trace,
which takes equal runs as early as the shortest-path search allows. Files
larger than ``LARGE_FILE_LINES`` (and pathological small inputs whose edit
distance exceeds ``FORWARD_D_LIMIT``) are diffed with a linear-space
divide-and-conquer variant instead; optimality and determinism are
unchanged, only memory is bounded.
"""

from __future__ import annotations

from array import array
from bisect import bisect_right
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple, Sequence

from .errors import SchemaViolation

LARGE_FILE_LINES = 20_000
FORWARD_D_LIMIT = 2_048


class HunkKind(Enum):
    EQUAL = "EQUAL"
    REPLACE = "REPLACE"
    INSERT = "INSERT"
    DELETE = "DELETE"


@dataclass(frozen=True)
class Hunk:
    """One edit-script hunk over 1-based, inclusive line ranges.

    An empty side (the pre side of an INSERT, the post side of a DELETE) is
    encoded as ``start == end + 1`` where ``start`` is the position the hunk
    anchors to.
    """

    kind: HunkKind
    pre_start: int
    pre_end: int
    post_start: int
    post_end: int

    @property
    def pre_size(self) -> int:
        return self.pre_end - self.pre_start + 1

    @property
    def post_size(self) -> int:
        return self.post_end - self.post_start + 1


@dataclass(frozen=True)
class EditScript:
    """Ordered hunks covering both files completely and without overlap."""

    hunks: tuple[Hunk, ...]
    pre_len: int
    post_len: int

    def __post_init__(self):
        pre_cursor = 1
        post_cursor = 1
        for h in self.hunks:
            if h.pre_start != pre_cursor or h.post_start != post_cursor:
                raise SchemaViolation(f"hunk {h} does not continue the script")
            if h.kind is HunkKind.EQUAL and h.pre_size != h.post_size:
                raise SchemaViolation(f"EQUAL hunk with uneven sides: {h}")
            if h.kind is HunkKind.EQUAL and h.pre_size < 1:
                raise SchemaViolation(f"empty EQUAL hunk: {h}")
            # A REPLACE with an empty post side is tolerated on input (it
            # maps like a DELETE); compute_diff never emits one.
            if h.kind is HunkKind.REPLACE and h.pre_size < 1:
                raise SchemaViolation(f"REPLACE hunk with an empty pre side: {h}")
            if h.kind is HunkKind.INSERT and (h.pre_size != 0 or h.post_size < 1):
                raise SchemaViolation(f"malformed INSERT hunk: {h}")
            if h.kind is HunkKind.DELETE and (h.pre_size < 1 or h.post_size != 0):
                raise SchemaViolation(f"malformed DELETE hunk: {h}")
            pre_cursor += h.pre_size
            post_cursor += h.post_size
        if pre_cursor != self.pre_len + 1 or post_cursor != self.post_len + 1:
            raise SchemaViolation(
                f"script covers pre 1..{pre_cursor - 1} / post 1..{post_cursor - 1}, "
                f"expected 1..{self.pre_len} / 1..{self.post_len}"
            )

    @property
    def equal_total(self) -> int:
        return sum(h.pre_size for h in self.hunks if h.kind is HunkKind.EQUAL)


def _myers_forward_matching(
    a: Sequence[int], b: Sequence[int], d_limit: int
) -> list[tuple[int, int]] | None:
    """Matched (i, j) index pairs via greedy Myers with a full trace.

    Returns None when the edit distance exceeds ``d_limit`` (the trace
    would no longer fit a sane memory budget); callers fall back to the
    linear-space variant.
    """
    n, m = len(a), len(b)
    # Round d stores furthest x per diagonal k = -d + 2i in a compact array.
    x = 0
    while x < n and x < m and a[x] == b[x]:
        x += 1
    trace = [array("l", [x])]
    final_d = 0
    if not (x >= n and x >= m):
        final_d = -1
        for d in range(1, n + m + 1):
            if d > d_limit:
                return None
            prev = trace[-1]
            cur = array("l", bytes(8 * (d + 1)))
            done = False
            for i in range(d + 1):
                k = -d + 2 * i
                if k == -d:
                    x = prev[0]
                elif k == d:
                    x = prev[d - 1] + 1
                elif prev[i - 1] < prev[i]:
                    x = prev[i]
                else:
                    x = prev[i - 1] + 1
                y = x - k
                if y >= 0:
                    while x < n and y < m and a[x] == b[y]:
                        x += 1
                        y += 1
                cur[i] = x
                if x >= n and y >= m:
                    done = True
                    break
            trace.append(cur)
            if done:
                final_d = d
                break
        assert final_d > 0, "forward search must terminate within n + m rounds"

    # Backtrack along the committed path, re-applying the forward tie rule.
    pairs: list[tuple[int, int]] = []
    x, y = n, m
    for d in range(final_d, 0, -1):
        prev = trace[d - 1]
        k = x - y
        if k == -d:
            prev_k = k + 1
        elif k == d:
            prev_k = k - 1
        elif prev[(k + d) // 2 - 1] < prev[(k + d) // 2]:
            prev_k = k + 1
        else:
            prev_k = k - 1
        prev_x = prev[(prev_k + d - 1) // 2]
        prev_y = prev_x - prev_k
        if prev_k == k + 1:
            step_x, step_y = prev_x, prev_y + 1
        else:
            step_x, step_y = prev_x + 1, prev_y
        while x > step_x and y > step_y:
            x -= 1
            y -= 1
            pairs.append((x, y))
        x, y = prev_x, prev_y
    while x > 0 and y > 0:
        x -= 1
        y -= 1
        pairs.append((x, y))
    pairs.reverse()
    return pairs


def _middle_snake(
    a: Sequence[int], alo: int, ahi: int, b: Sequence[int], blo: int, bhi: int
) -> tuple[int, int, int, int]:
    """Find a middle snake of an optimal path (Myers' linear-space split).

    Returns absolute 0-based coordinates (x1, y1, x2, y2) of a (possibly
    empty) run of matches lying on some shortest edit path.
    """
    n = ahi - alo
    m = bhi - blo
    delta = n - m
    odd = delta % 2 != 0
    vf = {1: 0}
    vb = {1: 0}
    dmax = (n + m + 2) // 2
    for d in range(dmax + 1):
        for k in range(-d, d + 1, 2):
            if k == -d or (k != d and vf[k - 1] < vf[k + 1]):
                x = vf[k + 1]
            else:
                x = vf[k - 1] + 1
            y = x - k
            x1, y1 = x, y
            if y >= 0:
                while x < n and y < m and a[alo + x] == b[blo + y]:
                    x += 1
                    y += 1
            vf[k] = x
            if odd and -(d - 1) <= delta - k <= (d - 1) and delta - k in vb:
                if x + vb[delta - k] >= n:
                    return (alo + x1, blo + y1, alo + x, blo + y)
        for k in range(-d, d + 1, 2):
            if k == -d or (k != d and vb[k - 1] < vb[k + 1]):
                x = vb[k + 1]
            else:
                x = vb[k - 1] + 1
            y = x - k
            x2, y2 = x, y
            if y >= 0:
                while x < n and y < m and a[ahi - 1 - x] == b[bhi - 1 - y]:
                    x += 1
                    y += 1
            vb[k] = x
            if not odd and -d <= delta - k <= d and delta - k in vf:
                if x + vf[delta - k] >= n:
                    # Reverse coordinates measure from the high end.
                    return (ahi - x, bhi - y, ahi - x2, bhi - y2)
    raise AssertionError("middle snake search must succeed for any input")


def _linear_space_matching(a: Sequence[int], b: Sequence[int]) -> list[tuple[int, int]]:
    """Matched pairs via divide-and-conquer Myers; O(len(a)+len(b)) memory."""
    out: list[tuple[int, int]] = []

    def recurse(alo: int, ahi: int, blo: int, bhi: int):
        while alo < ahi and blo < bhi and a[alo] == b[blo]:
            out.append((alo, blo))
            alo += 1
            blo += 1
        tail: list[tuple[int, int]] = []
        while ahi > alo and bhi > blo and a[ahi - 1] == b[bhi - 1]:
            ahi -= 1
            bhi -= 1
            tail.append((ahi, bhi))
        if alo < ahi and blo < bhi:
            x1, y1, x2, y2 = _middle_snake(a, alo, ahi, b, blo, bhi)
            recurse(alo, x1, blo, y1)
            for x, y in zip(range(x1, x2), range(y1, y2)):
                out.append((x, y))
            recurse(x2, ahi, y2, bhi)
        out.extend(reversed(tail))

    recurse(0, len(a), 0, len(b))
    return out


def _intern_lines(
    pre_lines: Sequence[str], post_lines: Sequence[str]
) -> tuple[list[int], list[int]]:
    table: dict[str, int] = {}
    interned = []
    for lines in (pre_lines, post_lines):
        interned.append([table.setdefault(line, len(table)) for line in lines])
    return interned[0], interned[1]


def _hunks_from_matches(
    matches: list[tuple[int, int]], pre_len: int, post_len: int
) -> list[Hunk]:
    """Assemble hunks from a monotone matching; gaps become edit hunks."""
    hunks: list[Hunk] = []
    pi, pj = 0, 0  # next unconsumed 0-based indices

    def emit_gap(i_end: int, j_end: int):
        nonlocal pi, pj
        if i_end > pi and j_end > pj:
            kind = HunkKind.REPLACE
        elif i_end > pi:
            kind = HunkKind.DELETE
        elif j_end > pj:
            kind = HunkKind.INSERT
        else:
            return
        hunks.append(Hunk(kind, pi + 1, i_end, pj + 1, j_end))
        pi, pj = i_end, j_end

    idx = 0
    while idx < len(matches):
        run_start = idx
        while (
            idx + 1 < len(matches)
            and matches[idx + 1][0] == matches[idx][0] + 1
            and matches[idx + 1][1] == matches[idx][1] + 1
        ):
            idx += 1
        i0, j0 = matches[run_start]
        i1, j1 = matches[idx]
        emit_gap(i0, j0)
        hunks.append(Hunk(HunkKind.EQUAL, i0 + 1, i1 + 1, j0 + 1, j1 + 1))
        pi, pj = i1 + 1, j1 + 1
        idx += 1
    emit_gap(pre_len, post_len)
    return hunks


def compute_diff(pre_lines: Sequence[str], post_lines: Sequence[str]) -> EditScript:
    """LCS-optimal line diff between two line lists (either may be empty).

    Lines are compared exactly; any terminator stripping happens when the
    file is read, not here.
    """
    a, b = _intern_lines(pre_lines, post_lines)
    matches: list[tuple[int, int]] | None
    if max(len(a), len(b)) > LARGE_FILE_LINES:
        matches = _linear_space_matching(a, b)
    else:
        matches = _myers_forward_matching(a, b, FORWARD_D_LIMIT)
        if matches is None:
            matches = _linear_space_matching(a, b)
    hunks = _hunks_from_matches(matches, len(a), len(b))
    return EditScript(hunks=tuple(hunks), pre_len=len(a), post_len=len(b))


class LineTarget(NamedTuple):
    """Image of one pre line: an exact post line or a post interval."""

    start: int
    end: int
    exact: bool


@dataclass(frozen=True)
class LineMapping:
    """Per-line correspondence from pre line numbers to post line numbers.

    EQUAL hunks give each contained line an exact image with preserved
    offset; every line of a REPLACE hunk shares that hunk's post interval;
    DELETE hunk lines are absent (map to None).
    """

    script: EditScript

    def __post_init__(self):
        # Pre-side hunks sorted by construction; keep starts for bisection.
        spans = [h for h in self.script.hunks if h.kind is not HunkKind.INSERT]
        object.__setattr__(self, "_spans", spans)
        object.__setattr__(self, "_starts", [h.pre_start for h in spans])

    @property
    def pre_len(self) -> int:
        return self.script.pre_len

    @property
    def post_len(self) -> int:
        return self.script.post_len

    def _span_at(self, line: int) -> Hunk | None:
        starts: list[int] = self._starts  # type: ignore[attr-defined]
        spans: list[Hunk] = self._spans  # type: ignore[attr-defined]
        idx = bisect_right(starts, line) - 1
        if idx < 0:
            return None
        h = spans[idx]
        if line > h.pre_end:
            return None
        return h

    def map_line(self, line: int) -> LineTarget | None:
        """Image of one pre line; None when the line was deleted or is out
        of range."""
        if line < 1:
            raise SchemaViolation(f"line numbers are 1-based, got {line}")
        h = self._span_at(line)
        if h is None or h.kind is HunkKind.DELETE:
            return None
        if h.kind is HunkKind.EQUAL:
            image = h.post_start + (line - h.pre_start)
            return LineTarget(image, image, True)
        if h.post_size < 1:
            return None
        return LineTarget(h.post_start, h.post_end, False)

    def map_range(self, start: int, end: int) -> tuple[int, int] | None:
        """Smallest post interval covering the images of all surviving lines
        in [start, end]; None when every line is absent."""
        if start < 1 or start > end:
            raise SchemaViolation(f"invalid pre range [{start}, {end}]")
        lo: int | None = None
        hi: int | None = None
        for h in self._spans:  # type: ignore[attr-defined]
            if h.pre_start > end:
                break
            if h.pre_end < start or h.kind is HunkKind.DELETE or h.post_size < 1:
                continue
            if h.kind is HunkKind.EQUAL:
                s = h.post_start + (max(start, h.pre_start) - h.pre_start)
                e = h.post_start + (min(end, h.pre_end) - h.pre_start)
            else:
                s, e = h.post_start, h.post_end
            lo = s if lo is None else min(lo, s)
            hi = e if hi is None else max(hi, e)
        if lo is None or hi is None:
            return None
        return (lo, hi)


def build_line_mapping(script: EditScript) -> LineMapping:
    """Derive the pre-to-post line mapping induced by an edit script."""
    return LineMapping(script=script)


def map_range(
    mapping: LineMapping, start: int, end: int
) -> tuple[int, int] | None:
    """Module-level convenience wrapper around LineMapping.map_range."""
    return mapping.map_range(start, end)
