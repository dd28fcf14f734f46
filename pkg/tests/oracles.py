"""Independent brute-force oracle for the path-family fitness.

Enumerates every admissible path over a segment explicitly, then picks
the best-scoring family by weighted interval scheduling over the paths'
row spans.  Exponential in the segment width; only usable for small
matrices, which is the point: it shares no code with the production DP.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass


@dataclass(frozen=True)
class PathStats:
    first_row: int
    last_row: int
    score: float
    cells: int


def enumerate_paths(seg) -> list[PathStats]:
    """All paths over the segment submatrix ``seg`` (rows x width).

    A path starts in column 0 at any row, advances by steps (1,1), (2,1)
    or (1,2), and must finish in the last column.
    """
    n_rows, width = seg.shape
    paths: list[PathStats] = []

    def walk(row: int, col: int, first: int, score: float, cells: int) -> None:
        if col == width - 1:
            paths.append(PathStats(first, row, score, cells))
            return
        for dr, dc in ((1, 1), (2, 1), (1, 2)):
            r, c = row + dr, col + dc
            if r < n_rows and c <= width - 1:
                walk(r, c, first, score + seg[r, c], cells + 1)

    for start_row in range(n_rows):
        walk(start_row, 0, start_row, seg[start_row, 0], 1)
    return paths


def best_family(paths: list[PathStats]) -> list[PathStats]:
    """Max-total-score subset of paths with pairwise disjoint row spans.

    Classic weighted interval scheduling; the empty family (score 0) is
    allowed.
    """
    paths = sorted(paths, key=lambda p: p.last_row)
    ends = [p.last_row for p in paths]
    best_score = [0.0] * (len(paths) + 1)
    takes: list[tuple[int, int] | None] = [None] * (len(paths) + 1)
    for i, path in enumerate(paths, start=1):
        prev = bisect_right(ends, path.first_row - 1, 0, i - 1)
        with_score = path.score + best_score[prev]
        if with_score > best_score[i - 1]:
            best_score[i] = with_score
            takes[i] = (i - 1, prev)
        else:
            best_score[i] = best_score[i - 1]
            takes[i] = None
    chosen = []
    i = len(paths)
    while i > 0:
        if takes[i] is None:
            i -= 1
        else:
            path_idx, prev = takes[i]
            chosen.append(paths[path_idx])
            i = prev
    return chosen


def fitness_oracle(ssm, start: int, end: int) -> float:
    """Fitness of segment [start, end] by exhaustive path enumeration."""
    n = ssm.shape[0]
    width = end - start + 1
    family = best_family(enumerate_paths(ssm[:, start : end + 1]))
    sigma = sum(p.score for p in family)
    cells = sum(p.cells for p in family)
    coverage = sum(p.last_row - p.first_row + 1 for p in family)
    if cells == 0:
        return 0.0
    score_norm = (sigma - width) / cells
    cov_norm = (coverage - width) / n
    if score_norm <= 0 or cov_norm <= 0:
        return 0.0
    return 2.0 * score_norm * cov_norm / (score_norm + cov_norm)
