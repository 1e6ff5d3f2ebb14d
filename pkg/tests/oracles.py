"""Reference implementations the tests compare production code against.

Deliberately written in a different style from the package (full DP
matrices, uniform-cost search, dense sampling) so a shared bug is unlikely.
"""

from __future__ import annotations

import heapq
import math

import numpy as np

SQRT2 = math.sqrt(2.0)


def levenshtein_words(reference: str, hypothesis: str) -> int:
    """Word-level edit distance via the full DP matrix."""
    ref = reference.split()
    hyp = hypothesis.split()
    rows, cols = len(ref) + 1, len(hyp) + 1
    d = [[0] * cols for _ in range(rows)]
    for i in range(rows):
        d[i][0] = i
    for j in range(cols):
        d[0][j] = j
    for i in range(1, rows):
        for j in range(1, cols):
            cost = 0 if ref[i - 1] == hyp[j - 1] else 1
            d[i][j] = min(d[i - 1][j] + 1, d[i][j - 1] + 1,
                          d[i - 1][j - 1] + cost)
    return d[-1][-1]


def dijkstra_cost(blocked: np.ndarray, start: tuple[int, int],
                  goal: tuple[int, int]) -> float | None:
    """Uniform-cost search on an 8-connected grid, same movement rules as
    the planner (diagonals cost sqrt(2), no corner cutting). Returns the
    cost in cell units, or None when the goal is unreachable."""
    rows, cols = blocked.shape
    if blocked[start] or blocked[goal]:
        return None
    dist = {start: 0.0}
    heap = [(0.0, start)]
    while heap:
        d, cell = heapq.heappop(heap)
        if cell == goal:
            return d
        if d > dist.get(cell, math.inf):
            continue
        r, c = cell
        for dr in (-1, 0, 1):
            for dc in (-1, 0, 1):
                if dr == 0 and dc == 0:
                    continue
                nr, nc = r + dr, c + dc
                if not (0 <= nr < rows and 0 <= nc < cols):
                    continue
                if blocked[nr, nc]:
                    continue
                if dr != 0 and dc != 0 and (blocked[r + dr, c] or blocked[r, c + dc]):
                    continue
                nd = d + (SQRT2 if dr and dc else 1.0)
                if nd < dist.get((nr, nc), math.inf) - 1e-12:
                    dist[(nr, nc)] = nd
                    heapq.heappush(heap, (nd, (nr, nc)))
    return None


def random_grid(rng, rows: int = 20, cols: int = 20,
                p_occupied: float = 0.25) -> np.ndarray:
    return np.array(
        [[rng.random() < p_occupied for _ in range(cols)] for _ in range(rows)],
        dtype=bool,
    )


def sampled_ray_clear(grid: np.ndarray, resolution: float,
                      x0: float, y0: float, x1: float, y1: float) -> bool:
    """Dense-sampling line-of-sight check: walk the segment in tiny steps
    and look at every cell except the two endpoint cells. Exact for
    segments that do not pass through cell corners, which random
    continuous endpoints almost surely avoid."""
    rows, cols = grid.shape
    start_cell = (int(y0 // resolution), int(x0 // resolution))
    end_cell = (int(y1 // resolution), int(x1 // resolution))
    length = math.hypot(x1 - x0, y1 - y0)
    steps = max(2, int(length / (resolution / 50.0)) + 1)
    for i in range(steps + 1):
        t = i / steps
        x = x0 + t * (x1 - x0)
        y = y0 + t * (y1 - y0)
        cell = (int(y // resolution), int(x // resolution))
        if cell == start_cell or cell == end_cell:
            continue
        r, c = cell
        if not (0 <= r < rows and 0 <= c < cols) or grid[r, c]:
            return False
    return True
