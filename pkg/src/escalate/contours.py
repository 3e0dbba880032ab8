"""Marching-squares level sets on a rectilinear grid.

Crossing points are linear interpolants along cell edges; saddle cells are
resolved by the average of their four corners.  Segments are joined into
maximal chains through shared edges, and closed loops repeat their first
vertex at the end.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Cell edges, named by the corners they join (counterclockwise from bottom-left).
BOTTOM, RIGHT, TOP, LEFT = range(4)


@dataclass
class ContourSet:
    levels: list[float]
    polylines: dict[float, list[np.ndarray]]  # level -> list of (n, 2) arrays

    def n_polylines(self) -> int:
        return sum(len(v) for v in self.polylines.values())


def _edge_key(i: int, j: int, side: int) -> tuple:
    if side == BOTTOM:
        return (0, i, j)
    if side == TOP:
        return (0, i + 1, j)
    if side == LEFT:
        return (1, i, j)
    return (1, i, j + 1)


def _cell_segments(corners: tuple, above: tuple, level: float) -> list[tuple[int, int]]:
    """Pairs of crossed edges inside one cell; corners ordered BL, BR, TR, TL."""
    crossed = [s for s in range(4) if above[s] != above[(s + 1) % 4]]
    if len(crossed) == 2:
        return [(crossed[0], crossed[1])]
    if len(crossed) != 4:
        return []
    center_above = sum(corners) / 4.0 >= level
    bl_above = above[0]
    if bl_above == center_above:
        # BL and TR share the center's side, so cut off BR and TL
        return [(BOTTOM, RIGHT), (TOP, LEFT)]
    return [(LEFT, BOTTOM), (RIGHT, TOP)]


def _crossing(x: np.ndarray, y: np.ndarray, V: np.ndarray, key: tuple, level: float):
    orient, i, j = key
    if orient == 0:  # horizontal edge from (i, j) to (i, j+1)
        a, b = V[i, j], V[i, j + 1]
        t = (level - a) / (b - a)
        return (x[j] + t * (x[j + 1] - x[j]), y[i])
    a, b = V[i, j], V[i + 1, j]
    t = (level - a) / (b - a)
    return (x[j], y[i] + t * (y[i + 1] - y[i]))


def _level_polylines(x, y, V, level: float) -> list[np.ndarray]:
    above_grid = V >= level
    ny, nx = V.shape
    code = (above_grid[:-1, :-1].astype(np.int8)
            + 2 * above_grid[:-1, 1:] + 4 * above_grid[1:, 1:] + 8 * above_grid[1:, :-1])
    cells = np.argwhere((code != 0) & (code != 15))
    adj: dict[tuple, list[tuple]] = {}
    for i, j in cells:
        i, j = int(i), int(j)
        corners = (V[i, j], V[i, j + 1], V[i + 1, j + 1], V[i + 1, j])
        above = (above_grid[i, j], above_grid[i, j + 1],
                 above_grid[i + 1, j + 1], above_grid[i + 1, j])
        for s, t in _cell_segments(corners, above, level):
            a, b = _edge_key(i, j, s), _edge_key(i, j, t)
            adj.setdefault(a, []).append(b)
            adj.setdefault(b, []).append(a)

    used: set[frozenset] = set()
    chains = []

    def walk(start):
        chain = [start]
        cur = start
        while True:
            nxt = next((n for n in adj[cur] if frozenset((cur, n)) not in used), None)
            if nxt is None:
                return chain
            used.add(frozenset((cur, nxt)))
            chain.append(nxt)
            cur = nxt
            if cur == start:
                return chain

    nodes = sorted(adj)
    for node in nodes:
        if len(adj[node]) == 1 and frozenset((node, adj[node][0])) not in used:
            chains.append(walk(node))
    for node in nodes:
        if any(frozenset((node, n)) not in used for n in adj[node]):
            chains.append(walk(node))

    out = []
    for chain in chains:
        pts = [_crossing(x, y, V, key, level) for key in chain]
        dedup = [pts[0]]
        for pt in pts[1:]:
            if pt != dedup[-1]:
                dedup.append(pt)
        if chain[0] == chain[-1] and dedup[-1] != dedup[0]:
            dedup.append(dedup[0])
        if len(dedup) >= 2:
            out.append(np.array(dedup, dtype=float))
    return out


def extract_contours(grid, levels) -> ContourSet:
    """Level-set polylines of a :class:`~escalate.schematic.FieldGrid`."""
    return extract_contours_array(grid.x, grid.y, grid.values, levels)


def extract_contours_array(x, y, values, levels) -> ContourSet:
    levels = [float(v) for v in levels]
    if not levels:
        raise ValueError("need at least one contour level")
    if any(b <= a for a, b in zip(levels, levels[1:])):
        raise ValueError("contour levels must be strictly ascending")
    x, y, V = np.asarray(x, float), np.asarray(y, float), np.asarray(values, float)
    if V.shape != (len(y), len(x)):
        raise ValueError(f"values shape {V.shape} does not match axes ({len(y)}, {len(x)})")
    if not np.all(np.isfinite(V)):
        raise ValueError("grid values must be finite")
    return ContourSet(levels=levels,
                      polylines={lv: _level_polylines(x, y, V, lv) for lv in levels})


def bilinear(x, y, values, px: float, py: float) -> float:
    """Bilinear interpolation of a rectilinear grid at (px, py)."""
    x, y, V = np.asarray(x, float), np.asarray(y, float), np.asarray(values, float)
    j = int(np.clip(np.searchsorted(x, px, side="right") - 1, 0, len(x) - 2))
    i = int(np.clip(np.searchsorted(y, py, side="right") - 1, 0, len(y) - 2))
    tx = (px - x[j]) / (x[j + 1] - x[j])
    ty = (py - y[i]) / (y[i + 1] - y[i])
    bottom = V[i, j] + tx * (V[i, j + 1] - V[i, j])
    top = V[i + 1, j] + tx * (V[i + 1, j + 1] - V[i + 1, j])
    return float(bottom + ty * (top - bottom))
