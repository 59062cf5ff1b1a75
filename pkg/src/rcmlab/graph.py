"""Eager graph construction on a point configuration, and component stats.

Candidate pairs are enumerated through a cell list with cell side r_max,
so only pairs at distance <= r_max are ever touched.  Each candidate pair
is accepted with probability phi(distance), using the stateless per-pair
mark stream, which makes edge membership independent of enumeration order
and exactly reproducible from (seed, replicate).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _rng
from ._kernels import build_cells, components_labels, scan_pairs
from .model import ConnectionFunction, PalmPointSet, PointSet


@dataclass(frozen=True)
class EdgeSet:
    """Undirected edges as index pairs (i < j), sorted lexicographically.

    Indices refer to the vertex list: base points first, then any Palm
    points.
    """

    edges: np.ndarray
    n_vertices: int

    def __post_init__(self):
        e = np.ascontiguousarray(np.asarray(self.edges, dtype=np.int64).reshape(-1, 2))
        e.flags.writeable = False
        object.__setattr__(self, "edges", e)

    @property
    def n_edges(self) -> int:
        return self.edges.shape[0]


@dataclass(frozen=True)
class ComponentSummary:
    """Component orders of a finite graph.

    L1 >= L2 are the two largest orders (L_j = 0 when fewer than j
    components exist); when two components tie for the maximum, L1 == L2.
    """

    component_sizes: np.ndarray
    num_components: int
    L1: int
    L2: int
    size_histogram: dict
    labels: np.ndarray | None = None

    @property
    def L(self) -> dict:
        return {1: self.L1, 2: self.L2}


def _grid_params(pts: np.ndarray, half: float, r_max: float):
    x0 = -half
    n_cells = max(1, int(np.ceil(2.0 * half / r_max)))
    return x0, x0, 1.0 / r_max, n_cells, n_cells


def _vertices_and_keys(pts):
    if isinstance(pts, PalmPointSet):
        return pts.all_points(), pts.vertex_keys(), pts.box
    if isinstance(pts, PointSet):
        return pts.points, pts.vertex_keys(), pts.box
    raise TypeError("expected a PointSet or PalmPointSet")


def _provenance(pts):
    base = pts.base if isinstance(pts, PalmPointSet) else pts
    return base.seed, base.replicate


def _scan(pts, phi: ConnectionFunction, mode: int):
    coords, keys, box = _vertices_and_keys(pts)
    coords = np.ascontiguousarray(coords)
    n = coords.shape[0]
    kind, p0, r_max, breaks, vals = phi.kernel_args()
    if r_max <= 0:
        raise ValueError("connection function must have positive range")
    empty = np.empty(0, dtype=np.int64)
    if n < 2:
        return np.empty((0, 2), dtype=np.int64)
    x0, y0, inv_cell, nx, ny = _grid_params(coords, box.half, r_max)
    start, items = build_cells(coords, n, x0, y0, inv_cell, nx, ny)
    seed, replicate = _provenance(pts)
    ekey = np.uint64(_rng.edge_key(seed, replicate))
    n_cand = scan_pairs(coords, keys, n, start, items, x0, y0, inv_cell, nx, ny,
                        kind, p0, r_max, breaks, vals, ekey, 0, empty, empty)
    out_i = np.empty(n_cand, dtype=np.int64)
    out_j = np.empty(n_cand, dtype=np.int64)
    m = scan_pairs(coords, keys, n, start, items, x0, y0, inv_cell, nx, ny,
                   kind, p0, r_max, breaks, vals, ekey, mode, out_i, out_j)
    pairs = np.column_stack([out_i[:m], out_j[:m]])
    order = np.lexsort((pairs[:, 1], pairs[:, 0]))
    return pairs[order]


def candidate_pairs(pts, phi: ConnectionFunction) -> np.ndarray:
    """All unordered index pairs at distance <= r_max (before edge marks)."""
    return _scan(pts, phi, mode=1)


def build_edges(pts, phi: ConnectionFunction) -> EdgeSet:
    """Draw the soft random geometric graph on the given configuration."""
    coords, _, _ = _vertices_and_keys(pts)
    return EdgeSet(edges=_scan(pts, phi, mode=2), n_vertices=coords.shape[0])


def connected_components(edges: EdgeSet, n: int | None = None,
                         want_labels: bool = False) -> ComponentSummary:
    """Exact component partition via weighted union-find."""
    n = edges.n_vertices if n is None else int(n)
    if edges.n_edges and int(edges.edges.max()) >= n:
        raise ValueError("edge index out of range")
    if n == 0:
        return ComponentSummary(component_sizes=np.empty(0, dtype=np.int64),
                                num_components=0, L1=0, L2=0, size_histogram={},
                                labels=np.empty(0, dtype=np.int64) if want_labels else None)
    labels, sizes = components_labels(n, np.ascontiguousarray(edges.edges[:, 0]),
                                      np.ascontiguousarray(edges.edges[:, 1]))
    ordered = np.sort(sizes)[::-1]
    uniq, counts = np.unique(sizes, return_counts=True)
    hist = {int(k): int(c) for k, c in zip(uniq, counts)}
    return ComponentSummary(
        component_sizes=ordered,
        num_components=int(sizes.shape[0]),
        L1=int(ordered[0]) if ordered.size >= 1 else 0,
        L2=int(ordered[1]) if ordered.size >= 2 else 0,
        size_histogram=hist,
        labels=labels if want_labels else None,
    )


def giant_fraction(pts, phi: ConnectionFunction) -> tuple[float, float]:
    """(L1 / s^2, L2 / s^2) for the graph drawn on this configuration."""
    coords, _, box = _vertices_and_keys(pts)
    summary = connected_components(build_edges(pts, phi))
    s2 = box.area
    return summary.L1 / s2, summary.L2 / s2


def dump_edges(edges: EdgeSet, path) -> None:
    """Write one 'i j' line per edge, sorted lexicographically."""
    with open(path, "w", encoding="utf-8") as f:
        for i, j in edges.edges:
            f.write(f"{i} {j}\n")
