"""Sequential cluster growth with lazy edge revelation.

Grows the joint cluster of a seed set (a Palm point or all configuration
points in a disk) breadth first, revealing each unordered pair's edge mark
at most once.  Sources are either a boxed PointSet or the infinite model,
which is realized by sampling an expanding sequence of annuli around the
seed and extending the window whenever the frontier comes within r_max of
its boundary.  Growth halts on exhaustion, on reaching the size cap, or on
escaping the stopping rule's radius, whichever happens first; the escape
status makes truncation visible instead of silently biased.

Because edge marks are stateless hashes of the vertex-key pair, the grown
cluster coincides vertex for vertex with the corresponding component of
the eagerly built graph on the same (seed, replicate).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _rng
from ._kernels import (GROW_CAPPED, GROW_ESCAPED, GROW_EXHAUSTED,
                       GROW_NEED_WINDOW, build_cells, grow_bfs)
from .model import ConnectionFunction, PointSet

STATUS_NAMES = {GROW_EXHAUSTED: "exhausted", GROW_CAPPED: "size-capped",
                GROW_ESCAPED: "escaped"}

_ANNULUS_WIDTH_FACTOR = 8.0
_DEFAULT_MAX_POINTS = 5_000_000


@dataclass(frozen=True)
class StoppingRule:
    """Truncation for cluster growth: size cap and escape radius."""

    k_max: int
    escape_radius: float

    def __post_init__(self):
        if int(self.k_max) < 1:
            raise ValueError(f"k_max must be at least 1, got {self.k_max}")
        if not (math.isfinite(self.escape_radius) and self.escape_radius > 0):
            raise ValueError(f"escape radius must be positive, got {self.escape_radius}")
        object.__setattr__(self, "k_max", int(self.k_max))


def default_rule(phi: ConnectionFunction, k_max: int = 10_000,
                 escape_factor: float = 60.0) -> StoppingRule:
    """Default truncation: escape at 60 interaction ranges, cap at 1e4."""
    return StoppingRule(k_max=k_max, escape_radius=escape_factor * phi.r_max)


@dataclass(frozen=True)
class PalmSeed:
    """Seed the growth from one deterministic extra vertex."""

    position: tuple = (0.0, 0.0)


@dataclass(frozen=True)
class DiskSeed:
    """Seed the growth from every configuration point in a disk."""

    radius: float
    center: tuple = (0.0, 0.0)

    def __post_init__(self):
        if not (math.isfinite(self.radius) and self.radius > 0):
            raise ValueError("seed disk radius must be positive")


@dataclass(frozen=True)
class PlaneSource:
    """The infinite model: Poisson points materialized window by window."""

    intensity: float
    seed: int
    replicate: int = 0

    def __post_init__(self):
        if not (math.isfinite(self.intensity) and self.intensity >= 0):
            raise ValueError("intensity must be a nonnegative finite real")
        _rng.check_seed(self.seed)


@dataclass(frozen=True)
class ClusterResult:
    """Outcome of one growth run.

    vertices are the cluster coordinates in breadth-first order; status is
    'exhausted', 'size-capped' or 'escaped'; explored_radius is the radius
    of the farthest cluster vertex from the seed centre; reveals counts the
    pair-mark queries (each unordered pair at most once).
    """

    vertices: np.ndarray
    size: int
    status: str
    explored_radius: float
    reveals: int


class _GrowthState:
    """Mutable growth state shared by the numba and the python engines."""

    def __init__(self, seed_region, source, phi, rule, max_points):
        self.phi = phi
        self.rule = rule
        self.kind, self.p0, self.rmax, self.breaks, self.vals = phi.kernel_args()
        if isinstance(seed_region, PalmSeed):
            self.cx, self.cy = map(float, seed_region.position)
            seed_extent = 0.0
        elif isinstance(seed_region, DiskSeed):
            self.cx, self.cy = map(float, seed_region.center)
            seed_extent = seed_region.radius
        else:
            raise TypeError("seed region must be a PalmSeed or a DiskSeed")

        if isinstance(source, PointSet):
            self.windowed = False
            self.source = None
            half = source.box.half
            if isinstance(seed_region, PalmSeed):
                if abs(self.cx) > half or abs(self.cy) > half:
                    raise ValueError("Palm seed must lie inside the box")
            else:
                if (abs(self.cx) - seed_region.radius > half
                        or abs(self.cy) - seed_region.radius > half):
                    raise ValueError("seed disk does not intersect the box")
            base = source.points
            keys = np.arange(base.shape[0], dtype=np.uint64)
            self.x0 = self.y0 = -half
            ncell = max(1, int(np.ceil(2.0 * half / self.rmax)))
            self.nx = self.ny = ncell
            self.window_R = math.inf
            self.ekey_int = _rng.edge_key(source.seed, source.replicate)
        elif isinstance(source, PlaneSource):
            self.windowed = True
            self.source = source
            self.cap = rule.escape_radius + self.rmax
            est = source.intensity * math.pi * self.cap ** 2
            if est + 10.0 * math.sqrt(est + 1.0) > max_points:
                raise ValueError(
                    f"window may hold ~{est:.0f} points, beyond max_points={max_points}; "
                    "lower the escape radius or raise max_points")
            width = _ANNULUS_WIDTH_FACTOR * self.rmax
            first = min(self.cap, max(seed_extent + 2.0 * self.rmax, width))
            self.radii = [0.0, first]
            r = first
            while r < self.cap:
                r = min(self.cap, r + width)
                self.radii.append(r)
            self.next_annulus = 0
            span = self.cap + self.rmax
            self.x0 = self.cx - span
            self.y0 = self.cy - span
            ncell = max(1, int(np.ceil(2.0 * span / self.rmax)))
            self.nx = self.ny = ncell
            base = np.empty((0, 2))
            keys = np.empty(0, dtype=np.uint64)
            self.window_R = 0.0
            self.n_window_keys = 0
            self.ekey_int = _rng.edge_key(source.seed, source.replicate)
        else:
            raise TypeError("source must be a PointSet or a PlaneSource")

        self.pts = np.ascontiguousarray(base, dtype=np.float64)
        self.keys = keys
        if self.windowed:
            self._extend_window()

        if isinstance(seed_region, PalmSeed):
            pos = np.array([[self.cx, self.cy]])
            self.pts = np.ascontiguousarray(np.vstack([self.pts, pos]))
            self.keys = np.append(self.keys, np.uint64(_rng.PALM_KEY_BASE))
            seed_idx = np.array([self.pts.shape[0] - 1], dtype=np.int64)
        else:
            d = self.pts - (self.cx, self.cy)
            inside = (d * d).sum(axis=1) <= seed_region.radius ** 2
            seed_idx = np.nonzero(inside)[0].astype(np.int64)

        cap_q = max(rule.k_max, seed_idx.shape[0]) + 1
        self.queue = np.empty(cap_q, dtype=np.int64)
        self.queue[: seed_idx.shape[0]] = seed_idx
        self.in_cluster = np.zeros(self.pts.shape[0], dtype=np.uint8)
        self.in_cluster[seed_idx] = 1
        self.istate = np.array([0, seed_idx.shape[0], 0], dtype=np.int64)
        if seed_idx.shape[0]:
            d = self.pts[seed_idx] - (self.cx, self.cy)
            max_seed_r = float(np.sqrt((d * d).sum(axis=1)).max())
        else:
            max_seed_r = 0.0
        self.fstate = np.array([max_seed_r], dtype=np.float64)
        self._rebuild_cells()

        self.initial_code = None
        if max_seed_r >= rule.escape_radius:
            self.initial_code = GROW_ESCAPED
        elif seed_idx.shape[0] >= rule.k_max:
            self.initial_code = GROW_CAPPED

    def _rebuild_cells(self):
        self.cell_start, self.cell_items = build_cells(
            self.pts, self.pts.shape[0], self.x0, self.y0,
            1.0 / self.rmax, self.nx, self.ny)

    def _extend_window(self):
        k = self.next_annulus
        r_in, r_out = self.radii[k], self.radii[k + 1]
        src = self.source
        gen = _rng.window_stream(src.seed, src.replicate, k)
        area = math.pi * (r_out * r_out - r_in * r_in)
        count = int(gen.poisson(src.intensity * area))
        u = gen.uniform(0.0, 1.0, count)
        radius = np.sqrt(r_in * r_in + u * (r_out * r_out - r_in * r_in))
        angle = gen.uniform(0.0, 2.0 * math.pi, count)
        fresh = np.column_stack([self.cx + radius * np.cos(angle),
                                 self.cy + radius * np.sin(angle)])
        new_keys = np.arange(self.n_window_keys, self.n_window_keys + count,
                             dtype=np.uint64)
        self.n_window_keys += count
        self.pts = np.ascontiguousarray(np.vstack([self.pts, fresh]))
        self.keys = np.concatenate([self.keys, new_keys])
        if hasattr(self, "in_cluster"):
            self.in_cluster = np.concatenate(
                [self.in_cluster, np.zeros(count, dtype=np.uint8)])
            self._rebuild_cells()
        self.window_R = r_out
        self.next_annulus = k + 1

    def can_extend(self):
        return self.windowed and self.next_annulus + 1 < len(self.radii)

    def result(self, code: int) -> ClusterResult:
        tail = int(self.istate[1])
        verts = self.pts[self.queue[:tail]].copy()
        return ClusterResult(vertices=verts, size=tail,
                             status=STATUS_NAMES[code],
                             explored_radius=float(self.fstate[0]),
                             reveals=int(self.istate[2]))


def _run_kernel(st: _GrowthState) -> int:
    while True:
        code = grow_bfs(st.pts, st.keys, st.pts.shape[0], st.cell_start,
                        st.cell_items, st.x0, st.y0, 1.0 / st.rmax, st.nx, st.ny,
                        st.kind, st.p0, st.rmax, st.breaks, st.vals,
                        np.uint64(st.ekey_int), st.queue, st.in_cluster,
                        st.istate, st.fstate, st.rule.k_max,
                        st.rule.escape_radius, st.window_R, st.cx, st.cy,
                        st.windowed)
        if code != GROW_NEED_WINDOW:
            return code
        if not st.can_extend():
            # cannot happen: a frontier vertex inside the escape radius
            # always fits with margin r_max inside the capped window
            raise RuntimeError("window cap reached without escape")
        st._extend_window()


def _run_python(st: _GrowthState, trace=None) -> int:
    """Pure-python engine mirroring grow_bfs, with a revealed-pair ledger.

    Asserts that no unordered pair is ever queried twice and optionally
    writes one trace line per revealed pair: key_a key_b distance mark.
    """
    ledger = set()
    rmax2 = st.rmax * st.rmax
    inv_cell = 1.0 / st.rmax
    while True:
        head, tail, reveals = map(int, st.istate)
        maxr = float(st.fstate[0])
        code = GROW_EXHAUSTED
        while head < tail:
            v = int(st.queue[head])
            px, py = st.pts[v]
            if st.windowed:
                if math.hypot(px - st.cx, py - st.cy) + st.rmax > st.window_R:
                    code = GROW_NEED_WINDOW
                    break
            head += 1
            hx = min(max(int((px - st.x0) * inv_cell), 0), st.nx - 1)
            hy = min(max(int((py - st.y0) * inv_cell), 0), st.ny - 1)
            done = False
            for dy in (-1, 0, 1):
                gy = hy + dy
                if gy < 0 or gy >= st.ny:
                    continue
                for dx in (-1, 0, 1):
                    gx = hx + dx
                    if gx < 0 or gx >= st.nx:
                        continue
                    c = gy * st.nx + gx
                    for t in range(st.cell_start[c], st.cell_start[c + 1]):
                        u = int(st.cell_items[t])
                        if st.in_cluster[u]:
                            continue
                        ddx = st.pts[u, 0] - px
                        ddy = st.pts[u, 1] - py
                        d2 = ddx * ddx + ddy * ddy
                        if d2 > rmax2:
                            continue
                        ka, kb = int(st.keys[v]), int(st.keys[u])
                        pair = (ka, kb) if ka < kb else (kb, ka)
                        if pair in ledger:
                            raise AssertionError(f"pair {pair} revealed twice")
                        ledger.add(pair)
                        reveals += 1
                        mark = _rng.pair_u01(st.ekey_int, ka, kb)
                        dist = math.sqrt(d2)
                        if trace is not None:
                            trace.write(f"{pair[0]} {pair[1]} {dist!r} {mark!r}\n")
                        if mark < st.phi(dist):
                            st.in_cluster[u] = 1
                            st.queue[tail] = u
                            tail += 1
                            ru = math.hypot(st.pts[u, 0] - st.cx,
                                            st.pts[u, 1] - st.cy)
                            maxr = max(maxr, ru)
                            if ru >= st.rule.escape_radius:
                                code = GROW_ESCAPED
                                done = True
                                break
                            if tail >= st.rule.k_max:
                                code = GROW_CAPPED
                                done = True
                                break
                    if done:
                        break
                if done:
                    break
            if done:
                break
        st.istate[:] = (head, tail, reveals)
        st.fstate[0] = maxr
        if code != GROW_NEED_WINDOW:
            return code
        st._extend_window()


def grow_cluster(seed_region, source, phi: ConnectionFunction,
                 rule: StoppingRule, *, max_points: int = _DEFAULT_MAX_POINTS,
                 trace=None, engine: str = "kernel") -> ClusterResult:
    """Grow the union of clusters of the seed set, breadth first.

    seed_region is a PalmSeed (one extra vertex) or a DiskSeed (all
    configuration points within the disk); source is a boxed PointSet or a
    PlaneSource.  Escape is measured from the seed centre.  The python
    engine (used automatically when a trace stream is given) additionally
    asserts that no pair mark is queried twice.
    """
    st = _GrowthState(seed_region, source, phi, rule, max_points)
    if st.initial_code is not None:
        return st.result(st.initial_code)
    if trace is not None or engine == "python":
        code = _run_python(st, trace=trace)
    else:
        code = _run_kernel(st)
    return st.result(code)


def grow_from_region(K: float, pts: PointSet, phi: ConnectionFunction,
                     rule: StoppingRule, **kwargs) -> ClusterResult:
    """Grow from every configuration point in the origin disk D_K."""
    if K >= pts.box.half:
        raise ValueError("seed disk must satisfy K < s/2")
    return grow_cluster(DiskSeed(radius=K), pts, phi, rule, **kwargs)
