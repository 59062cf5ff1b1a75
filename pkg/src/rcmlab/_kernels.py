"""Numba kernels for the hot loops.

Everything here is deliberately stateless: edge marks are pure hashes of
(stream key, vertex-key pair) or (stream key, coordinate bits), so any
construction order, eager or lazy, sees the same graph.  The splitmix64
finalizer must stay bit-compatible with ``_rng.mix64``.

Connection functions arrive as (kind, p0, rmax, breaks, vals):
kind 0 = hard disk, 1 = linear ramp, 2 = truncated exponential with rate
p0, 3 = step table evaluated by binary search on ``breaks``.
"""

import numpy as np
from numba import njit

U64 = np.uint64

_C1 = U64(0x9E3779B97F4A7C15)
_C2 = U64(0xBF58476D1CE4E5B9)
_C3 = U64(0x94D049BB133111EB)


@njit(inline="always")
def _mix(z):
    z = z + _C1
    z = (z ^ (z >> U64(30))) * _C2
    z = (z ^ (z >> U64(27))) * _C3
    return z ^ (z >> U64(31))


@njit(inline="always")
def _to_unit(h):
    return (h >> U64(11)) * (2.0 ** -53)


@njit(inline="always")
def _pair_u01(ekey, ka, kb):
    if ka > kb:
        ka, kb = kb, ka
    h = _mix(ekey ^ ka)
    h = _mix(h ^ kb)
    return _to_unit(h)


@njit(inline="always")
def _pair_u01_xy(ekey, x1, y1, x2, y2, bx1, by1, bx2, by2):
    # canonical endpoint order: lexicographic by (x, y)
    if (x1 > x2) or (x1 == x2 and y1 > y2):
        bx1, by1, bx2, by2 = bx2, by2, bx1, by1
    h = _mix(ekey ^ bx1)
    h = _mix(h ^ by1)
    h = _mix(h ^ bx2)
    h = _mix(h ^ by2)
    return _to_unit(h)


@njit(inline="always")
def _phi(kind, p0, rmax, breaks, vals, r):
    if r > rmax:
        return 0.0
    if kind == 0:
        return 1.0
    if kind == 1:
        return 1.0 - r / rmax
    if kind == 2:
        return np.exp(-p0 * r)
    # step table: value of the first interval whose right end is >= r
    lo = 0
    hi = breaks.shape[0] - 1
    while lo < hi:
        mid = (lo + hi) >> 1
        if r <= breaks[mid]:
            hi = mid
        else:
            lo = mid + 1
    return vals[lo]


@njit(cache=True, nogil=True)
def phi_many(kind, p0, rmax, breaks, vals, r):
    out = np.empty(r.shape[0], dtype=np.float64)
    for i in range(r.shape[0]):
        out[i] = _phi(kind, p0, rmax, breaks, vals, r[i])
    return out


@njit(cache=True, nogil=True)
def build_cells(pts, n, x0, y0, inv_cell, nx, ny):
    """Counting-sort points into a CSR cell index (stable in point order)."""
    ncell = nx * ny
    start = np.zeros(ncell + 1, dtype=np.int64)
    cell_of = np.empty(n, dtype=np.int64)
    for i in range(n):
        cx = int((pts[i, 0] - x0) * inv_cell)
        if cx < 0:
            cx = 0
        elif cx >= nx:
            cx = nx - 1
        cy = int((pts[i, 1] - y0) * inv_cell)
        if cy < 0:
            cy = 0
        elif cy >= ny:
            cy = ny - 1
        c = cy * nx + cx
        cell_of[i] = c
        start[c + 1] += 1
    for c in range(ncell):
        start[c + 1] += start[c]
    items = np.empty(n, dtype=np.int64)
    cursor = start[:ncell].copy()
    for i in range(n):
        c = cell_of[i]
        items[cursor[c]] = i
        cursor[c] += 1
    return start, items


@njit(cache=True, nogil=True)
def scan_pairs(pts, keys, n, start, items, x0, y0, inv_cell, nx, ny,
               kind, p0, rmax, breaks, vals, ekey, mode, out_i, out_j):
    """Enumerate unordered pairs at distance <= rmax via the cell index.

    mode 0: count candidate pairs only.
    mode 1: write candidate pairs to (out_i, out_j).
    mode 2: write accepted edges (pair mark < phi(distance)).
    Returns the number of pairs counted or written.
    """
    m = 0
    rmax2 = rmax * rmax
    for i in range(n):
        px = pts[i, 0]
        py = pts[i, 1]
        hx = int((px - x0) * inv_cell)
        if hx < 0:
            hx = 0
        elif hx >= nx:
            hx = nx - 1
        hy = int((py - y0) * inv_cell)
        if hy < 0:
            hy = 0
        elif hy >= ny:
            hy = ny - 1
        for dy in range(-1, 2):
            gy = hy + dy
            if gy < 0 or gy >= ny:
                continue
            for dx in range(-1, 2):
                gx = hx + dx
                if gx < 0 or gx >= nx:
                    continue
                c = gy * nx + gx
                for t in range(start[c], start[c + 1]):
                    j = items[t]
                    if j <= i:
                        continue
                    ddx = pts[j, 0] - px
                    ddy = pts[j, 1] - py
                    d2 = ddx * ddx + ddy * ddy
                    if d2 > rmax2:
                        continue
                    if mode == 0:
                        m += 1
                    elif mode == 1:
                        out_i[m] = i
                        out_j[m] = j
                        m += 1
                    else:
                        u = _pair_u01(ekey, keys[i], keys[j])
                        if u < _phi(kind, p0, rmax, breaks, vals, np.sqrt(d2)):
                            out_i[m] = i
                            out_j[m] = j
                            m += 1
    return m


@njit(cache=True, nogil=True)
def scan_pairs_coordkey(pts, xbits, ybits, n, start, items, x0, y0, inv_cell,
                        nx, ny, kind, p0, rmax, breaks, vals, ekey,
                        mode, out_i, out_j):
    """Same as scan_pairs but with coordinate-bit pair marks.

    Marks depend only on the two endpoint positions, so the edge between a
    given pair of points is identical in any subset of the configuration.
    """
    m = 0
    rmax2 = rmax * rmax
    for i in range(n):
        px = pts[i, 0]
        py = pts[i, 1]
        hx = int((px - x0) * inv_cell)
        if hx < 0:
            hx = 0
        elif hx >= nx:
            hx = nx - 1
        hy = int((py - y0) * inv_cell)
        if hy < 0:
            hy = 0
        elif hy >= ny:
            hy = ny - 1
        for dy in range(-1, 2):
            gy = hy + dy
            if gy < 0 or gy >= ny:
                continue
            for dx in range(-1, 2):
                gx = hx + dx
                if gx < 0 or gx >= nx:
                    continue
                c = gy * nx + gx
                for t in range(start[c], start[c + 1]):
                    j = items[t]
                    if j <= i:
                        continue
                    ddx = pts[j, 0] - px
                    ddy = pts[j, 1] - py
                    d2 = ddx * ddx + ddy * ddy
                    if d2 > rmax2:
                        continue
                    if mode == 0:
                        m += 1
                    else:
                        u = _pair_u01_xy(ekey, px, py, pts[j, 0], pts[j, 1],
                                         xbits[i], ybits[i], xbits[j], ybits[j])
                        if u < _phi(kind, p0, rmax, breaks, vals, np.sqrt(d2)):
                            out_i[m] = i
                            out_j[m] = j
                            m += 1
    return m


@njit(cache=True, nogil=True)
def components_labels(n, ei, ej):
    """Weighted union-find with path compression over an edge list.

    Returns (labels, sizes): labels[i] is a component id in order of first
    appearance by vertex index; sizes[c] the order of component c.
    """
    parent = np.arange(n, dtype=np.int64)
    weight = np.ones(n, dtype=np.int64)
    for t in range(ei.shape[0]):
        a = ei[t]
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        b = ej[t]
        while parent[b] != b:
            parent[b] = parent[parent[b]]
            b = parent[b]
        if a != b:
            if weight[a] < weight[b]:
                a, b = b, a
            parent[b] = a
            weight[a] += weight[b]
    labels = np.empty(n, dtype=np.int64)
    comp_of_root = np.full(n, -1, dtype=np.int64)
    ncomp = 0
    for i in range(n):
        r = i
        while parent[r] != r:
            r = parent[r]
        j = i
        while parent[j] != r:
            nxt = parent[j]
            parent[j] = r
            j = nxt
        if comp_of_root[r] < 0:
            comp_of_root[r] = ncomp
            ncomp += 1
        labels[i] = comp_of_root[r]
    sizes = np.zeros(ncomp, dtype=np.int64)
    for i in range(n):
        sizes[labels[i]] += 1
    return labels, sizes


# grow_bfs return codes
GROW_EXHAUSTED = 0
GROW_CAPPED = 1
GROW_ESCAPED = 2
GROW_NEED_WINDOW = 3


@njit(cache=True, nogil=True)
def grow_bfs(pts, keys, n, start, items, x0, y0, inv_cell, nx, ny,
             kind, p0, rmax, breaks, vals, ekey,
             queue, in_cluster, istate, fstate,
             k_max, r_escape, window_limit, cx, cy, windowed):
    """Breadth-first lazy cluster growth; resumable across window extensions.

    istate = [head, tail, reveals]; fstate = [max radius from (cx, cy)].
    Each unordered pair is revealed at most once because candidates already
    in the cluster are skipped and each vertex is expanded once.  Returns a
    GROW_* code; on GROW_NEED_WINDOW the caller enlarges the sampled window
    (all points within window_limit of the seed centre must be present) and
    calls again with the same state.
    """
    head = istate[0]
    tail = istate[1]
    reveals = istate[2]
    maxr = fstate[0]
    rmax2 = rmax * rmax
    code = GROW_EXHAUSTED
    while head < tail:
        v = queue[head]
        px = pts[v, 0]
        py = pts[v, 1]
        if windowed:
            dvx = px - cx
            dvy = py - cy
            if np.sqrt(dvx * dvx + dvy * dvy) + rmax > window_limit:
                code = GROW_NEED_WINDOW
                break
        head += 1
        hx = int((px - x0) * inv_cell)
        if hx < 0:
            hx = 0
        elif hx >= nx:
            hx = nx - 1
        hy = int((py - y0) * inv_cell)
        if hy < 0:
            hy = 0
        elif hy >= ny:
            hy = ny - 1
        done = False
        for dy in range(-1, 2):
            gy = hy + dy
            if gy < 0 or gy >= ny:
                continue
            for dx in range(-1, 2):
                gx = hx + dx
                if gx < 0 or gx >= nx:
                    continue
                c = gy * nx + gx
                for t in range(start[c], start[c + 1]):
                    u = items[t]
                    if in_cluster[u]:
                        continue
                    ddx = pts[u, 0] - px
                    ddy = pts[u, 1] - py
                    d2 = ddx * ddx + ddy * ddy
                    if d2 > rmax2:
                        continue
                    reveals += 1
                    m = _pair_u01(ekey, keys[v], keys[u])
                    if m < _phi(kind, p0, rmax, breaks, vals, np.sqrt(d2)):
                        in_cluster[u] = 1
                        queue[tail] = u
                        tail += 1
                        rux = pts[u, 0] - cx
                        ruy = pts[u, 1] - cy
                        ru = np.sqrt(rux * rux + ruy * ruy)
                        if ru > maxr:
                            maxr = ru
                        if ru >= r_escape:
                            code = GROW_ESCAPED
                            done = True
                            break
                        if tail >= k_max:
                            code = GROW_CAPPED
                            done = True
                            break
                if done:
                    break
            if done:
                break
        if done:
            break
    istate[0] = head
    istate[1] = tail
    istate[2] = reveals
    fstate[0] = maxr
    return code
