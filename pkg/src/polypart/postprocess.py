"""Cell-level repair after optimisation: connectivity, enclosures and count rebalancing.

Border simplification lives in :mod:`polypart.simplify` and is re-exported here.
"""
from __future__ import annotations

import math
from collections import deque

import numpy as np

from .grid import Grid
from .partition import PartitionSet, cell_scores, components, is_connected
from .simplify import (  # noqa: F401
    Border,
    BorderGraph,
    BorderResult,
    SimplifyConfig,
    border_graph,
    green,
    max_dist,
    simplify_border,
    simplify_borders,
)


def expected_cell_count(weight: float, total_area: float, cell_area: float) -> int:
    return int(round(weight * total_area / cell_area))


def full_cell_mass(grid: Grid) -> float:
    """Mass of an unclipped cell at the mean density."""
    return grid.cell_size ** 2 * grid.total_weight / grid.total_area


def missing_cells(ps: PartitionSet) -> np.ndarray:
    """Fractional surplus (positive) or shortfall (negative) of cells per partition."""
    return (ps.masses() - ps.targets()) / full_cell_mass(ps.grid)


# --- connectivity ---------------------------------------------------------------


def _members(a: np.ndarray, i: int) -> list:
    return np.flatnonzero(a == i).tolist()


def enclosed_regions(grid: Grid, a: np.ndarray, i: int) -> list[list[int]]:
    """Groups of foreign cells that partition ``i`` cuts off from the outer boundary."""
    others = np.flatnonzero(a != i).tolist()
    if not others:
        return []
    return [c for c in components(grid, others) if not any(grid.outer_lengths[k] > 0 for k in c)]


def _best_neighbour_partition(grid, a, scores, k, exclude) -> int:
    opts = sorted({int(a[v]) for v in grid.neighbors[k]} - {exclude})
    if not opts:
        return -1
    return min(opts, key=lambda j: (scores[j, k], j))


def _dissolve(grid, a, scores, i, stray, budget) -> int:
    """Hand stray cells of ``i`` to neighbouring partitions, outermost layer first."""
    stray = set(stray)
    moves = 0
    while stray and moves < budget:
        layer = [k for k in sorted(stray) if any(a[v] != i and v not in stray for v in grid.neighbors[k])]
        if not layer:
            break
        for k in layer:
            j = _best_neighbour_partition(grid, a, scores, k, i)
            if j < 0:
                continue
            a[k] = j
            stray.discard(k)
            moves += 1
    return moves


def _carve_corridor(grid, a, i, region) -> tuple[list[int], int]:
    """Shortest path of ``i`` cells from ``region`` to the boundary or an open foreign cell.

    Also returns the region cell the path starts from (-1 if there is none).
    """
    region = set(region)
    start = [k for k in region]
    prev = {k: None for k in start}
    dq = deque(start)
    goal = None
    while dq and goal is None:
        u = dq.popleft()
        for v in grid.neighbors[u]:
            if v in prev:
                continue
            if a[v] != i:
                if v not in region:
                    goal = u
                    break
                continue
            prev[v] = u
            if grid.outer_lengths[v] > 0:
                goal = v
                break
            dq.append(v)
    path = []
    while goal is not None and goal not in region:
        path.append(goal)
        goal = prev[goal]
    return path, (-1 if goal is None else goal)


def _seed_empty(grid, a, scores, n):
    counts = np.bincount(a, minlength=n)
    for i in np.flatnonzero(counts == 0):
        order = np.argsort(scores[i], kind="stable")
        for k in order:
            d = int(a[k])
            if counts[d] <= 1:
                continue
            if grid.outer_lengths[k] == 0 and all(a[v] == d for v in grid.neighbors[k]):
                continue  # would punch a hole into d
            rest = [c for c in _members(a, d) if c != k]
            if is_connected(grid, rest):
                a[k] = i
                counts[d] -= 1
                counts[i] += 1
                break


def fix_disconnected(ps: PartitionSet) -> PartitionSet:
    """Make every partition one 4-connected, hole-free group of cells.

    Stray components are dissolved into neighbouring partitions using the
    distance-to-radius rule; a partition that surrounds foreign cells is cut
    open along a shortest corridor, handed to the enclosed partition. A single
    enclosed cell is simply absorbed; if that empties its partition, the
    partition is re-seeded at its best-scoring cell that leaves no hole.
    """
    grid = ps.grid
    a = ps.assignment.copy()
    if (a < 0).any():
        raise ValueError("assignment must be complete")
    n = ps.n
    scores = cell_scores(grid, ps.centers, ps.radii)
    budget = 10 * len(grid)
    moves = 0
    _seed_empty(grid, a, scores, n)
    for _ in range(4 * n + 4):
        changed = False
        for i in range(n):
            comps = components(grid, _members(a, i))
            if len(comps) > 1:
                stray = [k for c in comps[1:] for k in c]
                m = _dissolve(grid, a, scores, i, stray, budget - moves)
                moves += m
                changed |= m > 0
        for i in range(n):
            for region in enclosed_regions(grid, a, i):
                if len(region) == 1:
                    # a lone cell with no same-partition neighbour joins the enclosing partition
                    a[region[0]] = i
                    moves += 1
                    changed = True
                    continue
                path, entry = _carve_corridor(grid, a, i, region)
                # the corridor joins the partition it grows out of, so it stays connected
                owner = a[entry] if entry >= 0 else np.bincount(a[region], minlength=n).argmax()
                for k in path:
                    a[k] = owner
                moves += len(path)
                changed |= bool(path)
        if not changed or moves >= budget:
            break
    _seed_empty(grid, a, scores, n)
    return ps.with_params(assignment=a)


# --- rebalancing ----------------------------------------------------------------


def _partition_adjacency(grid: Grid, a: np.ndarray, n: int) -> list[set]:
    adj = [set() for _ in range(n)]
    if len(grid.pairs):
        pa, pb = a[grid.pairs[:, 0]], a[grid.pairs[:, 1]]
        for x, y in zip(pa[pa != pb].tolist(), pb[pa != pb].tolist()):
            adj[x].add(y)
            adj[y].add(x)
    return adj


def _survives_removal(grid: Grid, k: int, inside, need_outer: bool) -> bool:
    """Whether removing cell ``k`` from the cell set ``inside`` keeps it intact.

    Without ``need_outer`` the set must stay 4-connected around ``k``. With it,
    every piece left around ``k`` must still reach the polygon outline (the
    set is assumed hole-free beforehand). Searches grow one cell at a time from
    each neighbour of ``k``, always the smallest one first, so the cost follows
    the smaller side of a split rather than the grid size.
    """
    seeds = [v for v in grid.neighbors[k] if inside(v)]
    k_outer = grid.outer_lengths[k] > 0
    if not seeds:
        return True
    parent = list(range(len(seeds)))

    def root(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    owner = {k: -1}
    frontier = {}
    outer = {}
    size = {}
    for i, v in enumerate(seeds):
        owner[v] = i
        frontier[i] = deque([v])
        outer[i] = grid.outer_lengths[v] > 0
        size[i] = 1
    while True:
        groups = {root(i) for i in range(len(seeds))}
        if len(groups) == 1 and (not need_outer or not k_outer or outer[next(iter(groups))]):
            return True
        if need_outer and all(outer[g] for g in groups):
            return True
        live = [g for g in groups if not (need_outer and outer[g])]
        g = min(live, key=lambda x: (size[x], x))
        if not frontier[g]:
            return False
        u = frontier[g].popleft()
        for v in grid.neighbors[u]:
            if v == k or not inside(v):
                continue
            o = owner.get(v)
            if o is None:
                owner[v] = g
                frontier[g].append(v)
                size[g] += 1
                if grid.outer_lengths[v] > 0:
                    outer[g] = True
            else:
                h = root(o)
                if h != g:
                    parent[h] = g
                    frontier[g].extend(frontier.pop(h))
                    size[g] += size.pop(h)
                    outer[g] = outer[g] or outer.pop(h)


class _Balancer:
    def __init__(self, ps: PartitionSet, tau: float | None):
        self.ps = ps
        self.grid = ps.grid
        self.a = ps.assignment.copy()
        self.n = ps.n
        self.targets = ps.targets()
        self.mass = ps.masses()
        self.unit = full_cell_mass(self.grid)
        self.tau = tau
        self.counts = np.bincount(self.a, minlength=self.n)

    def rel(self, i, mass=None) -> float:
        return abs(((self.mass[i] if mass is None else mass) - self.targets[i]) / self.targets[i])

    def candidates(self, d: int, r: int) -> list[int]:
        g, a = self.grid, self.a
        if not len(g.pairs):
            return []
        pa, pb = a[g.pairs[:, 0]], a[g.pairs[:, 1]]
        cells = np.unique(np.concatenate([g.pairs[(pa == d) & (pb == r), 0], g.pairs[(pa == r) & (pb == d), 1]]))
        c = self.ps.centers[d]
        dist = np.hypot(g.centers[cells, 0] - c[0], g.centers[cells, 1] - c[1])
        return cells[np.lexsort((cells, -dist))].tolist()

    def movable(self, k: int, d: int, r: int) -> bool:
        if self.counts[d] <= 1:
            return False
        a = self.a
        # donor stays connected; everything not in r keeps a way out to the outline
        return _survives_removal(self.grid, k, lambda v: a[v] == d, need_outer=False) and \
            _survives_removal(self.grid, k, lambda v: a[v] != r, need_outer=True)

    def acceptable(self, delta: dict) -> bool:
        """``delta`` maps partition -> mass change."""
        before = [self.rel(i) for i in delta]
        after = [self.rel(i, self.mass[i] + dm) for i, dm in delta.items()]
        if max(after) >= max(before) - 1e-12:
            return False
        if sum(abs(self.mass[i] + dm - self.targets[i]) for i, dm in delta.items()) > \
                sum(abs(self.mass[i] - self.targets[i]) for i in delta) + 1e-12:
            return False
        if self.tau is not None:
            for b, x in zip(before, after):
                if x > self.tau + 1e-12 and x > b:
                    return False
        return True

    def apply(self, k: int, d: int, r: int):
        w = self.grid.weights[k]
        self.a[k] = r
        self.mass[d] -= w
        self.mass[r] += w
        self.counts[d] -= 1
        self.counts[r] += 1

    def try_direct(self, d: int, adj) -> bool:
        nr = (self.mass - self.targets) / self.unit
        for r in sorted(adj[d], key=lambda j: (nr[j], j)):
            if nr[r] >= 0:
                break
            for k in self.candidates(d, r):
                w = self.grid.weights[k]
                if self.acceptable({d: -w, r: w}) and self.movable(k, d, r):
                    self.apply(k, d, r)
                    return True
        return False

    def try_path(self, d: int, adj) -> bool:
        """Shift one cell along each hop of a partition path ending in a deficit."""
        nr = (self.mass - self.targets) / self.unit
        prev = {d: None}
        dq = deque([d])
        order = []
        while dq:
            u = dq.popleft()
            for v in sorted(adj[u]):
                if v not in prev:
                    prev[v] = u
                    dq.append(v)
                    order.append(v)
        for r in sorted((v for v in order if nr[v] < 0), key=lambda j: (nr[j], j)):
            path = [r]
            while prev[path[-1]] is not None:
                path.append(prev[path[-1]])
            path.reverse()
            if len(path) < 3:
                continue
            if self._shift_along(path):
                return True
        return False

    def _shift_along(self, path: list) -> bool:
        saved_a, saved_m, saved_c = self.a.copy(), self.mass.copy(), self.counts.copy()
        delta = {}
        for x, y in zip(path, path[1:]):
            moved = False
            for k in self.candidates(x, y):
                if self.movable(k, x, y):
                    w = self.grid.weights[k]
                    delta[x] = delta.get(x, 0.0) - w
                    delta[y] = delta.get(y, 0.0) + w
                    self.apply(k, x, y)
                    moved = True
                    break
            if not moved:
                break
        else:
            mass_after = self.mass.copy()
            self.mass = saved_m
            if self.acceptable(delta):
                self.mass = mass_after
                return True
        self.a, self.mass, self.counts = saved_a, saved_m, saved_c
        return False


def rebalance_cell_counts(ps: PartitionSet, tau: float | None = None, max_moves: int | None = None) -> PartitionSet:
    """Move boundary cells from over-full to under-full neighbours.

    Each move must lower the worst relative error of the partitions it touches,
    must not raise their total absolute error, keeps every partition connected
    and hole-free, and never lifts a partition above ``tau``. When no direct
    neighbour move helps, a chain of single-cell moves along a path of
    partitions is tried.
    """
    b = _Balancer(ps, tau)
    cap = max_moves if max_moves is not None else 10 * len(ps.grid)
    moves = 0
    while moves < cap:
        adj = _partition_adjacency(b.grid, b.a, b.n)
        nr = (b.mass - b.targets) / b.unit
        donors = sorted((i for i in range(b.n) if nr[i] > 0), key=lambda i: (-b.mass[i], i))
        if not any(b.try_direct(d, adj) for d in donors):
            if not any(b.try_path(d, adj) for d in donors):
                break
        moves += 1
    return ps.with_params(assignment=b.a)
