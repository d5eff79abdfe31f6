"""Minimum spanning trees on dense distance matrices (Prim)."""

from __future__ import annotations

import math


def prim_mst_edges(dist, indices) -> list[tuple[float, int, int]]:
    """MST edges of the complete graph induced on ``indices``.

    ``dist`` is any object supporting ``dist[i][j]`` lookups (nested lists
    are fastest). Returns ``(weight, u, v)`` triples with ``u < v`` in the
    original index space, in the deterministic order Prim attaches them
    (ties broken by smallest attachment index).
    """
    pts = list(indices)
    s = len(pts)
    if s <= 1:
        return []
    in_tree = [False] * s
    best_w = [math.inf] * s
    best_parent = [0] * s
    in_tree[0] = True
    row0 = dist[pts[0]]
    for j in range(1, s):
        best_w[j] = row0[pts[j]]
    edges = []
    for _ in range(s - 1):
        w = math.inf
        jbest = -1
        for j in range(s):
            if not in_tree[j] and best_w[j] < w:
                w = best_w[j]
                jbest = j
        in_tree[jbest] = True
        u = pts[best_parent[jbest]]
        v = pts[jbest]
        edges.append((w, min(u, v), max(u, v)))
        row = dist[pts[jbest]]
        for j in range(s):
            if not in_tree[j]:
                d = row[pts[j]]
                if d < best_w[j]:
                    best_w[j] = d
                    best_parent[j] = jbest
    return edges


def max_mst_edge(dist, indices) -> float:
    """Largest edge weight of the MST on ``indices`` (lean variant)."""
    pts = list(indices)
    s = len(pts)
    if s <= 1:
        return 0.0
    in_tree = [False] * s
    best_w = [math.inf] * s
    in_tree[0] = True
    row0 = dist[pts[0]]
    for j in range(1, s):
        best_w[j] = row0[pts[j]]
    top = 0.0
    for _ in range(s - 1):
        w = math.inf
        jbest = -1
        for j in range(s):
            if not in_tree[j] and best_w[j] < w:
                w = best_w[j]
                jbest = j
        in_tree[jbest] = True
        if w > top:
            top = w
        row = dist[pts[jbest]]
        for j in range(s):
            if not in_tree[j]:
                d = row[pts[j]]
                if d < best_w[j]:
                    best_w[j] = d
    return top


class UnionFind:
    """Array-based union-find over ``range(size)``."""

    def __init__(self, size: int):
        self.parent = list(range(size))

    def find(self, x: int) -> int:
        p = self.parent
        while p[x] != x:
            p[x] = p[p[x]]
            x = p[x]
        return x

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if rb < ra:
            ra, rb = rb, ra
        self.parent[rb] = ra
        return True
