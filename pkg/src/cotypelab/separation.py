"""Finite separation: optimal split constants and separated tree structures.

A space has the C-finite separation property when every subset S with at
least two points admits a bipartition (A, S\\A) at distance >= diam(S)/C.
The smallest such C is computed here, together with the recursive binary
tree of subsets realizing it.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterator

from .errors import BadParameter, NoValidSplit, OutOfRange, TooLarge, TooSmall
from .mst import UnionFind, max_mst_edge, prim_mst_edges
from .spaces import FiniteMetricSpace

EXACT_SUBSET_LIMIT = 15

# Full minimal-size tie-breaking enumerates groupings of the threshold
# components; past this many components fall back to a single fixed cut.
_TIE_BREAK_COMPONENT_LIMIT = 16


@dataclass
class TreeNode:
    address: str
    points: tuple[int, ...]
    children: tuple["TreeNode", "TreeNode"] | None = None

    def is_leaf(self) -> bool:
        return self.children is None


@dataclass
class SeparatedTreeStructure:
    """Binary tree of point-index subsets; every split of a multi-point
    node has gap at least diam/C."""

    C: float
    root: TreeNode

    def nodes(self) -> Iterator[TreeNode]:
        stack = [self.root]
        while stack:
            node = stack.pop()
            yield node
            if node.children is not None:
                stack.extend(reversed(node.children))


@dataclass(frozen=True)
class SeparationReport:
    c_sep: float
    witness_subset: tuple[int, ...]
    mode: str


@dataclass(frozen=True)
class PropertyCheck:
    ok: bool
    witness: tuple | None = None
    detail: str = ""


@dataclass
class TreeValidationReport:
    root_ok: PropertyCheck
    separation_ok: PropertyCheck
    partition_ok: PropertyCheck
    children_ok: PropertyCheck
    gap_ok: PropertyCheck
    incomparable_ok: PropertyCheck

    @property
    def ok(self) -> bool:
        return all(
            check.ok
            for check in (
                self.root_ok,
                self.separation_ok,
                self.partition_ok,
                self.children_ok,
                self.gap_ok,
                self.incomparable_ok,
            )
        )


def _threshold_component_sets(Dl, pts: list[int], cutoff: float) -> list[list[int]]:
    """Components of the strict threshold graph {d < cutoff} on ``pts``."""
    s = len(pts)
    uf = UnionFind(s)
    for i in range(s):
        row = Dl[pts[i]]
        for j in range(i + 1, s):
            if row[pts[j]] < cutoff:
                uf.union(i, j)
    groups: dict[int, list[int]] = {}
    for i in range(s):
        groups.setdefault(uf.find(i), []).append(pts[i])
    return sorted(groups.values(), key=lambda g: g[0])


def max_split_separation(
    space: FiniteMetricSpace, subset
) -> tuple[float, tuple[tuple[int, ...], tuple[int, ...]]]:
    """Largest dist(A, S\\A) over non-trivial bipartitions, with a maximizer.

    The value equals the largest MST edge on S (cut property); the returned
    bipartition is the maximizing split with the smallest side A, ties
    broken by lexicographically smallest index set. Child order puts the
    smaller side first.
    """
    pts = sorted(int(i) for i in subset)
    if len(pts) < 2:
        raise TooSmall("max_split_separation needs a subset with >= 2 points")
    if len(set(pts)) != len(pts) or pts[0] < 0 or pts[-1] >= len(space):
        raise BadParameter("subset must be distinct valid point indices")
    Dl = space.dist.tolist()
    value = max_mst_edge(Dl, pts)
    comps = _threshold_component_sets(Dl, pts, value)
    total = len(pts)
    if len(comps) > _TIE_BREAK_COMPONENT_LIMIT:
        a = tuple(comps[0])
        b = tuple(sorted(p for comp in comps[1:] for p in comp))
        if (len(a), a) > (len(b), b):
            a, b = b, a
        return value, (a, b)
    best: tuple[int, tuple[int, ...]] | None = None
    best_pair = None
    r = len(comps)
    for assign in range(1, 1 << (r - 1)):
        side0 = [p for idx in range(r) if idx == 0 or not (assign >> (idx - 1)) & 1 for p in comps[idx]]
        if len(side0) == total:
            continue
        side1 = sorted(set(pts) - set(side0))
        side0 = sorted(side0)
        a, b = tuple(side0), tuple(side1)
        if (len(b), b) < (len(a), a):
            a, b = b, a
        key = (len(a), a)
        if best is None or key < best:
            best = key
            best_pair = (a, b)
    assert best_pair is not None
    return value, best_pair


def _exact_scan(Dl, k: int) -> tuple[float, tuple[int, ...]]:
    """Max over all subsets (size >= 2) of diam/max-split, with witness."""
    size = 1 << k
    diam = [0.0] * size
    best_ratio = 0.0
    witness = 0
    for mask in range(3, size):
        rest = mask & (mask - 1)
        if rest == 0:
            continue  # singleton
        low = (mask & -mask).bit_length() - 1
        row = Dl[low]
        dmax = diam[rest]
        mm = rest
        while mm:
            b = mm & -mm
            j = b.bit_length() - 1
            mm ^= b
            if row[j] > dmax:
                dmax = row[j]
        diam[mask] = dmax
        pts = []
        mm = mask
        while mm:
            b = mm & -mm
            pts.append(b.bit_length() - 1)
            mm ^= b
        sep = max_mst_edge(Dl, pts)
        ratio = dmax / sep
        if ratio > best_ratio:
            best_ratio = ratio
            witness = mask
    pts = tuple(i for i in range(k) if (witness >> i) & 1)
    return best_ratio, pts


def single_linkage_merges(
    space: FiniteMetricSpace,
) -> list[tuple[float, tuple[int, ...]]]:
    """(merge height, merged cluster) pairs of single-linkage agglomeration.

    The height at which a cluster forms equals the largest MST edge inside
    it, i.e. the cluster's best split separation.
    """
    k = len(space)
    Dl = space.dist.tolist()
    edges = sorted(prim_mst_edges(Dl, range(k)))
    uf = UnionFind(k)
    members: dict[int, list[int]] = {i: [i] for i in range(k)}
    merges = []
    for w, u, v in edges:
        ru, rv = uf.find(u), uf.find(v)
        merged = sorted(members[ru] + members[rv])
        uf.union(u, v)
        root = uf.find(u)
        members[root] = merged
        merges.append((w, tuple(merged)))
    return merges


def separation_constant(
    space: FiniteMetricSpace, mode: str = "exact", limit: int = EXACT_SUBSET_LIMIT
) -> SeparationReport:
    """The optimal finite-separation constant of the space.

    exact mode maximizes diam(S)/max_split(S) over every subset with at
    least two points (2^k enumeration, gated by ``limit``); dendrogram mode
    restricts to single-linkage clusters and is a certified lower bound.
    """
    k = len(space)
    if k < 2:
        raise TooSmall("separation_constant needs at least 2 points")
    if mode == "exact":
        if k > limit:
            raise TooLarge(f"exact mode enumerates 2^{k} subsets; limit is {limit} points")
        ratio, witness = _exact_scan(space.dist.tolist(), k)
        return SeparationReport(ratio, witness, "exact")
    if mode != "dendrogram":
        raise BadParameter(f"unknown mode {mode!r}; use 'exact' or 'dendrogram'")
    best = 0.0
    witness: tuple[int, ...] = ()
    for height, cluster in single_linkage_merges(space):
        ratio = space.diam(cluster) / height
        if ratio > best:
            best = ratio
            witness = cluster
    return SeparationReport(best, witness, "dendrogram")


def build_tree_structure(space: FiniteMetricSpace, C: float) -> SeparatedTreeStructure:
    """Recursively split every multi-point subset by a maximizing bipartition.

    Each chosen split has dist(A, S\\A) >= diam(S)/C; if some encountered
    subset admits no such bipartition, NoValidSplit is raised, certifying
    that C is below the separation constant of that subset. Tie-breaking is
    deterministic (smallest side, then lexicographic; child 0 is the
    smaller side).
    """
    if C < 1.0:
        raise OutOfRange("C must be >= 1")
    k = len(space)
    if k < 1:
        raise TooSmall("build_tree_structure needs at least 1 point")

    def recurse(pts: tuple[int, ...], address: str) -> TreeNode:
        if len(pts) == 1:
            return TreeNode(address, pts)
        diameter = space.diam(pts)
        value, (a, b) = max_split_separation(space, pts)
        if diameter / value > C:
            raise NoValidSplit(pts, diameter, diameter / C, value)
        return TreeNode(
            address,
            pts,
            (recurse(a, address + "0"), recurse(b, address + "1")),
        )

    root = recurse(tuple(range(k)), "")
    return SeparatedTreeStructure(float(C), root)


def _is_ancestor(a: str, b: str) -> bool:
    return b.startswith(a)


def validate_tree_structure(
    space: FiniteMetricSpace, tree: SeparatedTreeStructure
) -> TreeValidationReport:
    """Check the five defining tree-structure properties plus the
    incomparable-branch separation bound, reporting the first violation of
    each. Gap comparisons use the same diam/dist ratio arithmetic as the
    builder, so a freshly built tree validates exactly."""
    k = len(space)
    C = tree.C
    nodes = list(tree.nodes())
    for node in nodes:
        if any(not (0 <= p < k) for p in node.points):
            raise BadParameter(f"node {node.address!r} references invalid point indices")
        if node.children is not None:
            c0, c1 = node.children
            if c0.address != node.address + "0" or c1.address != node.address + "1":
                raise BadParameter(f"children of {node.address!r} carry wrong addresses")

    ok = PropertyCheck(True)
    root_ok = ok
    if tuple(sorted(tree.root.points)) != tuple(range(k)):
        root_ok = PropertyCheck(False, tuple(tree.root.points), "root subset is not the whole space")

    separation_ok = ok
    for node in nodes:
        if node.is_leaf() and len(node.points) > 1:
            pair = (node.points[0], node.points[1])
            separation_ok = PropertyCheck(
                False, (node.address, pair), "leaf with two or more points never separates them"
            )
            break

    partition_ok = ok
    for node in nodes:
        if node.children is None:
            continue
        c0, c1 = node.children
        union = sorted(c0.points + c1.points)
        if len(set(c0.points) & set(c1.points)) > 0 or union != sorted(node.points):
            partition_ok = PropertyCheck(
                False, (node.address,), "children do not partition the node's subset"
            )
            break

    children_ok = ok
    for node in nodes:
        if node.children is None or len(node.points) <= 1:
            continue
        c0, c1 = node.children
        if len(c0.points) == 0 or len(c1.points) == 0:
            children_ok = PropertyCheck(
                False, (node.address,), "multi-point node with an empty child"
            )
            break

    gap_ok = ok
    for node in nodes:
        if node.children is None or len(node.points) <= 1:
            continue
        c0, c1 = node.children
        if len(c0.points) == 0 or len(c1.points) == 0:
            continue
        diameter = space.diam(node.points)
        gap = space.set_distance(c0.points, c1.points)
        bad = (gap == 0.0 and diameter > 0.0) or (gap > 0.0 and diameter / gap > C)
        if bad:
            gap_ok = PropertyCheck(
                False,
                (node.address,),
                f"diam {diameter!r} exceeds C * dist(children) = {C * gap!r}",
            )
            break

    incomparable_ok = ok
    nonempty = [nd for nd in nodes if len(nd.points) > 0]
    for i, na in enumerate(nonempty):
        if not incomparable_ok.ok:
            break
        for nb in nonempty[i + 1 :]:
            if _is_ancestor(na.address, nb.address) or _is_ancestor(nb.address, na.address):
                continue
            gap = space.set_distance(na.points, nb.points)
            need = max(space.diam(na.points), space.diam(nb.points))
            bad = (gap == 0.0 and need > 0.0) or (gap > 0.0 and need / gap > C)
            if bad:
                incomparable_ok = PropertyCheck(
                    False,
                    (na.address, nb.address),
                    f"incomparable nodes at dist {gap!r} with max diam {need!r}",
                )
                break

    return TreeValidationReport(
        root_ok, separation_ok, partition_ok, children_ok, gap_ok, incomparable_ok
    )


def tree_to_json_obj(tree: SeparatedTreeStructure) -> dict:
    def render(node: TreeNode) -> dict:
        return {
            "address": node.address,
            "points": list(node.points),
            "children": [] if node.children is None else [render(c) for c in node.children],
        }

    return {"C": tree.C, "tree": render(tree.root)}


def tree_to_json(tree: SeparatedTreeStructure) -> str:
    return json.dumps(tree_to_json_obj(tree), sort_keys=True, indent=2) + "\n"


def tree_to_dot(space: FiniteMetricSpace, tree: SeparatedTreeStructure) -> str:
    lines = ["digraph septree {", '  node [shape=box, fontname="monospace"];']
    for node in tree.nodes():
        name = "r" + node.address
        pts = "{" + ",".join(space.labels[p] for p in node.points) + "}"
        lines.append(
            f'  "{name}" [label="[{node.address or "root"}] {pts}\\ndiam={space.diam(node.points)!r}"];'
        )
    for node in tree.nodes():
        if node.children is not None:
            for child in node.children:
                lines.append(f'  "r{node.address}" -> "r{child.address}";')
    lines.append("}")
    return "\n".join(lines) + "\n"
