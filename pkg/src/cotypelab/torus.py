"""Discrete tori: index arithmetic, edge boundaries, isoperimetric bounds.

Three graphs share the vertex set Z_m^n: the half-shift graph (kind "L",
edges to eps + (m/2)e_j), the full offset graph (kind "R", edges to
eps + delta for nonzero delta in {-1,0,1}^n), and the unit-step graph
(kind "T", edges to eps +/- e_j). Edges are unordered pairs; neighbor
lists collapse duplicates, which matters only when m = 2.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations, product

import numpy as np

from .errors import BadParameter, TooLarge

_GEOMETRY_CELL_LIMIT = 2_000_000
BRUTE_FORCE_LIMIT = 16


def _check_torus_dims(n: int, m: int) -> None:
    if n < 1:
        raise BadParameter("n must be a positive integer")
    if m < 2 or m % 2 != 0:
        raise BadParameter("m must be an even integer >= 2")


@dataclass(frozen=True)
class TorusIndex:
    coords: tuple[int, ...]
    m: int

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(int(c) for c in self.coords))
        _check_torus_dims(len(self.coords), self.m)
        if any(not (0 <= c < self.m) for c in self.coords):
            raise BadParameter(f"coordinates must be residues mod {self.m}")

    @property
    def n(self) -> int:
        return len(self.coords)

    @property
    def rank(self) -> int:
        r = 0
        for c in reversed(self.coords):
            r = r * self.m + c
        return r

    @classmethod
    def from_rank(cls, rank: int, n: int, m: int) -> "TorusIndex":
        coords = []
        for _ in range(n):
            rank, c = divmod(rank, m)
            coords.append(c)
        return cls(tuple(coords), m)

    def plus(self, delta) -> "TorusIndex":
        return TorusIndex(
            tuple((c + int(d)) % self.m for c, d in zip(self.coords, delta)), self.m
        )


class TorusGeometry:
    """Cached rank arithmetic and neighbor tables for one (n, m)."""

    def __init__(self, n: int, m: int):
        _check_torus_dims(n, m)
        size = m**n
        if size > _GEOMETRY_CELL_LIMIT or size * 3**n > 10 * _GEOMETRY_CELL_LIMIT:
            raise TooLarge(f"torus with m^n = {size} cells exceeds the geometry limit")
        self.n = n
        self.m = m
        self.size = size
        self._powers = m ** np.arange(n, dtype=np.int64)
        ranks = np.arange(size, dtype=np.int64)
        self._coords = (ranks[:, None] // self._powers[None, :]) % m
        half = m // 2
        self.l_offsets = [tuple(half if i == j else 0 for i in range(n)) for j in range(n)]
        self.l_perms = [self.offset_perm(off) for off in self.l_offsets]
        self.r_offsets = [tuple(d) for d in product((-1, 0, 1), repeat=n)]
        self.r_perms = [self.offset_perm(off) for off in self.r_offsets]
        self.t_offsets = []
        for j in range(n):
            for sign in (1, -1):
                self.t_offsets.append(tuple(sign if i == j else 0 for i in range(n)))
        self._nbr_ranks: dict[str, list[list[int]]] = {}
        self._nbr_masks: dict[str, list[int]] = {}

    def offset_perm(self, delta) -> np.ndarray:
        new = (self._coords + np.asarray(delta, dtype=np.int64)) % self.m
        return new @ self._powers

    def coords_of(self, rank: int) -> tuple[int, ...]:
        return tuple(int(c) for c in self._coords[rank])

    def _offsets_for(self, kind: str):
        if kind == "L":
            return self.l_offsets
        if kind == "R":
            return [d for d in self.r_offsets if any(d)]
        if kind == "T":
            return self.t_offsets
        raise BadParameter(f"unknown neighbor kind {kind!r}")

    def neighbor_ranks(self, kind: str) -> list[list[int]]:
        if kind not in self._nbr_ranks:
            perms = [self.offset_perm(off) for off in self._offsets_for(kind)]
            table = [sorted({int(p[r]) for p in perms}) for r in range(self.size)]
            self._nbr_ranks[kind] = table
        return self._nbr_ranks[kind]

    def neighbor_masks(self, kind: str) -> list[int]:
        if kind not in self._nbr_masks:
            masks = []
            for nbrs in self.neighbor_ranks(kind):
                m = 0
                for r in nbrs:
                    m |= 1 << r
                masks.append(m)
            self._nbr_masks[kind] = masks
        return self._nbr_masks[kind]


@lru_cache(maxsize=None)
def torus_geometry(n: int, m: int) -> TorusGeometry:
    return TorusGeometry(n, m)


def neighbors(eps: TorusIndex, kind: str) -> list[TorusIndex]:
    """Neighbors of eps in the chosen graph, deduplicated, sorted by rank."""
    geo = torus_geometry(eps.n, eps.m)
    ranks = geo.neighbor_ranks(kind)[eps.rank]
    return [TorusIndex.from_rank(r, eps.n, eps.m) for r in ranks]


@dataclass(frozen=True)
class TorusSubset:
    """A subset of Z_m^n stored as a membership bitset over cell ranks."""

    n: int
    m: int
    mask: int

    def __post_init__(self):
        _check_torus_dims(self.n, self.m)
        if self.mask < 0 or self.mask >> (self.m**self.n):
            raise BadParameter("bitset has bits outside the torus")

    @classmethod
    def from_indices(cls, n: int, m: int, ranks) -> "TorusSubset":
        mask = 0
        size = m**n
        for r in ranks:
            r = int(r)
            if not (0 <= r < size):
                raise BadParameter(f"cell rank {r} outside torus of size {size}")
            mask |= 1 << r
        return cls(n, m, mask)

    @property
    def size(self) -> int:
        return self.mask.bit_count()

    def members(self) -> list[int]:
        out = []
        mm = self.mask
        while mm:
            b = mm & -mm
            out.append(b.bit_length() - 1)
            mm ^= b
        return out

    def complement(self) -> "TorusSubset":
        full = (1 << self.m**self.n) - 1
        return TorusSubset(self.n, self.m, full & ~self.mask)

    def translate(self, delta) -> "TorusSubset":
        geo = torus_geometry(self.n, self.m)
        perm = geo.offset_perm(delta)
        mask = 0
        for r in self.members():
            mask |= 1 << int(perm[r])
        return TorusSubset(self.n, self.m, mask)


def edge_boundary(subset: TorusSubset, kind: str = "R", return_edges: bool = False):
    """Number of unordered edges with exactly one endpoint in the subset."""
    if kind not in ("R", "T"):
        raise BadParameter("edge_boundary kind must be 'R' or 'T'")
    geo = torus_geometry(subset.n, subset.m)
    nbr_masks = geo.neighbor_masks(kind)
    full = (1 << geo.size) - 1
    inside = subset.mask
    outside = full & ~inside
    count = 0
    edges = [] if return_edges else None
    mm = inside
    while mm:
        b = mm & -mm
        r = b.bit_length() - 1
        mm ^= b
        cross = nbr_masks[r] & outside
        count += cross.bit_count()
        if return_edges:
            cc = cross
            while cc:
                cb = cc & -cc
                s = cb.bit_length() - 1
                cc ^= cb
                edges.append((min(r, s), max(r, s)))
    if return_edges:
        return count, sorted(edges)
    return count


@dataclass(frozen=True)
class IsoperimetricBounds:
    linfty: float  # 2 a^((n-1)/n), valid for the R-graph when a <= m^n / 2
    bl: float  # min over r of 2 a^(1-1/r) r m^(n/r-1), valid for the T-graph
    bl_r: int  # smallest r attaining the minimum
    within_half: bool  # whether a <= m^n / 2 (the guarantee's hypothesis)


def isoperimetric_bounds(a: int, n: int, m: int) -> IsoperimetricBounds:
    """Lower bounds for edge boundaries of an a-point subset of Z_m^n.

    a = 0 returns zero bounds by convention (the empty set has empty
    boundary). Evaluation is allowed for a > m^n/2 but flagged, since the
    guarantees only cover subsets up to half the torus.
    """
    _check_torus_dims(n, m)
    total = m**n
    if a < 0 or a > total:
        raise BadParameter(f"subset size {a} outside [0, {total}]")
    within = 2 * a <= total
    if a == 0:
        return IsoperimetricBounds(0.0, 0.0, 1, within)
    linfty = 2.0 * float(a) ** ((n - 1) / n)
    bl = None
    bl_r = 1
    for r in range(1, n + 1):
        term = 2.0 * float(a) ** (1.0 - 1.0 / r) * r * float(m) ** (n / r - 1.0)
        if bl is None or term < bl:
            bl = term
            bl_r = r
    return IsoperimetricBounds(linfty, float(bl), bl_r, within)


def brute_force_min_boundary(
    n: int, m: int, size: int, kind: str = "R", limit: int = BRUTE_FORCE_LIMIT
) -> tuple[int, TorusSubset]:
    """Exhaustive minimum edge boundary over all subsets of the given size.

    The minimizer is deterministic: smallest bitset value among minimizers.
    """
    _check_torus_dims(n, m)
    total = m**n
    if total > limit:
        raise TooLarge(f"m^n = {total} exceeds the enumeration limit {limit}")
    if not (0 <= size <= total):
        raise BadParameter(f"subset size {size} outside [0, {total}]")
    if kind not in ("R", "T"):
        raise BadParameter("brute_force_min_boundary kind must be 'R' or 'T'")
    if size == 0:
        return 0, TorusSubset(n, m, 0)
    geo = torus_geometry(n, m)
    nbr_masks = geo.neighbor_masks(kind)
    full = (1 << total) - 1
    best_count = None
    best_mask = None
    for combo in combinations(range(total), size):
        mask = 0
        for r in combo:
            mask |= 1 << r
        outside = full & ~mask
        count = 0
        mm = mask
        while mm:
            b = mm & -mm
            count += (nbr_masks[b.bit_length() - 1] & outside).bit_count()
            mm ^= b
        if best_count is None or count < best_count or (count == best_count and mask < best_mask):
            best_count = count
            best_mask = mask
    return best_count, TorusSubset(n, m, best_mask)
