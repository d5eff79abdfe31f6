"""Finite metric spaces: validation, ultrametric and L^s diagnostics,
snowflake transform, subdominant ultrametric, and threshold chains."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from itertools import combinations
from pathlib import Path

import numpy as np

from .errors import (
    BadParameter,
    MetricValidationError,
    MetricViolation,
    TooSmall,
)
from .mst import UnionFind, prim_mst_edges

DEFAULT_TOLERANCE = 1e-9

LS_EXPONENT_CAP = 64.0
LS_BISECTION_PRECISION = 1e-10


@dataclass(frozen=True, eq=False)
class FiniteMetricSpace:
    """A labeled point set with a symmetric distance matrix.

    ``tolerance`` is the relative slack used by the metric and ultrametric
    checks; exact inputs (dendrogram distances, integer graph metrics) work
    with tolerance 0.
    """

    labels: tuple[str, ...]
    dist: np.ndarray
    tolerance: float = DEFAULT_TOLERANCE

    def __post_init__(self):
        arr = np.array(self.dist, dtype=float)
        arr.setflags(write=False)
        object.__setattr__(self, "dist", arr)
        object.__setattr__(self, "labels", tuple(str(s) for s in self.labels))
        if self.tolerance < 0:
            raise BadParameter("tolerance must be nonnegative")

    def __len__(self) -> int:
        return self.dist.shape[0]

    def d(self, i: int, j: int) -> float:
        return float(self.dist[i, j])

    def diam(self, indices=None) -> float:
        """Largest pairwise distance; 0 for empty or singleton sets."""
        if indices is None:
            indices = range(len(self))
        idx = list(indices)
        if len(idx) <= 1:
            return 0.0
        sub = self.dist[np.ix_(idx, idx)]
        return float(sub.max())

    def set_distance(self, a_indices, b_indices) -> float:
        """min d(a, b) over a in A, b in B; empty arguments are an error."""
        a = list(a_indices)
        b = list(b_indices)
        if not a or not b:
            raise BadParameter("set_distance requires non-empty index sets")
        return float(self.dist[np.ix_(a, b)].min())

    def subspace(self, indices) -> "FiniteMetricSpace":
        idx = list(indices)
        return FiniteMetricSpace(
            tuple(self.labels[i] for i in idx),
            self.dist[np.ix_(idx, idx)],
            self.tolerance,
        )

    def rescaled(self, factor: float) -> "FiniteMetricSpace":
        """The space with every distance multiplied by ``factor`` > 0."""
        if factor <= 0:
            raise BadParameter("scale factor must be positive")
        return FiniteMetricSpace(self.labels, self.dist * factor, self.tolerance)


@dataclass(frozen=True)
class Chain:
    """A finite point sequence whose consecutive steps are all < epsilon."""

    points: tuple[int, ...]
    epsilon: float


@dataclass(frozen=True)
class UltrametricVerdict:
    ok: bool
    witness: tuple[int, int, int] | None  # (x, y, z) with d(x,y) > max(d(x,z), d(z,y))

    def __bool__(self) -> bool:
        return self.ok


def metric_violations(matrix, tolerance: float = DEFAULT_TOLERANCE) -> list[MetricViolation]:
    """Every violated metric axiom in ``matrix``, each with a witness.

    Pairwise axioms list every bad entry; the triangle inequality lists each
    offending pair once, with the first mediator that breaks it.
    """
    arr = np.asarray(matrix, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        return [MetricViolation("NonSquare", (), f"shape {arr.shape} is not square")]
    k = arr.shape[0]
    out: list[MetricViolation] = []
    for i in range(k):
        if arr[i, i] != 0.0:
            out.append(
                MetricViolation("NonzeroDiagonal", (i,), f"d({i},{i}) = {arr[i, i]!r} != 0")
            )
    for i in range(k):
        for j in range(i + 1, k):
            if arr[i, j] != arr[j, i]:
                out.append(
                    MetricViolation(
                        "AsymmetricEntry", (i, j), f"{arr[i, j]!r} != {arr[j, i]!r}"
                    )
                )
            if arr[i, j] < 0.0:
                out.append(MetricViolation("NegativeEntry", (i, j), f"{arr[i, j]!r} < 0"))
            elif arr[i, j] == 0.0:
                out.append(
                    MetricViolation("ZeroDistance", (i, j), "distinct points at distance 0")
                )
    if out:
        # Triangle checks are only meaningful on a symmetric nonnegative matrix.
        return out
    slack = 1.0 + tolerance
    seen: set[tuple[int, int]] = set()
    for z in range(k):
        allowed = (arr[:, z][:, None] + arr[z, :][None, :]) * slack
        bad = arr > allowed
        bad[z, :] = False
        bad[:, z] = False
        np.fill_diagonal(bad, False)
        for i, j in np.argwhere(np.triu(bad, 1)):
            pair = (int(i), int(j))
            if pair not in seen:
                seen.add(pair)
                out.append(
                    MetricViolation(
                        "TriangleViolation",
                        (pair[0], pair[1], z),
                        f"d({pair[0]},{pair[1]}) = {arr[i, j]!r} > "
                        f"d({pair[0]},{z}) + d({z},{pair[1]}) = {arr[i, z] + arr[z, j]!r}",
                    )
                )
    out.sort(key=lambda v: (v.kind, v.where))
    return out


def validate_metric(matrix, labels=None, tolerance: float = DEFAULT_TOLERANCE) -> FiniteMetricSpace:
    """Validate a square distance matrix and wrap it as a space.

    Raises MetricValidationError carrying every violated axiom.
    """
    arr = np.asarray(matrix, dtype=float)
    violations = metric_violations(arr, tolerance)
    if violations:
        raise MetricValidationError(violations)
    k = arr.shape[0]
    if labels is None:
        labels = tuple(f"p{i}" for i in range(k))
    labels = tuple(str(s) for s in labels)
    if len(labels) != k:
        raise BadParameter(f"{len(labels)} labels for {k} points")
    return FiniteMetricSpace(labels, arr, tolerance)


def check_ultrametric(space: FiniteMetricSpace) -> UltrametricVerdict:
    """Whether d(x,y) <= max(d(x,z), d(z,y)) holds for all triples.

    Comparison uses the space's relative tolerance; with tolerance 0 the
    check is exact. On failure the lexicographically smallest witness
    (x, y, z) is reported.
    """
    D = space.dist
    k = len(space)
    if k < 3:
        return UltrametricVerdict(True, None)
    slack = 1.0 + space.tolerance
    best: tuple[int, int, int] | None = None
    for z in range(k):
        col = D[:, z]
        bad = D > np.maximum.outer(col, col) * slack
        bad[z, :] = False
        bad[:, z] = False
        np.fill_diagonal(bad, False)
        bad = np.triu(bad, 1)
        if bad.any():
            i, j = np.argwhere(bad)[0]
            cand = (int(i), int(j), z)
            if best is None or cand < best:
                best = cand
    return UltrametricVerdict(best is None, best)


def _bisect_critical(r1: float, r2: float, hi: float) -> float:
    """Solve r1**s + r2**s = 1 for s in [1, hi]; r1, r2 < 1, decreasing LHS."""
    if r1 + r2 <= 1.0:
        return 1.0
    lo = 1.0
    while hi - lo > LS_BISECTION_PRECISION:
        mid = 0.5 * (lo + hi)
        if r1**mid + r2**mid >= 1.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def ls_metric_exponent(space: FiniteMetricSpace) -> float:
    """sup of s with d(x,y) <= (d(x,z)^s + d(z,y)^s)^(1/s) for all triples.

    Per triple with strict maximum c > max(a, b) the critical s solves
    a^s + b^s = c^s (bisection to 1e-10). Returns inf exactly when the
    space is ultrametric (no binding triple); values past the cap of 64
    are reported as 64.
    """
    k = len(space)
    if k < 2:
        raise TooSmall("ls_metric_exponent needs at least 2 points")
    Dl = space.dist.tolist()
    best: float | None = None
    any_binding = False
    for i, j, z in combinations(range(k), 3):
        trio = sorted((Dl[i][j], Dl[i][z], Dl[j][z]))
        lo2, mid2, c = trio
        if c <= mid2:
            continue
        any_binding = True
        if best is not None and best <= 1.0:
            continue
        hi = best if best is not None else LS_EXPONENT_CAP
        r1 = lo2 / c
        r2 = mid2 / c
        if r1**hi + r2**hi >= 1.0:
            continue
        best = _bisect_critical(r1, r2, hi)
    if not any_binding:
        return math.inf
    if best is None:
        return LS_EXPONENT_CAP
    return max(best, 1.0)


def snowflake_transform(space: FiniteMetricSpace, alpha: float) -> FiniteMetricSpace:
    """The space with distances d^alpha.

    alpha <= 1 always yields a metric; alpha > 1 revalidates and raises
    MetricValidationError listing the broken triangles.
    """
    if alpha <= 0:
        raise BadParameter("snowflake exponent must be positive")
    powered = np.power(space.dist, alpha)
    if alpha > 1.0:
        return validate_metric(powered, space.labels, space.tolerance)
    return FiniteMetricSpace(space.labels, powered, space.tolerance)


def subdominant_ultrametric(space: FiniteMetricSpace) -> tuple[FiniteMetricSpace, float]:
    """The minimax-path metric below d, and its bi-Lipschitz distortion.

    rho(x, y) is the smallest over chains from x to y of the largest step,
    computed as the maximum edge on the MST path. rho is the largest
    ultrametric with rho <= d pointwise; the returned distortion is
    max d/rho >= 1. rho entries are selected (never recomputed) from d,
    so the ultrametric property holds exactly.
    """
    k = len(space)
    rho = np.zeros((k, k), dtype=float)
    if k > 1:
        Dl = space.dist.tolist()
        edges = prim_mst_edges(Dl, range(k))
        adj: list[list[tuple[int, float]]] = [[] for _ in range(k)]
        for w, u, v in edges:
            adj[u].append((v, w))
            adj[v].append((u, w))
        for src in range(k):
            stack = [(src, 0.0)]
            seen = [False] * k
            seen[src] = True
            while stack:
                node, running = stack.pop()
                for nxt, w in adj[node]:
                    if not seen[nxt]:
                        seen[nxt] = True
                        top = w if w > running else running
                        rho[src, nxt] = top
                        stack.append((nxt, top))
    if k > 1:
        off = ~np.eye(k, dtype=bool)
        distortion = float(np.max(space.dist[off] / rho[off]))
    else:
        distortion = 1.0
    sub = FiniteMetricSpace(space.labels, rho, tolerance=0.0)
    return sub, distortion


def find_chain(space: FiniteMetricSpace, a: int, b: int, epsilon: float) -> Chain | None:
    """A chain from a to b with every step strictly below epsilon, or None.

    Breadth-first search in the strict threshold graph {d < epsilon};
    neighbor order is by index, so the returned chain is deterministic.
    """
    k = len(space)
    if not (0 <= a < k and 0 <= b < k):
        raise BadParameter(f"point indices must lie in [0, {k})")
    if epsilon <= 0:
        raise BadParameter("epsilon must be positive")
    if a == b:
        return Chain((a,), float(epsilon))
    D = space.dist
    prev = [-1] * k
    prev[a] = a
    frontier = [a]
    while frontier:
        nxt = []
        for u in frontier:
            row = D[u]
            for v in range(k):
                if prev[v] < 0 and v != u and row[v] < epsilon:
                    prev[v] = u
                    if v == b:
                        path = [b]
                        while path[-1] != a:
                            path.append(prev[path[-1]])
                        return Chain(tuple(reversed(path)), float(epsilon))
                    nxt.append(v)
        frontier = nxt
    return None


def threshold_components(space: FiniteMetricSpace, epsilon: float) -> UnionFind:
    """Union-find of the strict threshold graph {d < epsilon}."""
    k = len(space)
    uf = UnionFind(k)
    D = space.dist
    for i in range(k):
        for j in range(i + 1, k):
            if D[i, j] < epsilon:
                uf.union(i, j)
    return uf


# --- file formats ---------------------------------------------------------


def space_to_json_obj(space: FiniteMetricSpace) -> dict:
    return {
        "labels": list(space.labels),
        "matrix": [[float(x) for x in row] for row in space.dist],
    }


def space_to_json(space: FiniteMetricSpace) -> str:
    return json.dumps(space_to_json_obj(space), sort_keys=True, indent=2) + "\n"


def space_from_json_obj(obj, tolerance: float = DEFAULT_TOLERANCE) -> FiniteMetricSpace:
    if not isinstance(obj, dict) or "labels" not in obj or "matrix" not in obj:
        raise BadParameter('space JSON must be {"labels": [...], "matrix": [[...]]}')
    return validate_metric(obj["matrix"], obj["labels"], tolerance)


def space_from_json(text: str, tolerance: float = DEFAULT_TOLERANCE) -> FiniteMetricSpace:
    return space_from_json_obj(json.loads(text), tolerance)


def space_to_csv(space: FiniteMetricSpace) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(space.labels)
    for row in space.dist:
        writer.writerow([repr(float(x)) for x in row])
    return buf.getvalue()


def space_from_csv(text: str, tolerance: float = DEFAULT_TOLERANCE) -> FiniteMetricSpace:
    rows = [r for r in csv.reader(io.StringIO(text)) if r]
    if not rows:
        raise BadParameter("empty CSV space file")
    labels = [s.strip() for s in rows[0]]
    matrix = [[float(x) for x in r] for r in rows[1:]]
    if len(matrix) != len(labels):
        raise BadParameter(
            f"CSV has {len(labels)} header labels but {len(matrix)} matrix rows"
        )
    return validate_metric(matrix, labels, tolerance)


def load_space(path, tolerance: float = DEFAULT_TOLERANCE) -> FiniteMetricSpace:
    p = Path(path)
    text = p.read_text()
    if p.suffix.lower() == ".csv":
        return space_from_csv(text, tolerance)
    return space_from_json(text, tolerance)


def save_space(space: FiniteMetricSpace, path) -> None:
    p = Path(path)
    if p.suffix.lower() == ".csv":
        p.write_text(space_to_csv(space))
    else:
        p.write_text(space_to_json(space))
