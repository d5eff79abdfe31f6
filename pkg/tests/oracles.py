"""Independent brute-force oracles used to cross-check the library.

Everything here is written against the definitions directly (full
enumeration, no MST shortcuts, no shared code paths with the package).
"""

from __future__ import annotations

from itertools import combinations, product


def triangle_ok(matrix, tol: float) -> bool:
    k = len(matrix)
    for i in range(k):
        for j in range(k):
            for z in range(k):
                if matrix[i][j] > (matrix[i][z] + matrix[z][j]) * (1.0 + tol):
                    return False
    return True


def ultrametric_witness(matrix, tol: float):
    """First (x, y, z) with d(x,y) > max(d(x,z), d(z,y)), scanning all triples."""
    k = len(matrix)
    for i in range(k):
        for j in range(k):
            for z in range(k):
                if len({i, j, z}) < 3:
                    continue
                if matrix[i][j] > max(matrix[i][z], matrix[z][j]) * (1.0 + tol):
                    return (i, j, z)
    return None


def minimax_all_chains(matrix):
    """Minimax chain value for every pair by enumerating all simple paths."""
    k = len(matrix)
    best = [[0.0] * k for _ in range(k)]

    def dfs(src, node, visited, running):
        for nxt in range(k):
            if nxt in visited:
                continue
            top = max(running, matrix[node][nxt])
            if best[src][nxt] == 0.0 or top < best[src][nxt]:
                best[src][nxt] = top
            visited.add(nxt)
            dfs(src, nxt, visited, top)
            visited.remove(nxt)

    for src in range(k):
        dfs(src, src, {src}, 0.0)
    return best


def bipartition_max_separation(matrix, subset):
    """Max over all non-trivial bipartitions of min cross distance."""
    pts = sorted(subset)
    s = len(pts)
    best = None
    for pick in range(1, 1 << (s - 1)):
        a = [pts[i] for i in range(s) if (pick >> i) & 1]
        b = [p for p in pts if p not in a]
        if not a or not b:
            continue
        gap = min(matrix[x][y] for x in a for y in b)
        if best is None or gap > best:
            best = gap
    return best


def separation_constant_all_subsets(matrix):
    """Max over all subsets (>= 2 points) of diam / best bipartition gap."""
    k = len(matrix)
    best = 0.0
    witness = ()
    for size in range(2, k + 1):
        for subset in combinations(range(k), size):
            diam = max(matrix[i][j] for i in subset for j in subset)
            gap = bipartition_max_separation(matrix, subset)
            ratio = diam / gap
            if ratio > best:
                best = ratio
                witness = subset
    return best, witness


def connected_below(matrix, a, b, eps) -> bool:
    """Union-find connectivity of the strict threshold graph {d < eps}."""
    k = len(matrix)
    parent = list(range(k))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i in range(k):
        for j in range(i + 1, k):
            if matrix[i][j] < eps:
                parent[find(i)] = find(j)
    return find(a) == find(b)


def maximal_separated_split(matrix, subset):
    """The constructive 1-separation witness for ultrametric subsets.

    Builds a maximal diam-separated family greedily, then takes the strict
    ball around its first point. Returns (A, complement, diam).
    """
    pts = sorted(subset)
    diam = max(matrix[i][j] for i in pts for j in pts)
    family = []
    for p in pts:
        if all(matrix[p][q] >= diam for q in family):
            family.append(p)
    x0 = family[0]
    a = [p for p in pts if matrix[x0][p] < diam]
    b = [p for p in pts if p not in a]
    return a, b, diam


def torus_edges(n, m, kind):
    """Unordered edge set of the chosen torus graph, built from scratch."""
    if kind == "R":
        offsets = [d for d in product((-1, 0, 1), repeat=n) if any(d)]
    elif kind == "T":
        offsets = []
        for j in range(n):
            for sign in (1, -1):
                offsets.append(tuple(sign if i == j else 0 for i in range(n)))
    elif kind == "L":
        offsets = [tuple(m // 2 if i == j else 0 for i in range(n)) for j in range(n)]
    else:
        raise ValueError(kind)
    edges = set()
    for cell in product(range(m), repeat=n):
        for delta in offsets:
            other = tuple((c + d) % m for c, d in zip(cell, delta))
            if other != cell:
                edges.add(frozenset((cell, other)))
    return edges


def torus_rank(cell, m) -> int:
    r = 0
    for c in reversed(cell):
        r = r * m + c
    return r


def boundary_by_edge_scan(n, m, member_ranks, kind) -> int:
    members = set(member_ranks)
    count = 0
    for edge in torus_edges(n, m, kind):
        ranks = {torus_rank(cell, m) for cell in edge}
        if len(ranks & members) == 1:
            count += 1
    return count


def cotype_sides_by_definition(matrix, values, n, m, p):
    """Both expectation sides of the inequality, straight from the sums."""
    size = m**n
    cells = list(product(range(m), repeat=n))
    index = {cell: torus_rank(cell, m) for cell in cells}
    lhs = 0.0
    for cell in cells:
        fe = values[index[cell]]
        for j in range(n):
            shifted = tuple((c + (m // 2 if i == j else 0)) % m for i, c in enumerate(cell))
            lhs += matrix[fe][values[index[shifted]]] ** p
    lhs /= size
    rhs = 0.0
    for cell in cells:
        fe = values[index[cell]]
        for delta in product((-1, 0, 1), repeat=n):
            shifted = tuple((c + d) % m for c, d in zip(cell, delta))
            rhs += matrix[fe][values[index[shifted]]] ** p
    rhs /= size * 3**n
    return lhs, rhs
