"""Cotype inequality evaluation, constant search, and level certificates.

For f: Z_m^n -> X the inequality compares the p-th moments of half-torus
displacements d(f(eps), f(eps + (m/2)e_j)) against m^p n^(1-p/q) times the
moments of unit-offset displacements d(f(eps), f(eps + delta)) over
delta in {-1,0,1}^n. The implied constant of one f is the smallest Gamma
making the inequality hold for it.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from itertools import product
from pathlib import Path

import mpmath
import numpy as np

from .errors import (
    BadParameter,
    BudgetTooSmall,
    DimensionMismatch,
    IdentityMismatch,
    NoValidSplit,
    OutOfRange,
    Overflow,
    TooLargeForExhaustive,
)
from .separation import build_tree_structure, separation_constant
from .spaces import FiniteMetricSpace
from .torus import TorusSubset, edge_boundary, torus_geometry

IDENTITY_RTOL = 1e-12
CERT_RTOL = 1e-9
EXHAUSTIVE_LIMIT = 10**6


@dataclass(frozen=True)
class CotypeParams:
    p: float
    q: float
    n: int
    m: int
    gamma: float | None = None

    def __post_init__(self):
        if not (1.0 <= self.p <= self.q):
            raise OutOfRange(f"need 1 <= p <= q, got p={self.p}, q={self.q}")
        if self.n < 1:
            raise OutOfRange("n must be a positive integer")
        if self.m < 2 or self.m % 2 != 0:
            raise OutOfRange("m must be an even integer >= 2")
        if self.gamma is not None and self.gamma < 1.0:
            raise OutOfRange("gamma must be >= 1")


@dataclass(frozen=True, eq=False)
class TorusFunction:
    """A map Z_m^n -> point indices, stored densely by cell rank."""

    n: int
    m: int
    values: np.ndarray

    def __post_init__(self):
        arr = np.array(self.values, dtype=np.int64)
        if arr.ndim != 1 or arr.shape[0] != self.m**self.n:
            raise DimensionMismatch(
                f"function needs m^n = {self.m**self.n} values, got shape {arr.shape}"
            )
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)


@dataclass(frozen=True)
class CotypeEvaluation:
    lhs: float
    rhs: float
    implied_gamma: float
    params: CotypeParams


@dataclass(frozen=True)
class CertificateRow:
    level: int
    block_size: int  # |F at the level's 0-child|
    level_diam: float  # diam of the level's image subset
    boundary: int  # edge boundary of the 0-child preimage in the R-graph
    lhs_level: float
    rhs_level: float
    counting_ok: bool  # m^q 3^-n |boundary| >= 2 n |block|


@dataclass(frozen=True)
class Certificate:
    q: float
    n: int
    m: int
    C: float
    rows: tuple[CertificateRow, ...]
    lhs: float
    rhs: float
    bound: float  # C^q m^q rhs
    m_required: int | None
    scaling_ok: bool
    counting_all_ok: bool
    lhs_est_ok: bool
    rhs_est_ok: bool
    overall_ok: bool


def _geq(a: float, b: float, rtol: float = CERT_RTOL) -> bool:
    """a >= b up to relative slack."""
    return a >= b - rtol * max(abs(a), abs(b))


def mn_scaling_function(q: float, n: int) -> int:
    """Smallest even m with m^(q-1) >= n 3^n, verified in extended precision."""
    if q <= 1.0:
        raise OutOfRange("the scaling function is undefined for q <= 1")
    if n < 1:
        raise OutOfRange("n must be a positive integer")
    target = n * 3**n
    exponent = 1.0 / (q - 1.0)
    if exponent * math.log2(target) > 62:
        raise Overflow(f"(n 3^n)^(1/(q-1)) exceeds 2^62 for q={q}, n={n}")
    with mpmath.workdps(60):
        qm1 = mpmath.mpf(q) - 1
        threshold = mpmath.power(target, 1 / qm1)
        m = int(mpmath.ceil(threshold / 2)) * 2
        m = max(m, 2)

        def ok(candidate: int) -> bool:
            return mpmath.power(candidate, qm1) >= target

        while not ok(m):
            m += 2
        while m - 2 >= 2 and ok(m - 2):
            m -= 2
    return m


def scaling_lower_bound(gamma: float, q: float, n: int) -> float:
    """gamma^-1 n^(1/q): any admissible m must be at least this large."""
    if gamma < 1.0:
        raise OutOfRange("gamma must be >= 1")
    if q < 1.0 or n < 1:
        raise OutOfRange("need q >= 1 and n >= 1")
    return float(n) ** (1.0 / q) / gamma


def _check_values(space: FiniteMetricSpace, f: TorusFunction) -> None:
    if f.values.size and (f.values.min() < 0 or f.values.max() >= len(space)):
        raise OutOfRange("function values must be valid point indices")


def edge_sum_components(
    space: FiniteMetricSpace, f: TorusFunction, p: float
) -> tuple[float, float | None, float, float | None]:
    """(lhs_direct, lhs_edge, rhs_direct, rhs_edge) for one function.

    Direct values sum over ordered (eps, j) and (eps, delta) pairs; edge
    values sum over unordered graph edges and double. The edge route is
    only defined for m >= 4, where distinct offsets give distinct cells.
    """
    _check_values(space, f)
    geo = torus_geometry(f.n, f.m)
    Dp = space.dist**p
    fv = f.values
    size = geo.size
    lhs_raw = 0.0
    for perm in geo.l_perms:
        lhs_raw += float(Dp[fv, fv[perm]].sum())
    lhs_direct = lhs_raw / size
    rhs_raw = 0.0
    for offset, perm in zip(geo.r_offsets, geo.r_perms):
        if not any(offset):
            continue
        rhs_raw += float(Dp[fv, fv[perm]].sum())
    rhs_direct = rhs_raw / (size * 3**f.n)
    if f.m < 4:
        return lhs_direct, None, rhs_direct, None
    ranks = np.arange(size)
    lhs_edges = 0.0
    for perm in geo.l_perms:
        sel = ranks < perm
        lhs_edges += float(Dp[fv[sel], fv[perm[sel]]].sum())
    lhs_edge = 2.0 * lhs_edges / size
    rhs_edges = 0.0
    for offset, perm in zip(geo.r_offsets, geo.r_perms):
        if not any(offset):
            continue
        sel = ranks < perm
        rhs_edges += float(Dp[fv[sel], fv[perm[sel]]].sum())
    rhs_edge = 2.0 * rhs_edges / (size * 3**f.n)
    return lhs_direct, lhs_edge, rhs_direct, rhs_edge


def _agree(a: float, b: float) -> bool:
    return abs(a - b) <= IDENTITY_RTOL * max(abs(a), abs(b), 1e-300) or a == b


def _implied_gamma(lhs: float, rhs: float, p: float, q: float, n: int, m: int) -> float:
    if rhs <= 0.0:
        if lhs > 0.0:
            raise IdentityMismatch("unit-offset moments vanish but half-shift moments do not")
        return 0.0
    factor = float(m) ** p * float(n) ** (1.0 - p / q)
    return (lhs / (factor * rhs)) ** (1.0 / p)


def evaluate_cotype(
    space: FiniteMetricSpace, f: TorusFunction, p: float, q: float
) -> CotypeEvaluation:
    """Both sides of the inequality for one f, plus its implied constant.

    For m >= 4 the direct and edge-sum computations of each side must
    agree to 1e-12 relative or IdentityMismatch is raised.
    """
    params = CotypeParams(p, q, f.n, f.m)
    lhs, lhs_edge, rhs, rhs_edge = edge_sum_components(space, f, p)
    if lhs_edge is not None and not _agree(lhs, lhs_edge):
        raise IdentityMismatch(f"half-shift sums disagree: {lhs!r} vs {lhs_edge!r}")
    if rhs_edge is not None and not _agree(rhs, rhs_edge):
        raise IdentityMismatch(f"unit-offset sums disagree: {rhs!r} vs {rhs_edge!r}")
    return CotypeEvaluation(lhs, rhs, _implied_gamma(lhs, rhs, p, q, f.n, f.m), params)


@dataclass(frozen=True)
class GammaSearchResult:
    strategy: str
    best_f: TorusFunction
    best_gamma: float
    best_eval: CotypeEvaluation
    evaluations: int


class _SearchContext:
    """Raw ordered pair lists and incremental sums for the search loops."""

    def __init__(self, space: FiniteMetricSpace, p: float, q: float, n: int, m: int):
        self.geo = torus_geometry(n, m)
        self.k = len(space)
        self.p = p
        self.q = q
        self.n = n
        self.m = m
        self.size = self.geo.size
        self.Dp = (space.dist**p).tolist()
        self.l_partners = [
            [int(perm[r]) for perm in self.geo.l_perms] for r in range(self.size)
        ]
        self.r_partners = [
            [
                int(perm[r])
                for offset, perm in zip(self.geo.r_offsets, self.geo.r_perms)
                if any(offset)
            ]
            for r in range(self.size)
        ]
        self.gamma_factor = float(m) ** p * float(n) ** (1.0 - p / q)

    def raw_sums(self, values) -> tuple[float, float]:
        Dp = self.Dp
        lhs = 0.0
        rhs = 0.0
        for r in range(self.size):
            v = values[r]
            row = Dp[v]
            for w in self.l_partners[r]:
                lhs += row[values[w]]
            for w in self.r_partners[r]:
                rhs += row[values[w]]
        return lhs, rhs

    def gamma_from_raw(self, lhs_raw: float, rhs_raw: float) -> float:
        if rhs_raw <= 0.0:
            return 0.0
        lhs = lhs_raw / self.size
        rhs = rhs_raw / (self.size * 3**self.n)
        return (lhs / (self.gamma_factor * rhs)) ** (1.0 / self.p)

    def delta(self, values, cell: int, new: int) -> tuple[float, float]:
        """Change of the raw ordered sums when values[cell] becomes new.

        Every ordered term involving the cell pairs it with an unchanged
        partner, and partner relations are symmetric, hence the factor 2.
        """
        Dp = self.Dp
        old = values[cell]
        row_new = Dp[new]
        row_old = Dp[old]
        dl = 0.0
        for w in self.l_partners[cell]:
            vw = values[w]
            dl += row_new[vw] - row_old[vw]
        dr = 0.0
        for w in self.r_partners[cell]:
            vw = values[w]
            dr += row_new[vw] - row_old[vw]
        return 2.0 * dl, 2.0 * dr


def _stream_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng([seed, index])


def gamma_search(
    space: FiniteMetricSpace,
    p: float,
    q: float,
    n: int,
    m: int,
    strategy: str = "random",
    budget: int | None = None,
    seed: int | None = None,
) -> GammaSearchResult:
    """Search for the function maximizing the implied constant.

    exhaustive enumerates all |X|^(m^n) functions (gated at 10^6); random
    draws seeded uniform functions; local runs random restarts with greedy
    first-improvement single-cell moves (scan order: cell rank, then point
    index; rescan from the start after each accepted move) until fixpoint
    or budget. The budget counts candidate evaluations; results are
    deterministic given (seed, budget).
    """
    CotypeParams(p, q, n, m)
    ctx = _SearchContext(space, p, q, n, m)
    k = ctx.k

    best_gamma = -1.0
    best_values: list[int] | None = None
    evaluations = 0

    def consider(values, gamma: float) -> None:
        nonlocal best_gamma, best_values
        if gamma > best_gamma:
            best_gamma = gamma
            best_values = list(values)

    if strategy == "exhaustive":
        total = k**ctx.size
        if total > EXHAUSTIVE_LIMIT:
            raise TooLargeForExhaustive(
                f"|X|^(m^n) = {total} exceeds the exhaustive limit {EXHAUSTIVE_LIMIT}"
            )
        for values in product(range(k), repeat=ctx.size):
            lr, rr = ctx.raw_sums(values)
            evaluations += 1
            consider(values, ctx.gamma_from_raw(lr, rr))
    elif strategy == "random":
        if seed is None or seed < 0:
            raise BadParameter("random strategy requires a nonnegative seed")
        if budget is None or budget < 1:
            raise BudgetTooSmall("random strategy needs a budget >= 1")
        for i in range(budget):
            values = _stream_rng(seed, i).integers(0, k, ctx.size).tolist()
            lr, rr = ctx.raw_sums(values)
            evaluations += 1
            consider(values, ctx.gamma_from_raw(lr, rr))
    elif strategy == "local":
        if seed is None or seed < 0:
            raise BadParameter("local strategy requires a nonnegative seed")
        if budget is None or budget < 1:
            raise BudgetTooSmall("local strategy needs a budget >= 1")
        restart = 0
        while evaluations < budget:
            values = _stream_rng(seed, restart).integers(0, k, ctx.size).tolist()
            restart += 1
            lhs_raw, rhs_raw = ctx.raw_sums(values)
            evaluations += 1
            current = ctx.gamma_from_raw(lhs_raw, rhs_raw)
            consider(values, current)
            improved = True
            while improved and evaluations < budget:
                improved = False
                for cell in range(ctx.size):
                    old = values[cell]
                    for point in range(k):
                        if point == old:
                            continue
                        dl, dr = ctx.delta(values, cell, point)
                        evaluations += 1
                        gamma = ctx.gamma_from_raw(lhs_raw + dl, rhs_raw + dr)
                        if gamma > best_gamma:
                            best_gamma = gamma
                            candidate = list(values)
                            candidate[cell] = point
                            best_values = candidate
                        if gamma > current:
                            values[cell] = point
                            lhs_raw += dl
                            rhs_raw += dr
                            current = gamma
                            improved = True
                            break
                        if evaluations >= budget:
                            break
                    if improved or evaluations >= budget:
                        break
    else:
        raise BadParameter(f"unknown strategy {strategy!r}")

    assert best_values is not None
    best_f = TorusFunction(n, m, np.array(best_values, dtype=np.int64))
    best_eval = evaluate_cotype(space, best_f, p, q)
    return GammaSearchResult(strategy, best_f, best_eval.implied_gamma, best_eval, evaluations)


def sts_certificate(
    space: FiniteMetricSpace, f: TorusFunction, q: float, C: float | None = None
) -> Certificate:
    """Per-level certificate of the inequality for one f at p = q.

    Builds a separated tree on the image of f, walks the spine of largest
    preimages (relabeling each split so the spur child's preimage covers
    at most half the torus), and emits per level: preimage size, image
    diameter, R-boundary of the spur preimage, and the two level bounds.
    The level counting inequality m^q 3^-n |boundary| >= 2 n |preimage|
    holds at every level whenever m is at or above the scaling threshold;
    below it the certificate is still computed but flagged.
    """
    if q <= 1.0:
        raise OutOfRange("the certificate requires q > 1")
    _check_values(space, f)
    geo = torus_geometry(f.n, f.m)
    fv = f.values
    image = sorted(set(int(v) for v in fv))
    sub = space.subspace(image)
    if C is None:
        if len(sub) < 2:
            C = 1.0
        elif len(sub) <= 15:
            C = separation_constant(sub, "exact").c_sep
        else:
            C = separation_constant(sub, "dendrogram").c_sep
    C = float(C)
    while True:
        try:
            tree = build_tree_structure(sub, C)
            break
        except NoValidSplit as err:  # dendrogram C is only a lower bound
            C = err.required_ratio
    try:
        m_required = mn_scaling_function(q, f.n)
        scaling_ok = f.m >= m_required
    except Overflow:
        m_required = None
        scaling_ok = False

    yv = np.searchsorted(np.array(image, dtype=np.int64), fv)
    size = geo.size
    nn, mm = f.n, f.m
    mq = float(mm) ** q
    three_n = 3.0**nn
    rows: list[CertificateRow] = []
    sum_lhs = 0.0
    sum_rhs = 0.0
    node = tree.root
    level = 0
    while node.children is not None and len(node.points) > 1:
        c0, c1 = node.children
        in0 = np.isin(yv, c0.points)
        if int(in0.sum()) > size // 2:
            c0, c1 = c1, c0
            in0 = np.isin(yv, c0.points)
        block = int(in0.sum())
        subset = TorusSubset.from_indices(nn, mm, np.nonzero(in0)[0])
        boundary = edge_boundary(subset, "R")
        level_diam = sub.diam(node.points)
        lhs_level = 2.0 * nn * block * level_diam**q / size
        rhs_level = (mq / three_n) * boundary * level_diam**q / size
        counting_ok = _geq((mq / three_n) * boundary, 2.0 * nn * block)
        rows.append(
            CertificateRow(level, block, level_diam, boundary, lhs_level, rhs_level, counting_ok)
        )
        sum_lhs += lhs_level
        sum_rhs += rhs_level
        node = c1
        level += 1

    evaluation = evaluate_cotype(space, f, q, q)
    bound = (C**q) * mq * evaluation.rhs
    return Certificate(
        q=q,
        n=nn,
        m=mm,
        C=C,
        rows=tuple(rows),
        lhs=evaluation.lhs,
        rhs=evaluation.rhs,
        bound=bound,
        m_required=m_required,
        scaling_ok=scaling_ok,
        counting_all_ok=all(r.counting_ok for r in rows),
        lhs_est_ok=_geq(sum_lhs, evaluation.lhs),
        rhs_est_ok=_geq(bound, sum_rhs),
        overall_ok=_geq(bound, evaluation.lhs),
    )


def certificate_to_csv(cert: Certificate) -> str:
    lines = ["level,block_size,level_diam,boundary,lhs_level,rhs_level,counting_ok"]
    for row in cert.rows:
        lines.append(
            f"{row.level},{row.block_size},{row.level_diam!r},{row.boundary},"
            f"{row.lhs_level!r},{row.rhs_level!r},{'pass' if row.counting_ok else 'FAIL'}"
        )
    return "\n".join(lines) + "\n"


def certificate_table(cert: Certificate) -> str:
    head = (
        f"certificate: q={cert.q} n={cert.n} m={cert.m} C={cert.C!r} "
        f"(scaling {'ok' if cert.scaling_ok else 'BELOW THRESHOLD'}, "
        f"required m >= {cert.m_required})"
    )
    cols = f"{'lvl':>3} {'|F0|':>8} {'diam':>12} {'|bdry|':>8} {'lhs_lvl':>12} {'rhs_lvl':>12} ok"
    body = [
        f"{r.level:>3} {r.block_size:>8} {r.level_diam:>12.6g} {r.boundary:>8} "
        f"{r.lhs_level:>12.6g} {r.rhs_level:>12.6g} {'y' if r.counting_ok else 'N'}"
        for r in cert.rows
    ]
    tail = (
        f"lhs={cert.lhs!r} rhs={cert.rhs!r} bound=C^q m^q rhs={cert.bound!r} "
        f"overall {'PASS' if cert.overall_ok else 'FAIL'}"
    )
    return "\n".join([head, cols, *body, tail]) + "\n"


# --- file format ----------------------------------------------------------


def function_to_json_obj(f: TorusFunction) -> dict:
    return {"n": f.n, "m": f.m, "values": [int(v) for v in f.values]}


def function_to_json(f: TorusFunction) -> str:
    return json.dumps(function_to_json_obj(f), sort_keys=True) + "\n"


def function_from_json_obj(obj) -> TorusFunction:
    if not isinstance(obj, dict) or not {"n", "m", "values"} <= set(obj):
        raise BadParameter('function JSON must be {"n":..., "m":..., "values":[...]}')
    return TorusFunction(int(obj["n"]), int(obj["m"]), np.array(obj["values"], dtype=np.int64))


def function_from_json(text: str) -> TorusFunction:
    return function_from_json_obj(json.loads(text))


def load_function(path) -> TorusFunction:
    return function_from_json(Path(path).read_text())


def save_function(f: TorusFunction, path) -> None:
    Path(path).write_text(function_to_json(f))
