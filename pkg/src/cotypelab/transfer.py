"""Embedding-class checkers and numeric cotype transfer verification.

A point map phi: Y -> X is certified against one of four classes by
fitting the infimal constants over all pairs (triples for linear
quasisymmetry): scaled bi-Lipschitz, scaled snowflaking, linear
quasisymmetric, or additive rough isometry. The transfer side computes
the constants a cotype inequality on one space implies on the other, and
verifies them on seeded samples.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .cotype import CotypeParams, TorusFunction, evaluate_cotype, _stream_rng
from .errors import (
    BadParameter,
    DimensionMismatch,
    EmptySource,
    NotDense,
    OutOfRange,
)
from .spaces import FiniteMetricSpace, space_from_json_obj, space_to_json_obj

MAP_KINDS = ("bilip", "snowflake", "linear_qs", "rough_isometry")

_CHECK_RTOL = 1e-9


@dataclass(frozen=True)
class PointMap:
    source: FiniteMetricSpace
    target: FiniteMetricSpace
    assignment: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "assignment", tuple(int(i) for i in self.assignment))
        if len(self.assignment) != len(self.source):
            raise DimensionMismatch(
                f"assignment has {len(self.assignment)} entries for "
                f"{len(self.source)} source points"
            )
        if any(not (0 <= i < len(self.target)) for i in self.assignment):
            raise OutOfRange("assignment references invalid target indices")


@dataclass(frozen=True)
class MapReport:
    kind: str
    best: dict
    declared: dict
    passed: bool | None  # None when nothing was declared
    witness: dict


@dataclass(frozen=True)
class RoughInverseReport:
    max_displacement: float
    displacements: tuple[float, ...]


@dataclass(frozen=True)
class TransferVerifyReport:
    kind: str
    samples: int
    constants: dict
    base_max_violation: float  # known-side inequality, relative excess
    transferred_max_violation: float
    all_hold: bool
    tolerance: float


def _leq(a: float, b: float) -> bool:
    return a <= b + _CHECK_RTOL * max(abs(a), abs(b))


def check_map(
    pmap: PointMap, kind: str, declared: dict | None = None, *, alpha: float | None = None
) -> MapReport:
    """Fit the infimal class constants of the map and judge declared ones.

    For bilip/snowflake the fitted constants minimize L over the free
    scale c (with declared c they are fitted at that scale); a collapsed
    pair under an injectivity-requiring kind yields infinite constants
    with the pair as witness rather than an error.
    """
    if kind not in MAP_KINDS:
        raise BadParameter(f"unknown map kind {kind!r}")
    declared = dict(declared or {})
    Y, X, assign = pmap.source, pmap.target, pmap.assignment
    ky = len(Y)
    if ky == 0:
        raise EmptySource("check_map requires a non-empty source")

    if kind == "rough_isometry":
        best_c = 0.0
        witness_pair = None
        for i in range(ky):
            for j in range(i + 1, ky):
                gap = abs(Y.d(i, j) - X.d(assign[i], assign[j]))
                if gap > best_c:
                    best_c = gap
                    witness_pair = (i, j)
        best = {"c": best_c}
        passed = None
        if "c" in declared:
            passed = _leq(best_c, float(declared["c"]))
        return MapReport(kind, best, declared, passed, {"pair": witness_pair})

    if kind == "linear_qs":
        if ky < 3:
            best = {"K": 1.0}
            return MapReport(kind, best, declared, _leq(1.0, float(declared["K"])) if "K" in declared else None, {})
        best_k = 0.0
        witness = None
        for x in range(ky):
            for y in range(ky):
                for z in range(ky):
                    if x == y or x == z or y == z:
                        continue
                    denom = X.d(assign[x], assign[z])
                    num = X.d(assign[x], assign[y])
                    if denom == 0.0:
                        if num > 0.0:
                            return MapReport(
                                kind,
                                {"K": math.inf},
                                declared,
                                False if declared else None,
                                {"triple": (x, y, z), "collapsed_pair": (x, z)},
                            )
                        continue
                    ratio = (num / denom) / (Y.d(x, y) / Y.d(x, z))
                    if ratio > best_k:
                        best_k = ratio
                        witness = (x, y, z)
        best = {"K": best_k}
        passed = None
        if "K" in declared:
            passed = _leq(best_k, float(declared["K"]))
        return MapReport(kind, best, declared, passed, {"triple": witness})

    # bilip / snowflake: two-sided ratio fit
    if kind == "snowflake":
        if alpha is None:
            alpha = declared.get("alpha")
        if alpha is None or alpha <= 0:
            raise OutOfRange("snowflake check requires alpha > 0")
        alpha = float(alpha)
        declared.setdefault("alpha", alpha)
    else:
        alpha = 1.0

    rmax = 0.0
    rmin = math.inf
    max_pair = None
    min_pair = None
    for i in range(ky):
        for j in range(i + 1, ky):
            denom = Y.d(i, j) ** alpha
            ratio = X.d(assign[i], assign[j]) / denom
            if ratio > rmax:
                rmax = ratio
                max_pair = (i, j)
            if ratio < rmin:
                rmin = ratio
                min_pair = (i, j)
    if ky == 1:
        best = {"L": 1.0, "c": 1.0}
        witness: dict = {}
    elif rmin == 0.0:
        best = {"L": math.inf, "c": None}
        witness = {"collapsed_pair": min_pair}
    else:
        best = {"L": math.sqrt(rmax / rmin), "c": 1.0 / math.sqrt(rmax * rmin)}
        witness = {"max_ratio_pair": max_pair, "min_ratio_pair": min_pair}
    if kind == "snowflake":
        best["alpha"] = alpha

    passed = None
    if "L" in declared:
        L = float(declared["L"])
        if L < 1.0:
            raise OutOfRange("declared L must be >= 1")
        if "c" in declared:
            c = float(declared["c"])
            if c <= 0:
                raise OutOfRange("declared c must be positive")
            passed = best["L"] != math.inf and _leq(rmax, L / c) and _leq(1.0 / (L * c), rmin)
        else:
            passed = best["L"] != math.inf and _leq(best["L"], L)
    return MapReport(kind, best, declared, passed, witness)


def rough_inverse(pmap: PointMap, c: float) -> tuple[PointMap, RoughInverseReport]:
    """Assign each target point a source point whose image is within c.

    Requires the image to be c-dense in the target; picks the nearest
    image point, ties broken by lowest source index.
    """
    if c < 0:
        raise OutOfRange("c must be nonnegative")
    Y, X, assign = pmap.source, pmap.target, pmap.assignment
    if len(Y) == 0:
        raise EmptySource("rough_inverse requires a non-empty source")
    inverse = []
    displacements = []
    for t in range(len(X)):
        best_gap = math.inf
        best_s = -1
        for s in range(len(Y)):
            gap = X.d(assign[s], t)
            if gap < best_gap:
                best_gap = gap
                best_s = s
        if best_gap > c:
            raise NotDense(t, best_gap, c)
        inverse.append(best_s)
        displacements.append(best_gap)
    return (
        PointMap(X, Y, tuple(inverse)),
        RoughInverseReport(max(displacements), tuple(displacements)),
    )


def transfer_constants(kind: str, **params) -> dict:
    """Constants a cotype inequality transfers with, per mapping class.

    bilip(L, gamma) -> gamma' = L^2 gamma; snowflake(alpha, L, gamma, K, p)
    -> exponent p' = alpha p and constant L^(2p/p') gamma^((p+p')/p')
    K^(p/p'); qs_chain(L) -> linear modulus slope L^2 and separation
    constant 2 L^2; fsp_qs(K, C) -> separation constant 2 K C; gh(gamma,
    p, q, n, m, c) -> multiplicative 4 gamma plus the additive slack
    (6c)^p (n + 2^p gamma^p m^p n^(1-p/q)).
    """

    def need(*names):
        missing = [x for x in names if params.get(x) is None]
        if missing:
            raise BadParameter(f"transfer_constants({kind!r}) missing {missing}")
        return [float(params[x]) for x in names]

    if kind == "bilip":
        L, gamma = need("L", "gamma")
        if L < 1 or gamma < 1:
            raise OutOfRange("need L >= 1 and gamma >= 1")
        return {"gamma": L * L * gamma}
    if kind == "snowflake":
        alpha, L, gamma, K, p = need("alpha", "L", "gamma", "K", "p")
        if alpha <= 0 or L < 1 or gamma < 1 or K < 1 or p < 1:
            raise OutOfRange("need alpha > 0, L >= 1, gamma >= 1, K >= 1, p >= 1")
        p_prime = alpha * p
        if p_prime < 1.0:
            raise OutOfRange(f"transferred exponent alpha*p = {p_prime} must be >= 1")
        constant = (
            L ** (2.0 * p / p_prime)
            * gamma ** ((p + p_prime) / p_prime)
            * K ** (p / p_prime)
        )
        return {"p_prime": p_prime, "gamma": constant}
    if kind == "qs_chain":
        (L,) = need("L")
        if L < 1:
            raise OutOfRange("need L >= 1")
        return {"eta_at_1": L * L, "C": 2.0 * L * L}
    if kind == "fsp_qs":
        K, C = need("K", "C")
        if K <= 0 or C < 1:
            raise OutOfRange("need K > 0 and C >= 1")
        return {"C": 2.0 * K * C}
    if kind == "gh":
        gamma, p, q, c = need("gamma", "p", "q", "c")
        n = int(params.get("n") or 0)
        m = int(params.get("m") or 0)
        if gamma < 1 or not (1 <= p <= q) or c < 0 or n < 1 or m < 2:
            raise OutOfRange("need gamma >= 1, 1 <= p <= q, c >= 0, n >= 1, m >= 2")
        slack = (6.0 * c) ** p * (
            n + 2.0**p * gamma**p * float(m) ** p * float(n) ** (1.0 - p / q)
        )
        return {"gamma": 4.0 * gamma, "slack": slack}
    raise BadParameter(f"unknown transfer kind {kind!r}")


def _relative_excess(lhs: float, bound: float) -> float:
    scale = max(abs(lhs), abs(bound), 1e-300)
    return (lhs - bound) / scale


def _inequality_violation(ev, gamma: float, slack: float = 0.0) -> float:
    p, q, n, m = ev.params.p, ev.params.q, ev.params.n, ev.params.m
    bound = gamma**p * float(m) ** p * float(n) ** (1.0 - p / q) * ev.rhs + slack
    return _relative_excess(ev.lhs, bound)


def empirical_transfer_verify(
    Y: FiniteMetricSpace,
    X: FiniteMetricSpace,
    pmap: PointMap,
    params: CotypeParams,
    kind: str,
    samples: int,
    seed: int,
    *,
    alpha: float | None = None,
    tolerance: float = _CHECK_RTOL,
) -> TransferVerifyReport:
    """Verify the transferred inequality on seeded random functions on Y.

    X is the space whose inequality constant params.gamma is trusted; for
    bilip/snowflake the map embeds Y into X, for rough_isometry it maps X
    onto a c-dense subset of Y and functions are pulled back through the
    rough inverse. Each sample checks both the known-side inequality on X
    and the transferred inequality on Y; the report carries the largest
    relative excess of each (expected <= 0 up to the tolerance).
    """
    if kind not in ("bilip", "snowflake", "rough_isometry"):
        raise BadParameter(f"no transfer harness for kind {kind!r}")
    if params.gamma is None:
        raise OutOfRange("params.gamma (the trusted constant on X) is required")
    if samples < 1:
        raise BadParameter("samples must be >= 1")
    if seed < 0:
        raise BadParameter("seed must be nonnegative")
    gamma = float(params.gamma)
    p, q, n, m = params.p, params.q, params.n, params.m
    size = m**n

    if kind == "rough_isometry":
        if len(pmap.source) != len(X) or len(pmap.target) != len(Y):
            raise DimensionMismatch("rough transfer expects a map from X onto Y")
        report = check_map(pmap, "rough_isometry")
        c_fit = report.best["c"]
        density = max(
            min(pmap.target.d(pmap.assignment[s], t) for s in range(len(pmap.source)))
            for t in range(len(pmap.target))
        )
        c_eff = max(c_fit, density)
        inverse, _ = rough_inverse(pmap, c_eff)
        constants = transfer_constants("gh", gamma=gamma, p=p, q=q, n=n, m=m, c=c_eff)
        inv_assign = np.array(inverse.assignment, dtype=np.int64)
        base_max = -math.inf
        trans_max = -math.inf
        for i in range(samples):
            fy = TorusFunction(n, m, _stream_rng(seed, i).integers(0, len(Y), size))
            fx = TorusFunction(n, m, inv_assign[fy.values])
            ev_x = evaluate_cotype(X, fx, p, q)
            ev_y = evaluate_cotype(Y, fy, p, q)
            base_max = max(base_max, _inequality_violation(ev_x, gamma))
            trans_max = max(
                trans_max,
                _inequality_violation(ev_y, constants["gamma"], constants["slack"]),
            )
        constants = {**constants, "c": c_eff}
    else:
        if len(pmap.source) != len(Y) or len(pmap.target) != len(X):
            raise DimensionMismatch("embedding transfer expects a map from Y into X")
        report = check_map(pmap, kind, alpha=alpha)
        L = report.best["L"]
        if not math.isfinite(L):
            raise OutOfRange("map collapses a pair; no finite transfer constant exists")
        if kind == "bilip":
            constants = transfer_constants("bilip", L=max(L, 1.0), gamma=gamma)
            p_prime = p
        else:
            a = report.best["alpha"]
            K = max(1.0, m / float(n) ** (1.0 / q))
            constants = transfer_constants(
                "snowflake", alpha=a, L=max(L, 1.0), gamma=gamma, K=K, p=p
            )
            constants = {**constants, "K": K}
            p_prime = constants["p_prime"]
        push = np.array(pmap.assignment, dtype=np.int64)
        base_max = -math.inf
        trans_max = -math.inf
        for i in range(samples):
            fy = TorusFunction(n, m, _stream_rng(seed, i).integers(0, len(Y), size))
            fx = TorusFunction(n, m, push[fy.values])
            ev_x = evaluate_cotype(X, fx, p, q)
            ev_y = evaluate_cotype(Y, fy, p_prime, q)
            base_max = max(base_max, _inequality_violation(ev_x, gamma))
            trans_max = max(trans_max, _inequality_violation(ev_y, constants["gamma"]))
        constants = {**constants, "L": L}

    return TransferVerifyReport(
        kind=kind,
        samples=samples,
        constants=constants,
        base_max_violation=base_max,
        transferred_max_violation=trans_max,
        all_hold=base_max <= tolerance and trans_max <= tolerance,
        tolerance=tolerance,
    )


# --- file format ----------------------------------------------------------


def map_to_json_obj(pmap: PointMap) -> dict:
    return {
        "source": space_to_json_obj(pmap.source),
        "target": space_to_json_obj(pmap.target),
        "assignment": list(pmap.assignment),
    }


def map_to_json(pmap: PointMap) -> str:
    return json.dumps(map_to_json_obj(pmap), sort_keys=True, indent=2) + "\n"


def map_from_json_obj(obj, tolerance: float = 1e-9) -> PointMap:
    if not isinstance(obj, dict) or not {"source", "target", "assignment"} <= set(obj):
        raise BadParameter('map JSON must be {"source":..., "target":..., "assignment":[...]}')
    return PointMap(
        space_from_json_obj(obj["source"], tolerance),
        space_from_json_obj(obj["target"], tolerance),
        tuple(obj["assignment"]),
    )


def map_from_json(text: str, tolerance: float = 1e-9) -> PointMap:
    return map_from_json_obj(json.loads(text), tolerance)


def load_map(path, tolerance: float = 1e-9) -> PointMap:
    return map_from_json(Path(path).read_text(), tolerance)


def save_map(pmap: PointMap, path) -> None:
    Path(path).write_text(map_to_json(pmap))
