"""Seeded generators for standard example spaces."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import BadParameter
from .spaces import FiniteMetricSpace, validate_metric

KINDS = (
    "cantor-level",
    "dyadic",
    "cycle",
    "hypercube",
    "random-ultrametric",
    "random-euclidean",
)

# (positional parameter names, ranges) per kind
_PARAMS: dict[str, list[tuple[str, int, int]]] = {
    "cantor-level": [("k", 0, 8)],
    "dyadic": [("k", 0, 48)],
    "cycle": [("m", 1, 512)],
    "hypercube": [("n", 1, 8)],
    "random-ultrametric": [("k", 1, 512)],
    "random-euclidean": [("k", 1, 512), ("dim", 1, 64)],
}

_NEEDS_SEED = {"random-ultrametric", "random-euclidean"}


@dataclass(frozen=True)
class GeneratorSpec:
    """A generator kind with its integer parameters and optional seed.

    The same (spec, seed) always produces an identical space.
    """

    kind: str
    params: tuple[tuple[str, int], ...] = field(default=())
    seed: int | None = None

    def param(self, name: str) -> int:
        for key, value in self.params:
            if key == name:
                return value
        raise BadParameter(f"generator {self.kind!r} is missing parameter {name!r}")


def parse_generator_spec(text: str) -> GeneratorSpec:
    """Parse CLI syntax like ``random-ultrametric=8,seed=7``.

    Positional integers fill the kind's parameter list in order;
    ``key=value`` tokens (currently only ``seed``/``dim``) may follow.
    """
    head, sep, rest = text.partition("=")
    kind = head.strip()
    if kind not in _PARAMS:
        raise BadParameter(f"unknown generator kind {kind!r}; choose from {KINDS}")
    names = [name for name, _, _ in _PARAMS[kind]]
    positional: list[int] = []
    keyed: dict[str, int] = {}
    if sep:
        for token in rest.split(","):
            token = token.strip()
            if not token:
                continue
            if "=" in token:
                key, _, value = token.partition("=")
                key = key.strip()
                if key != "seed" and key not in names:
                    raise BadParameter(f"unknown parameter {key!r} for {kind!r}")
                try:
                    keyed[key] = int(value)
                except ValueError:
                    raise BadParameter(f"parameter {key!r} must be an integer") from None
            else:
                try:
                    positional.append(int(token))
                except ValueError:
                    raise BadParameter(f"bad generator token {token!r}") from None
    if len(positional) > len(names):
        raise BadParameter(f"{kind!r} takes at most {len(names)} positional parameters")
    params: dict[str, int] = dict(zip(names, positional))
    seed = keyed.pop("seed", None)
    for key, value in keyed.items():
        if key in params:
            raise BadParameter(f"parameter {key!r} given twice")
        params[key] = value
    missing = [n for n in names if n not in params]
    if missing:
        raise BadParameter(f"{kind!r} is missing parameters {missing}")
    return GeneratorSpec(kind, tuple((n, params[n]) for n in names), seed)


def _check_ranges(spec: GeneratorSpec) -> None:
    for name, lo, hi in _PARAMS[spec.kind]:
        value = spec.param(name)
        if not (lo <= value <= hi):
            raise BadParameter(
                f"{spec.kind} parameter {name}={value} outside [{lo}, {hi}]"
            )
    if spec.kind in _NEEDS_SEED:
        if spec.seed is None:
            raise BadParameter(f"{spec.kind} requires a seed")
        if spec.seed < 0:
            raise BadParameter("seed must be nonnegative")


def generate(spec: GeneratorSpec) -> FiniteMetricSpace:
    """Build the space described by ``spec``; always revalidated."""
    if spec.kind not in _PARAMS:
        raise BadParameter(f"unknown generator kind {spec.kind!r}")
    _check_ranges(spec)
    if spec.kind == "cantor-level":
        return _cantor_level(spec.param("k"))
    if spec.kind == "dyadic":
        return _dyadic(spec.param("k"))
    if spec.kind == "cycle":
        return _cycle(spec.param("m"))
    if spec.kind == "hypercube":
        return _hypercube(spec.param("n"))
    if spec.kind == "random-ultrametric":
        return _random_ultrametric(spec.param("k"), spec.seed)
    return _random_euclidean(spec.param("k"), spec.param("dim"), spec.seed)


def _cantor_level(k: int) -> FiniteMetricSpace:
    """Left endpoints of the 2^k level-k middle-thirds intervals."""
    denom = 3**k
    nums = [0]
    for i in range(1, k + 1):
        step = 2 * 3 ** (k - i)
        nums = [n for base in nums for n in (base, base + step)]
    nums.sort()
    pts = np.array(nums, dtype=float) / denom
    matrix = np.abs(pts[:, None] - pts[None, :])
    labels = [f"{n}/{denom}" for n in nums]
    return validate_metric(matrix, labels)


def _dyadic(k: int) -> FiniteMetricSpace:
    pts = np.array([2.0**-i for i in range(k + 1)])
    matrix = np.abs(pts[:, None] - pts[None, :])
    labels = [f"2^-{i}" for i in range(k + 1)]
    return validate_metric(matrix, labels, tolerance=0.0)


def _cycle(m: int) -> FiniteMetricSpace:
    idx = np.arange(m)
    gaps = np.abs(idx[:, None] - idx[None, :])
    matrix = np.minimum(gaps, m - gaps).astype(float)
    return validate_metric(matrix, [str(i) for i in range(m)], tolerance=0.0)


def _hypercube(n: int) -> FiniteMetricSpace:
    size = 1 << n
    codes = np.arange(size)
    xor = codes[:, None] ^ codes[None, :]
    matrix = np.zeros((size, size))
    for bit in range(n):
        matrix += (xor >> bit) & 1
    labels = [format(c, f"0{n}b") for c in codes]
    return validate_metric(matrix, labels, tolerance=0.0)


def _random_ultrametric(k: int, seed: int) -> FiniteMetricSpace:
    """Distances from a random binary dendrogram with strictly decreasing
    merge heights; exactly ultrametric, so the space carries tolerance 0."""
    rng = np.random.default_rng(seed)
    matrix = np.zeros((k, k))

    def split(indices: list[int], height: float) -> None:
        if len(indices) <= 1:
            return
        order = [indices[i] for i in rng.permutation(len(indices))]
        cut = int(rng.integers(1, len(indices)))
        left, right = sorted(order[:cut]), sorted(order[cut:])
        for a in left:
            for b in right:
                matrix[a, b] = matrix[b, a] = height
        split(left, height * float(rng.uniform(0.25, 0.8)))
        split(right, height * float(rng.uniform(0.25, 0.8)))

    split(list(range(k)), 1.0)
    return validate_metric(matrix, [f"p{i}" for i in range(k)], tolerance=0.0)


def _random_euclidean(k: int, dim: int, seed: int) -> FiniteMetricSpace:
    rng = np.random.default_rng(seed)
    pts = rng.random((k, dim))
    deltas = pts[:, None, :] - pts[None, :, :]
    matrix = np.sqrt((deltas**2).sum(axis=-1))
    np.fill_diagonal(matrix, 0.0)
    return validate_metric(matrix, [f"p{i}" for i in range(k)])
