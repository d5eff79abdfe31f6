from __future__ import annotations

import numpy as np
import pytest

from cotypelab import FiniteMetricSpace, GeneratorSpec, generate, validate_metric


def path_space(*positions: float) -> FiniteMetricSpace:
    pts = np.asarray(positions, dtype=float)
    return validate_metric(np.abs(pts[:, None] - pts[None, :]))


def random_corpus_space(seed: int, max_points: int = 10) -> FiniteMetricSpace:
    """Deterministic mixed corpus: euclidean clouds, uniform(1,2) matrices,
    and dendrogram ultrametrics, sizes cycling over 2..max_points."""
    k = 2 + seed % (max_points - 1)
    kind = seed % 3
    if kind == 0:
        return generate(
            GeneratorSpec("random-euclidean", (("k", k), ("dim", 2 + seed % 3)), seed=seed)
        )
    if kind == 1:
        rng = np.random.default_rng([seed, 113])
        matrix = rng.uniform(1.0, 2.0, (k, k))
        matrix = np.triu(matrix, 1)
        matrix = matrix + matrix.T
        return validate_metric(matrix)
    return generate(GeneratorSpec("random-ultrametric", (("k", k),), seed=seed))


@pytest.fixture
def path4() -> FiniteMetricSpace:
    return path_space(0.0, 1.0, 2.0, 3.0)
