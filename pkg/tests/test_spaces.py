from __future__ import annotations

import math

import numpy as np
import pytest

import oracles
from conftest import path_space, random_corpus_space
from cotypelab import (
    BadParameter,
    MetricValidationError,
    TooSmall,
    check_ultrametric,
    find_chain,
    ls_metric_exponent,
    metric_violations,
    snowflake_transform,
    space_from_csv,
    space_from_json,
    space_to_csv,
    space_to_json,
    subdominant_ultrametric,
    validate_metric,
)
from cotypelab.spaces import threshold_components


class TestValidateMetric:
    def test_single_point(self):
        space = validate_metric([[0.0]])
        assert len(space) == 1

    def test_line_points_valid(self):
        # {0, 1, 3}: all three triangles hold (2 <= 1+3, 3 <= 1+2, 1 <= 2+3)
        space = path_space(0.0, 1.0, 3.0)
        assert space.d(0, 2) == 3.0

    def test_asymmetric_entry(self):
        with pytest.raises(MetricValidationError) as err:
            validate_metric([[0, 1], [2, 0]])
        kinds = {v.kind for v in err.value.violations}
        assert kinds == {"AsymmetricEntry"}
        assert err.value.violations[0].where == (0, 1)

    def test_non_square(self):
        with pytest.raises(MetricValidationError) as err:
            validate_metric([[0, 1, 2], [1, 0, 1]])
        assert err.value.violations[0].kind == "NonSquare"

    def test_triangle_violation_witness(self):
        with pytest.raises(MetricValidationError) as err:
            validate_metric([[0, 1, 3.5], [1, 0, 2], [3.5, 2, 0]])
        (violation,) = err.value.violations
        assert violation.kind == "TriangleViolation"
        assert violation.where == (0, 2, 1)

    def test_every_axiom_listed(self):
        bad = [[1.0, 0.0, -2.0], [0.5, 0.0, 1.0], [-2.0, 1.0, 0.0]]
        kinds = {v.kind for v in metric_violations(bad)}
        assert {"NonzeroDiagonal", "AsymmetricEntry", "NegativeEntry", "ZeroDistance"} <= kinds

    def test_label_mismatch(self):
        with pytest.raises(BadParameter):
            validate_metric([[0, 1], [1, 0]], labels=["a"])

    def test_corpus_validates(self):
        for seed in range(25):
            space = random_corpus_space(seed)
            assert not metric_violations(space.dist, space.tolerance)


class TestCheckUltrametric:
    def test_equilateral(self):
        space = validate_metric([[0, 1, 1], [1, 0, 1], [1, 1, 0]])
        assert check_ultrametric(space).ok

    def test_line_witness(self):
        verdict = check_ultrametric(path_space(0.0, 1.0, 2.0))
        assert not verdict.ok
        assert verdict.witness == (0, 2, 1)

    def test_dendrogram_corpus_against_bruteforce(self):
        from cotypelab import GeneratorSpec, generate

        for seed in range(10):
            space = generate(GeneratorSpec("random-ultrametric", (("k", 9),), seed=seed))
            assert space.tolerance == 0.0
            assert check_ultrametric(space).ok
            assert oracles.ultrametric_witness(space.dist.tolist(), 0.0) is None

    def test_witness_matches_bruteforce_scan(self):
        for seed in range(12):
            space = random_corpus_space(seed)
            verdict = check_ultrametric(space)
            brute = oracles.ultrametric_witness(space.dist.tolist(), space.tolerance)
            assert verdict.ok == (brute is None)


class TestLsMetricExponent:
    def test_line_gives_one(self):
        assert ls_metric_exponent(path_space(0.0, 1.0, 2.0)) == pytest.approx(1.0, abs=1e-9)

    def test_right_triangle_gives_two(self):
        space = validate_metric([[0, 1, math.sqrt(2)], [1, 0, 1], [math.sqrt(2), 1, 0]])
        assert ls_metric_exponent(space) == pytest.approx(2.0, abs=1e-8)

    def test_ultrametric_gives_infinity(self):
        from cotypelab import GeneratorSpec, generate

        space = generate(GeneratorSpec("random-ultrametric", (("k", 7),), seed=3))
        assert ls_metric_exponent(space) == math.inf

    def test_near_ultrametric_capped_at_64(self):
        eps = 1e-12
        space = validate_metric([[0, 1, 1 + eps], [1, 0, 1], [1 + eps, 1, 0]])
        assert ls_metric_exponent(space) == 64.0

    def test_two_points(self):
        assert ls_metric_exponent(path_space(0.0, 1.0)) == math.inf

    @pytest.mark.parametrize("alpha", [1.0, 0.5, 0.25])
    def test_snowflake_scaling_law(self, alpha):
        for seed in (0, 3, 7):
            space = random_corpus_space(seed)
            base = ls_metric_exponent(space)
            if not math.isfinite(base) or base / alpha > 64.0:
                continue
            flaked = ls_metric_exponent(snowflake_transform(space, alpha))
            assert flaked == pytest.approx(base / alpha, abs=1e-6)


class TestSnowflakeTransform:
    def test_identity_at_one(self):
        space = path_space(0.0, 1.0, 2.0)
        assert np.array_equal(snowflake_transform(space, 1.0).dist, space.dist)

    def test_half_power_on_line(self):
        flaked = snowflake_transform(path_space(0.0, 1.0, 2.0), 0.5)
        assert flaked.d(0, 2) == pytest.approx(math.sqrt(2))
        assert not metric_violations(flaked.dist, flaked.tolerance)

    def test_ultrametric_preserved_any_alpha(self):
        from cotypelab import GeneratorSpec, generate

        space = generate(GeneratorSpec("random-ultrametric", (("k", 8),), seed=11))
        for alpha in (0.3, 1.0, 2.5):
            assert check_ultrametric(snowflake_transform(space, alpha)).ok

    def test_alpha_above_one_rejected_on_line(self):
        with pytest.raises(MetricValidationError):
            snowflake_transform(path_space(0.0, 1.0, 2.0), 2.0)

    def test_bad_alpha(self):
        with pytest.raises(BadParameter):
            snowflake_transform(path_space(0.0, 1.0), 0.0)


class TestSubdominantUltrametric:
    def test_path_collapses_to_unit(self, path4):
        sub, distortion = subdominant_ultrametric(path4)
        off = ~np.eye(4, dtype=bool)
        assert np.all(sub.dist[off] == 1.0)
        assert distortion == 3.0

    def test_ultrametric_fixed_point(self):
        from cotypelab import GeneratorSpec, generate

        space = generate(GeneratorSpec("random-ultrametric", (("k", 9),), seed=2))
        sub, distortion = subdominant_ultrametric(space)
        assert np.array_equal(sub.dist, space.dist)
        assert distortion == 1.0

    def test_two_points(self):
        sub, distortion = subdominant_ultrametric(path_space(0.0, 2.5))
        assert sub.d(0, 1) == 2.5
        assert distortion == 1.0

    def test_matches_all_chain_bruteforce(self):
        for seed in range(20):
            space = random_corpus_space(seed, max_points=8)
            sub, _ = subdominant_ultrametric(space)
            brute = oracles.minimax_all_chains(space.dist.tolist())
            assert np.allclose(sub.dist, np.array(brute), rtol=0, atol=0)

    def test_below_d_and_exactly_ultrametric(self):
        for seed in range(20):
            space = random_corpus_space(seed)
            sub, distortion = subdominant_ultrametric(space)
            assert np.all(sub.dist <= space.dist)
            assert check_ultrametric(sub).ok  # tolerance 0 on sub
            assert distortion >= 1.0


class TestFindChain:
    def test_same_point(self, path4):
        chain = find_chain(path4, 2, 2, 0.5)
        assert chain.points == (2,)

    def test_path_chain(self, path4):
        chain = find_chain(path4, 0, 3, 1.5)
        assert chain.points == (0, 1, 2, 3)
        steps = [path4.d(a, b) for a, b in zip(chain.points, chain.points[1:])]
        assert all(step < 1.5 for step in steps)

    def test_strictness_at_threshold(self, path4):
        assert find_chain(path4, 0, 3, 1.0) is None

    def test_matches_union_find_oracle(self):
        for seed in range(15):
            space = random_corpus_space(seed)
            k = len(space)
            eps = float(np.median(space.dist[space.dist > 0])) if k > 1 else 1.0
            for a in range(k):
                for b in range(k):
                    found = find_chain(space, a, b, eps) is not None
                    assert found == oracles.connected_below(space.dist.tolist(), a, b, eps)

    def test_components_helper_agrees(self):
        space = random_corpus_space(4)
        eps = float(np.median(space.dist[space.dist > 0]))
        uf = threshold_components(space, eps)
        for a in range(len(space)):
            for b in range(len(space)):
                assert (uf.find(a) == uf.find(b)) == (
                    find_chain(space, a, b, eps) is not None
                )

    def test_bad_indices(self, path4):
        with pytest.raises(BadParameter):
            find_chain(path4, 0, 9, 1.0)


class TestScalingInvariance:
    def test_predicates_scale_invariant(self):
        rng = np.random.default_rng(40)
        for seed in range(8):
            space = random_corpus_space(seed)
            lam = float(rng.uniform(0.1, 10.0))
            scaled = space.rescaled(lam)
            assert check_ultrametric(space).ok == check_ultrametric(scaled).ok
            if len(space) >= 3:
                base = ls_metric_exponent(space)
                other = ls_metric_exponent(scaled)
                if math.isfinite(base):
                    assert other == pytest.approx(base, abs=1e-7)
                else:
                    assert other == base

    def test_chain_existence_dyadic_scaling(self, path4):
        for lam in (0.5, 2.0, 8.0, 2.0**-7):
            scaled = path4.rescaled(lam)
            assert (find_chain(path4, 0, 3, 1.5) is None) == (
                find_chain(scaled, 0, 3, 1.5 * lam) is None
            )
            assert (find_chain(path4, 0, 3, 1.0) is None) == (
                find_chain(scaled, 0, 3, 1.0 * lam) is None
            )


class TestDiamAndSetDistance:
    def test_diam_conventions(self, path4):
        assert path4.diam([]) == 0.0
        assert path4.diam([2]) == 0.0
        assert path4.diam() == 3.0

    def test_set_distance_empty_is_error(self, path4):
        with pytest.raises(BadParameter):
            path4.set_distance([], [1])


class TestFileFormats:
    def test_json_round_trip(self):
        space = random_corpus_space(6)
        again = space_from_json(space_to_json(space), space.tolerance)
        assert again.labels == space.labels
        assert np.array_equal(again.dist, space.dist)

    def test_csv_round_trip(self):
        space = random_corpus_space(7)
        again = space_from_csv(space_to_csv(space), space.tolerance)
        assert again.labels == space.labels
        assert np.array_equal(again.dist, space.dist)

    def test_csv_writer_emits_full_symmetric_matrix(self):
        text = space_to_csv(path_space(0.0, 1.0))
        rows = text.strip().split("\n")
        assert len(rows) == 3  # header + 2 matrix rows
