from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import partitions, spaces_with_outcome
from infoagg import Partition, ProbabilitySpace, conditional_expectation, join, make_space, moments, partition_from_rv
from infoagg.errors import EmptyWeights, NegativeWeight, SizeMismatch, SpaceMismatch, ZeroMass
from infoagg.io import problem_from_doc, problem_to_doc
from infoagg.prob_core import as_equal, block_means, join_all, prob_differ, variance


def union_find_blocks(values, tol):
    """Oracle: group indices by pairwise closeness, closed transitively."""
    n = len(values)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for k in range(i + 1, n):
            if abs(values[i] - values[k]) <= tol:
                parent[find(i)] = find(k)
    return Partition([find(i) for i in range(n)])


def brute_conditional(weights, y, labels):
    out = []
    mu0 = sum(w * v for w, v in zip(weights, y))
    for i in range(len(y)):
        idx = [k for k in range(len(y)) if labels[k] == labels[i]]
        m = sum(weights[k] for k in idx)
        out.append(sum(weights[k] * y[k] for k in idx) / m if m > 0 else mu0)
    return np.array(out)


class TestMakeSpace:
    def test_uniform_die(self):
        s = make_space([1] * 6)
        assert s.n_outcomes == 6
        assert np.allclose(s.weights, 1 / 6, rtol=0, atol=1e-16)

    def test_zero_weight_retained(self):
        s = make_space([2, 0, 2])
        assert s.weights.tolist() == [0.5, 0.0, 0.5]

    def test_simple_ratio(self):
        assert make_space([3, 1]).weights.tolist() == [0.75, 0.25]

    @pytest.mark.parametrize(
        "weights, err",
        [([], EmptyWeights), ([1, -1, 2], NegativeWeight), ([0, 0], ZeroMass)],
    )
    def test_errors(self, weights, err):
        with pytest.raises(err):
            make_space(weights)

    @given(st.lists(st.floats(0, 1e3), min_size=1, max_size=50).filter(lambda w: sum(w) > 0))
    def test_sums_to_exactly_one(self, raw):
        s = make_space(raw)
        assert s.weights.sum() == pytest.approx(1.0, abs=1e-12)
        assert np.all(s.weights >= 0)

    def test_residue_goes_to_last_positive_weight(self):
        s = make_space([1, 1, 1, 0])
        assert s.weights[3] == 0.0
        assert s.weights[:3].sum() == 1.0

    def test_direct_constructor_rejects_unnormalized(self):
        with pytest.raises(ZeroMass):
            ProbabilitySpace([0.5, 0.4])

    def test_weights_read_only(self):
        s = make_space([1, 1])
        with pytest.raises(ValueError):
            s.weights[0] = 1.0


class TestRandomVariable:
    def test_length_must_match(self):
        with pytest.raises(SpaceMismatch):
            make_space([1, 1]).rv([1, 2, 3])

    def test_values_must_be_finite(self):
        with pytest.raises(ValueError):
            make_space([1, 1]).rv([1, np.inf])

    def test_arithmetic_stays_on_space(self):
        s = make_space([1, 1, 2])
        x, y = s.rv([1, 2, 3]), s.rv([0, 1, 0])
        z = 2.0 * x - y + np.float64(1.0)
        assert z.space is s
        assert z.values.tolist() == [3, 4, 7]

    def test_mixing_spaces_rejected(self):
        a, b = make_space([1, 1]), make_space([1, 3])
        with pytest.raises(SpaceMismatch):
            a.rv([0, 1]) + b.rv([0, 1])


class TestPartitionFromRv:
    def test_die_prediction_level_sets(self, die):
        s, _, _ = die
        x1 = s.rv([0, 3 / 5, 3 / 5, 3 / 5, 3 / 5, 3 / 5])
        assert partition_from_rv(s, x1, 0.0) == Partition.from_blocks([[0], [1, 2, 3, 4, 5]])

    def test_constant_single_block(self):
        s = make_space([1] * 5)
        assert partition_from_rv(s, s.constant(0.3)).n_blocks == 1

    def test_tolerance_grouping(self):
        s = make_space([1, 1, 1])
        g = partition_from_rv(s, s.rv([0.1, 0.100000001, 0.2]), 1e-6)
        assert g == union_find_blocks([0.1, 0.100000001, 0.2], 1e-6)
        assert g == Partition.from_blocks([[0, 1], [2]])

    def test_transitive_chain(self):
        s = make_space([1] * 4)
        g = partition_from_rv(s, s.rv([0.0, 0.6, 1.2, 5.0]), 0.7)
        assert g.blocks == [(0, 1, 2), (3,)]

    @given(st.lists(st.integers(0, 40), min_size=1, max_size=25), st.sampled_from([0.0, 0.5, 1.0, 2.5]))
    def test_matches_union_find_oracle(self, ints, tol):
        vals = [v / 4 for v in ints]
        s = make_space([1] * len(vals))
        assert partition_from_rv(s, s.rv(vals), tol) == union_find_blocks(vals, tol)

    def test_space_mismatch(self):
        a, b = make_space([1, 1]), make_space([1, 2])
        with pytest.raises(SpaceMismatch):
            partition_from_rv(a, b.rv([0, 1]))


class TestJoin:
    def test_die_join(self):
        p = Partition.from_blocks([[0], [1, 2, 3, 4, 5]])
        q = Partition.from_blocks([[5], [0, 1, 2, 3, 4]])
        assert join(p, q) == Partition.from_blocks([[0], [1, 2, 3, 4], [5]])

    def test_idempotent(self):
        p = Partition([0, 1, 0, 2, 1])
        assert join(p, p) == p

    def test_crossing_partitions_give_singletons(self):
        p = Partition.from_blocks([[0, 1], [2, 3]])
        q = Partition.from_blocks([[0, 2], [1, 3]])
        assert join(p, q) == Partition.finest(4)

    def test_size_mismatch(self):
        with pytest.raises(SizeMismatch):
            join(Partition.trivial(3), Partition.trivial(4))

    @given(st.integers(1, 15).flatmap(lambda n: st.tuples(partitions(n, 4), partitions(n, 4))))
    def test_join_is_coarsest_common_refinement(self, pq):
        p, q = pq
        j = join(p, q)
        assert j.refines(p) and j.refines(q)
        assert j == join(q, p)
        # each block is exactly one non-empty intersection
        inter = {(a, b) for a, b in zip(p.labels, q.labels)}
        assert j.n_blocks == len(inter)

    @given(st.integers(1, 12).flatmap(lambda n: st.tuples(partitions(n, 3), partitions(n, 3), partitions(n, 3))))
    def test_associative(self, pqr):
        p, q, r = pqr
        assert join(join(p, q), r) == join(p, join(q, r)) == join_all([p, q, r])


class TestPartition:
    def test_canonical_labels(self):
        assert Partition([5, 5, 2, 7]) == Partition([0, 0, 1, 2])

    def test_from_blocks_validates_cover(self):
        with pytest.raises(ValueError):
            Partition.from_blocks([[0, 1], [1, 2]])
        with pytest.raises(ValueError):
            Partition.from_blocks([[0], []], 1)

    def test_refines(self):
        fine, coarse = Partition.finest(4), Partition.trivial(4)
        assert fine.refines(coarse)
        assert not coarse.refines(fine)


class TestConditionalExpectation:
    def test_die_forecaster(self, die):
        s, y, (g1, _) = die
        x = conditional_expectation(s, y, g1)
        assert np.array_equal(x.values, [0, 3 / 5, 3 / 5, 3 / 5, 3 / 5, 3 / 5])

    def test_trivial_partition_gives_prior_mean(self, die):
        s, y, _ = die
        assert np.all(conditional_expectation(s, y, Partition.trivial(6)).values == 0.5)

    def test_zero_probability_block_gets_prior_mean(self):
        s = make_space([1, 0, 1])
        y = s.rv([0.0, 9.0, 1.0])
        x = conditional_expectation(s, y, Partition.from_blocks([[0, 2], [1]]))
        assert x.values.tolist() == [0.5, 0.5, 0.5]

    def test_random_space_tower_property(self, rng):
        s = make_space(rng.integers(1, 10, 8))
        y = s.rv(rng.normal(size=8))
        g = Partition(rng.integers(0, 3, 8))
        assert abs(moments(s, conditional_expectation(s, y, g))[0] - moments(s, y)[0]) <= 1e-10

    @given(spaces_with_outcome(), st.data())
    def test_matches_brute_force(self, sy, data):
        s, y = sy
        g = data.draw(partitions(s.n_outcomes, 4))
        got = conditional_expectation(s, y, g).values
        want = brute_conditional(s.weights.tolist(), y.values.tolist(), g.labels.tolist())
        assert np.allclose(got, want, rtol=0, atol=1e-12)

    @given(spaces_with_outcome(max_n=30), st.data())
    def test_tower_property(self, sy, data):
        s, y = sy
        g = data.draw(partitions(s.n_outcomes, 6))
        assert abs(moments(s, conditional_expectation(s, y, g))[0] - moments(s, y)[0]) <= 1e-10

    def test_tower_property_large_space(self, rng):
        s = make_space(rng.integers(0, 5, 10_000))
        y = s.rv(rng.normal(size=10_000))
        g = Partition(rng.integers(0, 50, 10_000))
        assert abs(moments(s, conditional_expectation(s, y, g))[0] - moments(s, y)[0]) <= 1e-10

    @given(spaces_with_outcome(max_n=20), st.data())
    def test_refinement_increases_variance(self, sy, data):
        s, y = sy
        coarse = data.draw(partitions(s.n_outcomes, 3))
        fine = join(coarse, data.draw(partitions(s.n_outcomes, 3)))
        v_coarse = variance(s, conditional_expectation(s, y, coarse))
        v_fine = variance(s, conditional_expectation(s, y, fine))
        assert v_coarse <= v_fine + 1e-12

    @given(spaces_with_outcome())
    def test_finest_partition_reproduces_y(self, sy):
        s, y = sy
        assert as_equal(s, conditional_expectation(s, y, Partition.finest(s.n_outcomes)), y, 1e-12)

    @given(spaces_with_outcome(), st.data())
    def test_calibration_fixed_point(self, sy, data):
        s, y = sy
        x = conditional_expectation(s, y, data.draw(partitions(s.n_outcomes, 4)))
        again = conditional_expectation(s, y, partition_from_rv(s, x, 0.0))
        assert as_equal(s, again, x, 1e-12)


class TestMoments:
    def test_die_outcome(self, die):
        s, y, _ = die
        m, v, c = moments(s, y)
        assert (m, v, c) == (0.5, 0.25, None)

    def test_constant_has_zero_variance(self):
        s = make_space([1, 2, 3])
        assert moments(s, s.constant(4.2))[1] == 0.0

    @given(spaces_with_outcome(max_n=20), st.data())
    def test_calibrated_cov_equals_var(self, sy, data):
        s, y = sy
        x = conditional_expectation(s, y, data.draw(partitions(s.n_outcomes, 4)))
        _, var_x, cov = moments(s, x, y)
        assert cov == pytest.approx(var_x, abs=1e-10)

    def test_block_means_nan_on_null_block(self):
        s = make_space([1, 0])
        mass, means = block_means(s, s.rv([1.0, 2.0]), Partition.finest(2))
        assert mass.tolist() == [1.0, 0.0]
        assert np.isnan(means[1])


class TestAlmostSure:
    def test_zero_probability_outcomes_ignored(self):
        s = make_space([1, 0, 1])
        x, y = s.rv([0, 5, 1]), s.rv([0, -5, 1])
        assert as_equal(s, x, y)
        assert prob_differ(s, x, y) == 0.0

    def test_prob_differ_uses_tolerance(self):
        s = make_space([1, 1])
        assert prob_differ(s, s.rv([0, 0]), s.rv([1e-10, 1e-8])) == 0.5


class TestSerialization:
    @given(spaces_with_outcome(), st.data())
    def test_round_trip(self, sy, data):
        s, y = sy
        g = data.draw(partitions(s.n_outcomes, 4))
        doc = problem_to_doc(s, y, [g])
        assert set(doc["space"]) == {"weights"}
        assert set(doc["outcome"]) == {"values"}
        assert set(doc["forecasters"][0]) == {"blocks"}
        s2, y2, (g2,) = problem_from_doc(doc)
        assert s2 == s
        assert np.array_equal(y2.values, y.values)
        assert g2 == g
