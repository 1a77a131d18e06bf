"""
Tests for the nearest-neighbour index and the OWA operator.
"""
import sys
import os
import unittest

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

# Add the src directory to the Python path
sys.path.insert(0, os.path.abspath(os.path.dirname(os.path.dirname(__file__))))

from src.occkit.exceptions import InvalidArgumentError, ShapeError
from src.occkit.models import validate_matrix
from src.occkit.neighbors import Metric, build_index, distance
from src.occkit.owa import WeightVector, linear_weights, owa_apply, owa_apply_many, uniform_weights


class TestDistance(unittest.TestCase):
    """
    Tests for the dissimilarity measures.
    """

    def test_examples(self):
        """Test Manhattan and Euclidean distances of (0,0) and (3,4)."""
        self.assertEqual(distance(Metric.MANHATTAN, [0, 0], [3, 4]), 7.0)
        self.assertEqual(distance(Metric.EUCLIDEAN, [0, 0], [3, 4]), 5.0)

    def test_length_mismatch(self):
        """Test that vectors of different lengths are a shape error."""
        with self.assertRaises(ShapeError):
            distance(Metric.MANHATTAN, [0, 0], [1, 2, 3])


class TestNeighborIndex(unittest.TestCase):
    """
    Tests for exact k-NN queries.
    """

    def setUp(self):
        self.index = build_index(validate_matrix([[0.0], [1.0], [3.0], [6.0]]))

    def test_query(self):
        """Test a 1-D query with distances sorted ascending."""
        ids, dists = self.index.query_knn([2.5], 3)
        np.testing.assert_array_equal(ids, [2, 1, 0])
        np.testing.assert_array_equal(dists, [0.5, 1.5, 2.5])

    def test_ties_broken_by_row_id(self):
        """Test that equidistant rows come in ascending id order."""
        index = build_index(validate_matrix([[2.0], [0.0], [2.0], [0.0]]))
        ids, _ = index.query_knn([1.0], 4)
        np.testing.assert_array_equal(ids, [0, 1, 2, 3])

    def test_exclude(self):
        """Test that an excluded training row is skipped."""
        ids, dists = self.index.query_knn([1.0], 2, exclude=1)
        np.testing.assert_array_equal(ids, [0, 2])
        np.testing.assert_array_equal(dists, [1.0, 2.0])

    def test_self_neighbours(self):
        """Test that self-neighbour queries never return the row itself."""
        ids, dists = self.index.self_neighbours(2)
        self.assertFalse((ids == np.arange(4)[:, None]).any())
        np.testing.assert_array_equal(dists[:, 0], [1.0, 1.0, 2.0, 3.0])

    def test_invalid_k(self):
        """Test that k outside [1, n] (or [1, n-1] when excluding) is rejected."""
        with self.assertRaises(InvalidArgumentError):
            self.index.query_knn([0.0], 0)
        with self.assertRaises(InvalidArgumentError):
            self.index.query_knn([0.0], 5)
        with self.assertRaises(InvalidArgumentError):
            self.index.query_knn([0.0], 4, exclude=0)
        with self.assertRaises(InvalidArgumentError):
            self.index.query_knn([0.0], 1, exclude=7)

    def test_profile_nondecreasing(self):
        """Test that k-th distance profiles are nondecreasing."""
        rng = np.random.default_rng(0)
        index = build_index(validate_matrix(rng.normal(size=(40, 3))), Metric.EUCLIDEAN)
        for y in rng.normal(size=(10, 3)):
            profile = index.kth_distance_profile(y, 10)
            self.assertTrue((np.diff(profile) >= 0).all())

    def test_matches_brute_force(self):
        """Test against a direct sort of all distances."""
        rng = np.random.default_rng(1)
        X = rng.normal(size=(30, 4))
        index = build_index(validate_matrix(X), Metric.MANHATTAN)
        Y = rng.normal(size=(7, 4))
        _, dists = index.query_many(Y, 5)
        for y, row in zip(Y, dists):
            expected = np.sort(np.abs(X - y).sum(axis=1))[:5]
            np.testing.assert_allclose(row, expected, rtol=1e-12)


class TestOwa(unittest.TestCase):
    """
    Tests for weight vectors and the OWA operator.
    """

    def test_linear_weights(self):
        """Test linear weights for p = 3: 3/6, 2/6, 1/6."""
        np.testing.assert_allclose(linear_weights(3).weights, [0.5, 1 / 3, 1 / 6])
        np.testing.assert_array_equal(linear_weights(1).weights, [1.0])

    def test_uniform_weights(self):
        """Test uniform weights."""
        np.testing.assert_allclose(uniform_weights(4).weights, 0.25)

    def test_invalid_weights(self):
        """Test that increasing, negative or non-normalised weights are rejected."""
        for weights in ([0.2, 0.8], [1.2, -0.2], [0.5, 0.4], []):
            with self.subTest(weights=weights):
                with self.assertRaises(InvalidArgumentError):
                    WeightVector(np.array(weights))
        with self.assertRaises(InvalidArgumentError):
            linear_weights(0)

    def test_owa_examples(self):
        """Test OWA on hand-computed examples."""
        self.assertAlmostEqual(owa_apply(linear_weights(3), [0.2, 0.25, 0.31]), (3 * 0.31 + 2 * 0.25 + 0.2) / 6)
        self.assertAlmostEqual(owa_apply(uniform_weights(3), [1.0, 2.0, 6.0]), 3.0)
        self.assertEqual(owa_apply(linear_weights(1), [0.7]), 0.7)

    def test_length_mismatch(self):
        """Test that a value count different from the weight count is a shape error."""
        with self.assertRaises(ShapeError):
            owa_apply(linear_weights(2), [1.0, 2.0, 3.0])

    @settings(max_examples=100, deadline=None)
    @given(st.lists(st.floats(min_value=-1e6, max_value=1e6), min_size=1, max_size=12), st.randoms())
    def test_permutation_invariant_and_bounded(self, values, random):
        """Test that OWA ignores input order and lies between the min and max."""
        w = linear_weights(len(values))
        shuffled = list(values)
        random.shuffle(shuffled)
        result = owa_apply(w, values)
        self.assertEqual(result, owa_apply(w, shuffled))
        tolerance = 1e-9 * max(1.0, max(abs(v) for v in values))
        self.assertGreaterEqual(result, min(values) - tolerance)
        self.assertLessEqual(result, max(values) + tolerance)

    def test_batch_matches_single(self):
        """Test that row-wise OWA agrees with single applications."""
        values = np.random.default_rng(2).random((5, 4))
        w = linear_weights(4)
        np.testing.assert_allclose(owa_apply_many(w, values), [owa_apply(w, row) for row in values])


if __name__ == "__main__":
    unittest.main()
