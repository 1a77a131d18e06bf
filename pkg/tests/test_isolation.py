"""
Tests for the Isolation Forest and Extended Isolation Forest descriptors.
"""
import sys
import os
import math
import unittest

import numpy as np
from scipy.stats import spearmanr

# Add the src directory to the Python path
sys.path.insert(0, os.path.abspath(os.path.dirname(os.path.dirname(__file__))))

from src.occkit.descriptors import IsolationForest, SplitMode
from src.occkit.descriptors.isolation import (
    EXACT_HARMONIC_LIMIT,
    expected_path_length,
    harmonic_number,
    isolation_score,
)
from src.occkit.exceptions import InsufficientDataError, InvalidArgumentError
from src.occkit.models import validate_matrix


class TestPathLength(unittest.TestCase):
    """
    Tests for c(i) and the isolation score.
    """

    def test_small_values(self):
        """Test c(1) = 0, c(2) = 1 and c(3) = 2 H(2) - 4/3."""
        self.assertEqual(expected_path_length(1), 0.0)
        self.assertEqual(expected_path_length(2), 1.0)
        self.assertAlmostEqual(expected_path_length(3), 2 * 1.5 - 4 / 3, places=14)

    def test_harmonic_approximation_is_continuous(self):
        """Test that the asymptotic expansion agrees with the exact sum at the switch-over."""
        j = EXACT_HARMONIC_LIMIT + 1
        exact = math.fsum(1.0 / i for i in range(1, j + 1))
        self.assertAlmostEqual(harmonic_number(j), exact, delta=1e-10)

    def test_invalid_size(self):
        """Test that c(0) and psi = 1 are rejected."""
        with self.assertRaises(InvalidArgumentError):
            expected_path_length(0)
        with self.assertRaises(InvalidArgumentError):
            isolation_score(np.array([1.0]), 1)

    def test_average_path_scores_half(self):
        """Test that a mean path length of exactly c(psi) scores 0.5."""
        for psi in (2, 16, 256):
            self.assertEqual(float(isolation_score(expected_path_length(psi), psi)), 0.5)


class TestIsolationForest(unittest.TestCase):
    """
    Tests for growing and scoring isolation forests.
    """

    def setUp(self):
        rng = np.random.default_rng(11)
        self.train = validate_matrix(rng.normal(size=(300, 3)))

    def test_tree_depth_is_limited(self):
        """Test that no tree grows past ceil(log2 psi)."""
        for mode in SplitMode:
            model = IsolationForest(t=20, psi=64, mode=mode, seed=3).fit(self.train)
            for tree in model.trees:
                self.assertLessEqual(int(tree.depth.max()), math.ceil(math.log2(64)))

    def test_leaves_are_nonempty(self):
        """Test that every leaf holds at least one subsample instance."""
        for mode in SplitMode:
            model = IsolationForest(t=20, mode=mode, seed=5).fit(self.train)
            for tree in model.trees:
                self.assertTrue((tree.size[tree.leaves()] >= 1).all())
                self.assertEqual(int(tree.size.sum()), model.psi)

    def test_default_subsample(self):
        """Test that psi defaults to min(256, n)."""
        self.assertEqual(IsolationForest(t=1).fit(self.train).psi, 256)
        small = validate_matrix(self.train.values[:40])
        self.assertEqual(IsolationForest(t=1).fit(small).psi, 40)

    def test_scores_in_open_unit_interval(self):
        """Test that forest scores lie strictly between 0 and 1."""
        rng = np.random.default_rng(12)
        Y = rng.normal(scale=3.0, size=(100, 3))
        for mode in SplitMode:
            scores = IsolationForest(mode=mode, seed=1).fit(self.train).score_many(Y)
            self.assertTrue(((scores > 0) & (scores < 1)).all())

    def test_outlier_scores_below_interior(self):
        """Test that a far query scores below the centre of the data."""
        for mode in SplitMode:
            model = IsolationForest(mode=mode, seed=2).fit(self.train)
            self.assertLess(model.score([10.0, 10.0, 10.0]), model.score([0.0, 0.0, 0.0]))

    def test_one_dimensional_far_query(self):
        """Test that a far query on 1-D data from [0, 1] scores below an interior one."""
        train = validate_matrix(np.random.default_rng(13).uniform(size=(200, 1)))
        for mode in SplitMode:
            with self.subTest(mode=mode.value):
                model = IsolationForest(mode=mode, seed=6).fit(train)
                self.assertLess(model.score([100.0]), model.score([0.5]))

    def test_one_dimensional_modes_agree(self):
        """Test that axis and extended splits rank 1-D queries alike."""
        train = validate_matrix(np.random.default_rng(14).normal(size=(200, 1)))
        Y = np.linspace(0.0, 4.0, 21).reshape(-1, 1)
        axis = IsolationForest(mode=SplitMode.AXIS, seed=9).fit(train).score_many(Y)
        extended = IsolationForest(mode=SplitMode.EXTENDED, seed=9).fit(train).score_many(Y)
        rho, _ = spearmanr(axis, extended)
        self.assertGreater(rho, 0.9)

    def test_constant_data_scores_half(self):
        """Test that on constant data every tree is one leaf and every query scores 0.5."""
        train = validate_matrix(np.full((30, 2), 3.0))
        Y = np.array([[3.0, 3.0], [10.0, -2.0]])
        for mode in SplitMode:
            with self.subTest(mode=mode.value):
                model = IsolationForest(t=10, mode=mode, seed=1).fit(train)
                self.assertTrue(all(len(tree.size) == 1 for tree in model.trees))
                for score in model.score_many(Y):
                    self.assertAlmostEqual(score, 0.5, places=12)

    def test_determinism(self):
        """Test that the seed fixes the forest."""
        Y = self.train.values[:25]
        first = IsolationForest(t=30, seed=7).fit(self.train).score_many(Y)
        again = IsolationForest(t=30, seed=7).fit(self.train).score_many(Y)
        other = IsolationForest(t=30, seed=8).fit(self.train).score_many(Y)
        np.testing.assert_array_equal(first, again)
        self.assertFalse(np.array_equal(first, other))

    def test_kind(self):
        """Test that the split mode names the descriptor."""
        self.assertEqual(IsolationForest().kind, "if")
        self.assertEqual(IsolationForest(mode=SplitMode.EXTENDED).kind, "eif")

    def test_extended_falls_back_on_constant_attributes(self):
        """Test that EIF still isolates when all but one attribute is constant."""
        X = np.column_stack([np.arange(32.0), np.zeros(32), np.zeros(32)])
        model = IsolationForest(t=10, mode=SplitMode.EXTENDED, seed=4).fit(validate_matrix(X))
        scores = model.score_many(X)
        self.assertTrue(np.isfinite(scores).all())

    def test_invalid_arguments(self):
        """Test psi outside [2, n], no trees, and a single training row."""
        with self.assertRaises(InvalidArgumentError):
            IsolationForest(psi=1).fit(self.train)
        with self.assertRaises(InvalidArgumentError):
            IsolationForest(psi=301).fit(self.train)
        with self.assertRaises(InvalidArgumentError):
            IsolationForest(t=0).fit(self.train)
        with self.assertRaises(InsufficientDataError):
            IsolationForest().fit(validate_matrix([[1.0, 2.0, 3.0]]))


if __name__ == "__main__":
    unittest.main()
