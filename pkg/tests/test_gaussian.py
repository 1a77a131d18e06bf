"""
Tests for the Mahalanobis Distance descriptor.
"""
import sys
import os
import unittest

import numpy as np

# Add the src directory to the Python path
sys.path.insert(0, os.path.abspath(os.path.dirname(os.path.dirname(__file__))))

from src.occkit.descriptors import MahalanobisDistance, MdModel
from src.occkit.descriptors.gaussian import pseudo_inverse
from src.occkit.exceptions import InsufficientDataError
from src.occkit.models import validate_matrix


class TestMahalanobisDistance(unittest.TestCase):
    """
    Tests for MD scoring.
    """

    def test_matches_numpy_oracle(self):
        """Test against np.cov and np.linalg.pinv."""
        rng = np.random.default_rng(21)
        X = rng.normal(size=(50, 3)) @ np.array([[2.0, 0.5, 0.0], [0.0, 1.0, 0.3], [0.0, 0.0, 0.7]])
        model = MahalanobisDistance().fit(validate_matrix(X))
        precision = np.linalg.pinv(np.cov(X, rowvar=False))
        mean = X.mean(axis=0)
        for y in rng.normal(size=(10, 3)):
            distance = np.sqrt((y - mean) @ precision @ (y - mean))
            self.assertAlmostEqual(model.score(y), 1.0 / (1.0 + distance), places=10)

    def test_identity_covariance_example(self):
        """Test that identity covariance with y - mean = (3, 4) gives D = 5 and score 1/6."""
        model = MdModel(mean=np.zeros(2), precision=np.eye(2))
        self.assertAlmostEqual(float(model.mahalanobis(np.array([[3.0, 4.0]]))[0]), 5.0, places=12)
        self.assertAlmostEqual(model.score([3.0, 4.0]), 1.0 / 6.0, places=12)

    def test_affine_invariance(self):
        """Test that an invertible affine map of the data and queries leaves D unchanged."""
        rng = np.random.default_rng(8)
        X = rng.normal(size=(60, 3))
        Y = rng.normal(scale=2.0, size=(15, 3))
        A = rng.normal(size=(3, 3)) + 3.0 * np.eye(3)
        b = rng.normal(size=3)
        self.assertGreater(abs(np.linalg.det(A)), 1e-3)

        before = MahalanobisDistance().fit(validate_matrix(X)).mahalanobis(Y)
        after = MahalanobisDistance().fit(validate_matrix(X @ A.T + b)).mahalanobis(Y @ A.T + b)
        np.testing.assert_allclose(after, before, rtol=0, atol=1e-8)

    def test_mean_scores_one(self):
        """Test that the training mean scores 1."""
        X = np.array([[0.0, 1.0], [2.0, 3.0], [4.0, 2.0], [1.0, 0.0]])
        model = MahalanobisDistance().fit(validate_matrix(X))
        self.assertAlmostEqual(model.score(X.mean(axis=0)), 1.0, places=12)

    def test_singular_covariance(self):
        """Test that collinear attributes are handled through the pseudo-inverse."""
        t = np.arange(10.0)
        X = np.column_stack([t, 2.0 * t, np.ones(10)])
        model = MahalanobisDistance().fit(validate_matrix(X))
        np.testing.assert_allclose(model.precision, np.linalg.pinv(np.cov(X, rowvar=False)), atol=1e-10)
        scores = model.score_many(X)
        self.assertTrue(np.isfinite(scores).all())

    def test_pseudo_inverse_of_zero_matrix(self):
        """Test that the zero matrix inverts to itself."""
        np.testing.assert_array_equal(pseudo_inverse(np.zeros((2, 2))), np.zeros((2, 2)))

    def test_single_row_is_insufficient(self):
        """Test that one row cannot give a covariance."""
        with self.assertRaises(InsufficientDataError):
            MahalanobisDistance().fit(validate_matrix([[1.0, 2.0]]))


if __name__ == "__main__":
    unittest.main()
