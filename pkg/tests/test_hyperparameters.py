"""
Tests for hyperparameter resolution and the tuning grids.
"""
import sys
import os
import unittest

import numpy as np

# Add the src directory to the Python path
sys.path.insert(0, os.path.abspath(os.path.dirname(os.path.dirname(__file__))))

from src.occkit.descriptors import DescriptorKind, NearestNeighbourDistance, nearest_neighbour
from src.occkit.descriptors.isolation import IsolationForest
from src.occkit.exceptions import InvalidArgumentError
from src.occkit.models import validate_matrix
from src.occkit.hyperparameters import (
    DescriptorSpec,
    GridAxis,
    HyperGrid,
    clamp_count,
    default_grid,
    grid_names,
    resolve_hyperparameters,
    round_half_up,
)


class TestResolution(unittest.TestCase):
    """
    Tests for turning coefficients into concrete hyperparameters.
    """

    def test_rounding(self):
        """Test half-up rounding and the clamp to [1, n - 1]."""
        self.assertEqual(round_half_up(2.5), 3)
        self.assertEqual(round_half_up(2.49), 2)
        self.assertEqual(clamp_count(0.2, 10), 1)
        self.assertEqual(clamp_count(50, 10), 9)

    def test_alp_defaults(self):
        """Test that ALP defaults at n = 148 resolve to k = 27 and l = 30."""
        self.assertEqual(resolve_hyperparameters(DescriptorKind.ALP, None, 148, 4), {"k": 27, "l": 30})

    def test_lof_default(self):
        """Test that LOF at n = 20 resolves to k = 7."""
        self.assertEqual(resolve_hyperparameters(DescriptorKind.LOF, None, 20, 4), {"k": 7})

    def test_svm_width(self):
        """Test that the SVM width is c' m."""
        resolved = resolve_hyperparameters(DescriptorKind.SVM, None, 100, 10)
        self.assertAlmostEqual(resolved["c"], 2.5)
        self.assertEqual(resolved["nu"], 0.2)

    def test_isolation_defaults(self):
        """Test t = 100 and psi = min(256, n)."""
        self.assertEqual(resolve_hyperparameters(DescriptorKind.IF, None, 1000, 3), {"t": 100, "psi": 256})
        self.assertEqual(resolve_hyperparameters(DescriptorKind.EIF, None, 40, 3), {"t": 100, "psi": 40})

    def test_clamping_small_n(self):
        """Test that counts stay in [1, n - 1] for tiny training sets."""
        for n in (2, 3, 10):
            for kind in (DescriptorKind.LNND, DescriptorKind.LOF, DescriptorKind.ALP):
                with self.subTest(n=n, kind=kind):
                    for value in resolve_hyperparameters(kind, None, n, 2).values():
                        self.assertGreaterEqual(value, 1)
                        self.assertLessEqual(value, n - 1)
        self.assertEqual(resolve_hyperparameters(DescriptorKind.NND, {"k": 30}, 10, 2), {"k": 9})

    def test_clamping_is_logged(self):
        """Test that a clamped count is reported as a warning, once per count and size."""
        nearest_neighbour._warn_clamped.cache_clear()
        with self.assertLogs(nearest_neighbour.logger, level="WARNING") as logs:
            self.assertEqual(resolve_hyperparameters(DescriptorKind.NND, {"k": 41}, 12, 2), {"k": 11})
            resolve_hyperparameters(DescriptorKind.NND, {"k": 41}, 12, 2)
            NearestNeighbourDistance(k=7).fit(validate_matrix([[0.0], [1.0], [2.0]]))
        self.assertEqual(len(logs.records), 2)
        self.assertIn("41 clamped to 11 for n=12", logs.output[0])
        self.assertIn("7 clamped to 2 for n=3", logs.output[1])

    def test_unknown_coefficient(self):
        """Test that a coefficient the descriptor does not take is rejected."""
        with self.assertRaises(InvalidArgumentError):
            resolve_hyperparameters(DescriptorKind.NND, {"k_coef": 2.0}, 10, 2)
        with self.assertRaises(InvalidArgumentError):
            DescriptorSpec("md", {"nu": 0.1})

    def test_spec_builds_descriptor(self):
        """Test that a spec coerces its kind and builds a configured descriptor."""
        spec = DescriptorSpec("if", seed=9, options={"t": 5})
        self.assertIs(spec.kind, DescriptorKind.IF)
        descriptor = spec.build(50, 2)
        self.assertIsInstance(descriptor, IsolationForest)
        self.assertEqual((descriptor.t, descriptor.psi, descriptor.seed), (5, 50, 9))
        self.assertEqual(spec.with_coefficients({}).seed, 9)


class TestGrids(unittest.TestCase):
    """
    Tests for grid axes and default grids.
    """

    def test_axis_values(self):
        """Test the values along one axis, stop included."""
        axis = GridAxis("k_coef", 0.5, 0.8, 0.1, 3)
        np.testing.assert_array_equal(axis.values(), [0.5, 0.6, 0.7, 0.8])

    def test_default_shapes(self):
        """Test the default grid shape of every descriptor."""
        self.assertEqual(default_grid(DescriptorKind.NND).shape, (25,))
        self.assertEqual(default_grid(DescriptorKind.LOF).shape, (1151,))
        self.assertEqual(default_grid(DescriptorKind.SVM).shape, (10, 20))
        self.assertEqual(default_grid(DescriptorKind.ALP).shape, (116, 116))
        self.assertEqual(default_grid(DescriptorKind.MD).shape, ())
        self.assertEqual(list(default_grid(DescriptorKind.MD).points()), [{}])
        self.assertEqual(grid_names(DescriptorKind.ALP), ["k_coef", "l_coef"])

    def test_points_in_c_order(self):
        """Test that points vary the last axis fastest."""
        grid = HyperGrid((GridAxis("a", 0, 1, 1, 1), GridAxis("b", 0, 2, 1, 1)))
        points = list(grid.points())
        self.assertEqual(len(points), 6)
        self.assertEqual(points[1], {"a": 0.0, "b": 1.0})
        self.assertEqual(grid.point_at((1, 2)), {"a": 1.0, "b": 2.0})

    def test_override(self):
        """Test narrowing an axis, keeping resolution and window."""
        grid = default_grid(DescriptorKind.ALP).override({"k_coef": (1.0, 1.2)})
        self.assertEqual(grid.shape, (3, 116))
        self.assertEqual(grid.windows, (11, 11))
        with self.assertRaises(InvalidArgumentError):
            grid.override({"nu": (0.1, 0.2)})

    def test_invalid_axes(self):
        """Test even windows, zero resolution and reversed ranges."""
        with self.assertRaises(InvalidArgumentError):
            GridAxis("k", 1, 5, 1, 2)
        with self.assertRaises(InvalidArgumentError):
            GridAxis("k", 1, 5, 0, 1)
        with self.assertRaises(InvalidArgumentError):
            GridAxis("k", 5, 1, 1, 1)


if __name__ == "__main__":
    unittest.main()
