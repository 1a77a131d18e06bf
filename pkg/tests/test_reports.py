"""
Tests for evaluation reports and descriptor comparison.
"""
import sys
import os
import unittest

# Add the src directory to the Python path
sys.path.insert(0, os.path.abspath(os.path.dirname(os.path.dirname(__file__))))

from src.occkit.exceptions import InvalidArgumentError
from src.occkit.reports import (
    DescriptorReport,
    EvalReport,
    TaskResult,
    best_pairs,
    compare_descriptors,
    median_auroc,
    rank_descriptors,
    summarise,
)


def task(dataset_id, label, mean):
    return TaskResult(dataset_id, label, [mean] * 5, mean, 0.0, n_target=20, n_other=10, m=2)


def report(name, means):
    """means: {(dataset, label): mean}"""
    return DescriptorReport(name, {}, [task(d, l, v) for (d, l), v in sorted(means.items())])


class TestReports(unittest.TestCase):
    """
    Tests for report aggregation and comparison statistics.
    """

    def setUp(self):
        self.alp = report("alp", {("A", "x"): 0.9, ("A", "y"): 0.7, ("B", "z"): 0.6})
        self.nnd = report("nnd", {("A", "x"): 0.8, ("A", "y"): 0.7, ("B", "z"): 0.9})
        self.md = report("md", {("A", "x"): 0.5, ("A", "y"): 0.5, ("B", "z"): 0.5})

    def test_dataset_means_and_overall(self):
        """Test class means per dataset and their mean overall."""
        means = self.alp.dataset_means()
        self.assertEqual(list(means), ["A", "B"])
        self.assertAlmostEqual(means["A"], 0.8)
        self.assertAlmostEqual(means["B"], 0.6)
        self.assertAlmostEqual(self.alp.overall(), 0.7)
        self.assertIsNone(DescriptorReport("md", {}).overall())

    def test_mean_ranks(self):
        """Test ranks with a tie on one task: alp and nnd share rank 1.5 there."""
        ranks = rank_descriptors([self.alp, self.nnd, self.md])
        # A: x -> alp 1, nnd 2; y -> alp 1.5, nnd 1.5; B: z -> nnd 1, alp 2
        self.assertAlmostEqual(ranks["alp"], ((1 + 1.5) / 2 + 2) / 2)
        self.assertAlmostEqual(ranks["nnd"], ((2 + 1.5) / 2 + 1) / 2)
        self.assertAlmostEqual(ranks["md"], 3.0)

    def test_best_pairs(self):
        """Test the best-of-two aggregate for each descriptor pair."""
        pairs = best_pairs([self.alp, self.nnd, self.md])
        self.assertEqual(pairs[0]["pair"], ["alp", "nnd"])
        self.assertAlmostEqual(pairs[0]["auroc"], ((0.9 + 0.7) / 2 + 0.9) / 2)
        self.assertEqual(len(pairs), 3)

    def test_median(self):
        """Test the per-task median across descriptors."""
        medians = median_auroc([self.alp, self.nnd, self.md])
        self.assertEqual(medians, {"A/x": 0.8, "A/y": 0.7, "B/z": 0.6})

    def test_comparison_needs_shared_tasks(self):
        """Test that comparing needs reports over the same tasks."""
        with self.assertRaises(InvalidArgumentError):
            compare_descriptors([])
        other = report("lof", {("C", "w"): 0.5})
        with self.assertRaises(InvalidArgumentError):
            compare_descriptors([self.alp, other])

    def test_dict_round_trip(self):
        """Test converting a report to and from a dictionary."""
        original = EvalReport(seed=3, metric="manhattan", descriptors=[self.alp, self.nnd])
        original.comparison = compare_descriptors(original.descriptors)
        data = original.to_dict()
        self.assertEqual(EvalReport.from_dict(data).to_dict(), data)
        self.assertEqual(data["rng"], "PCG64")

    def test_summary(self):
        """Test the text summary, skipped classes included."""
        text = summarise(EvalReport(3, "manhattan", [self.alp], skipped=[
            {"dataset_id": "C", "target_label": "w", "reason": "3 target rows, at least 10 needed"}
        ]))
        self.assertIn("alp: weighted mean AUROC 0.7000 over 3 task(s)", text)
        self.assertIn("skipped C/w", text)


if __name__ == "__main__":
    unittest.main()
