"""
Tests for the configuration module.
"""
import sys
import os
import unittest
from unittest.mock import patch

# Add the src directory to the Python path
sys.path.insert(0, os.path.abspath(os.path.dirname(os.path.dirname(__file__))))

from src.occkit.config import Config, RunConfig
from src.occkit.exceptions import InvalidArgumentError


class TestConfig(unittest.TestCase):
    """
    Tests for Config and RunConfig.
    """

    def test_from_env(self):
        """Test reading every OCCKIT_* variable."""
        env = {
            "OCCKIT_SEED": "42",
            "OCCKIT_THREADS": "3",
            "OCCKIT_PROGRESS": "false",
            "OCCKIT_LOG_LEVEL": "debug",
            "OCCKIT_METRIC": "Euclidean",
        }
        with patch.dict(os.environ, env):
            config = Config.from_env()
        self.assertEqual(config.seed, 42)
        self.assertEqual(config.threads, 3)
        self.assertFalse(config.show_progress)
        self.assertEqual(config.log_level, "DEBUG")
        self.assertEqual(config.metric, "euclidean")
        self.assertIsNone(config.validate())

    def test_validate(self):
        """Test the message for each invalid setting."""
        self.assertIn("Seed", Config(seed=-1).validate())
        self.assertIn("Thread", Config(threads=0).validate())
        self.assertIn("cosine", Config(metric="cosine").validate())
        self.assertIn("Log level", Config(log_level="LOUD").validate())
        self.assertIsNotNone(Config(n_folds=1).validate())

    def test_run_config_layers_options(self):
        """Test that command-line options override the configuration and None falls back."""
        config = Config(seed=7, threads=2)
        run = RunConfig.from_options(
            "eval", config, seed=None, metric="EUCLIDEAN", coefficients={"k": 3, "nu": None}, descriptor="nnd"
        )
        self.assertEqual((run.seed, run.threads, run.metric), (7, 2, "euclidean"))
        self.assertEqual(run.coefficients, {"k": 3})
        self.assertEqual(run.to_dict()["descriptor"], "nnd")

    def test_malformed_env_integers(self):
        """Test that non-integer OCCKIT_SEED and OCCKIT_THREADS are reported by validate."""
        with patch.dict(os.environ, {"OCCKIT_SEED": "abc", "OCCKIT_THREADS": "2"}):
            config = Config.from_env()
        self.assertEqual(config.seed, 0)
        self.assertEqual(config.validate(), "OCCKIT_SEED must be an integer, got 'abc'.")

        with patch.dict(os.environ, {"OCCKIT_SEED": "1", "OCCKIT_THREADS": "many"}):
            self.assertIn("OCCKIT_THREADS", Config.from_env().validate())

    def test_negative_seed_option(self):
        """Test that a negative --seed is an invalid argument."""
        with self.assertRaises(InvalidArgumentError):
            RunConfig.from_options("eval", Config(), seed=-1, metric=None)


if __name__ == "__main__":
    unittest.main()
