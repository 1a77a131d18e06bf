"""
Tests for saving and loading fitted models.
"""
import sys
import os
import struct
import tempfile
import unittest
from pathlib import Path

import numpy as np

# Add the src directory to the Python path
sys.path.insert(0, os.path.abspath(os.path.dirname(os.path.dirname(__file__))))

from src.occkit.descriptors import DescriptorKind
from src.occkit.exceptions import DataFileError
from src.occkit.hyperparameters import DescriptorSpec
from src.occkit.model_io import FORMAT_VERSION, MAGIC, decode_model, encode_model, load_model, save_model
from src.occkit.models import validate_matrix
from src.occkit.preprocessing import apply_scaler, fit_iqr_scaler, scale_queries


class TestModelIo(unittest.TestCase):
    """
    Tests for the model container.
    """

    def setUp(self):
        rng = np.random.default_rng(17)
        raw = validate_matrix(rng.normal(size=(60, 3)) * [1.0, 4.0, 0.5])
        self.scaler = fit_iqr_scaler(raw)
        self.train = apply_scaler(self.scaler, raw)
        self.queries = rng.normal(scale=2.0, size=(25, 3))
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def fit(self, kind):
        spec = DescriptorSpec(kind, seed=4, options={"t": 10} if kind in ("if", "eif") else {})
        return spec.build(self.train.n, self.train.m).fit(self.train)

    def test_round_trip_every_kind(self):
        """Test that a reloaded model scores queries identically."""
        for kind in DescriptorKind:
            with self.subTest(kind=kind.value):
                description = self.fit(kind)
                path = save_model(self.dir / f"{kind.value}.occ", description, self.scaler, {"seed": 4})
                loaded = load_model(path)
                self.assertEqual(loaded.kind, kind.value)
                self.assertEqual(loaded.header["seed"], 4)
                np.testing.assert_array_equal(loaded.scaler.scale, self.scaler.scale)
                expected = description.score_many(scale_queries(self.scaler, self.queries))
                actual = loaded.description.score_many(scale_queries(loaded.scaler, self.queries))
                np.testing.assert_array_equal(actual, expected)

    def test_encoding_is_deterministic(self):
        """Test that encoding the same model twice gives the same bytes."""
        description = self.fit("alp")
        self.assertEqual(encode_model(description, self.scaler), encode_model(description, self.scaler))

    def test_bad_magic(self):
        """Test that a foreign file is refused."""
        data = encode_model(self.fit("nnd"), self.scaler)
        with self.assertRaises(DataFileError):
            decode_model(b"NOTOCC\0\0" + data[len(MAGIC):])

    def test_newer_version(self):
        """Test that a newer format version is refused."""
        data = bytearray(encode_model(self.fit("nnd"), self.scaler))
        struct.pack_into("<H", data, len(MAGIC), FORMAT_VERSION + 1)
        with self.assertRaises(DataFileError) as ctx:
            decode_model(bytes(data))
        self.assertIn("version", str(ctx.exception))

    def test_truncated(self):
        """Test that truncated files are refused."""
        data = encode_model(self.fit("md"), self.scaler)
        for cut in (len(MAGIC) + 2, len(data) - 8):
            with self.subTest(cut=cut):
                with self.assertRaises(DataFileError):
                    decode_model(data[:cut])

    def test_missing_file(self):
        """Test that a missing model file is a data file error."""
        with self.assertRaises(DataFileError):
            load_model(self.dir / "absent.occ")


if __name__ == "__main__":
    unittest.main()
