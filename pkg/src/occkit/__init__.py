"""
occkit: one-class classification data descriptors and the benchmark protocol used to pick their defaults.
"""

__version__ = "0.1.0"
