"""
Test package for occkit.
"""
