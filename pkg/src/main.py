"""
Main entry point for occkit.
"""
import os
import sys

# Add the src directory to the Python path
sys.path.insert(0, os.path.abspath(os.path.dirname(__file__)))

from occkit.cli import cli


if __name__ == "__main__":
    cli()
