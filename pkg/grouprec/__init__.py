"""Consensus-based group recommendation with lazy greedy selection."""

__version__ = "0.1.0"
