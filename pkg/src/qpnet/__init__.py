"""Symbolic inference in noisy AND-OR-NOT Bayesian networks via
quasi-probabilities."""

__version__ = "0.1.0"
