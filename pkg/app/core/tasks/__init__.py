"""Experiment runners and synthetic data."""
