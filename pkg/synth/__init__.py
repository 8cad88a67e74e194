"""Synthetic corpora and randomization baselines."""
