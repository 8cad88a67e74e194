"""Run manifests for reproducible reports."""
