"""Declared-vs-detected group overlap."""
