"""Descriptive analyses of metric tables."""
