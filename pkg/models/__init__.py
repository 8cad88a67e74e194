"""Data models for interactions, groups, term bags and metric records."""
