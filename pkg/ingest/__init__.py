"""Corpus ingestion from TSV files."""
