"""Group-level views of the interaction graph."""
