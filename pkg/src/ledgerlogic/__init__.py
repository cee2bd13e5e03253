"""Contract-aware ledger engine with a temporal query language."""
