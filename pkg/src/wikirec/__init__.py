"""Recommendation engine that matches newcomer editors to wiki project groups.

The package covers the full loop: trace ingestion, per-editor profiling,
four ranking algorithms (rule, category, bonds, co-edit), weekly batch
generation with a dedupe ledger, organizer feedback capture, and the
evaluation metrics (invitation rates, ratings, matched-baseline impact).
"""

__version__ = "0.1.0"
