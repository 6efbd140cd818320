"""Discourse-marker mining toolkit.

Discovers sentence-initial discourse markers from sentence-pair streams,
filters and labels pairs with them, audits marker predictability with a
shallow hashed-n-gram classifier, and emits balanced dataset variants with
reproducible manifests.
"""

__version__ = "0.1.0"

FORMAT_VERSIONS = {
    "classifier_model (DMLC)": 1,
    "tagger_model (DMPT)": 1,
    "report_schema": 1,
    "manifest_schema": 1,
}
