"""
utils/fingerprint.py — Content digests for graphs.
"""

import hashlib


def graph_fingerprint(edge_list_text: str) -> str:
    """Digest of the canonical edge-list text; equal graphs share a fingerprint."""
    return "sha256:" + hashlib.sha256(edge_list_text.encode()).hexdigest()[:16]
