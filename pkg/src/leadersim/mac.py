"""Keyed 96-bit authentication for DAO rank fields.

The tag construction is H(outer_key || H(inner_key || message)) with the
16-byte shared key split 8/8. The hash behind it is pluggable; the default
stand-in truncates SHA-256 to 12 bytes. A deployment on constrained hardware
would swap in a lightweight embedded hash behind the same interface.
"""

from __future__ import annotations

import hashlib
import struct
from typing import Protocol

from .core import MacTag, NodeId, Rank, SecretKey, MAC_BYTES


class HashFunction(Protocol):
    def digest(self, data: bytes) -> bytes:
        """Hash data to exactly 12 bytes."""
        ...


class Sha256Trunc96:
    """Default stand-in hash: SHA-256 truncated to 96 bits."""

    def digest(self, data: bytes) -> bytes:
        return hashlib.sha256(data).digest()[:MAC_BYTES]


DEFAULT_HASH = Sha256Trunc96()


def tuple_bytes(node_id: NodeId, node_rank: Rank, parent_id: NodeId, parent_rank: Rank) -> bytes:
    """Serialize the authenticated 4-tuple as four big-endian u16s."""
    return struct.pack(">HHHH", node_id, node_rank, parent_id, parent_rank)


def hmac_tag(message: bytes, key: SecretKey, hash_fn: HashFunction = DEFAULT_HASH) -> MacTag:
    """Two-pass keyed tag over message using the split halves of key."""
    inner = hash_fn.digest(key.inner + message)
    tag = hash_fn.digest(key.outer + inner)
    if len(tag) != MAC_BYTES:
        raise ValueError(f"hash produced {len(tag)} bytes, need {MAC_BYTES}")
    return MacTag(tag)


def rank_tuple_tag(
    node_id: NodeId,
    node_rank: Rank,
    parent_id: NodeId,
    parent_rank: Rank,
    key: SecretKey,
    hash_fn: HashFunction = DEFAULT_HASH,
) -> MacTag:
    """Tag the (node, rank, parent, parent rank) tuple a DAO advertises."""
    return hmac_tag(tuple_bytes(node_id, node_rank, parent_id, parent_rank), key, hash_fn)
