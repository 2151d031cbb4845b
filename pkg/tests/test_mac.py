"""Tag construction: layout, determinism, and sensitivity to every input."""

import hashlib
import struct

import pytest
from hypothesis import given
from hypothesis import strategies as st

from leadersim.core import SecretKey
from leadersim.mac import Sha256Trunc96, hmac_tag, rank_tuple_tag, tuple_bytes

ids = st.integers(min_value=0, max_value=0xFFFF)
ranks = st.integers(min_value=1, max_value=0xFFFF)


def reference_tag(message: bytes, key: SecretKey) -> bytes:
    # Independent restatement of the two-pass construction.
    inner = hashlib.sha256(key.data[:8] + message).digest()[:12]
    return hashlib.sha256(key.data[8:] + inner).digest()[:12]


def test_tuple_layout_is_four_big_endian_words():
    assert tuple_bytes(1, 256, 0, 256) == struct.pack(">HHHH", 1, 256, 0, 256)
    assert tuple_bytes(1, 256, 0, 256) == bytes.fromhex("0001010000000100")
    assert len(tuple_bytes(0xFFFF, 0xFFFF, 0xFFFF, 0xFFFF)) == 8


def test_tag_matches_reference_construction(key):
    msg = tuple_bytes(7, 1024, 3, 768)
    assert hmac_tag(msg, key).data == reference_tag(msg, key)


def test_tag_is_96_bits(key):
    assert len(rank_tuple_tag(1, 512, 0, 256, key).data) == 12


def test_same_inputs_same_tag(key):
    a = rank_tuple_tag(5, 768, 2, 512, key)
    b = rank_tuple_tag(5, 768, 2, 512, key)
    assert a == b


@given(node=ids, rank=ranks, parent=ids, parent_rank=ranks)
def test_property_tag_matches_reference(node, rank, parent, parent_rank):
    key = SecretKey(b"0123456789abcdef")
    tag = rank_tuple_tag(node, rank, parent, parent_rank, key)
    assert tag.data == reference_tag(tuple_bytes(node, rank, parent, parent_rank), key)


@pytest.mark.parametrize("field", range(4))
def test_every_tuple_field_changes_the_tag(key, field):
    base = [5, 768, 2, 512]
    other = list(base)
    other[field] += 1
    assert rank_tuple_tag(*base, key) != rank_tuple_tag(*other, key)


def test_key_changes_the_tag():
    k1 = SecretKey(bytes(16))
    k2 = SecretKey(bytes(15) + b"\x01")
    assert rank_tuple_tag(1, 512, 0, 256, k1) != rank_tuple_tag(1, 512, 0, 256, k2)


def test_inner_and_outer_halves_both_matter():
    base = SecretKey(bytes(16))
    flip_inner = SecretKey(b"\x01" + bytes(15))
    flip_outer = SecretKey(bytes(8) + b"\x01" + bytes(7))
    msg = tuple_bytes(1, 512, 0, 256)
    tags = {hmac_tag(msg, k).data for k in (base, flip_inner, flip_outer)}
    assert len(tags) == 3


def test_pluggable_hash_is_used(key):
    class XorHash:
        def digest(self, data: bytes) -> bytes:
            out = bytearray(12)
            for i, b in enumerate(data):
                out[i % 12] ^= b
            return bytes(out)

    msg = tuple_bytes(1, 512, 0, 256)
    assert hmac_tag(msg, key, XorHash()) != hmac_tag(msg, key, Sha256Trunc96())


def test_bad_hash_width_rejected(key):
    class ShortHash:
        def digest(self, data: bytes) -> bytes:
            return hashlib.sha256(data).digest()[:8]

    with pytest.raises(ValueError):
        hmac_tag(b"x", key, ShortHash())
