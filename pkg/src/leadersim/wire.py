"""Byte-level codec for DAO messages carrying the extended transit option.

Layout (all integers big-endian), total 78 bytes for the extended format:

    offset  size  field
    0       4     DAO base: instance id, flags (K|D), reserved, sequence
    4       16    DODAG id (address of the root)
    20      20    target option: type=0x05, len=18, flags, prefix len, prefix
    40      38    transit option: type=0x06, len=36, E|flags, path control,
                  path sequence, path lifetime, 16-byte parent address,
                  then the 16 added bytes: parent rank u16, rank u16, 12-byte MAC

The unextended transit option is 22 bytes (len=20), giving a 62-byte DAO.
Node addresses are a fixed 12-byte prefix plus the node id as u32; decoding
reads only the id and leaves prefix bytes unvalidated so that tampered frames
still parse and get rejected by the MAC check rather than a parse error.
See docs/wire-format.md for the field-by-field reference.
"""

from __future__ import annotations

import enum
import struct
from dataclasses import dataclass

from .core import DaoMessage, MacTag, NodeId, TransitInfo, MAC_BYTES

OPTION_TYPE_TARGET = 0x05
OPTION_TYPE_TRANSIT = 0x06

# Option length counts bytes after the length field itself.
TRANSIT_BASE_OPTION_LEN = 20
TRANSIT_EXT_OPTION_LEN = TRANSIT_BASE_OPTION_LEN + 16

BASE_DAO_BYTES = 62
LEADER_DAO_BYTES = BASE_DAO_BYTES + 16
SBIDS_DAO_BYTES = 80  # modeled size of the AES-based scheme's DAO

ADDRESS_PREFIX = b"\xfd\x00" + b"\x00" * 10

# Byte ranges of the authenticated 4-tuple inside the 78-byte frame,
# used by tamper tests that flip bits in transit.
ORIGIN_ID_RANGE = (36, 40)
PARENT_ID_RANGE = (58, 62)
PARENT_RANK_RANGE = (62, 64)
RANK_RANGE = (64, 66)

_DAO_FLAG_D = 0x40  # DODAG id present


class DaoFormat(enum.Enum):
    BASE = "base"
    LEADER = "leader"
    SBIDS = "sbids"


class WireError(ValueError):
    pass


class TruncatedOption(WireError):
    pass


class BadOptionType(WireError):
    pass


def node_address(node_id: NodeId) -> bytes:
    return ADDRESS_PREFIX + struct.pack(">I", node_id)


def address_node_id(address: bytes) -> NodeId:
    if len(address) != 16:
        raise WireError(f"address must be 16 bytes, got {len(address)}")
    return struct.unpack(">I", address[12:])[0] & 0xFFFF


def encode_transit(transit: TransitInfo, parent_id: NodeId) -> bytes:
    """Encode the extended transit option (38 bytes on the wire)."""
    head = struct.pack(
        ">BBBBBB",
        OPTION_TYPE_TRANSIT,
        TRANSIT_EXT_OPTION_LEN,
        (0x80 if transit.e_flag else 0) | (transit.flags & 0x7F),
        transit.path_control & 0xFF,
        transit.path_sequence & 0xFF,
        transit.path_lifetime & 0xFF,
    )
    tail = struct.pack(">HH", transit.parent_rank, transit.rank) + transit.mac.data
    return head + node_address(parent_id) + tail


def decode_transit(data: bytes) -> tuple[TransitInfo, NodeId]:
    """Decode an extended transit option; returns the fields and parent id."""
    if len(data) < 2:
        raise TruncatedOption(f"option header needs 2 bytes, got {len(data)}")
    opt_type, opt_len = data[0], data[1]
    if opt_type != OPTION_TYPE_TRANSIT:
        raise BadOptionType(f"expected transit option 0x06, got 0x{opt_type:02x}")
    if opt_len != TRANSIT_EXT_OPTION_LEN:
        raise BadOptionType(f"expected option length {TRANSIT_EXT_OPTION_LEN}, got {opt_len}")
    if len(data) < 2 + opt_len:
        raise TruncatedOption(f"option claims {opt_len} payload bytes, have {len(data) - 2}")
    flags_byte = data[2]
    parent_id = address_node_id(data[6:22])
    parent_rank, rank = struct.unpack(">HH", data[22:26])
    mac = MacTag(data[26 : 26 + MAC_BYTES])
    transit = TransitInfo(
        parent_rank=parent_rank,
        rank=rank,
        mac=mac,
        path_control=data[3],
        path_sequence=data[4],
        path_lifetime=data[5],
        e_flag=bool(flags_byte & 0x80),
        flags=flags_byte & 0x7F,
    )
    return transit, parent_id


def encode_dao(dao: DaoMessage, dodag_root: NodeId = 0) -> bytes:
    """Encode a full extended-format DAO; always 78 bytes."""
    base = struct.pack(">BBBB", 0, _DAO_FLAG_D, 0, dao.path_sequence & 0xFF)
    target = (
        struct.pack(">BBBB", OPTION_TYPE_TARGET, 18, 0, 128) + node_address(dao.origin)
    )
    frame = base + node_address(dodag_root) + target + encode_transit(dao.transit, dao.target_parent)
    assert len(frame) == LEADER_DAO_BYTES
    return frame


def decode_dao(data: bytes) -> DaoMessage:
    if len(data) < LEADER_DAO_BYTES:
        raise TruncatedOption(f"DAO needs {LEADER_DAO_BYTES} bytes, got {len(data)}")
    if data[20] != OPTION_TYPE_TARGET:
        raise BadOptionType(f"expected target option 0x05, got 0x{data[20]:02x}")
    origin = address_node_id(data[24:40])
    transit, parent_id = decode_transit(data[40:])
    return DaoMessage(
        origin=origin,
        target_parent=parent_id,
        transit=transit,
        path_sequence=data[3],
    )


def dao_total_size(dao: DaoMessage | None = None, fmt: DaoFormat = DaoFormat.LEADER) -> int:
    """On-the-wire byte count of a DAO in the given format."""
    if fmt is DaoFormat.LEADER:
        return len(encode_dao(dao)) if dao is not None else LEADER_DAO_BYTES
    if fmt is DaoFormat.BASE:
        return BASE_DAO_BYTES
    return SBIDS_DAO_BYTES
