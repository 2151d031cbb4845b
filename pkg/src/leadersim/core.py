"""Core protocol types shared by the routing engine, codec and detector.

NodeId and Rank are plain 16-bit unsigned ints; the validators below are the
public constructors and every other module goes through them.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

NodeId = int
Rank = int

# 0xFFFF is reserved: a node advertising it is not part of any DODAG.
INFINITE_RANK: Rank = 0xFFFF

MIN_HOP_RANK_INCREASE = 256
ROOT_RANK = 256
# Hysteresis factor for parent switching, exactly 3/2.
PARENT_SWITCHING_THRESHOLD = 1.5

KEY_BYTES = 16
MAC_BYTES = 12


class CoreError(ValueError):
    pass


class RankOverflow(CoreError):
    """Raised when a computed rank no longer fits in 16 bits."""


def make_node_id(value: int) -> NodeId:
    if not 0 <= value <= 0xFFFF:
        raise CoreError(f"node id out of range: {value}")
    return value


def make_rank(value: int) -> Rank:
    """Validate a finite rank: 0 < value <= 0xFFFF."""
    if not 0 < value <= 0xFFFF:
        raise CoreError(f"rank out of range: {value}")
    return value


def make_etx(value: float) -> float:
    if value < 1.0:
        raise CoreError(f"ETX below 1.0: {value}")
    return float(value)


@dataclass(frozen=True)
class RplConstants:
    """Protocol constants; defaults match a 256-per-hop rank scale."""

    min_hop_rank_increase: int = MIN_HOP_RANK_INCREASE
    parent_switching_threshold: float = PARENT_SWITCHING_THRESHOLD
    root_rank: Rank = ROOT_RANK
    dio_interval: float = 60.0
    dao_refresh_interval: float = 120.0

    def switch_margin(self) -> float:
        """Rank improvement required before abandoning the current parent."""
        return self.parent_switching_threshold * self.min_hop_rank_increase


@dataclass(frozen=True)
class SecretKey:
    """16-byte shared key, split into an inner and an outer half."""

    data: bytes

    def __post_init__(self) -> None:
        if len(self.data) != KEY_BYTES:
            raise CoreError(f"key must be {KEY_BYTES} bytes, got {len(self.data)}")

    @property
    def inner(self) -> bytes:
        return self.data[:8]

    @property
    def outer(self) -> bytes:
        return self.data[8:]


@dataclass(frozen=True)
class MacTag:
    """96-bit authentication tag carried in the extended DAO transit option."""

    data: bytes

    def __post_init__(self) -> None:
        if len(self.data) != MAC_BYTES:
            raise CoreError(f"tag must be {MAC_BYTES} bytes, got {len(self.data)}")


@dataclass(frozen=True)
class DioMessage:
    sender: NodeId
    advertised_rank: Rank
    dodag_version: int = 1

    def __post_init__(self) -> None:
        if self.advertised_rank == 0:
            raise CoreError("DIO cannot advertise rank 0")


@dataclass(frozen=True)
class DisMessage:
    sender: NodeId


@dataclass(frozen=True)
class TransitInfo:
    """Payload of the extended transit option, before wire encoding.

    parent_rank and rank are kept as raw ints here: the codec must round-trip
    tampered frames byte-for-byte, so semantic validation happens later.
    """

    parent_rank: int
    rank: int
    mac: MacTag
    path_control: int = 0
    path_sequence: int = 0
    path_lifetime: int = 0xFF
    e_flag: bool = False
    flags: int = 0


@dataclass(frozen=True)
class DaoMessage:
    origin: NodeId
    target_parent: NodeId
    transit: TransitInfo
    path_sequence: int = 0


class Verdict(enum.Enum):
    ACCEPTED = "accepted"
    DISCARDED = "discarded"
    MALICIOUS = "malicious"


class MaliciousCause(enum.Enum):
    DECREASED_RANK = "decreased_rank"
    INCREASED_RANK = "increased_rank"
    CHILD_PARENT_RANK_MISMATCH = "child_parent_rank_mismatch"


@dataclass(frozen=True)
class DetectionOutcome:
    """Sink-side verdict for one processed DAO.

    cause is set only for MALICIOUS verdicts and carries exactly one reason.
    implicated lists nodes flagged while processing this DAO; it can name a
    node other than the DAO origin when a child report contradicts its parent.
    """

    verdict: Verdict
    cause: MaliciousCause | None = None
    implicated: tuple[tuple[NodeId, MaliciousCause], ...] = field(default=())

    def __post_init__(self) -> None:
        if self.verdict is Verdict.MALICIOUS and self.cause is None:
            raise CoreError("malicious verdict requires a cause")
        if self.verdict is not Verdict.MALICIOUS and self.cause is not None:
            raise CoreError("cause only valid for malicious verdicts")
