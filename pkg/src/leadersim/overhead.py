"""Closed-form storage, communication and computation overhead calculator.

Compares the rank-authentication scheme implemented here (HMAC over the rank
tuple, 78-byte DAO) against an AES-based alternative (80-byte DAO). All cycle
sums are recomputed from the per-construct costs below; energy figures are
kept as exact rationals and rounded only for display.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from decimal import ROUND_HALF_EVEN, Decimal
from fractions import Fraction

from .wire import LEADER_DAO_BYTES, SBIDS_DAO_BYTES

# Measured per-construct CPU cycle costs on a 16-bit MSP430-class MCU.
CONSTRUCT_CYCLES = {
    "add": 4,
    "subtract": 4,
    "mov": 4,
    "xor": 4,
    "search": 69,
    "if_else": 10,
}

CYCLES_HMAC_96 = 6032
CYCLES_AES_ENC_PER_BYTE = 1891
CYCLES_AES_DEC_PER_BYTE = 2406
AES_MESSAGE_BYTES = 80

# Radio and CPU energy on a Tmote Sky class board.
TX_MILLIJOULE_PER_BYTE = Fraction(189, 100_000)  # 0.00189 mJ
RX_MILLIJOULE_PER_BYTE = Fraction(167, 100_000)  # 0.00167 mJ
NANOJOULE_PER_CYCLE = Fraction(27, 40)  # 0.675 nJ

# Rank-check constructs the sink runs per verified DAO, beyond the MAC itself.
HMAC_SINK_CONSTRUCTS = {"if_else": 8, "mov": 9, "add": 3, "search": 2}
AES_SINK_CONSTRUCTS = {"if_else": 7, "mov": 4, "add": 3, "search": 3}

# Per-device storage components, in bytes.
KEY_STORAGE_BYTES = 16
HASH_STATE_BYTES = 330  # substitution tables of the lightweight hash
AES_STATE_BYTES = 512  # AES S-box and inverse S-box
HMAC_TABLE_ENTRY_BYTES = 8  # four u16 fields per node at the sink
AES_TABLE_ENTRY_BYTES = 10  # the AES scheme's table keeps one extra u16

# Per-hop energy coefficients as published in the original comparison,
# pre-rounded to three decimals (exact values are 0.27768 and 0.2848).
PUBLISHED_COMM_COEFF = {"leader": Fraction(277, 1000), "sbids": Fraction(285, 1000)}


class Scheme(enum.Enum):
    LEADER = "leader"
    SBIDS = "sbids"


def construct_cycles(counts: dict[str, int]) -> int:
    """Total cycles for a bag of primitive constructs."""
    return sum(CONSTRUCT_CYCLES[name] * count for name, count in counts.items())


def sender_cycles(scheme: Scheme, message_bytes: int = AES_MESSAGE_BYTES) -> int:
    """Cycles a node spends securing one DAO before sending it."""
    if scheme is Scheme.LEADER:
        return CYCLES_HMAC_96
    return CYCLES_AES_ENC_PER_BYTE * message_bytes


def sink_cycles(scheme: Scheme, message_bytes: int = AES_MESSAGE_BYTES) -> int:
    """Cycles the sink spends verifying one DAO and running the rank checks."""
    if scheme is Scheme.LEADER:
        return CYCLES_HMAC_96 + construct_cycles(HMAC_SINK_CONSTRUCTS)
    return CYCLES_AES_DEC_PER_BYTE * message_bytes + construct_cycles(AES_SINK_CONSTRUCTS)


@dataclass(frozen=True)
class StorageOverhead:
    sink_bytes: int
    per_node_bytes: int
    node_count: int

    @property
    def total_bytes(self) -> int:
        return self.sink_bytes + self.node_count * self.per_node_bytes


def storage_overhead(n: int, scheme: Scheme) -> StorageOverhead:
    """Network-wide state for n non-root nodes plus the sink."""
    if n < 0:
        raise ValueError(f"node count must be non-negative: {n}")
    if scheme is Scheme.LEADER:
        entry, state = HMAC_TABLE_ENTRY_BYTES, HASH_STATE_BYTES
    else:
        entry, state = AES_TABLE_ENTRY_BYTES, AES_STATE_BYTES
    sink = entry * n + KEY_STORAGE_BYTES + state
    per_node = KEY_STORAGE_BYTES + state
    return StorageOverhead(sink_bytes=sink, per_node_bytes=per_node, node_count=n)


def dao_bytes(scheme: Scheme) -> int:
    return LEADER_DAO_BYTES if scheme is Scheme.LEADER else SBIDS_DAO_BYTES


@dataclass(frozen=True)
class CommEnergy:
    """Radio energy for one DAO traveling d hops to the sink, in mJ."""

    exact: Fraction
    published: Fraction

    @property
    def exact_mj(self) -> float:
        return float(self.exact)

    @property
    def published_mj(self) -> float:
        return float(self.published)


def comm_energy(d: int, scheme: Scheme) -> CommEnergy:
    if d < 0:
        raise ValueError(f"hop distance must be non-negative: {d}")
    per_byte = TX_MILLIJOULE_PER_BYTE + RX_MILLIJOULE_PER_BYTE
    exact = dao_bytes(scheme) * per_byte * d
    return CommEnergy(exact=exact, published=PUBLISHED_COMM_COEFF[scheme.value] * d)


@dataclass(frozen=True)
class CompEnergy:
    sender_cycles: int
    sink_cycles: int

    @property
    def total_cycles(self) -> int:
        return self.sender_cycles + self.sink_cycles

    @property
    def exact_nj(self) -> Fraction:
        return self.total_cycles * NANOJOULE_PER_CYCLE


def comp_energy(scheme: Scheme, message_bytes: int = AES_MESSAGE_BYTES) -> CompEnergy:
    """CPU energy to secure plus verify one DAO, recomputed from cycle costs."""
    return CompEnergy(
        sender_cycles=sender_cycles(scheme, message_bytes),
        sink_cycles=sink_cycles(scheme, message_bytes),
    )


@dataclass(frozen=True)
class Tolerance:
    """Detectable-attacker bounds on a complete m-ary tree of depth D."""

    node_count: int
    decreased_max: int
    increased_max: int


def tolerance(m: int, depth: int) -> Tolerance:
    """Attacker counts the detection rules can handle on an m-ary tree.

    Every non-root node may lower its rank and still be caught, so the
    decreased bound is n - 1. Catching a raised rank needs at least one
    honest child under every non-leaf node, which removes one node per
    internal vertex from the bound. m == 1 degenerates to a path.
    """
    if m < 1 or depth < 1:
        raise ValueError(f"need m >= 1 and depth >= 1, got m={m}, depth={depth}")
    if m > 0xFFFF or depth > 64:
        raise OverflowError(f"tree too large: m={m}, depth={depth}")
    if m == 1:
        n = depth + 1
        internal = depth
    else:
        n = (m ** (depth + 1) - 1) // (m - 1)
        internal = (m**depth - 1) // (m - 1)
    return Tolerance(node_count=n, decreased_max=n - 1, increased_max=n - 1 - internal)


def display_round(value: Fraction, places: int = 0) -> Decimal:
    """Half-even decimal rounding used for the energy display columns."""
    quantum = Decimal(1).scaleb(-places)
    dec = Decimal(value.numerator) / Decimal(value.denominator)
    return dec.quantize(quantum, rounding=ROUND_HALF_EVEN)


def exact_decimal(value: Fraction) -> str:
    """Exact decimal expansion; every constant here has a terminating one."""
    dec = Decimal(value.numerator) / Decimal(value.denominator)
    return format(dec.normalize(), "f")


def scheme_comparison(n: int, d: int) -> dict[str, dict[str, object]]:
    """Side-by-side overhead summary used by the CLI table renderer."""
    out: dict[str, dict[str, object]] = {}
    for scheme in Scheme:
        storage = storage_overhead(n, scheme)
        comm = comm_energy(d, scheme)
        comp = comp_energy(scheme)
        out[scheme.value] = {
            "dao_bytes": dao_bytes(scheme),
            "storage_total_bytes": storage.total_bytes,
            "storage_sink_bytes": storage.sink_bytes,
            "storage_per_node_bytes": storage.per_node_bytes,
            "comm_exact_mj": comm.exact,
            "comm_published_mj": comm.published,
            "comp_sender_cycles": comp.sender_cycles,
            "comp_sink_cycles": comp.sink_cycles,
            "comp_exact_nj": comp.exact_nj,
        }
    return out
