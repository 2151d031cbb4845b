"""Non-storing-mode DODAG maintenance: rank computation and parent selection.

State transitions are driven by the simulator handing DIO/DIS messages to the
functions below; they mutate the passed-in NodeState and return the control
messages the node wants sent in response.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .core import (
    INFINITE_RANK,
    DaoMessage,
    DioMessage,
    DisMessage,
    NodeId,
    Rank,
    RankOverflow,
    RplConstants,
    SecretKey,
)
from .detector import prepare_transit_fields


class RplError(Exception):
    pass


class NoCandidates(RplError):
    pass


class NotJoined(RplError):
    pass


@dataclass
class NodeState:
    node_id: NodeId
    is_root: bool = False
    rank: Rank = INFINITE_RANK
    preferred_parent: NodeId | None = None
    parent_rank: Rank | None = None
    # sender -> (advertised rank, link ETX)
    candidates: dict[NodeId, tuple[Rank, float]] = field(default_factory=dict)
    path_sequence: int = 0

    @property
    def joined(self) -> bool:
        return self.rank != INFINITE_RANK

    @classmethod
    def root(cls, node_id: NodeId, consts: RplConstants) -> "NodeState":
        return cls(node_id=node_id, is_root=True, rank=consts.root_rank)


@dataclass(frozen=True)
class SendDao:
    """Ask the harness to send this node's DAO toward the sink."""


@dataclass(frozen=True)
class BroadcastDio:
    rank: Rank


Action = SendDao | BroadcastDio


def compute_rank(parent_rank: Rank, etx: float, consts: RplConstants) -> Rank:
    """Rank through a parent: parent rank plus the ETX-scaled hop increment."""
    result = parent_rank + round(etx * consts.min_hop_rank_increase)
    if result >= INFINITE_RANK:
        raise RankOverflow(f"rank {result} exceeds the 16-bit finite range")
    return result


@dataclass(frozen=True)
class ParentChoice:
    parent: NodeId
    parent_rank: Rank
    etx: float
    rank: Rank


def select_parent(
    candidates: list[tuple[NodeId, Rank, float]],
    consts: RplConstants,
    current_parent: NodeId | None = None,
) -> ParentChoice:
    """Pick the parent minimizing the resulting rank.

    Ties go to the lower advertised rank, then the lower node id. A current
    parent is kept unless some candidate beats it by more than the switching
    margin; rank updates through the same parent always apply.
    """
    usable: list[ParentChoice] = []
    for node_id, advertised, etx in candidates:
        if advertised == INFINITE_RANK:
            continue
        try:
            rank = compute_rank(advertised, etx, consts)
        except RankOverflow:
            continue
        usable.append(ParentChoice(node_id, advertised, etx, rank))
    if not usable:
        raise NoCandidates("no usable parent candidates")
    usable.sort(key=lambda c: (c.rank, c.parent_rank, c.parent))
    best = usable[0]
    if current_parent is not None:
        current = next((c for c in usable if c.parent == current_parent), None)
        if current is not None and current.rank - best.rank <= consts.switch_margin():
            return current
    return best


def handle_dio(state: NodeState, dio: DioMessage, etx: float, consts: RplConstants) -> list[Action]:
    """Absorb a DIO; on a join, rank change or parent switch, answer with
    a fresh DAO and a DIO advertising the new rank."""
    if state.is_root or dio.sender == state.node_id:
        return []
    if dio.advertised_rank == INFINITE_RANK:
        state.candidates.pop(dio.sender, None)
        return []
    state.candidates[dio.sender] = (dio.advertised_rank, etx)
    try:
        choice = select_parent(
            [(nid, rank, link) for nid, (rank, link) in state.candidates.items()],
            consts,
            current_parent=state.preferred_parent,
        )
    except NoCandidates:
        return []
    if choice.parent == state.preferred_parent and choice.rank == state.rank:
        return []
    state.preferred_parent = choice.parent
    state.parent_rank = choice.parent_rank
    state.rank = choice.rank
    return [SendDao(), BroadcastDio(choice.rank)]


def handle_dis(state: NodeState, dis: DisMessage, consts: RplConstants) -> list[Action]:
    """A solicitation from a neighbor; joined nodes re-advertise."""
    if state.joined:
        return [BroadcastDio(state.rank)]
    return []


def build_dao(state: NodeState, key: SecretKey) -> DaoMessage:
    """Assemble this node's authenticated DAO for the sink."""
    if state.is_root:
        raise NotJoined("the root does not send DAOs")
    if not state.joined or state.preferred_parent is None or state.parent_rank is None:
        raise NotJoined(f"node {state.node_id} has no parent yet")
    state.path_sequence = (state.path_sequence + 1) & 0xFF
    transit = prepare_transit_fields(
        node_id=state.node_id,
        node_rank=state.rank,
        parent_id=state.preferred_parent,
        parent_rank=state.parent_rank,
        key=key,
        path_sequence=state.path_sequence,
    )
    return DaoMessage(
        origin=state.node_id,
        target_parent=state.preferred_parent,
        transit=transit,
        path_sequence=state.path_sequence,
    )
