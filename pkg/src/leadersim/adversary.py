"""Rank-attack adversary: pure transformations applied to a node's outgoing
messages once the attack is active. An inactive attacker's traffic is
byte-for-byte what an honest node would send."""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace

from .core import (
    INFINITE_RANK,
    DaoMessage,
    DioMessage,
    NodeId,
    Rank,
    RplConstants,
    SecretKey,
)
from .detector import prepare_transit_fields
from .mac import DEFAULT_HASH, HashFunction


class AttackKind(enum.Enum):
    DECREASED = "decreased"
    INCREASED = "increased"


class LieTarget(enum.Enum):
    SINK = "sink"  # false rank in the DAO, truthful DIOs
    NEIGHBORS = "neighbors"  # false rank in DIOs, truthful DAO


@dataclass(frozen=True)
class ImmediateOnJoin:
    """Attack runs from the moment the node joins the DODAG."""


@dataclass(frozen=True)
class Delayed:
    at: float  # simulated seconds


Onset = ImmediateOnJoin | Delayed


def default_delta(kind: AttackKind, consts: RplConstants) -> int:
    """Rank offsets that put the lie well past the detection boundaries."""
    if kind is AttackKind.DECREASED:
        return round(1.2 * consts.min_hop_rank_increase)
    return 4 * consts.min_hop_rank_increase


@dataclass(frozen=True)
class AttackSpec:
    node: NodeId
    kind: AttackKind
    delta_r: int
    onset: Onset = ImmediateOnJoin()
    lie_target: LieTarget = LieTarget.SINK
    # has_key False models an outsider who can rewrite rank bytes but cannot
    # re-tag them, leaving a stale MAC for the sink to discard.
    has_key: bool = True
    # Optional framing lie: report this value as the parent's rank in the DAO.
    forge_parent_rank: Rank | None = None
    # While active, silently drop data packets accepted for forwarding. The
    # point of claiming a better rank is to pull traffic in and kill it.
    drops_data: bool = True

    def __post_init__(self) -> None:
        if self.delta_r <= 0:
            raise ValueError(f"delta_r must be positive: {self.delta_r}")


def attack_active(spec: AttackSpec, now: float, join_time: float | None) -> bool:
    if isinstance(spec.onset, ImmediateOnJoin):
        return join_time is not None
    return now >= spec.onset.at


def advertised_rank(
    true_rank: Rank, spec: AttackSpec, now: float, join_time: float | None
) -> Rank:
    """Rank the attacker claims while active; floored at 1, capped finite."""
    if not attack_active(spec, now, join_time):
        return true_rank
    if spec.kind is AttackKind.DECREASED:
        return max(1, true_rank - spec.delta_r)
    return min(INFINITE_RANK - 1, true_rank + spec.delta_r)


def apply_to_dio(
    dio: DioMessage, spec: AttackSpec, now: float, join_time: float | None
) -> DioMessage:
    if spec.lie_target is not LieTarget.NEIGHBORS:
        return dio
    if not attack_active(spec, now, join_time):
        return dio
    return replace(dio, advertised_rank=advertised_rank(dio.advertised_rank, spec, now, join_time))


def apply_to_dao(
    dao: DaoMessage,
    spec: AttackSpec,
    key: SecretKey,
    now: float,
    join_time: float | None,
    hash_fn: HashFunction = DEFAULT_HASH,
) -> DaoMessage:
    """Falsify the DAO's rank fields when the attack targets the sink.

    An insider re-tags the modified tuple with the shared key, so the frame
    passes verification and only the rank checks can catch it. Without the
    key the original tag rides along and no longer matches.
    """
    if not attack_active(spec, now, join_time):
        return dao
    rank = dao.transit.rank
    parent_rank = dao.transit.parent_rank
    if spec.lie_target is LieTarget.SINK:
        rank = advertised_rank(rank, spec, now, join_time)
    if spec.forge_parent_rank is not None:
        parent_rank = spec.forge_parent_rank
    if rank == dao.transit.rank and parent_rank == dao.transit.parent_rank:
        return dao
    if spec.has_key:
        transit = prepare_transit_fields(
            node_id=dao.origin,
            node_rank=rank,
            parent_id=dao.target_parent,
            parent_rank=parent_rank,
            key=key,
            path_sequence=dao.transit.path_sequence,
            hash_fn=hash_fn,
        )
    else:
        transit = replace(dao.transit, rank=rank, parent_rank=parent_rank)
    return replace(dao, transit=transit)
