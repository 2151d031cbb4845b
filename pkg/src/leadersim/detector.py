"""Rank-attack detection: node-side DAO authentication and the sink pipeline.

Every node tags the (id, rank, parent id, parent rank) tuple it reports in
its DAO. The sink recomputes the tag, mirrors accepted tuples into an
information table, and flags a node as malicious when

  * its claimed rank is below its parent's rank plus the minimum hop
    increment (a lowered rank),
  * its claimed rank exceeds its parent's rank by more than the maximum
    feasible rank increase derived from the parent's children (a raised
    rank), or
  * the rank its children report for it contradicts what the node itself
    told the sink.

The child/parent cross-check compares a child's report against the lowest
rank the parent has ever claimed for itself, not the latest one. Ranks only
improve while a topology settles, so children's stale reports always sit at
or above the parent's best claim no matter how the refreshes race up the
DAO path, while a rank lowered for the neighbors' benefit sits strictly
below every truthful claim the liar sends the sink. Judging against the
newest claim alone would make ordinary churn look like a lie. A parent with
children but no verifiable claim on file at all is treated the same way:
staying silent (or failing authentication) must not exempt a node whose
neighbors keep routing through it.

A below-minimum report is still not flagged on sight. Relays forward DAOs
along their current parents, so while the tree is collapsing a child's
fresh report can overtake the parent's own claim of the same rank; the
contradiction is recorded as a suspicion and only becomes a verdict if it
still stands once a grace window has passed. An honest in-flight claim
lands within the window and dissolves the suspicion; a lie to neighbors
never gets backed by a claim, so it survives the window and is flagged.
With lossy links a claim can vanish outright and leave an honest suspicion
standing, so the grace should then be raised toward the DAO refresh
interval, trading detection delay for immunity to single losses.

The one blind spot is an inflated advertisement to neighbors: it lands in
the same region as stale honest reports and is not flagged here, but
inflating the advertised rank only drives children away, so it gains an
attacker nothing that the objective function does not already punish.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .core import (
    DaoMessage,
    DetectionOutcome,
    MaliciousCause,
    NodeId,
    Rank,
    RplConstants,
    SecretKey,
    TransitInfo,
    Verdict,
)
from .mac import DEFAULT_HASH, HashFunction, rank_tuple_tag


class DetectorError(Exception):
    pass


class NoChildren(DetectorError):
    pass


def prepare_transit_fields(
    node_id: NodeId,
    node_rank: Rank,
    parent_id: NodeId,
    parent_rank: Rank,
    key: SecretKey,
    path_sequence: int = 0,
    hash_fn: HashFunction = DEFAULT_HASH,
) -> TransitInfo:
    """Node side: tag the rank tuple and lay it out for the transit option."""
    mac = rank_tuple_tag(node_id, node_rank, parent_id, parent_rank, key, hash_fn)
    return TransitInfo(
        parent_rank=parent_rank,
        rank=node_rank,
        mac=mac,
        path_sequence=path_sequence,
    )


@dataclass(frozen=True)
class InfoTableEntry:
    node_id: NodeId
    node_rank: Rank
    parent_id: NodeId
    parent_rank: Rank
    updated_at: float


class InformationTable:
    """Sink-side mirror of the latest accepted rank tuple per node."""

    def __init__(self) -> None:
        self._entries: dict[NodeId, InfoTableEntry] = {}

    def __len__(self) -> int:
        return len(self._entries)

    def get(self, node_id: NodeId) -> InfoTableEntry | None:
        return self._entries.get(node_id)

    def upsert(self, entry: InfoTableEntry) -> None:
        self._entries[entry.node_id] = entry

    def entries(self) -> list[InfoTableEntry]:
        return sorted(self._entries.values(), key=lambda e: e.node_id)

    def children_of(self, parent_id: NodeId) -> list[InfoTableEntry]:
        return [e for e in self.entries() if e.parent_id == parent_id]

    def child_reported_parent_ranks(self, node_id: NodeId) -> set[Rank]:
        """Distinct parent-rank values this node's children have reported."""
        return {e.parent_rank for e in self.children_of(node_id)}


@dataclass(frozen=True)
class DetectorConfig:
    # None scales sibling spread by (1 + parent switching threshold);
    # set 1.5 to reproduce the bare-threshold variant of the rule.
    mfri_factor: float | None = None
    single_child_hops: int = 2
    exclude_flagged_from_mfri: bool = False
    # How long a child/parent contradiction may stand before it is ruled a
    # lie. Must exceed the worst-case DAO path latency; raise toward the
    # DAO refresh interval when links lose frames.
    mismatch_grace: float = 2.0


@dataclass(frozen=True)
class RankThreshold:
    value: float


def decreased_rank_violated(node_rank: Rank, parent_rank: Rank, consts: RplConstants) -> bool:
    """A child must sit at least one minimum hop increment above its parent;
    anything less is a lowered-rank lie."""
    return node_rank < parent_rank + consts.min_hop_rank_increase


def increased_rank_violated(node_rank: Rank, parent_rank: Rank, threshold: RankThreshold) -> bool:
    return node_rank > parent_rank + threshold.value


def max_feasible_rank_increase(
    table: InformationTable,
    parent_id: NodeId,
    parent_rank: Rank,
    consts: RplConstants,
    config: DetectorConfig = DetectorConfig(),
    flagged: frozenset[NodeId] = frozenset(),
) -> RankThreshold:
    """Largest rank increase over parent_rank any child could honestly have.

    With several children the spread between the lowest-ranked child and the
    parent bounds the feasible range; with a single child there is nothing to
    compare against, so a fixed two-hop allowance applies. A non-positive
    spread (possible when a flagged underclaimed entry lingers in the table)
    also falls back to the fixed allowance.
    """
    children = table.children_of(parent_id)
    if config.exclude_flagged_from_mfri:
        kept = [c for c in children if c.node_id not in flagged]
        if kept:
            children = kept
    if not children:
        raise NoChildren(f"node {parent_id} has no children in the table")
    factor = config.mfri_factor
    if factor is None:
        factor = 1.0 + consts.parent_switching_threshold
    single = config.single_child_hops * consts.min_hop_rank_increase * factor
    if len(children) == 1:
        return RankThreshold(single)
    spread = min(c.node_rank for c in children) - parent_rank
    if spread <= 0:
        return RankThreshold(single)
    return RankThreshold(spread * factor)


@dataclass(frozen=True)
class DetectionEvent:
    time: float
    node: NodeId
    verdict: Verdict
    cause: MaliciousCause


@dataclass
class SinkDetector:
    """Centralized half of the scheme; lives at the DODAG root."""

    key: SecretKey
    consts: RplConstants = field(default_factory=RplConstants)
    config: DetectorConfig = field(default_factory=DetectorConfig)
    hash_fn: HashFunction = DEFAULT_HASH
    # The root never sends a DAO, but its rank is fixed and known, so its
    # children's reports can be checked from the start.
    root: NodeId | None = None

    def __post_init__(self) -> None:
        self.table = InformationTable()
        self.malicious: set[NodeId] = set()
        self.events: list[DetectionEvent] = []
        # node -> every rank it has claimed for itself in a verified DAO
        self.claimed: dict[NodeId, set[Rank]] = {}
        if self.root is not None:
            self.claimed[self.root] = {self.consts.root_rank}
        # node -> (lowest contradictory reported rank, grace deadline)
        self._pending: dict[NodeId, tuple[Rank, float]] = {}

    def _flag(self, node: NodeId, cause: MaliciousCause, now: float) -> bool:
        """Add to the malicious set; first cause wins, re-flagging is a no-op."""
        if node in self.malicious:
            return False
        self.malicious.add(node)
        self.events.append(DetectionEvent(now, node, Verdict.MALICIOUS, cause))
        return True

    def _suspect(self, node: NodeId, reported: Rank, now: float) -> None:
        """Open (or deepen) a cross-check suspicion against node."""
        if node in self.malicious:
            return
        pending = self._pending.get(node)
        deadline = now + self.config.mismatch_grace
        if pending is None:
            self._pending[node] = (reported, deadline)
        else:
            self._pending[node] = (min(pending[0], reported), min(pending[1], deadline))

    def _enforce(self, now: float) -> list[NodeId]:
        """Resolve or convict expired suspicions; returns newly flagged nodes."""
        flagged: list[NodeId] = []
        for node, (reported, deadline) in sorted(self._pending.items()):
            claims = self.claimed.get(node)
            if node in self.malicious or (claims and min(claims) <= reported):
                del self._pending[node]
                continue
            if deadline <= now:
                del self._pending[node]
                if self._flag(node, MaliciousCause.CHILD_PARENT_RANK_MISMATCH, now):
                    flagged.append(node)
        return flagged

    def finalize(self, now: float) -> list[NodeId]:
        """End-of-run sweep over suspicions whose grace has expired."""
        return self._enforce(now)

    def process(self, dao: DaoMessage, now: float = 0.0) -> DetectionOutcome:
        """Verify one DAO, mirror its tuple, and run the rank checks."""
        transit = dao.transit
        node_id, node_rank = dao.origin, transit.rank
        parent_id, parent_rank = dao.target_parent, transit.parent_rank

        expected = rank_tuple_tag(node_id, node_rank, parent_id, parent_rank, self.key, self.hash_fn)
        if expected.data != transit.mac.data:
            # Tampered or unauthenticated: drop without touching the table.
            return DetectionOutcome(verdict=Verdict.DISCARDED)

        self.table.upsert(
            InfoTableEntry(node_id, node_rank, parent_id, parent_rank, updated_at=now)
        )
        claimed = self.claimed.setdefault(node_id, set())
        claimed.add(node_rank)

        # The parent this DAO reports on: a report below everything the
        # parent has ever claimed for itself means someone is lying about it.
        # No claims on file at all is suspicious too, or a liar could dodge
        # the comparison forever by never sending a verifiable DAO of its own.
        parent_claims = self.claimed.get(parent_id)
        if parent_id != node_id and (
            not parent_claims or parent_rank < min(parent_claims)
        ):
            self._suspect(parent_id, parent_rank, now)

        # This node against its own children's recorded reports.
        floor_rank = min(claimed)
        for child in self.table.children_of(node_id):
            if child.node_id != node_id and child.parent_rank < floor_rank:
                self._suspect(node_id, child.parent_rank, now)

        verdict, cause = Verdict.ACCEPTED, None
        threshold = max_feasible_rank_increase(
            self.table, parent_id, parent_rank, self.consts, self.config,
            flagged=frozenset(self.malicious),
        )
        if decreased_rank_violated(node_rank, parent_rank, self.consts):
            verdict, cause = Verdict.MALICIOUS, MaliciousCause.DECREASED_RANK
            self._flag(node_id, cause, now)
        elif increased_rank_violated(node_rank, parent_rank, threshold):
            verdict, cause = Verdict.MALICIOUS, MaliciousCause.INCREASED_RANK
            self._flag(node_id, cause, now)

        implicated: list[tuple[NodeId, MaliciousCause]] = []
        for node in self._enforce(now):
            if node == node_id and cause is None:
                verdict, cause = Verdict.MALICIOUS, MaliciousCause.CHILD_PARENT_RANK_MISMATCH
            else:
                implicated.append((node, MaliciousCause.CHILD_PARENT_RANK_MISMATCH))
        return DetectionOutcome(verdict=verdict, cause=cause, implicated=tuple(implicated))
