"""Deterministic discrete-event simulation of DODAG formation under attack.

A single seeded RNG drives placement, startup jitter and loss draws; events
at equal timestamps run in scheduling order, so a scenario and seed fix the
whole run down to the byte-identical trace.

Radio model: unit disk. A frame reaches a receiver iff the distance is
within tx_range (or an explicit link exists) and the per-reception loss draw
passes. DAOs travel hop by hop along preferred parents and are relayed
unchanged; only the sink decodes them.
"""

from __future__ import annotations

import heapq
import json
import math
import random
from dataclasses import dataclass, field

from . import rpl, wire
from .adversary import (
    AttackSpec,
    Delayed,
    ImmediateOnJoin,
    LieTarget,
    apply_to_dao,
    apply_to_dio,
    attack_active,
)
from .core import DioMessage, DisMessage, NodeId, RplConstants, SecretKey
from .detector import DetectorConfig, SinkDetector
from .overhead import (
    CYCLES_HMAC_96,
    HMAC_SINK_CONSTRUCTS,
    NANOJOULE_PER_CYCLE,
    RX_MILLIJOULE_PER_BYTE,
    TX_MILLIJOULE_PER_BYTE,
    construct_cycles,
)

DIO_BYTES = 76
DIS_BYTES = 6
DATA_BYTES = 30

TX_MJ_PER_BYTE = float(TX_MILLIJOULE_PER_BYTE)
RX_MJ_PER_BYTE = float(RX_MILLIJOULE_PER_BYTE)
MJ_PER_CYCLE = float(NANOJOULE_PER_CYCLE) * 1e-6

SINK_CHECK_CYCLES = construct_cycles(HMAC_SINK_CONSTRUCTS)

RESOLICIT_INTERVAL = 5.0
DATA_DRAIN_WINDOW = 2.0
MAX_FORWARD_HOPS = 64
PLACEMENT_ATTEMPTS = 500

DEFAULT_KEY = bytes(range(16))


class SimulationError(Exception):
    pass


class DisconnectedRoot(SimulationError):
    """No route from any node to the sink is possible at unit range."""


@dataclass(frozen=True)
class EtxModel:
    uniform: float = 1.0
    per_link: dict[tuple[NodeId, NodeId], float] | None = None
    from_loss: bool = False

    def link(self, a: NodeId, b: NodeId, link_loss: float) -> float:
        if self.per_link is not None:
            key = (min(a, b), max(a, b))
            if key in self.per_link:
                return self.per_link[key]
        if self.from_loss and link_loss < 1.0:
            return 1.0 / (1.0 - link_loss)
        return self.uniform


@dataclass
class Scenario:
    area: tuple[float, float] = (300.0, 300.0)
    node_count: int = 50
    tx_range: float = 60.0
    seed: int = 1
    link_loss: float = 0.0
    etx: EtxModel = field(default_factory=EtxModel)
    packet_interval: float = 120.0
    duration: float = 600.0
    startup_delay_ms: float = 1000.0
    hop_latency: float = 0.010
    sink: NodeId = 0
    key: bytes = DEFAULT_KEY
    data_traffic: bool = True
    evict_detected: bool = False
    attacks: list[AttackSpec] = field(default_factory=list)
    consts: RplConstants = field(default_factory=RplConstants)
    detector: DetectorConfig = field(default_factory=DetectorConfig)
    # Explicit placement: node -> (x, y); adjacency still follows tx_range.
    positions: dict[NodeId, tuple[float, float]] | None = None
    # Explicit adjacency (a, b, etx) bypassing the unit disk; positions then
    # serve only for plotting.
    links: list[tuple[NodeId, NodeId, float]] | None = None

    def __post_init__(self) -> None:
        if self.node_count < 2:
            raise SimulationError(f"need at least 2 nodes, got {self.node_count}")
        if not 0.0 <= self.link_loss < 1.0:
            raise SimulationError(f"link_loss must be in [0, 1): {self.link_loss}")
        if self.duration <= 0:
            raise SimulationError(f"duration must be positive: {self.duration}")
        for spec in self.attacks:
            if spec.node == self.sink:
                raise SimulationError("the sink cannot be an attacker")
            if not 0 <= spec.node < self.node_count:
                raise SimulationError(f"attacker {spec.node} outside the node range")


def deliver(
    pos_a: tuple[float, float],
    pos_b: tuple[float, float],
    tx_range: float,
    link_loss: float,
    rng: random.Random,
) -> bool:
    """Unit-disk delivery check: in range, then a loss draw."""
    if math.dist(pos_a, pos_b) > tx_range:
        return False
    return rng.random() >= link_loss


class EnergyLedger:
    """Integer byte/cycle counters per node; energy derived on read."""

    def __init__(self) -> None:
        self.tx_bytes: dict[NodeId, int] = {}
        self.rx_bytes: dict[NodeId, int] = {}
        self.cycles: dict[NodeId, int] = {}
        self.by_kind: dict[str, int] = {}

    def account(self, node: NodeId, op: str, amount: int, kind: str = "") -> None:
        if amount < 0:
            raise ValueError(f"negative amount: {amount}")
        store = {"tx": self.tx_bytes, "rx": self.rx_bytes, "cycles": self.cycles}[op]
        store[node] = store.get(node, 0) + amount
        if kind:
            key = f"{op}:{kind}"
            self.by_kind[key] = self.by_kind.get(key, 0) + amount

    def tx_energy_mj(self, node: NodeId) -> float:
        return self.tx_bytes.get(node, 0) * TX_MJ_PER_BYTE

    def rx_energy_mj(self, node: NodeId) -> float:
        return self.rx_bytes.get(node, 0) * RX_MJ_PER_BYTE

    def cycle_energy_mj(self, node: NodeId) -> float:
        return self.cycles.get(node, 0) * MJ_PER_CYCLE

    def node_energy_mj(self, node: NodeId) -> float:
        return (
            self.tx_energy_mj(node)
            + self.rx_energy_mj(node)
            + self.cycle_energy_mj(node)
        )

    def total_energy_mj(self) -> float:
        nodes = sorted(set(self.tx_bytes) | set(self.rx_bytes) | set(self.cycles))
        return sum(self.node_energy_mj(n) for n in nodes)


class SimTrace:
    """Ordered record list; serializes to one JSON object per line."""

    def __init__(self) -> None:
        self.records: list[dict] = []

    def add(self, kind: str, time: float, **fields) -> None:
        rec = {"kind": kind, "t": time}
        rec.update(fields)
        self.records.append(rec)

    def of_kind(self, kind: str) -> list[dict]:
        return [r for r in self.records if r["kind"] == kind]

    def to_jsonl(self) -> str:
        return "\n".join(json.dumps(r, sort_keys=True) for r in self.records) + "\n"


@dataclass
class SimResult:
    scenario: Scenario
    trace: SimTrace
    ledger: EnergyLedger
    detector: SinkDetector
    states: dict[NodeId, rpl.NodeState]
    positions: dict[NodeId, tuple[float, float]] | None
    join_time: dict[NodeId, float]
    activation_time: dict[NodeId, float]
    data_sent: int
    data_delivered: int

    @property
    def malicious(self) -> set[NodeId]:
        return set(self.detector.malicious)


class Simulation:
    def __init__(self, scenario: Scenario) -> None:
        self.sc = scenario
        self.rng = random.Random(scenario.seed)
        # Separate stream for data-plane loss so forwarding behavior (drops,
        # route changes) never perturbs control-plane draws under one seed.
        self.rng_data = random.Random(scenario.seed ^ 0x5D2C_9A1F)
        self.trace = SimTrace()
        self.ledger = EnergyLedger()
        self.detector = SinkDetector(
            key=SecretKey(scenario.key),
            consts=scenario.consts,
            config=scenario.detector,
            root=scenario.sink,
        )
        self._det_idx = 0
        self._queue: list[tuple[float, int, str, tuple]] = []
        self._seq = 0
        self.now = 0.0

        self._place()
        ids = list(range(scenario.node_count))
        self.states = {
            i: rpl.NodeState.root(i, scenario.consts)
            if i == scenario.sink
            else rpl.NodeState(node_id=i)
            for i in ids
        }
        self.join_time: dict[NodeId, float] = {}
        self.activation_time: dict[NodeId, float] = {}
        self._started: set[NodeId] = set()
        self.attacks: dict[NodeId, AttackSpec] = {a.node: a for a in scenario.attacks}
        self._pending_onset: set[NodeId] = set()
        self.data_sent = 0
        self.data_delivered = 0
        self.key = SecretKey(scenario.key)

    # -- topology ---------------------------------------------------------

    def _place(self) -> None:
        sc = self.sc
        ids = list(range(sc.node_count))
        if sc.links is not None:
            self.positions = dict(sc.positions) if sc.positions else None
            self.neighbors: dict[NodeId, list[NodeId]] = {i: [] for i in ids}
            self._link_etx: dict[tuple[NodeId, NodeId], float] = {}
            for a, b, etx in sc.links:
                self.neighbors[a].append(b)
                self.neighbors[b].append(a)
                self._link_etx[(min(a, b), max(a, b))] = etx
            for i in ids:
                self.neighbors[i] = sorted(set(self.neighbors[i]))
            if not self.neighbors[sc.sink]:
                raise DisconnectedRoot("sink has no links")
            return
        if sc.positions is not None:
            missing = [i for i in ids if i not in sc.positions]
            if missing:
                raise SimulationError(f"positions missing for nodes {missing}")
            self.positions = dict(sc.positions)
        else:
            w, h = sc.area
            for _ in range(PLACEMENT_ATTEMPTS):
                pos = {i: (self.rng.uniform(0, w), self.rng.uniform(0, h)) for i in ids}
                if self._connected(pos):
                    break
            else:
                raise DisconnectedRoot(
                    f"no connected placement of {sc.node_count} nodes found "
                    f"in {PLACEMENT_ATTEMPTS} attempts"
                )
            self.positions = pos
        self.neighbors = {
            i: sorted(
                j
                for j in ids
                if j != i and math.dist(self.positions[i], self.positions[j]) <= sc.tx_range
            )
            for i in ids
        }
        self._link_etx = {}
        if not self.neighbors[sc.sink]:
            raise DisconnectedRoot("no node within range of the sink")

    def _connected(self, pos: dict[NodeId, tuple[float, float]]) -> bool:
        sc = self.sc
        seen = {sc.sink}
        frontier = [sc.sink]
        while frontier:
            cur = frontier.pop()
            for j in pos:
                if j not in seen and math.dist(pos[cur], pos[j]) <= sc.tx_range:
                    seen.add(j)
                    frontier.append(j)
        return len(seen) == len(pos)

    def link_etx(self, a: NodeId, b: NodeId) -> float:
        key = (min(a, b), max(a, b))
        if key in self._link_etx:
            return self._link_etx[key]
        return self.sc.etx.link(a, b, self.sc.link_loss)

    # -- event machinery --------------------------------------------------

    def schedule(self, t: float, kind: str, *payload) -> None:
        self._seq += 1
        heapq.heappush(self._queue, (t, self._seq, kind, payload))

    def run(self) -> SimResult:
        sc = self.sc
        delay = sc.startup_delay_ms / 1000.0
        for i in range(sc.node_count):
            start = self.rng.uniform(0.0, delay) if delay > 0 else 0.0
            self.schedule(start, "node_start", i)
        for spec in sc.attacks:
            if isinstance(spec.onset, Delayed):
                self.schedule(spec.onset.at, "attack_onset", spec.node)

        handlers = {
            "node_start": self._on_node_start,
            "resolicit": self._on_resolicit,
            "rx_dis": self._on_rx_dis,
            "rx_dio": self._on_rx_dio,
            "dio_periodic": self._on_dio_periodic,
            "dao_periodic": self._on_dao_periodic,
            "dao_arrive": self._on_dao_arrive,
            "data_periodic": self._on_data_periodic,
            "data_arrive": self._on_data_arrive,
            "attack_onset": self._on_attack_onset,
        }
        while self._queue:
            t, _, kind, payload = heapq.heappop(self._queue)
            if t > sc.duration:
                break
            self.now = t
            handlers[kind](t, *payload)
        self.detector.finalize(sc.duration)
        self._drain_detections()
        return SimResult(
            scenario=sc,
            trace=self.trace,
            ledger=self.ledger,
            detector=self.detector,
            states=self.states,
            positions=self.positions,
            join_time=dict(self.join_time),
            activation_time=dict(self.activation_time),
            data_sent=self.data_sent,
            data_delivered=self.data_delivered,
        )

    # -- node lifecycle ---------------------------------------------------

    def _on_node_start(self, t: float, node: NodeId) -> None:
        self._started.add(node)
        self.trace.add("start", t, node=node)
        if node == self.sc.sink:
            self._broadcast_dio(node, t)
            self.schedule(t + self.sc.consts.dio_interval, "dio_periodic", node)
        else:
            self._broadcast_dis(node, t)
            self.schedule(t + RESOLICIT_INTERVAL, "resolicit", node)

    def _on_resolicit(self, t: float, node: NodeId) -> None:
        if self.states[node].joined:
            return
        self._broadcast_dis(node, t)
        self.schedule(t + RESOLICIT_INTERVAL, "resolicit", node)

    def _broadcast_dis(self, node: NodeId, t: float) -> None:
        self.trace.add("dis", t, node=node)
        self.ledger.account(node, "tx", DIS_BYTES, kind="dis")
        for nbr in self.neighbors[node]:
            if self.rng.random() >= self.sc.link_loss:
                self.schedule(t + self.sc.hop_latency, "rx_dis", nbr, node)

    def _on_rx_dis(self, t: float, node: NodeId, sender: NodeId) -> None:
        if node not in self._started:
            return
        self.ledger.account(node, "rx", DIS_BYTES, kind="dis")
        for action in rpl.handle_dis(self.states[node], DisMessage(sender), self.sc.consts):
            if isinstance(action, rpl.BroadcastDio):
                self._broadcast_dio(node, t)

    def _broadcast_dio(self, node: NodeId, t: float) -> None:
        state = self.states[node]
        dio = DioMessage(sender=node, advertised_rank=state.rank)
        spec = self.attacks.get(node)
        if spec is not None:
            dio = apply_to_dio(dio, spec, t, self.join_time.get(node))
        self.trace.add("dio", t, node=node, rank=dio.advertised_rank)
        self.ledger.account(node, "tx", DIO_BYTES, kind="dio")
        for nbr in self.neighbors[node]:
            if self.rng.random() >= self.sc.link_loss:
                self.schedule(
                    t + self.sc.hop_latency, "rx_dio", nbr, dio.sender, dio.advertised_rank
                )

    def _on_rx_dio(self, t: float, node: NodeId, sender: NodeId, rank: int) -> None:
        if node not in self._started:
            return
        self.ledger.account(node, "rx", DIO_BYTES, kind="dio")
        state = self.states[node]
        was_joined = state.joined
        prev = (state.preferred_parent, state.rank)
        dio = DioMessage(sender=sender, advertised_rank=rank)
        actions = rpl.handle_dio(state, dio, self.link_etx(sender, node), self.sc.consts)
        if not actions:
            return
        if not was_joined:
            self.join_time[node] = t
            self.trace.add("join", t, node=node, rank=state.rank, parent=state.preferred_parent)
            self._maybe_activate(node, t)
        elif state.preferred_parent != prev[0]:
            self.trace.add(
                "parent_switch",
                t,
                node=node,
                frm=prev[0],
                to=state.preferred_parent,
                rank=state.rank,
            )
        else:
            self.trace.add("rank_update", t, node=node, old=prev[1], new=state.rank)
        for action in actions:
            if isinstance(action, rpl.SendDao):
                self._send_dao(node, t)
            elif isinstance(action, rpl.BroadcastDio):
                self._broadcast_dio(node, t)
        if not was_joined:
            c = self.sc.consts
            self.schedule(t + c.dio_interval, "dio_periodic", node)
            self.schedule(t + c.dao_refresh_interval, "dao_periodic", node)
            if self.sc.data_traffic:
                self.schedule(t + self.sc.packet_interval, "data_periodic", node)

    def _on_dio_periodic(self, t: float, node: NodeId) -> None:
        if self.states[node].joined:
            self._broadcast_dio(node, t)
        self.schedule(t + self.sc.consts.dio_interval, "dio_periodic", node)

    # -- attack lifecycle -------------------------------------------------

    def _maybe_activate(self, node: NodeId, t: float) -> None:
        """Record ground-truth activation when a joined node's attack is live."""
        spec = self.attacks.get(node)
        if spec is None or node in self.activation_time:
            return
        if isinstance(spec.onset, ImmediateOnJoin) or t >= spec.onset.at:
            self.activation_time[node] = t
            self.trace.add(
                "attack_on",
                t,
                node=node,
                attack=spec.kind.value,
                lie_target=spec.lie_target.value,
            )

    def _on_attack_onset(self, t: float, node: NodeId) -> None:
        if not self.states[node].joined:
            # Not formed yet; activation happens at join.
            return
        self._maybe_activate(node, t)
        spec = self.attacks[node]
        # Advertise the lie right away instead of waiting for a timer.
        if spec.lie_target is LieTarget.NEIGHBORS:
            self._broadcast_dio(node, t)
        else:
            self._send_dao(node, t)

    # -- DAO path ---------------------------------------------------------

    def _send_dao(self, node: NodeId, t: float) -> None:
        state = self.states[node]
        try:
            dao = rpl.build_dao(state, self.key)
        except rpl.NotJoined:
            return
        self.ledger.account(node, "cycles", CYCLES_HMAC_96, kind="mac")
        spec = self.attacks.get(node)
        if spec is not None:
            forged = apply_to_dao(dao, spec, self.key, t, self.join_time.get(node))
            if forged.transit.mac.data != dao.transit.mac.data:
                # Insider re-tagged the falsified tuple.
                self.ledger.account(node, "cycles", CYCLES_HMAC_96, kind="mac")
            dao = forged
        frame = wire.encode_dao(dao, dodag_root=self.sc.sink)
        self.trace.add(
            "dao_sent",
            t,
            node=node,
            rank=dao.transit.rank,
            parent=dao.target_parent,
            parent_rank=dao.transit.parent_rank,
            seq=dao.path_sequence,
        )
        self._forward_dao(node, frame, node, t, MAX_FORWARD_HOPS)

    def _forward_dao(self, holder: NodeId, frame: bytes, origin: NodeId, t: float, ttl: int) -> None:
        state = self.states[holder]
        if holder == self.sc.sink:
            return
        if ttl <= 0 or not state.joined or state.preferred_parent is None:
            self.trace.add("dao_dropped", t, origin=origin, at=holder, reason="no_route")
            return
        nxt = state.preferred_parent
        self.ledger.account(holder, "tx", len(frame), kind="dao")
        if self.rng.random() < self.sc.link_loss:
            self.trace.add("dao_dropped", t, origin=origin, at=holder, reason="loss")
            return
        self.schedule(t + self.sc.hop_latency, "dao_arrive", nxt, frame, origin, holder, ttl - 1)

    def _on_dao_arrive(
        self, t: float, node: NodeId, frame: bytes, origin: NodeId, frm: NodeId, ttl: int
    ) -> None:
        self.ledger.account(node, "rx", len(frame), kind="dao")
        self.trace.add("dao_hop", t, frm=frm, to=node, origin=origin, nbytes=len(frame))
        if node != self.sc.sink:
            self._forward_dao(node, frame, origin, t, ttl)
            return
        if self.sc.evict_detected and origin in self.detector.malicious:
            self.trace.add("dao_ignored", t, origin=origin)
            return
        self.ledger.account(node, "cycles", CYCLES_HMAC_96, kind="mac")
        dao = wire.decode_dao(frame)
        outcome = self.detector.process(dao, now=t)
        if outcome.verdict.value != "discarded":
            self.ledger.account(node, "cycles", SINK_CHECK_CYCLES, kind="rank_check")
        self._drain_detections()
        self.trace.add(
            "dao_verdict",
            t,
            origin=dao.origin,
            verdict=outcome.verdict.value,
            cause=outcome.cause.value if outcome.cause else None,
            implicated=[[n, c.value] for n, c in outcome.implicated],
        )

    def _drain_detections(self) -> None:
        while self._det_idx < len(self.detector.events):
            ev = self.detector.events[self._det_idx]
            self.trace.add("detection", ev.time, node=ev.node, cause=ev.cause.value)
            self._det_idx += 1

    def _on_dao_periodic(self, t: float, node: NodeId) -> None:
        if self.states[node].joined:
            self._send_dao(node, t)
        self.schedule(t + self.sc.consts.dao_refresh_interval, "dao_periodic", node)

    # -- data traffic -----------------------------------------------------

    def _on_data_periodic(self, t: float, node: NodeId) -> None:
        if t <= self.sc.duration - DATA_DRAIN_WINDOW:
            if self.states[node].joined:
                self.data_sent += 1
                self.trace.add("data_sent", t, node=node)
                self._forward_data(node, node, t, MAX_FORWARD_HOPS)
            self.schedule(t + self.sc.packet_interval, "data_periodic", node)

    def _forward_data(self, holder: NodeId, origin: NodeId, t: float, ttl: int) -> None:
        state = self.states[holder]
        if holder == self.sc.sink:
            return
        if ttl <= 0 or not state.joined or state.preferred_parent is None:
            self.trace.add("data_dropped", t, origin=origin, at=holder, reason="no_route")
            return
        spec = self.attacks.get(holder)
        if (
            spec is not None
            and spec.drops_data
            and holder != origin
            and attack_active(spec, t, self.join_time.get(holder))
        ):
            # The rank lie exists to attract traffic; the payoff is eating it.
            self.trace.add("data_dropped", t, origin=origin, at=holder, reason="sinkhole")
            return
        self.ledger.account(holder, "tx", DATA_BYTES, kind="data")
        if self.rng_data.random() < self.sc.link_loss:
            self.trace.add("data_dropped", t, origin=origin, at=holder, reason="loss")
            return
        self.schedule(
            t + self.sc.hop_latency, "data_arrive", state.preferred_parent, origin, holder, ttl - 1
        )

    def _on_data_arrive(self, t: float, node: NodeId, origin: NodeId, frm: NodeId, ttl: int) -> None:
        self.ledger.account(node, "rx", DATA_BYTES, kind="data")
        self.trace.add("data_hop", t, frm=frm, to=node, origin=origin, nbytes=DATA_BYTES)
        if node == self.sc.sink:
            self.data_delivered += 1
            self.trace.add("data_delivered", t, origin=origin)
        else:
            self._forward_data(node, origin, t, ttl)


def run(scenario: Scenario) -> SimResult:
    """Build and run one simulation to completion."""
    return Simulation(scenario).run()
