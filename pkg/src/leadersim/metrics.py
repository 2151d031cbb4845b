"""Detection and delivery metrics computed from a finished simulation.

Every node of the scenario stays in the denominators, including nodes that
never managed to join. Rates keep their strict definitions here; the
report-level summary maps the no-attacker miss rate to 0.0 so that sweep
rows stay numeric.
"""

from __future__ import annotations

from dataclasses import dataclass

from .core import NodeId
from .sim import SimResult


class UndefinedRate(ArithmeticError):
    pass


class NoTraffic(ArithmeticError):
    pass


@dataclass(frozen=True)
class GroundTruth:
    attackers: frozenset[NodeId]
    activation: dict[NodeId, float]
    all_nodes: int

    @classmethod
    def from_result(cls, result: SimResult) -> "GroundTruth":
        # An attacker that never activated in-run behaved honestly throughout.
        return cls(
            attackers=frozenset(result.activation_time),
            activation=dict(result.activation_time),
            all_nodes=result.scenario.node_count,
        )


def confusion(detected: set[NodeId], attackers: frozenset[NodeId], all_nodes: int):
    """Returns (tp, fp, tn, fn) over all nodes of the scenario."""
    tp = len(detected & attackers)
    fp = len(detected - attackers)
    fn = len(attackers - detected)
    tn = all_nodes - len(attackers) - fp
    return tp, fp, tn, fn


def accuracy(detected: set[NodeId], attackers: frozenset[NodeId], all_nodes: int) -> float:
    """Correctly judged nodes over all nodes present."""
    tp, fp, tn, fn = confusion(detected, attackers, all_nodes)
    return (tp + tn) / all_nodes


def false_positive_rate(
    detected: set[NodeId], attackers: frozenset[NodeId], all_nodes: int
) -> float:
    """Legitimate nodes flagged over legitimate nodes present."""
    legit = all_nodes - len(attackers)
    if legit == 0:
        raise UndefinedRate("no legitimate nodes")
    _, fp, _, _ = confusion(detected, attackers, all_nodes)
    return fp / legit


def false_negative_rate(detected: set[NodeId], attackers: frozenset[NodeId]) -> float:
    """Attackers missed over attackers present."""
    if not attackers:
        raise UndefinedRate("no attackers")
    return len(attackers - detected) / len(attackers)


def detection_latency(result: SimResult) -> dict[NodeId, float | None]:
    """Per attacker: first flag time minus activation time; None if missed."""
    truth = GroundTruth.from_result(result)
    first_flag: dict[NodeId, float] = {}
    for ev in result.detector.events:
        if ev.node not in first_flag:
            first_flag[ev.node] = ev.time
    out: dict[NodeId, float | None] = {}
    for node in sorted(truth.attackers):
        if node in first_flag:
            out[node] = first_flag[node] - truth.activation[node]
        else:
            out[node] = None
    return out


def packet_delivery_ratio(sent: int, delivered: int) -> float:
    if sent == 0:
        raise NoTraffic("no data packets were sent")
    return delivered / sent


def summarize(result: SimResult) -> dict[str, float | None]:
    """One flat metric dict per run; keys double as report column names."""
    truth = GroundTruth.from_result(result)
    detected = result.malicious
    out: dict[str, float | None] = {
        "accuracy": accuracy(detected, truth.attackers, truth.all_nodes),
        "fpr": false_positive_rate(detected, truth.attackers, truth.all_nodes),
    }
    if truth.attackers:
        out["fnr"] = false_negative_rate(detected, truth.attackers)
    else:
        out["fnr"] = 0.0
    lats = [v for v in detection_latency(result).values() if v is not None]
    out["detection_latency"] = sum(lats) / len(lats) if lats else None
    try:
        out["pdr"] = packet_delivery_ratio(result.data_sent, result.data_delivered)
    except NoTraffic:
        out["pdr"] = None
    out["total_energy_mj"] = result.ledger.total_energy_mj()
    return out
