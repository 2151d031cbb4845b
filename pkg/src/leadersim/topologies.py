"""Deterministic scenario builders for structured topologies."""

from __future__ import annotations

from .core import NodeId
from .sim import Scenario


def line_scenario(node_count: int, spacing: float = 40.0, **overrides) -> Scenario:
    """Sink plus a chain; node i sits i hops from the sink.

    Spacing stays below the radio range while twice the spacing exceeds it,
    so each node hears exactly its two chain neighbors.
    """
    positions = {i: (i * spacing, 0.0) for i in range(node_count)}
    return Scenario(node_count=node_count, positions=positions, **overrides)


def tree_parent(node: NodeId, fanout: int) -> NodeId:
    return (node - 1) // fanout


def tree_scenario(fanout: int, depth: int, **overrides) -> Scenario:
    """Complete fanout-ary tree of the given depth with explicit links.

    Nodes are numbered breadth-first from the root (node 0), so the parent
    of node i is (i - 1) // fanout. Positions are synthesized per level for
    plotting only.
    """
    if fanout < 1 or depth < 1:
        raise ValueError(f"need fanout >= 1 and depth >= 1, got {fanout}, {depth}")
    if fanout == 1:
        count = depth + 1
    else:
        count = (fanout ** (depth + 1) - 1) // (fanout - 1)
    links = [(tree_parent(i, fanout), i, 1.0) for i in range(1, count)]
    positions: dict[NodeId, tuple[float, float]] = {0: (0.0, 0.0)}
    level_start, level_size, level = 1, fanout, 1
    while level_start < count:
        width = (level_size - 1) * 40.0
        for k in range(level_size):
            node = level_start + k
            if node >= count:
                break
            positions[node] = (level * 60.0, k * 40.0 - width / 2)
        level_start += level_size
        level_size *= fanout
        level += 1
    return Scenario(node_count=count, links=links, positions=positions, **overrides)


def node_depth(node: NodeId, fanout: int) -> int:
    """Depth of a node in the breadth-first numbering of tree_scenario."""
    d = 0
    while node != 0:
        node = tree_parent(node, fanout)
        d += 1
    return d
