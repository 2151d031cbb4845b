"""Structured scenario builders."""

import math

import pytest

from leadersim.topologies import line_scenario, node_depth, tree_parent, tree_scenario


def test_line_places_nodes_one_hop_apart():
    sc = line_scenario(6)
    assert sc.node_count == 6
    for i in range(6):
        assert sc.positions[i] == (i * 40.0, 0.0)
    # Spacing under the radio range, twice the spacing over it.
    assert 40.0 < sc.tx_range < 80.0


def test_line_accepts_overrides():
    sc = line_scenario(4, seed=9, duration=42.0)
    assert sc.seed == 9
    assert sc.duration == 42.0


def test_tree_parent_breadth_first():
    assert tree_parent(1, 2) == 0
    assert tree_parent(2, 2) == 0
    assert tree_parent(3, 2) == 1
    assert tree_parent(6, 2) == 2
    assert tree_parent(1, 3) == 0
    assert tree_parent(4, 3) == 1


def test_node_depth():
    assert node_depth(0, 2) == 0
    assert node_depth(2, 2) == 1
    assert node_depth(5, 2) == 2
    assert node_depth(14, 2) == 3


def test_tree_node_count():
    assert tree_scenario(2, 3).node_count == 15
    assert tree_scenario(3, 2).node_count == 13
    assert tree_scenario(1, 4).node_count == 5


def test_tree_links_follow_parent_rule():
    sc = tree_scenario(2, 2)
    assert set(sc.links) == {(0, 1, 1.0), (0, 2, 1.0), (1, 3, 1.0), (1, 4, 1.0),
                             (2, 5, 1.0), (2, 6, 1.0)}


def test_tree_positions_cover_every_node():
    sc = tree_scenario(3, 2)
    assert set(sc.positions) == set(range(13))
    depths = {node_depth(i, 3) for i in range(13)}
    assert depths == {0, 1, 2}
    for i in range(13):
        x, _ = sc.positions[i]
        assert math.isclose(x, node_depth(i, 3) * 60.0)


def test_tree_rejects_degenerate_shapes():
    with pytest.raises(ValueError):
        tree_scenario(0, 2)
    with pytest.raises(ValueError):
        tree_scenario(2, 0)
