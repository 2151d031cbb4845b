"""Attack transformations: onset gating, rank math, tagging consequences."""

import pytest

from leadersim.adversary import (
    AttackKind,
    AttackSpec,
    Delayed,
    ImmediateOnJoin,
    LieTarget,
    advertised_rank,
    apply_to_dao,
    apply_to_dio,
    attack_active,
    default_delta,
)
from leadersim.core import INFINITE_RANK, DioMessage
from leadersim.mac import rank_tuple_tag
from leadersim.rpl import NodeState, build_dao


def make_dao(key, node=5, rank=1024, parent=2, parent_rank=768):
    state = NodeState(node_id=node, rank=rank, preferred_parent=parent,
                      parent_rank=parent_rank)
    return build_dao(state, key)


def spec_for(kind=AttackKind.DECREASED, delta=512, **kw):
    return AttackSpec(node=5, kind=kind, delta_r=delta, **kw)


def test_default_deltas(consts):
    assert default_delta(AttackKind.DECREASED, consts) == 307
    assert default_delta(AttackKind.INCREASED, consts) == 1024


def test_delta_must_be_positive():
    with pytest.raises(ValueError):
        spec_for(delta=0)


class TestOnset:
    def test_immediate_needs_join(self):
        spec = spec_for(onset=ImmediateOnJoin())
        assert not attack_active(spec, 100.0, None)
        assert attack_active(spec, 0.0, 0.0)

    def test_delayed_waits_for_the_clock(self):
        spec = spec_for(onset=Delayed(60.0))
        assert not attack_active(spec, 59.9, 1.0)
        assert attack_active(spec, 60.0, 1.0)


class TestAdvertisedRank:
    def test_decrease_subtracts_delta(self):
        assert advertised_rank(1024, spec_for(delta=512), 0.0, 0.0) == 512

    def test_decrease_floors_at_one(self):
        assert advertised_rank(300, spec_for(delta=512), 0.0, 0.0) == 1

    def test_increase_adds_delta(self):
        spec = spec_for(kind=AttackKind.INCREASED, delta=512)
        assert advertised_rank(1024, spec, 0.0, 0.0) == 1536

    def test_increase_stays_finite(self):
        spec = spec_for(kind=AttackKind.INCREASED, delta=60000)
        assert advertised_rank(60000, spec, 0.0, 0.0) == INFINITE_RANK - 1

    def test_inactive_tells_the_truth(self):
        spec = spec_for(onset=Delayed(60.0))
        assert advertised_rank(1024, spec, 10.0, 0.0) == 1024


class TestDio:
    def test_neighbors_lie_rewrites_dio(self):
        spec = spec_for(lie_target=LieTarget.NEIGHBORS)
        dio = DioMessage(sender=5, advertised_rank=1024)
        assert apply_to_dio(dio, spec, 0.0, 0.0).advertised_rank == 512

    def test_sink_lie_leaves_dio_honest(self):
        spec = spec_for(lie_target=LieTarget.SINK)
        dio = DioMessage(sender=5, advertised_rank=1024)
        assert apply_to_dio(dio, spec, 0.0, 0.0) is dio


class TestDao:
    def test_sink_lie_rewrites_and_retags(self, key):
        spec = spec_for(lie_target=LieTarget.SINK, delta=512)
        forged = apply_to_dao(make_dao(key), spec, key, 0.0, 0.0)
        assert forged.transit.rank == 512
        # Insider's tag verifies against the falsified tuple.
        assert forged.transit.mac == rank_tuple_tag(5, 512, 2, 768, key)

    def test_outsider_keeps_stale_tag(self, key):
        spec = spec_for(lie_target=LieTarget.SINK, delta=512, has_key=False)
        honest = make_dao(key)
        forged = apply_to_dao(honest, spec, key, 0.0, 0.0)
        assert forged.transit.rank == 512
        assert forged.transit.mac == honest.transit.mac
        assert forged.transit.mac != rank_tuple_tag(5, 512, 2, 768, key)

    def test_neighbors_lie_leaves_dao_honest(self, key):
        spec = spec_for(lie_target=LieTarget.NEIGHBORS)
        honest = make_dao(key)
        assert apply_to_dao(honest, spec, key, 0.0, 0.0) is honest

    def test_inactive_dao_untouched(self, key):
        spec = spec_for(onset=Delayed(60.0))
        honest = make_dao(key)
        assert apply_to_dao(honest, spec, key, 10.0, 0.0) is honest

    def test_parent_rank_framing(self, key):
        spec = spec_for(lie_target=LieTarget.NEIGHBORS, forge_parent_rank=300)
        forged = apply_to_dao(make_dao(key), spec, key, 0.0, 0.0)
        assert forged.transit.parent_rank == 300
        assert forged.transit.rank == 1024
        assert forged.transit.mac == rank_tuple_tag(5, 1024, 2, 300, key)

    def test_sequence_preserved(self, key):
        spec = spec_for(lie_target=LieTarget.SINK)
        honest = make_dao(key)
        forged = apply_to_dao(honest, spec, key, 0.0, 0.0)
        assert forged.path_sequence == honest.path_sequence
        assert forged.transit.path_sequence == honest.transit.path_sequence
