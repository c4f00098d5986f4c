"""Interval buckets, width plans, and the bucket-announcement protocols.

The frozen three-player transcript was unrolled by hand: suffix
composition (1,4,2,3) under one-bit buckets gives '0101'; the second
player keeps survivors {1,3} of bucket {3,4} and announces two-bit
indices '10' and '11'.
"""

import pytest

from mpjlab.bucketing import (
    BucketingScheme,
    BucketPlan,
    bucket_index,
    bucket_members,
    bucket_width_plan,
    bucketing_protocol,
    bucketing_protocol_doubling,
    doubling_plan,
    iterated_log,
    log_star,
)
from mpjlab.core import (
    LayerFunction,
    MpjHatInstance,
    Variant,
    chain_layers,
    enumerate_instances,
    eval_mpj_hat,
    sample_instances,
)
from mpjlab.sim import (
    Message,
    ProtocolInvariantError,
    ViewKind,
    make_view,
    run,
    verify,
)


def layer(*values):
    return LayerFunction(len(values), tuple(values))


def all_perm_mask(k):
    return (True,) * (k - 1)


def surviving_sets(inst, plan):
    """Independent recomputation of each announcing player's survivor set."""
    answer = eval_mpj_hat(inst)
    sets = {}
    for j in range(2, plan.terminal + 1):
        suffix = chain_layers(inst.layers[j - 1 :], inst.n)
        prev_width = plan.width(j - 1)
        members = set(
            bucket_members(prev_width, inst.n, bucket_index(prev_width, inst.n, answer))
        )
        sets[j] = tuple(s for s in range(1, inst.n + 1) if suffix(s) in members)
    return sets


class TestIteratedLog:
    def test_frozen_values(self):
        assert iterated_log(16, 0) == 16.0
        assert iterated_log(16, 1) == 4.0
        assert iterated_log(16, 2) == 2.0
        assert iterated_log(65536, 3) == 2.0

    def test_clamps_at_one_and_sticks(self):
        assert iterated_log(16, 4) == 1.0
        assert iterated_log(4, 2) == 1.0
        assert iterated_log(8, 3) == 1.0  # third application would go below 1
        assert iterated_log(2, 5) == 1.0

    def test_errors(self):
        with pytest.raises(ValueError):
            iterated_log(0, 1)
        with pytest.raises(ValueError):
            iterated_log(4, -1)

    def test_log_star(self):
        assert [log_star(n) for n in (1, 2, 4, 5, 8, 16, 32, 65536)] == [
            0, 1, 2, 3, 3, 3, 4, 4,
        ]
        with pytest.raises(ValueError):
            log_star(0)


class TestBuckets:
    def test_frozen_indices(self):
        assert [bucket_index(2, 8, r) for r in range(1, 9)] == [1, 1, 2, 2, 3, 3, 4, 4]
        assert [bucket_index(1, 5, r) for r in range(1, 6)] == [1, 1, 2, 2, 2]
        assert [bucket_index(0, 5, r) for r in range(1, 6)] == [1] * 5

    def test_frozen_members(self):
        assert bucket_members(1, 5, 1) == (1, 2)
        assert bucket_members(1, 5, 2) == (3, 4, 5)
        assert bucket_members(3, 5, 1) == ()  # more buckets than points

    def test_members_invert_index(self):
        for n in (1, 2, 5, 8, 13):
            for t in range(0, 5):
                seen = []
                for b in range(1, 2**t + 1):
                    members = bucket_members(t, n, b)
                    assert all(bucket_index(t, n, r) == b for r in members)
                    seen.extend(members)
                assert seen == list(range(1, n + 1))  # a partition, in order

    def test_size_law(self):
        for n in range(1, 65):
            for t in range(0, 7):
                cap = -(-n // (2**t))
                scheme = BucketingScheme(t, n)
                assert scheme.max_size == cap
                for b in range(1, 2**t + 1):
                    assert len(scheme.members(b)) <= cap

    def test_singletons_once_buckets_outnumber_points(self):
        scheme = BucketingScheme(3, 8)
        for r in range(1, 9):
            assert scheme.members(scheme.index_of(r)) == (r,)

    def test_errors(self):
        with pytest.raises(ValueError):
            bucket_index(-1, 4, 1)
        with pytest.raises(ValueError):
            bucket_index(1, 4, 5)
        with pytest.raises(ValueError):
            bucket_members(1, 4, 3)


class TestWidthPlans:
    def test_iterated_log_widths(self):
        assert bucket_width_plan(16, 3).widths == (2, 4, 16)
        assert bucket_width_plan(16, 4).widths == (1, 2, 4, 16)
        assert bucket_width_plan(16, 5).widths == (1, 1, 2, 4, 16)
        assert bucket_width_plan(8, 3).widths == (2, 3, 8)

    def test_terminal_is_last_announcer(self):
        plan = bucket_width_plan(16, 4)
        assert plan.terminal == 3
        assert plan.width(3) == 4

    def test_width_accessor_bounds(self):
        plan = bucket_width_plan(8, 3)
        with pytest.raises(ValueError):
            plan.width(0)
        with pytest.raises(ValueError):
            plan.width(4)

    def test_plan_validation(self):
        with pytest.raises(ValueError):
            bucket_width_plan(8, 2)
        with pytest.raises(ValueError):
            BucketPlan(8, 3, (1, 2, 8), doubling=False, terminal=2)  # 4 < 8
        with pytest.raises(ValueError):
            BucketPlan(8, 3, (1, 3, 8), doubling=False, terminal=3)

    def test_doubling_widths_and_early_terminal(self):
        plan = doubling_plan(16, 8)
        assert plan.widths == (1, 2, 4, 4, 4, 4, 4, 16)
        assert plan.terminal == 3
        assert doubling_plan(4, 4).widths == (1, 2, 2, 4)
        assert doubling_plan(4, 4).terminal == 2

    def test_doubling_degenerate_width_one(self):
        plan = doubling_plan(2, 3)
        assert plan.widths == (1, 1, 2)
        assert plan.terminal == 1

    def test_doubling_needs_enough_players(self):
        with pytest.raises(ValueError, match="cannot reach singleton"):
            doubling_plan(16, 3)


class TestBucketingProtocol:
    def test_frozen_transcript(self):
        inst = MpjHatInstance(
            4, 3, 2, (layer(2, 3, 4, 1), layer(3, 1, 4, 2)), all_perm_mask(3)
        )
        t = run(bucketing_protocol(4, 3), inst)
        assert [m.to01() for m in t.messages] == ["0101", "10101011", "11"]
        assert t.per_player_bits == (4, 8, 2)
        assert t.output == 4 == eval_mpj_hat(inst)

    def test_exhaustive_small(self):
        report = verify(
            bucketing_protocol(3, 3),
            enumerate_instances(3, 3, Variant.MPJ_HAT, all_perm_mask(3)),
        )
        assert report.ok and report.checked == 108

    def test_exhaustive_four_players(self):
        report = verify(
            bucketing_protocol(3, 4),
            enumerate_instances(3, 4, Variant.MPJ_HAT, all_perm_mask(4)),
        )
        assert report.ok and report.checked == 648

    def test_correct_even_without_the_permutation_promise(self):
        # arbitrary layers keep the answer inside every announced bucket,
        # so the output stays right; only the survivor-count bound needs
        # permutations (here player 2 hits n + n*b_2 = 9 bits)
        report = verify(
            bucketing_protocol(3, 3), enumerate_instances(3, 3, Variant.MPJ_HAT)
        )
        assert report.ok and report.checked == 2187
        assert report.per_player_max_bits == (3, 9, 2)

    def test_message_sizes_match_survivor_oracle(self):
        n, k = 8, 4
        plan = bucket_width_plan(n, k)
        proto = bucketing_protocol(n, k)
        for inst in sample_instances(
            n, k, Variant.MPJ_HAT, all_perm_mask(k), count=150, seed=21
        ):
            t = run(proto, inst)
            sets = surviving_sets(inst, plan)
            assert t.per_player_bits[0] == n * plan.width(1)
            for j in range(2, plan.terminal + 1):
                assert t.per_player_bits[j - 1] == n + len(sets[j]) * plan.width(j)
                indicator = t.messages[j - 1].bits[:n]
                announced = tuple(s for s in range(1, n + 1) if indicator[s - 1])
                assert announced == sets[j]

    def test_survivor_counts_shrink_with_permutations(self):
        n, k = 16, 4
        plan = bucket_width_plan(n, k)
        for inst in sample_instances(
            n, k, Variant.MPJ_HAT, all_perm_mask(k), count=100, seed=5
        ):
            sets = surviving_sets(inst, plan)
            for j in range(2, plan.terminal + 1):
                assert len(sets[j]) <= -(-n // (2 ** plan.width(j - 1)))


class TestDoublingProtocol:
    def test_degenerate_single_announcer(self):
        report = verify(
            bucketing_protocol_doubling(2, 3),
            enumerate_instances(2, 3, Variant.MPJ_HAT, all_perm_mask(3)),
        )
        assert report.ok and report.checked == 8
        assert report.per_player_max_bits == (2, 0, 1)  # middle player is silent

    def test_early_termination_silences_late_players(self):
        proto = bucketing_protocol_doubling(16, 8)
        insts = sample_instances(16, 8, Variant.MPJ_HAT, all_perm_mask(8), count=60, seed=2)
        report = verify(proto, insts)
        assert report.ok
        assert report.per_player_max_bits[3:7] == (0, 0, 0, 0)
        assert report.per_player_max_bits[0] == 16

    def test_total_cost_stays_linear(self):
        for n in (8, 16, 32):
            k = log_star(n) + 2
            proto = bucketing_protocol_doubling(n, k)
            insts = sample_instances(n, k, Variant.MPJ_HAT, all_perm_mask(k), count=200, seed=n)
            report = verify(proto, insts)
            assert report.ok
            assert report.worst_cost <= 8 * n


class TestTamperedBlackboards:
    """The announcement parsers reject malformed or inconsistent messages."""

    inst = MpjHatInstance(
        4, 3, 2, (layer(2, 3, 4, 1), layer(3, 1, 4, 2)), all_perm_mask(3)
    )
    proto = bucketing_protocol(4, 3)

    def test_walk_point_missing_from_survivors(self):
        good = run(self.proto, self.inst)
        empty_survivors = Message.from01("0000")
        view = make_view(
            self.inst, 3, ViewKind.COLLAPSING, (good.messages[0], empty_survivors)
        )
        with pytest.raises(ProtocolInvariantError, match="missing from the surviving"):
            self.proto.players[2](view)

    def test_first_announcement_size_check(self):
        view = make_view(self.inst, 2, ViewKind.COLLAPSING, (Message.from01("01"),))
        with pytest.raises(ProtocolInvariantError, match="wrong size"):
            self.proto.players[1](view)

    def test_index_area_size_check(self):
        good = run(self.proto, self.inst)
        truncated = Message.from01("1010" + "1")
        view = make_view(
            self.inst, 3, ViewKind.COLLAPSING, (good.messages[0], truncated)
        )
        with pytest.raises(ProtocolInvariantError, match="index area"):
            self.proto.players[2](view)

    def test_indicator_shorter_than_n(self):
        good = run(self.proto, self.inst)
        view = make_view(
            self.inst, 3, ViewKind.COLLAPSING, (good.messages[0], Message.from01("10"))
        )
        with pytest.raises(ProtocolInvariantError, match="membership indicator"):
            self.proto.players[2](view)
