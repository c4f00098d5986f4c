"""Bucketed-announcement protocols for the all-permutation pointer chain.

Interval buckets over [n]: with 2^t buckets, point r lands in bucket
ceil(2^t * r / n), so every bucket holds at most ceil(n / 2^t)
consecutive points and a bucket index costs t bits.

The first player announces, for every candidate point r, which bucket her
collapsed suffix sends r to. Each later player knows her own walk point,
looks up its announced bucket, keeps only the candidates whose collapsed
suffix lands in that bucket (the surviving set), and announces finer
bucket indices for just those survivors, tagged with an n-bit membership
indicator. Bit widths grow as iterated logarithms, so the surviving sets
shrink hyper-exponentially and the last player reads a singleton bucket.

A doubling variant grows widths 1, 2, 4, ... instead; once a width
reaches ceil(log2 n), buckets are singletons, the remaining middle
players send nothing, and the last player reads the terminal message.
All layers must be permutations: the walk point's bucket then pins the
answer among survivors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from .core import LayerFunction, Variant, follow_pointers
from .sim import (
    Message,
    PlayerView,
    ProtocolHandle,
    ProtocolInvariantError,
    ViewKind,
    encode_pointer,
    pointer_width,
)


def iterated_log(n: float, times: int) -> float:
    """Apply log2 `times` times, starting from n; each application clamps at 1."""
    if n <= 0:
        raise ValueError("iterated_log needs a positive start value")
    if times < 0:
        raise ValueError("times must be nonnegative")
    value = float(n)
    for _ in range(times):
        value = max(1.0, math.log2(value)) if value > 1.0 else 1.0
    return value


def log_star(n: float) -> int:
    """How many log2 applications bring n to at most 1."""
    if n <= 0:
        raise ValueError("log_star needs a positive value")
    count = 0
    value = float(n)
    while value > 1.0:
        value = math.log2(value)
        count += 1
    return count


def bucket_index(t: int, n: int, r: int) -> int:
    """Which of the 2^t interval buckets over [n] holds point r."""
    if t < 0:
        raise ValueError("bucket width must be nonnegative")
    if not 1 <= r <= n:
        raise ValueError(f"point {r} outside [1, {n}]")
    return -(-(2**t) * r // n)


def bucket_members(t: int, n: int, j: int) -> tuple[int, ...]:
    """All points of bucket j, ascending (possibly empty for large j)."""
    if not 1 <= j <= 2**t:
        raise ValueError(f"bucket {j} outside [1, {2 ** t}]")
    # bucket j covers ((j-1) * n / 2^t, j * n / 2^t]
    lo = (j - 1) * n // (2**t) + 1
    hi = j * n // (2**t)
    return tuple(r for r in range(max(lo, 1), min(hi, n) + 1) if bucket_index(t, n, r) == j)


@dataclass(frozen=True)
class BucketingScheme:
    """The 2^t interval buckets over [n]."""

    t: int
    n: int

    def index_of(self, r: int) -> int:
        return bucket_index(self.t, self.n, r)

    def members(self, j: int) -> tuple[int, ...]:
        return bucket_members(self.t, self.n, j)

    @property
    def max_size(self) -> int:
        return -(-self.n // (2**self.t))


@dataclass(frozen=True)
class BucketPlan:
    """Per-player bucket widths. widths[j-1] is player j's width b_j; the
    final entry is the raw candidate count n (never used as a message
    width). terminal is the last player that actually announces buckets."""

    n: int
    k: int
    widths: tuple[int, ...]
    doubling: bool
    terminal: int

    def width(self, j: int) -> int:
        if not 1 <= j <= self.k:
            raise ValueError(f"player {j} outside [1, {self.k}]")
        return self.widths[j - 1]

    def __post_init__(self):
        if not 1 <= self.terminal <= self.k - 1:
            raise ValueError("terminal player must announce before the last player")
        if 2 ** self.widths[self.terminal - 1] < self.n:
            raise ValueError("terminal width leaves buckets of size over 1")


def bucket_width_plan(n: int, k: int) -> BucketPlan:
    """Iterated-log widths: player j gets ceil(log2 applied k-j times), min 1."""
    if k < 3:
        raise ValueError("bucketing needs k >= 3")
    widths = tuple(
        max(1, math.ceil(iterated_log(n, k - j))) for j in range(1, k)
    ) + (n,)
    return BucketPlan(n, k, widths, doubling=False, terminal=k - 1)


def doubling_plan(n: int, k: int) -> BucketPlan:
    """Doubling widths 1, 2, 4, ..., capped at ceil(log2 n).

    Raises when k-1 announcing players are too few to reach singleton
    buckets (needs roughly k >= loglog n + 2).
    """
    if k < 3:
        raise ValueError("bucketing needs k >= 3")
    cap = max(1, pointer_width(n))
    widths = [1]
    while len(widths) < k - 1:
        widths.append(min(cap, 2 * widths[-1]))
    terminal = next(
        (j for j in range(1, k) if 2 ** widths[j - 1] >= n),
        None,
    )
    if terminal is None:
        raise ValueError(
            f"doubling widths cannot reach singleton buckets with {k - 1} announcing "
            f"players at n={n}"
        )
    return BucketPlan(n, k, tuple(widths) + (n,), doubling=True, terminal=terminal)


def _parse_survivors(msg: Message, n: int, width: int) -> tuple[tuple[int, ...], Message]:
    """Split an announcement into (ascending survivor points, index area)."""
    if len(msg) < n:
        raise ProtocolInvariantError("announcement shorter than its membership indicator")
    survivors = tuple(r for r in range(1, n + 1) if msg.bits[r - 1] == 1)
    indices = msg.slice(n, len(msg))
    if len(indices) != len(survivors) * width:
        raise ProtocolInvariantError("announcement index area has the wrong size")
    return survivors, indices


def _read_index(indices: Message, rank: int, width: int) -> int:
    return indices.slice(rank * width, (rank + 1) * width).to_uint() + 1


def _bucket_of_walk(view: PlayerView, plan: BucketPlan, j: int, walk_point: int) -> int:
    """Recover the announced bucket of the answer from the previous message.

    Player 2 reads position i of the first announcement; later players
    locate their walk point inside the previous survivor set.
    """
    prev = view.messages[j - 2]
    prev_width = plan.width(j - 1)
    if j == 2:
        if len(prev) != view.n * prev_width:
            raise ProtocolInvariantError("first announcement has the wrong size")
        return prev.slice((walk_point - 1) * prev_width, walk_point * prev_width).to_uint() + 1
    survivors, indices = _parse_survivors(prev, view.n, prev_width)
    if walk_point not in survivors:
        raise ProtocolInvariantError("walk point missing from the surviving set")
    return _read_index(indices, survivors.index(walk_point), prev_width)


def _walk_of(view: PlayerView, upto: int) -> int:
    """Walk point entering layer `upto`, from the individually visible prefix."""
    return follow_pointers(view.start, view.prefix_layers[: upto - 2])


def _make_bucketing(plan: BucketPlan, name: str) -> ProtocolHandle:
    n, k = plan.n, plan.k

    def speak_first(view: PlayerView) -> Message:
        g = view.suffix  # collapsed suffix of layer 1
        t = plan.width(1)
        return Message.concat(
            Message.from_uint(bucket_index(t, n, g(r)) - 1, t) for r in range(1, n + 1)
        )

    def announcer_for(j: int) -> Callable[[PlayerView], Message]:
        def speak_buckets(view: PlayerView) -> Message:
            if j > plan.terminal:
                return Message()
            walk_point = _walk_of(view, j)
            bucket = _bucket_of_walk(view, plan, j, walk_point)
            members = set(bucket_members(plan.width(j - 1), n, bucket))
            g = view.suffix
            survivors = tuple(s for s in range(1, n + 1) if g(s) in members)
            survivor_set = set(survivors)
            t = plan.width(j)
            indicator = Message.from_bits(
                1 if s in survivor_set else 0 for s in range(1, n + 1)
            )
            indices = Message.concat(
                Message.from_uint(bucket_index(t, n, g(s)) - 1, t) for s in survivors
            )
            return indicator + indices

        return speak_buckets

    def speak_answer(view: PlayerView) -> Message:
        stop = plan.terminal
        # chain check: every walk point must survive into the set that framed it
        for j in range(3, stop + 1):
            survivors, _ = _parse_survivors(view.messages[j - 2], n, plan.width(j - 1))
            if _walk_of(view, j) not in survivors:
                raise ProtocolInvariantError("walk point missing from the surviving set")
        walk_point = _walk_of(view, stop + 1)
        t = plan.width(stop)
        msg = view.messages[stop - 1]
        if stop == 1:
            if len(msg) != n * t:
                raise ProtocolInvariantError("first announcement has the wrong size")
            value = msg.slice((walk_point - 1) * t, walk_point * t).to_uint() + 1
        else:
            survivors, indices = _parse_survivors(msg, n, t)
            if walk_point not in survivors:
                raise ProtocolInvariantError("walk point missing from the surviving set")
            value = _read_index(indices, survivors.index(walk_point), t)
        members = bucket_members(t, n, value)
        if len(members) != 1:
            raise ProtocolInvariantError("terminal bucket is not a singleton")
        return encode_pointer(members[0], n)

    players = (
        speak_first,
        *[announcer_for(j) for j in range(2, k)],
        speak_answer,
    )
    return ProtocolHandle(
        name=name,
        k=k,
        variant=Variant.MPJ_HAT,
        view_kind=ViewKind.COLLAPSING,
        players=players,
        n=n,
    )


def bucketing_protocol(n: int, k: int) -> ProtocolHandle:
    """Iterated-log bucket announcements; first player sends exactly
    n * ceil(log2 applied k-1 times) bits."""
    return _make_bucketing(bucket_width_plan(n, k), "bucketing")


def bucketing_protocol_doubling(n: int, k: int) -> ProtocolHandle:
    """Doubling bucket widths with early termination once buckets are singletons."""
    return _make_bucketing(doubling_plan(n, k), "bucketing-doubling")
