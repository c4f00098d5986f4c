"""Fooling-pair construction against short-message collapsing protocols.

Two bit layers x, x' *cross* when all four joint patterns (0,0), (0,1),
(1,0), (1,1) occur among positions. Any two distinct, non-complementary
half-weight layers cross, and there are too many half-weight layers for
short messages to keep every message class crossing-free: with t at most
n - log2(n)/2 - 2 message bits, some class must hold a crossing pair.

The construction walks a collapsing protocol front to back. At each level
it partitions candidate suffix layers by the message the next player
would send, picks the first crossed class, and rewrites the pair one
layer deeper: the new middle layer sends each old position class to a
fixed position of the new pair with the same joint pattern, which keeps
the old pair equal to the new pair composed with that layer. After the
last level the pair is literal: two instances differing only in the final
layer, with answers 0 and 1, whose first k-1 messages are bitwise equal.
The last player sees the same view either way and must answer one wrong.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

from .core import BitVector, LayerFunction, MpjInstance, Variant, eval_mpj
from .sim import Message, PlayerView, ProtocolHandle, ViewKind, run


class BoundRefusedError(ValueError):
    """The target protocol does not meet the attack's preconditions."""


class CrossingSearchError(RuntimeError):
    """No crossed class was found: a counterexample to the counting bound."""


PATTERNS = ((0, 0), (0, 1), (1, 0), (1, 1))


def iab_sets(x: BitVector, xp: BitVector) -> dict[tuple[int, int], tuple[int, ...]]:
    """Positions of each joint pattern: key (a, b) maps to {r : x_r = a, x'_r = b}."""
    if x.n != xp.n:
        raise ValueError("joint patterns need equal widths")
    out: dict[tuple[int, int], list[int]] = {p: [] for p in PATTERNS}
    for r in range(1, x.n + 1):
        out[(x(r), xp(r))].append(r)
    return {p: tuple(v) for p, v in out.items()}


def is_crossing(x: BitVector, xp: BitVector) -> bool:
    """True when all four joint patterns occur."""
    return all(iab_sets(x, xp)[p] for p in PATTERNS)


@dataclass(frozen=True)
class CrossingPair:
    """Two bit layers exhibiting all four joint patterns."""

    x: BitVector
    xp: BitVector

    def positions(self, a: int, b: int) -> tuple[int, ...]:
        return iab_sets(self.x, self.xp)[(a, b)]

    @property
    def crossing(self) -> bool:
        return is_crossing(self.x, self.xp)


def max_message_bits(n: int) -> float:
    """Largest per-player message size the counting argument tolerates."""
    if n < 2 or n % 2:
        raise ValueError("the bound needs an even n of at least 2")
    return n - math.log2(n) / 2 - 2


def half_weight_strings(n: int) -> tuple[BitVector, ...]:
    """All weight n/2 bit layers, ascending in lexicographic bit order."""
    if n % 2:
        raise ValueError("half weight needs an even n")
    out = [
        BitVector(n, bits)
        for bits in itertools.product((0, 1), repeat=n)
        if sum(bits) == n // 2
    ]
    return tuple(out)  # product order is already lexicographic


def find_crossing_pair(cell: Iterable[BitVector]) -> CrossingPair | None:
    """First crossing pair of a cell, or None.

    Fast path: any two distinct non-complementary half-weight members cross,
    so scan those first in lexicographic order. Fall back to the full
    pairwise scan; a cell is uncrossed exactly when this returns None.
    """
    members = sorted(set(cell), key=lambda v: v.bits)
    halves = [v for v in members if 2 * v.weight == v.n]
    for va, vb in itertools.combinations(halves, 2):
        if vb != va.complement():
            pair = CrossingPair(va, vb)
            if not pair.crossing:  # unreachable for half-weight; keep the guarantee honest
                continue
            return pair
    for va, vb in itertools.combinations(members, 2):
        if is_crossing(va, vb):
            return CrossingPair(va, vb)
    return None


def find_crossed_cell(
    message_fn: Callable[[BitVector], Message], n: int, t_bound: float
) -> tuple[Message, CrossingPair]:
    """Partition half-weight layers by message value; return the first crossed cell.

    t_bound gates the precondition. For protocols whose messages all share
    one length, the counting argument guarantees a crossed class whenever
    t_bound stays at or below n - log2(n)/2 - 2. Varying the message length
    buys a protocol one extra factor of two of classes, so a deliberately
    packed protocol sitting right at the boundary can leave every class
    crossing-free; that outcome raises CrossingSearchError.
    """
    limit = max_message_bits(n)
    if t_bound > limit:
        raise BoundRefusedError(
            f"message bound {t_bound} exceeds the counting limit {limit:.3f} at n={n}"
        )
    cells: dict[tuple[int, ...], list[BitVector]] = {}
    for y in half_weight_strings(n):
        msg = message_fn(y)
        if len(msg) > t_bound:
            raise BoundRefusedError(
                f"message of {len(msg)} bits exceeds the declared bound {t_bound}"
            )
        cells.setdefault(msg.bits, []).append(y)
    for key in sorted(cells, key=lambda bits: (len(bits), bits)):
        pair = find_crossing_pair(cells[key])
        if pair is not None:
            return Message(key), pair
    raise CrossingSearchError(
        f"all {len(cells)} message classes over {math.comb(n, n // 2)} half-weight "
        f"layers at n={n} are crossing-free; variable-length messages can evade "
        f"the fixed-length counting argument right at the boundary"
    )


@dataclass(frozen=True)
class AdversaryState:
    """Progress of the level-by-level construction.

    After processing level j, `layers` holds the fixed middle layers
    f_2..f_j, `prefix_messages` the forced first j messages, and `pair`
    the current crossing pair standing in for everything after layer j.
    """

    level: int
    start: int
    layers: tuple[LayerFunction, ...]
    prefix_messages: tuple[Message, ...]
    pair: CrossingPair


@dataclass(frozen=True)
class FoolingPair:
    """Two instances the protocol cannot distinguish until too late."""

    inst0: MpjInstance
    inst1: MpjInstance
    prefix_messages: tuple[Message, ...]


def _collapsing_view(
    protocol: ProtocolHandle,
    j: int,
    n: int,
    start: int | None,
    layers: tuple[LayerFunction, ...],
    messages: tuple[Message, ...],
    suffix: BitVector,
) -> PlayerView:
    return PlayerView(
        j=j,
        n=n,
        k=protocol.k,
        variant=Variant.MPJ,
        kind=ViewKind.COLLAPSING,
        messages=messages,
        start=start,
        prefix_layers=layers,
        suffix=suffix,
    )


def _check_preconditions(protocol: ProtocolHandle) -> int:
    if protocol.variant is not Variant.MPJ:
        raise BoundRefusedError("the attack targets Boolean protocols only")
    if protocol.view_kind is not ViewKind.COLLAPSING:
        raise BoundRefusedError("the attack targets collapsing views only")
    if protocol.n is None:
        raise BoundRefusedError("the attack needs a width-bound protocol (n set)")
    n = protocol.n
    try:
        limit = max_message_bits(n)
    except ValueError as exc:
        raise BoundRefusedError(str(exc)) from None
    if protocol.declared_max_bits is None:
        raise BoundRefusedError("the attack needs declared per-player message bounds")
    for j, bound in enumerate(protocol.declared_max_bits[: protocol.k - 1], start=1):
        if bound > limit:
            raise BoundRefusedError(
                f"player {j} declares {bound} bits, over the counting limit "
                f"{limit:.3f} at n={n}"
            )
    return n


def build_fooling_inputs(protocol: ProtocolHandle) -> FoolingPair:
    """Construct two instances that force an error past players 1..k-1.

    The first instance evaluates to 0, the second to 1; they differ only in
    the final bit layer, and the protocol's first k-1 messages are equal on
    both (returned as prefix_messages).
    """
    n = _check_preconditions(protocol)
    k = protocol.k

    def cell_of(j: int, state_layers, state_msgs, start):
        fn = protocol.players[j - 1]
        bound = protocol.declared_max_bits[j - 1]
        return find_crossed_cell(
            lambda y: fn(
                _collapsing_view(protocol, j, n, start, state_layers, state_msgs, y)
            ),
            n,
            bound,
        )

    first_msg, pair = cell_of(1, (), (), None)
    start = min(pair.positions(0, 1))
    state = AdversaryState(1, start, (), (first_msg,), pair)

    for level in range(1, k - 1):
        msg, new_pair = cell_of(level + 1, state.layers, state.prefix_messages, state.start)
        targets = {p: min(new_pair.positions(*p)) for p in PATTERNS}
        old = state.pair
        values = [0] * n
        for p in PATTERNS:
            for r in old.positions(*p):
                values[r - 1] = targets[p]
        layer = LayerFunction(n, tuple(values))
        # the rewrite must compose back to the pair it replaced
        if old.x != new_pair.x.through(layer) or old.xp != new_pair.xp.through(layer):
            raise CrossingSearchError("layer rewrite failed to preserve the pair")
        state = AdversaryState(
            level + 1,
            state.start,
            state.layers + (layer,),
            state.prefix_messages + (msg,),
            new_pair,
        )

    inst0 = MpjInstance(n, k, state.start, state.layers, state.pair.x)
    inst1 = MpjInstance(n, k, state.start, state.layers, state.pair.xp)
    if eval_mpj(inst0) != 0 or eval_mpj(inst1) != 1:
        raise CrossingSearchError("constructed pair has the wrong answers")
    return FoolingPair(inst0, inst1, state.prefix_messages)


@dataclass(frozen=True)
class FoolingReport:
    """Replay outcome of a fooling pair."""

    prefix_equal: bool
    outputs: tuple[int, int]
    expected: tuple[int, int]
    errors: int
    degenerate: bool

    @property
    def fooled(self) -> bool:
        return self.prefix_equal and self.errors == 1 and not self.degenerate


def verify_fooling(
    protocol: ProtocolHandle, inst0: MpjInstance, inst1: MpjInstance
) -> FoolingReport:
    """Replay both instances and confirm the shared-prefix, one-error outcome."""
    if (inst0.n, inst0.k, inst0.i, inst0.middles) != (
        inst1.n,
        inst1.k,
        inst1.i,
        inst1.middles,
    ):
        raise ValueError("fooling instances must differ only in the final layer")
    degenerate = inst0 == inst1
    t0 = run(protocol, inst0)
    t1 = run(protocol, inst1)
    prefix_equal = t0.messages[:-1] == t1.messages[:-1]
    expected = (eval_mpj(inst0), eval_mpj(inst1))
    outputs = (t0.output, t1.output)
    errors = sum(1 for got, want in zip(outputs, expected) if got != want)
    return FoolingReport(prefix_equal, outputs, expected, errors, degenerate)
