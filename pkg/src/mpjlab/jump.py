"""Upper-bound protocols for the Boolean chain problem.

`index_protocol` is the two-player baseline: the bit holder publishes all
n bits and the pointer holder picks one.

The sublinear protocols trade those n bits against a plug-in three-player
subprotocol that only works when the middle layer is a permutation. The
first player publishes, for each middle layer she can see, the
subprotocol openings for a small set of permutation stand-ins (a cover,
see `covers`), plus the raw answer bits for the few points every cover
misses. Each later player answers every opening blindly; the last player
picks the one opening whose stand-in agrees with the pointer she can
compute, or falls back to a shipped raw bit. Message framing carries no
length headers: every part's size is a function of (n, d, m) and data
every reader can already see.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

from .core import (
    BitVector,
    LayerFunction,
    MpjInstance,
    Variant,
    compose_bits,
    eval_mpj,
    follow_pointers,
    sample_instance,
)
from .covers import CoverSet, build_d_cover, build_sd_cover
from .sim import (
    Message,
    PlayerView,
    ProtocolContractError,
    ProtocolHandle,
    ProtocolInvariantError,
    ViewKind,
)


@dataclass(frozen=True)
class PermProtocol3:
    """Black-box three-player subprotocol for a permutation middle layer.

    alpha(pi, x) is the first player's m-bit opening, beta(i, x, a) the
    second player's m-bit reply to an opening, and gamma(i, pi, a, b) the
    final bit. The contract: gamma(i, pi, alpha(pi, x), beta(i, x, alpha(pi, x)))
    equals x at pi(i) for every (i, pi, x).
    """

    m: int
    alpha: Callable[[LayerFunction, BitVector], Message]
    beta: Callable[[int, BitVector, Message], Message]
    gamma: Callable[[int, LayerFunction, Message, Message], int]


def naive_perm_protocol(n: int) -> PermProtocol3:
    """Baseline subprotocol with m = n: ship x, reply zeros, read position pi(i)."""

    def alpha(pi: LayerFunction, x: BitVector) -> Message:
        return Message(x.bits)

    def beta(i: int, x: BitVector, a: Message) -> Message:
        return Message((0,) * n)

    def gamma(i: int, pi: LayerFunction, a: Message, b: Message) -> int:
        return a.bits[pi(i) - 1]

    return PermProtocol3(n, alpha, beta, gamma)


@dataclass(frozen=True)
class PermProtocolFailure:
    i: int
    pi: LayerFunction
    x: BitVector
    expected: int
    got: int


def check_perm_protocol3(
    P: PermProtocol3,
    n: int,
    *,
    triples: Iterable[tuple[int, LayerFunction, BitVector]] | None = None,
) -> list[PermProtocolFailure]:
    """Exercise the subprotocol contract on all (i, pi, x) triples (or given ones)."""
    if triples is None:
        import itertools

        triples = (
            (i, LayerFunction(n, perm), BitVector(n, bits))
            for i in range(1, n + 1)
            for perm in itertools.permutations(range(1, n + 1))
            for bits in itertools.product((0, 1), repeat=n)
        )
    failures = []
    for i, pi, x in triples:
        a = P.alpha(pi, x)
        if len(a) != P.m:
            raise ProtocolContractError(f"alpha produced {len(a)} bits, expected {P.m}")
        b = P.beta(i, x, a)
        if len(b) != P.m:
            raise ProtocolContractError(f"beta produced {len(b)} bits, expected {P.m}")
        got = P.gamma(i, pi, a, b)
        expected = x(pi(i))
        if got != expected:
            failures.append(PermProtocolFailure(i, pi, x, expected, got))
    return failures


def index_protocol(n: int) -> ProtocolHandle:
    """Two players: publish all n bits, then output the bit at the pointer."""

    def speak_bits(view: PlayerView) -> Message:
        return Message(view.final_bits.bits)

    def speak_answer(view: PlayerView) -> Message:
        return Message((view.messages[0].bits[view.start - 1],))

    return ProtocolHandle(
        name="index",
        k=2,
        variant=Variant.MPJ,
        view_kind=ViewKind.FULL_ONE_WAY,
        players=(speak_bits, speak_answer),
        n=n,
        declared_max_bits=(n, 1),
    )


def choose_d(k: int, phi_n: float) -> int:
    """Cover size balancing opening cost against shipped raw bits.

    phi_n is the subprotocol's cost ratio m/n... strictly: the per-bit cost
    factor of the plug-in subprotocol; smaller phi_n permits larger d.
    """
    if k < 3:
        raise ValueError("choose_d needs k >= 3")
    if phi_n <= 0:
        raise ValueError("phi_n must be positive")
    value = (1.0 / ((k - 2) * phi_n)) ** (1.0 / (k - 1))
    # guard against float noise pushing an exact integer over the ceiling
    return max(1, math.ceil(value - 1e-9))


@dataclass(frozen=True)
class SjChain:
    """Per-level surviving point sets: level 1 is all of [n]; level j keeps
    the points whose fiber under layer j meets the previous level in more
    than d points."""

    n: int
    d: int
    levels: tuple[frozenset[int], ...]

    def level(self, j: int) -> frozenset[int]:
        if not 1 <= j <= len(self.levels):
            raise ValueError(f"level {j} outside [1, {len(self.levels)}]")
        return self.levels[j - 1]


def build_sj_chain(middles: Sequence[LayerFunction], d: int) -> SjChain:
    """Chain of surviving sets for middle layers f_2..f_{k-1} (k-2 of them)."""
    if not middles:
        raise ValueError("need at least one middle layer")
    if d < 1:
        raise ValueError("d must be at least 1")
    n = middles[0].n
    levels = [frozenset(range(1, n + 1))]
    for f in middles:
        prev = levels[-1]
        levels.append(
            frozenset(
                s for s in range(1, n + 1) if sum(1 for r in f.fiber(s) if r in prev) > d
            )
        )
    return SjChain(n, d, tuple(levels))


def _level_cover(f: LayerFunction, scope: frozenset[int], d: int, n: int) -> CoverSet:
    # level 1 covers everything; the plain construction keeps k=3 transcripts
    # identical to the dedicated three-player protocol
    if len(scope) == n:
        return build_d_cover(f, d)
    return build_sd_cover(f, scope, d)


def _heavy_points(f: LayerFunction, d: int) -> tuple[int, ...]:
    return tuple(s for s in f.range_values() if len(f.fiber(s)) > d)


def _alpha_block(P: PermProtocol3, cover: CoverSet, x: BitVector) -> Message:
    outs = []
    for pi in cover.perms:
        a = P.alpha(pi, x)
        if len(a) != P.m:
            raise ProtocolContractError(f"alpha produced {len(a)} bits, expected {P.m}")
        outs.append(a)
    return Message.concat(outs)


def _beta_block(P: PermProtocol3, pointer: int, x: BitVector, alphas: Message, d: int) -> Message:
    outs = []
    for a in alphas.chunks(P.m) if P.m else (Message(),) * d:
        b = P.beta(pointer, x, a)
        if len(b) != P.m:
            raise ProtocolContractError(f"beta produced {len(b)} bits, expected {P.m}")
        outs.append(b)
    return Message.concat(outs)


def mpj3_sublinear(P: PermProtocol3, d: int) -> ProtocolHandle:
    """Three players, one arbitrary middle layer, cover parameter d.

    First message: d openings (m bits each) plus the raw answer bits of the
    heavy points, ascending. Second: d blind replies. Third: one bit, from
    the matching opening or the shipped raw bit.
    """
    if d < 1:
        raise ValueError("d must be at least 1")
    m = P.m

    def speak_openings(view: PlayerView) -> Message:
        f = view.later_layers[0]
        x = view.final_bits
        block = _alpha_block(P, build_d_cover(f, d), x)
        raw = Message.from_bits(x(s) for s in _heavy_points(f, d))
        return block + raw

    def speak_replies(view: PlayerView) -> Message:
        alphas = view.messages[0].slice(0, d * m)
        return _beta_block(P, view.start, view.suffix, alphas, d)

    def speak_answer(view: PlayerView) -> Message:
        i = view.start
        f = view.prefix_layers[0]
        target = f(i)
        heavy = _heavy_points(f, d)
        if len(f.fiber(target)) > d:
            bit = view.messages[0].bits[d * m + heavy.index(target)]
            return Message((bit,))
        cover = build_d_cover(f, d)
        for ell, pi in enumerate(cover.perms):
            if pi(i) == target:
                a0 = view.messages[0].slice(ell * m, (ell + 1) * m)
                b0 = view.messages[1].slice(ell * m, (ell + 1) * m)
                return Message((P.gamma(i, pi, a0, b0),))
        raise ProtocolInvariantError("cover misses a light point")

    return ProtocolHandle(
        name="mpj3-sublinear",
        k=3,
        variant=Variant.MPJ,
        view_kind=ViewKind.FULL_ONE_WAY,
        players=(speak_openings, speak_replies, speak_answer),
    )


def mpjk_sublinear(P: PermProtocol3, d: int, k: int) -> ProtocolHandle:
    """k players, arbitrary middle layers, cover parameter d.

    The first message has k-2 opening parts (one per middle layer, each
    exactly d*m bits, scoped to that layer's surviving set) and a final
    part holding the raw answer bits of the last surviving set, ascending.
    Player j answers the openings of part j-1 blindly. The last player
    resolves at the first level whose surviving fiber is small, or reads
    her walk point's raw bit from the final part.
    """
    if k < 3:
        raise ValueError("mpjk_sublinear needs k >= 3")
    if d < 1:
        raise ValueError("d must be at least 1")
    m = P.m

    def speak_openings(view: PlayerView) -> Message:
        middles = view.later_layers
        x = view.final_bits
        chain = build_sj_chain(middles, d)
        parts = []
        for lvl in range(1, k - 1):
            cover = _level_cover(middles[lvl - 1], chain.level(lvl), d, view.n)
            suffix = compose_bits(x, middles[lvl:])
            parts.append(_alpha_block(P, cover, suffix))
        last = sorted(chain.level(k - 1))
        parts.append(Message.from_bits(x(s) for s in last))
        return Message.concat(parts)

    def replies_for(j: int) -> Callable[[PlayerView], Message]:
        def speak_replies(view: PlayerView) -> Message:
            pointer = follow_pointers(view.start, view.prefix_layers)
            alphas = view.messages[0].slice((j - 2) * d * m, (j - 1) * d * m)
            return _beta_block(P, pointer, view.suffix, alphas, d)

        return speak_replies

    def speak_answer(view: PlayerView) -> Message:
        middles = view.prefix_layers
        chain = build_sj_chain(middles, d)
        walk = [view.start]
        for f in middles:
            walk.append(f(walk[-1]))
        # walk[t] enters layer t+2; the level-lvl pointer is walk[lvl-1]
        for lvl in range(1, k - 1):
            f = middles[lvl - 1]
            pointer = walk[lvl - 1]
            target = f(pointer)
            scope = chain.level(lvl)
            if sum(1 for r in f.fiber(target) if r in scope) > d:
                continue
            cover = _level_cover(f, scope, d, view.n)
            for ell, pi in enumerate(cover.perms):
                if pi(pointer) == target:
                    a0 = view.messages[0].slice(
                        ((lvl - 1) * d + ell) * m, ((lvl - 1) * d + ell + 1) * m
                    )
                    b0 = view.messages[lvl].slice(ell * m, (ell + 1) * m)
                    return Message((P.gamma(pointer, pi, a0, b0),))
            raise ProtocolInvariantError("cover misses a surviving light point")
        last = sorted(chain.level(k - 1))
        end = walk[-1]
        if end not in chain.level(k - 1):
            raise ProtocolInvariantError("walk point escaped the surviving chain")
        bit = view.messages[0].bits[(k - 2) * d * m + last.index(end)]
        return Message((bit,))

    players = (
        speak_openings,
        *[replies_for(j) for j in range(2, k)],
        speak_answer,
    )
    return ProtocolHandle(
        name="mpjk-sublinear",
        k=k,
        variant=Variant.MPJ,
        view_kind=ViewKind.FULL_ONE_WAY,
        players=players,
    )
