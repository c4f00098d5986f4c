"""Short-message collapsing protocols used as attack targets.

These protocols are deliberately weak: every non-final player compresses
her collapsed suffix into at most t bits (truncation, seeded parities, or
a seeded hash), which is exactly the regime the fooling-pair construction
defeats. The final player answers with some fixed deterministic rule; the
attack never needs to know which.
"""

from __future__ import annotations

import hashlib
import math
import random
from typing import Callable

from .core import BitVector, Variant
from .sim import Message, PlayerView, ProtocolHandle, ViewKind


def _final_bit(view: PlayerView) -> Message:
    # parity of everything on the blackboard: deterministic and view-pure
    total = sum(sum(m.bits) for m in view.messages)
    return Message((total & 1,))


def _handle(
    name: str, n: int, k: int, t: int, speak: Callable[[int], Callable[[PlayerView], Message]]
) -> ProtocolHandle:
    if k < 2:
        raise ValueError("need at least 2 players")
    players = tuple(speak(j) for j in range(1, k)) + (_final_bit,)
    return ProtocolHandle(
        name=name,
        k=k,
        variant=Variant.MPJ,
        view_kind=ViewKind.COLLAPSING,
        players=players,
        n=n,
        declared_max_bits=(t,) * (k - 1) + (1,),
    )


def constant_protocol(n: int, k: int) -> ProtocolHandle:
    """Every non-final player sends nothing at all."""

    def speak(j: int) -> Callable[[PlayerView], Message]:
        return lambda view: Message()

    return _handle("constant", n, k, 0, speak)


def truncating_protocol(n: int, k: int, t: int) -> ProtocolHandle:
    """Every non-final player sends the first t bits of her collapsed suffix."""
    if not 0 <= t <= n:
        raise ValueError(f"truncation width {t} outside [0, {n}]")

    def speak(j: int) -> Callable[[PlayerView], Message]:
        def fn(view: PlayerView) -> Message:
            suffix: BitVector = view.suffix
            return Message(suffix.bits[:t])

        return fn

    return _handle(f"truncate{t}", n, k, t, speak)


def parity_protocol(n: int, k: int, t: int, seed: int = 0) -> ProtocolHandle:
    """Every non-final player sends t seeded mask parities of her suffix."""
    if t < 0:
        raise ValueError("parity width must be nonnegative")
    masks: dict[int, list[tuple[int, ...]]] = {}
    for j in range(1, k):
        rng = random.Random((seed << 16) + j)
        masks[j] = [tuple(rng.randint(0, 1) for _ in range(n)) for _ in range(t)]

    def speak(j: int) -> Callable[[PlayerView], Message]:
        own = masks[j]

        def fn(view: PlayerView) -> Message:
            suffix: BitVector = view.suffix
            return Message(
                tuple(sum(m * b for m, b in zip(mask, suffix.bits)) & 1 for mask in own)
            )

        return fn

    return _handle(f"parity{t}", n, k, t, speak)


def hashing_protocol(n: int, k: int, t: int, seed: int = 0) -> ProtocolHandle:
    """Every non-final player sends t hash bits of her entire visible view."""
    if t < 0:
        raise ValueError("hash width must be nonnegative")

    def speak(j: int) -> Callable[[PlayerView], Message]:
        def fn(view: PlayerView) -> Message:
            suffix: BitVector = view.suffix
            material = "|".join(
                [
                    str(seed),
                    str(j),
                    str(view.start),
                    ";".join(",".join(map(str, f.values)) for f in view.prefix_layers),
                    suffix.to01(),
                    ";".join(m.to01() for m in view.messages),
                ]
            )
            digest = hashlib.sha256(material.encode()).digest()
            return Message(tuple((digest[i // 8] >> (i % 8)) & 1 for i in range(t)))

        return fn

    return _handle(f"hash{t}", n, k, t, speak)


def attack_width_limit(n: int) -> int:
    """Largest whole per-player width the fooling construction accepts."""
    return math.floor(n - math.log2(n) / 2 - 2)


def collapsing_family(n: int, k: int, count: int, seed: int = 0) -> list[ProtocolHandle]:
    """A deterministic mix of attack targets, with widths cycling 1..limit."""
    if count < 1:
        raise ValueError("count must be positive")
    limit = attack_width_limit(n)
    if limit < 1:
        raise ValueError(f"n={n} leaves no room for a positive message width")
    builders = (
        lambda t, s: truncating_protocol(n, k, t),
        lambda t, s: parity_protocol(n, k, t, seed=s),
        lambda t, s: hashing_protocol(n, k, t, seed=s),
    )
    out: list[ProtocolHandle] = [constant_protocol(n, k)]
    idx = 0
    while len(out) < count:
        build = builders[idx % len(builders)]
        t = 1 + (idx // len(builders)) % limit
        out.append(build(t, seed + idx))
        idx += 1
    return out[:count]
