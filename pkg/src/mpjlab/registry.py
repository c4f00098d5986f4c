"""Name-based construction of every shipped protocol.

The registry maps CLI protocol names to builders plus the instance space
each protocol is verified against (variant and permutation-layer mask).
Parametrized attack targets are spelled with their width in the name:
truncate4, parity3, hash2.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .bucketing import bucketing_protocol, bucketing_protocol_doubling
from .core import Variant
from .families import (
    constant_protocol,
    hashing_protocol,
    parity_protocol,
    truncating_protocol,
)
from .jump import index_protocol, mpj3_sublinear, mpjk_sublinear, naive_perm_protocol
from .sim import Message, PlayerView, ProtocolHandle, ViewKind


class UnknownProtocolError(ValueError):
    pass


PERM_PROTOCOLS = ("naive",)

BASE_NAMES = (
    "index",
    "mpj3-sublinear",
    "mpjk-sublinear",
    "bucketing",
    "bucketing-doubling",
    "broken-const",
    "constant",
    "truncate<t>",
    "parity<t>",
    "hash<t>",
)


@dataclass(frozen=True)
class BuiltProtocol:
    """A handle plus the instance space it is meant to run on."""

    handle: ProtocolHandle
    variant: Variant
    perm_mask: tuple[bool, ...] | None  # None: unrestricted layer space


def _broken_const(n: int, k: int) -> ProtocolHandle:
    """Deliberately wrong: ignores everything and answers 0."""

    def silent(view: PlayerView) -> Message:
        return Message()

    def zero(view: PlayerView) -> Message:
        return Message((0,))

    return ProtocolHandle(
        name="broken-const",
        k=k,
        variant=Variant.MPJ,
        view_kind=ViewKind.FULL_ONE_WAY,
        players=(silent,) * (k - 1) + (zero,),
        n=n,
        declared_max_bits=(0,) * (k - 1) + (1,),
    )


def build_protocol(
    name: str,
    *,
    n: int,
    k: int | None = None,
    d: int | None = None,
    perm_protocol: str = "naive",
    seed: int = 0,
) -> BuiltProtocol:
    """Construct a protocol by registry name; raises UnknownProtocolError/ValueError."""
    if perm_protocol not in PERM_PROTOCOLS:
        raise ValueError(f"unknown permutation subprotocol {perm_protocol!r}")

    if name == "index":
        if k not in (None, 2):
            raise ValueError("index is a 2-player protocol")
        return BuiltProtocol(index_protocol(n), Variant.MPJ, None)

    if name == "mpj3-sublinear":
        if k not in (None, 3):
            raise ValueError("mpj3-sublinear is a 3-player protocol")
        return BuiltProtocol(
            mpj3_sublinear(naive_perm_protocol(n), d if d is not None else 1),
            Variant.MPJ,
            None,
        )

    if name == "mpjk-sublinear":
        kk = k if k is not None else 4
        return BuiltProtocol(
            mpjk_sublinear(naive_perm_protocol(n), d if d is not None else 1, kk),
            Variant.MPJ,
            None,
        )

    if name == "bucketing":
        kk = k if k is not None else 3
        return BuiltProtocol(
            bucketing_protocol(n, kk), Variant.MPJ_HAT, (True,) * (kk - 1)
        )

    if name == "bucketing-doubling":
        kk = k if k is not None else 3
        return BuiltProtocol(
            bucketing_protocol_doubling(n, kk), Variant.MPJ_HAT, (True,) * (kk - 1)
        )

    if name == "broken-const":
        kk = k if k is not None else 3
        return BuiltProtocol(_broken_const(n, kk), Variant.MPJ, None)

    if name == "constant":
        kk = k if k is not None else 3
        return BuiltProtocol(constant_protocol(n, kk), Variant.MPJ, None)

    m = re.fullmatch(r"(truncate|parity|hash)(\d+)", name)
    if m:
        kind, t = m.group(1), int(m.group(2))
        kk = k if k is not None else 3
        if kind == "truncate":
            handle = truncating_protocol(n, kk, t)
        elif kind == "parity":
            handle = parity_protocol(n, kk, t, seed=seed)
        else:
            handle = hashing_protocol(n, kk, t, seed=seed)
        return BuiltProtocol(handle, Variant.MPJ, None)

    raise UnknownProtocolError(
        f"unknown protocol {name!r}; known: {', '.join(BASE_NAMES)}"
    )


def cost_bound(name: str, *, n: int, k: int, d: int | None) -> float | None:
    """The matching cost formula for a protocol's non-output communication."""
    if name == "index":
        return float(n)
    if name == "mpj3-sublinear":
        dd = d if d is not None else 1
        return 2 * dd * n + n / dd
    if name == "mpjk-sublinear":
        dd = d if d is not None else 1
        return 2 * (k - 2) * dd * n + n / dd ** (k - 2)
    if name in ("bucketing", "bucketing-doubling"):
        from .bucketing import bucket_width_plan, doubling_plan

        plan = bucket_width_plan(n, k) if name == "bucketing" else doubling_plan(n, k)
        total = float(n * plan.width(1))
        for j in range(2, k):
            if j > plan.terminal:
                break
            cap = -(-n // (2 ** plan.width(j - 1)))
            total += n + cap * plan.width(j)
        return total
    return None
