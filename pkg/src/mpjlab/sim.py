"""One-way blackboard runtime with per-player view enforcement.

A protocol has k players speaking once each, in order. Player j's message
may depend only on their view and the messages already on the blackboard;
the last message encodes the output. Views come in three shapes:

* full one-way: every layer except the player's own (layer j);
* collapsing: the layers before j individually, plus everything after j
  collapsed into a single composed layer;
* conservative collapsing: only the walk point entering layer j, plus the
  collapsed suffix.

Views are plain frozen values that simply do not contain invisible data,
so reading outside the view is structurally impossible. The runtime calls
every message function twice and requires bit-identical results, which
catches hidden state or stray randomness.

Costs are reported two ways: the full transcript length, and the length
without the final output message (upper-bound formulas exclude the output).
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Iterable, Sequence

from .core import (
    BitVector,
    Instance,
    LayerFunction,
    MpjHatInstance,
    MpjInstance,
    Variant,
    chain_layers,
    compose_bits,
    eval_instance,
    follow_pointers,
)


class ViewKind(Enum):
    FULL_ONE_WAY = "full-one-way"
    COLLAPSING = "collapsing"
    CONSERVATIVE_COLLAPSING = "conservative-collapsing"


class ProtocolContractError(RuntimeError):
    """A player broke the runtime contract (nondeterminism, bad output shape)."""


class ProtocolInvariantError(RuntimeError):
    """A protocol's internal invariant failed while composing its message."""


@dataclass(frozen=True)
class Message:
    """An immutable finite bit sequence (possibly empty)."""

    bits: tuple[int, ...] = ()

    def __post_init__(self):
        if any(b not in (0, 1) for b in self.bits):
            raise ValueError("message bits must be 0 or 1")

    def __len__(self) -> int:
        return len(self.bits)

    def __add__(self, other: "Message") -> "Message":
        return Message(self.bits + other.bits)

    def slice(self, start: int, stop: int) -> "Message":
        if not 0 <= start <= stop <= len(self.bits):
            raise ValueError(f"slice [{start}, {stop}) outside message of {len(self.bits)} bits")
        return Message(self.bits[start:stop])

    def chunks(self, width: int) -> tuple["Message", ...]:
        if width < 0 or (width == 0 and self.bits):
            raise ValueError("bad chunk width")
        if width == 0:
            return ()
        if len(self.bits) % width:
            raise ValueError("message length is not a multiple of the chunk width")
        return tuple(
            Message(self.bits[t : t + width]) for t in range(0, len(self.bits), width)
        )

    @classmethod
    def from_bits(cls, bits: Iterable[int]) -> "Message":
        return cls(tuple(bits))

    @classmethod
    def from01(cls, text: str) -> "Message":
        if any(c not in "01" for c in text):
            raise ValueError("message string must be over 0/1")
        return cls(tuple(int(c) for c in text))

    def to01(self) -> str:
        return "".join(str(b) for b in self.bits)

    @classmethod
    def from_uint(cls, value: int, width: int) -> "Message":
        if width < 0 or not 0 <= value < (1 << width):
            raise ValueError(f"{value} does not fit in {width} bits")
        return cls(tuple((value >> (width - 1 - t)) & 1 for t in range(width)))

    def to_uint(self) -> int:
        out = 0
        for b in self.bits:
            out = (out << 1) | b
        return out

    @staticmethod
    def concat(parts: Iterable["Message"]) -> "Message":
        bits: list[int] = []
        for p in parts:
            bits.extend(p.bits)
        return Message(tuple(bits))


def pointer_width(n: int) -> int:
    """Bits needed to name a point of [n] (0 when n = 1)."""
    if n < 1:
        raise ValueError("n must be positive")
    return (n - 1).bit_length()


def encode_pointer(value: int, n: int) -> Message:
    """Big-endian encoding of value-1 in pointer_width(n) bits."""
    if not 1 <= value <= n:
        raise ValueError(f"pointer {value} outside [1, {n}]")
    return Message.from_uint(value - 1, pointer_width(n))


def decode_pointer(msg: Message, n: int) -> int:
    if len(msg) != pointer_width(n):
        raise ValueError(f"pointer message must be {pointer_width(n)} bits, got {len(msg)}")
    value = msg.to_uint() + 1
    if value > n:
        raise ValueError(f"decoded pointer {value} outside [1, {n}]")
    return value


@dataclass(frozen=True)
class PlayerView:
    """Everything player j may read, and nothing else.

    Populated fields depend on the view kind; absent data is None/empty.
    `start` is the first-layer pointer (hidden from player 1), `walked` the
    conservative walk point entering layer j, `prefix_layers` the
    individually visible middle layers before j, `later_layers` the
    individually visible layers after j (full one-way only), `final_bits`
    the Boolean final layer when individually visible, and `suffix` the
    collapsed composition of everything after layer j.
    """

    j: int
    n: int
    k: int
    variant: Variant
    kind: ViewKind
    messages: tuple[Message, ...]
    start: int | None = None
    walked: int | None = None
    prefix_layers: tuple[LayerFunction, ...] = ()
    later_layers: tuple[LayerFunction, ...] | None = None
    final_bits: BitVector | None = None
    suffix: BitVector | LayerFunction | None = None


def make_view(
    inst: Instance, j: int, kind: ViewKind, messages: tuple[Message, ...]
) -> PlayerView:
    """Project an instance onto player j's view of the given kind."""
    n, k = inst.n, inst.k
    if not 1 <= j <= k:
        raise ValueError(f"player index {j} outside [1, {k}]")
    base = dict(j=j, n=n, k=k, variant=inst.variant, kind=kind, messages=messages)
    boolean = isinstance(inst, MpjInstance)
    layers = inst.middles if boolean else inst.layers

    if boolean:
        suffix = compose_bits(inst.x, inst.middles[j - 1 :]) if j < k else None
    else:
        suffix = chain_layers(layers[j - 1 :], n)

    if kind is ViewKind.FULL_ONE_WAY:
        return PlayerView(
            **base,
            start=inst.i if j != 1 else None,
            prefix_layers=layers[: j - 2] if j >= 2 else (),
            later_layers=layers[j - 1 :],
            final_bits=inst.x if boolean and j != k else None,
            suffix=suffix,
        )
    if kind is ViewKind.COLLAPSING:
        return PlayerView(
            **base,
            start=inst.i if j != 1 else None,
            prefix_layers=layers[: j - 2] if j >= 2 else (),
            suffix=suffix,
        )
    # conservative collapsing: only the walk point and the collapsed suffix
    walked = follow_pointers(inst.i, layers[: j - 2]) if j >= 2 else None
    return PlayerView(**base, walked=walked, suffix=suffix)


@dataclass(frozen=True)
class ProtocolHandle:
    """A k-player one-way protocol: one message function per player.

    `n` may be None for protocols that work at any width; when set, the
    runtime rejects mismatched instances. `declared_max_bits` is an
    optional per-player bound on message length, checked on every run.
    """

    name: str
    k: int
    variant: Variant
    view_kind: ViewKind
    players: tuple[Callable[[PlayerView], Message], ...]
    n: int | None = None
    declared_max_bits: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.k < 2:
            raise ValueError("protocols need at least 2 players")
        if len(self.players) != self.k:
            raise ValueError(f"expected {self.k} message functions, got {len(self.players)}")
        if self.declared_max_bits is not None and len(self.declared_max_bits) != self.k:
            raise ValueError("declared_max_bits must list one bound per player")


@dataclass(frozen=True)
class Transcript:
    """All messages of one run plus the decoded output."""

    messages: tuple[Message, ...]
    output: int
    per_player_bits: tuple[int, ...]

    @property
    def total_cost(self) -> int:
        return sum(self.per_player_bits)

    @property
    def prefix_cost(self) -> int:
        """Cost without the final output message."""
        return sum(self.per_player_bits[:-1])


def _decode_output(last: Message, n: int, variant: Variant) -> int:
    if variant is Variant.MPJ:
        if len(last) != 1:
            raise ProtocolContractError(
                f"Boolean output message must be 1 bit, got {len(last)}"
            )
        return last.bits[0]
    width = pointer_width(n)
    if len(last) != width:
        raise ProtocolContractError(
            f"pointer output message must be {width} bits, got {len(last)}"
        )
    try:
        return decode_pointer(last, n)
    except ValueError as exc:
        raise ProtocolContractError(str(exc)) from None


def run(protocol: ProtocolHandle, inst: Instance) -> Transcript:
    """Execute one protocol run; replays every message to catch nondeterminism."""
    if inst.variant is not protocol.variant:
        raise ValueError(
            f"protocol expects variant {protocol.variant.value}, instance is {inst.variant.value}"
        )
    if inst.k != protocol.k:
        raise ValueError(f"protocol expects k={protocol.k}, instance has k={inst.k}")
    if protocol.n is not None and inst.n != protocol.n:
        raise ValueError(f"protocol expects n={protocol.n}, instance has n={inst.n}")

    messages: list[Message] = []
    for j in range(1, protocol.k + 1):
        view = make_view(inst, j, protocol.view_kind, tuple(messages))
        fn = protocol.players[j - 1]
        msg = fn(view)
        replay = fn(view)
        if not isinstance(msg, Message):
            raise ProtocolContractError(f"player {j} returned {type(msg).__name__}, not a Message")
        if msg != replay:
            raise ProtocolContractError(f"player {j} is nondeterministic on replay")
        if protocol.declared_max_bits is not None:
            bound = protocol.declared_max_bits[j - 1]
            if len(msg) > bound:
                raise ProtocolContractError(
                    f"player {j} sent {len(msg)} bits, over its declared bound {bound}"
                )
        messages.append(msg)
    output = _decode_output(messages[-1], inst.n, protocol.variant)
    return Transcript(tuple(messages), output, tuple(len(m) for m in messages))


@dataclass(frozen=True)
class Failure:
    """One wrong answer caught during verification."""

    inst: Instance
    expected: int
    got: int


@dataclass(frozen=True)
class VerifyReport:
    protocol: str
    checked: int
    failures: tuple[Failure, ...]
    worst_cost: int
    worst_prefix_cost: int
    per_player_max_bits: tuple[int, ...]

    @property
    def ok(self) -> bool:
        return not self.failures


def verify(protocol: ProtocolHandle, instances: Iterable[Instance]) -> VerifyReport:
    """Run the protocol against the brute-force answer for every instance."""
    checked = 0
    failures: list[Failure] = []
    worst = 0
    worst_prefix = 0
    per_player = [0] * protocol.k
    for inst in instances:
        transcript = run(protocol, inst)
        expected = eval_instance(inst)
        checked += 1
        if transcript.output != expected:
            failures.append(Failure(inst, expected, transcript.output))
        worst = max(worst, transcript.total_cost)
        worst_prefix = max(worst_prefix, transcript.prefix_cost)
        per_player = [max(a, b) for a, b in zip(per_player, transcript.per_player_bits)]
    return VerifyReport(
        protocol.name, checked, tuple(failures), worst, worst_prefix, tuple(per_player)
    )


@dataclass(frozen=True)
class CostRow:
    """Worst measured costs of one protocol at one width."""

    n: int
    k: int
    protocol: str
    view: str
    max_cost: int
    max_prefix_cost: int
    per_player_max: tuple[int, ...]


def cost_profile(
    protocol_for: Callable[[int], ProtocolHandle],
    n_values: Sequence[int],
    sampler: Callable[[ProtocolHandle, int], Iterable[Instance]],
) -> list[CostRow]:
    """Measure worst-case message sizes across widths; empty input, empty table."""
    rows = []
    for n in n_values:
        protocol = protocol_for(n)
        report = verify(protocol, sampler(protocol, n))
        rows.append(
            CostRow(
                n=n,
                k=protocol.k,
                protocol=protocol.name,
                view=protocol.view_kind.value,
                max_cost=report.worst_cost,
                max_prefix_cost=report.worst_prefix_cost,
                per_player_max=report.per_player_max_bits,
            )
        )
    return rows


def cost_rows_to_csv(rows: Sequence[CostRow]) -> str:
    """Fixed-schema CSV: n,k,protocol,view,max_cost,p1_bits,...,pk_bits."""
    if not rows:
        return ""
    k = rows[0].k
    if any(row.k != k for row in rows):
        raise ValueError("one cost table holds rows of a single k")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(
        ["n", "k", "protocol", "view", "max_cost"] + [f"p{j}_bits" for j in range(1, k + 1)]
    )
    for row in rows:
        writer.writerow(
            [row.n, row.k, row.protocol, row.view, row.max_cost, *row.per_player_max]
        )
    return buf.getvalue()
