"""Layered pointer-jumping instances and their brute-force evaluation.

An instance is a chain of layers over [n] = {1, ..., n}: a start pointer
i, middle layers (total functions on [n]), and a final layer that is
either a bit layer x (Boolean variant, answer is the bit reached) or one
more function layer (pointer variant, answer is the point reached).

Conventions shared across the package:

* [n] = {1, ..., n}; all public values and serialized forms are 1-based.
* The textual form of a bit layer lists position 1 first: "0101" means
  x_1 = 0, x_2 = 1, x_3 = 0, x_4 = 1.
* Every value type is immutable and hashable, so instances can be cached,
  deduplicated, and compared structurally.
* Enumeration order is lexicographic over (i, f_2, ..., f_{k-1}, x) and
  sampling is a pure function of the seed, so fixtures are reproducible.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Iterator, Sequence


class Variant(Enum):
    """Which final layer an instance carries."""

    MPJ = "mpj"          # Boolean: final layer is a bit vector
    MPJ_HAT = "mpjhat"   # pointer: final layer is one more function

    @classmethod
    def parse(cls, text: str) -> "Variant":
        for member in cls:
            if member.value == text:
                return member
        raise ValueError(f"unknown variant {text!r}; expected 'mpj' or 'mpjhat'")


class BudgetExceededError(ValueError):
    """Enumeration refused because the instance count exceeds the budget."""

    def __init__(self, count: int, budget: int):
        super().__init__(
            f"enumeration would produce {count} instances, over the budget of {budget}"
        )
        self.count = count
        self.budget = budget


def _check_point(n: int, value: int, what: str) -> None:
    if not isinstance(value, int) or isinstance(value, bool) or not 1 <= value <= n:
        raise ValueError(f"{what} must be an integer in [1, {n}], got {value!r}")


@dataclass(frozen=True)
class LayerFunction:
    """A total function [n] -> [n], stored as its value tuple (f(1), ..., f(n))."""

    n: int
    values: tuple[int, ...]

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"n must be positive, got {self.n}")
        if len(self.values) != self.n:
            raise ValueError(f"expected {self.n} values, got {len(self.values)}")
        for v in self.values:
            _check_point(self.n, v, "layer value")

    @classmethod
    def identity(cls, n: int) -> "LayerFunction":
        return cls(n, tuple(range(1, n + 1)))

    def __call__(self, r: int) -> int:
        _check_point(self.n, r, "argument")
        return self.values[r - 1]

    @property
    def is_permutation(self) -> bool:
        return len(set(self.values)) == self.n

    def range_values(self) -> tuple[int, ...]:
        """Distinct outputs, ascending."""
        return tuple(sorted(set(self.values)))

    def fiber(self, s: int) -> tuple[int, ...]:
        """All preimages of s, ascending (empty when s is not hit)."""
        _check_point(self.n, s, "fiber point")
        return tuple(r for r in range(1, self.n + 1) if self.values[r - 1] == s)

    def after(self, inner: "LayerFunction") -> "LayerFunction":
        """The composition self(inner(.)): apply `inner` first."""
        if inner.n != self.n:
            raise ValueError("composition requires matching widths")
        return LayerFunction(self.n, tuple(self.values[v - 1] for v in inner.values))

    def inverse(self) -> "LayerFunction":
        if not self.is_permutation:
            raise ValueError("only permutations can be inverted")
        out = [0] * self.n
        for r, v in enumerate(self.values, start=1):
            out[v - 1] = r
        return LayerFunction(self.n, tuple(out))


@dataclass(frozen=True)
class BitVector:
    """A bit layer over [n]: position r holds the answer bit for point r."""

    n: int
    bits: tuple[int, ...]

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"n must be positive, got {self.n}")
        if len(self.bits) != self.n:
            raise ValueError(f"expected {self.n} bits, got {len(self.bits)}")
        if any(b not in (0, 1) for b in self.bits):
            raise ValueError("bits must be 0 or 1")

    @classmethod
    def from01(cls, text: str) -> "BitVector":
        if not text or any(c not in "01" for c in text):
            raise ValueError(f"bit string must be nonempty over 0/1, got {text!r}")
        return cls(len(text), tuple(int(c) for c in text))

    def to01(self) -> str:
        return "".join(str(b) for b in self.bits)

    def __call__(self, r: int) -> int:
        _check_point(self.n, r, "position")
        return self.bits[r - 1]

    @property
    def weight(self) -> int:
        return sum(self.bits)

    def complement(self) -> "BitVector":
        return BitVector(self.n, tuple(1 - b for b in self.bits))

    def through(self, f: LayerFunction) -> "BitVector":
        """The bit layer self(f(.)): read position f(r) for each r."""
        if f.n != self.n:
            raise ValueError("composition requires matching widths")
        return BitVector(self.n, tuple(self.bits[v - 1] for v in f.values))


def follow_pointers(start: int, layers: Sequence[LayerFunction]) -> int:
    """Walk the chain: apply layers[0] first, then layers[1], ..."""
    cur = start
    for f in layers:
        cur = f(cur)
    return cur


def chain_layers(layers: Sequence[LayerFunction], n: int) -> LayerFunction:
    """Collapse an application chain into one function (layers[0] applied first).

    An empty chain collapses to the identity.
    """
    out = LayerFunction.identity(n)
    for f in layers:
        if f.n != n:
            raise ValueError("chain layers must share one width")
        out = f.after(out)
    return out


def compose_bits(x: BitVector, layers: Sequence[LayerFunction]) -> BitVector:
    """Collapse (layers, x) into one bit layer: position r holds x at the walk end."""
    g = chain_layers(layers, x.n)
    return x.through(g)


@dataclass(frozen=True)
class MpjInstance:
    """Boolean chain instance: start pointer, k-2 middle layers, final bit layer."""

    n: int
    k: int
    i: int
    middles: tuple[LayerFunction, ...]
    x: BitVector

    def __post_init__(self):
        if self.k < 2:
            raise ValueError(f"k must be at least 2, got {self.k}")
        _check_point(self.n, self.i, "start pointer")
        if len(self.middles) != self.k - 2:
            raise ValueError(
                f"expected {self.k - 2} middle layers for k={self.k}, got {len(self.middles)}"
            )
        for f in self.middles:
            if f.n != self.n:
                raise ValueError("middle layer width differs from n")
        if self.x.n != self.n:
            raise ValueError("bit layer width differs from n")

    @property
    def variant(self) -> Variant:
        return Variant.MPJ


@dataclass(frozen=True)
class MpjHatInstance:
    """Pointer chain instance: start pointer and k-1 function layers.

    perm_mask flags layers (f_2 first) that are required to be permutations;
    flagged layers are validated at construction time.
    """

    n: int
    k: int
    i: int
    layers: tuple[LayerFunction, ...]
    perm_mask: tuple[bool, ...] = ()

    def __post_init__(self):
        if self.k < 2:
            raise ValueError(f"k must be at least 2, got {self.k}")
        _check_point(self.n, self.i, "start pointer")
        if len(self.layers) != self.k - 1:
            raise ValueError(
                f"expected {self.k - 1} layers for k={self.k}, got {len(self.layers)}"
            )
        for f in self.layers:
            if f.n != self.n:
                raise ValueError("layer width differs from n")
        if not self.perm_mask:
            object.__setattr__(self, "perm_mask", (False,) * (self.k - 1))
        if len(self.perm_mask) != self.k - 1:
            raise ValueError("perm_mask length must match the layer count")
        for f, need_perm in zip(self.layers, self.perm_mask):
            if need_perm and not f.is_permutation:
                raise ValueError("layer flagged as permutation is not one")

    @property
    def variant(self) -> Variant:
        return Variant.MPJ_HAT


Instance = MpjInstance | MpjHatInstance


def eval_mpj(inst: MpjInstance) -> int:
    """Brute-force answer: follow every middle layer from i, read the bit."""
    return inst.x(follow_pointers(inst.i, inst.middles))


def eval_mpj_hat(inst: MpjHatInstance) -> int:
    """Brute-force answer: follow every layer from i, report the point reached."""
    return follow_pointers(inst.i, inst.layers)


def eval_instance(inst: Instance) -> int:
    if isinstance(inst, MpjInstance):
        return eval_mpj(inst)
    return eval_mpj_hat(inst)


@dataclass(frozen=True)
class DerivedViews:
    """Precomputed walk points and collapsed suffixes of one instance.

    reached_at(j) is the point entering layer j (the walk after j-2 middle
    layers), defined for 2 <= j <= k. suffix_bits(j) collapses everything
    after layer j of a Boolean instance into one bit layer (1 <= j <= k-1).
    suffix_map(j) collapses the layers after layer j of a pointer instance
    into one function (1 <= j <= k; the empty suffix is the identity).
    """

    n: int
    k: int
    variant: Variant
    _reached: tuple[int, ...]
    _suffix_bits: tuple[BitVector, ...]
    _suffix_maps: tuple[LayerFunction, ...]

    def reached_at(self, j: int) -> int:
        if not 2 <= j <= self.k:
            raise ValueError(f"reached_at defined for 2 <= j <= {self.k}, got {j}")
        return self._reached[j - 2]

    def suffix_bits(self, j: int) -> BitVector:
        if self.variant is not Variant.MPJ:
            raise ValueError("suffix_bits is only defined for the Boolean variant")
        if not 1 <= j <= self.k - 1:
            raise ValueError(f"suffix_bits defined for 1 <= j <= {self.k - 1}, got {j}")
        return self._suffix_bits[j - 1]

    def suffix_map(self, j: int) -> LayerFunction:
        if self.variant is not Variant.MPJ_HAT:
            raise ValueError("suffix_map is only defined for the pointer variant")
        if not 1 <= j <= self.k:
            raise ValueError(f"suffix_map defined for 1 <= j <= {self.k}, got {j}")
        return self._suffix_maps[j - 1]


def derive_views(inst: Instance) -> DerivedViews:
    """Compute all walk points and collapsed suffixes of an instance."""
    n, k = inst.n, inst.k
    walk_layers = inst.middles if isinstance(inst, MpjInstance) else inst.layers[: k - 2]
    reached = [inst.i]
    for f in walk_layers:
        reached.append(f(reached[-1]))
    if isinstance(inst, MpjInstance):
        suffixes = [compose_bits(inst.x, inst.middles[j - 1 :]) for j in range(1, k)]
        return DerivedViews(n, k, Variant.MPJ, tuple(reached), tuple(suffixes), ())
    maps = [chain_layers(inst.layers[j - 1 :], n) for j in range(1, k + 1)]
    return DerivedViews(n, k, Variant.MPJ_HAT, tuple(reached), (), tuple(maps))


def embed_three(inst: MpjInstance, j: int) -> MpjInstance:
    """Collapse a Boolean instance around middle layer j into a 3-layer one.

    The new instance keeps layer j verbatim, replaces the prefix with the
    walk point entering layer j, and the suffix with its collapsed bit layer.
    Its answer equals the original's.
    """
    if not 1 < j < inst.k:
        raise ValueError(f"embed_three needs 1 < j < k={inst.k}, got {j}")
    views = derive_views(inst)
    return MpjInstance(
        inst.n,
        3,
        views.reached_at(j),
        (inst.middles[j - 2],),
        views.suffix_bits(j),
    )


def _normalized_mask(n_layers: int, perm_mask: Sequence[bool] | None) -> tuple[bool, ...]:
    if perm_mask is None:
        return (False,) * n_layers
    mask = tuple(bool(b) for b in perm_mask)
    if len(mask) != n_layers:
        raise ValueError(f"perm_mask must have {n_layers} entries, got {len(mask)}")
    return mask


def instance_count(
    n: int, k: int, variant: Variant, perm_mask: Sequence[bool] | None = None
) -> int:
    """Exact size of the (optionally permutation-restricted) instance space."""
    n_layers = k - 2 if variant is Variant.MPJ else k - 1
    mask = _normalized_mask(n_layers, perm_mask)
    count = n
    for need_perm in mask:
        count *= math.factorial(n) if need_perm else n**n
    if variant is Variant.MPJ:
        count *= 2**n
    return count


def _layer_space(n: int, need_perm: bool) -> Iterator[LayerFunction]:
    if need_perm:
        for vals in itertools.permutations(range(1, n + 1)):
            yield LayerFunction(n, vals)
    else:
        for vals in itertools.product(range(1, n + 1), repeat=n):
            yield LayerFunction(n, vals)


def enumerate_instances(
    n: int,
    k: int,
    variant: Variant,
    perm_mask: Sequence[bool] | None = None,
    *,
    budget: int = 2_000_000,
) -> Iterator[Instance]:
    """Yield the full instance space in lexicographic (i, layers..., x) order.

    Refuses up front (BudgetExceededError) when the space is larger than
    `budget`, reporting the exact count.
    """
    n_layers = k - 2 if variant is Variant.MPJ else k - 1
    mask = _normalized_mask(n_layers, perm_mask)
    count = instance_count(n, k, variant, mask)
    if count > budget:
        raise BudgetExceededError(count, budget)

    layer_spaces = [_layer_space(n, need_perm) for need_perm in mask]
    if variant is Variant.MPJ:
        for combo in itertools.product(
            range(1, n + 1),
            *[list(space) for space in layer_spaces],
            itertools.product((0, 1), repeat=n),
        ):
            i, *layers, bits = combo
            yield MpjInstance(n, k, i, tuple(layers), BitVector(n, tuple(bits)))
    else:
        for combo in itertools.product(
            range(1, n + 1), *[list(space) for space in layer_spaces]
        ):
            i, *layers = combo
            yield MpjHatInstance(n, k, i, tuple(layers), mask)


def _sample_layer(rng: random.Random, n: int, need_perm: bool) -> LayerFunction:
    if need_perm:
        vals = list(range(1, n + 1))
        rng.shuffle(vals)
        return LayerFunction(n, tuple(vals))
    return LayerFunction(n, tuple(rng.randint(1, n) for _ in range(n)))


def _sample_with(rng: random.Random, n: int, k: int, variant: Variant,
                 mask: tuple[bool, ...]) -> Instance:
    # draw order is fixed: i, then each layer, then (Boolean) the bit layer
    i = rng.randint(1, n)
    layers = tuple(_sample_layer(rng, n, need_perm) for need_perm in mask)
    if variant is Variant.MPJ:
        bits = BitVector(n, tuple(rng.randint(0, 1) for _ in range(n)))
        return MpjInstance(n, k, i, layers, bits)
    return MpjHatInstance(n, k, i, layers, mask)


def sample_instance(
    n: int,
    k: int,
    variant: Variant,
    perm_mask: Sequence[bool] | None = None,
    *,
    seed: int = 0,
) -> Instance:
    """Draw one uniform instance; a pure function of the seed."""
    n_layers = k - 2 if variant is Variant.MPJ else k - 1
    mask = _normalized_mask(n_layers, perm_mask)
    return _sample_with(random.Random(seed), n, k, variant, mask)


def sample_instances(
    n: int,
    k: int,
    variant: Variant,
    perm_mask: Sequence[bool] | None = None,
    *,
    count: int,
    seed: int = 0,
) -> Iterator[Instance]:
    """Deterministic stream of `count` uniform instances from one seeded source."""
    n_layers = k - 2 if variant is Variant.MPJ else k - 1
    mask = _normalized_mask(n_layers, perm_mask)
    rng = random.Random(seed)
    for _ in range(count):
        yield _sample_with(rng, n, k, variant, mask)


def instance_to_dict(inst: Instance) -> dict:
    """Serialize to the shared JSON form (1-based layers, f_2 first)."""
    if isinstance(inst, MpjInstance):
        return {
            "n": inst.n,
            "k": inst.k,
            "variant": Variant.MPJ.value,
            "i": inst.i,
            "layers": [list(f.values) for f in inst.middles],
            "x": inst.x.to01(),
        }
    d = {
        "n": inst.n,
        "k": inst.k,
        "variant": Variant.MPJ_HAT.value,
        "i": inst.i,
        "layers": [list(f.values) for f in inst.layers],
    }
    if any(inst.perm_mask):
        d["perm_mask"] = list(inst.perm_mask)
    return d


def instance_from_dict(d: dict) -> Instance:
    """Parse the shared JSON form; width/shape errors raise ValueError."""
    try:
        n = d["n"]
        k = d["k"]
        variant = Variant.parse(d["variant"])
        i = d["i"]
        raw_layers = d["layers"]
    except KeyError as exc:
        raise ValueError(f"instance dict is missing key {exc.args[0]!r}") from None
    layers = tuple(LayerFunction(n, tuple(vals)) for vals in raw_layers)
    if variant is Variant.MPJ:
        if "x" not in d:
            raise ValueError("Boolean instance dict needs an 'x' bit string")
        x = BitVector.from01(d["x"])
        if x.n != n:
            raise ValueError("bit layer width differs from n")
        return MpjInstance(n, k, i, layers, x)
    mask = tuple(bool(b) for b in d.get("perm_mask", [False] * (k - 1)))
    return MpjHatInstance(n, k, i, layers, mask)
