"""Canonical encodings of the four structure theories and the maps between them.

All four theories — convex linear orders, layered permutations, compositions,
and fractured orders — are determined up to isomorphism by the ordered
sequence of their class/block/part sizes, so a single :class:`PartSequence`
is the shared canonical form.  Points are numbered 1..n in <-order
(respectively <1-order); relations are derived from prefix sums.

Everything here is immutable; the only stateful input is the caller-owned
random source used by :func:`sample_uniform`.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from enum import Enum
from operator import index as _as_int

THEORIES = ("convex", "layered", "composition", "fractured")

#: Binary relation symbols of each theory's signature (equality is always
#: available and not listed).  ASCII spellings: "p1"/"p2" stand for the two
#: partial orders of compositions and fractured orders.
RELATION_SYMBOLS: dict[str, tuple[str, ...]] = {
    "convex": ("<", "E"),
    "layered": ("<1", "<2"),
    "composition": ("E", "p1"),
    "fractured": ("E", "p1", "p2"),
}


@dataclass(frozen=True)
class PartSequence:
    """A non-empty sequence of positive integers (part sizes in order)."""

    parts: tuple[int, ...]

    def __post_init__(self) -> None:
        try:
            normalized = tuple(_as_int(p) for p in self.parts)
        except TypeError as exc:
            raise ValueError(f"parts must be integers: {self.parts!r}") from exc
        object.__setattr__(self, "parts", normalized)
        if not normalized:
            raise ValueError("part sequence must be non-empty")
        for p in normalized:
            if p < 1:
                raise ValueError(f"every part must be >= 1, got {p}")

    @property
    def size(self) -> int:
        """Number of points: the sum of the parts."""
        return sum(self.parts)

    @classmethod
    def from_text(cls, text: str) -> "PartSequence":
        """Parse the literal format: comma-separated positive integers.

        Whitespace is ignored; zeros, negatives and empty input are rejected.
        """
        items = [piece.strip() for piece in text.split(",")]
        if items == [""]:
            raise ValueError("empty structure literal")
        parts = []
        for piece in items:
            if not piece:
                raise ValueError(f"empty part in literal {text!r}")
            try:
                value = int(piece)
            except ValueError as exc:
                raise ValueError(f"bad part {piece!r} in literal {text!r}") from exc
            parts.append(value)
        return cls(tuple(parts))

    def __str__(self) -> str:
        return ",".join(str(p) for p in self.parts)

    def __len__(self) -> int:
        return len(self.parts)

    def __iter__(self):
        return iter(self.parts)

    def __getitem__(self, i):
        return self.parts[i]


@dataclass(frozen=True)
class ConvexLinearOrder:
    """A linear order whose equivalence classes are order-intervals.

    The classes are the consecutive blocks delimited by ``shape``.
    """

    shape: PartSequence

    @property
    def size(self) -> int:
        return self.shape.size


@dataclass(frozen=True)
class LayeredPermutation:
    """Increasing blocks of decreasing runs; ``shape`` holds the block sizes."""

    shape: PartSequence

    @property
    def size(self) -> int:
        return self.shape.size

    def one_line(self) -> tuple[int, ...]:
        """One-line notation: the value at each position 1..n.

        Each block occupies an interval of positions and carries the same
        interval of values in reversed order.
        """
        values = []
        lo = 1
        for block in self.shape:
            hi = lo + block - 1
            values.extend(range(hi, lo - 1, -1))
            lo = hi + 1
        return tuple(values)

    def one_line_text(self) -> str:
        return " ".join(str(v) for v in self.one_line())


@dataclass(frozen=True)
class CompositionStructure:
    """An equivalence relation with a linear order on classes only."""

    shape: PartSequence

    @property
    def size(self) -> int:
        return self.shape.size


@dataclass(frozen=True)
class FracturedOrder:
    """A convex linear order split into a between-class order and a
    within-class order (the canonical expansion of a composition)."""

    shape: PartSequence

    @property
    def size(self) -> int:
        return self.shape.size


#: The one-point structure, base case of every construction.
BULLET = ConvexLinearOrder(PartSequence((1,)))


class BuildStep(Enum):
    """The two constructors: append a new singleton class, or grow the last one."""

    PLUS_BULLET = "plus_bullet"
    HAT = "hat"


def oplus(left: ConvexLinearOrder, right: ConvexLinearOrder) -> ConvexLinearOrder:
    """Ordered sum: place ``right`` after ``left``; classes are never merged."""
    return ConvexLinearOrder(PartSequence(left.shape.parts + right.shape.parts))


def hat(c: ConvexLinearOrder) -> ConvexLinearOrder:
    """Add one point to the last class."""
    parts = c.shape.parts
    return ConvexLinearOrder(PartSequence(parts[:-1] + (parts[-1] + 1,)))


def decompose(c: ConvexLinearOrder) -> tuple[BuildStep, ...]:
    """The unique sequence of size-1 steps rebuilding ``c`` from the one-point
    structure.  Always has length ``size - 1``."""
    steps: list[BuildStep] = []
    first = True
    for part in c.shape:
        if not first:
            steps.append(BuildStep.PLUS_BULLET)
        steps.extend([BuildStep.HAT] * (part - 1))
        first = False
    return tuple(steps)


def replay(steps) -> ConvexLinearOrder:
    """Apply a step sequence starting from the one-point structure."""
    parts = [1]
    for step in steps:
        if step is BuildStep.HAT:
            parts[-1] += 1
        elif step is BuildStep.PLUS_BULLET:
            parts.append(1)
        else:
            raise ValueError(f"unknown build step {step!r}")
    return ConvexLinearOrder(PartSequence(tuple(parts)))


def sample_uniform(n: int, rng: random.Random) -> ConvexLinearOrder:
    """Draw a uniformly random structure of size ``n``.

    Uses ``n - 1`` independent fair binary choices, one per construction
    step, which is exactly uniform over the 2^(n-1) isomorphism types.
    """
    if n < 1:
        raise ValueError(f"size must be >= 1, got {n}")
    if n == 1:
        return BULLET
    bits = rng.getrandbits(n - 1)
    parts = [1]
    for i in range(n - 1):
        if (bits >> i) & 1:
            parts[-1] += 1
        else:
            parts.append(1)
    return ConvexLinearOrder(PartSequence(tuple(parts)))


def enumerate_shapes(n: int) -> list[PartSequence]:
    """All 2^(n-1) part sequences of size ``n``, in step-bitmask order."""
    if n < 1:
        raise ValueError(f"size must be >= 1, got {n}")
    out = []
    for mask in range(1 << (n - 1)):
        parts = [1]
        for i in range(n - 1):
            if (mask >> i) & 1:
                parts[-1] += 1
            else:
                parts.append(1)
        out.append(PartSequence(tuple(parts)))
    return out


def layered_to_convex(p: LayeredPermutation) -> ConvexLinearOrder:
    """Blocks become equivalence classes; < agrees with <1."""
    return ConvexLinearOrder(p.shape)


def convex_to_layered(c: ConvexLinearOrder) -> LayeredPermutation:
    """Inverse of :func:`layered_to_convex`; shape-preserving."""
    return LayeredPermutation(c.shape)


def expand_composition(c: CompositionStructure) -> FracturedOrder:
    """The canonical expansion: within each class, order points by label."""
    return FracturedOrder(c.shape)


def fractured_to_convex(f: FracturedOrder) -> ConvexLinearOrder:
    """Fuse the between-class and within-class orders back into one order."""
    return ConvexLinearOrder(f.shape)


class StructureView:
    """Uniform read-only relational view of a structure.

    Exposes ``size`` and an evaluator ``holds(symbol, i, j)`` for each binary
    relation symbol of the theory's signature, on points 1..size.
    """

    __slots__ = ("theory", "shape", "size", "signature", "symbols",
                 "cls_of", "class_starts", "_rel")

    def __init__(self, theory: str, shape: PartSequence):
        if theory not in THEORIES:
            raise ValueError(f"unknown theory {theory!r}")
        self.theory = theory
        self.shape = shape
        self.size = shape.size
        self.symbols = RELATION_SYMBOLS[theory]
        self.signature = frozenset(self.symbols)
        # cls_of[p] is the 0-based class index of point p (index 0 unused)
        cls_of = [0] * (self.size + 1)
        starts = []
        point = 1
        for idx, part in enumerate(shape):
            starts.append(point)
            for _ in range(part):
                cls_of[point] = idx
                point += 1
        self.cls_of = tuple(cls_of)
        self.class_starts = tuple(starts)
        self._rel = self._build_relations()

    def _build_relations(self):
        cls_of = self.cls_of

        def lt(i, j):
            return i < j

        def same_class(i, j):
            return cls_of[i] == cls_of[j]

        def lt2(i, j):
            # within a block <2 reverses <1; across blocks they agree
            if cls_of[i] == cls_of[j]:
                return j < i
            return i < j

        def class_lt(i, j):
            return cls_of[i] < cls_of[j]

        def within_lt(i, j):
            return cls_of[i] == cls_of[j] and i < j

        if self.theory == "convex":
            return {"<": lt, "E": same_class}
        if self.theory == "layered":
            return {"<1": lt, "<2": lt2}
        if self.theory == "composition":
            return {"E": same_class, "p1": class_lt}
        return {"E": same_class, "p1": class_lt, "p2": within_lt}

    def holds(self, symbol: str, i: int, j: int) -> bool:
        try:
            rel = self._rel[symbol]
        except KeyError:
            raise ValueError(
                f"relation {symbol!r} not in the {self.theory} signature"
            ) from None
        return rel(i, j)

    def points(self) -> range:
        return range(1, self.size + 1)

    def __repr__(self) -> str:
        return f"StructureView({self.theory!r}, {str(self.shape)!r})"


def as_relational(theory: str, shape: PartSequence) -> StructureView:
    """Relational view factory; raises ``ValueError`` on an unknown theory tag."""
    return StructureView(theory, shape)


def structure_view(structure) -> StructureView:
    """View of a typed structure (dispatches on the wrapper class)."""
    if isinstance(structure, StructureView):
        return structure
    if isinstance(structure, ConvexLinearOrder):
        return StructureView("convex", structure.shape)
    if isinstance(structure, LayeredPermutation):
        return StructureView("layered", structure.shape)
    if isinstance(structure, CompositionStructure):
        return StructureView("composition", structure.shape)
    if isinstance(structure, FracturedOrder):
        return StructureView("fractured", structure.shape)
    raise ValueError(f"cannot build a relational view of {structure!r}")
