"""The standing ten-sentence battery used by the test sweeps and the
experiment scripts.

Each entry carries its theory, its text in the canonical grammar, and the
exact limiting probability where a closed form is known (every one of these
is re-derived by enumeration in the test suite rather than trusted).
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction


@dataclass(frozen=True)
class BatterySentence:
    name: str
    theory: str
    text: str
    expected_limit: Fraction | None


BATTERY: tuple[BatterySentence, ...] = (
    BatterySentence(
        "nonempty", "convex",
        "exists x. x = x",
        Fraction(1)),
    BatterySentence(
        "some-class-at-least-2", "convex",
        "exists x. exists y. (x E y & !(x = y))",
        Fraction(1)),
    BatterySentence(
        "first-two-points-share-class", "convex",
        "exists x. exists y. (!(exists z. z < x) & x < y"
        " & !(exists z. (x < z & z < y)) & x E y)",
        Fraction(1, 2)),
    BatterySentence(
        "first-two-classes-singletons", "convex",
        "exists x. exists y. (!(exists z. z < x)"
        " & !(exists z. (z E x & !(z = x)))"
        " & x < y & !(exists z. (x < z & z < y))"
        " & !(exists z. (z E y & !(z = y))))",
        Fraction(1, 4)),
    BatterySentence(
        "single-class", "convex",
        "forall x. forall y. x E y",
        Fraction(0)),
    BatterySentence(
        "all-classes-singletons", "convex",
        "forall x. forall y. (x E y -> x = y)",
        Fraction(0)),
    BatterySentence(
        "last-class-at-least-2", "convex",
        "exists x. exists y. (x < y & x E y & !(exists z. y < z))",
        Fraction(1, 2)),
    BatterySentence(
        "some-descent", "layered",
        "exists x. exists y. (x <1 y & y <2 x)",
        Fraction(1)),
    BatterySentence(
        "identity-permutation", "layered",
        "forall x. forall y. (x <1 y -> x <2 y)",
        Fraction(0)),
    BatterySentence(
        "at-least-two-parts", "composition",
        "exists x. exists y. x p1 y",
        Fraction(1)),
)
