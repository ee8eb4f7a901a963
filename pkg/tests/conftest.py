"""Shared oracles and helpers for the test suite.

The relation oracles here rebuild every relation from first principles
(explicit point loops, block reversal for the permutation values), entirely
independent of the library's prefix-sum views, so view/oracle agreement is a
real check rather than a tautology.
"""
from __future__ import annotations

import random

from limlaw.structures import PartSequence, enumerate_shapes


def class_assignment(parts) -> list[int]:
    """Point -> class index (1-based points), by explicit enumeration."""
    assign = [None]
    for idx, part in enumerate(parts):
        assign.extend([idx] * part)
    return assign


def permutation_values(parts) -> list[int]:
    """One-line values of the layered permutation with the given blocks,
    built by writing each block's value interval in reverse."""
    values = [None]
    lo = 1
    for part in parts:
        hi = lo + part - 1
        values.extend(range(hi, lo - 1, -1))
        lo = hi + 1
    return values


def naive_relations(theory: str, parts) -> dict[str, set[tuple[int, int]]]:
    """Relation tables built pointwise from the definitions."""
    n = sum(parts)
    cls = class_assignment(parts)
    pairs = [(i, j) for i in range(1, n + 1) for j in range(1, n + 1)]
    if theory == "convex":
        return {
            "<": {(i, j) for i, j in pairs if i < j},
            "E": {(i, j) for i, j in pairs if cls[i] == cls[j]},
        }
    if theory == "layered":
        val = permutation_values(parts)
        return {
            "<1": {(i, j) for i, j in pairs if i < j},
            "<2": {(i, j) for i, j in pairs if val[i] < val[j]},
        }
    if theory == "composition":
        return {
            "E": {(i, j) for i, j in pairs if cls[i] == cls[j]},
            "p1": {(i, j) for i, j in pairs if cls[i] < cls[j]},
        }
    if theory == "fractured":
        rel = naive_relations("composition", parts)
        rel["p2"] = {(i, j) for i, j in pairs if cls[i] == cls[j] and i < j}
        return rel
    raise ValueError(theory)


def shapes_up_to(max_n: int) -> list[PartSequence]:
    return [s for n in range(1, max_n + 1) for s in enumerate_shapes(n)]


def random_shape(rng: random.Random, max_n: int) -> PartSequence:
    n = rng.randint(1, max_n)
    parts = [1]
    for _ in range(n - 1):
        if rng.random() < 0.5:
            parts[-1] += 1
        else:
            parts.append(1)
    return PartSequence(tuple(parts))


def partition_by(shapes, equiv) -> list[list]:
    """Partition into classes using the given pairwise decision."""
    reps: list = []
    classes: list[list] = []
    for s in shapes:
        for idx, r in enumerate(reps):
            if equiv(s, r):
                classes[idx].append(s)
                break
        else:
            reps.append(s)
            classes.append([s])
    return classes
