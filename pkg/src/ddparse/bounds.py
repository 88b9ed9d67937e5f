"""Exhaustive tree enumeration and search-space bound verification.

Counts the projective dependency trees (and binary constituency trees)
obtainable over a document shape, with and without the Sent-First
restriction, and checks the two reduction inequalities

    |T'| <= 2/(n+1) * |T|        (dependency trees)
    |T'| <= (1/2)^n * |T|        (binary constituency trees)

where n is the number of sentences with at least two EDUs.  All
comparisons use exact integer arithmetic.  Enumeration guards keep the
sweeps to a few seconds: 9 EDUs for dependency trees, 14 leaves for
constituency trees.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterator

MAX_DEP_EDUS = 9
MAX_CONST_LEAVES = 14


class BoundsError(ValueError):
    """Raised when an enumeration guard is exceeded."""


@dataclass(frozen=True)
class DocumentShape:
    """Sentence lengths of a document; n counts sentences with >= 2 EDUs."""

    sentence_lengths: tuple[int, ...]

    def __post_init__(self):
        if not self.sentence_lengths or any(k < 1 for k in self.sentence_lengths):
            raise BoundsError(f"invalid shape {self.sentence_lengths}")

    @property
    def total(self) -> int:
        return sum(self.sentence_lengths)

    @property
    def m(self) -> int:
        return len(self.sentence_lengths)

    @property
    def n(self) -> int:
        return sum(1 for k in self.sentence_lengths if k >= 2)

    @classmethod
    def parse(cls, text: str) -> "DocumentShape":
        try:
            lengths = tuple(int(part) for part in text.replace(" ", "").split(","))
        except ValueError:
            raise BoundsError(f"cannot parse shape {text!r}") from None
        return cls(lengths)


@dataclass(frozen=True)
class BoundsReport:
    shape: DocumentShape
    theorem: int
    t_count: int
    tprime_count: int
    bound: float
    holds: bool
    vacuous: bool = field(default=False)

    def to_dict(self) -> dict:
        return {
            "shape": list(self.shape.sentence_lengths),
            "m": self.shape.m,
            "n": self.shape.n,
            "theorem": self.theorem,
            "t_count": self.t_count,
            "tprime_count": self.tprime_count,
            "bound": self.bound,
            "holds": self.holds,
            "vacuous": self.vacuous,
        }


# --- projective dependency tree enumeration ---------------------------------
#
# Internal representation: positions 0..L-1, heads[p] is the head position
# or -1 for a root awaiting attachment.  Trees over an interval are built
# recursively: pick the root, then tile each side with complete subtrees
# whose roots become children of the root.  All structures are memoized by
# interval length, so sweeps share work across shapes.


@lru_cache(maxsize=None)
def _forests(length: int) -> tuple[tuple[int, ...], ...]:
    """All tilings of a segment into adjacent subtrees (roots stay -1)."""
    if length == 0:
        return ((),)
    results = []
    for first in range(1, length + 1):
        for sub in _interval_trees(first):
            for rest in _forests(length - first):
                shifted = tuple(h if h < 0 else h + first for h in rest)
                results.append(sub + shifted)
    return tuple(results)


@lru_cache(maxsize=None)
def _interval_trees(length: int) -> tuple[tuple[int, ...], ...]:
    """All projective trees over 0..length-1; the unique -1 marks the root."""
    results = []
    for root in range(length):
        for left in _forests(root):
            left_heads = tuple(root if h < 0 else h for h in left)
            for right in _forests(length - root - 1):
                right_heads = tuple(root if h < 0 else h + root + 1 for h in right)
                results.append(left_heads + (-1,) + right_heads)
    return tuple(results)


def enumerate_projective_trees(l: int) -> list[tuple[int, ...]]:
    """All single-rooted projective head arrays over l EDUs.

    Heads use the corpus convention: 1-based ids with 0 for the root.
    Counts follow 1, 2, 7, 30, 143, ... as l grows.
    """
    if not 1 <= l <= MAX_DEP_EDUS:
        raise BoundsError(f"l={l} outside enumeration guard 1..{MAX_DEP_EDUS}")
    return [
        tuple(0 if h < 0 else h + 1 for h in heads)
        for heads in _interval_trees(l)
    ]


def _sentence_bounds(shape: DocumentShape) -> list[tuple[int, int]]:
    spans, start = [], 1
    for k in shape.sentence_lengths:
        spans.append((start, start + k - 1))
        start += k
    return spans


def has_sentfirst_property(heads: tuple[int, ...], shape: DocumentShape) -> bool:
    """Exactly one EDU per sentence may touch the outside, through its head
    or through a child; that EDU is the sentence root."""
    children: dict[int, list[int]] = {}
    for dep, head in enumerate(heads, start=1):
        children.setdefault(head, []).append(dep)
    for first, last in _sentence_bounds(shape):
        outside = 0
        for i in range(first, last + 1):
            head_out = not first <= heads[i - 1] <= last
            child_out = any(not first <= c <= last for c in children.get(i, ()))
            if head_out or child_out:
                outside += 1
        if outside != 1:
            return False
    return True


def enumerate_sentfirst_trees(shape: DocumentShape) -> list[tuple[int, ...]]:
    """All trees assemblable sentence-first: a projective tree inside every
    sentence, a projective tree over the sentence roots, combined."""
    if shape.total > MAX_DEP_EDUS:
        raise BoundsError(f"shape total {shape.total} exceeds guard {MAX_DEP_EDUS}")
    spans = _sentence_bounds(shape)
    per_sentence = [
        [
            {first + p: (0 if h < 0 else first + h) for p, h in enumerate(heads)}
            for heads in _interval_trees(last - first + 1)
        ]
        for first, last in spans
    ]
    results = []
    for combo in _product(per_sentence):
        roots = [next(i for i, h in sent.items() if h == 0) for sent in combo]
        for inter in _interval_trees(shape.m):
            heads = [0] * shape.total
            for sent in combo:
                for dep, head in sent.items():
                    heads[dep - 1] = head
            for pos, h in enumerate(inter):
                heads[roots[pos] - 1] = 0 if h < 0 else roots[h]
            results.append(tuple(heads))
    return results


def _product(pools: list[list]) -> Iterator[list]:
    if not pools:
        yield []
        return
    for head in pools[0]:
        for rest in _product(pools[1:]):
            yield [head] + rest


def check_theorem1(shape: DocumentShape) -> BoundsReport:
    """Dependency-tree bound: |T'| <= 2/(n+1) * |T|, checked exactly.

    Shapes with n = 0 make the bound at least |T| and are flagged vacuous.
    """
    if shape.total > MAX_DEP_EDUS:
        raise BoundsError(f"shape total {shape.total} exceeds guard {MAX_DEP_EDUS}")
    t = len(enumerate_projective_trees(shape.total))
    tprime = len(enumerate_sentfirst_trees(shape))
    n = shape.n
    holds = (n + 1) * tprime <= 2 * t
    return BoundsReport(
        shape=shape,
        theorem=1,
        t_count=t,
        tprime_count=tprime,
        bound=2 * t / (n + 1),
        holds=holds,
        vacuous=n == 0,
    )


# --- binary constituency trees -----------------------------------------------


@lru_cache(maxsize=None)
def _binary_shapes(leaves: int) -> tuple:
    """All binary tree shapes over a row of leaves (structure-shared)."""
    if leaves == 1:
        return ("*",)
    shapes = []
    for left in range(1, leaves):
        for a in _binary_shapes(left):
            for b in _binary_shapes(leaves - left):
                shapes.append((a, b))
    return tuple(shapes)


def catalan(n: int) -> int:
    return math.comb(2 * n, n) // (n + 1)


def enumerate_binary_trees(l: int) -> int:
    """Count binary constituency trees over l leaves by direct enumeration;
    equals the Catalan number C(l-1)."""
    if not 1 <= l <= MAX_CONST_LEAVES:
        raise BoundsError(f"l={l} outside enumeration guard 1..{MAX_CONST_LEAVES}")
    return len(_binary_shapes(l))


def check_theorem2(shape: DocumentShape) -> BoundsReport:
    """Constituency-tree bound: |T'| <= (1/2)^n * |T|, checked exactly.

    Sent-First constituency trees keep each sentence as a complete
    subtree, so |T'| is a product of per-sentence Catalan counts times
    the count over sentence blocks.  Requires m > 1.
    """
    if shape.m <= 1:
        raise BoundsError("constituency bound requires at least two sentences")
    if shape.total > MAX_CONST_LEAVES:
        raise BoundsError(f"shape total {shape.total} exceeds guard {MAX_CONST_LEAVES}")
    t = catalan(shape.total - 1)
    tprime = catalan(shape.m - 1)
    for k in shape.sentence_lengths:
        tprime *= catalan(k - 1)
    n = shape.n
    holds = (2 ** n) * tprime <= t
    return BoundsReport(
        shape=shape,
        theorem=2,
        t_count=t,
        tprime_count=tprime,
        bound=t / (2 ** n),
        holds=holds,
        vacuous=n == 0,
    )


def all_shapes(max_total: int, min_sentences: int = 1) -> list[DocumentShape]:
    """Every ordered composition with the given total range, smallest first."""
    shapes = []
    for total in range(1, max_total + 1):
        for shape in _compositions(total):
            if len(shape) >= min_sentences:
                shapes.append(DocumentShape(shape))
    return shapes


def _compositions(total: int) -> Iterator[tuple[int, ...]]:
    if total == 0:
        yield ()
        return
    for first in range(1, total + 1):
        for rest in _compositions(total - first):
            yield (first,) + rest


def sweep(theorem: int, max_total: int) -> list[BoundsReport]:
    if theorem == 1:
        return [check_theorem1(s) for s in all_shapes(max_total)]
    if theorem == 2:
        return [check_theorem2(s) for s in all_shapes(max_total, min_sentences=2)]
    raise BoundsError(f"unknown theorem {theorem}")
