"""Finite preorders, separative quotients, and regular-open completions.

Conventions follow forcing practice: stronger conditions are smaller, the
topology is the down-set topology (open = downward closed), and two conditions
are incompatible when no condition lies below both.  For a finite poset the
regular-open algebra is the powerset of the minimal separative classes; the
closure-interior regularization over down-sets is kept as an independent,
budget-guarded oracle.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Iterator, Sequence

from .algebra import Element, FinBoolAlg, bit_indices
from .errors import BudgetError, InputError, VerificationError
from .measures import Measure

#: Separative-quotient size cap for the exhaustive regularization oracle.
REGULARIZATION_CLASS_BUDGET = 20
#: Cap on enumerated down-sets in the oracle.
DOWNSET_BUDGET = 1 << 20


@dataclass(frozen=True)
class FinPreorder:
    """A reflexive transitive relation on {0..size-1}.

    ``down[p]`` is the bitmask of conditions q with q ≤ p.  Labels are
    cosmetic.
    """

    size: int
    down: tuple[int, ...]
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        if self.size < 1:
            raise InputError("a preorder needs at least one element")
        if len(self.down) != self.size:
            raise InputError("down-set table length mismatch")
        full = (1 << self.size) - 1
        for p, mask in enumerate(self.down):
            if mask & ~full:
                raise InputError("down-set mask out of range")
            if not mask >> p & 1:
                raise InputError(f"relation not reflexive at {p}")
        for p in range(self.size):
            for q in bit_indices(self.down[p]):
                if self.down[q] & ~self.down[p]:
                    raise InputError(
                        f"relation not transitive: {q} <= {p} but its cone escapes"
                    )
        if self.labels is not None and len(self.labels) != self.size:
            raise InputError("label count mismatch")

    @classmethod
    def from_pairs(
        cls,
        size: int,
        pairs: Iterable[tuple[int, int]],
        labels: tuple[str, ...] | None = None,
    ) -> "FinPreorder":
        """Build from explicit (smaller, larger) pairs; reflexive pairs are
        implied, transitivity is validated rather than completed."""
        down = [1 << p for p in range(size)]
        for a, b in pairs:
            if not (0 <= a < size and 0 <= b < size):
                raise InputError(f"pair ({a},{b}) out of range")
            down[b] |= 1 << a
        return cls(size, tuple(down), labels)

    @classmethod
    def from_relation(
        cls,
        size: int,
        holds: Callable[[int, int], bool],
        labels: tuple[str, ...] | None = None,
    ) -> "FinPreorder":
        down = []
        for p in range(size):
            mask = 0
            for q in range(size):
                if holds(q, p):
                    mask |= 1 << q
            down.append(mask)
        return cls(size, tuple(down), labels)

    def leq(self, q: int, p: int) -> bool:
        return bool(self.down[p] >> q & 1)

    def compatible(self, p: int, q: int) -> bool:
        return bool(self.down[p] & self.down[q])

    def incompatible(self, p: int, q: int) -> bool:
        return not self.compatible(p, q)

    def pairs(self) -> Iterator[tuple[int, int]]:
        for p in range(self.size):
            for q in bit_indices(self.down[p]):
                yield (q, p)

    def label(self, p: int) -> str:
        return self.labels[p] if self.labels is not None else str(p)


@dataclass(frozen=True)
class SepQuotient:
    """Separative quotient: order-equivalence collapse followed by the
    separativity collapse (p ≼ q iff everything below p is compatible with q)."""

    original: FinPreorder
    poset: FinPreorder
    class_of: tuple[int, ...]
    class_members: tuple[int, ...]  # bitmask of original elements per class


def separative_quotient(order: FinPreorder) -> SepQuotient:
    n = order.size
    # p ≼ q iff every r ≤ p is compatible with q; with precomputed
    # incompatibility masks this is one mask intersection per pair
    incompat = [0] * n
    for q in range(n):
        mask = 0
        for r in range(n):
            if not order.down[r] & order.down[q]:
                mask |= 1 << r
        incompat[q] = mask
    almost = [[False] * n for _ in range(n)]
    for p in range(n):
        for q in range(n):
            almost[p][q] = not order.down[p] & incompat[q]
    reps: list[int] = []
    class_of = [-1] * n
    for p in range(n):
        for ci, r in enumerate(reps):
            if almost[p][r] and almost[r][p]:
                class_of[p] = ci
                break
        else:
            class_of[p] = len(reps)
            reps.append(p)
    members = [0] * len(reps)
    for p, ci in enumerate(class_of):
        members[ci] |= 1 << p
    down = []
    for ci, r in enumerate(reps):
        mask = 0
        for cj, s in enumerate(reps):
            if almost[s][r]:
                mask |= 1 << cj
        down.append(mask)
    labels = tuple(order.label(r) for r in reps)
    quotient_poset = FinPreorder(len(reps), tuple(down), labels)
    return SepQuotient(order, quotient_poset, tuple(class_of), tuple(members))


@dataclass(frozen=True)
class DenseEmbedding:
    """A dense, order- and incompatibility-preserving map of a preorder into
    a finite algebra.  Validation is a bug trap: the canonical construction
    must always produce a valid embedding."""

    poset: FinPreorder
    algebra: FinBoolAlg
    image: tuple[Element, ...]

    def __post_init__(self):
        if len(self.image) != self.poset.size:
            raise InputError("one image per poset element required")
        for p, el in enumerate(self.image):
            if el.algebra != self.algebra:
                raise InputError("image element from a foreign algebra")
            if el.is_zero:
                raise VerificationError("dense embedding maps a condition to zero", p)
        for p in range(self.poset.size):
            for q in range(self.poset.size):
                if self.poset.leq(q, p) and not self.image[q] <= self.image[p]:
                    raise VerificationError("dense embedding not order-preserving", (q, p))
                if self.poset.incompatible(p, q) != self.image[p].disjoint(self.image[q]):
                    raise VerificationError(
                        "dense embedding does not preserve incompatibility", (p, q)
                    )
        # density in a finite algebra: below every atom sits some image
        for k in range(self.algebra.atom_count):
            atom_bit = 1 << k
            if not any(img.bits & ~atom_bit == 0 for img in self.image):
                raise VerificationError("dense embedding image misses an atom", k)


@dataclass(frozen=True)
class RegularOpen:
    """Regular-open completion of a finite preorder."""

    algebra: FinBoolAlg
    dense: DenseEmbedding
    quotient: SepQuotient
    minimal_classes: tuple[int, ...]


def minimal_elements(order: FinPreorder) -> tuple[int, ...]:
    """Elements with no strictly smaller element (up to order-equivalence)."""
    result = []
    for p in range(order.size):
        strict_below = [
            q for q in bit_indices(order.down[p]) if not order.leq(p, q)
        ]
        if not strict_below:
            result.append(p)
    return tuple(result)


def regular_open_algebra(order: FinPreorder) -> RegularOpen:
    """Complete the preorder: separative quotient, then the powerset of its
    minimal classes, with the canonical dense embedding."""
    quot = separative_quotient(order)
    minimal = minimal_elements(quot.poset)
    if not minimal:
        raise InputError("empty poset has no completion")  # pragma: no cover
    labels = tuple(quot.poset.label(m) for m in minimal)
    algebra = FinBoolAlg(len(minimal), labels)
    position = {m: k for k, m in enumerate(minimal)}
    images = []
    for p in range(order.size):
        cls = quot.class_of[p]
        bits = 0
        for m in minimal:
            if quot.poset.leq(m, cls):
                bits |= 1 << position[m]
        images.append(Element(algebra, bits))
    dense = DenseEmbedding(order, algebra, tuple(images))
    return RegularOpen(algebra, dense, quot, minimal)


# ---------------------------------------------------------------------------
# Exhaustive regularization oracle
# ---------------------------------------------------------------------------


def closure(order: FinPreorder, subset: int) -> int:
    """Topological closure in the down-set topology: conditions whose cone
    meets the subset."""
    result = 0
    for p in range(order.size):
        if order.down[p] & subset:
            result |= 1 << p
    return result


def interior(order: FinPreorder, subset: int) -> int:
    """Largest down-set inside the subset."""
    result = 0
    for p in range(order.size):
        if order.down[p] & ~subset == 0:
            result |= 1 << p
    return result


def regularize(order: FinPreorder, subset: int) -> int:
    """One regularization step: interior of the closure."""
    return interior(order, closure(order, subset))


def down_sets(order: FinPreorder, budget: int = DOWNSET_BUDGET) -> list[int]:
    """All downward closed subsets; budget-guarded."""
    elems = sorted(range(order.size), key=lambda p: order.down[p].bit_count())
    sets = [0]
    for p in elems:
        need = order.down[p] & ~(1 << p)
        extended = []
        for d in sets:
            if need & ~d == 0:
                extended.append(d | 1 << p)
        sets.extend(extended)
        if len(sets) > budget:
            raise BudgetError(f"more than {budget} down-sets")
    return sets


def all_regular_open_sets(
    order: FinPreorder,
    class_budget: int = REGULARIZATION_CLASS_BUDGET,
    downset_budget: int = DOWNSET_BUDGET,
) -> frozenset[int]:
    """Every regular open subset of the separative quotient, found by
    regularizing each down-set.  Independent of the minimal-class shortcut."""
    quot = separative_quotient(order).poset
    if quot.size > class_budget:
        raise BudgetError(
            f"separative quotient has {quot.size} classes, budget {class_budget}"
        )
    found = set()
    for d in down_sets(quot, downset_budget):
        found.add(regularize(quot, d))
    return frozenset(found)


# ---------------------------------------------------------------------------
# Forcing poset fixtures
# ---------------------------------------------------------------------------


def _binary_strings(max_len: int) -> list[str]:
    out = [""]
    for length in range(1, max_len + 1):
        out.extend(format(v, f"0{length}b") for v in range(1 << length))
    return out


def cohen_tree(n: int) -> FinPreorder:
    """The full binary tree of 0/1-strings of length ≤ n; longer strings are
    stronger.  Its completion has 2^n atoms (the leaves)."""
    if n < 1:
        raise InputError("tree depth must be at least 1")
    nodes = _binary_strings(n)
    index = {s: k for k, s in enumerate(nodes)}

    def holds(q: int, p: int) -> bool:
        return nodes[q].startswith(nodes[p])

    labels = tuple("e" if s == "" else s for s in nodes)
    return FinPreorder.from_relation(len(nodes), holds, labels)


def disjoint_cohen_pairs(n: int) -> FinPreorder:
    """Pairs of 0/1-strings of length ≤ n whose 1-positions are disjoint,
    ordered by coordinatewise extension.  The two coordinates force a pair of
    disjoint generic strings."""
    if n < 1:
        raise InputError("depth must be at least 1")
    strings = _binary_strings(n)

    def ones(s: str) -> frozenset[int]:
        return frozenset(i for i, c in enumerate(s) if c == "1")

    elements = [
        (s, t) for s in strings for t in strings if not (ones(s) & ones(t))
    ]
    index = {st: k for k, st in enumerate(elements)}

    def holds(q: int, p: int) -> bool:
        (s1, t1), (s0, t0) = elements[q], elements[p]
        return s1.startswith(s0) and t1.startswith(t0)

    labels = tuple(
        f"{'e' if s == '' else s}|{'e' if t == '' else t}" for s, t in elements
    )
    return FinPreorder.from_relation(len(elements), holds, labels)


def disjoint_cohen_elements(n: int) -> list[tuple[str, str]]:
    """The condition list backing ``disjoint_cohen_pairs`` in the same order."""
    strings = _binary_strings(n)

    def ones(s: str) -> frozenset[int]:
        return frozenset(i for i, c in enumerate(s) if c == "1")

    return [(s, t) for s in strings for t in strings if not (ones(s) & ones(t))]


def uniform_measure_algebra(m: int) -> tuple[FinBoolAlg, Measure]:
    """Powerset of 2^m points with the uniform weight 2^-m per atom; the
    desk-scale stand-in for a random-real factor."""
    if m < 0:
        raise InputError("bit count must be nonnegative")
    count = 1 << m
    labels = tuple(format(v, f"0{m}b") if m else "*" for v in range(count))
    algebra = FinBoolAlg(count, labels)
    weight = Fraction(1, count)
    return algebra, Measure(algebra, (weight,) * count)
