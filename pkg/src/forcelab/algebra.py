"""Finite complete Boolean algebras with bitset elements.

A finite Boolean algebra is (up to isomorphism) the powerset of its atoms, so
an algebra is identified by its atom count and an element is a bitset over the
atoms.  Every Boolean algebra here is complete and atomic: infinite sums and
products coincide with finite ones, and an injective homomorphism preserving
finite sums is automatically a complete embedding.  For that reason complete
embeddings are represented, and validated, as partitions of unity: one
nonzero, pairwise disjoint image per source atom, jointly covering the
target's unit.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Iterator, Sequence

from .errors import BudgetError, InputError

#: Hard cap on atom counts; constructions refuse to grow beyond it.
ATOM_BUDGET = 1 << 20

#: Algebras small enough for full element enumeration in checks and tests.
ENUMERATION_LIMIT = 1 << 20


def check_atom_budget(count: int, budget: int | None = None) -> None:
    cap = ATOM_BUDGET if budget is None else min(budget, ATOM_BUDGET)
    if count > cap:
        raise BudgetError(f"construction with {count} atoms exceeds budget {cap}")


def bit_indices(bits: int) -> Iterator[int]:
    """Indices of set bits, ascending."""
    while bits:
        low = bits & -bits
        yield low.bit_length() - 1
        bits ^= low


@dataclass(frozen=True)
class FinBoolAlg:
    """Powerset algebra over ``atom_count`` atoms.

    Labels are cosmetic; two algebras are equal iff atom counts and labels
    agree, so structurally identical algebras compare equal.
    """

    atom_count: int
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        if self.atom_count < 1:
            raise InputError("an algebra needs at least one atom")
        check_atom_budget(self.atom_count)
        if self.labels is not None and len(self.labels) != self.atom_count:
            raise InputError(
                f"got {len(self.labels)} labels for {self.atom_count} atoms"
            )

    @property
    def zero(self) -> "Element":
        return Element(self, 0)

    @property
    def one(self) -> "Element":
        return Element(self, (1 << self.atom_count) - 1)

    def atom(self, k: int) -> "Element":
        if not 0 <= k < self.atom_count:
            raise InputError(f"atom index {k} out of range")
        return Element(self, 1 << k)

    def element(self, bits: int) -> "Element":
        return Element(self, bits)

    def from_atoms(self, atoms: Iterable[int]) -> "Element":
        bits = 0
        for k in atoms:
            if not 0 <= k < self.atom_count:
                raise InputError(f"atom index {k} out of range")
            bits |= 1 << k
        return Element(self, bits)

    def atoms(self) -> Iterator["Element"]:
        for k in range(self.atom_count):
            yield Element(self, 1 << k)

    def elements(self) -> Iterator["Element"]:
        """All 2^n elements; only for small algebras."""
        if (1 << self.atom_count) > ENUMERATION_LIMIT:
            raise BudgetError(
                f"refusing to enumerate 2^{self.atom_count} elements"
            )
        for bits in range(1 << self.atom_count):
            yield Element(self, bits)

    def nonzero_elements(self) -> Iterator["Element"]:
        it = self.elements()
        next(it)  # skip zero
        return it

    def atom_label(self, k: int) -> str:
        if self.labels is not None:
            return self.labels[k]
        return str(k)


@dataclass(frozen=True)
class Element:
    """An element of a finite Boolean algebra, stored as an atom bitset."""

    algebra: FinBoolAlg
    bits: int

    def __post_init__(self):
        if not 0 <= self.bits < (1 << self.algebra.atom_count):
            raise InputError(f"bitset {self.bits:#x} out of range for algebra")

    def _require_same(self, other: "Element") -> None:
        if self.algebra != other.algebra:
            raise InputError("elements belong to different algebras")

    def __or__(self, other: "Element") -> "Element":
        self._require_same(other)
        return Element(self.algebra, self.bits | other.bits)

    def __and__(self, other: "Element") -> "Element":
        self._require_same(other)
        return Element(self.algebra, self.bits & other.bits)

    def __sub__(self, other: "Element") -> "Element":
        self._require_same(other)
        return Element(self.algebra, self.bits & ~other.bits)

    def __invert__(self) -> "Element":
        return Element(self.algebra, self.algebra.one.bits & ~self.bits)

    def __le__(self, other: "Element") -> bool:
        self._require_same(other)
        return self.bits & ~other.bits == 0

    def __ge__(self, other: "Element") -> bool:
        return other.__le__(self)

    @property
    def is_zero(self) -> bool:
        return self.bits == 0

    def disjoint(self, other: "Element") -> bool:
        self._require_same(other)
        return self.bits & other.bits == 0

    def atom_indices(self) -> Iterator[int]:
        return bit_indices(self.bits)

    def atom_count(self) -> int:
        return self.bits.bit_count()

    def __repr__(self) -> str:
        names = ",".join(self.algebra.atom_label(k) for k in self.atom_indices())
        return f"<{{{names}}}>"


class EmbeddingVerdict:
    """Outcome of the complete-embedding validity check."""

    __slots__ = ("ok", "clause", "detail")

    def __init__(self, ok: bool, clause: str | None = None, detail: str = ""):
        self.ok = ok
        self.clause = clause
        self.detail = detail

    def __bool__(self) -> bool:
        return self.ok

    def __repr__(self) -> str:
        return "valid" if self.ok else f"invalid({self.clause}: {self.detail})"


def is_complete_embedding(
    source: FinBoolAlg, target: FinBoolAlg, images: Sequence[Element]
) -> EmbeddingVerdict:
    """Check that per-atom images form a partition of the target's unit.

    The verdict carries the first violated clause.
    """
    if len(images) != source.atom_count:
        return EmbeddingVerdict(
            False, "arity", f"{len(images)} images for {source.atom_count} atoms"
        )
    for k, img in enumerate(images):
        if img.algebra != target:
            return EmbeddingVerdict(False, "wrong-algebra", f"image of atom {k}")
        if img.is_zero:
            return EmbeddingVerdict(False, "zero-image", f"image of atom {k}")
    for a, b in combinations(range(source.atom_count), 2):
        if images[a].bits & images[b].bits:
            return EmbeddingVerdict(
                False, "not-disjoint", f"images of atoms {a} and {b} overlap"
            )
    union = 0
    for img in images:
        union |= img.bits
    if union != target.one.bits:
        return EmbeddingVerdict(False, "not-covering", "images do not cover the unit")
    return EmbeddingVerdict(True)


@dataclass(frozen=True)
class Embedding:
    """A complete embedding, stored as a disjoint cover of the target's unit.

    ``images[k]`` is the image of the k-th source atom.  The induced map on
    arbitrary elements is the union of atom images; it preserves all Boolean
    operations, is injective, and (the algebras being finite) preserves
    arbitrary sums and products.
    """

    source: FinBoolAlg
    target: FinBoolAlg
    images: tuple[Element, ...]

    def __post_init__(self):
        verdict = is_complete_embedding(self.source, self.target, self.images)
        if not verdict:
            raise InputError(f"not a complete embedding: {verdict}")

    def apply(self, x: Element) -> Element:
        if x.algebra != self.source:
            raise InputError("element does not belong to the source algebra")
        bits = 0
        for k in bit_indices(x.bits):
            bits |= self.images[k].bits
        return Element(self.target, bits)

    def project(self, y: Element) -> Element:
        """Least source element whose image lies above ``y``.

        Equals the sum of source atoms whose image meets ``y``.
        """
        if y.algebra != self.target:
            raise InputError("element does not belong to the target algebra")
        bits = 0
        for k in range(self.source.atom_count):
            if self.images[k].bits & y.bits:
                bits |= 1 << k
        return Element(self.source, bits)

    def atom_cell(self, y_atom: int) -> int:
        """Index of the unique source atom whose image contains target atom."""
        for k in range(self.source.atom_count):
            if self.images[k].bits >> y_atom & 1:
                return k
        raise InputError(f"target atom {y_atom} not covered")  # pragma: no cover

    @property
    def is_identity_shaped(self) -> bool:
        return self.source.atom_count == self.target.atom_count and all(
            self.images[k].bits == 1 << k for k in range(self.source.atom_count)
        )


def identity_embedding(algebra: FinBoolAlg) -> Embedding:
    return Embedding(
        algebra, algebra, tuple(algebra.atom(k) for k in range(algebra.atom_count))
    )


def compose_embeddings(first: Embedding, second: Embedding) -> Embedding:
    """The embedding x -> second(first(x))."""
    if first.target != second.source:
        raise InputError("embeddings do not compose: target/source mismatch")
    return Embedding(
        first.source, second.target, tuple(second.apply(img) for img in first.images)
    )


def project(e: Embedding, a: Element) -> Element:
    """Projection along ``e``: least b in the source with e(b) >= a."""
    return e.project(a)


def project_by_product_formula(e: Embedding, a: Element) -> Element:
    """Projection computed literally as the meet of all c with e(c) >= a.

    Exponential in the source size; serves as an independent oracle.
    """
    result = e.source.one
    for c in e.source.elements():
        if e.apply(c) >= a:
            result = result & c
    return result


@dataclass(frozen=True)
class IterationName:
    """A two-step iteration datum: one fiber algebra per base atom."""

    base: FinBoolAlg
    fibers: tuple[FinBoolAlg, ...]

    def __post_init__(self):
        if len(self.fibers) != self.base.atom_count:
            raise InputError("need exactly one fiber per base atom")


@dataclass(frozen=True)
class TwoStep:
    """Result of a two-step iteration: the composed algebra, the complete
    embedding of the base, and the (base atom, fiber atom) pair per atom."""

    algebra: FinBoolAlg
    base_embedding: Embedding
    atom_pairs: tuple[tuple[int, int], ...]

    def pair_atom(self, b: int, f: int) -> Element:
        return self.algebra.atom(self.atom_pairs.index((b, f)))


def two_step(name: IterationName, budget: int | None = None) -> TwoStep:
    """Compose a base algebra with fiber algebras decided on its atoms.

    Atoms of the result are pairs (base atom, fiber atom); the base embeds by
    sending each base atom to the sum of pairs sitting over it.
    """
    pairs = []
    labels = []
    for b in range(name.base.atom_count):
        fiber = name.fibers[b]
        for f in range(fiber.atom_count):
            pairs.append((b, f))
            labels.append(f"{name.base.atom_label(b)}.{fiber.atom_label(f)}")
    check_atom_budget(len(pairs), budget)
    algebra = FinBoolAlg(len(pairs), tuple(labels))
    images = []
    for b in range(name.base.atom_count):
        bits = 0
        for k, (bb, _) in enumerate(pairs):
            if bb == b:
                bits |= 1 << k
        images.append(Element(algebra, bits))
    return TwoStep(algebra, Embedding(name.base, algebra, tuple(images)), tuple(pairs))


@dataclass(frozen=True)
class Product:
    """Binary product: atoms are coordinate pairs, both coordinate embeddings
    are complete, and together with a trivial base they form a correct
    square."""

    algebra: FinBoolAlg
    left: Embedding
    right: Embedding
    atom_pairs: tuple[tuple[int, int], ...]


def product(a0: FinBoolAlg, a1: FinBoolAlg, budget: int | None = None) -> Product:
    count = a0.atom_count * a1.atom_count
    check_atom_budget(count, budget)
    pairs = tuple(
        (x, y) for x in range(a0.atom_count) for y in range(a1.atom_count)
    )
    labels = tuple(f"{a0.atom_label(x)}*{a1.atom_label(y)}" for x, y in pairs)
    algebra = FinBoolAlg(count, labels)
    left_images = []
    for x in range(a0.atom_count):
        bits = 0
        for k, (xx, _) in enumerate(pairs):
            if xx == x:
                bits |= 1 << k
        left_images.append(Element(algebra, bits))
    right_images = []
    for y in range(a1.atom_count):
        bits = 0
        for k, (_, yy) in enumerate(pairs):
            if yy == y:
                bits |= 1 << k
        right_images.append(Element(algebra, bits))
    return Product(
        algebra,
        Embedding(a0, algebra, tuple(left_images)),
        Embedding(a1, algebra, tuple(right_images)),
        pairs,
    )


@dataclass(frozen=True)
class Quotient:
    """Relative algebra below the image of one source atom.

    A generic filter on a finite algebra is principal at an atom; the quotient
    by it is the relative algebra below that atom's image.  ``atom_indices``
    lists, per quotient atom, the corresponding target atom.
    """

    algebra: FinBoolAlg
    target: FinBoolAlg
    atom_indices: tuple[int, ...]

    def to_quotient(self, x: Element) -> Element:
        """Restrict a target element to the quotient (intersect and relabel)."""
        if x.algebra != self.target:
            raise InputError("element does not belong to the quotient's target")
        bits = 0
        for qk, tk in enumerate(self.atom_indices):
            if x.bits >> tk & 1:
                bits |= 1 << qk
        return Element(self.algebra, bits)

    def from_quotient(self, x: Element) -> Element:
        if x.algebra != self.algebra:
            raise InputError("element does not belong to the quotient algebra")
        bits = 0
        for qk, tk in enumerate(self.atom_indices):
            if x.bits >> qk & 1:
                bits |= 1 << tk
        return Element(self.target, bits)


def quotient(e: Embedding, g: int) -> Quotient:
    """Quotient of the target by the generic filter at source atom ``g``."""
    if not 0 <= g < e.source.atom_count:
        raise InputError(f"source atom {g} out of range")
    cell = e.images[g]
    indices = tuple(cell.atom_indices())
    labels = tuple(e.target.atom_label(k) for k in indices)
    return Quotient(FinBoolAlg(len(indices), labels), e.target, indices)


def maximal_antichains(
    algebra: FinBoolAlg, limit: int = 10_000
) -> Iterator[tuple[Element, ...]]:
    """All maximal antichains of a finite Boolean algebra.

    These are exactly the partitions of the atom set into nonempty blocks
    (an antichain of pairwise disjoint nonzero elements is maximal iff it sums
    to the unit).  Guarded because the count grows like the Bell numbers.
    """
    n = algebra.atom_count
    count = 0

    def rec(atoms: list[int], blocks: list[list[int]]) -> Iterator[tuple[Element, ...]]:
        nonlocal count
        if not atoms:
            count += 1
            if count > limit:
                raise BudgetError(
                    f"more than {limit} maximal antichains in a {n}-atom algebra"
                )
            yield tuple(algebra.from_atoms(b) for b in blocks)
            return
        head, rest = atoms[0], atoms[1:]
        for i in range(len(blocks)):
            blocks[i].append(head)
            yield from rec(rest, blocks)
            blocks[i].pop()
        blocks.append([head])
        yield from rec(rest, blocks)
        blocks.pop()

    yield from rec(list(range(n)), [])


def is_maximal_antichain(algebra: FinBoolAlg, chain: Sequence[Element]) -> bool:
    union = 0
    for i, x in enumerate(chain):
        if x.algebra != algebra or x.is_zero:
            return False
        if union & x.bits:
            return False
        union |= x.bits
    return union == algebra.one.bits
