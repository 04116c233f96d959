"""Deterministic fixtures: coordinate-product systems over small indexes,
random commuting squares, and corruption helpers for mutation testing.

A coordinate system assigns to each index element a set of named coordinates,
monotone in the order with S(i∧j) = S(i) ∩ S(j) and S(i∨j) = S(i) ∪ S(j);
the level algebras are the products of the coordinate algebras and the
embeddings are coordinate inclusions.  Such systems always have commuting
complete embeddings and correct projections, which makes them the workhorse
for exercising the amalgamation and coherence machinery.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from itertools import product as iter_product
from typing import Hashable, Mapping, Sequence

from .algebra import Element, Embedding, FinBoolAlg
from .errors import InputError
from .indices import AlmostLattice, adjoin_top, grid_elements, grid_index
from .measures import Measure
from .systems import AlgebraSystem, Square


@dataclass(eq=False)
class CoordinateFrame:
    """A pool of named coordinate algebras with measures, and product spaces
    over subsets of them."""

    keys: tuple[Hashable, ...]
    algebras: Mapping[Hashable, FinBoolAlg]
    measures: Mapping[Hashable, Measure]

    def __post_init__(self):
        for key in self.keys:
            if key not in self.algebras or key not in self.measures:
                raise InputError(f"coordinate {key!r} lacks an algebra or measure")
        self._spaces: dict[frozenset, FinBoolAlg] = {}
        self._tuples: dict[frozenset, list[tuple[int, ...]]] = {}

    def _ordered(self, keys: frozenset) -> list[Hashable]:
        return [k for k in self.keys if k in keys]

    def space(self, keys: frozenset) -> FinBoolAlg:
        """Product algebra over a coordinate subset; atoms enumerate lex."""
        keys = frozenset(keys)
        if keys in self._spaces:
            return self._spaces[keys]
        ordered = self._ordered(keys)
        ranges = [range(self.algebras[k].atom_count) for k in ordered]
        tuples = list(iter_product(*ranges)) if ordered else [()]
        labels = tuple(
            "*" if not ordered else ",".join(
                f"{k}={self.algebras[k].atom_label(v)}" for k, v in zip(ordered, tup)
            )
            for tup in tuples
        )
        alg = FinBoolAlg(len(tuples), labels)
        self._spaces[keys] = alg
        self._tuples[keys] = tuples
        return alg

    def atom_tuples(self, keys: frozenset) -> list[tuple[int, ...]]:
        self.space(keys)
        return self._tuples[frozenset(keys)]

    def embedding(self, small: frozenset, big: frozenset) -> Embedding:
        """Coordinate-inclusion embedding between product spaces."""
        small, big = frozenset(small), frozenset(big)
        if small - big:
            raise InputError("coordinate sets are not nested")
        src = self.space(small)
        tgt = self.space(big)
        ordered_small = self._ordered(small)
        ordered_big = self._ordered(big)
        positions = [ordered_big.index(k) for k in ordered_small]
        images = []
        for s_tuple in self.atom_tuples(small):
            bits = 0
            for t_index, b_tuple in enumerate(self.atom_tuples(big)):
                if all(b_tuple[positions[i]] == v for i, v in enumerate(s_tuple)):
                    bits |= 1 << t_index
            images.append(Element(tgt, bits))
        return Embedding(src, tgt, tuple(images))

    def measure(self, keys: frozenset) -> Measure:
        """Product measure on the space over a coordinate subset."""
        ordered = self._ordered(frozenset(keys))
        weights = []
        for tup in self.atom_tuples(frozenset(keys)):
            w = Fraction(1)
            for k, v in zip(ordered, tup):
                w *= self.measures[k].weights[v]
            weights.append(w)
        return Measure(self.space(frozenset(keys)), tuple(weights))


def coordinate_system(
    index: AlmostLattice,
    frame: CoordinateFrame,
    assignment: Sequence[frozenset],
) -> AlgebraSystem:
    """System over an index with coordinate-product levels."""
    if len(assignment) != index.size:
        raise InputError("one coordinate set per index element required")
    for i in range(index.size):
        for j in range(index.size):
            g = index.meet[i][j]
            if frozenset(assignment[i]) & frozenset(assignment[j]) != frozenset(assignment[g]):
                raise InputError(f"coordinate sets do not intersect along meets ({i},{j})")
            u = index.join[i][j]
            if u is not None and frozenset(assignment[i]) | frozenset(assignment[j]) != frozenset(assignment[u]):
                raise InputError(f"coordinate sets do not unite along joins ({i},{j})")
    algebras = tuple(frame.space(assignment[i]) for i in range(index.size))
    embeddings = {}
    for i, j in index.comparable_pairs():
        embeddings[(i, j)] = frame.embedding(assignment[i], assignment[j])
    return AlgebraSystem(index, algebras, embeddings)


def coin_frame(keys: Sequence[Hashable], weights: Sequence[Fraction] | None = None) -> CoordinateFrame:
    """One two-atom coordinate per key; optionally one asymmetric weight per
    key (the weight of the key's first atom)."""
    algebras = {}
    measures = {}
    for pos, key in enumerate(keys):
        alg = FinBoolAlg(2, (f"{key}0", f"{key}1"))
        algebras[key] = alg
        if weights is None:
            w = Fraction(1, 2)
        else:
            w = weights[pos]
        measures[key] = Measure(alg, (w, 1 - w))
    return CoordinateFrame(tuple(keys), algebras, measures)


def rooted_index(index: AlmostLattice) -> AlmostLattice:
    """Adjoin a fresh minimum below everything.

    Amalgamation over a nontrivial bottom algebra is modelled by rooting the
    index with a trivial level; the dense set and its completion are
    unchanged because matching only involves the meet of the maximal witness.
    """
    n = index.size
    leq = [[True] * (n + 1)]
    for i in range(n):
        leq.append([False] + list(index.leq[i]))
    labels = None
    if index.labels is not None:
        labels = ("root",) + index.labels
    return AlmostLattice.from_leq(n + 1, leq, labels)


def grid_coordinate_system(
    xi: int,
    theta: int,
    strict: bool = True,
    weights_a: Sequence[Fraction] | None = None,
    weights_b: Sequence[Fraction] | None = None,
) -> tuple[AlgebraSystem, CoordinateFrame, tuple[frozenset, ...]]:
    """Coin-coordinate system over a grid index: column coins a_c for c < ζ
    and row coins b_r for r < η at level (ζ,η).  The bottom level (0,0) is
    trivial, so the system feeds the amalgamated limit directly."""
    index = grid_index(xi, theta, strict)
    elems = grid_elements(xi, theta, strict)
    keys = [("a", c) for c in range(xi)] + [("b", r) for r in range(theta)]
    w = None
    if weights_a is not None or weights_b is not None:
        wa = list(weights_a or [Fraction(1, 2)] * xi)
        wb = list(weights_b or [Fraction(1, 2)] * theta)
        w = wa + wb
    frame = coin_frame(keys, w)
    assignment = tuple(
        frozenset({("a", c) for c in range(z)} | {("b", r) for r in range(e)})
        for z, e in elems
    )
    return coordinate_system(index, frame, assignment), frame, assignment


@dataclass(eq=False)
class AmalgamationFixture:
    """A rooted three-element-index system: trivial root, a base level, and
    two incomparable levels built as two-step iterations over the base."""

    system: AlgebraSystem
    base_level: int
    left_level: int
    right_level: int
    base_measure: Measure
    left_fibers: tuple[Measure, ...]   # per base atom, measure on the left fiber
    right_fibers: tuple[Measure, ...]


def amalgamation_fixture(
    base_atoms: int = 2,
    left_fiber_sizes: Sequence[int] = (2, 2),
    right_fiber_sizes: Sequence[int] = (2, 2),
    base_weights: Sequence[Fraction] | None = None,
    left_fiber_weights: Sequence[Sequence[Fraction]] | None = None,
    right_fiber_weights: Sequence[Sequence[Fraction]] | None = None,
) -> AmalgamationFixture:
    """Three-element almost-lattice over a (possibly nontrivial) base, rooted
    by a trivial level; fiber measures may vary per base atom."""
    from .algebra import IterationName, two_step

    if len(left_fiber_sizes) != base_atoms or len(right_fiber_sizes) != base_atoms:
        raise InputError("one fiber size per base atom required")
    root = FinBoolAlg(1, ("*",))
    base = FinBoolAlg(base_atoms, tuple(f"g{k}" for k in range(base_atoms)))
    left_step = two_step(
        IterationName(base, tuple(FinBoolAlg(s) for s in left_fiber_sizes))
    )
    right_step = two_step(
        IterationName(base, tuple(FinBoolAlg(s) for s in right_fiber_sizes))
    )
    leq = [
        [True, True, True, True],
        [False, True, True, True],
        [False, False, True, False],
        [False, False, False, True],
    ]
    index = AlmostLattice.from_leq(4, leq, ("root", "base", "left", "right"))
    root_to = lambda tgt: Embedding(root, tgt, (tgt.one,))
    system = AlgebraSystem(
        index,
        (root, base, left_step.algebra, right_step.algebra),
        {
            (0, 1): root_to(base),
            (0, 2): root_to(left_step.algebra),
            (0, 3): root_to(right_step.algebra),
            (1, 2): left_step.base_embedding,
            (1, 3): right_step.base_embedding,
        },
    )

    if base_weights is None:
        base_weights = [Fraction(1, base_atoms)] * base_atoms
    base_measure = Measure(base, tuple(base_weights))

    def fiber_measures(sizes, given):
        out = []
        for k, size in enumerate(sizes):
            alg = FinBoolAlg(size)
            if given is None:
                out.append(Measure(alg, (Fraction(1, size),) * size))
            else:
                out.append(Measure(alg, tuple(given[k])))
        return tuple(out)

    return AmalgamationFixture(
        system,
        1,
        2,
        3,
        base_measure,
        fiber_measures(left_fiber_sizes, left_fiber_weights),
        fiber_measures(right_fiber_sizes, right_fiber_weights),
    )


def asymmetric_amalgamation_fixture() -> AmalgamationFixture:
    """The desk instance with a 2-atom base and per-atom asymmetric fibers."""
    return amalgamation_fixture(
        base_atoms=2,
        left_fiber_sizes=(2, 2),
        right_fiber_sizes=(2, 3),
        base_weights=(Fraction(1, 3), Fraction(2, 3)),
        left_fiber_weights=(
            (Fraction(1, 4), Fraction(3, 4)),
            (Fraction(2, 5), Fraction(3, 5)),
        ),
        right_fiber_weights=(
            (Fraction(1, 2), Fraction(1, 2)),
            (Fraction(1, 6), Fraction(1, 3), Fraction(1, 2)),
        ),
    )


# ---------------------------------------------------------------------------
# Random commuting squares
# ---------------------------------------------------------------------------


def random_commuting_square(
    rng: random.Random,
    max_base_atoms: int = 2,
    max_cell: int = 3,
    max_top_per_base: int = 8,
) -> Square:
    """A random commuting square of complete embeddings, not necessarily
    correct: over each base atom, the top cell carries two independent onto
    maps to the two middle algebras' cells."""
    nb = rng.randint(1, max_base_atoms)
    base = FinBoolAlg(nb)
    cells0 = [rng.randint(1, max_cell) for _ in range(nb)]
    cells1 = [rng.randint(1, max_cell) for _ in range(nb)]
    a0 = FinBoolAlg(sum(cells0))
    a1 = FinBoolAlg(sum(cells1))

    def onto_map(size: int, targets: int) -> list[int]:
        # surjective map size -> targets
        values = list(range(targets)) + [
            rng.randrange(targets) for _ in range(size - targets)
        ]
        rng.shuffle(values)
        return values

    top_map0: list[int] = []
    top_map1: list[int] = []
    start0 = start1 = 0
    for u in range(nb):
        size = rng.randint(max(cells0[u], cells1[u]), max_top_per_base)
        f0 = onto_map(size, cells0[u])
        f1 = onto_map(size, cells1[u])
        top_map0.extend(start0 + v for v in f0)
        top_map1.extend(start1 + v for v in f1)
        start0 += cells0[u]
        start1 += cells1[u]
    top = FinBoolAlg(len(top_map0))

    def embedding_from_map(src: FinBoolAlg, tgt: FinBoolAlg, cell_of) -> Embedding:
        images = []
        for x in range(src.atom_count):
            bits = 0
            for t in range(tgt.atom_count):
                if cell_of[t] == x:
                    bits |= 1 << t
            images.append(Element(tgt, bits))
        return Embedding(src, tgt, tuple(images))

    base_of_a0 = []
    for u in range(nb):
        base_of_a0.extend([u] * cells0[u])
    base_of_a1 = []
    for u in range(nb):
        base_of_a1.extend([u] * cells1[u])
    return Square(
        base,
        a0,
        a1,
        top,
        embedding_from_map(base, a0, base_of_a0),
        embedding_from_map(base, a1, base_of_a1),
        embedding_from_map(a0, top, top_map0),
        embedding_from_map(a1, top, top_map1),
    )
