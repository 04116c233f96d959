"""Correct squares and indexed systems of algebras with correct projections.

A commuting square of complete embeddings is correct when any two conditions
whose projections into the base are compatible are themselves compatible in
the top.  Three independent oracles decide this: the definition itself
(reduced to atom pairs, which is equivalent because projections preserve
sums), the projection identity h_top,left = h_right,base on the right algebra,
and correctness of every quotient square at the base's atoms.  The three must
always agree; disagreement is a hard failure.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Mapping, Sequence

from .algebra import (
    Element,
    Embedding,
    FinBoolAlg,
    compose_embeddings,
    identity_embedding,
    is_maximal_antichain,
    maximal_antichains,
    product,
    quotient,
)
from .errors import InputError, VerificationError
from .indices import AlmostLattice


@dataclass(frozen=True)
class CorrectnessReport:
    verdict: bool
    witness: tuple | None = None
    method_agreement: bool = True

    def __bool__(self) -> bool:
        return self.verdict


@dataclass(frozen=True)
class Square:
    """A commuting square base -> a0, a1 -> top of complete embeddings."""

    base: FinBoolAlg
    a0: FinBoolAlg
    a1: FinBoolAlg
    top: FinBoolAlg
    base_to_a0: Embedding
    base_to_a1: Embedding
    a0_to_top: Embedding
    a1_to_top: Embedding

    def __post_init__(self):
        for e, src, tgt, name in (
            (self.base_to_a0, self.base, self.a0, "base->a0"),
            (self.base_to_a1, self.base, self.a1, "base->a1"),
            (self.a0_to_top, self.a0, self.top, "a0->top"),
            (self.a1_to_top, self.a1, self.top, "a1->top"),
        ):
            if e.source != src or e.target != tgt:
                raise InputError(f"embedding {name} has mismatched endpoints")
        left = compose_embeddings(self.base_to_a0, self.a0_to_top)
        right = compose_embeddings(self.base_to_a1, self.a1_to_top)
        if left.images != right.images:
            raise InputError("square does not commute")

    @property
    def base_to_top(self) -> Embedding:
        return compose_embeddings(self.base_to_a0, self.a0_to_top)


def _definition_check(sq: Square) -> tuple[bool, tuple | None]:
    """Definition-level check on atom pairs.

    Quantifying over atoms is equivalent to quantifying over all element
    pairs: any violating pair shrinks to an atom pair over a single base atom
    because projections preserve sums.
    """
    for x in range(sq.a0.atom_count):
        hx = sq.base_to_a0.atom_cell(x)
        for y in range(sq.a1.atom_count):
            if sq.base_to_a1.atom_cell(y) != hx:
                continue
            if sq.a0_to_top.images[x].disjoint(sq.a1_to_top.images[y]):
                return False, (sq.a0.atom(x), sq.a1.atom(y))
    return True, None


def definition_check_exhaustive(sq: Square) -> tuple[bool, tuple | None]:
    """Literal quantifier over all nonzero element pairs; test oracle only."""
    for a0 in sq.a0.nonzero_elements():
        p0 = sq.base_to_a0.project(a0)
        for a1 in sq.a1.nonzero_elements():
            p1 = sq.base_to_a1.project(a1)
            if not (p0 & p1).is_zero:
                if sq.a0_to_top.apply(a0).disjoint(sq.a1_to_top.apply(a1)):
                    return False, (a0, a1)
    return True, None


def _projection_identity_check(sq: Square) -> tuple[bool, tuple | None]:
    """h_{top,a0} restricted to a1 must agree with the projection to the base.

    Both sides preserve sums, so atoms of a1 suffice.
    """
    for y in range(sq.a1.atom_count):
        via_top = sq.a0_to_top.project(sq.a1_to_top.images[y])
        via_base = sq.base_to_a0.apply(sq.base_to_a1.project(sq.a1.atom(y)))
        if via_top != via_base:
            return False, (sq.a1.atom(y), via_top, via_base)
    return True, None


def _quotient_square_check(sq: Square) -> tuple[bool, tuple | None]:
    """Correct iff every quotient square at a base atom is correct."""
    base_top = sq.base_to_top
    for g in range(sq.base.atom_count):
        q0 = quotient(sq.base_to_a0, g)
        q1 = quotient(sq.base_to_a1, g)
        qt = quotient(base_top, g)
        for qx, tx in enumerate(q0.atom_indices):
            img_x = qt.to_quotient(sq.a0_to_top.images[tx])
            for qy, ty in enumerate(q1.atom_indices):
                img_y = qt.to_quotient(sq.a1_to_top.images[ty])
                if img_x.disjoint(img_y):
                    return False, (g, sq.a0.atom(tx), sq.a1.atom(ty))
    return True, None


def check_correct_square(sq: Square) -> CorrectnessReport:
    """Run the three correctness oracles and assert they agree."""
    ok_def, wit_def = _definition_check(sq)
    ok_proj, _ = _projection_identity_check(sq)
    ok_quot, _ = _quotient_square_check(sq)
    agreement = ok_def == ok_proj == ok_quot
    if not agreement:
        raise VerificationError(
            "correctness oracles disagree",
            {"definition": ok_def, "projection": ok_proj, "quotient": ok_quot},
        )
    return CorrectnessReport(ok_def, wit_def, agreement)


# ---------------------------------------------------------------------------
# Systems over an index
# ---------------------------------------------------------------------------


@dataclass(eq=False)
class AlgebraSystem:
    """Algebras indexed by an almost-lattice with commuting embeddings."""

    index: AlmostLattice
    algebras: tuple[FinBoolAlg, ...]
    embeddings: dict[tuple[int, int], Embedding]

    def __post_init__(self):
        if len(self.algebras) != self.index.size:
            raise InputError("one algebra per index element required")
        for (i, j), e in self.embeddings.items():
            if not self.index.lt(i, j):
                raise InputError(f"embedding for non-comparable pair ({i},{j})")
            if e.source != self.algebras[i] or e.target != self.algebras[j]:
                raise InputError(f"embedding ({i},{j}) has mismatched endpoints")
        for i, j in self.index.comparable_pairs():
            if (i, j) not in self.embeddings:
                raise InputError(f"missing embedding for pair ({i},{j})")
        for i, j in self.index.comparable_pairs():
            for k in range(self.index.size):
                if self.index.lt(j, k):
                    lhs = compose_embeddings(self.embeddings[(i, j)], self.embeddings[(j, k)])
                    if lhs.images != self.embeddings[(i, k)].images:
                        raise InputError(f"embeddings do not commute along {i}<{j}<{k}")

    def algebra(self, i: int) -> FinBoolAlg:
        return self.algebras[i]

    def embedding(self, i: int, j: int) -> Embedding:
        if i == j:
            cache = self.__dict__.setdefault("_identities", {})
            if i not in cache:
                cache[i] = identity_embedding(self.algebras[i])
            return cache[i]
        return self.embeddings[(i, j)]

    def embed(self, i: int, j: int, x: Element) -> Element:
        return self.embedding(i, j).apply(x)

    def project(self, j: int, i: int, x: Element) -> Element:
        """Projection from level j down to level i ≤ j."""
        return self.embedding(i, j).project(x)

    def has_trivial_bottom(self) -> bool:
        return self.algebras[self.index.minimum()].atom_count == 1

    def square(self, i: int, j: int) -> Square:
        """The square at an incomparable joinable pair."""
        u = self.index.join[i][j]
        if u is None:
            raise InputError(f"pair ({i},{j}) has no join")
        g = self.index.meet[i][j]
        return Square(
            self.algebras[g],
            self.algebras[i],
            self.algebras[j],
            self.algebras[u],
            self.embedding(g, i),
            self.embedding(g, j),
            self.embedding(i, u),
            self.embedding(j, u),
        )


def check_system_correct(system: AlgebraSystem) -> CorrectnessReport:
    """Check every square at an incomparable joinable pair of the index."""
    n = system.index.size
    for i in range(n):
        for j in range(i + 1, n):
            if system.index.comparable(i, j):
                continue
            if not system.index.joinable(i, j):
                continue
            report = check_correct_square(system.square(i, j))
            if not report.verdict:
                a_i, a_j = report.witness
                return CorrectnessReport(False, (i, j, a_i, a_j), report.method_agreement)
    return CorrectnessReport(True)


# ---------------------------------------------------------------------------
# Direct limits
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DirectLimit:
    algebra: FinBoolAlg
    embeddings: tuple[Embedding, ...]
    top_index: int


def direct_limit(system: AlgebraSystem) -> DirectLimit:
    """Direct limit over a directed index.

    A finite directed order has a maximum, so the limit is the top algebra
    with the system's embeddings into it.
    """
    n = system.index.size
    for i in range(n):
        for j in range(n):
            if not system.index.joinable(i, j):
                raise InputError("index is not directed")
    top = system.index.maximum()
    assert top is not None  # finite directed orders have a maximum
    embeddings = tuple(system.embedding(i, top) for i in range(n))
    return DirectLimit(system.algebras[top], embeddings, top)


def verify_limit_embedding(
    small: AlgebraSystem,
    big: AlgebraSystem,
    level: Sequence[Embedding],
    antichain_limit: int = 5_000,
) -> bool:
    """Certify that the limit of ``small`` embeds completely in the limit of
    ``big`` along levelwise embeddings with correct squares.

    Precondition failures (non-commuting levels, a non-correct square) raise
    input errors naming the square; the final check walks every maximal
    antichain of the small limit and confirms maximality in the big limit.
    """
    if small.index.size != big.index.size:
        raise InputError("systems must share their index")
    if small.index.leq != big.index.leq:
        raise InputError("systems must share their index order")
    n = small.index.size
    for k in range(n):
        if level[k].source != small.algebras[k] or level[k].target != big.algebras[k]:
            raise InputError(f"level embedding {k} has mismatched endpoints")
    for k, l in small.index.comparable_pairs():
        via_small = compose_embeddings(small.embedding(k, l), level[l])
        via_big = compose_embeddings(level[k], big.embedding(k, l))
        if via_small.images != via_big.images:
            raise InputError(f"level embeddings do not commute over {k}<{l}")
        sq = Square(
            small.algebras[k],
            big.algebras[k],
            small.algebras[l],
            big.algebras[l],
            level[k],
            small.embedding(k, l),
            big.embedding(k, l),
            level[l],
        )
        if not check_correct_square(sq).verdict:
            raise InputError(f"square at levels {k} <= {l} is not correct")
    lim_small = direct_limit(small)
    lim_big = direct_limit(big)
    e = level[lim_small.top_index]
    for chain in maximal_antichains(lim_small.algebra, antichain_limit):
        mapped = tuple(e.apply(x) for x in chain)
        if not is_maximal_antichain(lim_big.algebra, mapped):
            return False
    return True


# ---------------------------------------------------------------------------
# Product step
# ---------------------------------------------------------------------------


def multiply_system(system: AlgebraSystem, factor: FinBoolAlg) -> AlgebraSystem:
    """Replace every level A_i by A_i × factor, identity on the new
    coordinate.  Correctness is preserved coordinatewise and re-verified."""
    if not check_system_correct(system).verdict:
        raise InputError("system must have correct projections")
    n = system.index.size
    products = [product(system.algebras[i], factor) for i in range(n)]
    embeddings: dict[tuple[int, int], Embedding] = {}
    for i, j in system.index.comparable_pairs():
        e = system.embeddings[(i, j)]
        images = []
        for x in range(system.algebras[i].atom_count):
            for b in range(factor.atom_count):
                img = products[j].algebra.zero
                for y in e.images[x].atom_indices():
                    img = img | products[j].algebra.atom(
                        products[j].atom_pairs.index((y, b))
                    )
                images.append(img)
        embeddings[(i, j)] = Embedding(
            products[i].algebra, products[j].algebra, tuple(images)
        )
    result = AlgebraSystem(system.index, tuple(p.algebra for p in products), embeddings)
    report = check_system_correct(result)
    if not report.verdict:
        raise VerificationError("product system lost correctness", report.witness)
    return result


def exploratory_iteration_report(
    sq: Square, top_fibers: Sequence[FinBoolAlg]
) -> dict:
    """Iterate a square with a possibly non-constant fiber name on the top and
    report (never assert) correctness of the resulting square.

    The name must be decided at each lower level: fibers must be constant on
    the cells of each embedding into the top, otherwise the name is rejected.
    """
    from .algebra import IterationName, two_step

    if len(top_fibers) != sq.top.atom_count:
        raise InputError("one fiber per top atom required")

    def restricted(e_to_top: Embedding, alg: FinBoolAlg) -> IterationName:
        fibers = []
        for x in range(alg.atom_count):
            cell = [top_fibers[t] for t in e_to_top.images[x].atom_indices()]
            if any(f != cell[0] for f in cell):
                raise InputError(
                    f"fiber name is not decided at level atom {x}; use a constant name"
                )
            fibers.append(cell[0])
        return IterationName(alg, tuple(fibers))

    top_step = two_step(IterationName(sq.top, tuple(top_fibers)))
    base_step = two_step(restricted(sq.base_to_top, sq.base))
    a0_step = two_step(restricted(sq.a0_to_top, sq.a0))
    a1_step = two_step(restricted(sq.a1_to_top, sq.a1))

    def lifted(e: Embedding, src_step, tgt_step) -> Embedding:
        images = []
        for (b, f) in src_step.atom_pairs:
            img = tgt_step.algebra.zero
            for t in e.images[b].atom_indices():
                img = img | tgt_step.algebra.atom(tgt_step.atom_pairs.index((t, f)))
            images.append(img)
        return Embedding(src_step.algebra, tgt_step.algebra, tuple(images))

    new_sq = Square(
        base_step.algebra,
        a0_step.algebra,
        a1_step.algebra,
        top_step.algebra,
        lifted(sq.base_to_a0, base_step, a0_step),
        lifted(sq.base_to_a1, base_step, a1_step),
        lifted(sq.a0_to_top, a0_step, top_step),
        lifted(sq.a1_to_top, a1_step, top_step),
    )
    original = check_correct_square(sq)
    iterated = check_correct_square(new_sq)
    return {
        "original_correct": original.verdict,
        "iterated_correct": iterated.verdict,
        "witness": iterated.witness,
    }
