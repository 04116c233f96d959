import pytest
from fractions import Fraction

from hypothesis import given, settings, strategies as st

from forcelab.algebra import (
    Element,
    Embedding,
    FinBoolAlg,
    IterationName,
    compose_embeddings,
    identity_embedding,
    is_complete_embedding,
    is_maximal_antichain,
    maximal_antichains,
    product,
    project,
    project_by_product_formula,
    quotient,
    two_step,
)
from forcelab.errors import InputError


def split_embedding(source: FinBoolAlg, cell_sizes):
    """Embedding splitting each source atom into a cell of the given size."""
    total = sum(cell_sizes)
    target = FinBoolAlg(total)
    images = []
    start = 0
    for size in cell_sizes:
        images.append(target.from_atoms(range(start, start + size)))
        start += size
    return Embedding(source, target, tuple(images))


class TestElements:
    def test_boolean_operations_are_setwise(self):
        alg = FinBoolAlg(4)
        x = alg.from_atoms([0, 1])
        y = alg.from_atoms([1, 2])
        assert (x | y) == alg.from_atoms([0, 1, 2])
        assert (x & y) == alg.from_atoms([1])
        assert (x - y) == alg.from_atoms([0])
        assert ~x == alg.from_atoms([2, 3])
        assert alg.zero.is_zero and not alg.one.is_zero

    def test_cross_algebra_operations_rejected(self):
        a, b = FinBoolAlg(2), FinBoolAlg(3)
        with pytest.raises(InputError):
            a.one & b.one

    def test_zero_atom_algebra_rejected(self):
        with pytest.raises(InputError):
            FinBoolAlg(0)


class TestEmbeddingValidation:
    def test_valid_partition(self):
        target = FinBoolAlg(4)
        source = FinBoolAlg(2)
        images = (target.from_atoms([0, 1]), target.from_atoms([2, 3]))
        assert is_complete_embedding(source, target, images).ok

    def test_overlap_rejected(self):
        target = FinBoolAlg(3)
        source = FinBoolAlg(2)
        images = (target.from_atoms([0, 1]), target.from_atoms([1, 2]))
        verdict = is_complete_embedding(source, target, images)
        assert not verdict.ok and verdict.clause == "not-disjoint"

    def test_not_covering_rejected(self):
        target = FinBoolAlg(3)
        source = FinBoolAlg(2)
        images = (target.from_atoms([0]), target.from_atoms([1]))
        verdict = is_complete_embedding(source, target, images)
        assert not verdict.ok and verdict.clause == "not-covering"

    def test_zero_image_rejected(self):
        target = FinBoolAlg(2)
        source = FinBoolAlg(2)
        images = (target.zero, target.one)
        verdict = is_complete_embedding(source, target, images)
        assert not verdict.ok and verdict.clause == "zero-image"


class TestProjection:
    def test_single_cell_hit(self):
        e = split_embedding(FinBoolAlg(2), [2, 2])
        a = e.target.from_atoms([0])
        assert project(e, a) == e.source.from_atoms([0])

    def test_both_cells_hit(self):
        e = split_embedding(FinBoolAlg(2), [2, 2])
        a = e.target.from_atoms([0, 2])
        assert project(e, a) == e.source.one

    def test_zero_projects_to_zero(self):
        e = split_embedding(FinBoolAlg(2), [2, 2])
        assert project(e, e.target.zero).is_zero

    def test_projection_is_least_upper_cover(self):
        e = split_embedding(FinBoolAlg(3), [1, 2, 3])
        for a in e.target.elements():
            h = project(e, a)
            assert e.apply(h) >= a
            assert h.is_zero == a.is_zero
            for c in e.source.elements():
                if e.apply(c) >= a:
                    assert h <= c

    def test_projection_matches_product_formula(self):
        e = split_embedding(FinBoolAlg(3), [2, 1, 2])
        for a in e.target.elements():
            assert project(e, a) == project_by_product_formula(e, a)

    @settings(deadline=None, derandomize=True, max_examples=40)
    @given(st.lists(st.integers(min_value=1, max_value=3), min_size=1, max_size=4), st.data())
    def test_projection_laws_random(self, sizes, data):
        e = split_embedding(FinBoolAlg(len(sizes)), sizes)
        bits = data.draw(st.integers(min_value=0, max_value=(1 << e.target.atom_count) - 1))
        a = e.target.element(bits)
        h = project(e, a)
        assert e.apply(h) >= a
        assert project(e, e.apply(h)) == h
        assert h == project_by_product_formula(e, a)

    def test_projection_of_composition(self):
        e1 = split_embedding(FinBoolAlg(2), [2, 1])
        e2 = split_embedding(e1.target, [1, 2, 2])
        comp = compose_embeddings(e1, e2)
        for a in comp.target.elements():
            assert project(comp, a) == project(e1, project(e2, a))


class TestTwoStep:
    def test_atom_count_is_fiber_sum(self):
        name = IterationName(FinBoolAlg(2), (FinBoolAlg(2), FinBoolAlg(1)))
        step = two_step(name)
        assert step.algebra.atom_count == 3

    def test_single_base_atom_is_fiber_copy(self):
        fiber = FinBoolAlg(5)
        step = two_step(IterationName(FinBoolAlg(1), (fiber,)))
        assert step.algebra.atom_count == 5

    def test_pair_atoms_project_to_base(self):
        name = IterationName(FinBoolAlg(2), (FinBoolAlg(2), FinBoolAlg(2)))
        step = two_step(name)
        assert step.algebra.atom_count == 4
        for k, (b, f) in enumerate(step.atom_pairs):
            assert project(step.base_embedding, step.algebra.atom(k)) == name.base.atom(b)


class TestQuotient:
    def test_relative_algebra(self):
        e = split_embedding(FinBoolAlg(2), [2, 2])
        q = quotient(e, 0)
        assert q.algebra.atom_count == 2
        assert q.atom_indices == (0, 1)

    def test_identity_gives_trivial_quotient(self):
        alg = FinBoolAlg(3)
        q = quotient(identity_embedding(alg), 1)
        assert q.algebra.atom_count == 1

    def test_two_step_quotient_recovers_fiber(self):
        fibers = (FinBoolAlg(2), FinBoolAlg(3))
        step = two_step(IterationName(FinBoolAlg(2), fibers))
        q = quotient(step.base_embedding, 1)
        assert q.algebra.atom_count == 3
        # relabeling matches the canonical pair order
        expected = tuple(
            k for k, (b, _) in enumerate(step.atom_pairs) if b == 1
        )
        assert q.atom_indices == expected

    def test_round_trip_maps(self):
        e = split_embedding(FinBoolAlg(2), [1, 3])
        q = quotient(e, 1)
        for x in q.algebra.elements():
            assert q.to_quotient(q.from_quotient(x)) == x


class TestProduct:
    def test_atom_counts_multiply(self):
        assert product(FinBoolAlg(2), FinBoolAlg(2)).algebra.atom_count == 4
        assert product(FinBoolAlg(1), FinBoolAlg(7)).algebra.atom_count == 7

    def test_projections_are_coordinates(self):
        pr = product(FinBoolAlg(2), FinBoolAlg(3))
        assert pr.algebra.atom_count == 6
        for k, (x, y) in enumerate(pr.atom_pairs):
            atom = pr.algebra.atom(k)
            assert project(pr.left, atom) == pr.left.source.atom(x)
            assert project(pr.right, atom) == pr.right.source.atom(y)


class TestAntichains:
    def test_counts_follow_bell_numbers(self):
        assert sum(1 for _ in maximal_antichains(FinBoolAlg(3))) == 5
        assert sum(1 for _ in maximal_antichains(FinBoolAlg(4))) == 15

    def test_every_enumerated_antichain_is_maximal(self):
        alg = FinBoolAlg(4)
        for chain in maximal_antichains(alg):
            assert is_maximal_antichain(alg, chain)

    def test_embeddings_preserve_maximality(self):
        e = split_embedding(FinBoolAlg(3), [2, 1, 2])
        for chain in maximal_antichains(e.source):
            mapped = tuple(e.apply(x) for x in chain)
            assert is_maximal_antichain(e.target, mapped)
