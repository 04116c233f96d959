import pytest
from fractions import Fraction

from forcelab.algebra import FinBoolAlg, is_maximal_antichain, maximal_antichains, quotient
from forcelab.amalgam import (
    AmalCondition,
    Amalgam,
    amal_limit,
    build_D,
    build_full_witness_D,
    extended_system,
    quotient_equivalence_checks,
    quotient_presentation,
)
from forcelab.errors import BudgetError, InputError, VerificationError
from forcelab.fixtures import (
    amalgamation_fixture,
    asymmetric_amalgamation_fixture,
    grid_coordinate_system,
)
from forcelab.indices import AlmostLattice, grid_elements
from forcelab.posets import regular_open_algebra
from forcelab.systems import AlgebraSystem, check_system_correct
from forcelab.algebra import Embedding


def product_fixture(n0=2, n1=2):
    """Trivial base, two coins: the plain product case."""
    return amalgamation_fixture(
        base_atoms=1, left_fiber_sizes=(n0,), right_fiber_sizes=(n1,)
    )


def chain_system():
    """A three-chain (a lattice with maximum)."""
    idx = AlmostLattice.from_leq(
        3, [[True, True, True], [False, True, True], [False, False, True]]
    )
    bottom = FinBoolAlg(1)
    mid = FinBoolAlg(2)
    top = FinBoolAlg(4)
    e_mid_top = Embedding(
        mid, top, (top.from_atoms([0, 1]), top.from_atoms([2, 3]))
    )
    trivial = lambda tgt: Embedding(bottom, tgt, (tgt.one,))
    return AlgebraSystem(
        idx,
        (bottom, mid, top),
        {(0, 1): trivial(mid), (0, 2): trivial(top), (1, 2): e_mid_top},
    )


class TestDenseSet:
    def test_product_case_class_and_atom_counts(self):
        fx = product_fixture()
        dense = build_D(fx.system)
        assert len(dense.conditions) == 9  # 3 x 3 nonzero pairs
        ro = regular_open_algebra(dense.preorder)
        assert ro.algebra.atom_count == 4

    def test_order_is_transitive_by_construction(self):
        fx = asymmetric_amalgamation_fixture()
        dense = build_D(fx.system)  # FinPreorder validates transitivity
        assert dense.preorder.size == len(dense.conditions)

    def test_full_witness_dense_set_same_completion(self):
        fx = product_fixture()
        conditions, preorder = build_full_witness_D(fx.system)
        ro_full = regular_open_algebra(preorder)
        ro_canonical = regular_open_algebra(build_D(fx.system).preorder)
        assert ro_full.algebra.atom_count == ro_canonical.algebra.atom_count

    def test_full_witness_dense_set_nontrivial_base(self):
        fx = amalgamation_fixture(
            base_atoms=2, left_fiber_sizes=(1, 2), right_fiber_sizes=(2, 1)
        )
        conditions, preorder = build_full_witness_D(fx.system, class_budget=2048)
        ro_full = regular_open_algebra(preorder)
        limit = amal_limit(fx.system)
        assert ro_full.algebra.atom_count == limit.algebra.atom_count

    def test_class_budget_guard(self):
        fx = amalgamation_fixture(
            base_atoms=2, left_fiber_sizes=(3, 3), right_fiber_sizes=(3, 3)
        )
        with pytest.raises(BudgetError):
            build_D(fx.system, class_budget=64)


class TestAmalLimit:
    def test_product_case(self):
        fx = product_fixture()
        limit = amal_limit(fx.system)
        assert limit.algebra.atom_count == 4

    def test_lattice_with_maximum_reproduces_top(self):
        system = chain_system()
        limit = amal_limit(system)
        assert limit.algebra.atom_count == 4
        top_embedding = limit.level_embedding(2)
        # the top level maps isomorphically onto the limit
        assert all(img.atom_count() == 1 for img in top_embedding.images)

    def test_nontrivial_base_atom_count(self):
        # two levels of 4 atoms over a 2-atom base: per base atom 2x2 pairs
        fx = amalgamation_fixture(
            base_atoms=2, left_fiber_sizes=(2, 2), right_fiber_sizes=(2, 2)
        )
        limit = amal_limit(fx.system)
        assert limit.algebra.atom_count == 8

    def test_embeddability_exhaustive(self):
        fx = asymmetric_amalgamation_fixture()
        limit = amal_limit(fx.system)
        for k in range(fx.system.index.size):
            for chain in maximal_antichains(fx.system.algebras[k]):
                mapped = tuple(limit.level_embedding(k).apply(x) for x in chain)
                assert is_maximal_antichain(limit.algebra, mapped)

    def test_grid_systems(self):
        for xi, theta, atoms in [(1, 1, 4), (2, 1, 8), (2, 2, 16)]:
            system, _, _ = grid_coordinate_system(xi, theta)
            limit = amal_limit(system)
            assert limit.algebra.atom_count == atoms

    def test_extended_system_correct(self):
        for fx in (product_fixture(), asymmetric_amalgamation_fixture()):
            limit = amal_limit(fx.system)
            ext = extended_system(fx.system, limit)
            assert check_system_correct(ext).verdict
        system, _, _ = grid_coordinate_system(1, 1)
        ext = extended_system(system, amal_limit(system))
        assert check_system_correct(ext).verdict

    def test_nontrivial_bottom_rejected(self):
        idx = AlmostLattice.from_leq(2, [[True, True], [False, True]])
        two = FinBoolAlg(2)
        four = FinBoolAlg(4)
        system = AlgebraSystem(
            idx,
            (two, four),
            {(0, 1): Embedding(two, four, (four.from_atoms([0, 1]), four.from_atoms([2, 3])))},
        )
        with pytest.raises(InputError):
            Amalgam(system)


class TestConditionArithmetic:
    def setup_method(self):
        self.fx = asymmetric_amalgamation_fixture()
        self.limit = amal_limit(self.fx.system)
        self.ctx = self.limit.context
        self.dense = build_D(self.fx.system)

    def test_product_is_boolean_meet(self):
        conds = self.dense.conditions
        for c1 in conds[::5]:
            for c2 in conds[::7]:
                result = self.ctx.condition_product(c1, c2)
                meet = self.ctx.dense_element(c1) & self.ctx.dense_element(c2)
                if result is None:
                    assert meet.is_zero
                else:
                    assert self.ctx.dense_element(result) == meet

    def test_product_idempotent(self):
        for c in self.dense.conditions[::6]:
            back = self.ctx.condition_product(c, c)
            assert self.ctx.dense_element(back) == self.ctx.dense_element(c)

    def test_difference_is_boolean_difference(self):
        conds = self.dense.conditions
        for c1 in conds[::5]:
            for c2 in conds[::7]:
                parts = self.ctx.condition_difference(c1, c2)
                expect = self.ctx.dense_element(c1) - self.ctx.dense_element(c2)
                total = self.limit.algebra.zero
                for part in parts:
                    el = self.ctx.dense_element(part)
                    assert (total & el).is_zero  # pairwise incompatible
                    total = total | el
                assert total == expect

    def test_difference_with_self_empty(self):
        c = self.dense.conditions[0]
        assert self.ctx.condition_difference(c, c) == ()

    def test_canonicalize_keeps_class(self):
        ctx = self.ctx
        # conditions carried at sub-witnesses lift without changing the class
        base_level, left, right = 1, 2, 3
        for x in self.fx.system.algebras[base_level].nonzero_elements():
            c = AmalCondition(
                base_level,
                base_level,
                x,
                x,
            )
            lifted = ctx.canonicalize(c, ctx.i_hat, ctx.j_hat)
            assert ctx.dense_element(lifted) == ctx.dense_element(c)
            # uniqueness at the canonical witness
            again = ctx.canonicalize(lifted, ctx.i_hat, ctx.j_hat)
            assert again == lifted

    def test_same_witness_equivalent_means_equal(self):
        seen = {}
        for c in self.dense.conditions:
            el = self.ctx.dense_element(c).bits
            assert el not in seen, "distinct canonical conditions share a class"
            seen[el] = c

    def test_embedded_elements_agree_with_level_embeddings(self):
        ctx = self.ctx
        for level in range(self.fx.system.index.size):
            for x in self.fx.system.algebras[level].nonzero_elements():
                c = ctx.condition_from_level(level, x)
                assert ctx.dense_element(c) == self.limit.level_embedding(level).apply(x)

    def test_condition_with_product_in_a_level_collapses(self):
        # when both coordinates land in one level, the condition denotes the
        # same class as the embedded product of the coordinates there
        ctx = self.ctx
        system = self.fx.system
        left, base = 2, 1  # base sits in both parts, so (left, base) is a witness
        for p in system.algebras[left].nonzero_elements():
            q = system.project(left, base, p)  # matching forces q = h(p)
            c = AmalCondition(left, base, p, q)
            ctx.validate_condition(c)
            prod_in_level = p & system.embed(base, left, q)
            embedded = ctx.condition_from_level(left, prod_in_level)
            assert ctx.dense_element(c) == ctx.dense_element(embedded)


class TestQuotientPresentation:
    def test_product_case_quotient_is_other_factor(self):
        fx = product_fixture(2, 3)
        limit = amal_limit(fx.system)
        left = 2
        pres = quotient_presentation(limit, left, 0)
        assert pres.completion.algebra.atom_count == 3
        assert pres.factorization is not None
        assert pres.factorization.algebra.atom_count == limit.algebra.atom_count

    def test_lattice_with_max_quotient_is_relative_algebra(self):
        system = chain_system()
        limit = amal_limit(system)
        pres = quotient_presentation(limit, 1, 0)
        assert pres.completion.algebra.atom_count == 2

    def test_asymmetric_fixture_all_levels_and_atoms(self):
        fx = asymmetric_amalgamation_fixture()
        limit = amal_limit(fx.system)
        for level in (1, 2, 3):
            alg = fx.system.algebras[level]
            for g in range(alg.atom_count):
                pres = quotient_presentation(limit, level, g)
                view = quotient(limit.level_embedding(level), g)
                assert pres.completion.algebra.atom_count == view.algebra.atom_count

    def test_equivalence_characterizations(self):
        fx = asymmetric_amalgamation_fixture()
        limit = amal_limit(fx.system)
        total = 0
        for level in (2, 3):
            for g in range(fx.system.algebras[level].atom_count):
                total += quotient_equivalence_checks(limit, level, g)
        assert total > 0

    def test_quotient_order_matches_literal_filter_scan(self):
        from forcelab.amalgam import _QuotientBuilder

        fx = amalgamation_fixture(
            base_atoms=2, left_fiber_sizes=(2, 1), right_fiber_sizes=(1, 2)
        )
        limit = amal_limit(fx.system)
        builder = _QuotientBuilder(limit, 2)
        conds = [
            c for c in limit.context.canonical_conditions() if builder.member(c, 0)
        ]
        for c1 in conds:
            for c2 in conds:
                assert builder.quotient_leq(0, c2, c1) == builder.quotient_leq_literal(
                    0, c2, c1
                )

    def test_grid_fixture_quotients(self):
        system, _, _ = grid_coordinate_system(1, 1)
        limit = amal_limit(system)
        elems = grid_elements(1, 1, True)
        left = elems.index((0, 1))
        for g in range(system.algebras[left].atom_count):
            pres = quotient_presentation(limit, left, g)
            assert pres.completion.algebra.atom_count == 2
