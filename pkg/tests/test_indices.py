import pytest

from forcelab.errors import InputError, VerificationError
from forcelab.indices import (
    AlmostLattice,
    adjoin_top,
    check_almost_lattice,
    decompose,
    extend_with_top,
    grid_elements,
    grid_index,
    is_distributive_lattice,
    is_nice,
    kernel_of,
    pure_pairs,
)


def three_element():
    """Minimum below two incomparable elements: {bottom, 0, 1}."""
    leq = [
        [True, True, True],
        [False, True, False],
        [False, False, True],
    ]
    return AlmostLattice.from_leq(3, leq, ("bot", "l", "r"))


def diamond():
    leq = [
        [True, True, True, True],
        [False, True, False, True],
        [False, False, True, True],
        [False, False, False, True],
    ]
    return AlmostLattice.from_leq(4, leq, ("bot", "l", "r", "top"))


class TestAxiomChecker:
    def test_three_element_accepted(self):
        lat = three_element()
        verdict = check_almost_lattice(lat.size, lat.leq, lat.meet, lat.join)
        assert verdict.ok

    def test_distributive_lattices_accepted(self):
        for lat in (diamond(), grid_index(2, 2, strict=False)):
            verdict = check_almost_lattice(lat.size, lat.leq, lat.meet, lat.join)
            assert verdict.ok

    def test_perturbed_join_table_caught(self):
        # diamond with the join of the two middle elements redirected to
        # one of them: the conditional join law fails
        lat = diamond()
        join = [list(row) for row in lat.join]
        join[1][2] = join[2][1] = 1
        verdict = check_almost_lattice(lat.size, lat.leq, lat.meet, join)
        assert not verdict.ok
        assert verdict.clause == "ii"

    def test_pentagon_rejected_at_construction(self):
        # pentagon order: bottom, a < c, b, top — not distributive
        leq = [
            [True, True, True, True, True],
            [False, True, True, False, True],
            [False, False, True, False, True],
            [False, False, False, True, True],
            [False, False, False, False, True],
        ]
        with pytest.raises(InputError):
            AlmostLattice.from_leq(5, leq)

    def test_conditional_join_law_violation_found(self):
        # elements: bot, c0 < c1, x, u0 = x∨c0, u1 = x∨c1, and j above c0
        # with no bound for {x, j}: then x∨(j∧c1) = u0 but x∨c1 = u1, so the
        # conditional join law fails while (i)-(iv) hold.
        names = ("bot", "c0", "c1", "x", "u0", "u1", "j")
        below = {
            "bot": set(),
            "c0": {"bot"},
            "c1": {"bot", "c0"},
            "x": {"bot"},
            "u0": {"bot", "c0", "x"},
            "u1": {"bot", "c0", "c1", "x", "u0"},
            "j": {"bot", "c0"},
        }
        leq = [
            [a == b or names[a] in below[names[b]] for b in range(7)]
            for a in range(7)
        ]
        leq = [[leq[a][b] for b in range(7)] for a in range(7)]

        def glb(i, j):
            lows = [k for k in range(7) if leq[k][i] and leq[k][j]]
            return next(g for g in lows if all(leq[k][g] for k in lows))

        def lub(i, j):
            ups = [k for k in range(7) if leq[i][k] and leq[j][k]]
            if not ups:
                return None
            return next(u for u in ups if all(leq[u][k] for k in ups))

        meet = [[glb(i, j) for j in range(7)] for i in range(7)]
        join = [[lub(i, j) for j in range(7)] for i in range(7)]
        verdict = check_almost_lattice(7, leq, meet, join)
        assert not verdict.ok
        assert verdict.clause == "v"
        assert verdict.witness is not None


class TestDecomposition:
    def test_lattice_decomposes_trivially(self):
        lat = diamond()
        d = decompose(lat)
        assert d.kernel == d.left == d.right == frozenset(range(4))

    def test_three_element_split(self):
        lat = three_element()
        d = decompose(lat)
        assert d.kernel == frozenset({0})
        assert {d.left, d.right} == {frozenset({0, 1}), frozenset({0, 2})}

    def test_grid_2_1(self):
        lat = grid_index(2, 1, strict=True)
        elems = grid_elements(2, 1, strict=True)
        d = decompose(lat)
        kernel = frozenset(elems.index(p) for p in [(0, 0), (1, 0)])
        left = frozenset(elems.index(p) for p in [(0, 0), (0, 1), (1, 0), (1, 1)])
        right = frozenset(elems.index(p) for p in [(0, 0), (1, 0), (2, 0)])
        assert d.kernel == kernel
        assert {d.left, d.right} == {left, right}

    def test_grid_2_2_kernel_size(self):
        lat = grid_index(2, 2, strict=True)
        assert lat.size == 8
        d = decompose(lat)
        assert len(d.kernel) == 4


class TestTopExtension:
    def test_three_element_becomes_diamond(self):
        ext = extend_with_top(three_element())
        assert ext.added
        assert ext.result.size == 4
        assert is_distributive_lattice(ext.result)
        assert ext.result.join[1][2] == ext.top

    def test_lattice_with_top_unchanged(self):
        ext = extend_with_top(diamond())
        assert not ext.added
        assert ext.result is diamond() or ext.result.size == 4
        assert ext.notice is not None

    def test_strict_grid_extends_to_grid_lattice(self):
        ext = extend_with_top(grid_index(1, 1, strict=True))
        assert ext.added
        full = grid_index(1, 1, strict=False)
        assert ext.result.leq == full.leq
        assert ext.result.join == full.join

    def test_extension_lattice_iff_conditional_laws(self):
        # mutating the join table of the three-element index to break (v)
        # must be caught before any extension is attempted
        lat = three_element()
        join = [list(row) for row in lat.join]
        join[0][1] = join[1][0] = 0  # join of comparable pair rewired
        with pytest.raises(InputError):
            AlmostLattice(lat.size, lat.leq, lat.meet, tuple(tuple(r) for r in join))


class TestNicenessAndPurePairs:
    def test_three_element_nice_and_fully_pure(self):
        lat = three_element()
        assert is_nice(lat)
        pure = pure_pairs(lat)
        expected = {(0, 0), (1, 1), (2, 2), (0, 1), (0, 2)}
        assert pure.pairs == frozenset(expected)

    def test_grid_pure_pairs_share_a_coordinate(self):
        for xi, theta, strict in [(1, 1, False), (2, 1, True), (2, 2, True)]:
            lat = grid_index(xi, theta, strict)
            elems = grid_elements(xi, theta, strict)
            pure = pure_pairs(lat)
            expected = frozenset(
                (i, j)
                for i, a in enumerate(elems)
                for j, b in enumerate(elems)
                if lat.le(i, j) and (a[0] == b[0] or a[1] == b[1])
            )
            assert pure.pairs == expected

    def test_grids_are_nice(self):
        for xi, theta in [(1, 1), (2, 1), (1, 2), (2, 2), (3, 2)]:
            assert is_nice(grid_index(xi, theta, strict=True))

    def test_axis_grids_have_trivial_pure_sets(self):
        lat = grid_index(3, 0, strict=True)
        pure = pure_pairs(lat)
        assert pure.pairs == frozenset((i, i) for i in range(lat.size))

    def test_top_extension_pure_bookkeeping(self):
        # new pure pairs are exactly the non-kernel levels paired with the top
        for base in (three_element(), grid_index(2, 1, strict=True), grid_index(2, 2, strict=True)):
            ker = kernel_of(base)
            ext = extend_with_top(base)
            before = pure_pairs(base).pairs
            after = pure_pairs(ext.result).pairs
            expected = set(before)
            expected.add((ext.top, ext.top))
            for i in range(base.size):
                if i not in ker:
                    expected.add((i, ext.top))
            assert after == frozenset(expected)

    def test_pure_pairs_idempotent_and_monotone(self):
        strict = grid_index(1, 1, strict=True)
        full = grid_index(1, 1, strict=False)
        elems_strict = grid_elements(1, 1, True)
        elems_full = grid_elements(1, 1, False)
        inject = {i: elems_full.index(p) for i, p in enumerate(elems_strict)}
        pure_strict = pure_pairs(strict).pairs
        pure_full = pure_pairs(full).pairs
        mapped = {(inject[i], inject[j]) for i, j in pure_strict}
        assert mapped <= pure_full
        # idempotence: recomputing from the computed set changes nothing
        assert pure_pairs(strict).pairs == pure_strict


class TestGridIndex:
    def test_sizes(self):
        assert grid_index(1, 1, strict=False).size == 4
        assert grid_index(1, 1, strict=True).size == 3
        assert grid_index(2, 2, strict=True).size == 8

    def test_strict_corner_not_joinable(self):
        lat = grid_index(1, 1, strict=True)
        elems = grid_elements(1, 1, True)
        l = elems.index((0, 1))
        r = elems.index((1, 0))
        assert lat.join[l][r] is None

    def test_full_grid_is_distributive_lattice(self):
        assert is_distributive_lattice(grid_index(2, 2, strict=False))

    def test_empty_strict_grid_rejected(self):
        with pytest.raises(InputError):
            grid_index(0, 0, strict=True)

    def test_adjoin_top_always_adds(self):
        lat = diamond()
        ext = adjoin_top(lat)
        assert ext.result.size == 5
        assert ext.result.maximum() == ext.top
