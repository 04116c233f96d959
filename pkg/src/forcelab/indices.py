"""Distributive almost-lattices: axioms, decomposition, niceness, pure pairs,
and the rectangular grid families.

An almost-lattice has all binary meets, joins for bounded pairs, the
two-out-of-three upper-bound property, and conditional distributive laws.  Its
index set splits into a kernel (elements that join with everything) and left
and right parts; cross-side non-kernel pairs never join.  Adding a fresh top
turns it into a distributive lattice exactly when the two conditional laws
hold, which is what the axiom checker certifies.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, product as iter_product
from typing import Iterable, Iterator, Sequence

from .errors import InputError, VerificationError


class AlmostLatticeVerdict:
    """Outcome of the axiom check; carries the first violated clause."""

    __slots__ = ("ok", "clause", "witness")

    def __init__(self, ok: bool, clause: str | None = None, witness: object = None):
        self.ok = ok
        self.clause = clause
        self.witness = witness

    def __bool__(self) -> bool:
        return self.ok

    def __repr__(self) -> str:
        if self.ok:
            return "almost-lattice"
        return f"violates ({self.clause}) at {self.witness!r}"


def _leq_matrix(size: int, leq: Sequence[Sequence[bool]]) -> list[list[bool]]:
    if len(leq) != size or any(len(row) != size for row in leq):
        raise InputError("order matrix has the wrong shape")
    m = [[bool(v) for v in row] for row in leq]
    for i in range(size):
        if not m[i][i]:
            raise InputError(f"order not reflexive at {i}")
        for j in range(size):
            if m[i][j] and m[j][i] and i != j:
                raise InputError(f"order not antisymmetric at ({i},{j})")
            if m[i][j]:
                for k in range(size):
                    if m[j][k] and not m[i][k]:
                        raise InputError(f"order not transitive at ({i},{j},{k})")
    return m


def check_almost_lattice(
    size: int,
    leq: Sequence[Sequence[bool]],
    meet: Sequence[Sequence[int]],
    join: Sequence[Sequence[int | None]],
) -> AlmostLatticeVerdict:
    """Validate the six almost-lattice clauses against explicit tables.

    Clauses: (i) the meet table gives greatest lower bounds; (ii) the join
    table gives least upper bounds exactly for bounded pairs; (iii) among any
    three elements two have an upper bound; (iv) both distributive laws hold
    whenever both sides exist; (v) the conditional join law; (vi) the
    degenerate meet-join law for unbounded pairs.
    """
    try:
        m = _leq_matrix(size, leq)
    except InputError as exc:
        return AlmostLatticeVerdict(False, "order", str(exc))

    def lower(i: int, j: int) -> list[int]:
        return [k for k in range(size) if m[k][i] and m[k][j]]

    def upper(i: int, j: int) -> list[int]:
        return [k for k in range(size) if m[i][k] and m[j][k]]

    for i in range(size):
        for j in range(size):
            g = meet[i][j]
            if not (0 <= g < size):
                return AlmostLatticeVerdict(False, "i", (i, j))
            lows = lower(i, j)
            if g not in lows or any(not m[k][g] for k in lows):
                return AlmostLatticeVerdict(False, "i", (i, j))
            ups = upper(i, j)
            u = join[i][j]
            if ups:
                if u is None or u not in ups or any(not m[u][k] for k in ups):
                    return AlmostLatticeVerdict(False, "ii", (i, j))
            elif u is not None:
                return AlmostLatticeVerdict(False, "ii", (i, j))

    for i0, i1, i2 in combinations(range(size), 3):
        pairs = [(i0, i1), (i0, i2), (i1, i2)]
        if all(join[a][b] is None for a, b in pairs):
            return AlmostLatticeVerdict(False, "iii", (i0, i1, i2))

    for i, j, k in iter_product(range(size), repeat=3):
        # i ∨ (j ∧ k) = (i ∨ j) ∧ (i ∨ k) when both sides exist
        lhs = join[i][meet[j][k]]
        if join[i][j] is not None and join[i][k] is not None:
            rhs = meet[join[i][j]][join[i][k]]
            if lhs is not None and lhs != rhs:
                return AlmostLatticeVerdict(False, "iv", ("join-law", i, j, k))
        # i ∧ (j ∨ k) = (i ∧ j) ∨ (i ∧ k) when both sides exist
        if join[j][k] is not None:
            lhs2 = meet[i][join[j][k]]
            rhs2 = join[meet[i][j]][meet[i][k]]
            if rhs2 is not None and lhs2 != rhs2:
                return AlmostLatticeVerdict(False, "iv", ("meet-law", i, j, k))

    for i, j in iter_product(range(size), repeat=2):
        if join[i][j] is not None:
            continue
        for jp in range(size):
            a = join[i][jp]
            b = join[i][meet[j][jp]]
            if a is None and b is None:
                continue
            if a is not None and b is not None and a == b:
                continue
            return AlmostLatticeVerdict(False, "v", (i, j, jp))

    for j, jp in iter_product(range(size), repeat=2):
        if join[j][jp] is not None:
            continue
        for i in range(size):
            u = join[meet[i][j]][meet[i][jp]]
            if u != i:
                return AlmostLatticeVerdict(False, "vi", (i, j, jp))

    return AlmostLatticeVerdict(True)


@dataclass(frozen=True)
class AlmostLattice:
    """A validated distributive almost-lattice with explicit tables."""

    size: int
    leq: tuple[tuple[bool, ...], ...]
    meet: tuple[tuple[int, ...], ...]
    join: tuple[tuple[int | None, ...], ...]
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        verdict = check_almost_lattice(self.size, self.leq, self.meet, self.join)
        if not verdict:
            raise InputError(f"not a distributive almost-lattice: {verdict}")
        if self.labels is not None and len(self.labels) != self.size:
            raise InputError("label count mismatch")

    @classmethod
    def from_leq(
        cls,
        size: int,
        leq: Sequence[Sequence[bool]],
        labels: tuple[str, ...] | None = None,
    ) -> "AlmostLattice":
        """Derive meet/join tables from an order matrix."""
        m = _leq_matrix(size, leq)

        def glb(i: int, j: int) -> int:
            lows = [k for k in range(size) if m[k][i] and m[k][j]]
            greatest = [g for g in lows if all(m[k][g] for k in lows)]
            if len(greatest) != 1:
                raise InputError(f"pair ({i},{j}) lacks a greatest lower bound")
            return greatest[0]

        def lub(i: int, j: int) -> int | None:
            ups = [k for k in range(size) if m[i][k] and m[j][k]]
            if not ups:
                return None
            least = [u for u in ups if all(m[u][k] for k in ups)]
            if len(least) != 1:
                raise InputError(f"bounded pair ({i},{j}) lacks a least upper bound")
            return least[0]

        meet = tuple(tuple(glb(i, j) for j in range(size)) for i in range(size))
        join = tuple(tuple(lub(i, j) for j in range(size)) for i in range(size))
        frozen = tuple(tuple(row) for row in m)
        return cls(size, frozen, meet, join, labels)

    def le(self, i: int, j: int) -> bool:
        return self.leq[i][j]

    def lt(self, i: int, j: int) -> bool:
        return self.leq[i][j] and i != j

    def comparable(self, i: int, j: int) -> bool:
        return self.leq[i][j] or self.leq[j][i]

    def joinable(self, i: int, j: int) -> bool:
        return self.join[i][j] is not None

    def minimum(self) -> int:
        lows = [i for i in range(self.size) if all(self.leq[i][j] for j in range(self.size))]
        if len(lows) != 1:
            raise InputError("almost-lattice has no minimum")  # pragma: no cover
        return lows[0]

    def maximum(self) -> int | None:
        tops = [i for i in range(self.size) if all(self.leq[j][i] for j in range(self.size))]
        return tops[0] if tops else None

    def label(self, i: int) -> str:
        return self.labels[i] if self.labels is not None else str(i)

    def comparable_pairs(self) -> Iterator[tuple[int, int]]:
        """All strictly comparable pairs (i, j) with i < j in the order."""
        for i in range(self.size):
            for j in range(self.size):
                if i != j and self.leq[i][j]:
                    yield (i, j)

    def is_lattice(self) -> bool:
        return all(
            self.join[i][j] is not None
            for i in range(self.size)
            for j in range(self.size)
        )


def is_distributive_lattice(lat: AlmostLattice) -> bool:
    """Full lattice check: every join exists and both laws hold everywhere."""
    if not lat.is_lattice():
        return False
    for i, j, k in iter_product(range(lat.size), repeat=3):
        if lat.join[i][lat.meet[j][k]] != lat.meet[lat.join[i][j]][lat.join[i][k]]:
            return False
        if lat.meet[i][lat.join[j][k]] != lat.join[lat.meet[i][j]][lat.meet[i][k]]:
            return False
    return True


# ---------------------------------------------------------------------------
# Kernel / left / right decomposition
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Decomposition:
    kernel: frozenset[int]
    left: frozenset[int]
    right: frozenset[int]


def kernel_of(lat: AlmostLattice) -> frozenset[int]:
    return frozenset(
        i
        for i in range(lat.size)
        if all(lat.joinable(i, j) for j in range(lat.size))
    )


def decompose(lat: AlmostLattice) -> Decomposition:
    """Split the index into kernel, left, and right parts.

    The split depends on a choice of a non-kernel pivot; the least non-kernel
    element (in enumeration order) is used, making the result deterministic up
    to the left/right naming swap.
    """
    ker = kernel_of(lat)
    if len(ker) == lat.size:
        everything = frozenset(range(lat.size))
        d = Decomposition(ker, everything, everything)
    else:
        i0 = min(i for i in range(lat.size) if i not in ker)
        left = frozenset(j for j in range(lat.size) if lat.joinable(i0, j))
        j0 = min(j for j in range(lat.size) if not lat.joinable(i0, j))
        right = frozenset(k for k in range(lat.size) if lat.joinable(j0, k))
        d = Decomposition(ker, left, right)
    verify_decomposition(lat, d)
    return d


def verify_decomposition(lat: AlmostLattice, d: Decomposition) -> None:
    """Re-verify the six structural clauses; failure is a bug trap."""
    for i in range(lat.size):
        member = all(lat.joinable(i, j) for j in range(lat.size))
        if member != (i in d.kernel):
            raise VerificationError("kernel mischaracterized", i)
    for part in (d.left, d.right):
        for i in part:
            for j in range(lat.size):
                if lat.le(j, i) and j not in part:
                    raise VerificationError("part not downward closed", (i, j))
        for i in part:
            for j in part:
                u = lat.join[i][j]
                if u is None or u not in part:
                    raise VerificationError("part not closed under joins", (i, j))
    if d.left | d.right != frozenset(range(lat.size)):
        raise VerificationError("parts do not cover the index", None)
    if d.left & d.right != d.kernel:
        raise VerificationError("kernel is not the intersection of the parts", None)
    lonely_left = d.left - d.kernel
    lonely_right = d.right - d.kernel
    if bool(lonely_left) != bool(lonely_right):
        raise VerificationError("one-sided non-kernel part", None)
    for i in lonely_left:
        for j in lonely_right:
            if lat.joinable(i, j):
                raise VerificationError("cross-side non-kernel pair joins", (i, j))
    for i in d.left:
        for j in d.right:
            if lat.meet[i][j] not in d.kernel:
                raise VerificationError("cross-side meet escapes the kernel", (i, j))


# ---------------------------------------------------------------------------
# Top extension
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TopExtension:
    result: AlmostLattice
    added: bool
    top: int
    notice: str | None = None


def adjoin_top(lat: AlmostLattice, label: str = "top") -> TopExtension:
    """Adjoin a fresh top element above everything (unconditionally)."""
    n = lat.size
    leq = [list(row) + [True] for row in lat.leq]
    leq.append([False] * n + [True])
    meet = [list(row) + [i] for i, row in enumerate(lat.meet)]
    meet.append(list(range(n)) + [n])
    join = [
        [lat.join[i][j] if lat.join[i][j] is not None else n for j in range(n)] + [n]
        for i in range(n)
    ]
    join.append([n] * (n + 1))
    labels = None
    if lat.labels is not None:
        labels = lat.labels + (label,)
    new = AlmostLattice(
        n + 1,
        tuple(tuple(row) for row in leq),
        tuple(tuple(row) for row in meet),
        tuple(tuple(row) for row in join),
        labels,
    )
    return TopExtension(new, True, n)


def extend_with_top(lat: AlmostLattice) -> TopExtension:
    """Complete a top-less almost-lattice to a lattice by adding a top.

    An almost-lattice that already has a maximum is returned unchanged with a
    notice.  The result of a genuine extension is a distributive lattice, and
    joins equal the new top exactly for previously join-less pairs.
    """
    existing = lat.maximum()
    if existing is not None:
        return TopExtension(lat, False, existing, "index already has a maximum")
    ext = adjoin_top(lat)
    if not is_distributive_lattice(ext.result):
        raise VerificationError("top extension failed to be a distributive lattice", None)
    return ext


# ---------------------------------------------------------------------------
# Niceness and pure pairs
# ---------------------------------------------------------------------------


def is_nice(lat: AlmostLattice) -> bool:
    """Whether every comparable non-kernel pair i < i' splits as i' = i ∨ j
    with j incomparable to i."""
    ker = kernel_of(lat)
    for i in range(lat.size):
        for ip in range(lat.size):
            if i in ker or ip in ker or not lat.lt(i, ip):
                continue
            if not any(
                not lat.comparable(i, j) and lat.join[i][j] == ip
                for j in range(lat.size)
            ):
                return False
    return True


@dataclass(frozen=True)
class PurePairSet:
    """The least set of comparable pairs closed under the purity clauses."""

    pairs: frozenset[tuple[int, int]]

    def __contains__(self, pair: tuple[int, int]) -> bool:
        return pair in self.pairs

    def __iter__(self) -> Iterator[tuple[int, int]]:
        return iter(sorted(self.pairs))

    def __len__(self) -> int:
        return len(self.pairs)


def pure_pairs(lat: AlmostLattice) -> PurePairSet:
    """Least fixed point of: (a) all diagonal pairs; (b) for incomparable i,j
    the pairs (i∧j,i), (i∧j,j) and, when i∨j exists, (i,i∨j), (j,i∨j);
    (c) subintervals of pure pairs are pure."""
    pure: set[tuple[int, int]] = set()
    for i in range(lat.size):
        pure.add((i, i))
    for i in range(lat.size):
        for j in range(lat.size):
            if lat.comparable(i, j):
                continue
            g = lat.meet[i][j]
            pure.add((g, i))
            pure.add((g, j))
            u = lat.join[i][j]
            if u is not None:
                pure.add((i, u))
                pure.add((j, u))
    changed = True
    while changed:
        changed = False
        for (i, k) in list(pure):
            for j in range(lat.size):
                if not (lat.le(i, j) and lat.le(j, k)):
                    continue
                for jp in range(lat.size):
                    if lat.le(j, jp) and lat.le(jp, k) and (j, jp) not in pure:
                        pure.add((j, jp))
                        changed = True
    return PurePairSet(frozenset(pure))


# ---------------------------------------------------------------------------
# Grid index families
# ---------------------------------------------------------------------------


def grid_elements(xi: int, theta: int, strict: bool) -> tuple[tuple[int, int], ...]:
    """Pairs (ζ,η) ≤ (ξ,θ), excluding (ξ,θ) itself in the strict family."""
    out = [
        (z, e)
        for z in range(xi + 1)
        for e in range(theta + 1)
        if not (strict and z == xi and e == theta)
    ]
    return tuple(out)


def grid_index(xi: int, theta: int, strict: bool = True) -> AlmostLattice:
    """The rectangle below (ξ,θ) under the coordinatewise order.

    With ``strict`` the corner itself is removed, which yields a nice
    distributive almost-lattice whenever ξ,θ > 0; otherwise the full rectangle
    is a distributive lattice.
    """
    if xi < 0 or theta < 0:
        raise InputError("grid dimensions must be nonnegative")
    if strict and xi == 0 and theta == 0:
        raise InputError("the strict grid below (0,0) is empty")
    elems = grid_elements(xi, theta, strict)
    labels = tuple(f"({z},{e})" for z, e in elems)
    leq = [
        [a[0] <= b[0] and a[1] <= b[1] for b in elems]
        for a in elems
    ]
    return AlmostLattice.from_leq(len(elems), leq, labels)


def grid_position(xi: int, theta: int, strict: bool, pair: tuple[int, int]) -> int:
    return grid_elements(xi, theta, strict).index(pair)
