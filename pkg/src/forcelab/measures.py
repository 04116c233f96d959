"""Finitely additive strictly positive measures with exact rational values.

All arithmetic is Fraction arithmetic: additivity and strict positivity are
equalities and inequalities of rationals, so nothing here carries a tolerance.
A measure on a finite algebra is a positive weight per atom summing to one; a
partial measure assigns weights on a dense (or merely generating) subset and
extends to the generated subalgebra by taking suprema over antichains.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Iterator, Mapping, Sequence

from .algebra import Element, FinBoolAlg, IterationName, TwoStep, bit_indices, two_step
from .errors import BudgetError, InputError

ZERO = Fraction(0)
ONE = Fraction(1)


@dataclass(frozen=True)
class Measure:
    """Strictly positive finitely additive measure: μ(𝟘)=0, μ(𝟙)=1,
    μ(a+b)=μ(a)+μ(b) for disjoint a,b, and μ(a)>0 off 𝟘."""

    algebra: FinBoolAlg
    weights: tuple[Fraction, ...]

    def __post_init__(self):
        if len(self.weights) != self.algebra.atom_count:
            raise InputError("need exactly one weight per atom")
        if any(w <= 0 for w in self.weights):
            raise InputError("weights must be strictly positive")
        if sum(self.weights) != 1:
            raise InputError("weights must sum to 1")

    def __call__(self, x: Element) -> Fraction:
        if x.algebra != self.algebra:
            raise InputError("element does not belong to the measured algebra")
        return sum((self.weights[k] for k in bit_indices(x.bits)), ZERO)


def uniform_measure(algebra: FinBoolAlg) -> Measure:
    w = Fraction(1, algebra.atom_count)
    return Measure(algebra, (w,) * algebra.atom_count)


def product_measure(
    algebra: FinBoolAlg, pairs: Sequence[tuple[int, int]], mu0: Measure, mu1: Measure
) -> Measure:
    """Measure on a binary product algebra given by coordinate weights."""
    weights = tuple(mu0.weights[x] * mu1.weights[y] for x, y in pairs)
    return Measure(algebra, weights)


# ---------------------------------------------------------------------------
# Partial measures on dense or generating subsets
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PartialMeasure:
    """Positive rational values on a set of nonzero elements containing 𝟙."""

    algebra: FinBoolAlg
    carrier: tuple[Element, ...]
    values: tuple[Fraction, ...]

    def __post_init__(self):
        if len(self.carrier) != len(self.values):
            raise InputError("carrier and values must have equal length")
        if len(set(x.bits for x in self.carrier)) != len(self.carrier):
            raise InputError("carrier contains duplicate elements")
        for x in self.carrier:
            if x.algebra != self.algebra:
                raise InputError("carrier element from a foreign algebra")
            if x.is_zero:
                raise InputError("carrier must consist of nonzero elements")
        if any(v <= 0 for v in self.values):
            raise InputError("partial measure values must be strictly positive")

    def value_map(self) -> dict[int, Fraction]:
        return {x.bits: v for x, v in zip(self.carrier, self.values)}


def _partitions_into(
    members: Sequence[int], target: int, limit: int = 200_000
) -> Iterator[tuple[int, ...]]:
    """All partitions of bitmask ``target`` into disjoint carrier members.

    Pivots on the lowest uncovered bit so each partition is produced once.
    """
    count = 0

    def rec(remaining: int, chosen: tuple[int, ...]) -> Iterator[tuple[int, ...]]:
        nonlocal count
        if remaining == 0:
            count += 1
            if count > limit:
                raise BudgetError("too many partitions to enumerate")
            yield chosen
            return
        low = remaining & -remaining
        for m in members:
            if m & low and m & ~remaining == 0:
                yield from rec(remaining & ~m, chosen + (m,))

    yield from rec(target, ())


def _decomposable(members: Sequence[int], target: int, memo: dict[int, bool]) -> bool:
    """Whether ``target`` is a disjoint union of carrier members."""
    if target == 0:
        return True
    if target in memo:
        return memo[target]
    low = target & -target
    result = False
    for m in members:
        if m & low and m & ~target == 0 and _decomposable(members, target & ~m, memo):
            result = True
            break
    memo[target] = result
    return result


class PartialMeasureVerdict:
    __slots__ = ("ok", "clause", "witness")

    def __init__(self, ok: bool, clause: str | None = None, witness: object = None):
        self.ok = ok
        self.clause = clause
        self.witness = witness

    def __bool__(self) -> bool:
        return self.ok


def check_partial_measure(pm: PartialMeasure) -> PartialMeasureVerdict:
    """Validate the four dense-extension clauses.

    (i) 𝟙 is in the carrier with value 1; (ii) the carrier is closed under
    nonzero products; (iii) differences of carrier elements decompose into
    disjoint carrier sums; (iv) the values are finitely additive on the
    carrier.
    """
    one = pm.algebra.one.bits
    vals = pm.value_map()
    if one not in vals:
        return PartialMeasureVerdict(False, "i", "unit not in carrier")
    if vals[one] != 1:
        return PartialMeasureVerdict(False, "i", "unit value is not 1")
    members = sorted(vals)
    for a in members:
        for b in members:
            prod = a & b
            if prod and prod not in vals:
                return PartialMeasureVerdict(
                    False, "ii", (pm.algebra.element(a), pm.algebra.element(b))
                )
    memo: dict[int, bool] = {}
    for a in members:
        for b in members:
            diff = a & ~b
            if not _decomposable(members, diff, memo):
                return PartialMeasureVerdict(
                    False, "iii", (pm.algebra.element(a), pm.algebra.element(b))
                )
    for target in members:
        for part in _partitions_into(members, target):
            total = sum((vals[m] for m in part), ZERO)
            if total != vals[target]:
                return PartialMeasureVerdict(
                    False,
                    "iv",
                    (pm.algebra.element(target), [pm.algebra.element(m) for m in part]),
                )
    return PartialMeasureVerdict(True)


@dataclass
class GeneratedMeasure:
    """The unique additive extension of a partial measure to the subalgebra
    generated by its carrier (the closure of the carrier under disjoint
    sums, together with 𝟘)."""

    algebra: FinBoolAlg
    members: frozenset[int]
    _values: dict[int, Fraction]

    def contains(self, x: Element) -> bool:
        return x.bits in self.members

    def value(self, x: Element) -> Fraction:
        if x.algebra != self.algebra:
            raise InputError("element from a foreign algebra")
        if x.bits not in self.members:
            raise InputError("element is outside the generated subalgebra")
        return self._values[x.bits]

    @property
    def is_total(self) -> bool:
        return len(self.members) == 1 << self.algebra.atom_count

    def to_measure(self) -> Measure:
        if not self.is_total:
            raise InputError("extension does not reach the full algebra")
        return Measure(
            self.algebra,
            tuple(self._values[1 << k] for k in range(self.algebra.atom_count)),
        )


def extend_from_dense(pm: PartialMeasure) -> GeneratedMeasure:
    """Extend a partial measure to the subalgebra its carrier generates.

    The extension value is the supremum (here: maximum) of carrier-antichain
    sums below each element; uniqueness on the generated subalgebra is checked
    through the complement identity.
    """
    verdict = check_partial_measure(pm)
    if not verdict:
        raise InputError(
            f"partial measure violates clause ({verdict.clause}); witness {verdict.witness!r}"
        )
    vals = pm.value_map()
    members = sorted(vals)

    # Generated subalgebra: closure of the carrier and 0 under disjoint sums.
    memo: dict[int, bool] = {}
    generated = {0}
    full = 1 << pm.algebra.atom_count
    if full > (1 << 22):
        raise BudgetError("ambient algebra too large for subalgebra enumeration")
    for bits in range(1, full):
        if _decomposable(members, bits, memo):
            generated.add(bits)

    best: dict[int, Fraction] = {0: ZERO}

    def antichain_max(mask: int) -> Fraction:
        if mask in best:
            return best[mask]
        low = mask & -mask
        # Either the lowest bit stays uncovered, or some member covers it.
        result = antichain_max(mask & ~low)
        for m in members:
            if m & low and m & ~mask == 0:
                cand = vals[m] + antichain_max(mask & ~m)
                if cand > result:
                    result = cand
        best[mask] = result
        return result

    values = {bits: antichain_max(bits) for bits in generated}

    # The generated set must be a Boolean algebra and the extension must be
    # additive and agree with the input; any alternative additive extension
    # would coincide by the complement identity.  Violations are bugs.
    for bits in generated:
        comp = (full - 1) & ~bits
        assert comp in generated, "generated set not closed under complements"
        assert values[bits] + values[comp] == 1, "extension misses complement identity"
    for bits, v in vals.items():
        assert values[bits] == v, "extension does not restrict to the input"

    return GeneratedMeasure(pm.algebra, frozenset(generated), values)


# ---------------------------------------------------------------------------
# One-element extension of a measure on a subalgebra
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Subalgebra:
    """A subalgebra of an ambient finite algebra, given by its atom blocks."""

    ambient: FinBoolAlg
    blocks: tuple[Element, ...]

    def __post_init__(self):
        union = 0
        for b in self.blocks:
            if b.algebra != self.ambient or b.is_zero:
                raise InputError("blocks must be nonzero ambient elements")
            if union & b.bits:
                raise InputError("blocks must be pairwise disjoint")
            union |= b.bits
        if union != self.ambient.one.bits:
            raise InputError("blocks must cover the ambient unit")

    def contains(self, x: Element) -> bool:
        return all(b.bits & ~x.bits == 0 or b.bits & x.bits == 0 for b in self.blocks)

    def elements(self) -> Iterator[Element]:
        for bits in range(1 << len(self.blocks)):
            acc = 0
            for k in bit_indices(bits):
                acc |= self.blocks[k].bits
            yield self.ambient.element(acc)


@dataclass(frozen=True)
class SubalgebraMeasure:
    subalgebra: Subalgebra
    block_weights: tuple[Fraction, ...]

    def __post_init__(self):
        if len(self.block_weights) != len(self.subalgebra.blocks):
            raise InputError("one weight per block required")
        if any(w <= 0 for w in self.block_weights):
            raise InputError("weights must be strictly positive")
        if sum(self.block_weights) != 1:
            raise InputError("weights must sum to 1")

    def value(self, x: Element) -> Fraction:
        if not self.subalgebra.contains(x):
            raise InputError("element is outside the subalgebra")
        total = ZERO
        for b, w in zip(self.subalgebra.blocks, self.block_weights):
            if b.bits & x.bits:
                total += w
        return total


def extend_one_element(mu: SubalgebraMeasure, b: Element) -> SubalgebraMeasure:
    """Extend a subalgebra measure by one new element.

    Uses the symmetric split: with μ̃(a·εb) the supremum of old values below
    a·εb (zero when nothing fits), the new value of a·εb is
    ½(μ(a) + μ̃(a·εb) − μ̃(a·(−εb))), and general elements decompose as
    a₀ + a₁·b + a₂·(−b).
    """
    sub = mu.subalgebra
    if b.algebra != sub.ambient:
        raise InputError("new element from a foreign algebra")
    if sub.contains(b):
        raise InputError("element already belongs to the subalgebra")

    def mu_tilde(part: Element) -> Fraction:
        # sup over subalgebra elements below `part`; the blocks are its atoms,
        # so the sup is the sum over blocks contained in `part`.
        total = ZERO
        for blk, w in zip(sub.blocks, mu.block_weights):
            if blk.bits & ~part.bits == 0:
                total += w
        return total

    def mu_prime_side(a: Element, side: Element) -> Fraction:
        return (mu.value(a) + mu_tilde(a & side) - mu_tilde(a & ~side)) / 2

    new_blocks: list[Element] = []
    new_weights: list[Fraction] = []
    for blk in sub.blocks:
        for side in (b, ~b):
            piece = blk & side
            if not piece.is_zero:
                new_blocks.append(piece)
                new_weights.append(mu_prime_side(blk, side))
    result = SubalgebraMeasure(Subalgebra(sub.ambient, tuple(new_blocks)), tuple(new_weights))

    # Identities forced by the construction; failures are bugs.
    for blk, w in zip(sub.blocks, mu.block_weights):
        assert result.value(blk) == w, "extension does not restrict to the input"
    return result


def mu_tilde_value(mu: SubalgebraMeasure, part: Element) -> Fraction:
    """Supremum of old subalgebra values below ``part`` (0 when none fit)."""
    total = ZERO
    for blk, w in zip(mu.subalgebra.blocks, mu.block_weights):
        if blk.bits & ~part.bits == 0:
            total += w
    return total


def mu_prime_value(mu: SubalgebraMeasure, a: Element, eps_b: Element) -> Fraction:
    """The one-element extension value of a·εb computed by the split formula."""
    return (mu.value(a) + mu_tilde_value(mu, a & eps_b) - mu_tilde_value(mu, a & ~eps_b)) / 2


# ---------------------------------------------------------------------------
# Names for reals, integrals, two-step measures
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RealName:
    """A name for a real in [0,1]: at finite scale, one value per atom."""

    algebra: FinBoolAlg
    values: tuple[Fraction, ...]

    def __post_init__(self):
        if len(self.values) != self.algebra.atom_count:
            raise InputError("one value per atom required")
        if any(v < 0 or v > 1 for v in self.values):
            raise InputError("values must lie in [0,1]")


def integral(mu: Measure, a: Element, x: RealName) -> Fraction:
    """∫_a x dμ = Σ over atoms t ≤ a of μ(t)·x(t)."""
    if a.algebra != mu.algebra or x.algebra != mu.algebra:
        raise InputError("integral arguments from mismatched algebras")
    total = ZERO
    for k in bit_indices(a.bits):
        total += mu.weights[k] * x.values[k]
    return total


def boolean_value_in_interval(
    x: RealName, lower: Fraction, upper: Fraction
) -> Element:
    """The element deciding lower < x <= upper."""
    bits = 0
    for k, v in enumerate(x.values):
        if lower < v <= upper:
            bits |= 1 << k
    return Element(x.algebra, bits)


def integral_lower_sum(mu: Measure, a: Element, x: RealName, m: int) -> Fraction:
    """Dyadic Riemann sum from below at resolution m."""
    total = ZERO
    step = Fraction(1, 1 << m)
    for k in range(1 << m):
        cell = boolean_value_in_interval(x, k * step, (k + 1) * step)
        total += mu(a & cell) * (k * step)
    return total


def integral_upper_sum(mu: Measure, a: Element, x: RealName, m: int) -> Fraction:
    """Dyadic Riemann sum from above at resolution m."""
    total = ZERO
    step = Fraction(1, 1 << m)
    for k in range(1 << m):
        cell = boolean_value_in_interval(x, k * step, (k + 1) * step)
        total += mu(a & cell) * ((k + 1) * step)
    return total


def two_step_measure(
    mu0: Measure,
    fiber_measures: Sequence[Measure],
    a0: Element,
    fiber_name: Sequence[Element],
) -> Fraction:
    """Iterated measure of a condition (a₀, ȧ₁): Σ_{t ≤ a₀} μ₀(t)·μ̇₁(t)(ȧ₁(t)).

    ``fiber_name`` gives, per base atom, an element of that atom's fiber.
    """
    if a0.algebra != mu0.algebra:
        raise InputError("condition base from a foreign algebra")
    if len(fiber_measures) != mu0.algebra.atom_count:
        raise InputError("one fiber measure per base atom required")
    if len(fiber_name) != mu0.algebra.atom_count:
        raise InputError("one fiber element per base atom required")
    total = ZERO
    for t in bit_indices(a0.bits):
        if fiber_name[t].algebra != fiber_measures[t].algebra:
            raise InputError(f"fiber name at atom {t} from a foreign algebra")
        total += mu0.weights[t] * fiber_measures[t](fiber_name[t])
    return total


def induced_two_step_measure(
    step: TwoStep, mu0: Measure, fiber_measures: Sequence[Measure]
) -> Measure:
    """The measure on a two-step algebra induced by base and fiber measures."""
    weights = tuple(
        mu0.weights[b] * fiber_measures[b].weights[f] for b, f in step.atom_pairs
    )
    return Measure(step.algebra, weights)


# ---------------------------------------------------------------------------
# Slaloms
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SlalomName:
    """A name for a width-bounded slalom on coordinates 1..N.

    ``entries[n-1][t]`` is the finite set the name takes at coordinate n on
    atom t; its size is bounded by ``width[n-1]``.
    """

    algebra: FinBoolAlg
    entries: tuple[tuple[frozenset[int], ...], ...]
    width: tuple[int, ...]

    def __post_init__(self):
        if len(self.entries) != len(self.width):
            raise InputError("one width bound per coordinate required")
        for n, row in enumerate(self.entries):
            if len(row) != self.algebra.atom_count:
                raise InputError("one entry per atom required")
            for s in row:
                if len(s) > self.width[n]:
                    raise InputError(
                        f"slalom entry of size {len(s)} exceeds width {self.width[n]}"
                    )

    @property
    def coordinates(self) -> int:
        return len(self.entries)

    def membership_element(self, n: int, k: int) -> Element:
        """The element deciding k ∈ φ(n); coordinates are 1-based."""
        row = self.entries[n - 1]
        bits = 0
        for t, s in enumerate(row):
            if k in s:
                bits |= 1 << t
        return Element(self.algebra, bits)


@dataclass(frozen=True)
class SlalomHull:
    """Ground hull ψ of a slalom name plus its verification payload."""

    psi: tuple[frozenset[int], ...]
    bound_ok: bool
    refutation_ok: bool
    detail: str


def slalom_hull(mu: Measure, name: SlalomName, check_values: Iterable[int] | None = None) -> SlalomHull:
    """Hull ψ(n) = {k : μ(⟦k ∈ φ(n)⟧) ≥ 1/n} with |ψ(n)| ≤ n·g(n).

    Coordinates are 1-based so the 1/n threshold is defined; a coordinate 0,
    if ever supplied, would use threshold 1.  For every value k outside ψ(n)
    and every condition p of measure ≥ 1/n, the part of p avoiding
    ⟦k ∈ φ(n)⟧ is nonzero, which is the refutation witness returned here.
    """
    if name.algebra != mu.algebra:
        raise InputError("slalom name from a foreign algebra")
    psi: list[frozenset[int]] = []
    universe: set[int] = set()
    for row in name.entries:
        for s in row:
            universe |= s
    if check_values is not None:
        universe |= set(check_values)
    universe.add(max(universe, default=0) + 1)  # a value no entry mentions
    bound_ok = True
    detail = []
    for n in range(1, name.coordinates + 1):
        threshold = Fraction(1, n)
        hull = frozenset(
            k for k in universe if mu(name.membership_element(n, k)) >= threshold
        )
        psi.append(hull)
        if len(hull) > n * name.width[n - 1]:
            bound_ok = False
            detail.append(f"coordinate {n}: hull size {len(hull)} > {n * name.width[n-1]}")

    refutation_ok = True
    for n in range(1, name.coordinates + 1):
        threshold = Fraction(1, n)
        for k in universe - psi[n - 1]:
            inside = name.membership_element(n, k)
            if mu(inside) >= threshold:
                refutation_ok = False  # pragma: no cover - contradicts the hull
                detail.append(f"coordinate {n}, value {k}: hull missed a heavy value")
                continue
            for p in mu.algebra.nonzero_elements():
                if mu(p) >= threshold and (p - inside).is_zero:
                    refutation_ok = False
                    detail.append(
                        f"coordinate {n}, value {k}: no refuting extension below {p!r}"
                    )
    return SlalomHull(tuple(psi), bound_ok, refutation_ok, "; ".join(detail))
