"""Finite distributive lattices built as products of chains.

Points are addressed by mixed-radix rank with coordinate 0 least
significant, so a table of weights or values is a flat tuple indexed by rank.
All arithmetic is exact (``fractions.Fraction``); nothing here rounds.
"""
from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Callable, Dict, FrozenSet, Iterable, Iterator, List, Optional, Sequence, Tuple, Union

from django.conf import settings

from .errors import (
    CapExceededError,
    FkgError,
    HypothesisError,
    NormalizationError,
    ShapeMismatchError,
    SupportError,
)

logger = logging.getLogger(__name__)

MAX_LATTICE_SIZE = getattr(settings, 'FKG_MAX_LATTICE_SIZE', 65536)

RationalLike = Union[Fraction, int, str]
CoordSubset = FrozenSet[int]
# (coefficient, blocks of 0-based function indices)
Term = Tuple[int, Tuple[Tuple[int, ...], ...]]

# κ'_3 = 2E(f1f2f3) - [E(f1f2)E(f3) + E(f1f3)E(f2) + E(f2f3)E(f1)] + E(f1)E(f2)E(f3)
THIRD_ORDER_TERMS: Tuple[Term, ...] = (
    (2, ((0, 1, 2),)),
    (-1, ((0, 1), (2,))),
    (-1, ((0, 2), (1,))),
    (-1, ((1, 2), (0,))),
    (1, ((0,), (1,), (2,))),
)


def to_fraction(value: RationalLike) -> Fraction:
    if isinstance(value, Fraction):
        return value
    return Fraction(value)


@dataclass(frozen=True)
class LatticeShape:
    """Product of chains ``0 < 1 < ... < k-1``; ``(2,)*n`` is the Boolean lattice 2^A.

    The empty shape is the one-point lattice; it only arises as the
    marginal onto the empty coordinate set.
    """

    chain_lengths: Tuple[int, ...]

    def __post_init__(self):
        lengths = tuple(int(k) for k in self.chain_lengths)
        object.__setattr__(self, 'chain_lengths', lengths)
        for index, k in enumerate(lengths):
            if k < 2:
                raise FkgError(f"chain_lengths[{index}]: chain length {k} is below 2")
        size = math.prod(lengths)
        if size > MAX_LATTICE_SIZE:
            raise CapExceededError(
                f"lattice of size {size} exceeds FKG_MAX_LATTICE_SIZE={MAX_LATTICE_SIZE}"
            )

    @classmethod
    def boolean(cls, n: int) -> 'LatticeShape':
        return cls((2,) * n)

    @classmethod
    def one_point(cls) -> 'LatticeShape':
        return cls(())

    @property
    def n(self) -> int:
        return len(self.chain_lengths)

    @cached_property
    def size(self) -> int:
        return math.prod(self.chain_lengths)

    @cached_property
    def strides(self) -> Tuple[int, ...]:
        strides = []
        step = 1
        for k in self.chain_lengths:
            strides.append(step)
            step *= k
        return tuple(strides)

    @cached_property
    def coords_table(self) -> Tuple[Tuple[int, ...], ...]:
        """Coordinates of every point, in rank order."""
        ranges = [range(k) for k in reversed(self.chain_lengths)]
        return tuple(coords[::-1] for coords in itertools.product(*ranges))

    def rank(self, coords: Sequence[int]) -> int:
        return sum(c * s for c, s in zip(coords, self.strides))

    def point(self, coords: Sequence[int]) -> 'LatticePoint':
        return LatticePoint(self, tuple(coords))

    def points(self) -> Iterator['LatticePoint']:
        for coords in self.coords_table:
            yield LatticePoint(self, coords)

    def covers(self) -> Iterator[Tuple[int, int]]:
        """Covering pairs ``(lower_rank, upper_rank)``."""
        for rank, coords in enumerate(self.coords_table):
            for axis, c in enumerate(coords):
                if c + 1 < self.chain_lengths[axis]:
                    yield rank, rank + self.strides[axis]

    def precedes(self, r: int, s: int) -> bool:
        return all(a <= b for a, b in zip(self.coords_table[r], self.coords_table[s]))

    def join_rank(self, r: int, s: int) -> int:
        return sum(max(a, b) * st for a, b, st in zip(self.coords_table[r], self.coords_table[s], self.strides))

    def meet_rank(self, r: int, s: int) -> int:
        return sum(min(a, b) * st for a, b, st in zip(self.coords_table[r], self.coords_table[s], self.strides))

    def coord_subset(self, indices: Iterable[int]) -> CoordSubset:
        subset = frozenset(int(i) for i in indices)
        for i in subset:
            if not 0 <= i < self.n:
                raise ShapeMismatchError(f"coordinate {i} is outside 0..{self.n - 1}")
        return subset

    def all_coord_subsets(self) -> List[CoordSubset]:
        return [
            frozenset(combo)
            for size in range(self.n + 1)
            for combo in itertools.combinations(range(self.n), size)
        ]

    def sub_shape(self, subset: CoordSubset) -> 'LatticeShape':
        return LatticeShape(tuple(self.chain_lengths[i] for i in sorted(subset)))

    def projection(self, subset: CoordSubset) -> Tuple[int, ...]:
        """Rank of each point's restriction to ``subset``, indexed by rank."""
        axes = sorted(subset)
        sub = self.sub_shape(subset)
        return tuple(
            sub.rank([coords[i] for i in axes])
            for coords in self.coords_table
        )


@dataclass(frozen=True)
class LatticePoint:
    shape: LatticeShape
    coords: Tuple[int, ...]

    def __post_init__(self):
        coords = tuple(int(c) for c in self.coords)
        object.__setattr__(self, 'coords', coords)
        if len(coords) != self.shape.n:
            raise ShapeMismatchError(
                f"point has {len(coords)} coordinates, shape has {self.shape.n}"
            )
        for index, (c, k) in enumerate(zip(coords, self.shape.chain_lengths)):
            if not 0 <= c < k:
                raise FkgError(f"coords[{index}]: {c} is outside 0..{k - 1}")

    @property
    def rank(self) -> int:
        return self.shape.rank(self.coords)

    def __le__(self, other: 'LatticePoint') -> bool:
        return all(a <= b for a, b in zip(self.coords, other.coords))


def join_meet(p: LatticePoint, q: LatticePoint) -> Tuple[LatticePoint, LatticePoint]:
    if p.shape != q.shape:
        raise ShapeMismatchError(
            f"cannot combine points of shapes {p.shape.chain_lengths} and {q.shape.chain_lengths}"
        )
    join = tuple(max(a, b) for a, b in zip(p.coords, q.coords))
    meet = tuple(min(a, b) for a, b in zip(p.coords, q.coords))
    return LatticePoint(p.shape, join), LatticePoint(p.shape, meet)


@dataclass(frozen=True)
class LatticeMeasure:
    shape: LatticeShape
    weights: Tuple[Fraction, ...]

    def __post_init__(self):
        weights = tuple(to_fraction(w) for w in self.weights)
        object.__setattr__(self, 'weights', weights)
        if len(weights) != self.shape.size:
            raise ShapeMismatchError(
                f"measure has {len(weights)} weights, shape needs {self.shape.size}"
            )
        for index, w in enumerate(weights):
            if w < 0:
                raise FkgError(f"weights[{index}]: negative weight '{w}'")

    @classmethod
    def uniform(cls, shape: LatticeShape) -> 'LatticeMeasure':
        return cls(shape, (Fraction(1, shape.size),) * shape.size)

    @classmethod
    def from_callable(cls, shape: LatticeShape, weight: Callable[[Tuple[int, ...]], RationalLike]) -> 'LatticeMeasure':
        return cls(shape, tuple(to_fraction(weight(coords)) for coords in shape.coords_table))

    @cached_property
    def total(self) -> Fraction:
        return sum(self.weights, Fraction(0))

    @property
    def is_normalized(self) -> bool:
        return self.total == 1

    def normalized(self) -> 'LatticeMeasure':
        if self.total == 0:
            raise NormalizationError("measure has zero total mass")
        if self.is_normalized:
            return self
        return LatticeMeasure(self.shape, tuple(w / self.total for w in self.weights))

    def require_normalized(self) -> None:
        if not self.is_normalized:
            raise NormalizationError(f"measure total is {self.total}, expected 1")

    @cached_property
    def support(self) -> Tuple[int, ...]:
        return tuple(rank for rank, w in enumerate(self.weights) if w > 0)

    def weight(self, point: LatticePoint) -> Fraction:
        return self.weights[point.rank]


@dataclass(frozen=True)
class LatticeFunction:
    """Exact values on a shape. ``None`` marks points outside a conditioning support."""

    shape: LatticeShape
    values: Tuple[Optional[Fraction], ...]

    def __post_init__(self):
        values = tuple(None if v is None else to_fraction(v) for v in self.values)
        object.__setattr__(self, 'values', values)
        if len(values) != self.shape.size:
            raise ShapeMismatchError(
                f"function has {len(values)} values, shape needs {self.shape.size}"
            )

    @classmethod
    def constant(cls, shape: LatticeShape, value: RationalLike) -> 'LatticeFunction':
        return cls(shape, (to_fraction(value),) * shape.size)

    @classmethod
    def from_callable(cls, shape: LatticeShape, fn: Callable[[Tuple[int, ...]], RationalLike]) -> 'LatticeFunction':
        return cls(shape, tuple(to_fraction(fn(coords)) for coords in shape.coords_table))

    @classmethod
    def northeast_indicator(cls, shape: LatticeShape, thresholds: Sequence[int]) -> 'LatticeFunction':
        """Indicator of ``{x : x_j >= thresholds[j] for all j}``."""
        return cls.from_callable(
            shape, lambda coords: int(all(c >= t for c, t in zip(coords, thresholds)))
        )

    @property
    def is_total(self) -> bool:
        return all(v is not None for v in self.values)

    def value_at_rank(self, rank: int) -> Fraction:
        value = self.values[rank]
        if value is None:
            raise SupportError(
                f"function is undefined at {self.shape.coords_table[rank]} (outside the support)"
            )
        return value

    def __call__(self, point: Union[LatticePoint, Sequence[int]]) -> Fraction:
        coords = point.coords if isinstance(point, LatticePoint) else tuple(point)
        return self.value_at_rank(self.shape.rank(coords))

    def defined_values(self) -> List[Fraction]:
        return [v for v in self.values if v is not None]

    @property
    def min_value(self) -> Fraction:
        return min(self.defined_values())

    def is_nonnegative(self) -> bool:
        return all(v >= 0 for v in self.defined_values())

    def __mul__(self, other: 'LatticeFunction') -> 'LatticeFunction':
        _require_same_shape(self.shape, other.shape)
        return LatticeFunction(self.shape, tuple(
            None if a is None or b is None else a * b
            for a, b in zip(self.values, other.values)
        ))

    def shifted(self, offset: RationalLike) -> 'LatticeFunction':
        offset = to_fraction(offset)
        return LatticeFunction(self.shape, tuple(None if v is None else v - offset for v in self.values))

    def complement(self) -> 'LatticeFunction':
        """``1 - f``."""
        return LatticeFunction(self.shape, tuple(None if v is None else 1 - v for v in self.values))


def _require_same_shape(*shapes: LatticeShape) -> None:
    first = shapes[0]
    for other in shapes[1:]:
        if other != first:
            raise ShapeMismatchError(
                f"shape mismatch: {first.chain_lengths} vs {other.chain_lengths}"
            )


def product_function(functions: Sequence[LatticeFunction]) -> LatticeFunction:
    result = functions[0]
    for f in functions[1:]:
        result = result * f
    return result


def is_increasing(f: LatticeFunction) -> bool:
    shape = f.shape
    if f.is_total:
        return all(f.values[r] <= f.values[s] for r, s in shape.covers())
    # On a partial support covers do not chain, so compare every comparable pair.
    defined = [r for r, v in enumerate(f.values) if v is not None]
    for r, s in itertools.permutations(defined, 2):
        if shape.precedes(r, s) and f.values[r] > f.values[s]:
            return False
    return True


def mtp2_violation(mu: LatticeMeasure) -> Optional[Tuple[LatticePoint, LatticePoint]]:
    """First incomparable pair breaking μ(x∨y)μ(x∧y) ≥ μ(x)μ(y), or None."""
    shape = mu.shape
    weights = mu.weights
    # Pairs involving a zero weight hold trivially.
    for r, s in itertools.combinations(mu.support, 2):
        if shape.precedes(r, s) or shape.precedes(s, r):
            continue
        lhs = weights[shape.join_rank(r, s)] * weights[shape.meet_rank(r, s)]
        if lhs < weights[r] * weights[s]:
            return shape.point(shape.coords_table[r]), shape.point(shape.coords_table[s])
    return None


def is_mtp2(mu: LatticeMeasure) -> bool:
    return mtp2_violation(mu) is None


def expectation(mu: LatticeMeasure, f: LatticeFunction) -> Fraction:
    _require_same_shape(mu.shape, f.shape)
    mu.require_normalized()
    return sum((mu.weights[r] * f.value_at_rank(r) for r in mu.support), Fraction(0))


def block_moments(
    mu: LatticeMeasure,
    functions: Sequence[LatticeFunction],
    subsets: Optional[Iterable[FrozenSet[int]]] = None,
) -> Dict[FrozenSet[int], Fraction]:
    """E(∏_{i∈S} f_i) for each subset S of function indices (default: all nonempty).

    Sums run over integers scaled by common denominators; only the final
    quotient per subset is a Fraction.
    """
    _require_same_shape(mu.shape, *(f.shape for f in functions))
    mu.require_normalized()
    if subsets is None:
        indices = range(len(functions))
        subsets = [
            frozenset(combo)
            for size in range(1, len(functions) + 1)
            for combo in itertools.combinations(indices, size)
        ]

    support = mu.support
    mu_den = math.lcm(*(mu.weights[r].denominator for r in support))
    mu_num = [mu.weights[r].numerator * (mu_den // mu.weights[r].denominator) for r in support]

    f_den = []
    f_num = []
    for f in functions:
        values = [f.value_at_rank(r) for r in support]
        den = math.lcm(*(v.denominator for v in values))
        f_den.append(den)
        f_num.append([v.numerator * (den // v.denominator) for v in values])

    moments: Dict[FrozenSet[int], Fraction] = {}
    for subset in subsets:
        members = sorted(subset)
        acc = 0
        for idx, weight in enumerate(mu_num):
            term = weight
            for i in members:
                term *= f_num[i][idx]
            acc += term
        den = mu_den
        for i in members:
            den *= f_den[i]
        moments[frozenset(subset)] = Fraction(acc, den)
    return moments


def combine_terms(terms: Sequence[Term], moments: Dict[FrozenSet[int], Fraction]) -> Fraction:
    total = Fraction(0)
    for coefficient, blocks in terms:
        product = Fraction(coefficient)
        for block in blocks:
            product *= moments[frozenset(block)]
        total += product
    return total


def marginalize(mu: LatticeMeasure, subset: CoordSubset) -> LatticeMeasure:
    mu.require_normalized()
    subset = mu.shape.coord_subset(subset)
    if len(subset) == mu.shape.n:
        return mu
    sub = mu.shape.sub_shape(subset)
    weights = [Fraction(0)] * sub.size
    for rank, target in enumerate(mu.shape.projection(subset)):
        weights[target] += mu.weights[rank]
    return LatticeMeasure(sub, tuple(weights))


def condition(f: LatticeFunction, mu: LatticeMeasure, subset: CoordSubset) -> LatticeFunction:
    """Conditional expectation of f given the coordinates in ``subset``.

    Defined only on the support of the marginal; other points hold None.
    """
    _require_same_shape(f.shape, mu.shape)
    mu.require_normalized()
    subset = mu.shape.coord_subset(subset)
    if len(subset) == mu.shape.n:
        return f
    sub = mu.shape.sub_shape(subset)
    mass = [Fraction(0)] * sub.size
    weighted = [Fraction(0)] * sub.size
    projection = mu.shape.projection(subset)
    for rank in mu.support:
        target = projection[rank]
        mass[target] += mu.weights[rank]
        weighted[target] += mu.weights[rank] * f.value_at_rank(rank)
    return LatticeFunction(sub, tuple(
        weighted[r] / mass[r] if mass[r] > 0 else None for r in range(sub.size)
    ))


def check_inequality_hypotheses(mu: LatticeMeasure, functions: Sequence[LatticeFunction]) -> None:
    """Raise HypothesisError unless μ is MTP₂ and every f is nonnegative and increasing."""
    violation = mtp2_violation(mu)
    if violation is not None:
        x, y = violation
        raise HypothesisError('not-mtp2', f"measure is not MTP2 at the pair {x.coords}, {y.coords}")
    for index, f in enumerate(functions):
        if not f.is_nonnegative():
            raise HypothesisError('negative-function', f"function {index} takes negative values")
        if not is_increasing(f):
            raise HypothesisError('not-increasing', f"function {index} is not increasing")


def inductive_gap(
    mu: LatticeMeasure,
    functions: Sequence[LatticeFunction],
    subset: CoordSubset,
    terms: Sequence[Term] = THIRD_ORDER_TERMS,
    check_hypotheses: bool = True,
) -> Fraction:
    """Alternating sum of conditional block products, averaged over the marginal on ``subset``.

    With the default terms this is the κ'_3-shaped expression whose value
    at the empty subset is κ'_3 itself. Other term lists (for instance a
    higher-order ``CumulantSpec.terms()``) give the matching higher gap.
    """
    mu.require_normalized()
    _require_same_shape(mu.shape, *(f.shape for f in functions))
    arity = 1 + max(i for _, blocks in terms for block in blocks for i in block)
    if arity != len(functions):
        raise ShapeMismatchError(f"terms use {arity} functions, {len(functions)} supplied")
    if check_hypotheses:
        check_inequality_hypotheses(mu, functions)

    subset = mu.shape.coord_subset(subset)
    marginal = marginalize(mu, subset)
    blocks = {frozenset(block) for _, term_blocks in terms for block in term_blocks}
    conditionals = {
        block: condition(product_function([functions[i] for i in sorted(block)]), mu, subset)
        for block in blocks
    }
    gap = Fraction(0)
    for rank in marginal.support:
        local = {block: g.value_at_rank(rank) for block, g in conditionals.items()}
        gap += marginal.weights[rank] * combine_terms(terms, local)
    return gap
