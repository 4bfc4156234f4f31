"""Application inequalities, each reduced to a measure on a lattice and a κ'_m evaluation.

Every check also computes its value a second way that avoids the lattice
module (binomial sums, set cardinalities, Hadamard products, permutation
counts), and the runners report both.
"""
from __future__ import annotations

import itertools
import logging
import math
import random
from abc import ABC, abstractmethod
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Any, Callable, Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from django.conf import settings
from sympy import Matrix, Rational

from .cumulant_utils import CONJUGATE, CumulantSpec, evaluate_kappa
from .errors import (
    CapExceededError,
    ClosureError,
    ContradictionError,
    ExchangeabilityError,
    FkgError,
    HypothesisError,
    InstanceFormatError,
    LogConvexityError,
    NormalizationError,
    PositiveDefinitenessError,
    ShapeMismatchError,
    SupportError,
    TriangleError,
)
from .lattice_utils import (
    LatticeFunction,
    LatticeMeasure,
    LatticeShape,
    block_moments,
    combine_terms,
    is_increasing,
    is_mtp2,
    to_fraction,
)
from .report_utils import CHECK_FAIL, CHECK_INCONCLUSIVE, CHECK_NOTE, CHECK_PASS, Check, Report
from .serialization_utils import (
    format_rational,
    functions_from_payload,
    integer_list,
    measure_from_payload,
    parse_rational,
    parse_rational_list,
    rational_matrix,
)
from .verifier_utils import InstanceGenConfig, Witness, generate_instance

logger = logging.getLogger(__name__)

MAX_RANKING_PLAYERS = getattr(settings, 'FKG_MAX_RANKING_PLAYERS', 8)
FLOAT_TOLERANCE = getattr(settings, 'FKG_FLOAT_TOLERANCE', 1e-9)

THIRD_ORDER_TAG = 'third-order FKG inequality'


@dataclass(frozen=True)
class ApplicationValue:
    """A κ evaluation on a constructed lattice instance next to its lattice-free value."""

    spec: CumulantSpec
    measure: LatticeMeasure
    functions: Tuple[LatticeFunction, ...]
    value: Fraction
    oracle: Fraction

    @property
    def agrees(self) -> bool:
        return self.value == self.oracle

    def witness(self, claim: str) -> Witness:
        return Witness(self.spec, self.measure, self.functions, self.value, claim)


def _combine(spec: CumulantSpec, moment: Callable[[Tuple[int, ...]], Fraction]) -> Fraction:
    """Evaluate ``spec`` from a caller-supplied block-moment function."""
    moments = {frozenset(block): moment(block) for _, blocks in spec.terms for block in blocks}
    return combine_terms(spec.terms, moments)


def _require_arity(sequences: Sequence, low: int = 2, high: int = 5) -> int:
    if not low <= len(sequences) <= high:
        raise FkgError(f"expected between {low} and {high} functions, got {len(sequences)}")
    return len(sequences)


def increasing_sequence(raw: Sequence, name: str) -> Tuple[Fraction, ...]:
    values = tuple(to_fraction(v) for v in raw)
    for k, v in enumerate(values):
        if v < 0:
            raise HypothesisError('negative-function', f"{name}[{k}]: negative value {format_rational(v)}")
    for k in range(1, len(values)):
        if values[k] < values[k - 1]:
            raise HypothesisError('not-increasing', f"{name} decreases at index {k}")
    return values


def _cardinality_function(shape: LatticeShape, values: Sequence[Fraction]) -> LatticeFunction:
    return LatticeFunction.from_callable(shape, lambda coords: values[sum(coords)])


# ---------------------------------------------------------------------------
# Bernstein polynomials and log-convex weights
# ---------------------------------------------------------------------------

def binomial_measure(n: int, x: Fraction) -> LatticeMeasure:
    shape = LatticeShape.boolean(n)
    return LatticeMeasure.from_callable(
        shape, lambda coords: x ** sum(coords) * (1 - x) ** (n - sum(coords))
    ).normalized()


def bernstein_polynomial(values: Sequence[Fraction], x: Fraction) -> Fraction:
    """B_n(g)(x) for g given by its values at 0, 1/n, ..., 1."""
    n = len(values) - 1
    return sum(
        (math.comb(n, k) * x ** k * (1 - x) ** (n - k) * v for k, v in enumerate(values)),
        Fraction(0),
    )


def bernstein_check(n: int, x: Any, sequences: Sequence[Sequence], kind: str = CONJUGATE) -> ApplicationValue:
    """κ of f̂_j(a) = f_j(|a|/n) under the binomial measure on 2^A.

    With the conjugate kind the value is the Bernstein-polynomial
    expression 2B(f1f2f3) − [B(f1f2)B(f3) + ...] + B(f1)B(f2)B(f3) and is ≥ 0.
    """
    x = to_fraction(x)
    if n < 1:
        raise FkgError(f"n must be at least 1, got {n}")
    if not 0 <= x <= 1:
        raise FkgError(f"x must lie in [0, 1], got {format_rational(x)}")
    m = _require_arity(sequences)
    values = [increasing_sequence(seq, f"functions[{j}]") for j, seq in enumerate(sequences)]
    for j, seq in enumerate(values):
        if len(seq) != n + 1:
            raise ShapeMismatchError(f"functions[{j}] needs {n + 1} values, got {len(seq)}")

    spec = CumulantSpec.of_kind(m, kind)
    mu = binomial_measure(n, x)
    functions = tuple(_cardinality_function(mu.shape, seq) for seq in values)

    def moment(block: Tuple[int, ...]) -> Fraction:
        return bernstein_polynomial([math.prod((values[i][k] for i in block), start=Fraction(1)) for k in range(n + 1)], x)

    return ApplicationValue(spec, mu, functions, evaluate_kappa(spec, mu, functions), _combine(spec, moment))


def logconvex_measure(a: Sequence[Fraction]) -> LatticeMeasure:
    """μ(set) = a_|set| / C(n, |set|) on 2^A, n = len(a) − 1."""
    n = len(a) - 1
    for k, value in enumerate(a):
        if value <= 0:
            raise FkgError(f"a[{k}]: weights must be positive, got {format_rational(value)}")
    total = sum(a, Fraction(0))
    if total != 1:
        raise NormalizationError(f"weights sum to {format_rational(total)}, expected 1")
    for k in range(1, n):
        if a[k] ** 2 > a[k - 1] * a[k + 1]:
            raise LogConvexityError(k, f"a is not log-convex at k={k}: a_k^2 > a_(k-1) a_(k+1)")
    b = [value / math.comb(n, k) for k, value in enumerate(a)]
    return LatticeMeasure.from_callable(LatticeShape.boolean(n), lambda coords: b[sum(coords)])


def logconvex_check(a: Sequence, sequences: Sequence[Sequence], kind: str = CONJUGATE) -> ApplicationValue:
    a = tuple(to_fraction(v) for v in a)
    n = len(a) - 1
    if n < 1:
        raise FkgError("a needs at least two entries")
    m = _require_arity(sequences)
    values = [increasing_sequence(seq, f"functions[{j}]") for j, seq in enumerate(sequences)]
    for j, seq in enumerate(values):
        if len(seq) != n + 1:
            raise ShapeMismatchError(f"functions[{j}] needs {n + 1} values, got {len(seq)}")

    spec = CumulantSpec.of_kind(m, kind)
    mu = logconvex_measure(a)
    functions = tuple(_cardinality_function(mu.shape, seq) for seq in values)

    def moment(block: Tuple[int, ...]) -> Fraction:
        return sum(
            (a[k] * math.prod((values[i][k] for i in block), start=Fraction(1)) for k in range(n + 1)),
            Fraction(0),
        )

    return ApplicationValue(spec, mu, functions, evaluate_kappa(spec, mu, functions), _combine(spec, moment))


# ---------------------------------------------------------------------------
# Up-sets and down-sets of 2^A
# ---------------------------------------------------------------------------

UP = 'up'
DOWN = 'down'
NO_CLOSURE = 'none'
CLOSURES = (UP, DOWN, NO_CLOSURE)


def subset_mask(subset: Iterable[int]) -> int:
    return sum(1 << (i - 1) for i in set(subset))


def _lacking_masks(n: int) -> Tuple[int, ...]:
    """For each element, the family bitmask of subsets that do not contain it."""
    size = 1 << n
    return tuple(
        sum(1 << s for s in range(size) if not s >> i & 1)
        for i in range(n)
    )


def _family_bits_up_closed(bits: int, n: int, lacking: Sequence[int]) -> bool:
    # Adding element i to s lacking it is s + 2^i, i.e. a shift of the family bitmask.
    return all(((bits & lacking[i]) << (1 << i)) & ~bits == 0 for i in range(n))


@dataclass(frozen=True)
class FamilyOfSubsets:
    """Subsets of {1..n} stored as bitmasks; element i is bit i − 1."""

    n: int
    masks: FrozenSet[int]
    closure: str = NO_CLOSURE

    def __post_init__(self):
        object.__setattr__(self, 'masks', frozenset(self.masks))
        if self.n < 1:
            raise FkgError(f"n must be at least 1, got {self.n}")
        if self.closure not in CLOSURES:
            raise FkgError(f"unknown closure '{self.closure}', expected one of {', '.join(CLOSURES)}")
        for mask in self.masks:
            if not 0 <= mask < 1 << self.n:
                raise FkgError(f"subset mask {mask} is outside 2^{{1..{self.n}}}")
        if self.closure == UP and not self.is_up_closed():
            raise ClosureError("family is tagged closed above but is not an up-set")
        if self.closure == DOWN and not self.is_down_closed():
            raise ClosureError("family is tagged closed below but is not a down-set")

    @classmethod
    def from_subsets(cls, n: int, subsets: Iterable[Iterable[int]], closure: str = NO_CLOSURE) -> 'FamilyOfSubsets':
        masks = set()
        for subset in subsets:
            members = list(subset)
            for i in members:
                if not 1 <= i <= n:
                    raise FkgError(f"element {i} is outside 1..{n}")
            masks.add(subset_mask(members))
        return cls(n, frozenset(masks), closure)

    @classmethod
    def everything(cls, n: int) -> 'FamilyOfSubsets':
        return cls(n, frozenset(range(1 << n)), UP)

    def subsets(self) -> List[List[int]]:
        found = [[i + 1 for i in range(self.n) if mask >> i & 1] for mask in self.masks]
        return sorted(found, key=lambda s: (len(s), s))

    def is_up_closed(self) -> bool:
        return all(mask | (1 << i) in self.masks for mask in self.masks for i in range(self.n))

    def is_down_closed(self) -> bool:
        return all(mask & ~(1 << i) in self.masks for mask in self.masks for i in range(self.n))

    def complement(self) -> 'FamilyOfSubsets':
        closure = {UP: DOWN, DOWN: UP}.get(self.closure, NO_CLOSURE)
        return FamilyOfSubsets(self.n, frozenset(range(1 << self.n)) - self.masks, closure)

    def __and__(self, other: 'FamilyOfSubsets') -> 'FamilyOfSubsets':
        if other.n != self.n:
            raise ShapeMismatchError(f"families over {self.n} and {other.n} elements")
        closure = self.closure if self.closure == other.closure else NO_CLOSURE
        return FamilyOfSubsets(self.n, self.masks & other.masks, closure)

    def __len__(self) -> int:
        return len(self.masks)

    def indicator(self) -> LatticeFunction:
        # Boolean-lattice ranks coincide with the bitmasks.
        shape = LatticeShape.boolean(self.n)
        return LatticeFunction(shape, tuple(int(rank in self.masks) for rank in range(shape.size)))


@lru_cache(maxsize=None)
def enumerate_up_sets(n: int) -> Tuple[FamilyOfSubsets, ...]:
    """Every up-set of 2^{1..n}, the empty family included (168 of them for n = 4)."""
    if not 1 <= n <= 4:
        raise CapExceededError(f"up-set enumeration is limited to 1 <= n <= 4, got {n}")
    size = 1 << n
    lacking = _lacking_masks(n)
    found = []
    for bits in range(1 << size):
        if _family_bits_up_closed(bits, n, lacking):
            found.append(FamilyOfSubsets(n, frozenset(s for s in range(size) if bits >> s & 1), UP))
    return tuple(found)


def enumerate_down_sets(n: int) -> Tuple[FamilyOfSubsets, ...]:
    return tuple(family.complement() for family in enumerate_up_sets(n))


def up_set_inequality_gap(up: FamilyOfSubsets, down: FamilyOfSubsets) -> int:
    """card(U)·card(L) − 2^n·card(U ∩ L); nonnegative for an up-set U and a down-set L."""
    return len(up) * len(down) - (1 << up.n) * len(up.masks & down.masks)


def kleitman_oracle(u1: FamilyOfSubsets, u2: FamilyOfSubsets, down: FamilyOfSubsets) -> int:
    """The scaled third-order expression from cardinalities alone."""
    size = 1 << u1.n
    u12 = u1.masks & u2.masks
    return (
        size ** 2 * len(u12)
        - 2 * size ** 2 * len(u12 & down.masks)
        + size * (
            len(u12) * len(down)
            + len(u1.masks & down.masks) * len(u2)
            + len(u1) * len(u2.masks & down.masks)
        )
        - size * len(u1) * len(u2)
        - len(u1) * len(u2) * len(down)
    )


@dataclass(frozen=True)
class KleitmanResult:
    value: int
    oracle: int
    instance: ApplicationValue

    @property
    def agrees(self) -> bool:
        return self.value == self.oracle


def kleitman_check(u1: FamilyOfSubsets, u2: FamilyOfSubsets, down: FamilyOfSubsets) -> KleitmanResult:
    """2^{3n}·κ'_3(1_U1, 1_U2, 1 − 1_L) under the uniform measure on 2^A."""
    if u1.closure != UP or u2.closure != UP:
        raise ClosureError("U1 and U2 must be closed above")
    if down.closure != DOWN:
        raise ClosureError("L must be closed below")
    if not u1.n == u2.n == down.n:
        raise ShapeMismatchError("U1, U2 and L must live on the same ground set")
    n = u1.n
    mu = LatticeMeasure.uniform(LatticeShape.boolean(n))
    functions = (u1.indicator(), u2.indicator(), down.indicator().complement())
    spec = CumulantSpec.conjugate(3)
    kappa = evaluate_kappa(spec, mu, functions)
    scaled = kappa * (1 << (3 * n))
    if scaled.denominator != 1:
        raise FkgError(f"scaled value {format_rational(scaled)} is not an integer")
    oracle = kleitman_oracle(u1, u2, down)
    return KleitmanResult(int(scaled), oracle, ApplicationValue(spec, mu, functions, kappa, Fraction(oracle, 1 << (3 * n))))


# ---------------------------------------------------------------------------
# Exact matrices
# ---------------------------------------------------------------------------

def _from_sympy(value: Any) -> Fraction:
    return Fraction(int(value.p), int(value.q))


def _subset_indices(rank: int, n: int) -> List[int]:
    return [i for i in range(n) if rank >> i & 1]


@dataclass(frozen=True)
class RationalMatrix:
    rows: Tuple[Tuple[Fraction, ...], ...]

    def __post_init__(self):
        rows = tuple(tuple(to_fraction(v) for v in row) for row in self.rows)
        object.__setattr__(self, 'rows', rows)
        if not rows:
            raise ShapeMismatchError("matrix needs at least one row")
        for index, row in enumerate(rows):
            if len(row) != len(rows):
                raise ShapeMismatchError(f"row {index} has {len(row)} entries, expected {len(rows)} for a square matrix")

    @classmethod
    def identity(cls, n: int) -> 'RationalMatrix':
        return cls(tuple(tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n)))

    @classmethod
    def diagonal(cls, values: Sequence) -> 'RationalMatrix':
        n = len(values)
        return cls(tuple(tuple(to_fraction(values[i]) if i == j else Fraction(0) for j in range(n)) for i in range(n)))

    @property
    def n(self) -> int:
        return len(self.rows)

    def __getitem__(self, index: Tuple[int, int]) -> Fraction:
        i, j = index
        return self.rows[i][j]

    def total(self) -> Fraction:
        return sum((v for row in self.rows for v in row), Fraction(0))

    def hadamard(self, other: 'RationalMatrix') -> 'RationalMatrix':
        if other.n != self.n:
            raise ShapeMismatchError(f"Hadamard product of {self.n}x{self.n} and {other.n}x{other.n} matrices")
        return RationalMatrix(tuple(
            tuple(a * b for a, b in zip(row, other_row)) for row, other_row in zip(self.rows, other.rows)
        ))

    def is_symmetric(self) -> bool:
        return all(self.rows[i][j] == self.rows[j][i] for i in range(self.n) for j in range(i))

    def to_sympy(self, indices: Optional[Sequence[int]] = None) -> Matrix:
        indices = range(self.n) if indices is None else indices
        return Matrix([[Rational(self.rows[i][j].numerator, self.rows[i][j].denominator) for j in indices] for i in indices])

    def to_numpy(self, indices: Optional[Sequence[int]] = None) -> np.ndarray:
        indices = list(range(self.n)) if indices is None else list(indices)
        return np.array([[float(self.rows[i][j]) for j in indices] for i in indices], dtype=float)

    def det(self, indices: Sequence[int]) -> Fraction:
        """det M[a]; the empty principal minor is 1."""
        if not indices:
            return Fraction(1)
        return _from_sympy(self.to_sympy(indices).det())

    def rank(self, indices: Sequence[int]) -> int:
        if not indices:
            return 0
        return int(self.to_sympy(indices).rank())

    def leading_minors(self) -> List[Fraction]:
        return [self.det(list(range(k))) for k in range(1, self.n + 1)]

    def is_positive_definite(self) -> bool:
        return self.is_symmetric() and all(minor > 0 for minor in self.leading_minors())

    def is_positive_semidefinite(self) -> bool:
        # Leading minors alone do not decide semidefiniteness; every principal minor is checked.
        if not self.is_symmetric():
            return False
        return all(self.det(_subset_indices(rank, self.n)) >= 0 for rank in range(1, 1 << self.n))

    def is_increasing(self) -> bool:
        return all(
            (i + 1 >= self.n or self.rows[i][j] <= self.rows[i + 1][j])
            and (j + 1 >= self.n or self.rows[i][j] <= self.rows[i][j + 1])
            for i in range(self.n) for j in range(self.n)
        )


def triangle_violation(R: RationalMatrix) -> Optional[Tuple[int, int, int]]:
    """First (i, k, j) with k between i and j where R(i,j)R(k,k) ≠ R(i,k)R(k,j)."""
    for i, j in itertools.product(range(R.n), repeat=2):
        low, high = sorted((i, j))
        for k in range(low, high + 1):
            if R[i, j] * R[k, k] != R[i, k] * R[k, j]:
                return i, k, j
    return None


def geometric_kernel(n: int, r: Any) -> RationalMatrix:
    """R(i, j) ∝ r^|i−j|, normalized to total mass 1."""
    r = to_fraction(r)
    if not 0 < r <= 1:
        raise FkgError(f"r must lie in (0, 1], got {format_rational(r)}")
    raw = [[r ** abs(i - j) for j in range(n)] for i in range(n)]
    total = sum((v for row in raw for v in row), Fraction(0))
    return RationalMatrix(tuple(tuple(v / total for v in row) for row in raw))


def grid_measure(R: RationalMatrix) -> LatticeMeasure:
    """R as a measure on the n×n grid; coordinate 0 is the row index."""
    return LatticeMeasure.from_callable(LatticeShape((R.n, R.n)), lambda coords: R[coords[0], coords[1]])


def matrix_function(F: RationalMatrix) -> LatticeFunction:
    return LatticeFunction.from_callable(LatticeShape((F.n, F.n)), lambda coords: F[coords[0], coords[1]])


def expectation_under(R: RationalMatrix, F: RationalMatrix) -> Fraction:
    """E_R(F) = tr(R F') = Σ R(i,j) F(i,j)."""
    return R.hadamard(F).total()


@dataclass(frozen=True)
class TriangleResult:
    instance: ApplicationValue
    mtp2: bool
    second_order: Fraction


def triangle_hadamard_check(R: RationalMatrix, matrices: Sequence[RationalMatrix], kind: str = CONJUGATE) -> TriangleResult:
    """κ of increasing matrices under R, via Hadamard products and via the grid lattice."""
    for i, row in enumerate(R.rows):
        for j, v in enumerate(row):
            if v < 0:
                raise FkgError(f"R[{i}][{j}]: negative entry {format_rational(v)}")
    if R.total() != 1:
        raise NormalizationError(f"R sums to {format_rational(R.total())}, expected 1")
    triple = triangle_violation(R)
    if triple is not None:
        i, k, j = triple
        raise TriangleError(triple, f"triangle property fails at (i, k, j) = ({i}, {k}, {j})")
    m = _require_arity(matrices)
    for index, F in enumerate(matrices):
        if F.n != R.n:
            raise ShapeMismatchError(f"F{index + 1} is {F.n}x{F.n}, R is {R.n}x{R.n}")
        if any(v < 0 for row in F.rows for v in row):
            raise HypothesisError('negative-function', f"F{index + 1} has a negative entry")
        if not F.is_increasing():
            raise HypothesisError('not-increasing', f"F{index + 1} is not increasing in both indices")

    spec = CumulantSpec.of_kind(m, kind)
    mu = grid_measure(R)
    functions = tuple(matrix_function(F) for F in matrices)

    def moment(block: Tuple[int, ...]) -> Fraction:
        product = matrices[block[0]]
        for i in block[1:]:
            product = product.hadamard(matrices[i])
        return expectation_under(R, product)

    second_order = expectation_under(R, matrices[0].hadamard(matrices[1])) - expectation_under(R, matrices[0]) * expectation_under(R, matrices[1])
    instance = ApplicationValue(spec, mu, functions, evaluate_kappa(spec, mu, functions), _combine(spec, moment))
    return TriangleResult(instance, is_mtp2(mu), second_order)


# ---------------------------------------------------------------------------
# Measures from principal submatrices
# ---------------------------------------------------------------------------

RANK = 'rank'
DET = 'det'
PSD_KINDS = (RANK, DET)


def _classify(value: float, scale: float) -> str:
    if value >= 0:
        return CHECK_PASS
    if -value <= FLOAT_TOLERANCE * scale:
        return CHECK_INCONCLUSIVE
    return CHECK_FAIL


def psd_measure(M: RationalMatrix, t: Any, kind: str) -> Tuple[LatticeMeasure, bool]:
    """μ(a) ∝ t^(n − rank M[a]) or det M[a]^(−t) on 2^A; the flag says whether it is exact."""
    t = to_fraction(t)
    if t <= 0:
        raise FkgError(f"t must be positive, got {format_rational(t)}")
    n = M.n
    shape = LatticeShape.boolean(n)
    if kind == RANK:
        if not M.is_positive_semidefinite():
            raise PositiveDefinitenessError("the rank measure needs a symmetric positive-semidefinite matrix")
        weights = [t ** (n - M.rank(_subset_indices(rank, n))) for rank in range(shape.size)]
        return LatticeMeasure(shape, tuple(weights)).normalized(), True
    if kind == DET:
        if not M.is_positive_definite():
            raise PositiveDefinitenessError("the determinant measure needs a symmetric positive-definite matrix")
        dets = [M.det(_subset_indices(rank, n)) for rank in range(shape.size)]
        if t.denominator == 1:
            return LatticeMeasure(shape, tuple((1 / d) ** t.numerator for d in dets)).normalized(), True
        exponent = -float(t)
        weights = [Fraction(float(d) ** exponent) for d in dets]
        return LatticeMeasure(shape, tuple(weights)).normalized(), False
    raise FkgError(f"unknown kind '{kind}', expected one of {', '.join(PSD_KINDS)}")


def float_mtp2_status(mu: LatticeMeasure) -> str:
    """MTP₂ with relative tolerance, for weights that carry rounding error."""
    shape = mu.shape
    weights = [float(w) for w in mu.weights]
    worst = CHECK_PASS
    for r, s in itertools.combinations(range(shape.size), 2):
        if shape.precedes(r, s) or shape.precedes(s, r):
            continue
        lhs = weights[shape.join_rank(r, s)] * weights[shape.meet_rank(r, s)]
        rhs = weights[r] * weights[s]
        status = _classify(lhs - rhs, max(abs(lhs), abs(rhs)))
        if status == CHECK_FAIL:
            return status
        if status == CHECK_INCONCLUSIVE:
            worst = status
    return worst


def default_matrix_functions(M: RationalMatrix) -> Tuple[LatticeFunction, ...]:
    """|a|, tr M[a] and rank M[a]; all increasing for a positive-semidefinite M."""
    n = M.n
    shape = LatticeShape.boolean(n)
    return (
        LatticeFunction(shape, tuple(Fraction(bin(rank).count('1')) for rank in range(shape.size))),
        LatticeFunction(shape, tuple(
            sum((M[i, i] for i in _subset_indices(rank, n)), Fraction(0)) for rank in range(shape.size)
        )),
        LatticeFunction(shape, tuple(Fraction(M.rank(_subset_indices(rank, n))) for rank in range(shape.size))),
    )


@dataclass(frozen=True)
class EigenResult:
    value: float
    status: str
    trace_increasing: bool
    lambda_min_decreasing: bool
    inverse_lambda_max_decreasing: bool


def eigen_correlation_check(M: RationalMatrix, t: Any) -> EigenResult:
    """(Σw)(Σw·λmin/λmax) − (Σw·λmin)(Σw/λmax) with w(a) = det M[a]^(−t).

    λ_min(M[a]) and 1/λ_max(M[a]) both decrease as a grows, so the two are
    positively correlated under the MTP₂ weights. At a = ∅ they are set to
    max_i M_ii and 1/min_i M_ii, the values that keep both monotone.
    """
    if not M.is_positive_definite():
        raise PositiveDefinitenessError("the eigenvalue check needs a symmetric positive-definite matrix")
    t = float(to_fraction(t))
    n = M.n
    size = 1 << n
    diagonal = [float(M[i, i]) for i in range(n)]
    weights = np.empty(size)
    lam_min = np.empty(size)
    inv_lam_max = np.empty(size)
    trace = np.empty(size)
    for rank in range(size):
        indices = _subset_indices(rank, n)
        if indices:
            eigenvalues = np.linalg.eigvalsh(M.to_numpy(indices))
            lam_min[rank] = eigenvalues[0]
            inv_lam_max[rank] = 1.0 / eigenvalues[-1]
        else:
            lam_min[rank] = max(diagonal)
            inv_lam_max[rank] = 1.0 / min(diagonal)
        weights[rank] = float(M.det(indices)) ** (-t)
        trace[rank] = sum(diagonal[i] for i in indices)

    total = weights.sum()
    joint = (weights * lam_min * inv_lam_max).sum()
    value = float(total * joint - (weights * lam_min).sum() * (weights * inv_lam_max).sum())

    shape = LatticeShape.boolean(n)
    tolerance = FLOAT_TOLERANCE * max(float(np.abs(lam_min).max()), 1.0)
    covers = list(shape.covers())
    return EigenResult(
        value=value,
        status=_classify(value, abs(total * joint)),
        trace_increasing=all(trace[r] <= trace[s] for r, s in covers),
        lambda_min_decreasing=all(lam_min[s] <= lam_min[r] + tolerance for r, s in covers),
        inverse_lambda_max_decreasing=all(inv_lam_max[s] <= inv_lam_max[r] + tolerance for r, s in covers),
    )


@dataclass(frozen=True)
class PsdResult:
    kind: str
    t: Fraction
    exact: bool
    mtp2_status: str
    instance: ApplicationValue
    value_status: str
    eigen: Optional[EigenResult] = None


def psd_measure_check(
    M: RationalMatrix,
    t: Any,
    kind: str,
    functions: Optional[Sequence[LatticeFunction]] = None,
    eigen: bool = False,
) -> PsdResult:
    t = to_fraction(t)
    mu, exact = psd_measure(M, t, kind)
    functions = tuple(functions) if functions else default_matrix_functions(M)
    m = _require_arity(functions)
    for index, f in enumerate(functions):
        if f.shape != mu.shape:
            raise ShapeMismatchError(f"functions[{index}] has shape {f.shape.chain_lengths}, expected {mu.shape.chain_lengths}")
        if not f.is_nonnegative():
            raise HypothesisError('negative-function', f"functions[{index}] takes negative values")
        if not is_increasing(f):
            raise HypothesisError('not-increasing', f"functions[{index}] is not increasing")

    spec = CumulantSpec.conjugate(m)
    moments = block_moments(mu, functions)
    value = combine_terms(spec.terms, moments)
    instance = ApplicationValue(spec, mu, functions, value, value)

    if exact:
        mtp2_status = CHECK_PASS if is_mtp2(mu) else CHECK_FAIL
        value_status = CHECK_PASS if value >= 0 else CHECK_FAIL
    else:
        mtp2_status = float_mtp2_status(mu)
        scale = max(
            (abs(c) * math.prod(float(moments[frozenset(block)]) for block in blocks) for c, blocks in spec.terms),
            default=1.0,
        )
        value_status = _classify(float(value), scale)

    logger.info("PSD measure check: kind=%s t=%s exact=%s mtp2=%s value=%s", kind, t, exact, mtp2_status, value_status)
    return PsdResult(
        kind=kind,
        t=t,
        exact=exact,
        mtp2_status=mtp2_status,
        instance=instance,
        value_status=value_status,
        eigen=eigen_correlation_check(M, t) if eigen else None,
    )


# ---------------------------------------------------------------------------
# Rankings of two teams
# ---------------------------------------------------------------------------

Relation = Tuple[str, str]


class RankingSpace:
    """Uniform random rankings of players a1..am, b1..bn; (x, y) means x ranks below y."""

    def __init__(self, m: int, n: int):
        if m < 1 or n < 1:
            raise FkgError("both teams need at least one player")
        if m + n > MAX_RANKING_PLAYERS:
            raise CapExceededError(f"{m + n} players exceed FKG_MAX_RANKING_PLAYERS={MAX_RANKING_PLAYERS}")
        self.m = m
        self.n = n
        self.players = [f"a{i}" for i in range(1, m + 1)] + [f"b{j}" for j in range(1, n + 1)]
        self._index = {name: index for index, name in enumerate(self.players)}
        self._rankings = list(itertools.permutations(range(m + n)))

    def parse(self, relations: Iterable[Sequence[str]]) -> List[Tuple[int, int]]:
        parsed = []
        for relation in relations:
            if len(relation) != 2:
                raise FkgError(f"a relation needs two players, got {list(relation)}")
            x, y = relation
            for player in (x, y):
                if player not in self._index:
                    raise FkgError(f"unknown player '{player}', expected one of {', '.join(self.players)}")
            parsed.append((self._index[x], self._index[y]))
        return parsed

    def count(self, relations: Iterable[Sequence[str]]) -> int:
        parsed = self.parse(relations)
        return sum(1 for position in self._rankings if all(position[x] < position[y] for x, y in parsed))

    def probability(self, event: Sequence[Sequence[str]], given: Sequence[Sequence[str]]) -> Fraction:
        base = self.count(given)
        if base == 0:
            raise ContradictionError(f"the conditioning relations {[list(r) for r in given]} cannot all hold")
        return Fraction(self.count(list(event) + list(given)), base)

    def team_order(self) -> List[Relation]:
        """a1 < ... < am together with b1 < ... < bn."""
        return (
            [(f"a{i}", f"a{i + 1}") for i in range(1, self.m)]
            + [(f"b{j}", f"b{j + 1}") for j in range(1, self.n)]
        )


def _require_team(relations: Sequence[Sequence[str]], within: bool) -> None:
    for x, y in relations:
        same = x[0] == y[0]
        if within and not same:
            raise FkgError(f"({x}, {y}) relates players of different teams")
        if not within and not (x.startswith('a') and y.startswith('b')):
            raise FkgError(f"({x}, {y}) is not of the form a_i < b_j")


@dataclass(frozen=True)
class TeamCumulants:
    probabilities: Dict[str, Fraction]
    kappa: Fraction
    covariance_sum: Fraction

    @property
    def printed(self) -> Fraction:
        return self.kappa - 2 * self.covariance_sum

    @property
    def sharper(self) -> Fraction:
        return self.kappa - self.covariance_sum


@dataclass(frozen=True)
class RankingResult:
    before: Fraction
    after: Fraction
    cumulants: Optional[TeamCumulants] = None

    @property
    def holds(self) -> bool:
        return self.after >= self.before


def team_cumulants(space: RankingSpace, events: Sequence[Sequence[Sequence[str]]]) -> TeamCumulants:
    """π-moments of three a_i < b_j events conditioned on the full team order and a fourth event.

    κ'_3(1 − g) = Σ Cov(g_i, g_j) − κ'_3(g) ≥ 0 gives κ'_3(g) − Σ Cov ≤ 0; the
    form subtracting twice the covariances is implied because each covariance is ≥ 0.
    """
    if len(events) != 4:
        raise FkgError(f"expected four events A1..A4, got {len(events)}")
    for event in events:
        _require_team(event, within=False)
    given = space.team_order() + list(events[3])
    a1, a2, a3 = (list(e) for e in events[:3])
    pi = {
        '1': space.probability(a1, given),
        '2': space.probability(a2, given),
        '3': space.probability(a3, given),
        '12': space.probability(a1 + a2, given),
        '13': space.probability(a1 + a3, given),
        '23': space.probability(a2 + a3, given),
        '123': space.probability(a1 + a2 + a3, given),
    }
    kappa = (
        2 * pi['123']
        - (pi['12'] * pi['3'] + pi['13'] * pi['2'] + pi['1'] * pi['23'])
        + pi['1'] * pi['2'] * pi['3']
    )
    covariance_sum = (
        (pi['12'] - pi['1'] * pi['2'])
        + (pi['13'] - pi['1'] * pi['3'])
        + (pi['23'] - pi['2'] * pi['3'])
    )
    return TeamCumulants(pi, kappa, covariance_sum)


def ranking_monotonicity(
    m: int,
    n: int,
    theta: Sequence[Sequence[str]],
    theta_extra: Sequence[Sequence[str]],
    events: Optional[Sequence[Sequence[Sequence[str]]]] = None,
) -> RankingResult:
    """P(a1 < b1 | Θ) against P(a1 < b1 | Θ ∪ Θ''), by enumerating all rankings."""
    space = RankingSpace(m, n)
    _require_team(theta, within=True)
    _require_team(theta_extra, within=False)
    target = [('a1', 'b1')]
    before = space.probability(target, list(theta))
    after = space.probability(target, list(theta) + list(theta_extra))
    cumulants = team_cumulants(space, events) if events is not None else None
    logger.info("Ranking check: m=%s n=%s before=%s after=%s", m, n, before, after)
    return RankingResult(before, after, cumulants)


def random_team_events(rng: random.Random, m: int, n: int, max_relations: int = 2) -> List[List[Relation]]:
    pairs = [(f"a{i}", f"b{j}") for i in range(1, m + 1) for j in range(1, n + 1)]
    return [rng.sample(pairs, rng.randint(0, min(max_relations, len(pairs)))) for _ in range(4)]


# ---------------------------------------------------------------------------
# Exchangeable coordinates
# ---------------------------------------------------------------------------

def is_exchangeable(mu: LatticeMeasure) -> bool:
    """Invariance under every adjacent transposition of coordinates."""
    shape = mu.shape
    if len(set(shape.chain_lengths)) > 1:
        return False
    for axis in range(shape.n - 1):
        for rank, coords in enumerate(shape.coords_table):
            swapped = list(coords)
            swapped[axis], swapped[axis + 1] = swapped[axis + 1], swapped[axis]
            if mu.weights[rank] != mu.weights[shape.rank(swapped)]:
                return False
    return True


@dataclass(frozen=True)
class ExchangeableResult:
    c: Tuple[Fraction, ...]
    p: Fraction
    q: Fraction
    r: Fraction
    instance: ApplicationValue

    @property
    def printed(self) -> Fraction:
        """2r − 3pq + p³ − 6(q − p²)."""
        return 2 * self.r - 3 * self.p * self.q + self.p ** 3 - 6 * (self.q - self.p ** 2)

    @property
    def sharper(self) -> Fraction:
        """−κ'_3(1 − f) = 2r − 3pq + p³ − 3(q − p²)."""
        return 2 * self.r - 3 * self.p * self.q + self.p ** 3 - 3 * (self.q - self.p ** 2)


def exchangeable_bound_check(mu: LatticeMeasure, a: int, m: int) -> ExchangeableResult:
    """c_k(a) = P(X₁ ≤ a, ..., X_k ≤ a) ratios for an exchangeable MTP₂ measure.

    The lattice side conditions on X₁..X_{m−1} ≤ a and evaluates κ'_3 on the
    increasing indicators 1{X_{m+k−1} > a}, k = 1, 2, 3.
    """
    shape = mu.shape
    n = shape.n
    if not 1 <= m <= n - 2:
        raise FkgError(f"m must satisfy 1 <= m <= n - 2 = {n - 2}, got {m}")
    if not is_exchangeable(mu):
        raise ExchangeabilityError("measure is not invariant under coordinate permutations")
    if not is_mtp2(mu):
        raise HypothesisError('not-mtp2', "measure is not MTP2")
    if not 0 <= a < shape.chain_lengths[0]:
        raise FkgError(f"threshold {a} is outside 0..{shape.chain_lengths[0] - 1}")
    mu = mu.normalized()

    def below(coords: Tuple[int, ...], k: int) -> bool:
        return all(c <= a for c in coords[:k])

    c = tuple(
        sum((w for w, coords in zip(mu.weights, shape.coords_table) if below(coords, k)), Fraction(0))
        for k in range(m + 3)
    )
    if c[m - 1] == 0:
        raise SupportError(f"c_{m - 1}({a}) is zero, the ratios are undefined")
    p, q, r = c[m] / c[m - 1], c[m + 1] / c[m - 1], c[m + 2] / c[m - 1]

    conditioned = LatticeMeasure(shape, tuple(
        w if below(coords, m - 1) else Fraction(0) for w, coords in zip(mu.weights, shape.coords_table)
    )).normalized()
    functions = tuple(
        LatticeFunction.from_callable(shape, lambda coords, axis=m + k - 2: int(coords[axis] > a))
        for k in (1, 2, 3)
    )
    spec = CumulantSpec.conjugate(3)
    value = evaluate_kappa(spec, conditioned, functions)
    sharper = 2 * r - 3 * p * q + p ** 3 - 3 * (q - p ** 2)
    return ExchangeableResult(c, p, q, r, ApplicationValue(spec, conditioned, functions, value, -sharper))


def iid_measure(n: int, marginal: Sequence) -> LatticeMeasure:
    marginal = [to_fraction(v) for v in marginal]
    shape = LatticeShape((len(marginal),) * n)
    return LatticeMeasure.from_callable(shape, lambda coords: math.prod((marginal[c] for c in coords), start=Fraction(1)))


def random_exchangeable_measure(n: int, k: int, seed: int, trial: int = 0) -> LatticeMeasure:
    cfg = InstanceGenConfig(LatticeShape((k,) * n), seed=seed, exchangeable=True, n_functions=1)
    mu, _ = generate_instance(cfg, trial)
    return mu


# ---------------------------------------------------------------------------
# Command runners
# ---------------------------------------------------------------------------

def _kappa_checks(instance: ApplicationValue, claim: str, tag: str, oracle_name: str) -> List[Check]:
    return [
        Check.of(claim, instance.value >= 0, tag, instance.value),
        Check.of(f"lattice value equals {oracle_name}", instance.agrees, value=instance.oracle),
    ]


def _witness_if_negative(instance: ApplicationValue, claim: str) -> Optional[Witness]:
    return instance.witness(claim) if instance.value < 0 else None


def _sequences(payload: Dict[str, Any], key: str = 'functions') -> List[List[Fraction]]:
    raw = payload.get(key)
    if not isinstance(raw, list) or not raw:
        raise InstanceFormatError(key, "expected a nonempty list of value sequences")
    return [parse_rational_list(seq, f"{key}[{index}]") for index, seq in enumerate(raw)]


def _int_field(payload: Dict[str, Any], key: str, default: Optional[int] = None) -> int:
    raw = payload.get(key, default)
    if raw is None:
        raise InstanceFormatError(key, "missing field")
    if isinstance(raw, bool) or not isinstance(raw, int):
        raise InstanceFormatError(key, f"expected an integer, got {raw!r}")
    return raw


def _relations(raw: Any, path: str) -> List[Relation]:
    if raw is None:
        return []
    if not isinstance(raw, list):
        raise InstanceFormatError(path, "expected a list of [x, y] relations")
    relations = []
    for index, item in enumerate(raw):
        if not isinstance(item, list) or len(item) != 2 or not all(isinstance(p, str) for p in item):
            raise InstanceFormatError(f"{path}[{index}]", "expected a pair of player names")
        relations.append((item[0], item[1]))
    return relations


class BaseApplicationRunner(ABC):
    """Turns one JSON input into a report."""

    name = ''

    @abstractmethod
    def run(self, payload: Dict[str, Any]) -> Report:
        raise NotImplementedError

    def _report(self, checks: List[Check], data: Dict[str, Any], witness: Optional[Witness] = None) -> Report:
        return Report(command=f"apps {self.name}", checks=checks, payload=data, witness=witness)


class BernsteinRunner(BaseApplicationRunner):
    name = 'bernstein'

    def run(self, payload: Dict[str, Any]) -> Report:
        n = _int_field(payload, 'n')
        x = parse_rational(payload.get('x'), 'x')
        kind = payload.get('kind', CONJUGATE)
        instance = bernstein_check(n, x, _sequences(payload), kind)
        claim = f"{instance.spec.label} of Bernstein polynomials ≥ 0"
        return self._report(
            _kappa_checks(instance, claim, 'Bernstein polynomial inequality', 'the Bernstein-polynomial expression'),
            {'n': n, 'x': x, 'value': instance.value},
            _witness_if_negative(instance, claim),
        )


class LogConvexRunner(BaseApplicationRunner):
    name = 'logconvex'

    def run(self, payload: Dict[str, Any]) -> Report:
        a = parse_rational_list(payload.get('a'), 'a')
        kind = payload.get('kind', CONJUGATE)
        instance = logconvex_check(a, _sequences(payload), kind)
        claim = f"{instance.spec.label} under log-convex weights ≥ 0"
        return self._report(
            _kappa_checks(instance, claim, 'log-convex sequence inequality', 'the weighted sum Σ a_k'),
            {'value': instance.value},
            _witness_if_negative(instance, claim),
        )


class KleitmanRunner(BaseApplicationRunner):
    name = 'kleitman'

    def _family(self, payload: Dict[str, Any], key: str, n: int, closure: str) -> FamilyOfSubsets:
        raw = payload.get(key)
        if raw == 'all':
            return FamilyOfSubsets.everything(n)
        if not isinstance(raw, list):
            raise InstanceFormatError(key, "expected a list of subsets or \"all\"")
        subsets = [integer_list(item, f"{key}[{index}]") for index, item in enumerate(raw)]
        return FamilyOfSubsets.from_subsets(n, subsets, closure)

    def run(self, payload: Dict[str, Any]) -> Report:
        n = _int_field(payload, 'n')
        if 'draws' in payload:
            return self._random(n, _int_field(payload, 'draws'), _int_field(payload, 'seed', 0))
        u1 = self._family(payload, 'U1', n, UP)
        u2 = self._family(payload, 'U2', n, UP)
        down = self._family(payload, 'L', n, DOWN)
        result = kleitman_check(u1, u2, down)
        claim = "scaled κ'_3(1_U1, 1_U2, 1 − 1_L) ≥ 0"
        checks = [
            Check.of(claim, result.value >= 0, 'third-order up-set inequality', result.value),
            Check.of("lattice value equals the cardinality formula", result.agrees, value=result.oracle),
            Check.of(
                "2^n card(U1 ∩ L) ≤ card(U1) card(L)",
                up_set_inequality_gap(u1, down) >= 0,
                'up-set/down-set correlation inequality',
                up_set_inequality_gap(u1, down),
            ),
        ]
        witness = _witness_if_negative(result.instance, claim)
        return self._report(checks, {'n': n, 'value': result.value}, witness)

    def _random(self, n: int, draws: int, seed: int) -> Report:
        ups = enumerate_up_sets(n)
        downs = enumerate_down_sets(n)
        rng = random.Random(seed)
        negatives = 0
        mismatches = 0
        reduction_mismatches = 0
        everything = FamilyOfSubsets.everything(n)
        for _ in range(draws):
            u1, u2, down = rng.choice(ups), rng.choice(ups), rng.choice(downs)
            result = kleitman_check(u1, u2, down)
            negatives += result.value < 0
            mismatches += not result.agrees
            reduced = kleitman_check(u1, everything, down).value
            reduction_mismatches += reduced != (1 << n) * up_set_inequality_gap(u1, down)
        checks = [
            Check.of(f"scaled κ'_3 ≥ 0 on {draws} random families", negatives == 0, 'third-order up-set inequality', negatives),
            Check.of("lattice value equals the cardinality formula", mismatches == 0, value=mismatches),
            Check.of("U2 = 2^A reduces to the second-order inequality", reduction_mismatches == 0, value=reduction_mismatches),
        ]
        return self._report(checks, {'n': n, 'draws': draws, 'seed': seed, 'up_sets': len(ups)})


class MatrixRunner(BaseApplicationRunner):
    name = 'matrix'

    def run(self, payload: Dict[str, Any]) -> Report:
        if 'geometric' in payload:
            spec = payload['geometric']
            if not isinstance(spec, dict):
                raise InstanceFormatError('geometric', "expected {\"n\": ..., \"r\": ...}")
            R = geometric_kernel(_int_field(spec, 'n'), parse_rational(spec.get('r'), 'geometric.r'))
        else:
            R = RationalMatrix(tuple(map(tuple, rational_matrix(payload.get('R'), 'R'))))
        raw = payload.get('functions')
        if not isinstance(raw, list):
            raise InstanceFormatError('functions', "expected a list of matrices")
        matrices = [
            RationalMatrix(tuple(map(tuple, rational_matrix(F, f"functions[{index}]"))))
            for index, F in enumerate(raw)
        ]
        result = triangle_hadamard_check(R, matrices, payload.get('kind', CONJUGATE))
        instance = result.instance
        claim = f"{instance.spec.label} of Hadamard products under R ≥ 0"
        checks = [
            Check.of(
                "grid measure R is MTP₂",
                result.mtp2,
                'triangle property',
                detail='' if result.mtp2 else 'the triangle property alone does not force MTP₂ here',
            ),
        ]
        if result.mtp2:
            checks.extend(_kappa_checks(instance, claim, 'Hadamard product inequality', 'the Hadamard-product expression'))
        else:
            checks.append(Check(claim, CHECK_NOTE, 'Hadamard product inequality', instance.value, 'hypothesis not met'))
        checks.append(Check.of(
            "E_R(F1∘F2) ≥ E_R(F1)E_R(F2)",
            result.second_order >= 0 or not result.mtp2,
            'second-order Hadamard inequality',
            result.second_order,
        ))
        witness = _witness_if_negative(instance, claim) if result.mtp2 else None
        return self._report(checks, {'n': R.n, 'value': instance.value}, witness)


class PsdRunner(BaseApplicationRunner):
    name = 'psd'

    def run(self, payload: Dict[str, Any]) -> Report:
        M = RationalMatrix(tuple(map(tuple, rational_matrix(payload.get('M'), 'M'))))
        t = parse_rational(payload.get('t', 1), 't')
        kind = payload.get('kind', DET)
        functions = None
        if payload.get('functions'):
            functions = functions_from_payload(payload['functions'], 'functions', LatticeShape.boolean(M.n))
        result = psd_measure_check(M, t, kind, functions, eigen=bool(payload.get('eigen', False)))
        instance = result.instance
        claim = f"{instance.spec.label} under the {kind} measure ≥ 0"
        established = result.mtp2_status == CHECK_PASS
        checks = [
            Check("measure is MTP₂", result.mtp2_status, f"{kind} inequality for principal submatrices"),
            Check(
                claim,
                result.value_status if established else CHECK_NOTE,
                THIRD_ORDER_TAG,
                instance.value,
                '' if established else 'hypothesis not established',
            ),
        ]
        if not result.exact:
            checks.append(Check('floating backend', CHECK_NOTE, detail=f"non-integer t; relative tolerance {FLOAT_TOLERANCE}"))
        data = {'kind': kind, 't': t, 'exact': result.exact, 'value': instance.value}
        if result.eigen is not None:
            eigen = result.eigen
            checks.extend([
                Check("λ_min and 1/λ_max positively correlated", eigen.status, 'eigenvalue FKG inequality', repr(eigen.value)),
                Check.of("tr M[a] increasing", eigen.trace_increasing),
                Check.of("λ_min(M[a]) decreasing", eigen.lambda_min_decreasing, detail='interlacing'),
                Check.of("1/λ_max(M[a]) decreasing", eigen.inverse_lambda_max_decreasing, detail='interlacing'),
            ])
        witness = None
        if result.exact and result.mtp2_status == CHECK_PASS and instance.value < 0:
            witness = instance.witness(claim)
        return self._report(checks, data, witness)


class RankingRunner(BaseApplicationRunner):
    name = 'ranking'

    def run(self, payload: Dict[str, Any]) -> Report:
        m = _int_field(payload, 'm')
        n = _int_field(payload, 'n')
        events = payload.get('events')
        if events is not None:
            if not isinstance(events, list):
                raise InstanceFormatError('events', "expected four lists of relations")
            events = [_relations(event, f"events[{index}]") for index, event in enumerate(events)]
        result = ranking_monotonicity(
            m, n,
            _relations(payload.get('theta'), 'theta'),
            _relations(payload.get('theta_extra'), 'theta_extra'),
            events,
        )
        checks = [Check.of(
            "P(a1 < b1 | Θ ∪ Θ'') ≥ P(a1 < b1 | Θ)",
            result.holds,
            'ranking monotonicity',
            {'before': result.before, 'after': result.after},
        )]
        data: Dict[str, Any] = {'m': m, 'n': n, 'before': result.before, 'after': result.after}
        if result.cumulants is not None:
            cumulants = result.cumulants
            checks.append(Check.of("κ'_3(g) − Σ Cov(g_i, g_j) ≤ 0", cumulants.sharper <= 0, THIRD_ORDER_TAG, cumulants.sharper))
            checks.append(Check.of(
                "κ'_3(g) − 2 Σ Cov(g_i, g_j) ≤ 0", cumulants.printed <= 0, THIRD_ORDER_TAG, cumulants.printed,
                'implied by the line above since each covariance is nonnegative',
            ))
            data['pi'] = cumulants.probabilities
        return self._report(checks, data)


class ExchangeableRunner(BaseApplicationRunner):
    name = 'exchangeable'

    def run(self, payload: Dict[str, Any]) -> Report:
        if 'measure' in payload:
            mu = measure_from_payload(payload['measure'], 'measure')
        elif 'iid' in payload:
            iid = payload['iid']
            if not isinstance(iid, dict):
                raise InstanceFormatError('iid', "expected {\"n\": ..., \"marginal\": [...]}")
            mu = iid_measure(_int_field(iid, 'n'), parse_rational_list(iid.get('marginal'), 'iid.marginal'))
        else:
            raise InstanceFormatError('measure', "missing field")
        result = exchangeable_bound_check(mu, _int_field(payload, 'a'), _int_field(payload, 'm'))
        instance = result.instance
        claim = "κ'_3(1 − f) ≥ 0"
        checks = [
            Check.of("2r − 3pq + p³ − 3(q − p²) ≤ 0", result.sharper <= 0, 'exchangeable log-concavity', result.sharper),
            Check.of("2r − 3pq + p³ − 6(q − p²) ≤ 0", result.printed <= 0, 'exchangeable log-concavity', result.printed,
                     'weaker by 3(q − p²) ≥ 0'),
            Check.of("lattice κ'_3(1 − f) equals the ratio expression", instance.agrees, value=instance.value),
        ]
        data = {'c': list(result.c), 'p': result.p, 'q': result.q, 'r': result.r}
        return self._report(checks, data, _witness_if_negative(instance, claim))


class ApplicationRunnerFactory:
    """Selects the runner for an ``apps`` subcommand."""

    RUNNERS = {
        runner.name: runner
        for runner in (
            BernsteinRunner,
            LogConvexRunner,
            KleitmanRunner,
            MatrixRunner,
            PsdRunner,
            RankingRunner,
            ExchangeableRunner,
        )
    }

    @staticmethod
    def get_runner(name: str) -> BaseApplicationRunner:
        runner = ApplicationRunnerFactory.RUNNERS.get(name)
        if runner is None:
            raise FkgError(f"unknown application '{name}', expected one of {', '.join(sorted(ApplicationRunnerFactory.RUNNERS))}")
        return runner()
