"""Partition-indexed alternating sums of expectation products.

A ``CumulantSpec`` assigns an integer c_λ to every partition λ of m and
stands for P_m(f1..fm) = Σ_λ c_λ Σ_{splits of type λ} ∏_{blocks S} E(∏_{i∈S} f_i).
The cumulant κ_m and the conjugate cumulant κ'_m are the two closed-form
coefficient families; ``custom`` accepts any integer vector.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Dict, List, Mapping, NamedTuple, Optional, Sequence, Tuple

from .errors import CapExceededError, FkgError, ShapeMismatchError
from .lattice_utils import (
    LatticeFunction,
    LatticeMeasure,
    Term,
    block_moments,
    check_inequality_hypotheses,
    combine_terms,
)
from .partition_utils import (
    MAX_PARTITION_WEIGHT,
    Partition,
    conjugate,
    enumerate_partitions,
    split_count,
    splits_of_type,
)

logger = logging.getLogger(__name__)

CUMULANT = 'cumulant'
CONJUGATE = 'conjugate'
CUSTOM = 'custom'
KINDS = (CUMULANT, CONJUGATE, CUSTOM)


def coefficient(partition: Partition, kind: str) -> int:
    sign = (-1) ** (partition.length - 1)
    if kind == CUMULANT:
        return sign * math.factorial(partition.length - 1)
    if kind == CONJUGATE:
        return sign * math.factorial(conjugate(partition).length - 1)
    raise FkgError(f"no closed-form coefficients for kind '{kind}'")


@dataclass(frozen=True)
class CumulantSpec:
    m: int
    coeffs: Tuple[Tuple[Partition, int], ...]
    kind: str

    def __post_init__(self):
        if self.kind not in KINDS:
            raise FkgError(f"unknown kind '{self.kind}', expected one of {', '.join(KINDS)}")
        expected = enumerate_partitions(self.m)
        given = {partition: int(c) for partition, c in self.coeffs}
        if len(given) != len(self.coeffs) or set(given) != set(expected):
            missing = [str(p) for p in expected if p not in given]
            extra = [str(p) for p in given if p not in expected]
            raise FkgError(
                f"coefficients must be keyed by every partition of {self.m} exactly once"
                f" (missing: {missing or 'none'}, unexpected: {extra or 'none'})"
            )
        ordered = tuple((partition, given[partition]) for partition in expected)
        object.__setattr__(self, 'coeffs', ordered)
        if self.kind != CUSTOM:
            for partition, c in ordered:
                if c != coefficient(partition, self.kind):
                    raise FkgError(f"coefficient of {partition} does not match kind '{self.kind}'")

    @classmethod
    def of_kind(cls, m: int, kind: str) -> 'CumulantSpec':
        return cls(m, tuple((p, coefficient(p, kind)) for p in enumerate_partitions(m)), kind)

    @classmethod
    def conjugate(cls, m: int) -> 'CumulantSpec':
        return cls.of_kind(m, CONJUGATE)

    @classmethod
    def cumulant(cls, m: int) -> 'CumulantSpec':
        return cls.of_kind(m, CUMULANT)

    @classmethod
    def custom(cls, m: int, coeffs: Mapping[Partition, int]) -> 'CumulantSpec':
        return cls(m, tuple(coeffs.items()), CUSTOM)

    @classmethod
    def from_vector(cls, m: int, vector: Sequence[int]) -> 'CumulantSpec':
        """Custom spec from coefficients listed in ``enumerate_partitions`` order."""
        partitions = enumerate_partitions(m)
        if len(vector) != len(partitions):
            raise FkgError(f"m={m} needs {len(partitions)} coefficients, got {len(vector)}")
        return cls(m, tuple(zip(partitions, (int(c) for c in vector))), CUSTOM)

    @property
    def coeff_map(self) -> Dict[Partition, int]:
        return dict(self.coeffs)

    @property
    def vector(self) -> Tuple[int, ...]:
        return tuple(c for _, c in self.coeffs)

    @property
    def label(self) -> str:
        if self.kind == CONJUGATE:
            return f"κ'_{self.m}"
        if self.kind == CUMULANT:
            return f"κ_{self.m}"
        return f"P_{self.m}{list(self.vector)}"

    @cached_property
    def terms(self) -> Tuple[Term, ...]:
        """Expanded (coefficient, blocks) list with 0-based function indices."""
        expanded = []
        for partition, c in self.coeffs:
            if c == 0:
                continue
            for split in splits_of_type(partition):
                expanded.append((c, tuple(tuple(i - 1 for i in block) for block in split.blocks)))
        return tuple(expanded)


def evaluate_kappa(
    spec: CumulantSpec,
    mu: LatticeMeasure,
    functions: Sequence[LatticeFunction],
    check_hypotheses: bool = False,
) -> Fraction:
    if len(functions) != spec.m:
        raise ShapeMismatchError(f"{spec.label} takes {spec.m} functions, {len(functions)} supplied")
    if check_hypotheses:
        check_inequality_hypotheses(mu, functions)
    subsets = {frozenset(block) for _, blocks in spec.terms for block in blocks}
    moments = block_moments(mu, functions, subsets)
    return combine_terms(spec.terms, moments)


def zero_sum(spec: CumulantSpec) -> int:
    """Σ_λ card D(λ) c_λ, the value of P_m at f1 = ... = fm = 1."""
    return sum(split_count(partition) * c for partition, c in spec.coeffs)


FormalKey = Tuple[Tuple[int, ...], ...]


@dataclass(frozen=True)
class FormalMomentPolynomial:
    """Integer combination of products of formal symbols E_S, S ⊆ {1..m} nonempty."""

    coefficients: Tuple[Tuple[FormalKey, int], ...]

    @classmethod
    def from_mapping(cls, mapping: Mapping[FormalKey, int]) -> 'FormalMomentPolynomial':
        return cls(tuple(sorted((key, c) for key, c in mapping.items() if c != 0)))

    @classmethod
    def from_spec(cls, spec: CumulantSpec) -> 'FormalMomentPolynomial':
        mapping: Dict[FormalKey, int] = {}
        for partition, c in spec.coeffs:
            for split in splits_of_type(partition):
                key = tuple(sorted(split.blocks))
                mapping[key] = mapping.get(key, 0) + c
        return cls.from_mapping(mapping)

    def as_dict(self) -> Dict[FormalKey, int]:
        return dict(self.coefficients)

    @property
    def is_zero(self) -> bool:
        return not self.coefficients

    def contract(self, index: int) -> 'FormalMomentPolynomial':
        """Set f_index ≡ 1: E_{S∪{index}} becomes E_S and E_{{index}} becomes 1."""
        mapping: Dict[FormalKey, int] = {}
        for key, c in self.coefficients:
            blocks = [tuple(i for i in block if i != index) for block in key]
            reduced = tuple(sorted(block for block in blocks if block))
            mapping[reduced] = mapping.get(reduced, 0) + c
        return FormalMomentPolynomial.from_mapping(mapping)

    def ratio_to(self, other: 'FormalMomentPolynomial') -> Optional[Fraction]:
        """The scalar d with self = d · other, or None when no single scalar works."""
        mine = self.as_dict()
        theirs = other.as_dict()
        if not mine:
            return Fraction(0)
        if not theirs:
            return None
        pivot = next(iter(theirs))
        d = Fraction(mine.get(pivot, 0), theirs[pivot])
        for key in set(mine) | set(theirs):
            if mine.get(key, 0) != d * theirs.get(key, 0):
                return None
        return d


class ReductionResult(NamedTuple):
    holds: bool
    d: Optional[Fraction]


def reduction_check(m: int, kind: str) -> ReductionResult:
    """Does P_m(f1..f_{m-1}, 1) equal d · P_{m-1}(f1..f_{m-1}) for one scalar d?"""
    if m < 3:
        raise FkgError(f"reduction needs m >= 3, got {m}")
    if m > MAX_PARTITION_WEIGHT:
        raise CapExceededError(f"m={m} exceeds FKG_MAX_PARTITION_WEIGHT={MAX_PARTITION_WEIGHT}")
    contracted = FormalMomentPolynomial.from_spec(CumulantSpec.of_kind(m, kind)).contract(m)
    target = FormalMomentPolynomial.from_spec(CumulantSpec.of_kind(m - 1, kind))
    d = contracted.ratio_to(target)
    logger.info("Reduction check: kind=%s m=%s d=%s", kind, m, d)
    return ReductionResult(d is not None, d)


def reduction_against(spec: CumulantSpec, previous: CumulantSpec) -> ReductionResult:
    """Same test for arbitrary specs of consecutive orders."""
    if previous.m != spec.m - 1:
        raise FkgError(f"orders {spec.m} and {previous.m} are not consecutive")
    contracted = FormalMomentPolynomial.from_spec(spec).contract(spec.m)
    d = contracted.ratio_to(FormalMomentPolynomial.from_spec(previous))
    return ReductionResult(d is not None, d)


def all_ones(mu: LatticeMeasure, m: int) -> List[LatticeFunction]:
    return [LatticeFunction.constant(mu.shape, 1) for _ in range(m)]
