"""Monomial-sign certificates for the inductive step of the higher-order FKG inequalities.

On a two-point fiber with weights ω₁ (top) and ω₂ (bottom) and function
values u_i (top), v_i (bottom), every block product expands to
p_λ(u;v) = (ω₁+ω₂)^{m−l(λ)} Σ_{splits} ∏_S (ω₁∏_{i∈S}u_i + ω₂∏_{i∈S}v_i),
so Φ(u;v) = Σ c_λ p_λ(u;v) equals (ω₁+ω₂)^m times the family evaluated on
that fiber. Substituting u ← u+v and finding no negative coefficient proves
Φ ≥ 0 whenever the top values dominate the bottom ones.
"""
from __future__ import annotations

import itertools
import logging
import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Any, Dict, List, Sequence, Tuple

from django.conf import settings
from sympy.polys.domains import QQ
from sympy.polys.rings import PolyElement, PolyRing, ring

from .cumulant_utils import CumulantSpec, zero_sum
from .errors import CapExceededError, FkgError
from .partition_utils import Partition, splits_of_type
from .serialization_utils import format_rational

logger = logging.getLogger(__name__)

MAX_CERTIFICATE_ORDER = getattr(settings, 'FKG_MAX_CERTIFICATE_ORDER', 7)

Exponents = Tuple[int, ...]
Monomial = Tuple[Exponents, Fraction]

DUPLICATE_VARIABLES = ('v1', 'v2', 'v3', 'd1', 'd2', 'd3', 'e1', 'e2', 'e3')


def _to_fraction(coefficient: Any) -> Fraction:
    value = QQ.to_sympy(coefficient)
    return Fraction(int(value.p), int(value.q))


def _to_domain(value: Fraction) -> Any:
    value = Fraction(value)
    return QQ(value.numerator, value.denominator)


@lru_cache(maxsize=None)
def fiber_ring(m: int) -> PolyRing:
    names = ['w1', 'w2'] + [f'u{i}' for i in range(1, m + 1)] + [f'v{i}' for i in range(1, m + 1)]
    return ring(','.join(names), QQ)[0]


@lru_cache(maxsize=None)
def duplicate_ring() -> PolyRing:
    return ring(','.join(DUPLICATE_VARIABLES), QQ)[0]


def _graded_lex_key(exponents: Exponents) -> Tuple[int, Exponents]:
    return sum(exponents), exponents


@dataclass(frozen=True, eq=False)
class SymPolynomial:
    """Exact sparse polynomial; sympy's ring element keeps no zero coefficients."""

    variables: Tuple[str, ...]
    poly: PolyElement

    def terms(self) -> List[Monomial]:
        """Monomials in descending graded-lexicographic order."""
        items = [(tuple(exponents), _to_fraction(c)) for exponents, c in self.poly.items()]
        items.sort(key=lambda item: _graded_lex_key(item[0]), reverse=True)
        return items

    def coefficients(self) -> Dict[Exponents, Fraction]:
        return dict(self.terms())

    def evaluate(self, values: Sequence[Fraction]) -> Fraction:
        if len(values) != len(self.variables):
            raise FkgError(f"expected {len(self.variables)} values, got {len(values)}")
        total = Fraction(0)
        for exponents, c in self.terms():
            term = c
            for value, power in zip(values, exponents):
                if power:
                    term *= Fraction(value) ** power
            total += term
        return total

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SymPolynomial):
            return NotImplemented
        return self.variables == other.variables and self.poly == other.poly

    def __len__(self) -> int:
        return len(self.poly)


@dataclass(frozen=True)
class Certificate:
    label: str
    m: int
    variables: Tuple[str, ...]
    monomials: Tuple[Monomial, ...]
    offending: Tuple[Monomial, ...]
    coefficients: Tuple[int, ...] = ()
    checks: Tuple[Tuple[str, bool], ...] = field(default_factory=tuple)

    @property
    def passed(self) -> bool:
        return not self.offending and all(ok for _, ok in self.checks)

    @property
    def monomial_count(self) -> int:
        return len(self.monomials)

    def text(self) -> str:
        lines = [
            f"certificate {self.label}",
            f"variables {' '.join(self.variables)}",
            f"status {'PASS' if self.passed else 'FAIL'}",
            f"monomials {self.monomial_count}",
        ]
        lines.extend(_monomial_line(monomial) for monomial in self.monomials)
        if self.offending:
            lines.append(f"offending {len(self.offending)}")
            lines.extend(_monomial_line(monomial) for monomial in self.offending)
        for name, ok in self.checks:
            lines.append(f"check {name} {'PASS' if ok else 'FAIL'}")
        return '\n'.join(lines) + '\n'


def _monomial_line(monomial: Monomial) -> str:
    exponents, c = monomial
    return f"({', '.join(str(e) for e in exponents)}): {format_rational(c)}"


def _require_order(m: int) -> None:
    if m < 1:
        raise FkgError(f"m must be at least 1, got {m}")
    if m > MAX_CERTIFICATE_ORDER:
        raise CapExceededError(f"m={m} exceeds FKG_MAX_CERTIFICATE_ORDER={MAX_CERTIFICATE_ORDER}")


def _p_poly(partition: Partition, m: int, top: Sequence[PolyElement], bottom: Sequence[PolyElement]) -> PolyElement:
    R = fiber_ring(m)
    w1, w2 = R.gens[0], R.gens[1]
    total = R.zero
    for split in splits_of_type(partition):
        term = R.one
        for block in split.blocks:
            upper = w1
            lower = w2
            for i in block:
                upper *= top[i - 1]
                lower *= bottom[i - 1]
            term *= upper + lower
        total += term
    return (w1 + w2) ** (m - partition.length) * total


def _u_and_v(m: int) -> Tuple[Tuple[PolyElement, ...], Tuple[PolyElement, ...]]:
    gens = fiber_ring(m).gens
    return gens[2:2 + m], gens[2 + m:2 + 2 * m]


def _variables(m: int) -> Tuple[str, ...]:
    return tuple(str(g) for g in fiber_ring(m).gens)


def build_p_poly(partition: Partition, m: int) -> SymPolynomial:
    _require_order(m)
    if partition.weight != m:
        raise FkgError(f"partition {partition} does not have weight {m}")
    u, v = _u_and_v(m)
    return SymPolynomial(_variables(m), _p_poly(partition, m, u, v))


def _phi(spec: CumulantSpec, shifted: bool) -> PolyElement:
    _require_order(spec.m)
    R = fiber_ring(spec.m)
    u, v = _u_and_v(spec.m)
    top = tuple(a + b for a, b in zip(u, v)) if shifted else u
    total = R.zero
    for partition, c in spec.coeffs:
        if c:
            total += _p_poly(partition, spec.m, top, v) * c
    return total


def build_phi(spec: CumulantSpec) -> SymPolynomial:
    return SymPolynomial(_variables(spec.m), _phi(spec, shifted=False))


def shifted_phi(spec: CumulantSpec) -> SymPolynomial:
    """Φ(u+v; v), fully expanded."""
    return SymPolynomial(_variables(spec.m), _phi(spec, shifted=True))


def v_free_slice(polynomial: SymPolynomial, m: int) -> List[Monomial]:
    """Monomials with no v factor, i.e. the expansion at v = 0."""
    return [(e, c) for e, c in polynomial.terms() if not any(e[2 + m:])]


def certify(spec: CumulantSpec) -> Certificate:
    logger.info("Starting certificate: %s", spec.label)
    expansion = shifted_phi(spec)
    monomials = tuple(expansion.terms())
    offending = tuple(monomial for monomial in monomials if monomial[1] < 0)
    certificate = Certificate(
        label=spec.label,
        m=spec.m,
        variables=expansion.variables,
        monomials=monomials,
        offending=offending,
        coefficients=spec.vector,
    )
    logger.info(
        "Completed certificate: %s status=%s monomials=%s offending=%s",
        spec.label,
        'pass' if certificate.passed else 'fail',
        certificate.monomial_count,
        len(offending),
    )
    return certificate


def phi_on_diagonal(spec: CumulantSpec) -> SymPolynomial:
    """zero_sum · (ω₁+ω₂)^m · v₁···v_m, the value Φ(v;v) must collapse to."""
    R = fiber_ring(spec.m)
    w1, w2 = R.gens[0], R.gens[1]
    _, v = _u_and_v(spec.m)
    product = R.one
    for gen in v:
        product *= gen
    return SymPolynomial(_variables(spec.m), (w1 + w2) ** spec.m * product * zero_sum(spec))


# Three-point symmetrization for three functions. A point is the triple of
# function values (f1(x), f2(x), f3(x)); entries may be numbers or ring elements.

def integrand(a: Sequence, b: Sequence, c: Sequence):
    return (
        2 * a[0] * a[1] * a[2]
        - (a[0] * a[1] * b[2] + a[0] * b[1] * a[2] + b[0] * a[1] * a[2])
        + a[0] * b[1] * c[2]
    )


def symmetrized_integrand(x1: Sequence, x2: Sequence, x3: Sequence):
    points = (x1, x2, x3)
    total = 0
    for order in itertools.permutations(range(3)):
        total = total + integrand(*(points[i] for i in order))
    return total


def twelve_term_form(x1: Sequence, x2: Sequence, x3: Sequence):
    """Sum of twelve products, each nonnegative when x1 ⪯ x2 ⪯ x3 and the f_j are increasing."""
    f1 = (x1[0], x2[0], x3[0])
    f2 = (x1[1], x2[1], x3[1])
    f3 = (x1[2], x2[2], x3[2])
    return (
        f3[0] * (f1[2] - f1[0]) * (f2[2] - f2[0])
        + f1[2] * (f2[2] - f2[0]) * (f3[2] - f3[0])
        + f2[0] * (f1[2] - f1[0]) * (f3[2] - f3[0])
        + f3[0] * (f1[1] - f1[0]) * (f2[1] - f2[0])
        + f1[1] * (f2[1] - f2[0]) * (f3[1] - f3[0])
        + f2[0] * (f1[1] - f1[0]) * (f3[1] - f3[0])
        + f1[2] * (f2[2] - f2[1]) * (f3[2] - f3[1])
        + f3[1] * (f1[2] - f1[1]) * (f2[2] - f2[1])
        + f2[2] * (f1[2] - f1[1]) * (f3[2] - f3[1])
        + (f1[2] - f1[1]) * (f2[1] - f2[0]) * (f3[2] - f3[1])
        + (f1[2] - f1[0]) * (f2[2] - f2[1]) * (f3[2] - f3[1])
        + (f1[2] - f1[1]) * (f2[2] - f2[1]) * (f3[1] - f3[0])
    )


def _chain_points(values: Sequence) -> Tuple[Tuple, Tuple, Tuple]:
    """Function values at x1 ⪯ x2 ⪯ x3 from base values v and increments d, e."""
    v, d, e = values[0:3], values[3:6], values[6:9]
    x1 = tuple(v)
    x2 = tuple(v[j] + d[j] for j in range(3))
    x3 = tuple(v[j] + d[j] + e[j] for j in range(3))
    return x1, x2, x3


def duplicate_variables_certify(samples: int = 100, seed: int = 0) -> Certificate:
    R = duplicate_ring()
    points = _chain_points(R.gens)
    expansion = SymPolynomial(DUPLICATE_VARIABLES, symmetrized_integrand(*points))
    display = SymPolynomial(DUPLICATE_VARIABLES, twelve_term_form(*points))
    monomials = tuple(expansion.terms())
    offending = tuple(monomial for monomial in monomials if monomial[1] < 0)

    rng = random.Random(seed)
    agreed = 0
    for _ in range(samples):
        values = [Fraction(rng.randint(-20, 20), rng.randint(1, 9)) for _ in DUPLICATE_VARIABLES]
        numeric = _chain_points(values)
        if symmetrized_integrand(*numeric) == twelve_term_form(*numeric) == expansion.evaluate(values):
            agreed += 1

    return Certificate(
        label='J(x1,x2,x3) increment basis',
        m=3,
        variables=DUPLICATE_VARIABLES,
        monomials=monomials,
        offending=offending,
        checks=(
            ('twelve-term-identity', expansion == display),
            (f'random-assignments-{samples}', agreed == samples),
        ),
    )
