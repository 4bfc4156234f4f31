"""Exact random instances, property sweeps and replayable witnesses.

Also home to the fixed-instance analyses of the third-order inequality:
the four-point gap instance, the closed forms for three northeast
indicators on a two-coordinate grid, the covariance split for two of them,
and the coefficient-feasibility searches.
"""
from __future__ import annotations

import hashlib
import itertools
import logging
import math
import random
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

from django.conf import settings

from .certificate_utils import certify, shifted_phi
from .cumulant_utils import CONJUGATE, CumulantSpec, ReductionResult, evaluate_kappa, reduction_against, zero_sum
from .errors import CapExceededError, FkgError, InstanceFormatError, OrderingError, ShapeMismatchError, WitnessMismatchError
from .lattice_utils import (
    CoordSubset,
    LatticeFunction,
    LatticeMeasure,
    LatticeShape,
    expectation,
    inductive_gap,
    is_increasing,
    is_mtp2,
    to_fraction,
)
from .partition_utils import enumerate_partitions
from .serialization_utils import (
    format_rational,
    function_to_payload,
    functions_from_payload,
    measure_from_payload,
    measure_to_payload,
    parse_rational,
    parse_shape,
    spec_from_payload,
    spec_to_payload,
)

logger = logging.getLogger(__name__)

MAX_WEIGHT_BITS = getattr(settings, 'FKG_MAX_WEIGHT_BITS', 4096)
MAX_FEASIBILITY_CANDIDATES = getattr(settings, 'FKG_FEASIBILITY_MAX_CANDIDATES', 200000)

PAIRWISE_POTENTIAL = 'pairwise-potential'
UNIFORM = 'uniform'
EXPLICIT = 'explicit'
MEASURE_MODES = (PAIRWISE_POTENTIAL, UNIFORM, EXPLICIT)

INCREMENT_SUM = 'increment-sum'
INDICATOR_MIXTURE = 'indicator-mixture'
FUNCTION_MODES = (INCREMENT_SUM, INDICATOR_MIXTURE, EXPLICIT)


# ---------------------------------------------------------------------------
# Instance generation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class InstanceGenConfig:
    """Everything that determines a stream of random instances.

    ``value_bound`` caps generated function values, ``potential_bound`` caps
    the pairwise couplings z_ij, and every random rational has denominator
    dividing ``denominator``.
    """

    shape: LatticeShape
    seed: int = 0
    measure_mode: str = PAIRWISE_POTENTIAL
    function_mode: str = INCREMENT_SUM
    n_functions: int = 3
    value_bound: Fraction = Fraction(10)
    potential_bound: Fraction = Fraction(3)
    denominator: int = 4
    allow_negative: bool = False
    exchangeable: bool = False
    explicit_measure: Optional[LatticeMeasure] = None
    explicit_functions: Tuple[LatticeFunction, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, 'value_bound', to_fraction(self.value_bound))
        object.__setattr__(self, 'potential_bound', to_fraction(self.potential_bound))
        object.__setattr__(self, 'explicit_functions', tuple(self.explicit_functions))
        if self.measure_mode not in MEASURE_MODES:
            raise FkgError(f"unknown measure mode '{self.measure_mode}', expected one of {', '.join(MEASURE_MODES)}")
        if self.function_mode not in FUNCTION_MODES:
            raise FkgError(f"unknown function mode '{self.function_mode}', expected one of {', '.join(FUNCTION_MODES)}")
        if not 0 <= self.seed < 2 ** 64:
            raise FkgError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.shape.n == 0:
            raise ShapeMismatchError("instances need at least one coordinate")
        if self.n_functions < 1:
            raise FkgError("n_functions must be at least 1")
        if self.value_bound <= 0:
            raise FkgError("value_bound must be positive")
        if self.potential_bound < 1:
            raise FkgError("potential_bound must be at least 1")
        if self.denominator < 1:
            raise FkgError("denominator must be at least 1")
        if self.exchangeable and len(set(self.shape.chain_lengths)) != 1:
            raise FkgError("an exchangeable measure needs equal chain lengths")
        if self.measure_mode == EXPLICIT:
            if self.explicit_measure is None:
                raise FkgError("measure mode 'explicit' needs an explicit measure")
            if self.explicit_measure.shape != self.shape:
                raise ShapeMismatchError("explicit measure shape differs from the configured shape")
        if self.function_mode == EXPLICIT:
            if len(self.explicit_functions) != self.n_functions:
                raise FkgError(
                    f"function mode 'explicit' needs {self.n_functions} functions, got {len(self.explicit_functions)}"
                )
            if any(f.shape != self.shape for f in self.explicit_functions):
                raise ShapeMismatchError("explicit function shape differs from the configured shape")

    def for_order(self, m: int) -> 'InstanceGenConfig':
        if self.n_functions == m:
            return self
        return replace(self, n_functions=m)

    def to_payload(self) -> Dict[str, Any]:
        return {
            'shape': list(self.shape.chain_lengths),
            'seed': self.seed,
            'measure_mode': self.measure_mode,
            'function_mode': self.function_mode,
            'n_functions': self.n_functions,
            'value_bound': format_rational(self.value_bound),
            'potential_bound': format_rational(self.potential_bound),
            'denominator': self.denominator,
            'allow_negative': self.allow_negative,
            'exchangeable': self.exchangeable,
            'explicit_measure': None if self.explicit_measure is None else measure_to_payload(self.explicit_measure),
            'explicit_functions': [function_to_payload(f) for f in self.explicit_functions],
        }

    @classmethod
    def from_payload(cls, payload: Dict[str, Any], path: str = 'config') -> 'InstanceGenConfig':
        if not isinstance(payload, dict):
            raise InstanceFormatError(path, "expected a JSON object")
        shape = parse_shape(payload.get('shape'), f"{path}.shape")
        explicit_measure = payload.get('explicit_measure')
        raw_functions = payload.get('explicit_functions') or []
        try:
            return cls(
                shape=shape,
                seed=int(payload.get('seed', 0)),
                measure_mode=payload.get('measure_mode', PAIRWISE_POTENTIAL),
                function_mode=payload.get('function_mode', INCREMENT_SUM),
                n_functions=int(payload.get('n_functions', 3)),
                value_bound=parse_rational(payload.get('value_bound', '10'), f"{path}.value_bound"),
                potential_bound=parse_rational(payload.get('potential_bound', '3'), f"{path}.potential_bound"),
                denominator=int(payload.get('denominator', 4)),
                allow_negative=bool(payload.get('allow_negative', False)),
                exchangeable=bool(payload.get('exchangeable', False)),
                explicit_measure=(
                    None if explicit_measure is None
                    else measure_from_payload(explicit_measure, f"{path}.explicit_measure")
                ),
                explicit_functions=tuple(
                    functions_from_payload(raw_functions, f"{path}.explicit_functions", shape) if raw_functions else ()
                ),
            )
        except (TypeError, ValueError) as exc:
            if isinstance(exc, InstanceFormatError):
                raise
            raise InstanceFormatError(path, str(exc))


def derive_seed(seed: int, trial: int) -> int:
    """Per-trial stream seed; depends only on (seed, trial), never on run order."""
    digest = hashlib.sha256(f"{seed}:{trial}".encode('ascii')).digest()
    return int.from_bytes(digest[:8], 'big')


def _random_rational(rng: random.Random, low: Fraction, high: Fraction, denominator: int) -> Fraction:
    lo = math.ceil(Fraction(low) * denominator)
    hi = math.floor(Fraction(high) * denominator)
    return Fraction(rng.randint(lo, hi), denominator)


def _guard_bits(weights: Sequence[Fraction]) -> None:
    for index, w in enumerate(weights):
        bits = max(w.numerator.bit_length(), w.denominator.bit_length())
        if bits > MAX_WEIGHT_BITS:
            raise CapExceededError(
                f"weights[{index}] needs {bits} bits, above FKG_MAX_WEIGHT_BITS={MAX_WEIGHT_BITS}"
            )


def pairwise_potential_measure(cfg: InstanceGenConfig, rng: random.Random) -> LatticeMeasure:
    """μ(x) ∝ ∏_i φ_i(x_i) · ∏_{i<j} z_ij^(x_i·x_j) with rational z_ij ≥ 1.

    x_i·x_j is supermodular on a product of chains, so every such μ is MTP₂.
    """
    shape = cfg.shape
    lengths = shape.chain_lengths
    pairs = list(itertools.combinations(range(shape.n), 2))

    def factor() -> Fraction:
        return _random_rational(rng, Fraction(1), Fraction(4), cfg.denominator)

    def coupling() -> Fraction:
        return _random_rational(rng, Fraction(1), cfg.potential_bound, cfg.denominator)

    if cfg.exchangeable:
        shared = [factor() for _ in range(lengths[0])]
        levels = [shared] * shape.n
        z = coupling()
        couplings = {pair: z for pair in pairs}
    else:
        levels = [[factor() for _ in range(k)] for k in lengths]
        couplings = {pair: coupling() for pair in pairs}

    def weight(coords: Tuple[int, ...]) -> Fraction:
        w = Fraction(1)
        for axis, c in enumerate(coords):
            w *= levels[axis][c]
        for (i, j), z in couplings.items():
            power = coords[i] * coords[j]
            if power:
                w *= z ** power
        return w

    mu = LatticeMeasure.from_callable(shape, weight)
    _guard_bits(mu.weights)
    return mu.normalized()


def increment_sum_function(shape: LatticeShape, rng: random.Random, bound: Fraction, denominator: int) -> LatticeFunction:
    """Each value is the largest value below it plus a nonnegative increment (zero about a third of the time)."""
    height = sum(k - 1 for k in shape.chain_lengths)
    step = bound / (height + 1)
    values: List[Fraction] = []
    for rank, coords in enumerate(shape.coords_table):
        below = [values[rank - stride] for axis, stride in enumerate(shape.strides) if coords[axis] > 0]
        base = max(below) if below else _random_rational(rng, Fraction(0), step, denominator)
        increment = Fraction(0) if rng.random() < 0.3 else _random_rational(rng, Fraction(0), step, denominator)
        values.append(base + increment)
    return LatticeFunction(shape, tuple(values))


def indicator_mixture_function(shape: LatticeShape, rng: random.Random, bound: Fraction, denominator: int) -> LatticeFunction:
    """Σ ν(a)·1{x ⪰ a} over a few random anchors a with masses ν(a) ≥ 0."""
    atoms = rng.randint(1, min(4, shape.size))
    share = bound / atoms
    values = [Fraction(0)] * shape.size
    for _ in range(atoms):
        anchor = rng.randrange(shape.size)
        mass = _random_rational(rng, Fraction(0), share, denominator)
        for rank in range(shape.size):
            if shape.precedes(anchor, rank):
                values[rank] += mass
    return LatticeFunction(shape, tuple(values))


FUNCTION_BUILDERS: Dict[str, Callable[[LatticeShape, random.Random, Fraction, int], LatticeFunction]] = {
    INCREMENT_SUM: increment_sum_function,
    INDICATOR_MIXTURE: indicator_mixture_function,
}


def generate_instance(cfg: InstanceGenConfig, trial: int = 0) -> Tuple[LatticeMeasure, List[LatticeFunction]]:
    rng = random.Random(derive_seed(cfg.seed, trial))

    if cfg.measure_mode == PAIRWISE_POTENTIAL:
        mu = pairwise_potential_measure(cfg, rng)
    elif cfg.measure_mode == UNIFORM:
        mu = LatticeMeasure.uniform(cfg.shape)
    else:
        mu = cfg.explicit_measure.normalized()

    if cfg.function_mode == EXPLICIT:
        functions = list(cfg.explicit_functions)
    else:
        build = FUNCTION_BUILDERS[cfg.function_mode]
        functions = [build(cfg.shape, rng, cfg.value_bound, cfg.denominator) for _ in range(cfg.n_functions)]
        if cfg.allow_negative:
            functions = [f.shifted(max(f.values)) for f in functions]

    if cfg.measure_mode != EXPLICIT and not is_mtp2(mu):
        raise FkgError(f"generator produced a non-MTP2 measure (seed={cfg.seed}, trial={trial})")
    if cfg.function_mode != EXPLICIT and not all(is_increasing(f) for f in functions):
        raise FkgError(f"generator produced a non-increasing function (seed={cfg.seed}, trial={trial})")
    return mu, functions


# ---------------------------------------------------------------------------
# Witnesses and sweeps
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Witness:
    spec: CumulantSpec
    measure: LatticeMeasure
    functions: Tuple[LatticeFunction, ...]
    value: Fraction
    claim: str
    seed: Optional[int] = None
    trial: Optional[int] = None

    def recompute(self) -> Fraction:
        return evaluate_kappa(self.spec, self.measure, self.functions)

    def to_payload(self) -> Dict[str, Any]:
        return {
            'type': 'witness',
            'claim': self.claim,
            'spec': spec_to_payload(self.spec),
            'measure': measure_to_payload(self.measure),
            'functions': [function_to_payload(f) for f in self.functions],
            'value': format_rational(self.value),
            'seed': self.seed,
            'trial': self.trial,
        }

    @classmethod
    def from_payload(cls, payload: Any, path: str = '') -> 'Witness':
        if not isinstance(payload, dict):
            raise InstanceFormatError(path, "expected a witness object")
        prefix = f"{path}." if path else ''
        for key in ('claim', 'spec', 'measure', 'functions', 'value'):
            if key not in payload:
                raise InstanceFormatError(f"{prefix}{key}", "missing field")
        measure = measure_from_payload(payload['measure'], f"{prefix}measure")
        for key in ('seed', 'trial'):
            raw = payload.get(key)
            if raw is not None and (isinstance(raw, bool) or not isinstance(raw, int)):
                raise InstanceFormatError(f"{prefix}{key}", f"expected an integer or null, got {raw!r}")
        return cls(
            spec=spec_from_payload(payload['spec'], f"{prefix}spec"),
            measure=measure,
            functions=tuple(functions_from_payload(payload['functions'], f"{prefix}functions", measure.shape)),
            value=parse_rational(payload['value'], f"{prefix}value"),
            claim=str(payload['claim']),
            seed=payload.get('seed'),
            trial=payload.get('trial'),
        )


def replay(witness: Witness) -> Fraction:
    """Re-evaluate a stored witness; the stored value must come back exactly."""
    recomputed = witness.recompute()
    if recomputed != witness.value:
        raise WitnessMismatchError(
            f"witness for '{witness.claim}' stores {format_rational(witness.value)}"
            f" but re-evaluates to {format_rational(recomputed)}",
            stored=witness.value,
            recomputed=recomputed,
        )
    logger.info("Replayed witness: claim=%s value=%s", witness.claim, format_rational(recomputed))
    return recomputed


@dataclass(frozen=True)
class SweepReport:
    spec: CumulantSpec
    config: InstanceGenConfig
    start: int
    stop: int
    trials_run: int
    violations: int
    minimum: Optional[Fraction]
    minimum_trial: Optional[int]
    witness: Optional[Witness] = None

    @property
    def passed(self) -> bool:
        return self.violations == 0

    @property
    def claim(self) -> str:
        return f"{self.spec.label} ≥ 0"

    def to_payload(self) -> Dict[str, Any]:
        return {
            'spec': spec_to_payload(self.spec),
            'config': self.config.to_payload(),
            'start': self.start,
            'stop': self.stop,
            'trials_run': self.trials_run,
            'violations': self.violations,
            'minimum': None if self.minimum is None else format_rational(self.minimum),
            'minimum_trial': self.minimum_trial,
            'witness': None if self.witness is None else self.witness.to_payload(),
        }

    @classmethod
    def from_payload(cls, payload: Dict[str, Any]) -> 'SweepReport':
        minimum = payload.get('minimum')
        witness = payload.get('witness')
        return cls(
            spec=spec_from_payload(payload['spec'], 'spec'),
            config=InstanceGenConfig.from_payload(payload['config']),
            start=int(payload['start']),
            stop=int(payload['stop']),
            trials_run=int(payload['trials_run']),
            violations=int(payload['violations']),
            minimum=None if minimum is None else parse_rational(minimum, 'minimum'),
            minimum_trial=payload.get('minimum_trial'),
            witness=None if witness is None else Witness.from_payload(witness, 'witness'),
        )


def run_trials(spec: CumulantSpec, cfg: InstanceGenConfig, start: int, stop: int, search: bool = False) -> SweepReport:
    """Evaluate trials ``start..stop-1``; with ``search`` stop at the first violation."""
    cfg = cfg.for_order(spec.m)
    claim = f"{spec.label} ≥ 0"
    trials_run = 0
    violations = 0
    minimum: Optional[Fraction] = None
    minimum_trial: Optional[int] = None
    witness: Optional[Witness] = None

    for trial in range(start, stop):
        mu, functions = generate_instance(cfg, trial)
        value = evaluate_kappa(spec, mu, functions)
        trials_run += 1
        if minimum is None or value < minimum:
            minimum, minimum_trial = value, trial
        if value < 0:
            violations += 1
            if witness is None:
                witness = Witness(spec, mu, tuple(functions), value, claim, seed=cfg.seed, trial=trial)
                logger.info("Violation of %s at trial %s: %s", claim, trial, format_rational(value))
            if search:
                break

    return SweepReport(spec, cfg, start, stop, trials_run, violations, minimum, minimum_trial, witness)


def merge_sweep_reports(parts: Sequence[SweepReport]) -> SweepReport:
    """Combine chunk reports; the result does not depend on the order chunks finished in."""
    if not parts:
        raise FkgError("no sweep chunks to merge")
    parts = sorted(parts, key=lambda part: part.start)
    minimum: Optional[Fraction] = None
    minimum_trial: Optional[int] = None
    for part in parts:
        if part.minimum is None:
            continue
        if minimum is None or part.minimum < minimum:
            minimum, minimum_trial = part.minimum, part.minimum_trial
    witnesses = [part.witness for part in parts if part.witness is not None]
    witness = min(witnesses, key=lambda w: w.trial) if witnesses else None
    return SweepReport(
        spec=parts[0].spec,
        config=parts[0].config,
        start=parts[0].start,
        stop=parts[-1].stop,
        trials_run=sum(part.trials_run for part in parts),
        violations=sum(part.violations for part in parts),
        minimum=minimum,
        minimum_trial=minimum_trial,
        witness=witness,
    )


def sweep(spec: CumulantSpec, cfg: InstanceGenConfig, trials: int, search: bool = False) -> SweepReport:
    if trials < 1:
        raise FkgError(f"trials must be at least 1, got {trials}")
    logger.info(
        "Starting sweep: %s shape=%s trials=%s seed=%s search=%s",
        spec.label, cfg.shape.chain_lengths, trials, cfg.seed, search,
    )
    report = run_trials(spec, cfg, 0, trials, search=search)
    logger.info(
        "Completed sweep: %s trials_run=%s violations=%s",
        spec.label, report.trials_run, report.violations,
    )
    return report


# ---------------------------------------------------------------------------
# Gap monotonicity on the four-point lattice
# ---------------------------------------------------------------------------

# Ranks of 2^{w,z}: 0 = ∅, 1 = {w}, 2 = {z}, 3 = {w,z}; coordinate 0 is w.
GAP_WEIGHTS = (Fraction(1, 2), Fraction(1, 8), Fraction(1, 8), Fraction(1, 4))
W_COORDINATE = 0


def _gap_triple(raw: Sequence, name: str) -> Tuple[Fraction, ...]:
    values = tuple(to_fraction(v) for v in raw)
    if len(values) != 3:
        raise FkgError(f"{name} needs 3 entries, got {len(values)}")
    for index, v in enumerate(values):
        if v < 0:
            raise FkgError(f"{name}[{index}]: parameters must be nonnegative, got {v}")
    return values


def gap_instance(alpha: Sequence, beta: Sequence, gamma: Sequence, delta: Sequence) -> Tuple[LatticeMeasure, List[LatticeFunction]]:
    """f_i = α_i, α_i+β_i, α_i+γ_i, α_i+β_i+γ_i+δ_i at ∅, {w}, {z}, {w,z}."""
    a, b, c, d = (
        _gap_triple(values, name)
        for values, name in ((alpha, 'alpha'), (beta, 'beta'), (gamma, 'gamma'), (delta, 'delta'))
    )
    shape = LatticeShape.boolean(2)
    mu = LatticeMeasure(shape, GAP_WEIGHTS)
    functions = [
        LatticeFunction(shape, (a[i], a[i] + b[i], a[i] + c[i], a[i] + b[i] + c[i] + d[i]))
        for i in range(3)
    ]
    return mu, functions


def gap_difference(alpha: Sequence, beta: Sequence, gamma: Sequence, delta: Sequence) -> Fraction:
    """g(∅) − g({w}) for the four-point instance; g(∅) is κ'_3 itself."""
    mu, functions = gap_instance(alpha, beta, gamma, delta)
    return (
        inductive_gap(mu, functions, frozenset())
        - inductive_gap(mu, functions, frozenset({W_COORDINATE}))
    )


@dataclass(frozen=True)
class GapIncrease:
    """An instance where enlarging the conditioning set raises the gap."""

    measure: LatticeMeasure
    functions: Tuple[LatticeFunction, ...]
    subset: CoordSubset
    added: int
    lower: Fraction
    upper: Fraction
    trial: int

    def to_payload(self) -> Dict[str, Any]:
        return {
            'measure': measure_to_payload(self.measure),
            'functions': [function_to_payload(f) for f in self.functions],
            'subset': sorted(self.subset),
            'added': self.added,
            'gap_before': format_rational(self.lower),
            'gap_after': format_rational(self.upper),
            'trial': self.trial,
        }


def gap_monotonicity_search(cfg: InstanceGenConfig, trials: int) -> Optional[GapIncrease]:
    """Look for B ⊂ B ∪ {i} with g(B) < g(B ∪ {i}) on random MTP₂ instances."""
    cfg = cfg.for_order(3)
    subsets = cfg.shape.all_coord_subsets()
    for trial in range(trials):
        mu, functions = generate_instance(cfg, trial)
        gaps = {subset: inductive_gap(mu, functions, subset, check_hypotheses=False) for subset in subsets}
        for subset in subsets:
            for added in range(cfg.shape.n):
                if added in subset:
                    continue
                larger = subset | {added}
                if gaps[larger] > gaps[subset]:
                    logger.info("Gap increases at trial %s: %s + %s", trial, sorted(subset), added)
                    return GapIncrease(mu, tuple(functions), subset, added, gaps[subset], gaps[larger], trial)
    return None


# ---------------------------------------------------------------------------
# Northeast indicators on a two-coordinate grid
# ---------------------------------------------------------------------------

# Case k orders the second thresholds: b[order[0]] ≤ b[order[1]] ≤ b[order[2]].
CASE_ORDERS = {
    1: (0, 1, 2),
    2: (0, 2, 1),
    3: (1, 0, 2),
    4: (1, 2, 0),
    5: (2, 0, 1),
    6: (2, 1, 0),
}

RhoTable = Tuple[Tuple[Fraction, ...], ...]


def _require_grid(mu: LatticeMeasure) -> None:
    if mu.shape.n != 2:
        raise ShapeMismatchError(f"indicator analysis needs a two-coordinate grid, got shape {mu.shape.chain_lengths}")


def _require_thresholds(mu: LatticeMeasure, axis: int, thresholds: Sequence[int]) -> None:
    k = mu.shape.chain_lengths[axis]
    for t in thresholds:
        if not 0 <= t < k:
            raise FkgError(f"threshold {t} is outside 0..{k - 1} on coordinate {axis}")


def survival(mu: LatticeMeasure, a: int, b: int) -> Fraction:
    """P(X₁ ≥ a, X₂ ≥ b)."""
    return expectation(mu, LatticeFunction.northeast_indicator(mu.shape, (a, b)))


def rho_table(mu: LatticeMeasure, a: Sequence[int], b: Sequence[int]) -> RhoTable:
    """ρ[i][j] = P(X₁ ≥ a_i, X₂ ≥ b_j), 0-based."""
    return tuple(tuple(survival(mu, a_i, b_j) for b_j in b) for a_i in a)


def ordering_case(b: Sequence[int]) -> int:
    for case, order in CASE_ORDERS.items():
        if b[order[0]] <= b[order[1]] <= b[order[2]]:
            return case
    raise OrderingError(f"no ordering case matches {list(b)}")


def case_closed_form(rho: RhoTable, case: int) -> Fraction:
    r = lambda i, j: rho[i - 1][j - 1]  # noqa: E731
    if case == 1:
        return (2 - r(1, 1)) * (1 - r(2, 2)) * r(3, 3)
    if case == 2:
        return (2 - r(1, 1)) * (r(3, 2) - r(3, 3) * r(2, 2))
    if case == 3:
        return r(3, 3) * (1 - r(2, 1) + (1 - r(1, 1)) * (1 - r(2, 2)))
    if case == 4:
        return (1 - r(2, 2)) * (r(3, 1) - r(3, 3) * r(1, 1)) + r(3, 1) - r(2, 1) * r(3, 3)
    if case == 5:
        return (1 - r(1, 1)) * (r(3, 2) - r(3, 3) * r(2, 2)) + r(3, 2) - r(3, 1) * r(2, 2)
    if case == 6:
        return (1 - r(2, 2)) * (r(3, 1) - r(3, 3) * r(1, 1)) + (r(3, 1) - r(2, 1) * r(3, 3)) + r(1, 1) * (r(3, 3) - r(3, 2))
    raise FkgError(f"case must be 1..6, got {case}")


def printed_case_six(rho: RhoTable) -> Fraction:
    """The sixth closed form as usually displayed; it differs from κ'_3 by ρ₃₃ − ρ₃₁."""
    r = lambda i, j: rho[i - 1][j - 1]  # noqa: E731
    return (1 - r(2, 2)) * (r(3, 1) - r(3, 3) * r(1, 1)) + r(3, 3) * (1 - r(2, 1)) + r(1, 1) * (r(3, 3) - r(3, 2))


@dataclass(frozen=True)
class IndicatorCaseResult:
    case: int
    rho: RhoTable
    closed_form: Fraction
    direct: Fraction
    printed: Optional[Fraction] = None

    @property
    def agrees(self) -> bool:
        return self.closed_form == self.direct


def indicator_functions(mu: LatticeMeasure, a: Sequence[int], b: Sequence[int]) -> List[LatticeFunction]:
    return [LatticeFunction.northeast_indicator(mu.shape, (a_i, b_i)) for a_i, b_i in zip(a, b)]


def indicator_case_eval(mu: LatticeMeasure, a: Sequence[int], b: Sequence[int], case: Optional[int] = None) -> IndicatorCaseResult:
    """Closed form for f_j = 1{X₁ ≥ a_j, X₂ ≥ b_j} next to the direct κ'_3."""
    _require_grid(mu)
    if len(a) != 3 or len(b) != 3:
        raise FkgError("three thresholds are needed on each coordinate")
    _require_thresholds(mu, 0, a)
    _require_thresholds(mu, 1, b)
    if not a[0] <= a[1] <= a[2]:
        raise OrderingError(f"first thresholds must be nondecreasing, got {list(a)}")
    if case is None:
        case = ordering_case(b)
    elif case not in CASE_ORDERS:
        raise FkgError(f"case must be 1..6, got {case}")
    else:
        order = CASE_ORDERS[case]
        if not b[order[0]] <= b[order[1]] <= b[order[2]]:
            raise OrderingError(f"second thresholds {list(b)} do not fit case {case}")

    mu = mu.normalized()
    rho = rho_table(mu, a, b)
    direct = evaluate_kappa(CumulantSpec.conjugate(3), mu, indicator_functions(mu, a, b))
    return IndicatorCaseResult(
        case=case,
        rho=rho,
        closed_form=case_closed_form(rho, case),
        direct=direct,
        printed=printed_case_six(rho) if case == 6 else None,
    )


@dataclass(frozen=True)
class CovarianceSplit:
    covariance: Fraction
    product_term: Fraction
    determinant: Optional[Fraction] = None
    printed_product_term: Optional[Fraction] = None

    @property
    def agrees(self) -> bool:
        return self.covariance == self.product_term + (self.determinant or 0)


def indicator_cov_decomposition(mu: LatticeMeasure, a1: int, a2: int, b1: int, b2: int) -> CovarianceSplit:
    """Cov(1{X ≥ (a1,b1)}, 1{X ≥ (a2,b2)}) as a product term plus a 2×2 survival determinant.

    For b1 > b2 the determinant P(a1,b2)P(a2,b1) − P(a1,b1)P(a2,b2) is ≥ 0
    whenever μ is MTP₂, and vanishes for product measures.
    """
    _require_grid(mu)
    _require_thresholds(mu, 0, (a1, a2))
    _require_thresholds(mu, 1, (b1, b2))
    if a1 > a2:
        raise OrderingError(f"a1={a1} exceeds a2={a2}")
    mu = mu.normalized()
    f1 = LatticeFunction.northeast_indicator(mu.shape, (a1, b1))
    f2 = LatticeFunction.northeast_indicator(mu.shape, (a2, b2))
    covariance = expectation(mu, f1 * f2) - expectation(mu, f1) * expectation(mu, f2)
    P = lambda a, b: survival(mu, a, b)  # noqa: E731
    if b1 <= b2:
        return CovarianceSplit(covariance, P(a2, b2) * (1 - P(a1, b1)))
    return CovarianceSplit(
        covariance=covariance,
        product_term=P(a2, b1) * (1 - P(a1, b2)),
        determinant=P(a1, b2) * P(a2, b1) - P(a1, b1) * P(a2, b2),
        printed_product_term=P(a1, b1) * (1 - P(a1, b2)),
    )


# ---------------------------------------------------------------------------
# Coefficient feasibility
# ---------------------------------------------------------------------------

INDICATOR_R2 = 'indicator-r2'
CERTIFICATE = 'certificate'
FEASIBILITY_MODES = (INDICATOR_R2, CERTIFICATE)

# Product grid with P(X ≥ 1) = P(Y ≥ 1) = 9/10; the common northeast set has π = 81/100.
THRESHOLD_WITNESS_WEIGHTS = (Fraction(1, 100), Fraction(9, 100), Fraction(9, 100), Fraction(81, 100))


def threshold_spec(c1: int) -> CumulantSpec:
    """Third-order family (c₁, −1, 3 − c₁); c₁ = 2 is κ'_3."""
    return CumulantSpec.from_vector(3, (c1, -1, 3 - c1))


def nested_indicator_value(pi: Sequence[Fraction], c1: int) -> Fraction:
    """threshold_spec(c1) on nested northeast indicators with P(f_j = 1) = π_j."""
    p1, p2, p3 = pi
    return p3 * ((1 - p2) * (2 + (c1 - 3) * p1) + (c1 - 2) * (1 - p1))


def nested_indicator_bound(pi: Sequence[Fraction]) -> Fraction:
    """π₃(1 − π₁)(1 − 2π₂), the value at c₁ = 1 and a lower bound for every c₁ ≥ 1."""
    p1, p2, p3 = pi
    return p3 * (1 - p1) * (1 - 2 * p2)


@dataclass(frozen=True)
class ThresholdAnalysis:
    c1: int
    witness_value: Fraction
    witness_bound: Fraction
    witness: Optional[Witness]
    triples_checked: int
    violations: int
    first_violation: Optional[Witness] = None

    @property
    def bound_attained(self) -> bool:
        return self.witness_value == self.witness_bound if self.c1 == 1 else self.witness_value >= self.witness_bound


def coefficient_threshold_check(c1: int, trials: int = 8, seed: int = 0, grid: int = 3) -> ThresholdAnalysis:
    """Scan the northeast-indicator class for violations of threshold_spec(c1).

    A fixed product-grid instance with equal thresholds hits the nested
    bound exactly; ``trials`` random MTP₂ grids are then scanned over every
    threshold triple.
    """
    if c1 < 1:
        raise FkgError(f"c1 must be at least 1, got {c1}")
    spec = threshold_spec(c1)
    claim = f"{spec.label} ≥ 0 on northeast indicators"

    shape = LatticeShape((2, 2))
    mu = LatticeMeasure(shape, THRESHOLD_WITNESS_WEIGHTS)
    corner = LatticeFunction.northeast_indicator(shape, (1, 1))
    functions = (corner, corner, corner)
    pi = (expectation(mu, corner),) * 3
    value = evaluate_kappa(spec, mu, functions)
    witness = Witness(spec, mu, functions, value, claim) if value < 0 else None

    cfg = InstanceGenConfig(LatticeShape((grid, grid)), seed=seed)
    thresholds = list(itertools.product(range(grid), repeat=2))
    checked = 0
    violations = 0
    first_violation: Optional[Witness] = None
    for trial in range(trials):
        grid_mu, _ = generate_instance(cfg, trial)
        indicators = {t: LatticeFunction.northeast_indicator(grid_mu.shape, t) for t in thresholds}
        for triple in itertools.product(thresholds, repeat=3):
            fs = tuple(indicators[t] for t in triple)
            found = evaluate_kappa(spec, grid_mu, fs)
            checked += 1
            if found < 0:
                violations += 1
                if first_violation is None:
                    first_violation = Witness(spec, grid_mu, fs, found, claim, seed=seed, trial=trial)

    logger.info("Threshold scan: c1=%s triples=%s violations=%s", c1, checked, violations)
    return ThresholdAnalysis(
        c1=c1,
        witness_value=value,
        witness_bound=nested_indicator_bound(pi),
        witness=witness,
        triples_checked=checked,
        violations=violations,
        first_violation=first_violation,
    )


@dataclass(frozen=True)
class CoefficientSearch:
    m: int
    box: int
    candidates: int
    found: Tuple[Tuple[int, ...], ...]
    reductions: Tuple[Optional[ReductionResult], ...] = field(default_factory=tuple)

    def to_payload(self) -> Dict[str, Any]:
        return {
            'm': self.m,
            'box': self.box,
            'partitions': [str(p) for p in enumerate_partitions(self.m)],
            'candidates': self.candidates,
            'found': [list(vector) for vector in self.found],
            'reductions': [
                None if r is None else {'holds': r.holds, 'd': None if r.d is None else format_rational(r.d)}
                for r in self.reductions
            ],
        }


def certificate_search(m: int, box: int) -> CoefficientSearch:
    """Integer vectors with nonzero entries in [−box, box], zero sum, and a nonnegative shifted expansion.

    The shifted expansion is linear in the coefficients, so it is expanded
    once per partition and every candidate is a signed sum of those.
    """
    if m < 3:
        raise FkgError(f"feasibility search needs m >= 3, got {m}")
    if box < 1:
        raise FkgError(f"box must be at least 1, got {box}")
    partitions = enumerate_partitions(m)
    candidates = (2 * box) ** len(partitions)
    if candidates > MAX_FEASIBILITY_CANDIDATES:
        raise CapExceededError(
            f"unbounded search box: {candidates} candidates exceed"
            f" FKG_FEASIBILITY_MAX_CANDIDATES={MAX_FEASIBILITY_CANDIDATES}"
        )
    logger.info("Starting coefficient search: m=%s box=%s candidates=%s", m, box, candidates)

    basis = []
    for index in range(len(partitions)):
        unit = [0] * len(partitions)
        unit[index] = 1
        basis.append(shifted_phi(CumulantSpec.from_vector(m, unit)).coefficients())
    monomials = sorted(set().union(*basis))
    rows = [tuple(b.get(e, Fraction(0)) for b in basis) for e in monomials]

    values = [c for c in range(-box, box + 1) if c != 0]
    found = []
    for vector in itertools.product(values, repeat=len(partitions)):
        spec = CumulantSpec.from_vector(m, vector)
        if zero_sum(spec) != 0:
            continue
        if all(sum(c * x for c, x in zip(vector, row)) >= 0 for row in rows):
            found.append(vector)

    reductions: List[Optional[ReductionResult]] = []
    for vector in found:
        spec = CumulantSpec.from_vector(m, vector)
        if not certify(spec).passed:
            raise FkgError(f"search and certify disagree on {list(vector)}")
        reductions.append(reduction_against(spec, CumulantSpec.of_kind(m - 1, CONJUGATE)))

    logger.info("Completed coefficient search: m=%s found=%s", m, len(found))
    return CoefficientSearch(m, box, candidates, tuple(found), tuple(reductions))


def coefficient_feasibility(m: int, mode: str, box: int = 3, c1_values: Sequence[int] = (1, 2), trials: int = 8, seed: int = 0):
    if mode not in FEASIBILITY_MODES:
        raise FkgError(f"unknown feasibility mode '{mode}', expected one of {', '.join(FEASIBILITY_MODES)}")
    if mode == CERTIFICATE:
        return certificate_search(m, box)
    if m != 3:
        raise FkgError(f"the indicator analysis is for m = 3, got {m}")
    return [coefficient_threshold_check(c1, trials=trials, seed=seed) for c1 in c1_values]
