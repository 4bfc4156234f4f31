import random
from dataclasses import replace
from fractions import Fraction

from django.test import SimpleTestCase, tag

from fkg.cumulant_utils import CumulantSpec, evaluate_kappa
from fkg.errors import FkgError, OrderingError, WitnessMismatchError
from fkg.lattice_utils import LatticeFunction, LatticeMeasure, LatticeShape, is_mtp2
from fkg.verifier_utils import (
    CASE_ORDERS,
    CERTIFICATE,
    EXPLICIT,
    INDICATOR_MIXTURE,
    INDICATOR_R2,
    UNIFORM,
    InstanceGenConfig,
    Witness,
    coefficient_feasibility,
    coefficient_threshold_check,
    derive_seed,
    gap_difference,
    generate_instance,
    indicator_case_eval,
    indicator_cov_decomposition,
    merge_sweep_reports,
    nested_indicator_bound,
    ordering_case,
    replay,
    run_trials,
    sweep,
)


class InstanceGenerationTests(SimpleTestCase):
    def test_same_trial_same_instance(self):
        cfg = InstanceGenConfig(LatticeShape((2, 3)), seed=42)
        first = generate_instance(cfg, 7)
        second = generate_instance(cfg, 7)
        self.assertEqual(first[0], second[0])
        self.assertEqual(first[1], second[1])
        self.assertNotEqual(first[0], generate_instance(cfg, 8)[0])

    def test_seed_derivation_is_stable(self):
        self.assertEqual(derive_seed(0, 0), derive_seed(0, 0))
        self.assertNotEqual(derive_seed(0, 1), derive_seed(1, 0))

    def test_generated_measures_are_mtp2(self):
        for mode in (INDICATOR_MIXTURE, 'increment-sum'):
            cfg = InstanceGenConfig(LatticeShape((3, 2, 2)), seed=1, function_mode=mode)
            for trial in range(10):
                mu, functions = generate_instance(cfg, trial)
                self.assertTrue(is_mtp2(mu))
                self.assertTrue(all(f.is_nonnegative() for f in functions))

    def test_exchangeable_measure_is_symmetric(self):
        cfg = InstanceGenConfig(LatticeShape((3, 3)), seed=2, exchangeable=True)
        mu, _ = generate_instance(cfg, 0)
        for coords in mu.shape.coords_table:
            swapped = (coords[1], coords[0])
            self.assertEqual(mu.weights[mu.shape.rank(coords)], mu.weights[mu.shape.rank(swapped)])

    def test_allow_negative_shifts_below_zero(self):
        cfg = InstanceGenConfig(LatticeShape((2, 2)), seed=3, allow_negative=True)
        _, functions = generate_instance(cfg, 0)
        self.assertTrue(all(max(f.values) == 0 for f in functions))

    def test_explicit_mode(self):
        shape = LatticeShape((2,))
        mu = LatticeMeasure(shape, (1, 3))
        f = LatticeFunction(shape, (0, 1))
        cfg = InstanceGenConfig(shape, measure_mode=EXPLICIT, function_mode=EXPLICIT,
                                n_functions=1, explicit_measure=mu, explicit_functions=(f,))
        generated, functions = generate_instance(cfg, 5)
        self.assertEqual(generated.weights, (Fraction(1, 4), Fraction(3, 4)))
        self.assertEqual(functions, [f])

    def test_config_validation(self):
        with self.assertRaises(FkgError):
            InstanceGenConfig(LatticeShape((2, 2)), measure_mode='gaussian')
        with self.assertRaises(FkgError):
            InstanceGenConfig(LatticeShape((2, 3)), exchangeable=True)
        with self.assertRaises(FkgError):
            InstanceGenConfig(LatticeShape((2,)), seed=-1)

    def test_config_payload(self):
        cfg = InstanceGenConfig(LatticeShape((2, 2, 2)), seed=9, measure_mode=UNIFORM)
        self.assertEqual(InstanceGenConfig.from_payload(cfg.to_payload()), cfg)


class SweepTests(SimpleTestCase):
    def setUp(self):
        self.cfg = InstanceGenConfig(LatticeShape((2, 2, 2)), seed=0)

    def test_conjugate_sweep_passes(self):
        report = sweep(CumulantSpec.conjugate(3), self.cfg, 60)
        self.assertTrue(report.passed)
        self.assertEqual(report.trials_run, 60)
        self.assertIsNone(report.witness)
        self.assertGreaterEqual(report.minimum, 0)

    def test_negative_spec_yields_replayable_witness(self):
        spec = CumulantSpec.from_vector(2, [-1, 0])
        report = sweep(spec, self.cfg, 40, search=True)
        self.assertEqual(report.violations, 1)
        self.assertEqual(report.trials_run, report.witness.trial + 1)
        self.assertEqual(replay(report.witness), report.witness.value)
        self.assertLess(report.witness.value, 0)

    def test_chunked_sweep_matches_single_pass(self):
        spec = CumulantSpec.cumulant(3)
        whole = sweep(spec, self.cfg, 30)
        parts = [run_trials(spec, self.cfg, start, stop) for start, stop in ((20, 30), (0, 7), (7, 20))]
        self.assertEqual(merge_sweep_reports(parts).to_payload(), whole.to_payload())

    def test_trials_must_be_positive(self):
        with self.assertRaises(FkgError):
            sweep(CumulantSpec.conjugate(3), self.cfg, 0)

    def test_tampered_witness_is_rejected(self):
        mu, functions = generate_instance(self.cfg, 0)
        spec = CumulantSpec.conjugate(3)
        value = evaluate_kappa(spec, mu, functions)
        witness = Witness(spec, mu, tuple(functions), value + 1, "κ'_3 ≥ 0")
        with self.assertRaises(WitnessMismatchError):
            replay(witness)
        self.assertEqual(replay(replace(witness, value=value)), value)

    def test_witness_payload(self):
        mu, functions = generate_instance(self.cfg, 1)
        spec = CumulantSpec.conjugate(3)
        witness = Witness(spec, mu, tuple(functions), evaluate_kappa(spec, mu, functions), "κ'_3 ≥ 0", seed=0, trial=1)
        self.assertEqual(Witness.from_payload(witness.to_payload()), witness)

    @tag('slow')
    def test_conjugate_orders_three_to_five_across_shapes(self):
        shapes = ((2, 2, 2), (2, 2, 2, 2), (2, 2, 2, 2, 2), (3, 3), (4, 4, 4))
        for lengths in shapes:
            cfg = InstanceGenConfig(LatticeShape(lengths), seed=0)
            for m in (3, 4, 5):
                report = sweep(CumulantSpec.conjugate(m), cfg, 1000)
                self.assertTrue(report.passed, f"m={m} shape={lengths}")
                self.assertEqual(report.trials_run, 1000)


class GapTests(SimpleTestCase):
    def test_first_parameter_set(self):
        value = gap_difference((1, 2, 3), (1, 2, 3), (4, 5, 6), (Fraction(1, 10), Fraction(2, 10), Fraction(3, 10)))
        self.assertEqual(value, Fraction(231603, 3200))

    def test_second_parameter_set(self):
        self.assertEqual(gap_difference(*((1, 2, 3),) * 4), Fraction(3884, 75))

    def test_zero_parameters(self):
        self.assertEqual(gap_difference(*((0, 0, 0),) * 4), 0)

    def test_negative_parameter_rejected(self):
        with self.assertRaises(FkgError):
            gap_difference((1, 2, -3), (0, 0, 0), (0, 0, 0), (0, 0, 0))


class IndicatorTests(SimpleTestCase):
    def setUp(self):
        self.cfg = InstanceGenConfig(LatticeShape((4, 4)), seed=6)

    def test_every_case_matches_direct_value(self):
        rng = random.Random(0)
        for trial in range(6):
            mu, _ = generate_instance(self.cfg, trial)
            for case, order in CASE_ORDERS.items():
                a = sorted(rng.randrange(4) for _ in range(3))
                levels = sorted(rng.randrange(4) for _ in range(3))
                b = [0, 0, 0]
                for position, index in enumerate(order):
                    b[index] = levels[position]
                result = indicator_case_eval(mu, a, b, case)
                self.assertEqual(result.closed_form, result.direct, f"case {case}")

    def test_displayed_sixth_case_is_off_by_rho_difference(self):
        mu, _ = generate_instance(self.cfg, 0)
        result = indicator_case_eval(mu, (0, 1, 2), (3, 2, 1))
        self.assertEqual(result.case, 6)
        self.assertEqual(result.printed - result.direct, result.rho[2][2] - result.rho[2][0])

    def test_case_detection_and_ordering_errors(self):
        self.assertEqual(ordering_case((0, 1, 2)), 1)
        self.assertEqual(ordering_case((2, 1, 0)), 6)
        mu, _ = generate_instance(self.cfg, 0)
        with self.assertRaises(OrderingError):
            indicator_case_eval(mu, (2, 1, 0), (0, 0, 0))
        with self.assertRaises(OrderingError):
            indicator_case_eval(mu, (0, 1, 2), (2, 1, 0), case=1)

    def test_covariance_split(self):
        for trial in range(8):
            mu, _ = generate_instance(self.cfg, trial)
            crossing = indicator_cov_decomposition(mu, 1, 2, 3, 1)
            self.assertTrue(crossing.agrees)
            self.assertGreaterEqual(crossing.determinant, 0)
            nested = indicator_cov_decomposition(mu, 1, 2, 1, 3)
            self.assertTrue(nested.agrees)
            self.assertIsNone(nested.determinant)

    def test_determinant_vanishes_for_product_measure(self):
        split = indicator_cov_decomposition(LatticeMeasure.uniform(LatticeShape((4, 4))), 0, 3, 3, 0)
        self.assertEqual(split.determinant, 0)


class FeasibilityTests(SimpleTestCase):
    def test_threshold_witness_at_c1_one(self):
        analysis = coefficient_threshold_check(1, trials=1)
        self.assertEqual(analysis.witness_value, Fraction(-47709, 500000))
        self.assertTrue(analysis.bound_attained)
        self.assertEqual(replay(analysis.witness), analysis.witness_value)

    def test_no_violation_at_c1_two(self):
        analysis = coefficient_threshold_check(2, trials=2)
        self.assertEqual(analysis.violations, 0)
        self.assertIsNone(analysis.witness)
        self.assertGreaterEqual(analysis.witness_value, analysis.witness_bound)

    def test_bound_formula(self):
        pi = (Fraction(1, 2), Fraction(1, 4), Fraction(1, 3))
        self.assertEqual(nested_indicator_bound(pi), Fraction(1, 12))

    def test_certificate_search_rediscovers_conjugate_vector(self):
        search = coefficient_feasibility(3, CERTIFICATE, box=3)
        self.assertIn((2, -1, 1), search.found)
        self.assertEqual(search.candidates, 216)

    def test_modes_validated(self):
        with self.assertRaises(FkgError):
            coefficient_feasibility(3, 'simplex')
        with self.assertRaises(FkgError):
            coefficient_feasibility(4, INDICATOR_R2)
