import itertools
import random
from fractions import Fraction

from django.test import SimpleTestCase

from fkg.application_utils import (
    DET,
    DOWN,
    RANK,
    UP,
    ApplicationRunnerFactory,
    FamilyOfSubsets,
    RankingSpace,
    RationalMatrix,
    bernstein_check,
    eigen_correlation_check,
    enumerate_down_sets,
    enumerate_up_sets,
    exchangeable_bound_check,
    geometric_kernel,
    iid_measure,
    kleitman_check,
    logconvex_check,
    psd_measure,
    psd_measure_check,
    random_exchangeable_measure,
    random_team_events,
    ranking_monotonicity,
    team_cumulants,
    triangle_hadamard_check,
    triangle_violation,
    up_set_inequality_gap,
)
from fkg.cumulant_utils import CUMULANT
from fkg.errors import (
    CapExceededError,
    ClosureError,
    ContradictionError,
    ExchangeabilityError,
    FkgError,
    HypothesisError,
    LogConvexityError,
    NormalizationError,
    PositiveDefinitenessError,
    TriangleError,
)
from fkg.lattice_utils import LatticeMeasure, LatticeShape, is_mtp2
from fkg.report_utils import CHECK_FAIL, CHECK_NOTE, CHECK_PASS, INCONCLUSIVE, PASS

IDENTITY = ['0', '1/2', '1']


class BernsteinTests(SimpleTestCase):
    def test_identity_function_at_one_half(self):
        instance = bernstein_check(2, Fraction(1, 2), [IDENTITY] * 3)
        self.assertEqual(instance.value, Fraction(3, 16))
        self.assertTrue(instance.agrees)

    def test_random_sequences_agree_and_stay_nonnegative(self):
        rng = random.Random(0)
        for _ in range(10):
            n = rng.randint(1, 4)
            x = Fraction(rng.randint(0, 10), 10)
            sequences = [sorted(Fraction(rng.randint(0, 9), 3) for _ in range(n + 1)) for _ in range(3)]
            instance = bernstein_check(n, x, sequences)
            self.assertTrue(instance.agrees)
            self.assertGreaterEqual(instance.value, 0)

    def test_cumulant_kind_still_agrees(self):
        self.assertTrue(bernstein_check(3, Fraction(1, 3), [[0, 1, 2, 3]] * 3, CUMULANT).agrees)

    def test_inputs_validated(self):
        with self.assertRaises(FkgError):
            bernstein_check(2, Fraction(3, 2), [IDENTITY] * 3)
        with self.assertRaises(HypothesisError):
            bernstein_check(2, Fraction(1, 2), [IDENTITY, IDENTITY, ['1', '0', '0']])
        with self.assertRaises(FkgError):
            bernstein_check(2, Fraction(1, 2), [IDENTITY])


class LogConvexTests(SimpleTestCase):
    def test_geometric_weights(self):
        a = [Fraction(8, 15), Fraction(4, 15), Fraction(2, 15), Fraction(1, 15)]
        instance = logconvex_check(a, [[0, 1, 1, 2], [0, 0, 1, 3], [1, 1, 2, 2]])
        self.assertTrue(instance.agrees)
        self.assertTrue(is_mtp2(instance.measure))
        self.assertGreaterEqual(instance.value, 0)

    def test_not_log_convex(self):
        with self.assertRaises(LogConvexityError):
            logconvex_check([Fraction(1, 6), Fraction(2, 3), Fraction(1, 6)], [[0, 1, 2]] * 3)

    def test_weights_must_sum_to_one(self):
        with self.assertRaises(NormalizationError):
            logconvex_check([Fraction(1, 2), Fraction(1, 2), Fraction(1, 2)], [[0, 1, 2]] * 3)


class UpSetTests(SimpleTestCase):
    def test_up_set_counts(self):
        self.assertEqual([len(enumerate_up_sets(n)) for n in range(1, 5)], [3, 6, 20, 168])
        with self.assertRaises(CapExceededError):
            enumerate_up_sets(5)

    def test_down_sets_are_down_closed(self):
        self.assertTrue(all(family.is_down_closed() for family in enumerate_down_sets(3)))

    def test_closure_tags_are_checked(self):
        with self.assertRaises(ClosureError):
            FamilyOfSubsets.from_subsets(2, [[1]], UP)
        with self.assertRaises(ClosureError):
            FamilyOfSubsets.from_subsets(2, [[1, 2]], DOWN)
        with self.assertRaises(FkgError):
            FamilyOfSubsets.from_subsets(2, [[3]])

    def test_subsets_listing(self):
        family = FamilyOfSubsets.from_subsets(2, [[2], [1, 2]], UP)
        self.assertEqual(family.subsets(), [[2], [1, 2]])
        self.assertEqual(len(family.complement()), 2)

    def test_single_point_example(self):
        up = FamilyOfSubsets.from_subsets(1, [[1]], UP)
        down = FamilyOfSubsets.from_subsets(1, [[]], DOWN)
        result = kleitman_check(up, up, down)
        self.assertEqual(result.value, 3)
        self.assertTrue(result.agrees)

    def test_all_families_on_two_elements(self):
        ups, downs = enumerate_up_sets(2), enumerate_down_sets(2)
        for u1, u2, down in itertools.product(ups, ups, downs):
            result = kleitman_check(u1, u2, down)
            self.assertTrue(result.agrees)
            self.assertGreaterEqual(result.value, 0)

    def test_second_order_gap_on_three_elements(self):
        for up, down in itertools.product(enumerate_up_sets(3), enumerate_down_sets(3)):
            self.assertGreaterEqual(up_set_inequality_gap(up, down), 0)

    def test_full_family_reduces_to_second_order(self):
        everything = FamilyOfSubsets.everything(3)
        for up, down in itertools.product(enumerate_up_sets(3)[::3], enumerate_down_sets(3)[::3]):
            self.assertEqual(kleitman_check(up, everything, down).value, 8 * up_set_inequality_gap(up, down))

    def test_wrong_closure_rejected(self):
        up = FamilyOfSubsets.everything(2)
        with self.assertRaises(ClosureError):
            kleitman_check(up, up, up)


class MatrixTests(SimpleTestCase):
    def test_geometric_kernel_has_triangle_property(self):
        R = geometric_kernel(4, Fraction(1, 2))
        self.assertEqual(R.total(), 1)
        self.assertIsNone(triangle_violation(R))

    def test_hadamard_route_agrees(self):
        R = geometric_kernel(3, Fraction(1, 3))
        F = RationalMatrix(((0, 1, 1), (1, 1, 2), (1, 2, 3)))
        G = RationalMatrix(((0, 0, 1), (0, 1, 1), (1, 1, 4)))
        result = triangle_hadamard_check(R, [F, G, F])
        self.assertTrue(result.mtp2)
        self.assertTrue(result.instance.agrees)
        self.assertGreaterEqual(result.instance.value, 0)
        self.assertGreaterEqual(result.second_order, 0)

    def test_triangle_failure(self):
        R = RationalMatrix(((Fraction(1, 10), Fraction(1, 10), Fraction(1, 5)),
                            (Fraction(1, 10), Fraction(1, 10), Fraction(1, 10)),
                            (Fraction(1, 10), Fraction(1, 10), Fraction(1, 10))))
        F = RationalMatrix(((0, 0, 0), (0, 0, 0), (0, 0, 1)))
        with self.assertRaises(TriangleError):
            triangle_hadamard_check(R, [F, F, F])

    def test_two_by_two_triangle_does_not_imply_mtp2(self):
        R = RationalMatrix(((0, Fraction(1, 2)), (Fraction(1, 2), 0)))
        F = RationalMatrix(((0, 0), (0, 1)))
        self.assertIsNone(triangle_violation(R))
        self.assertFalse(triangle_hadamard_check(R, [F, F, F]).mtp2)
        report = ApplicationRunnerFactory.get_runner('matrix').run({
            'R': [['0', '1/2'], ['1/2', '0']],
            'functions': [[['0', '0'], ['0', '1']]] * 3,
        })
        self.assertEqual(report.checks[0].status, CHECK_FAIL)
        self.assertEqual(report.checks[1].status, CHECK_NOTE)
        self.assertEqual(report.outcome, INCONCLUSIVE)

    def test_decreasing_matrix_rejected(self):
        R = geometric_kernel(2, 1)
        with self.assertRaises(HypothesisError):
            triangle_hadamard_check(R, [RationalMatrix(((1, 0), (0, 0)))] * 3)


class PsdTests(SimpleTestCase):
    def test_principal_minors(self):
        M = RationalMatrix(((2, 1), (1, 2)))
        self.assertEqual(M.det([0, 1]), 3)
        self.assertEqual(M.det([]), 1)
        self.assertTrue(M.is_positive_definite())
        self.assertFalse(RationalMatrix(((0, 0), (0, -1))).is_positive_semidefinite())
        self.assertTrue(RationalMatrix(((1, 1), (1, 1))).is_positive_semidefinite())

    def test_integer_exponent_is_exact(self):
        M = RationalMatrix(((2, 1, 0), (1, 2, 1), (0, 1, 2)))
        result = psd_measure_check(M, 2, DET)
        self.assertTrue(result.exact)
        self.assertEqual(result.mtp2_status, CHECK_PASS)
        self.assertEqual(result.value_status, CHECK_PASS)

    def test_fractional_exponent_uses_floats(self):
        _, exact = psd_measure(RationalMatrix(((2, 1), (1, 2))), Fraction(1, 2), DET)
        self.assertFalse(exact)

    def test_rank_measure_needs_t_at_least_one(self):
        M = RationalMatrix(((1, 1), (1, 1)))
        self.assertEqual(psd_measure_check(M, 2, RANK).mtp2_status, CHECK_PASS)
        self.assertEqual(psd_measure_check(M, Fraction(1, 2), RANK).mtp2_status, CHECK_FAIL)

    def test_definiteness_required(self):
        with self.assertRaises(PositiveDefinitenessError):
            psd_measure(RationalMatrix(((1, 2), (2, 1))), 1, DET)
        with self.assertRaises(PositiveDefinitenessError):
            psd_measure(RationalMatrix(((1, 2), (2, 1))), 1, RANK)

    def test_eigenvalue_correlation(self):
        result = eigen_correlation_check(RationalMatrix(((2, 1), (1, 2))), 1)
        self.assertEqual(result.status, CHECK_PASS)
        self.assertGreater(result.value, 0)
        self.assertTrue(result.trace_increasing)
        self.assertTrue(result.lambda_min_decreasing)
        self.assertTrue(result.inverse_lambda_max_decreasing)


class RankingTests(SimpleTestCase):
    def test_single_players(self):
        result = ranking_monotonicity(1, 1, [], [('a1', 'b1')])
        self.assertEqual((result.before, result.after), (Fraction(1, 2), Fraction(1)))

    def test_extra_cross_relations_raise_the_probability(self):
        result = ranking_monotonicity(2, 2, [('a1', 'a2')], [('a2', 'b2')])
        self.assertTrue(result.holds)
        self.assertGreater(result.after, result.before)

    def test_team_cumulant_bounds(self):
        space = RankingSpace(2, 2)
        rng = random.Random(5)
        for _ in range(15):
            cumulants = team_cumulants(space, random_team_events(rng, 2, 2))
            self.assertLessEqual(cumulants.sharper, 0)
            self.assertLessEqual(cumulants.printed, cumulants.sharper)

    def test_contradiction(self):
        space = RankingSpace(1, 1)
        with self.assertRaises(ContradictionError):
            space.probability([('a1', 'b1')], [('a1', 'b1'), ('b1', 'a1')])

    def test_team_shape_enforced(self):
        with self.assertRaises(FkgError):
            ranking_monotonicity(1, 1, [('a1', 'b1')], [])
        with self.assertRaises(FkgError):
            ranking_monotonicity(2, 1, [], [('b1', 'a1')])
        with self.assertRaises(CapExceededError):
            RankingSpace(5, 5)


class ExchangeableTests(SimpleTestCase):
    def test_iid_gives_zero(self):
        mu = iid_measure(4, [Fraction(1, 2), Fraction(1, 3), Fraction(1, 6)])
        result = exchangeable_bound_check(mu, 0, 1)
        self.assertEqual(result.sharper, 0)
        self.assertEqual(result.instance.value, 0)

    def test_random_exchangeable_measures(self):
        for trial in range(6):
            mu = random_exchangeable_measure(4, 2, seed=1, trial=trial)
            result = exchangeable_bound_check(mu, 0, 2)
            self.assertTrue(result.instance.agrees)
            self.assertLessEqual(result.sharper, 0)
            self.assertLessEqual(result.printed, result.sharper)

    def test_non_exchangeable_rejected(self):
        mu = LatticeMeasure.from_callable(LatticeShape((2, 2, 2)), lambda c: 1 + c[0])
        with self.assertRaises(ExchangeabilityError):
            exchangeable_bound_check(mu, 0, 1)

    def test_order_range(self):
        with self.assertRaises(FkgError):
            exchangeable_bound_check(iid_measure(3, [1, 1]), 0, 2)


class RunnerTests(SimpleTestCase):
    def test_factory(self):
        self.assertEqual(
            sorted(ApplicationRunnerFactory.RUNNERS),
            ['bernstein', 'exchangeable', 'kleitman', 'logconvex', 'matrix', 'psd', 'ranking'],
        )
        with self.assertRaises(FkgError):
            ApplicationRunnerFactory.get_runner('permanent')

    def test_bernstein_runner(self):
        report = ApplicationRunnerFactory.get_runner('bernstein').run({'n': 2, 'x': '1/2', 'functions': [IDENTITY] * 3})
        self.assertEqual(report.outcome, PASS)
        self.assertEqual(report.command, 'apps bernstein')
        self.assertEqual(report.payload['value'], Fraction(3, 16))

    def test_kleitman_random_runner(self):
        report = ApplicationRunnerFactory.get_runner('kleitman').run({'n': 3, 'draws': 40, 'seed': 2})
        self.assertEqual(report.outcome, PASS)
        self.assertEqual(report.payload['up_sets'], 20)

    def test_psd_runner_with_eigen(self):
        report = ApplicationRunnerFactory.get_runner('psd').run({'M': [['2', '1'], ['1', '2']], 't': 1, 'eigen': True})
        self.assertEqual(report.outcome, PASS)

    def test_rank_runner_below_one_is_inconclusive(self):
        report = ApplicationRunnerFactory.get_runner('psd').run({'M': [['1', '1'], ['1', '1']], 't': '1/2', 'kind': RANK})
        self.assertEqual(report.outcome, INCONCLUSIVE)

    def test_ranking_runner(self):
        report = ApplicationRunnerFactory.get_runner('ranking').run({
            'm': 2, 'n': 2, 'theta': [['a1', 'a2']], 'theta_extra': [['a2', 'b2']],
            'events': [[['a1', 'b1']], [['a2', 'b2']], [['a1', 'b2']], []],
        })
        self.assertEqual(report.outcome, PASS)

    def test_exchangeable_runner(self):
        report = ApplicationRunnerFactory.get_runner('exchangeable').run({
            'iid': {'n': 3, 'marginal': ['1/3', '2/3']}, 'a': 0, 'm': 1,
        })
        self.assertEqual(report.outcome, PASS)
