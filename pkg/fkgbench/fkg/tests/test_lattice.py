from fractions import Fraction

from django.test import SimpleTestCase, tag

from fkg.cumulant_utils import CumulantSpec, evaluate_kappa
from fkg.errors import CapExceededError, FkgError, HypothesisError, NormalizationError, ShapeMismatchError
from fkg.lattice_utils import (
    LatticeFunction,
    LatticeMeasure,
    LatticeShape,
    block_moments,
    condition,
    expectation,
    inductive_gap,
    is_increasing,
    is_mtp2,
    marginalize,
    mtp2_violation,
)
from fkg.verifier_utils import InstanceGenConfig, generate_instance


class LatticeShapeTests(SimpleTestCase):
    def test_boolean_lattice_ranks_follow_bits(self):
        shape = LatticeShape.boolean(3)
        self.assertEqual(shape.size, 8)
        self.assertEqual(shape.rank((1, 0, 1)), 5)
        self.assertEqual(shape.coords_table[6], (0, 1, 1))

    def test_covers_of_square(self):
        self.assertEqual(sorted(LatticeShape((2, 2)).covers()), [(0, 1), (0, 2), (1, 3), (2, 3)])

    def test_join_and_meet(self):
        shape = LatticeShape((3, 3))
        r, s = shape.rank((2, 0)), shape.rank((0, 1))
        self.assertEqual(shape.coords_table[shape.join_rank(r, s)], (2, 1))
        self.assertEqual(shape.coords_table[shape.meet_rank(r, s)], (0, 0))
        self.assertFalse(shape.precedes(r, s))

    def test_short_chain_rejected(self):
        with self.assertRaises(FkgError):
            LatticeShape((2, 1))

    def test_size_cap(self):
        with self.assertRaises(CapExceededError):
            LatticeShape((2,) * 17)


class MeasureTests(SimpleTestCase):
    def test_uniform_and_product_measures_are_mtp2(self):
        shape = LatticeShape((3, 2))
        self.assertTrue(is_mtp2(LatticeMeasure.uniform(shape)))
        product = LatticeMeasure.from_callable(shape, lambda c: Fraction(c[0] + 1) * Fraction(2 * c[1] + 1))
        self.assertTrue(is_mtp2(product))

    def test_antidiagonal_mass_is_not_mtp2(self):
        mu = LatticeMeasure(LatticeShape((2, 2)), (0, Fraction(1, 2), Fraction(1, 2), 0))
        x, y = mtp2_violation(mu)
        self.assertEqual({x.coords, y.coords}, {(1, 0), (0, 1)})

    def test_negative_weight_rejected(self):
        with self.assertRaises(FkgError):
            LatticeMeasure(LatticeShape((2,)), (1, -1))

    def test_expectation_needs_normalized_measure(self):
        shape = LatticeShape((2,))
        with self.assertRaises(NormalizationError):
            expectation(LatticeMeasure(shape, (1, 1)), LatticeFunction.constant(shape, 1))

    def test_northeast_indicator_expectation(self):
        shape = LatticeShape((3, 3))
        f = LatticeFunction.northeast_indicator(shape, (1, 1))
        self.assertEqual(expectation(LatticeMeasure.uniform(shape), f), Fraction(4, 9))
        self.assertTrue(is_increasing(f))
        self.assertFalse(is_increasing(f.complement()))

    def test_block_moments_cover_every_subset(self):
        shape = LatticeShape.boolean(2)
        mu = LatticeMeasure.uniform(shape)
        f = LatticeFunction(shape, (0, 1, 1, 2))
        moments = block_moments(mu, [f, f])
        self.assertEqual(moments[frozenset({0})], 1)
        self.assertEqual(moments[frozenset({0, 1})], Fraction(3, 2))

    def test_shape_mismatch(self):
        mu = LatticeMeasure.uniform(LatticeShape((2, 2)))
        with self.assertRaises(ShapeMismatchError):
            expectation(mu, LatticeFunction.constant(LatticeShape((4,)), 1))


class ConditioningTests(SimpleTestCase):
    def setUp(self):
        self.cfg = InstanceGenConfig(LatticeShape((2, 3, 2)), seed=11)

    def test_tower_property(self):
        for trial in range(20):
            mu, (f, _, _) = generate_instance(self.cfg, trial)
            for subset in mu.shape.all_coord_subsets():
                marginal = marginalize(mu, subset)
                self.assertEqual(expectation(marginal, condition(f, mu, subset)), expectation(mu, f))

    def test_marginals_stay_mtp2(self):
        for trial in range(20):
            mu, _ = generate_instance(self.cfg, trial)
            for subset in mu.shape.all_coord_subsets():
                self.assertTrue(is_mtp2(marginalize(mu, subset)), f"trial {trial} subset {sorted(subset)}")

    def test_gap_at_empty_subset_is_kappa(self):
        spec = CumulantSpec.conjugate(3)
        for trial in range(20):
            mu, functions = generate_instance(self.cfg, trial)
            self.assertEqual(inductive_gap(mu, functions, frozenset()), evaluate_kappa(spec, mu, functions))

    def test_gap_at_full_subset_vanishes(self):
        mu, functions = generate_instance(self.cfg, 0)
        self.assertEqual(inductive_gap(mu, functions, frozenset(range(3))), 0)

    def test_gap_checks_hypotheses(self):
        mu, functions = generate_instance(self.cfg, 0)
        decreasing = LatticeFunction.northeast_indicator(mu.shape, (1, 1, 1)).complement()
        with self.assertRaises(HypothesisError):
            inductive_gap(mu, [decreasing, functions[1], functions[2]], frozenset())

    @tag('slow')
    def test_gap_nonnegative_for_every_subset(self):
        cfg = InstanceGenConfig(LatticeShape((2, 2, 2)), seed=5)
        for trial in range(500):
            mu, functions = generate_instance(cfg, trial)
            for subset in mu.shape.all_coord_subsets():
                self.assertGreaterEqual(inductive_gap(mu, functions, subset, check_hypotheses=False), 0)
