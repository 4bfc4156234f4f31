import random
from fractions import Fraction
from pathlib import Path

from django.test import SimpleTestCase, tag

from fkg.certificate_utils import (
    build_p_poly,
    build_phi,
    certify,
    duplicate_variables_certify,
    phi_on_diagonal,
    shifted_phi,
    symmetrized_integrand,
    twelve_term_form,
    v_free_slice,
)
from fkg.cumulant_utils import CumulantSpec, evaluate_kappa
from fkg.errors import CapExceededError, FkgError
from fkg.lattice_utils import LatticeFunction, LatticeMeasure, LatticeShape
from fkg.partition_utils import Partition

GOLDEN = Path(__file__).resolve().parent / 'golden'


class GoldenCertificateTests(SimpleTestCase):
    def test_order_two(self):
        certificate = certify(CumulantSpec.conjugate(2))
        self.assertEqual(certificate.text(), (GOLDEN / 'conjugate_m2.txt').read_text(encoding='utf-8'))

    def test_order_three(self):
        certificate = certify(CumulantSpec.conjugate(3))
        self.assertTrue(certificate.passed)
        self.assertEqual(certificate.text(), (GOLDEN / 'conjugate_m3.txt').read_text(encoding='utf-8'))


class CertificateTests(SimpleTestCase):
    def test_order_four_passes(self):
        certificate = certify(CumulantSpec.conjugate(4))
        self.assertTrue(certificate.passed)
        self.assertEqual(certificate.offending, ())

    @tag('slow')
    def test_order_five_passes(self):
        self.assertTrue(certify(CumulantSpec.conjugate(5)).passed)

    def test_plain_cumulant_fails(self):
        certificate = certify(CumulantSpec.cumulant(3))
        self.assertFalse(certificate.passed)
        self.assertIn('status FAIL', certificate.text())
        self.assertIn('offending', certificate.text())

    def test_custom_vector_off_zero_sum_fails(self):
        self.assertFalse(certify(CumulantSpec.from_vector(3, [1, -1, 1])).passed)

    def test_phi_matches_two_point_evaluation(self):
        spec = CumulantSpec.conjugate(3)
        phi = build_phi(spec)
        shape = LatticeShape((2,))
        rng = random.Random(4)
        for _ in range(20):
            top = Fraction(rng.randint(1, 9), 10)
            values = [[Fraction(rng.randint(0, 9), rng.randint(1, 4)) for _ in range(2)] for _ in range(3)]
            mu = LatticeMeasure(shape, (1 - top, top))
            functions = [LatticeFunction(shape, tuple(pair)) for pair in values]
            point = [top, 1 - top] + [pair[1] for pair in values] + [pair[0] for pair in values]
            self.assertEqual(phi.evaluate(point), evaluate_kappa(spec, mu, functions))

    def test_diagonal_collapses_to_zero_sum(self):
        spec = CumulantSpec.conjugate(3)
        phi = build_phi(spec)
        diagonal = phi_on_diagonal(spec)
        rng = random.Random(8)
        for _ in range(10):
            w = [Fraction(rng.randint(1, 5)) for _ in range(2)]
            v = [Fraction(rng.randint(0, 5)) for _ in range(3)]
            point = w + v + v
            self.assertEqual(phi.evaluate(point), diagonal.evaluate(point))

    def test_v_free_slice_vanishes_after_shift(self):
        # v = 0 leaves the bottom values at zero, so every surviving monomial has a u factor.
        spec = CumulantSpec.conjugate(3)
        for exponents, _ in v_free_slice(shifted_phi(spec), 3):
            self.assertTrue(any(exponents[2:5]))

    def test_shifted_expansion_is_nonnegative_at_random_points(self):
        spec = CumulantSpec.conjugate(4)
        expansion = shifted_phi(spec)
        rng = random.Random(2)
        for _ in range(25):
            point = [Fraction(rng.randint(0, 12), rng.randint(1, 5)) for _ in expansion.variables]
            self.assertGreaterEqual(expansion.evaluate(point), 0)

    def test_p_poly_degree(self):
        poly = build_p_poly(Partition((2, 1)), 3)
        self.assertTrue(all(sum(exponents) == 6 for exponents, _ in poly.terms()))
        with self.assertRaises(FkgError):
            build_p_poly(Partition((2, 1)), 4)

    def test_order_cap(self):
        with self.assertRaises(CapExceededError):
            certify(CumulantSpec.conjugate(8))


class DuplicateVariablesTests(SimpleTestCase):
    def test_certificate_passes(self):
        certificate = duplicate_variables_certify(samples=30, seed=1)
        self.assertTrue(certificate.passed)
        self.assertEqual(dict(certificate.checks)['twelve-term-identity'], True)

    def test_twelve_term_form_on_a_chain(self):
        x1, x2, x3 = (1, 0, 2), (3, 1, 2), (4, 5, 7)
        self.assertEqual(symmetrized_integrand(x1, x2, x3), twelve_term_form(x1, x2, x3))
        self.assertGreaterEqual(twelve_term_form(x1, x2, x3), 0)
