import json
import tempfile
from fractions import Fraction
from pathlib import Path

from django.test import SimpleTestCase

from fkg.cumulant_utils import CONJUGATE, CUSTOM, CumulantSpec
from fkg.errors import InstanceFormatError
from fkg.lattice_utils import LatticeMeasure, LatticeShape
from fkg.partition_utils import Partition
from fkg.report_utils import JSON, TEXT, Check, Report, emit_report
from fkg.serialization_utils import (
    dumps,
    format_rational,
    function_from_payload,
    load_json_file,
    measure_from_payload,
    parse_rational,
    shape_from_text,
    spec_from_payload,
    spec_to_payload,
    to_jsonable,
)


class RationalTests(SimpleTestCase):
    def test_format(self):
        self.assertEqual(format_rational(Fraction(-6, 4)), '-3/2')
        self.assertEqual(format_rational(2), '2/1')

    def test_parse(self):
        self.assertEqual(parse_rational('3/9'), Fraction(1, 3))
        self.assertEqual(parse_rational(' -2 '), Fraction(-2))
        self.assertEqual(parse_rational(5), Fraction(5))

    def test_rejects_floats_and_garbage(self):
        for raw in (0.5, '1.5', '1/0', 'a/b', True, None):
            with self.assertRaises(InstanceFormatError, msg=repr(raw)):
                parse_rational(raw, 'x')

    def test_error_carries_path(self):
        with self.assertRaises(InstanceFormatError) as caught:
            measure_from_payload({'shape': [2, 2], 'weights': ['1', '1', 'x', '1']})
        self.assertIn('weights[2]', str(caught.exception))


class PayloadTests(SimpleTestCase):
    def test_measure_payload(self):
        mu = measure_from_payload({'shape': [2, 3], 'weights': ['1/6'] * 6})
        self.assertEqual(mu, LatticeMeasure.uniform(LatticeShape((2, 3))))

    def test_measure_payload_errors(self):
        with self.assertRaises(InstanceFormatError):
            measure_from_payload({'shape': [2, 2], 'weights': ['1', '1', '1']})
        with self.assertRaises(InstanceFormatError):
            measure_from_payload({'shape': [2, 2], 'weights': ['1', '1', '1', '-1']})
        with self.assertRaises(InstanceFormatError):
            measure_from_payload({'shape': [1], 'weights': ['1']})
        with self.assertRaises(InstanceFormatError):
            measure_from_payload({'weights': ['1']})

    def test_bare_function_values_need_a_shape(self):
        shape = LatticeShape((2,))
        self.assertEqual(function_from_payload(['0', '1'], 'f', shape).values, (0, 1))
        with self.assertRaises(InstanceFormatError):
            function_from_payload(['0', '1'], 'f')

    def test_spec_payload(self):
        spec = CumulantSpec.conjugate(4)
        self.assertEqual(spec_from_payload(spec_to_payload(spec)), spec)
        self.assertEqual(spec_from_payload({'m': 3, 'kind': CONJUGATE}), CumulantSpec.conjugate(3))

    def test_custom_spec_payload(self):
        spec = spec_from_payload({'m': 2, 'coeffs': [{'lambda': [2], 'c': 3}, {'lambda': [1, 1], 'c': -3}]})
        self.assertEqual(spec.kind, CUSTOM)
        self.assertEqual(spec.coeff_map[Partition((1, 1))], -3)

    def test_spec_payload_errors(self):
        with self.assertRaises(InstanceFormatError):
            spec_from_payload({'m': 0})
        with self.assertRaises(InstanceFormatError):
            spec_from_payload({'m': 2, 'coeffs': [{'lambda': [2], 'c': 1}]})
        with self.assertRaises(InstanceFormatError):
            spec_from_payload({'m': 2, 'coeffs': [{'lambda': [1, 2], 'c': 1}, {'lambda': [2], 'c': 1}]})
        with self.assertRaises(InstanceFormatError):
            spec_from_payload({'m': 2, 'kind': 'moments'})

    def test_shape_text(self):
        self.assertEqual(shape_from_text('2,3, 2').chain_lengths, (2, 3, 2))
        with self.assertRaises(InstanceFormatError):
            shape_from_text('2,x')
        with self.assertRaises(InstanceFormatError):
            shape_from_text('')

    def test_load_json_file(self):
        with tempfile.TemporaryDirectory() as directory:
            good = Path(directory) / 'good.json'
            good.write_text(json.dumps({'m': 3}), encoding='utf-8')
            self.assertEqual(load_json_file(str(good)), {'m': 3})
            bad = Path(directory) / 'bad.json'
            bad.write_text('{"m": ', encoding='utf-8')
            with self.assertRaises(InstanceFormatError):
                load_json_file(str(bad))
            with self.assertRaises(InstanceFormatError):
                load_json_file(str(Path(directory) / 'missing.json'))


class RenderingTests(SimpleTestCase):
    def test_to_jsonable(self):
        self.assertEqual(to_jsonable({'v': Fraction(1, 2), 'p': Partition((2, 1))}), {'v': '1/2', 'p': [2, 1]})
        self.assertEqual(to_jsonable(frozenset({2, 1})), [1, 2])
        with self.assertRaises(TypeError):
            to_jsonable(object())

    def test_dumps_is_sorted(self):
        self.assertEqual(dumps({'b': 1, 'a': Fraction(3)}), '{\n  "a": "3/1",\n  "b": 1\n}')

    def test_report_renderings(self):
        report = Report(
            command='certify',
            checks=[Check.of("κ'_2 ≥ 0", True, 'FKG inequality', Fraction(1, 4))],
            payload={'monomials': 1},
        )
        text = emit_report(report, TEXT)
        self.assertIn('outcome: pass', text)
        self.assertIn("κ'_2 ≥ 0: PASS (FKG inequality)", text)
        self.assertIn('value: 1/4', text)
        payload = json.loads(emit_report(report, JSON))
        self.assertEqual(payload['outcome'], 'pass')
        self.assertEqual(payload['checks'][0]['value'], '1/4')
        self.assertNotIn('timing', payload)

    def test_outcome_rules(self):
        failing = Check('x', 'FAIL')
        self.assertEqual(Report('c', checks=[failing]).outcome, 'inconclusive')
        self.assertEqual(Report('c', checks=[failing], witness={'value': '-1/1'}).outcome, 'violation')
        self.assertEqual(Report('c', checks=[Check('x', 'NOTE')]).outcome, 'pass')
        self.assertEqual(Report('c', checks=[Check('x', 'INCONCLUSIVE')]).exit_code, 3)
        self.assertEqual(Report.failure('c', 'boom').exit_code, 2)
