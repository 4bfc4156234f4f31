from fkg.certificate_utils import certify
from fkg.cli_utils import ReportCommand, load_spec
from fkg.cumulant_utils import CONJUGATE, KINDS, zero_sum
from fkg.report_utils import CHECK_NOTE, Check, Report


class Command(ReportCommand):
    help = "Expand the shifted symmetrization of a coefficient family and check every coefficient sign"

    def add_command_arguments(self, parser):
        parser.add_argument('--m', type=int, required=True, help='Order (number of functions)')
        parser.add_argument('--kind', choices=KINDS, default=CONJUGATE)
        parser.add_argument('--coeffs', help='JSON file with a custom spec or coefficient list')
        parser.add_argument('--text', action='store_true', help='Include the full certificate')

    def build_report(self, **options):
        spec = load_spec(options['m'], options['kind'], options.get('coeffs'))
        certificate = certify(spec)
        checks = [
            Check.of(
                f"{spec.label} shifted expansion has nonnegative coefficients",
                certificate.passed,
                'nonnegativity certificate',
                certificate.monomial_count,
                f"{len(certificate.offending)} negative coefficients" if certificate.offending else '',
            ),
            Check("zero_sum", CHECK_NOTE, 'constant functions', zero_sum(spec)),
        ]
        blocks = {'certificate': certificate.text()} if options.get('text') else {}
        return Report(
            command='certify',
            checks=checks,
            payload={
                'spec': spec,
                'monomials': certificate.monomial_count,
                'offending': len(certificate.offending),
            },
            blocks=blocks,
        )
