from fkg.claim_utils import (
    CLAIMS,
    duplicate_variables_report,
    feasibility_report,
    identities_report,
)
from fkg.cli_utils import ReportCommand


class Command(ReportCommand):
    help = "Reproduce the published statements around the third-order inequality"

    def add_command_arguments(self, parser):
        parser.add_argument('claim', choices=sorted(CLAIMS))
        parser.add_argument('--trials', type=int, help='Random instances to check')
        parser.add_argument('--seed', type=int, default=0)
        parser.add_argument('--m', type=int, default=3, help='Order for the feasibility search')
        parser.add_argument('--box', type=int, default=3, help='Coefficient bound for the feasibility search')

    def report_name(self, **options):
        return f"claims {options.get('claim', '')}".strip()

    def build_report(self, **options):
        claim = options['claim']
        trials = options.get('trials')
        if claim == 'identities':
            return identities_report()
        if claim == 'feasibility':
            return feasibility_report(options['m'], options['box'])
        if claim == 'duplicate-variables':
            extra = {'instances': trials} if trials else {}
            return duplicate_variables_report(seed=options['seed'], **extra)
        extra = {'trials': trials} if trials else {}
        return CLAIMS[claim](seed=options['seed'], **extra)
