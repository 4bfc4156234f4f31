from fkg.cli_utils import ReportCommand, load_spec
from fkg.cumulant_utils import CONJUGATE, KINDS
from fkg.report_utils import Check, Report
from fkg.serialization_utils import format_rational, shape_from_text
from fkg.tasks import collect_sweep, enqueue_sweep
from fkg.verifier_utils import (
    INCREMENT_SUM,
    INDICATOR_MIXTURE,
    PAIRWISE_POTENTIAL,
    UNIFORM,
    InstanceGenConfig,
    sweep,
)

ORDER_TAGS = {2: 'FKG inequality', 3: 'third-order FKG inequality'}


class Command(ReportCommand):
    help = "Evaluate a coefficient family over exactly generated MTP2 instances"

    def add_command_arguments(self, parser):
        parser.add_argument('--m', type=int, required=True)
        parser.add_argument('--kind', choices=KINDS, default=CONJUGATE)
        parser.add_argument('--coeffs', help='JSON file with a custom spec or coefficient list')
        parser.add_argument('--shape', default='2,2,2', help='Chain lengths, e.g. 2,2,2')
        parser.add_argument('--trials', type=int, default=1000)
        parser.add_argument('--seed', type=int, default=0)
        parser.add_argument('--measure-mode', choices=(PAIRWISE_POTENTIAL, UNIFORM), default=PAIRWISE_POTENTIAL)
        parser.add_argument('--function-mode', choices=(INCREMENT_SUM, INDICATOR_MIXTURE), default=INCREMENT_SUM)
        parser.add_argument('--allow-negative', action='store_true', help='Shift functions so they may go negative')
        parser.add_argument('--search', action='store_true', help='Stop at the first violation')
        parser.add_argument('--queue', action='store_true', help='Split the trials across django-q workers')

    def build_report(self, **options):
        spec = load_spec(options['m'], options['kind'], options.get('coeffs'))
        cfg = InstanceGenConfig(
            shape=shape_from_text(options['shape']),
            seed=options['seed'],
            measure_mode=options['measure_mode'],
            function_mode=options['function_mode'],
            n_functions=spec.m,
            allow_negative=options['allow_negative'],
        )
        if options['queue']:
            group, chunks = enqueue_sweep(spec, cfg, options['trials'], search=options['search'])
            result = collect_sweep(group, chunks)
        else:
            result = sweep(spec, cfg, options['trials'], search=options['search'])

        if spec.kind == CONJUGATE:
            tag = ORDER_TAGS.get(spec.m, f"order-{spec.m} FKG inequality")
        else:
            tag = 'search'
        detail = ''
        if result.minimum is not None:
            detail = f"minimum {format_rational(result.minimum)} at trial {result.minimum_trial}"
        check = Check.of(result.claim, result.passed, tag, result.violations, detail)
        return Report(
            command='sweep',
            config={'instances': cfg.to_payload()},
            checks=[check],
            payload={
                'trials_run': result.trials_run,
                'violations': result.violations,
                'minimum': result.minimum,
                'minimum_trial': result.minimum_trial,
            },
            witness=result.witness,
        )
