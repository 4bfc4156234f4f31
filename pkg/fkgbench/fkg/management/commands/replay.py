from fkg.cli_utils import ReportCommand
from fkg.errors import InstanceFormatError
from fkg.report_utils import Check, Report
from fkg.serialization_utils import load_json_file
from fkg.verifier_utils import Witness, replay


class Command(ReportCommand):
    help = "Re-evaluate a stored witness exactly"

    def add_command_arguments(self, parser):
        parser.add_argument('--witness', required=True, help='Witness JSON, or a report that embeds one')

    def build_report(self, **options):
        payload = load_json_file(options['witness'])
        if isinstance(payload, dict) and payload.get('type') != 'witness' and 'witness' in payload:
            payload = payload['witness']
            if payload is None:
                raise InstanceFormatError('witness', "report carries no witness")
        witness = Witness.from_payload(payload)
        value = replay(witness)
        checks = [
            Check.of("stored value reproduced", True, value=value),
            Check.of(witness.claim, value >= 0, value=value),
        ]
        return Report(command='replay', checks=checks, payload={'spec': witness.spec}, witness=witness)
