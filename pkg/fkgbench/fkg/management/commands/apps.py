from fkg.application_utils import ApplicationRunnerFactory
from fkg.cli_utils import ReportCommand
from fkg.errors import InstanceFormatError
from fkg.serialization_utils import load_json_file


class Command(ReportCommand):
    help = "Check one application inequality on a JSON input"

    def add_command_arguments(self, parser):
        parser.add_argument('application', choices=sorted(ApplicationRunnerFactory.RUNNERS))
        parser.add_argument('--input', required=True, help='JSON input file')

    def report_name(self, **options):
        return f"apps {options.get('application', '')}".strip()

    def build_report(self, **options):
        payload = load_json_file(options['input'])
        if not isinstance(payload, dict):
            raise InstanceFormatError('', "expected a JSON object")
        return ApplicationRunnerFactory.get_runner(options['application']).run(payload)
