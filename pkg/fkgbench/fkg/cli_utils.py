"""Shared plumbing for the report-producing management commands."""
from __future__ import annotations

import io
import logging
import sys
import time
import traceback
from typing import List, Optional, Sequence, TextIO, Tuple

from django.core.management import load_command_class
from django.core.management.base import BaseCommand, CommandError

from .cumulant_utils import CUSTOM, CumulantSpec
from .errors import FkgError, InstanceFormatError
from .report_utils import FORMATS, TEXT, Report, archive_report, emit_report
from .serialization_utils import load_json_file, spec_from_payload

logger = logging.getLogger(__name__)

# Options every Django command carries, plus the shared output flags.
_BASE_OPTIONS = {
    'verbosity', 'settings', 'pythonpath', 'traceback', 'no_color', 'force_color',
    'skip_checks', 'stdout', 'stderr', 'format', 'archive', 'timing',
}

COMMANDS = ('certify', 'sweep', 'claims', 'apps', 'replay')


def load_spec(m: int, kind: str, coeffs: Optional[str] = None) -> CumulantSpec:
    """Spec for ``--m/--kind``; ``custom`` reads a JSON spec object or a bare coefficient list."""
    if kind != CUSTOM:
        return CumulantSpec.of_kind(m, kind)
    if not coeffs:
        raise FkgError("--kind custom needs --coeffs FILE")
    payload = load_json_file(coeffs)
    if isinstance(payload, list):
        try:
            return CumulantSpec.from_vector(m, payload)
        except (FkgError, TypeError, ValueError) as exc:
            raise InstanceFormatError('coeffs', str(exc))
    spec = spec_from_payload(payload)
    if spec.m != m:
        raise InstanceFormatError('m', f"file is for m={spec.m}, --m is {m}")
    return spec


class ReportCommand(BaseCommand):
    """A command whose whole result is one Report on stdout and an exit code."""

    requires_system_checks: List[str] = []
    last_report: Optional[Report] = None

    def add_arguments(self, parser):
        parser.add_argument('--format', choices=FORMATS, default=TEXT, help='Report format')
        parser.add_argument('--archive', action='store_true', help='Store the report in the database')
        parser.add_argument('--timing', action='store_true', help='Include wall-clock timing in the output')
        self.add_command_arguments(parser)

    def add_command_arguments(self, parser):
        pass

    def build_report(self, **options) -> Report:
        raise NotImplementedError

    def report_name(self, **options) -> str:
        return self.__module__.rsplit('.', 1)[-1]

    def make_report(self, **options) -> Report:
        started = time.perf_counter()
        try:
            report = self.build_report(**options)
        except FkgError as exc:
            logger.error("Command %s failed: %s", self.report_name(**options), exc)
            report = Report.failure(self.report_name(**options), str(exc))
        except Exception as exc:
            logger.error("Command %s crashed: %s", self.report_name(**options), exc)
            logger.error(traceback.format_exc())
            report = Report.failure(self.report_name(**options), f"internal error: {exc}")
        echoed = {key: value for key, value in options.items() if key not in _BASE_OPTIONS and value is not None and value is not False}
        report.config = {**echoed, **report.config}
        report.timing = time.perf_counter() - started
        if options.get('archive') and report.error is None:
            archive_report(report)
        return report

    def handle(self, *args, **options):
        report = self.make_report(**options)
        self.last_report = report
        self.stdout.write(emit_report(report, options['format'], options['timing']), ending='')
        if report.error:
            self.stderr.write(f"error: {report.error}")

    def run_from_argv(self, argv):
        super().run_from_argv(argv)
        if self.last_report is not None:
            sys.exit(self.last_report.exit_code)


def run_command(argv: Sequence[str], stdout: Optional[TextIO] = None, stderr: Optional[TextIO] = None) -> Tuple[int, Report]:
    """Run ``argv`` (subcommand first) in-process; usage and data errors map to exit code 2."""
    argv = list(argv)
    if not argv:
        return 2, Report.failure('', f"missing subcommand, expected one of {', '.join(COMMANDS)}")
    name, rest = argv[0], argv[1:]
    if name not in COMMANDS:
        return 2, Report.failure(name, f"unknown subcommand '{name}', expected one of {', '.join(COMMANDS)}")

    command = load_command_class('fkg', name)
    parser = command.create_parser('manage.py', name)
    try:
        options = vars(parser.parse_args(rest))
    except CommandError as exc:
        usage = io.StringIO()
        parser.print_usage(usage)
        return 2, Report.failure(name, f"{exc}\n{usage.getvalue().strip()}")

    args = options.pop('args', ())
    options['stdout'] = stdout or io.StringIO()
    options['stderr'] = stderr or io.StringIO()
    command.execute(*args, **options)
    report = command.last_report
    return report.exit_code, report

