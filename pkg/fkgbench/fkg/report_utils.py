"""Reports produced by the management commands, and their text/JSON renderings."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

from .serialization_utils import dumps, to_jsonable

logger = logging.getLogger(__name__)

PASS = 'pass'
VIOLATION = 'violation'
INCONCLUSIVE = 'inconclusive'
ERROR = 'error'
OUTCOMES = (PASS, VIOLATION, INCONCLUSIVE, ERROR)

EXIT_CODES = {
    PASS: 0,
    VIOLATION: 1,
    ERROR: 2,
    INCONCLUSIVE: 3,
}

# Check statuses. NOTE lines carry information and never change the outcome.
CHECK_PASS = 'PASS'
CHECK_FAIL = 'FAIL'
CHECK_INCONCLUSIVE = 'INCONCLUSIVE'
CHECK_NOTE = 'NOTE'

TEXT = 'text'
JSON = 'json'
FORMATS = (TEXT, JSON)


@dataclass
class Check:
    name: str
    status: str
    tag: str = ''
    value: Any = None
    detail: str = ''

    @classmethod
    def of(cls, name: str, ok: bool, tag: str = '', value: Any = None, detail: str = '') -> 'Check':
        return cls(name, CHECK_PASS if ok else CHECK_FAIL, tag, value, detail)

    def to_payload(self) -> Dict[str, Any]:
        return {
            'name': self.name,
            'status': self.status,
            'tag': self.tag,
            'value': to_jsonable(self.value),
            'detail': self.detail,
        }

    def lines(self) -> List[str]:
        head = f"{self.name}: {self.status}"
        if self.tag:
            head += f" ({self.tag})"
        lines = [head]
        if self.value is not None:
            value = to_jsonable(self.value)
            lines.append(f"  value: {value if isinstance(value, str) else dumps(value)}")
        if self.detail:
            lines.append(f"  {self.detail}")
        return lines


@dataclass
class Report:
    command: str
    outcome: Optional[str] = None
    config: Dict[str, Any] = field(default_factory=dict)
    checks: List[Check] = field(default_factory=list)
    payload: Dict[str, Any] = field(default_factory=dict)
    witness: Any = None
    blocks: Dict[str, str] = field(default_factory=dict)
    error: Optional[str] = None
    timing: Optional[float] = None

    def __post_init__(self):
        if self.outcome is None:
            self.outcome = self.derive_outcome()
        if self.outcome not in OUTCOMES:
            raise ValueError(f"unknown outcome '{self.outcome}'")

    def derive_outcome(self) -> str:
        if self.error is not None:
            return ERROR
        statuses = {check.status for check in self.checks}
        if CHECK_FAIL in statuses and self.witness is not None:
            return VIOLATION
        if CHECK_FAIL in statuses or CHECK_INCONCLUSIVE in statuses:
            return INCONCLUSIVE
        return PASS

    @classmethod
    def failure(cls, command: str, message: str) -> 'Report':
        return cls(command=command, error=message)

    @property
    def exit_code(self) -> int:
        return EXIT_CODES[self.outcome]

    def to_payload(self, include_timing: bool = False) -> Dict[str, Any]:
        payload = {
            'command': self.command,
            'outcome': self.outcome,
            'config': to_jsonable(self.config),
            'checks': [check.to_payload() for check in self.checks],
            'payload': to_jsonable(self.payload),
            'witness': to_jsonable(self.witness),
            'blocks': dict(self.blocks),
            'error': self.error,
        }
        if include_timing:
            payload['timing'] = None if self.timing is None else round(self.timing, 6)
        return payload


def _text(report: Report, include_timing: bool) -> str:
    lines = [f"command: {report.command}", f"outcome: {report.outcome}"]
    if report.error:
        lines.append(f"error: {report.error}")
    if report.config:
        lines.append('config:')
        for key, value in sorted(to_jsonable(report.config).items()):
            lines.append(f"  {key}: {value if isinstance(value, str) else dumps(value)}")
    if report.checks:
        lines.append('checks:')
        for check in report.checks:
            lines.extend(f"  {line}" for line in check.lines())
    if report.payload:
        lines.append('data:')
        for key, value in sorted(to_jsonable(report.payload).items()):
            rendered = value if isinstance(value, str) else dumps(value)
            lines.append(f"  {key}: {rendered}")
    for name, block in sorted(report.blocks.items()):
        lines.append(f"{name}:")
        lines.extend(f"  {line}" for line in block.rstrip('\n').split('\n'))
    if report.witness is not None:
        lines.append('witness:')
        lines.append(dumps(report.witness))
    if include_timing and report.timing is not None:
        lines.append(f"timing: {report.timing:.3f}s")
    return '\n'.join(lines) + '\n'


def emit_report(report: Report, fmt: str = TEXT, include_timing: bool = False) -> str:
    if fmt == JSON:
        return dumps(report.to_payload(include_timing=include_timing)) + '\n'
    if fmt == TEXT:
        return _text(report, include_timing)
    raise ValueError(f"unknown format '{fmt}', expected one of {', '.join(FORMATS)}")


def archive_report(report: Report):
    from .models import ArchivedReport

    archived = ArchivedReport.objects.create(
        command=report.command,
        outcome=report.outcome,
        payload=report.to_payload(),
    )
    logger.info("Archived report: id=%s command=%s outcome=%s", archived.id, report.command, report.outcome)
    return archived
