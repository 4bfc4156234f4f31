"""Background sweep chunks for the django-q cluster."""
from __future__ import annotations

import logging
import traceback
import uuid
from typing import Any, Dict, List, Optional, Tuple

from django.conf import settings
from django_q.tasks import async_task, result_group

from .cumulant_utils import CumulantSpec
from .errors import FkgError
from .serialization_utils import spec_from_payload, spec_to_payload
from .verifier_utils import InstanceGenConfig, SweepReport, merge_sweep_reports, run_trials

logger = logging.getLogger(__name__)

SWEEP_WORKERS = getattr(settings, 'FKG_SWEEP_WORKERS', 2)
QUEUE_SYNC = getattr(settings, 'FKG_QUEUE_SYNC', False)
QUEUE_WAIT_MS = getattr(settings, 'FKG_QUEUE_WAIT_MS', 600000)


def run_sweep_chunk(
    spec_payload: Dict[str, Any],
    config_payload: Dict[str, Any],
    start: int,
    stop: int,
    search: bool = False,
) -> Dict[str, Any]:
    try:
        spec = spec_from_payload(spec_payload, 'spec')
        cfg = InstanceGenConfig.from_payload(config_payload)
        logger.info("Starting sweep chunk: %s trials=%s..%s seed=%s", spec.label, start, stop - 1, cfg.seed)
        report = run_trials(spec, cfg, start, stop, search=search)
        logger.info(
            "Completed sweep chunk: %s trials=%s..%s violations=%s",
            spec.label,
            start,
            stop - 1,
            report.violations,
        )
        return {'success': True, 'report': report.to_payload()}
    except Exception as exc:
        logger.error("Sweep chunk failed: %s", exc)
        logger.error(traceback.format_exc())
        return {'success': False, 'error': str(exc), 'start': start, 'stop': stop}


def chunk_bounds(trials: int, chunks: int) -> List[Tuple[int, int]]:
    """Split ``0..trials-1`` into at most ``chunks`` contiguous, nonempty ranges."""
    if trials < 1:
        raise FkgError(f"trials must be at least 1, got {trials}")
    chunks = max(1, min(chunks, trials))
    size, extra = divmod(trials, chunks)
    bounds = []
    start = 0
    for index in range(chunks):
        stop = start + size + (1 if index < extra else 0)
        bounds.append((start, stop))
        start = stop
    return bounds


def enqueue_sweep(
    spec: CumulantSpec,
    cfg: InstanceGenConfig,
    trials: int,
    search: bool = False,
    chunks: Optional[int] = None,
    sync: Optional[bool] = None,
) -> Tuple[str, int]:
    """Queue one task per chunk under a fresh group id; returns (group, chunk count)."""
    group = f"sweep-{uuid.uuid4().hex}"
    bounds = chunk_bounds(trials, chunks or SWEEP_WORKERS)
    spec_payload = spec_to_payload(spec)
    config_payload = cfg.for_order(spec.m).to_payload()
    for start, stop in bounds:
        async_task(
            'fkg.tasks.run_sweep_chunk',
            spec_payload,
            config_payload,
            start,
            stop,
            search,
            group=group,
            sync=QUEUE_SYNC if sync is None else sync,
        )
    logger.info("Queued sweep: group=%s %s chunks=%s trials=%s", group, spec.label, len(bounds), trials)
    return group, len(bounds)


def collect_sweep(group: str, chunks: int, wait: int = QUEUE_WAIT_MS) -> SweepReport:
    results = result_group(group, failures=True, wait=wait, count=chunks)
    if results is None or len(results) < chunks:
        found = 0 if results is None else len(results)
        raise FkgError(f"sweep group {group} returned {found} of {chunks} chunks")
    failed = [result for result in results if not isinstance(result, dict) or not result.get('success')]
    if failed:
        first = failed[0]
        if not isinstance(first, dict):
            raise FkgError(f"sweep chunk crashed: {first}")
        raise FkgError(f"sweep chunk {first.get('start')}..{first.get('stop')} failed: {first.get('error')}")
    return merge_sweep_reports([SweepReport.from_payload(result['report']) for result in results])
