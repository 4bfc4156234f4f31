from unittest import mock

from django.test import SimpleTestCase, TestCase

from fkg.cli_utils import run_command
from fkg.cumulant_utils import CumulantSpec
from fkg.errors import FkgError
from fkg.lattice_utils import LatticeShape
from fkg.serialization_utils import spec_to_payload
from fkg.tasks import chunk_bounds, collect_sweep, enqueue_sweep, run_sweep_chunk
from fkg.verifier_utils import InstanceGenConfig, sweep


class ChunkBoundsTests(SimpleTestCase):
    def test_even_and_uneven_splits(self):
        self.assertEqual(chunk_bounds(10, 2), [(0, 5), (5, 10)])
        self.assertEqual(chunk_bounds(10, 3), [(0, 4), (4, 7), (7, 10)])

    def test_never_more_chunks_than_trials(self):
        self.assertEqual(chunk_bounds(2, 5), [(0, 1), (1, 2)])
        self.assertEqual(chunk_bounds(3, 0), [(0, 3)])

    def test_rejects_empty_sweep(self):
        with self.assertRaises(FkgError):
            chunk_bounds(0, 2)


class SweepChunkTests(SimpleTestCase):
    def test_chunk_returns_report_payload(self):
        spec = CumulantSpec.conjugate(3)
        cfg = InstanceGenConfig(LatticeShape((2, 2)), seed=3).for_order(3)
        result = run_sweep_chunk(spec_to_payload(spec), cfg.to_payload(), 0, 5)
        self.assertTrue(result['success'])
        self.assertEqual(result['report']['trials_run'], 5)

    def test_bad_payload_is_reported_not_raised(self):
        result = run_sweep_chunk({'m': 0}, {}, 0, 5)
        self.assertFalse(result['success'])
        self.assertEqual((result['start'], result['stop']), (0, 5))


class QueuedSweepTests(TestCase):
    def setUp(self):
        self.spec = CumulantSpec.conjugate(3)
        self.cfg = InstanceGenConfig(LatticeShape((2, 2, 2)), seed=5)

    def test_queued_sweep_matches_single_pass(self):
        group, chunks = enqueue_sweep(self.spec, self.cfg, 24, chunks=3, sync=True)
        self.assertEqual(chunks, 3)
        merged = collect_sweep(group, chunks, wait=0)
        self.assertEqual(merged.to_payload(), sweep(self.spec, self.cfg, 24).to_payload())

    def test_missing_group(self):
        with self.assertRaises(FkgError):
            collect_sweep('sweep-missing', 2, wait=0)

    def test_queue_flag_on_sweep_command(self):
        argv = ['sweep', '--m', '3', '--trials', '12', '--seed', '5']
        with mock.patch('fkg.tasks.QUEUE_SYNC', True):
            queued_code, queued = run_command([*argv, '--queue'])
        direct_code, direct = run_command(argv)
        self.assertEqual(queued_code, direct_code)
        self.assertEqual(queued.payload, direct.payload)
