from django.test import SimpleTestCase

from fkg.errors import CapExceededError, FkgError
from fkg.partition_utils import (
    BlockSplit,
    Partition,
    conjugate,
    enumerate_partitions,
    split_count,
    splits_of_type,
)


class PartitionTests(SimpleTestCase):
    def test_partitions_of_four_in_reverse_lex_order(self):
        self.assertEqual(
            [p.parts for p in enumerate_partitions(4)],
            [(4,), (3, 1), (2, 2), (2, 1, 1), (1, 1, 1, 1)],
        )

    def test_partition_counts(self):
        self.assertEqual([len(enumerate_partitions(m)) for m in range(1, 8)], [1, 2, 3, 5, 7, 11, 15])

    def test_conjugate(self):
        self.assertEqual(conjugate(Partition((3, 1))), Partition((2, 1, 1)))
        self.assertEqual(conjugate(Partition((2, 2))), Partition((2, 2)))
        for m in range(1, 7):
            for p in enumerate_partitions(m):
                self.assertEqual(conjugate(conjugate(p)), p)

    def test_invalid_partitions(self):
        with self.assertRaises(FkgError):
            Partition((1, 2))
        with self.assertRaises(FkgError):
            Partition((2, 0))
        with self.assertRaises(FkgError):
            enumerate_partitions(0)

    def test_str(self):
        self.assertEqual(str(Partition((2, 1, 1))), '(2,1,1)')


class SplitTests(SimpleTestCase):
    def test_split_counts_match_enumeration(self):
        for m in range(1, 7):
            for p in enumerate_partitions(m):
                self.assertEqual(len(splits_of_type(p)), split_count(p), str(p))

    def test_split_counts_sum_to_bell_numbers(self):
        bell = {1: 1, 2: 2, 3: 5, 4: 15, 5: 52, 6: 203}
        for m, expected in bell.items():
            self.assertEqual(sum(split_count(p) for p in enumerate_partitions(m)), expected)

    def test_known_counts(self):
        self.assertEqual(split_count(Partition((2, 2))), 3)
        self.assertEqual(split_count(Partition((2, 1, 1))), 6)

    def test_canonical_order_of_splits(self):
        self.assertEqual(
            [str(s) for s in splits_of_type(Partition((2, 1)))],
            ['{12|3}', '{13|2}', '{23|1}'],
        )

    def test_canonical_blocks(self):
        split = BlockSplit.canonical([[3], [2, 1]])
        self.assertEqual(split.blocks, ((1, 2), (3,)))
        self.assertEqual(split.partition, Partition((2, 1)))
        self.assertEqual(split.m, 3)

    def test_weight_cap(self):
        with self.assertRaises(CapExceededError):
            splits_of_type(Partition((11,)))
