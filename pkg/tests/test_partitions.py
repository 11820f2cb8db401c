"""
Tests for parameter sets, Bethe indices and constrained partitions
"""
from fractions import Fraction

import pytest

from exactmath import AlgebraSpec, UniRat
from partitions import (
    EMPTY, BetheIndex, CardinalityError, DuplicateParameterError, ParamSet, count_ij_partitions,
    enumerate_ij_partitions, enumerate_splits, mu_map, mu_map_graded,
)


class TestParamSet:
    def test_canonical_order(self):
        assert list(ParamSet([3, Fraction(1, 2), -1])) == [Fraction(-1), Fraction(1, 2), Fraction(3)]

    def test_symbolic_sorts_last(self):
        u = UniRat.var()
        values = ParamSet([u, Fraction(5)])
        assert values[0] == Fraction(5)
        assert values[1] == u

    def test_duplicates_rejected(self):
        with pytest.raises(DuplicateParameterError):
            ParamSet([1, Fraction(2, 2)])

    def test_set_operations(self):
        s = ParamSet([1, 2, 3])
        assert s.without([2]) == ParamSet([1, 3])
        assert s.union([5]) == ParamSet([1, 2, 3, 5])
        assert s.shifted(-1) == ParamSet([0, 1, 2])
        assert ParamSet.from_json(s.to_json()) == s


class TestBetheIndex:
    def test_levels(self):
        t = BetheIndex.of([1, 2], [3])
        assert t.N == 2
        assert t.cardinalities == (2, 1)
        assert t.level(0) == EMPTY
        assert t.level(3) == EMPTY
        assert t.values() == [Fraction(1), Fraction(2), Fraction(3)]

    def test_with_level(self):
        t = BetheIndex.empty(2).with_level(2, [7])
        assert t == BetheIndex.of([], [7])

    def test_dict_roundtrip(self):
        t = BetheIndex.of([Fraction(1, 3)], [])
        assert t.to_dict() == {"levels": [["1/3"], []]}
        assert BetheIndex.from_dict(t.to_dict()) == t

    def test_check_algebra(self):
        BetheIndex.of([1], [2]).check_algebra(AlgebraSpec(2, 1))
        with pytest.raises(ValueError, match="needs 2"):
            BetheIndex.of([1]).check_algebra(AlgebraSpec.gl(3))


class TestIJPartitions:
    def test_count_matches_enumeration(self):
        t = BetheIndex.of([Fraction(1, 7)])
        parts = enumerate_ij_partitions(t, [Fraction(2, 7)], 1, 1)
        assert len(parts) == 2
        assert count_ij_partitions(t, 1, 1, 1) == 2

    @pytest.mark.parametrize("i,j", [(1, 1), (1, 3), (3, 1), (2, 2), (2, 3), (3, 2)])
    def test_count_formula_gl3(self, i, j):
        t = BetheIndex.of([Fraction(1, 7), Fraction(2, 7)], [Fraction(3, 7)])
        z = [Fraction(4, 7), Fraction(5, 7)]
        assert len(enumerate_ij_partitions(t, z, i, j)) == count_ij_partitions(t, 2, i, j)

    def test_creation_on_vacuum(self):
        z = Fraction(1, 3)
        parts = enumerate_ij_partitions(BetheIndex.empty(1), [z], 1, 2)
        assert len(parts) == 1
        assert parts[0].result_index() == BetheIndex.of([z])
        assert parts[0].I(0) == ParamSet([z])
        assert parts[0].III(2) == ParamSet([z])

    def test_impossible_partition(self):
        parts = enumerate_ij_partitions(BetheIndex.empty(1), [Fraction(1, 3)], 2, 1)
        assert parts == []

    def test_indices_checked(self):
        with pytest.raises(ValueError, match="out of range"):
            enumerate_ij_partitions(BetheIndex.empty(1), [1], 3, 1)


class TestSplits:
    def test_split_sizes(self):
        splits = enumerate_splits([1, 2, 3], (1, 2))
        assert len(splits) == 3
        assert (ParamSet([1]), ParamSet([2, 3])) in splits

    def test_bad_sizes(self):
        with pytest.raises(CardinalityError):
            enumerate_splits([1, 2], (2, 1))


class TestMuMap:
    def test_reverses_and_shifts(self):
        t = BetheIndex.of([2], [5])
        assert mu_map(t) == BetheIndex.of([5], [1])

    def test_involution_up_to_shift(self):
        t = BetheIndex.of([2], [5])
        twice = mu_map(mu_map(t))
        assert twice == BetheIndex.of([1], [4])

    def test_graded_shift(self):
        t = BetheIndex.of([2], [5])
        assert mu_map_graded(t, AlgebraSpec(2, 1)) == BetheIndex.of([5], [3])
