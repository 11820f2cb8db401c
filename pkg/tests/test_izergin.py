"""
Tests for the Izergin determinant and its regularized ratio
"""
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from exactmath import ONE, ZERO, GenericDraw, PoleError, g, set_product, f
from izergin import (
    cache_info, identity_izp, identity_lm1, izergin, izergin_over_f, izergin_over_f_reduced,
)


class TestIzergin:
    def test_empty_sets(self):
        assert izergin([], []) == ONE

    def test_single_entry_is_g(self):
        assert izergin([5], [2]) == Fraction(1, 3)
        assert izergin([Fraction(5)], [Fraction(2)], 1) == g(5, 2, -1)

    def test_cardinality_mismatch(self):
        assert izergin([1, 2], [3]) == ZERO

    def test_pole(self):
        with pytest.raises(PoleError):
            izergin([Fraction(1)], [Fraction(1)])

    def test_two_by_two(self):
        y1, y2, x1, x2 = Fraction(5, 7), Fraction(-3, 11), Fraction(2, 13), Fraction(9, 17)
        # Small-size expansion of the determinant.
        expected = (g(y2, y1) * g(x1, x2) * (
            g(y1, x1) * f(y1, x2) / g(y1, x2) * g(y2, x2) * f(y2, x1) / g(y2, x1)
            - g(y1, x2) * f(y1, x1) / g(y1, x1) * g(y2, x1) * f(y2, x2) / g(y2, x2)))
        assert izergin([y1, y2], [x1, x2]) == expected

    @settings(max_examples=20, deadline=None)
    @given(st.integers(min_value=0, max_value=1000), st.integers(min_value=1, max_value=3))
    def test_symmetric_in_both_sets(self, seed, p):
        draw = GenericDraw(seed)
        ys, xs = draw.values(p), draw.values(p)
        assert izergin(ys, xs) == izergin(ys[::-1], xs)
        assert izergin(ys, xs) == izergin(ys, xs[::-1])


class TestIdentities:
    @pytest.mark.parametrize("seed", [0, 1, 2])
    @pytest.mark.parametrize("p", [1, 2, 3, 4])
    def test_shift_identity(self, seed, p):
        draw = GenericDraw(seed)
        lhs, rhs = identity_izp(draw.values(p), draw.values(p))
        assert lhs == rhs

    @pytest.mark.parametrize("sizes", [(0, 1), (1, 1), (1, 2), (2, 1), (2, 2)])
    def test_split_sum_identity(self, sizes):
        a, b = sizes
        draw = GenericDraw(5)
        lhs, rhs = identity_lm1(draw.values(a), draw.values(b), draw.values(a + b))
        assert lhs == rhs

    def test_shift_identity_other_c(self):
        c = Fraction(3, 2)
        draw = GenericDraw(4, c)
        lhs, rhs = identity_izp(draw.values(2), draw.values(2), c)
        assert lhs == rhs


class TestRegularizedRatio:
    def test_full_coincidence_is_one(self):
        a = Fraction(4, 7)
        assert izergin_over_f([a], [a]) == ONE

    def test_without_coincidence_matches_plain_ratio(self):
        ys, xs = [Fraction(1, 7), Fraction(3, 11)], [Fraction(5, 13), Fraction(-2, 17)]
        assert izergin_over_f(ys, xs) == izergin(ys, xs) / set_product(f, ys, xs)

    def test_orders_and_reduction_agree(self):
        draw = GenericDraw(9)
        shared = draw.values(2)
        ys, xs = shared + draw.values(1), shared + draw.values(1)
        forward = izergin_over_f(ys, xs, order="forward")
        assert forward == izergin_over_f(ys, xs, order="reverse")
        assert forward == izergin_over_f_reduced(ys, xs)

    def test_unknown_order(self):
        with pytest.raises(ValueError, match="Unknown epsilon order"):
            izergin_over_f([1], [2], order="sideways")

    def test_cache_records_hits(self):
        izergin_over_f([Fraction(1, 19)], [Fraction(2, 19)])
        izergin_over_f([Fraction(1, 19)], [Fraction(2, 19)])
        assert cache_info().hits >= 1
