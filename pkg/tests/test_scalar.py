"""
Tests for highest coefficients and the scalar-product sum formula
"""
from fractions import Fraction

import pytest

from exactmath import ONE, ZERO, AlgebraSpec, GenericDraw, g, set_product
from izergin import izergin
from model_context import ContextFactory
from partitions import BetheIndex
from scalar import (
    SELECTORS, SelectorError, check_generalized_model_reduction, check_generalized_model_reduction_renormalized,
    check_hc_agreement, check_hc_mu_symmetry, check_reflection, check_renormalized_sum, check_sp_symmetry,
    check_unrolled_base, default_graded_selector, expectation_value_q, graded_highest_coefficient,
    graded_scalar_product_sum, hc_report, highest_coefficient, scalar_product_sum, selector_applies,
)

GL11 = AlgebraSpec(1, 1)


def draw_index(draw, sizes):
    return BetheIndex(tuple(tuple(draw.values(k)) for k in sizes))


class TestHighestCoefficient:
    def test_rank_one_is_izergin(self):
        x, t = BetheIndex.of([3]), BetheIndex.of([1])
        assert highest_coefficient(x, t) == Fraction(-1, 2)
        assert hc_report(x, t, "first-level")["Z"] == "-1/2"

    def test_empty_and_mismatched(self):
        assert highest_coefficient(BetheIndex.empty(2), BetheIndex.empty(2)) == ONE
        assert highest_coefficient(BetheIndex.of([1], []), BetheIndex.of([], [2])) == ZERO

    def test_level_count_mismatch(self):
        with pytest.raises(ValueError, match="Level count"):
            highest_coefficient(BetheIndex.of([1]), BetheIndex.of([2], []))

    def test_unknown_selector(self):
        with pytest.raises(SelectorError, match="Unknown selector: sideways"):
            highest_coefficient(BetheIndex.of([1]), BetheIndex.of([2]), "sideways")

    @pytest.mark.parametrize("selector", SELECTORS)
    @pytest.mark.parametrize("r", [1, 2])
    def test_unrolled_base(self, selector, r):
        draw = GenericDraw(r)
        x, t = BetheIndex.of(draw.values(r)), BetheIndex.of(draw.values(r))
        outcome = check_unrolled_base(x, t, selector)
        assert outcome.passed, outcome.detail
        assert outcome.lhs == izergin(t.level(1), x.level(1))

    @pytest.mark.parametrize("seed", [0, 7, 13])
    @pytest.mark.parametrize("sizes", [(1, 1), (2, 1), (1, 2), (1, 1, 1), (2, 1, 1), (1, 2, 1), (2, 2, 2)])
    def test_recursions_agree(self, sizes, seed):
        draw = GenericDraw(seed)
        x, t = draw_index(draw, sizes), draw_index(draw, sizes)
        outcome = check_hc_agreement(x, t)
        assert outcome.passed, outcome.detail

    def test_shifted_recursions_pass_through_adjacent_shifts(self):
        """Sub-coefficients hold x - c and x - 2c on neighbouring levels."""
        x = BetheIndex.of([Fraction(-810, 17)], [Fraction(1446, 19)], [Fraction(1707, 11)])
        t = BetheIndex.of([Fraction(870, 17)], [Fraction(3703, 19)], [Fraction(-1018, 7)])
        expected = highest_coefficient(x, t, "first-level")
        assert highest_coefficient(x, t, "shifted-first") == expected
        assert highest_coefficient(x, t, "shifted-last") == expected

    @pytest.mark.parametrize("sizes", [(1, 1), (2, 1)])
    def test_mu_symmetry(self, sizes):
        draw = GenericDraw(8)
        x, t = draw_index(draw, sizes), draw_index(draw, sizes)
        assert check_hc_mu_symmetry(x, t).passed
        assert check_hc_mu_symmetry(x, t, 1, "first-level", "last-level").passed

    def test_other_c(self):
        c = Fraction(2, 3)
        draw = GenericDraw(4, c)
        x, t = draw_index(draw, (1, 1)), draw_index(draw, (1, 1))
        assert check_hc_agreement(x, t, c).passed


class TestGradedHighestCoefficient:
    @pytest.mark.parametrize("selector", SELECTORS)
    def test_gl11_base(self, selector):
        x, t = BetheIndex.of([Fraction(5, 7)]), BetheIndex.of([Fraction(1, 3)])
        value = graded_highest_coefficient(x, t, GL11, selector)
        assert value == set_product(g, x.level(1), t.level(1))

    def test_selector_applicability(self):
        gl3 = AlgebraSpec(3, 0)
        assert selector_applies(gl3, "first-level")
        assert not selector_applies(gl3, "last-level")
        assert default_graded_selector(AlgebraSpec(0, 3)) == "last-level"
        with pytest.raises(SelectorError, match="needs n >= 1"):
            graded_highest_coefficient(BetheIndex.of([1], [2]), BetheIndex.of([3], [4]), gl3, "last-level")

    def test_even_reduction(self):
        draw = GenericDraw(2)
        x, t = draw_index(draw, (1, 1)), draw_index(draw, (1, 1))
        assert graded_highest_coefficient(x, t, AlgebraSpec(3, 0)) == highest_coefficient(x, t)

    def test_reflection_gl11(self):
        x, t = BetheIndex.of([Fraction(5, 7)]), BetheIndex.of([Fraction(1, 3)])
        assert check_reflection(x, t, GL11).passed

    def test_unknown_profile(self):
        with pytest.raises(ValueError, match="Unknown gamma profile"):
            graded_highest_coefficient(BetheIndex.of([1]), BetheIndex.of([2]), GL11, "first-level", 1, "inverted")


class TestSumFormula:
    @pytest.fixture
    def gl2(self):
        return ContextFactory.get_context("free", AlgebraSpec.gl(2), seed=9)

    @pytest.fixture
    def gl3(self):
        return ContextFactory.get_context("free", AlgebraSpec.gl(3), seed=10)

    def test_one_magnon(self, gl2):
        x, t = Fraction(5, 7), Fraction(1, 3)
        value = scalar_product_sum(gl2, BetheIndex.of([x]), BetheIndex.of([t]))
        assert value == g(t, x) * (gl2.alpha(1, x) - gl2.alpha(1, t))

    def test_vacuum_and_mismatch(self, gl3):
        assert scalar_product_sum(gl3, BetheIndex.empty(2), BetheIndex.empty(2)) == ONE
        assert scalar_product_sum(gl3, BetheIndex.of([1], []), BetheIndex.of([], [2])) == ZERO

    def test_wrong_algebra(self, gl3):
        with pytest.raises(ValueError, match="Expected 2 levels"):
            scalar_product_sum(gl3, BetheIndex.of([1]), BetheIndex.of([2]))

    @pytest.mark.parametrize("sizes", [(2,), (1, 1)])
    def test_symmetry(self, sizes):
        ctx = ContextFactory.get_context("free", AlgebraSpec.gl(len(sizes) + 1), seed=9)
        draw = GenericDraw(12)
        x, t = draw_index(draw, sizes), draw_index(draw, sizes)
        assert check_sp_symmetry(ctx, x, t).passed
        assert check_renormalized_sum(ctx, x, t).passed

    def test_generalized_model_gl2(self, gl2):
        draw = GenericDraw(13)
        x, t = draw_index(draw, (2,)), draw_index(draw, (2,))
        outcome = check_generalized_model_reduction(gl2, x, t, ("bra",))
        assert outcome.passed, outcome.detail
        assert check_generalized_model_reduction_renormalized(gl2, x, t).passed

    def test_generalized_model_gl3(self, gl3):
        draw = GenericDraw(14)
        x, t = draw_index(draw, (1, 1)), draw_index(draw, (1, 1))
        outcome = check_generalized_model_reduction(gl3, x, t, ("bra", "ket"))
        assert outcome.passed, outcome.detail

    def test_expectation_value_without_first_level(self, gl3):
        x, t = BetheIndex.of([], [Fraction(5, 7)]), BetheIndex.of([], [Fraction(1, 3)])
        assert expectation_value_q(gl3, x, t) == scalar_product_sum(gl3, t, x)
        with pytest.raises(ValueError, match="Unknown side"):
            expectation_value_q(gl3, x, t, "middle")

    def test_graded_one_magnon(self):
        ctx = ContextFactory.get_context("free", GL11, seed=15)
        x, t = Fraction(5, 7), Fraction(1, 3)
        value = graded_scalar_product_sum(ctx, BetheIndex.of([x]), BetheIndex.of([t]))
        assert value == g(x, t) * (ctx.alpha(1, x) - ctx.alpha(1, t))
