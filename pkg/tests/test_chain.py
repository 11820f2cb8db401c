"""
Tests for the brute-force spin chain oracle
"""
import os
from fractions import Fraction
from unittest.mock import patch

import pytest

from chain import (
    GL11, GL2, ChainCapError, ChainSpec, ExactVector, apply_entry, check_asymptotics, check_rtt,
    check_sum_formula_oracle, check_transfer_eigenvector, check_vacuum, check_zero_mode_oracle, compare_vectors,
    explicit_bra_rank1, explicit_bv, explicit_bv_rank1, explicit_bv_single_level, inner_product,
    onshell_rank1_chain, oracle_check_action, transfer_residual, zero_mode_apply,
)
from exactmath import ONE, AlgebraSpec, PoleError, f
from partitions import BetheIndex

GL3 = AlgebraSpec.gl(3)


class TestExactVector:
    def test_zero_components_dropped(self):
        v = ExactVector({(1,): ONE, (2,): Fraction(0)})
        assert len(v) == 1
        assert (v - v).is_zero()

    def test_arithmetic(self):
        a = ExactVector({(1, 2): Fraction(1, 2)})
        b = ExactVector({(2, 1): ONE})
        total = a + b.scaled(3)
        assert total.component((2, 1)) == 3
        assert total.to_dict() == {"1,2": "1/2", "2,1": "3"}
        assert total - b.scaled(3) == a

    def test_compare_reports_first_difference(self):
        outcome = compare_vectors(ExactVector({(1,): ONE}), ExactVector({(1,): ONE, (2,): ONE}))
        assert not outcome
        assert outcome.detail == "component (2,): 0 != 1"


class TestChainSpec:
    def test_validation(self):
        with pytest.raises(ValueError, match="at least one site"):
            ChainSpec(GL2, (), (1, 1))
        with pytest.raises(ValueError, match="distinct"):
            ChainSpec(GL2, (1, 1), (1, 1))
        with pytest.raises(ValueError, match="Expected 2 twist values"):
            ChainSpec(GL2, (0,), (1, 1, 1))
        with pytest.raises(ValueError, match="nonzero"):
            ChainSpec(GL2, (0,), (1, 0))
        with pytest.raises(ValueError, match="constant c"):
            ChainSpec(GL2, (0,), (1, 1), Fraction(0))

    def test_dimension_cap(self):
        with patch.dict(os.environ, {"BETHE_CHAIN_DIM_CAP": "8"}):
            ChainSpec.build(GL2, 3)
            with pytest.raises(ChainCapError):
                ChainSpec.build(GL2, 4)
            with pytest.raises(ChainCapError):
                ChainSpec(GL2, (0, 1, 2, 3), (1, 1))

    def test_build_is_seeded(self):
        assert ChainSpec.build(GL3, 2, seed=4) == ChainSpec.build(GL3, 2, seed=4)
        data = ChainSpec.build(GL11, 2).to_dict()
        assert data["algebra"] == "gl(1|1)"
        assert data["dim"] == 4


class TestMonodromy:
    @pytest.mark.parametrize("spec", [GL2, GL11])
    def test_rtt(self, spec):
        chain = ChainSpec.build(spec, 2, seed=1)
        u, v = chain.parameters(2)
        outcome = check_rtt(chain, u, v)
        assert outcome.passed, outcome.detail

    @pytest.mark.parametrize("spec,sites", [(GL2, 2), (GL11, 2), (GL3, 2), (AlgebraSpec(2, 1), 1)])
    def test_vacuum_and_asymptotics(self, spec, sites):
        chain = ChainSpec.build(spec, sites, seed=2)
        u, = chain.parameters(1)
        assert check_vacuum(chain, u).passed
        assert check_asymptotics(chain).passed

    def test_single_site_creation(self):
        """T_12(5)|1> = kappa_1 g(5, 0) e_2 on one site at xi = 0."""
        chain = ChainSpec(GL2, (0,), (2, 3))
        assert explicit_bv_rank1(chain, [5]) == ExactVector({(2,): Fraction(2, 15)})
        assert apply_entry(chain, 1, 1, 5, chain.vacuum()) == chain.vacuum().scaled(2 * f(5, 0))

    def test_single_site_graded_creation(self):
        chain = ChainSpec(GL11, (0,), (2, 3))
        assert explicit_bv_rank1(chain, [5]) == ExactVector({(2,): Fraction(-2, 15)})

    def test_entry_errors(self):
        chain = ChainSpec(GL2, (0,), (1, 1))
        with pytest.raises(ValueError, match="out of range"):
            apply_entry(chain, 3, 1, 5, chain.vacuum())
        with pytest.raises(ValueError, match="Dimension mismatch"):
            apply_entry(chain, 1, 1, 5, ExactVector({(1, 1): ONE}))
        with pytest.raises(ValueError, match="out of range"):
            zero_mode_apply(chain, 2, chain.vacuum())

    def test_inner_product(self):
        chain = ChainSpec(GL2, (0, 1), (1, 1))
        assert inner_product(explicit_bra_rank1(chain, []), chain.vacuum()) == ONE
        with pytest.raises(ValueError, match="Dimension mismatch"):
            inner_product(ExactVector({(1,): ONE}), chain.vacuum())


class TestExplicitVectors:
    def test_no_construction(self):
        chain = ChainSpec.build(GL3, 2)
        t1, t2 = chain.parameters(2)
        with pytest.raises(ValueError, match="No explicit construction"):
            explicit_bv(chain, BetheIndex.of([t1], [t2]))

    def test_graded_single_level_rejected(self):
        chain = ChainSpec.build(AlgebraSpec(2, 1), 1)
        with pytest.raises(ValueError, match="gl\\(N\\+1\\)"):
            explicit_bv_single_level(chain, 1, [Fraction(1, 3)])

    def test_empty_index_is_vacuum(self):
        chain = ChainSpec.build(GL3, 2)
        assert explicit_bv(chain, BetheIndex.empty(2)) == chain.vacuum()


def _entries(size):
    return [(i, j) for i in range(1, size + 1) for j in range(1, size + 1)]


class TestOracleRankOne:
    @pytest.fixture(scope="class")
    def gl2(self):
        return ChainSpec.build(GL2, 3, seed=0)

    @pytest.fixture(scope="class")
    def gl11(self):
        return ChainSpec.build(GL11, 2, seed=0)

    @pytest.mark.parametrize("r", [0, 1, 2])
    @pytest.mark.parametrize("p", [1, 2])
    @pytest.mark.parametrize("i,j", _entries(2))
    def test_action_gl2(self, gl2, i, j, p, r):
        z1, z2, t1, t2 = gl2.parameters(4)
        outcome = oracle_check_action(gl2, i, j, [z1, z2][:p], BetheIndex.of([t1, t2][:r]))
        assert outcome.passed, outcome.detail

    @pytest.mark.parametrize("r", [0, 1])
    @pytest.mark.parametrize("i,j", _entries(2))
    def test_action_gl11(self, gl11, i, j, r):
        z1, t1 = gl11.parameters(2)
        outcome = oracle_check_action(gl11, i, j, [z1], BetheIndex.of([t1][:r]))
        assert outcome.passed, outcome.detail

    @pytest.mark.parametrize("r", [0, 1, 2])
    def test_sum_formula_gl2(self, gl2, r):
        a, b, t1, t2 = gl2.parameters(4, seed=3)
        outcome = check_sum_formula_oracle(gl2, [a, b][:r], [t1, t2][:r])
        assert outcome.passed, outcome.detail

    @pytest.mark.parametrize("r", [0, 1])
    def test_sum_formula_gl11(self, gl11, r):
        a, t1 = gl11.parameters(2, seed=3)
        outcome = check_sum_formula_oracle(gl11, [a][:r], [t1][:r])
        assert outcome.passed, outcome.detail

    def test_zero_mode(self, gl2, gl11):
        for chain in (gl2, gl11):
            t1, = chain.parameters(1, seed=5)
            outcome = check_zero_mode_oracle(chain, 1, BetheIndex.of([t1]))
            assert outcome.passed, outcome.detail


class TestOracleHigherRank:
    @pytest.fixture(scope="class")
    def gl3(self):
        return ChainSpec.build(GL3, 2, seed=0)

    @pytest.mark.parametrize("i,j", [(1, 1), (2, 2), (3, 3), (2, 1), (3, 1), (3, 2), (1, 2)])
    def test_level_one_grid(self, gl3, i, j):
        z1, t1 = gl3.parameters(2)
        outcome = oracle_check_action(gl3, i, j, [z1], BetheIndex.of([t1], []))
        assert outcome.passed, outcome.detail

    def test_creation_of_diagonal_vectors(self, gl3):
        z1, z2 = gl3.parameters(2)
        assert oracle_check_action(gl3, 1, 3, [z1], BetheIndex.empty(2)).passed
        outcome = oracle_check_action(gl3, 1, 3, [z2], BetheIndex.of([z1], [z1]))
        assert outcome.passed, outcome.detail

    @pytest.mark.parametrize("i", [1, 2])
    def test_zero_modes(self, gl3, i):
        t1, = gl3.parameters(1)
        assert check_zero_mode_oracle(gl3, i, BetheIndex.of([t1], [])).passed


class TestTransfer:
    def test_onshell_root_is_eigenvector(self):
        t, z = Fraction(1, 3), Fraction(5, 7)
        chain = onshell_rank1_chain((Fraction(0), Fraction(1)), t)
        assert chain.kappa == (Fraction(-1, 2), ONE)
        outcome = check_transfer_eigenvector(chain, z, BetheIndex.of([t]))
        assert outcome.passed, outcome.detail

    def test_off_shell_leaves_a_residual(self):
        chain = ChainSpec(GL2, (Fraction(0), Fraction(1)), (ONE, ONE))
        residual = transfer_residual(chain, Fraction(5, 7), BetheIndex.of([Fraction(1, 3)]))
        assert not residual.is_zero()

    def test_no_twist_when_lambda_vanishes(self):
        with pytest.raises(PoleError):
            onshell_rank1_chain((Fraction(0),), Fraction(-1))

    def test_graded_chain_rejected(self):
        chain = ChainSpec.build(GL11, 1)
        with pytest.raises(ValueError, match="gl\\(N\\+1\\)"):
            transfer_residual(chain, Fraction(5, 7), BetheIndex.of([]))
