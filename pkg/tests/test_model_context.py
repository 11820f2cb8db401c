"""
Tests for model contexts and their parameter sources
"""
from fractions import Fraction

import pytest

from exactmath import INFINITY, ONE, AlgebraSpec, PoleError, UniRat, f, limit_at
from model_context import ChainSource, ContextFactory, FreeSource, ModelContext, free_kappa


class TestModelContext:
    @pytest.fixture
    def ctx(self):
        return ContextFactory.get_context("free", AlgebraSpec.gl(3), seed=3)

    def test_values_are_seeded(self, ctx):
        other = ContextFactory.get_context("free", AlgebraSpec.gl(3), seed=3)
        u = Fraction(1, 3)
        assert ctx.alpha(1, u) == other.alpha(1, u)
        assert ctx.lam_last(u) == other.lam_last(u)
        assert ctx.kappa_values == free_kappa(AlgebraSpec.gl(3), 3)

    def test_lambda_chain(self, ctx):
        u = Fraction(2, 3)
        assert ctx.lam(3, u) == ctx.lam_last(u)
        assert ctx.lam(1, u) == ctx.lam_last(u) * ctx.alpha(1, u) * ctx.alpha(2, u)
        assert ctx.lam_set(3, []) == ONE

    def test_symbolic_asymptotics(self, ctx):
        u = UniRat.var()
        assert limit_at(ctx.alpha(1, u), INFINITY) == ctx.kappa(1) / ctx.kappa(2)
        assert limit_at(ctx.lam_last(u), INFINITY) == ctx.kappa(3)

    def test_overrides(self, ctx):
        u = Fraction(1, 3)
        derived = ctx.derive("generalized", alpha_overrides={(1, u): Fraction(0)})
        assert derived.alpha(1, u) == 0
        assert ctx.alpha(1, u) != 0
        beta_ctx = ctx.derive("generalized-beta", beta_overrides={(1, u): Fraction(0)})
        assert beta_ctx.beta(1, u) == 0
        with pytest.raises(PoleError):
            beta_ctx.alpha(1, u)

    def test_memo_status(self, ctx):
        u = Fraction(1, 5)
        ctx.alpha(1, u)
        ctx.alpha(1, u)
        status = ctx.get_status()
        assert status["alpha_memo"]["hits"] >= 1
        assert status["overrides"] == 0

    def test_to_dict(self, ctx):
        data = ctx.to_dict()
        assert data["algebra"] == "gl(3)"
        assert data["mode"] == "free"
        assert data["source"] == "free"
        assert len(data["kappa"]) == 3

    def test_invalid_construction(self):
        source = FreeSource(0, (ONE, ONE))
        with pytest.raises(ValueError, match="nonzero"):
            ModelContext(AlgebraSpec.gl(2), source, c=0)
        with pytest.raises(ValueError, match="twist values"):
            ModelContext(AlgebraSpec.gl(2), source, kappa=[ONE])
        with pytest.raises(ValueError, match="Unknown mode"):
            ModelContext(AlgebraSpec.gl(2), source, mode="imaginary")

    def test_unknown_factory_mode(self):
        with pytest.raises(ValueError, match="Unknown mode"):
            ContextFactory.get_context("imaginary", AlgebraSpec.gl(2))


class TestChainSource:
    def test_fundamental_chain_values(self):
        xi = (Fraction(0), Fraction(1, 2))
        source = ChainSource(AlgebraSpec.gl(3), (Fraction(2), Fraction(3), Fraction(5)), xi)
        u = Fraction(7, 3)
        assert source.alpha(1, u) == Fraction(2, 3) * f(u, xi[0]) * f(u, xi[1])
        assert source.alpha(2, u) == Fraction(3, 5)
        assert source.lam_last(u) == Fraction(5)

    def test_odd_first_index(self):
        source = ChainSource(AlgebraSpec(0, 2), (ONE, ONE), (Fraction(0),))
        u = Fraction(5, 3)
        assert source.alpha(1, u) == f(u, 0, -1)
