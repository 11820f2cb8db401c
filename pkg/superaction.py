"""
Graded action engine for gl(m|n): colored kernels, the Phi/Phi-hat functions,
symmetric products and the graded multiple action.
"""
import logging
from typing import Iterable, List, Sequence

from action import (
    FormalBV, FormalCombination, _Vanishing, _check_indices, _require_side, apply_to, check_generic,
    f_denominator, inverse_f, span,
)
from check_outcome import CheckOutcome, compare_combinations, compare_values
from exactmath import ONE, ZERO, AlgebraSpec, delta_product, delta_product_primed, f, graded_c, h, set_product
from izergin import izergin_over_f
from model_context import ModelContext
from partitions import BetheIndex, IJPartition, ParamSet, enumerate_ij_partitions

logger = logging.getLogger("bethe")

GAMMA_PROFILES = ("standard", "swapped")


class GradedKernelProfile:
    """
    Phi_i(u,v) = f_[i](u,v) / h(u,v)^{delta_im},
    Phi-hat_i(u,v) = f_[i+1](u,v) / h(v,u)^{delta_im},
    and the gamma/gamma-hat pair built from them.
    """

    def __init__(self, spec: AlgebraSpec, c=ONE, name: str = "standard"):
        if name not in GAMMA_PROFILES:
            raise ValueError(f"Unknown gamma profile: {name}")
        self.spec = spec
        self.c = c
        self.name = name

    def f(self, s: int):
        c = graded_c(self.spec.parity(s), self.c)
        return lambda u, v: f(u, v, c)

    def h(self, s: int):
        c = graded_c(self.spec.parity(s), self.c)
        return lambda u, v: h(u, v, c)

    def fp(self, s: int, us, vs):
        return set_product(self.f(s), us, vs)

    def hp(self, s: int, us, vs):
        return set_product(self.h(s), us, vs)

    def phi(self, i: int, us, vs):
        value = self.fp(i, us, vs)
        if i == self.spec.m:
            value = value / set_product(lambda u, v: h(u, v, self.c), us, vs)
        return value

    def phi_hat(self, i: int, us, vs):
        value = self.fp(i + 1, us, vs)
        if i == self.spec.m:
            value = value / set_product(lambda u, v: h(u, v, self.c), vs, us)
        return value

    def gamma(self, i: int, us, vs):
        return self.phi(i, us, vs) if self.name == "standard" else self.phi_hat(i, us, vs)

    def gamma_hat(self, i: int, us, vs):
        return self.phi_hat(i, us, vs) if self.name == "standard" else self.phi(i, us, vs)

    def izergin_ratio(self, s: int, ys, xs):
        """K_[s](y|x)/f_[s](y,x)."""
        return izergin_over_f(list(ys), list(xs), self.spec.parity(s), self.c)

    def k_hat(self, i: int, first: Sequence[ParamSet]):
        """Product of the first-type Izergin factors up to level i-1."""
        m = self.spec.m
        value = ONE
        if i <= m:
            for s in span(1, i - 1):
                value = value * self.izergin_ratio(s, first[s], first[s - 1])
            return value
        for s in span(1, m):
            value = value * self.hp(s, first[s - 1], first[s - 1]) / self.hp(s, first[s], first[s - 1])
        for s in span(m + 1, i - 1):
            value = value * self.izergin_ratio(s, first[s], first[s - 1])
        return value

    def k_check(self, j: int, third: Sequence[ParamSet], N: int):
        """Product of the second-type Izergin factors from level j."""
        m = self.spec.m
        value = ONE
        if j <= m:
            for s in span(j, m - 1):
                value = value * self.izergin_ratio(s + 1, third[s + 1], third[s])
            for s in span(m, N):
                value = (value * self.hp(s + 1, third[s + 1], third[s + 1])
                         / self.hp(s + 1, third[s + 1], third[s]))
            return value
        for s in span(j, N):
            value = value * self.izergin_ratio(s + 1, third[s + 1], third[s])
        return value


def get_profile(ctx: ModelContext) -> GradedKernelProfile:
    return GradedKernelProfile(ctx.spec, ctx.c, ctx.gamma_profile)


def check_phi_relation(spec: AlgebraSpec, us: Iterable, vs: Iterable, c=ONE) -> CheckOutcome:
    """Phi_m(u,v) = (-1)^{#u #v} Phi-hat_m(u,v)."""
    us, vs = list(us), list(vs)
    profile = GradedKernelProfile(spec, c)
    sign = -1 if (len(us) * len(vs)) % 2 else 1
    return compare_values(profile.phi(spec.m, us, vs), sign * profile.phi_hat(spec.m, us, vs))


def _parity_sum(spec: AlgebraSpec, i: int, j: int) -> int:
    return (spec.parity(i) + spec.parity(j)) % 2


def symmetric_product_normalizer(spec: AlgebraSpec, i: int, j: int, zbar: Sequence, c=ONE):
    """Factor turning T_ij(z_1)...T_ij(z_p) into the symmetric product."""
    zs = list(zbar)
    if not zs:
        raise ValueError("The symmetric product needs at least one argument")
    hk = lambda u, v: h(u, v, c)
    if not _parity_sum(spec, i, j):
        return ONE
    if spec.parity(i) == 0:
        return ONE / delta_product(hk, zs)
    return ONE / delta_product_primed(hk, zs)


def graded_term_coefficient(ctx: ModelContext, i: int, j: int, zbar: Sequence, partition: IJPartition,
                            t_m: ParamSet, profile: GradedKernelProfile = None):
    N = ctx.N
    spec = ctx.spec
    m = spec.m
    profile = profile or get_profile(ctx)
    p = len(zbar)
    P = partition
    hk = lambda u, v: h(u, v, ctx.c)
    try:
        value = ctx.lam_set(N + 1, zbar) * set_product(hk, t_m, zbar)
        for s in span(j, i - 1):
            if _parity_sum(spec, s, s + 1) and (p * (p - 1) // 2) % 2:
                value = -value
            if s == m:
                value = value / set_product(hk, zbar, zbar)
        for s in span(j, i - 1):
            value = value * profile.phi_hat(s, P.I(s), P.III(s))
        for s in span(j, i - 2):
            value = value / f_denominator(ctx, P.I(s + 1), P.III(s), profile.f(s + 1))
        value = value * profile.k_hat(i, P.first)
        for s in span(1, i - 1):
            value = value * profile.phi_hat(s, P.I(s), P.II(s))
            value = value / f_denominator(ctx, P.I(s), P.II(s - 1), profile.f(s))
        value = value * profile.k_check(j, P.third, N)
        for s in span(j, N):
            value = value * ctx.alpha_set(s, P.III(s)) * profile.gamma(s, P.II(s), P.III(s))
            value = value / f_denominator(ctx, P.II(s + 1), P.III(s), profile.f(s + 1))
    except _Vanishing:
        return ZERO
    return value


def graded_act_multiple(ctx: ModelContext, i: int, j: int, zbar: Iterable, B: FormalBV) -> FormalCombination:
    """Symmetric product T_ij(zbar) acting on B(t)."""
    _require_side(B, "ket")
    _check_indices(ctx, i, j)
    B.index.check_algebra(ctx.spec)
    zs = list(ParamSet(zbar))
    if not zs:
        raise ValueError("The action needs at least one argument")
    check_generic(zs, B.index)
    profile = get_profile(ctx)
    t_m = B.index.level(ctx.spec.m)
    result = FormalCombination()
    for part in enumerate_ij_partitions(B.index, zs, i, j):
        result.add(FormalBV(part.result_index(), "ket"),
                   graded_term_coefficient(ctx, i, j, zs, part, t_m, profile))
    return result


def graded_act_single(ctx: ModelContext, i: int, j: int, z, B: FormalBV) -> FormalCombination:
    return graded_act_multiple(ctx, i, j, [z], B)


def graded_dual_sign(spec: AlgebraSpec, i: int, j: int, p: int, r_m: int) -> int:
    exponent = p * spec.parity(i) * (spec.parity(j) + 1)
    exponent += _parity_sum(spec, i, j) * (p * (p - 1) // 2 + p * r_m)
    return -1 if exponent % 2 else 1


def graded_act_dual(ctx: ModelContext, j: int, i: int, zbar: Iterable, C: FormalBV) -> FormalCombination:
    """C(t) T_ji(zbar) as the image of T_ij(zbar) B(t) under the graded antimorphism."""
    _require_side(C, "bra")
    zs = list(ParamSet(zbar))
    sign = graded_dual_sign(ctx.spec, i, j, len(zs), len(C.index.level(ctx.spec.m)))
    ket = graded_act_multiple(ctx, i, j, zs, C.dual())
    return ket.map_symbols(FormalBV.dual).scaled(sign)


def graded_act_t1N(ctx: ModelContext, z, B: FormalBV) -> FormalCombination:
    """T_{1,N+1}(z) B(t) = lambda_{N+1}(z) h(t^m, z) B(t with z added at every level)."""
    _require_side(B, "ket")
    check_generic([z], B.index)
    t = B.index
    grown = BetheIndex(tuple(level.union([z]) for level in t.levels))
    coef = ctx.lam_last(z) * set_product(lambda u, v: h(u, v, ctx.c), t.level(ctx.spec.m), [z])
    return FormalCombination.single(FormalBV(grown, "ket"), coef)


def graded_act_zero_mode(ctx: ModelContext, i: int, B: FormalBV) -> FormalCombination:
    if not 1 <= i <= ctx.N:
        raise ValueError(f"Zero-mode level {i} out of range 1..{ctx.N}")
    profile = get_profile(ctx)
    t = B.index
    level = t.level(i)
    sign = -1 if ctx.spec.parity(i + 1) else 1
    result = FormalCombination()
    for tl in level:
        rest = level.without([tl])
        lowering = (ctx.kappa(i + 1) * ctx.alpha(i, tl) * profile.phi(i, rest, [tl])
                    * inverse_f(ctx, t.level(i + 1), [tl], profile.f(i + 1)))
        raising = ctx.kappa(i) * profile.phi_hat(i, [tl], rest) * inverse_f(ctx, [tl], t.level(i - 1), profile.f(i))
        result.add(FormalBV(t.with_level(i, rest), B.side), sign * (lowering - raising))
    return result


def graded_bethe_rhs(ctx: ModelContext, t: BetheIndex, i: int, tl):
    profile = get_profile(ctx)
    rest = t.level(i).without([tl])
    return (profile.phi_hat(i, [tl], rest) / profile.phi(i, rest, [tl])
            * profile.fp(i + 1, t.level(i + 1), [tl]) / profile.fp(i, [tl], t.level(i - 1)))


def graded_bethe_residual(ctx: ModelContext, t: BetheIndex) -> List:
    return [ctx.alpha(i, tl) - graded_bethe_rhs(ctx, t, i, tl)
            for i in span(1, t.N) for tl in t.level(i)]


def graded_onshell_context(ctx: ModelContext, t: BetheIndex) -> ModelContext:
    overrides = {(i, tl): graded_bethe_rhs(ctx, t, i, tl) for i in span(1, t.N) for tl in t.level(i)}
    return ctx.derive("on-shell", alpha_overrides=overrides)


def check_graded_composition(ctx: ModelContext, i: int, j: int, zlist: Sequence, B: FormalBV) -> CheckOutcome:
    """Symmetric product against normalizer times T_ij(z_1)...T_ij(z_p), rightmost first."""
    composed = FormalCombination.single(B)
    for z in reversed(list(zlist)):
        composed = apply_to(lambda bv: graded_act_single(ctx, i, j, z, bv), composed)
    norm = symmetric_product_normalizer(ctx.spec, i, j, zlist, ctx.c)
    return compare_combinations(graded_act_multiple(ctx, i, j, zlist, B), composed.scaled(norm))


def check_t1N_reduction(ctx: ModelContext, zlist: Sequence, B: FormalBV) -> CheckOutcome:
    """The forced partition of T_{1,N+1} equals repeated single additions."""
    composed = FormalCombination.single(B)
    for z in reversed(list(zlist)):
        composed = apply_to(lambda bv: graded_act_t1N(ctx, z, bv), composed)
    norm = symmetric_product_normalizer(ctx.spec, 1, ctx.N + 1, zlist, ctx.c)
    return compare_combinations(graded_act_multiple(ctx, 1, ctx.N + 1, zlist, B), composed.scaled(norm))


def check_graded_dual_mirror(ctx: ModelContext, i: int, j: int, zbar: Sequence, B: FormalBV) -> CheckOutcome:
    zs = list(ParamSet(zbar))
    sign = graded_dual_sign(ctx.spec, i, j, len(zs), len(B.index.level(ctx.spec.m)))
    dual = graded_act_dual(ctx, j, i, zs, B.dual()).map_symbols(FormalBV.dual).scaled(sign)
    return compare_combinations(dual, graded_act_multiple(ctx, i, j, zs, B))
