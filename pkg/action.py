"""
Formal action engine for gl(N+1): Bethe vectors are opaque symbols and every
monodromy element acts by rewriting into a combination of such symbols.
"""
import logging
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, Iterator, List, Sequence, Tuple

from check_outcome import CheckOutcome, compare_combinations, compare_values
from exactmath import (
    INFINITY, ONE, ZERO, PoleError, UniRat, format_rat, is_zero, limit_at, set_product,
)
from izergin import izergin_over_f
from model_context import ModelContext
from partitions import EMPTY, BetheIndex, IJPartition, ParamSet, enumerate_ij_partitions

logger = logging.getLogger("bethe")

SIDES = ("ket", "bra")


@dataclass(frozen=True)
class FormalBV:
    """Bethe vector B(t) (ket) or its dual C(t) (bra), as a symbol."""
    index: BetheIndex
    side: str = "ket"

    def __post_init__(self):
        if self.side not in SIDES:
            raise ValueError(f"Unknown side: {self.side}")

    def dual(self) -> "FormalBV":
        return FormalBV(self.index, "bra" if self.side == "ket" else "ket")

    def is_symbolic(self) -> bool:
        return any(isinstance(v, UniRat) for v in self.index.values())

    def __str__(self):
        return ("B" if self.side == "ket" else "C") + str(self.index)


class FormalCombination:
    """Finite linear combination of FormalBV symbols; zero coefficients are never stored."""

    def __init__(self, terms: Dict[FormalBV, object] = None):
        self.terms: Dict[FormalBV, object] = {}
        for bv, coef in (terms or {}).items():
            self.add(bv, coef)

    @classmethod
    def single(cls, bv: FormalBV, coef=ONE) -> "FormalCombination":
        return cls({bv: coef})

    def add(self, bv: FormalBV, coef):
        if is_zero(coef):
            return
        total = self.terms.get(bv, ZERO) + coef
        if is_zero(total):
            self.terms.pop(bv, None)
        else:
            self.terms[bv] = total

    def coefficient(self, bv: FormalBV):
        return self.terms.get(bv, ZERO)

    def items(self) -> Iterator[Tuple[FormalBV, object]]:
        return iter(sorted(self.terms.items(), key=lambda kv: str(kv[0])))

    def scaled(self, k) -> "FormalCombination":
        out = FormalCombination()
        for bv, coef in self.terms.items():
            out.add(bv, coef * k)
        return out

    def map_symbols(self, fn: Callable[[FormalBV], FormalBV]) -> "FormalCombination":
        out = FormalCombination()
        for bv, coef in self.terms.items():
            out.add(fn(bv), coef)
        return out

    def map_coefficients(self, fn: Callable[[FormalBV, object], object]) -> "FormalCombination":
        out = FormalCombination()
        for bv, coef in self.terms.items():
            out.add(bv, fn(bv, coef))
        return out

    def __add__(self, other: "FormalCombination") -> "FormalCombination":
        out = FormalCombination(self.terms)
        for bv, coef in other.terms.items():
            out.add(bv, coef)
        return out

    def __sub__(self, other: "FormalCombination") -> "FormalCombination":
        return self + other.scaled(-1)

    def __eq__(self, other):
        if not isinstance(other, FormalCombination):
            return NotImplemented
        return (self - other).is_zero()

    def is_zero(self) -> bool:
        return not self.terms

    def __len__(self):
        return len(self.terms)

    def to_dict(self) -> Dict[str, str]:
        return {str(bv): format_rat(coef) for bv, coef in self.items()}

    def __repr__(self):
        return f"FormalCombination({self.to_dict()})"


def span(first: int, last: int) -> range:
    """Levels first..last inclusive; empty when last < first."""
    return range(first, last + 1)


class _Vanishing(Exception):
    """An f-denominator pairs two equal values: the summand is exactly zero."""


def f_denominator(ctx: ModelContext, us: Iterable, vs: Iterable, kernel=None):
    us, vs = list(us), list(vs)
    for u in us:
        for v in vs:
            if is_zero(u - v):
                raise _Vanishing()
    return set_product(kernel or ctx.kernels.f, us, vs)


def inverse_f(ctx: ModelContext, us: Iterable, vs: Iterable, kernel=None):
    """1 / f(us, vs); zero when the two sets share a value."""
    try:
        return ONE / f_denominator(ctx, us, vs, kernel)
    except _Vanishing:
        return ZERO


def check_generic(zbar: Iterable, index: BetheIndex):
    """Action arguments must differ from every Bethe parameter."""
    values = index.values()
    for z in zbar:
        for v in values:
            if is_zero(z - v):
                raise PoleError(f"Action argument {format_rat(z)} coincides with a Bethe parameter")


def term_coefficient(ctx: ModelContext, i: int, j: int, zbar: Sequence, partition: IJPartition,
                     renormalized: bool = False):
    """
    One summand of the multiple action of T_ij(zbar) for the given partition.
    With renormalized=True the summand refers to the hatted vectors B(t) prod beta(t).
    """
    N = ctx.N
    k = ctx.kernels
    P = partition
    ratio = lambda ys, xs: izergin_over_f(list(ys), list(xs), 0, ctx.c)
    try:
        value = ctx.lam_set(1 if renormalized else N + 1, zbar)
        for s in span(j, i - 1):
            value = value * k.fp(P.I(s), P.III(s))
        for s in span(j, i - 2):
            value = value / f_denominator(ctx, P.I(s + 1), P.III(s))
        for s in span(1, i - 1):
            value = value * ratio(P.I(s), P.I(s - 1)) * k.fp(P.I(s), P.II(s))
            value = value / f_denominator(ctx, P.I(s), P.II(s - 1))
            if renormalized:
                value = value * ctx.beta_set(s, P.I(s))
        for s in span(j, N):
            if not renormalized:
                value = value * ctx.alpha_set(s, P.III(s))
            value = value * ratio(P.III(s + 1), P.III(s)) * k.fp(P.II(s), P.III(s))
            value = value / f_denominator(ctx, P.II(s + 1), P.III(s))
    except _Vanishing:
        return ZERO
    return value


def single_term_coefficient(ctx: ModelContext, i: int, j: int, z, partition: IJPartition):
    """The same summand for one argument, in the form with h-denominators."""
    N = ctx.N
    k = ctx.kernels
    P = partition
    try:
        value = ctx.lam_last(z)
        for s in span(j, i - 1):
            value = value * k.fp(P.I(s), P.III(s))
        for s in span(j, i - 2):
            value = value / f_denominator(ctx, P.I(s + 1), P.III(s))
        for s in span(1, i - 1):
            value = value * k.fp(P.I(s), P.II(s))
            value = value / (k.hp(P.I(s), P.I(s - 1)) * f_denominator(ctx, P.I(s), P.II(s - 1)))
        for s in span(j, N):
            value = value * ctx.alpha_set(s, P.III(s)) * k.fp(P.II(s), P.III(s))
            value = value / (k.hp(P.III(s + 1), P.III(s)) * f_denominator(ctx, P.II(s + 1), P.III(s)))
    except _Vanishing:
        return ZERO
    return value


def _require_side(bv: FormalBV, side: str):
    if bv.side != side:
        raise ValueError(f"Expected a {side} vector, got {bv}")


def _check_indices(ctx: ModelContext, *indices: int):
    for i in indices:
        if not 1 <= i <= ctx.N + 1:
            raise ValueError(f"Index {i} out of range 1..{ctx.N + 1}")


def act_single(ctx: ModelContext, i: int, j: int, z, B: FormalBV) -> FormalCombination:
    """T_ij(z) B(t)."""
    _require_side(B, "ket")
    _check_indices(ctx, i, j)
    B.index.check_algebra(ctx.spec)
    check_generic([z], B.index)
    result = FormalCombination()
    for part in enumerate_ij_partitions(B.index, [z], i, j):
        result.add(FormalBV(part.result_index(), "ket"), single_term_coefficient(ctx, i, j, z, part))
    return result


def act_multiple(ctx: ModelContext, i: int, j: int, zbar: Iterable, B: FormalBV,
                 renormalized: bool = False) -> FormalCombination:
    """T_ij(z_1)...T_ij(z_p) B(t); the factors commute."""
    _require_side(B, "ket")
    _check_indices(ctx, i, j)
    B.index.check_algebra(ctx.spec)
    zs = list(ParamSet(zbar))
    if not zs:
        raise ValueError("The action needs at least one argument")
    check_generic(zs, B.index)
    result = FormalCombination()
    for part in enumerate_ij_partitions(B.index, zs, i, j):
        result.add(FormalBV(part.result_index(), "ket"),
                   term_coefficient(ctx, i, j, zs, part, renormalized))
    return result


def act_multiple_renormalized(ctx: ModelContext, i: int, j: int, zbar: Iterable,
                              B: FormalBV) -> FormalCombination:
    """Action on the hatted vectors B(t) prod_s beta_s(t^s); symbols denote hatted vectors."""
    return act_multiple(ctx, i, j, zbar, B, renormalized=True)


def act_dual(ctx: ModelContext, j: int, i: int, zbar: Iterable, C: FormalBV,
             renormalized: bool = False) -> FormalCombination:
    """C(t) T_ji(zbar): the coefficients of T_ij(zbar) B(t) on dual symbols."""
    _require_side(C, "bra")
    return act_multiple(ctx, i, j, zbar, C.dual(), renormalized).map_symbols(FormalBV.dual)


def act_dual_renormalized(ctx: ModelContext, j: int, i: int, zbar: Iterable,
                          C: FormalBV) -> FormalCombination:
    return act_dual(ctx, j, i, zbar, C, renormalized=True)


def act_zero_mode(ctx: ModelContext, i: int, B: FormalBV) -> FormalCombination:
    """T_{i+1,i}[0] B(t)."""
    if not 1 <= i <= ctx.N:
        raise ValueError(f"Zero-mode level {i} out of range 1..{ctx.N}")
    k = ctx.kernels
    t = B.index
    level = t.level(i)
    result = FormalCombination()
    for tl in level:
        rest = level.without([tl])
        lowering = ctx.kappa(i + 1) * ctx.alpha(i, tl) * k.fp(rest, [tl]) * inverse_f(ctx, t.level(i + 1), [tl])
        raising = ctx.kappa(i) * k.fp([tl], rest) * inverse_f(ctx, [tl], t.level(i - 1))
        result.add(FormalBV(t.with_level(i, rest), B.side), lowering - raising)
    return result


def apply_to(fn: Callable[[FormalBV], FormalCombination],
             combination: FormalCombination) -> FormalCombination:
    """Linear extension of a symbol rewrite."""
    result = FormalCombination()
    for bv, coef in combination.items():
        result = result + fn(bv).scaled(coef)
    return result


def act_transfer(ctx: ModelContext, z, B: FormalBV) -> FormalCombination:
    """Transfer matrix: sum of the diagonal elements T_ii(z)."""
    result = FormalCombination()
    for i in span(1, ctx.N + 1):
        result = result + act_single(ctx, i, i, z, B)
    return result


def eigenvalue_tau(ctx: ModelContext, z, t: BetheIndex):
    k = ctx.kernels
    value = ZERO
    for i in span(1, ctx.N + 1):
        value = value + ctx.lam(i, z) * k.fp([z], t.level(i - 1)) * k.fp(t.level(i), [z])
    return value


def bethe_rhs(ctx: ModelContext, t: BetheIndex, i: int, tl):
    k = ctx.kernels
    rest = t.level(i).without([tl])
    return (k.fp([tl], rest) / k.fp(rest, [tl])
            * k.fp(t.level(i + 1), [tl]) / k.fp([tl], t.level(i - 1)))


def bethe_residual(ctx: ModelContext, t: BetheIndex) -> List:
    """alpha_i(t) minus the right-hand side of the Bethe equations, per parameter."""
    return [ctx.alpha(i, tl) - bethe_rhs(ctx, t, i, tl)
            for i in span(1, t.N) for tl in t.level(i)]


def onshell_context(ctx: ModelContext, t: BetheIndex) -> ModelContext:
    """Context whose alpha at the points of t satisfies the Bethe equations."""
    overrides = {(i, tl): bethe_rhs(ctx, t, i, tl) for i in span(1, t.N) for tl in t.level(i)}
    return ctx.derive("on-shell", alpha_overrides=overrides)


def generalized_context(ctx: ModelContext, t: BetheIndex) -> ModelContext:
    """alpha_s(t^s_j) = 0 for every parameter of t."""
    overrides = {(s, v): ZERO for s in span(1, t.N) for v in t.level(s)}
    return ctx.derive("generalized", alpha_overrides=overrides)


def generalized_beta_context(ctx: ModelContext, t: BetheIndex) -> ModelContext:
    """beta_s(t^s_j) = 0 for every parameter of t."""
    overrides = {(s, v): ZERO for s in span(1, t.N) for v in t.level(s)}
    return ctx.derive("generalized-beta", beta_overrides=overrides)


def commutator_expected(ctx: ModelContext, i: int, j: int, ell: int, z, B: FormalBV) -> FormalCombination:
    expected = FormalCombination()
    if i == ell:
        expected = expected + act_single(ctx, i + 1, j, z, B).scaled(ctx.kappa(i))
    if ell == j - 1:
        expected = expected - act_single(ctx, i, j - 1, z, B).scaled(ctx.kappa(j))
    return expected


def verify_zero_mode_commutator(ctx: ModelContext, i: int, j: int, ell: int, z,
                                B: FormalBV) -> CheckOutcome:
    """[T_ij(z), T_{l+1,l}[0]] B = delta_{il} kappa_i T_{i+1,j}(z) B - delta_{l,j-1} kappa_j T_{i,j-1}(z) B."""
    single = lambda bv: act_single(ctx, i, j, z, bv)
    zero_mode = lambda bv: act_zero_mode(ctx, ell, bv)
    commutator = apply_to(single, zero_mode(B)) - apply_to(zero_mode, single(B))
    return compare_combinations(commutator, commutator_expected(ctx, i, j, ell, z, B))


def check_composition(ctx: ModelContext, i: int, j: int, zbar: Sequence, B: FormalBV) -> CheckOutcome:
    """act_multiple against repeated act_single."""
    composed = FormalCombination.single(B)
    for z in reversed(list(zbar)):
        composed = apply_to(lambda bv: act_single(ctx, i, j, z, bv), composed)
    return compare_combinations(act_multiple(ctx, i, j, zbar, B), composed)


def check_single_reduction(ctx: ModelContext, i: int, j: int, z, B: FormalBV) -> CheckOutcome:
    """The multiple action at p = 1 equals the single action term by term."""
    return compare_combinations(act_multiple(ctx, i, j, [z], B), act_single(ctx, i, j, z, B))


def check_dual_mirror(ctx: ModelContext, i: int, j: int, zbar: Sequence, B: FormalBV) -> CheckOutcome:
    dual = act_dual(ctx, j, i, zbar, B.dual()).map_symbols(FormalBV.dual)
    return compare_combinations(dual, act_multiple(ctx, i, j, zbar, B))


def check_renormalized_action(ctx: ModelContext, i: int, j: int, zbar: Sequence,
                              B: FormalBV) -> CheckOutcome:
    """Hatted coefficients equal plain ones times prod beta(t) / prod beta(w_II)."""
    def beta_weight(index: BetheIndex):
        value = ONE
        for s in span(1, index.N):
            value = value * ctx.beta_set(s, index.level(s))
        return value

    source = beta_weight(B.index)
    plain = act_multiple(ctx, i, j, zbar, B).map_coefficients(
        lambda bv, coef: coef * source / beta_weight(bv.index))
    return compare_combinations(act_multiple_renormalized(ctx, i, j, zbar, B), plain)


def check_zero_mode_limit(ctx: ModelContext, i: int, B: FormalBV) -> CheckOutcome:
    """
    (u/c) T_{i+1,i}(u) B at u -> infinity against T_{i+1,i}[0] B.
    Only symbols free of u contribute to the limit.
    """
    u = UniRat.var()
    symbolic = act_multiple(ctx, i + 1, i, [u], B)
    limit = FormalCombination()
    for bv, coef in symbolic.items():
        if bv.is_symbolic():
            continue
        limit.add(bv, limit_at(coef * u / ctx.c, INFINITY))
    return compare_combinations(limit, act_zero_mode(ctx, i, B))


def check_eigenvector(ctx: ModelContext, z, t: BetheIndex) -> CheckOutcome:
    """On-shell: T(z) B(t) = tau(z;t) B(t) with every other coefficient 0."""
    onshell = onshell_context(ctx, t)
    B = FormalBV(t)
    return compare_combinations(act_transfer(onshell, z, B),
                                FormalCombination.single(B, eigenvalue_tau(onshell, z, t)))


def check_wanted_term(ctx: ModelContext, z, t: BetheIndex) -> CheckOutcome:
    """Free mode: the coefficient of B(t) in T(z) B(t) is tau(z;t)."""
    B = FormalBV(t)
    return compare_values(act_transfer(ctx, z, B).coefficient(B), eigenvalue_tau(ctx, z, t))


def _pair_partitions(z, t: BetheIndex, i: int, tl) -> Tuple[IJPartition, IJPartition]:
    N = t.N
    zs = ParamSet([z])
    rest = t.level(i).without([tl])
    middle = rest.union([z])
    first_a, second_a, third_a = [zs], [EMPTY], [EMPTY]
    first_b, second_b, third_b = [zs], [EMPTY], [EMPTY]
    for s in span(1, N):
        if s < i:
            for lists in ((first_a, second_a, third_a), (first_b, second_b, third_b)):
                lists[0].append(zs)
                lists[1].append(t.level(s))
                lists[2].append(EMPTY)
        elif s == i:
            first_a.append(ParamSet([tl]))
            second_a.append(middle)
            third_a.append(EMPTY)
            first_b.append(EMPTY)
            second_b.append(middle)
            third_b.append(ParamSet([tl]))
        else:
            for lists in ((first_a, second_a, third_a), (first_b, second_b, third_b)):
                lists[0].append(EMPTY)
                lists[1].append(t.level(s))
                lists[2].append(zs)
    for lists in ((first_a, second_a, third_a), (first_b, second_b, third_b)):
        lists[0].append(EMPTY)
        lists[1].append(EMPTY)
        lists[2].append(zs)
    return (IJPartition(tuple(first_a), tuple(second_a), tuple(third_a)),
            IJPartition(tuple(first_b), tuple(second_b), tuple(third_b)))


def unwanted_pair_terms(ctx: ModelContext, z, t: BetheIndex, i: int, ell: int):
    """
    The two summands of T(z) B(t) producing B(t with t^i_ell replaced by z):
    one from T_{i+1,i+1}(z), one from T_{i,i}(z). Returns (their sum, closed form).
    """
    if not 1 <= i <= t.N:
        raise ValueError(f"Level {i} out of range 1..{t.N}")
    k = ctx.kernels
    tl = t.level(i)[ell]
    rest = t.level(i).without([tl])
    upper, lower = _pair_partitions(z, t, i, tl)
    pair_sum = (term_coefficient(ctx, i + 1, i + 1, [z], upper)
                + term_coefficient(ctx, i, i, [z], lower))
    closed = (ctx.lam(i + 1, z) * k.g(z, tl) * k.fp([z], t.level(i - 1)) * k.fp(t.level(i + 1), [z])
              * (ctx.alpha(i, tl) * k.fp(rest, [tl]) / k.fp(t.level(i + 1), [tl])
                 - k.fp([tl], rest) / k.fp([tl], t.level(i - 1))))
    return pair_sum, closed
