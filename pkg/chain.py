"""
Brute-force oracle: the fundamental inhomogeneous twisted spin chain for
gl(m|n), with exact monodromy entries, explicit Bethe vectors where they can
be built, and matrix-level comparisons against the formal engine.

Basis states are tuples of site indices in 1..m+n. The reference state has
every site in e_1. Operators act matrix-free on sparse vectors; the
monodromy is K R_{0L}(u, xi_L) ... R_{01}(u, xi_1) with R = I + g(u, xi) P
and P the graded permutation.
"""
import itertools
import logging
import os
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

from action import FormalBV, FormalCombination, act_multiple, act_zero_mode, eigenvalue_tau, span
from check_outcome import CheckOutcome, compare_values
from exactmath import (
    INFINITY, ONE, ZERO, AlgebraSpec, GenericDraw, PoleError, UniRat, f, format_rat, g, graded_f, h,
    hashed_rat, is_zero, limit_at,
)
from model_context import ContextFactory, ModelContext
from partitions import BetheIndex, ParamSet
from scalar import graded_scalar_product_sum, scalar_product_sum
from superaction import graded_act_multiple, graded_act_zero_mode, symmetric_product_normalizer

logger = logging.getLogger("bethe")

Basis = Tuple[int, ...]

GL2 = AlgebraSpec(2, 0)
GL11 = AlgebraSpec(1, 1)


class ChainCapError(ValueError):
    """The Hilbert space of the chain exceeds the configured dimension cap."""


def dimension_cap() -> int:
    return int(os.getenv("BETHE_CHAIN_DIM_CAP", "4096"))


@dataclass(frozen=True)
class ChainSpec:
    """Algebra, inhomogeneities xi_1..xi_L, twist kappa_1..kappa_{N+1} and c."""
    spec: AlgebraSpec
    xi: Tuple[Fraction, ...]
    kappa: Tuple[Fraction, ...]
    c: Fraction = ONE

    def __post_init__(self):
        object.__setattr__(self, "xi", tuple(Fraction(x) for x in self.xi))
        object.__setattr__(self, "kappa", tuple(Fraction(k) for k in self.kappa))
        object.__setattr__(self, "c", Fraction(self.c))
        if not self.xi:
            raise ValueError("A chain needs at least one site")
        if len(set(self.xi)) != len(self.xi):
            raise ValueError(f"Inhomogeneities must be distinct: {[format_rat(x) for x in self.xi]}")
        if len(self.kappa) != self.spec.N + 1:
            raise ValueError(f"Expected {self.spec.N + 1} twist values, got {len(self.kappa)}")
        if any(k == 0 for k in self.kappa):
            raise ValueError("Twist values must be nonzero")
        if self.c == 0:
            raise ValueError("The constant c must be nonzero")
        cap = dimension_cap()
        if self.dim > cap:
            raise ChainCapError(f"Chain dimension {self.dim} exceeds the cap {cap}")

    @classmethod
    def build(cls, spec: AlgebraSpec, sites: int, seed: int = 0, c=ONE,
              kappa: Optional[Sequence] = None) -> "ChainSpec":
        """Chain with seeded generic inhomogeneities and, unless given, a seeded twist."""
        if sites < 1:
            raise ValueError("A chain needs at least one site")
        cap = dimension_cap()
        if (spec.m + spec.n) ** sites > cap:
            raise ChainCapError(f"Chain dimension {(spec.m + spec.n) ** sites} exceeds the cap {cap}")
        xi = GenericDraw(seed, c).values(sites)
        if kappa is None:
            kappa = tuple(hashed_rat(seed, "chain-kappa", i) for i in range(1, spec.N + 2))
        chain = cls(spec, tuple(xi), tuple(kappa), c)
        logger.debug(f"Built {spec.label()} chain with {sites} sites, dimension {chain.dim}")
        return chain

    @property
    def L(self) -> int:
        return len(self.xi)

    @property
    def size(self) -> int:
        """Dimension of one site, m + n."""
        return self.spec.m + self.spec.n

    @property
    def dim(self) -> int:
        return self.size ** self.L

    @property
    def vacuum_state(self) -> Basis:
        return (1,) * self.L

    def vacuum(self) -> "ExactVector":
        return ExactVector({self.vacuum_state: ONE})

    def basis(self) -> Iterator[Basis]:
        return itertools.product(range(1, self.size + 1), repeat=self.L)

    def lam(self, i: int, u):
        """Vacuum eigenvalue of T_ii(u)."""
        value = self.kappa[i - 1]
        if i == 1:
            for x in self.xi:
                value = value * graded_f(self.spec.parity(1), u, x, self.c)
        return value

    def context(self, seed: int = 0, gamma_profile: str = "standard") -> ModelContext:
        return ContextFactory.get_context("chain", self.spec, chain=self, seed=seed,
                                          gamma_profile=gamma_profile)

    def parameters(self, count: int, seed: int = 1) -> List[Fraction]:
        """Generic values away from every inhomogeneity and from each other."""
        draw = GenericDraw(seed, self.c)
        draw.reserve(self.xi)
        return draw.values(count)

    def to_dict(self) -> Dict:
        return {
            "algebra": self.spec.label(),
            "sites": self.L,
            "dim": self.dim,
            "xi": [format_rat(x) for x in self.xi],
            "kappa": [format_rat(k) for k in self.kappa],
            "c": format_rat(self.c),
        }


class ExactVector:
    """Sparse vector over basis tuples; zero coefficients are never stored."""

    def __init__(self, components: Optional[Dict[Basis, object]] = None):
        self.components: Dict[Basis, object] = {}
        for state, coef in (components or {}).items():
            self.add(state, coef)

    def add(self, state: Basis, coef):
        if is_zero(coef):
            return
        total = self.components.get(state, ZERO) + coef
        if is_zero(total):
            self.components.pop(state, None)
        else:
            self.components[state] = total

    def component(self, state: Basis):
        return self.components.get(state, ZERO)

    def items(self) -> Iterator[Tuple[Basis, object]]:
        return iter(sorted(self.components.items()))

    def scaled(self, k) -> "ExactVector":
        out = ExactVector()
        for state, coef in self.components.items():
            out.add(state, coef * k)
        return out

    def map_coefficients(self, fn: Callable[[object], object]) -> "ExactVector":
        out = ExactVector()
        for state, coef in self.components.items():
            out.add(state, fn(coef))
        return out

    def __add__(self, other: "ExactVector") -> "ExactVector":
        out = ExactVector(self.components)
        for state, coef in other.components.items():
            out.add(state, coef)
        return out

    def __sub__(self, other: "ExactVector") -> "ExactVector":
        return self + other.scaled(-1)

    def __eq__(self, other):
        if not isinstance(other, ExactVector):
            return NotImplemented
        return (self - other).is_zero()

    def is_zero(self) -> bool:
        return not self.components

    def __len__(self):
        return len(self.components)

    def first_difference(self, other: "ExactVector") -> Optional[Tuple[Basis, object, object]]:
        difference = self - other
        if difference.is_zero():
            return None
        state, _ = next(difference.items())
        return state, self.component(state), other.component(state)

    def to_dict(self) -> Dict[str, str]:
        return {",".join(str(k) for k in state): format_rat(coef) for state, coef in self.items()}

    def __repr__(self):
        return f"ExactVector({self.to_dict()})"


def compare_vectors(lhs: ExactVector, rhs: ExactVector) -> CheckOutcome:
    mismatch = lhs.first_difference(rhs)
    if mismatch is None:
        return CheckOutcome(True, lhs, rhs)
    state, a, b = mismatch
    return CheckOutcome(False, lhs, rhs, f"component {state}: {format_rat(a)} != {format_rat(b)}")


# ---------------------------------------------------------------------------
# Slot operators on tensor states
# ---------------------------------------------------------------------------

def _swap_sign(spec: AlgebraSpec, state: Basis, p: int, q: int) -> int:
    a, b = spec.parity(state[p]), spec.parity(state[q])
    between = sum(spec.parity(x) for x in state[p + 1:q])
    return -1 if (a * b + (a + b) * between) % 2 else 1


def _accumulate(target: Dict, state: Basis, coef):
    if is_zero(coef):
        return
    total = target.get(state, ZERO) + coef
    if is_zero(total):
        target.pop(state, None)
    else:
        target[state] = total


def _apply_r(spec: AlgebraSpec, states: Dict[Basis, object], p: int, q: int, weight) -> Dict[Basis, object]:
    """(1 + weight P_pq) for slots p < q; P_pq is the graded transposition."""
    out = dict(states)
    for state, coef in states.items():
        swapped = list(state)
        swapped[p], swapped[q] = state[q], state[p]
        _accumulate(out, tuple(swapped), weight * _swap_sign(spec, state, p, q) * coef)
    return out


def _monodromy(chain: ChainSpec, states: Dict[Basis, object], slot: int, u, first_site: int):
    """K R_{slot,L} ... R_{slot,1} with the sites stored from position first_site on."""
    for k, x in enumerate(chain.xi):
        states = _apply_r(chain.spec, states, slot, first_site + k, g(u, x, chain.c))
    return {state: chain.kappa[state[slot] - 1] * coef for state, coef in states.items()}


def _check_entry(chain: ChainSpec, *indices: int):
    for i in indices:
        if not 1 <= i <= chain.size:
            raise ValueError(f"Index {i} out of range 1..{chain.size}")


def _check_length(chain: ChainSpec, vector: ExactVector):
    for state in vector.components:
        if len(state) != chain.L:
            raise ValueError(f"Dimension mismatch: state {state} on a chain of {chain.L} sites")


def apply_entry(chain: ChainSpec, i: int, j: int, u, vector: ExactVector) -> ExactVector:
    """T_ij(u) applied to a chain vector; u may be a UniRat."""
    _check_entry(chain, i, j)
    _check_length(chain, vector)
    spec = chain.spec
    sign = -1 if (spec.parity(i) * spec.parity(j) + spec.parity(j)) % 2 else 1
    out = ExactVector()
    for sites, coef in vector.components.items():
        for state, value in _monodromy(chain, {(j,) + sites: coef}, 0, u, 1).items():
            if state[0] == i:
                out.add(state[1:], sign * value)
    return out


def operator_matrix(chain: ChainSpec, operator: Callable[[ExactVector], ExactVector]) -> Dict[Basis, ExactVector]:
    """Columns of a linear operator on every basis state."""
    return {state: operator(ExactVector({state: ONE})) for state in chain.basis()}


def monodromy_entry(chain: ChainSpec, i: int, j: int, u) -> Dict[Basis, ExactVector]:
    """The (i,j) auxiliary block of the monodromy as a dict of columns."""
    return operator_matrix(chain, lambda v: apply_entry(chain, i, j, u, v))


def zero_mode_apply(chain: ChainSpec, i: int, vector: ExactVector) -> ExactVector:
    """T_{i+1,i}[0] as the u -> infinity limit of (u/c) T_{i+1,i}(u)."""
    if not 1 <= i <= chain.spec.N:
        raise ValueError(f"Zero-mode level {i} out of range 1..{chain.spec.N}")
    u = UniRat.var()
    scale = u / chain.c
    return apply_entry(chain, i + 1, i, u, vector).map_coefficients(
        lambda coef: limit_at(coef * scale, INFINITY))


# ---------------------------------------------------------------------------
# Structural checks
# ---------------------------------------------------------------------------

def check_rtt(chain: ChainSpec, u, v) -> CheckOutcome:
    """R(u,v) T_1(u) T_2(v) = T_2(v) T_1(u) R(u,v) on aux x aux x chain, basis vector by basis vector."""
    spec = chain.spec
    weight = g(u, v, chain.c)
    for state in itertools.product(range(1, chain.size + 1), repeat=chain.L + 2):
        start = {state: ONE}
        lhs = _apply_r(spec, _monodromy(chain, _monodromy(chain, start, 1, v, 2), 0, u, 2), 0, 1, weight)
        rhs = _monodromy(chain, _monodromy(chain, _apply_r(spec, start, 0, 1, weight), 0, u, 2), 1, v, 2)
        outcome = compare_vectors(ExactVector(lhs), ExactVector(rhs))
        if not outcome:
            outcome.detail = f"basis {state}, {outcome.detail}"
            outcome.lhs = outcome.rhs = None
            return outcome
    return CheckOutcome(True)


def check_vacuum(chain: ChainSpec, u) -> CheckOutcome:
    """T_ii(u)|0> = lambda_i(u)|0> and T_ij(u)|0> = 0 for i > j."""
    ctx = chain.context()
    vacuum = chain.vacuum()
    for i in span(1, chain.size):
        for j in span(1, i):
            image = apply_entry(chain, i, j, u, vacuum)
            expected = vacuum.scaled(ctx.lam(i, u)) if i == j else ExactVector()
            outcome = compare_vectors(image, expected)
            if not outcome:
                outcome.detail = f"T_{i}{j}: {outcome.detail}"
                return outcome
    return CheckOutcome(True)


def check_asymptotics(chain: ChainSpec) -> CheckOutcome:
    """T_ij(u) -> delta_ij kappa_i as u -> infinity, entry by entry."""
    u = UniRat.var()
    for i in span(1, chain.size):
        for j in span(1, chain.size):
            for state, column in monodromy_entry(chain, i, j, u).items():
                limit = column.map_coefficients(lambda coef: limit_at(coef, INFINITY))
                expected = ExactVector({state: chain.kappa[i - 1]}) if i == j else ExactVector()
                outcome = compare_vectors(limit, expected)
                if not outcome:
                    outcome.detail = f"T_{i}{j} on {state}: {outcome.detail}"
                    return outcome
    return CheckOutcome(True)


# ---------------------------------------------------------------------------
# Explicit Bethe vectors
# ---------------------------------------------------------------------------

def _require_rank1(chain: ChainSpec):
    if chain.spec not in (GL2, GL11):
        raise ValueError(f"Explicit rank-1 vectors need gl(2) or gl(1|1), got {chain.spec.label()}")


def explicit_bv_rank1(chain: ChainSpec, t: Iterable) -> ExactVector:
    """
    gl(2): T_12(t)|0> / lambda_2(t).
    gl(1|1): B(t + {z}) = T_12(z) B(t) / (lambda_2(z) h(t, z)), adding values in ascending order.
    """
    _require_rank1(chain)
    vector = chain.vacuum()
    built = []
    for z in ParamSet(t):
        norm = chain.lam(2, z)
        if chain.spec.is_graded:
            for b in built:
                norm = norm * h(b, z, chain.c)
        vector = apply_entry(chain, 1, 2, z, vector).scaled(ONE / norm)
        built.append(z)
    return vector


def _self_normalized(chain: ChainSpec, i: int, j: int, zs: Sequence, target: BetheIndex) -> ExactVector:
    """T_ij(z_1)...T_ij(z_p)|0> divided by the coefficient the action formula predicts for target."""
    vector = chain.vacuum()
    for z in reversed(list(zs)):
        vector = apply_entry(chain, i, j, z, vector)
    ctx = chain.context()
    combination = act_multiple(ctx, i, j, zs, FormalBV(BetheIndex.empty(chain.spec.N)))
    norm = combination.coefficient(FormalBV(target))
    if len(combination) != 1 or is_zero(norm):
        raise ValueError(f"T_{i}{j} on the vacuum does not produce {target} alone")
    return vector.scaled(ONE / norm)


def explicit_bv_single_level(chain: ChainSpec, i: int, t: Iterable) -> ExactVector:
    """Bethe vector with only level i populated, normalized through the action formula."""
    if chain.spec.is_graded:
        raise ValueError("Single-level vectors are built for gl(N+1) chains only")
    N = chain.spec.N
    if not 1 <= i <= N:
        raise ValueError(f"Level {i} out of range 1..{N}")
    ts = ParamSet(t)
    if not ts:
        return chain.vacuum()
    return _self_normalized(chain, i, i + 1, list(ts), BetheIndex.empty(N).with_level(i, ts))


def explicit_bv_diagonal(chain: ChainSpec, z: Iterable) -> ExactVector:
    """B(z, ..., z) from T_{1,N+1}(z)|0>."""
    if chain.spec.is_graded:
        raise ValueError("Diagonal vectors are built for gl(N+1) chains only")
    zs = ParamSet(z)
    if not zs:
        return chain.vacuum()
    N = chain.spec.N
    return _self_normalized(chain, 1, N + 1, list(zs), BetheIndex(tuple(zs for _ in range(N))))


def explicit_bv(chain: ChainSpec, index: BetheIndex) -> ExactVector:
    """Explicit vector for any index in a constructible family."""
    index.check_algebra(chain.spec)
    populated = [s for s in span(1, index.N) if index.level(s)]
    if not populated:
        return chain.vacuum()
    if index.N == 1:
        return explicit_bv_rank1(chain, index.level(1))
    if len(populated) == 1:
        return explicit_bv_single_level(chain, populated[0], index.level(populated[0]))
    if len(set(index.levels)) == 1:
        return explicit_bv_diagonal(chain, index.level(1))
    raise ValueError(f"No explicit construction for {index} on {chain.spec.label()}")


def explicit_bra_rank1(chain: ChainSpec, x: Iterable) -> ExactVector:
    """
    Components of the dual vector C(x) as the functional v -> <0| T_21(x_1) ... T_21(x_r) v,
    normalized by lambda_2(x); gl(1|1) adds (-1)^{r(r-1)/2} / prod_{j<k} h(x_j, x_k).
    """
    _require_rank1(chain)
    xs = list(ParamSet(x))
    r = len(xs)
    norm = ONE
    for a in xs:
        norm = norm * chain.lam(2, a)
    if chain.spec.is_graded:
        for j, a in enumerate(xs):
            for b in xs[j + 1:]:
                norm = norm * h(a, b, chain.c)
        if (r * (r - 1) // 2) % 2:
            norm = -norm
    vacuum = chain.vacuum_state
    bra = ExactVector()
    for state in chain.basis():
        if state.count(2) != r:
            continue
        vector = ExactVector({state: ONE})
        for a in reversed(xs):
            vector = apply_entry(chain, 2, 1, a, vector)
        bra.add(state, vector.component(vacuum) / norm)
    return bra


def inner_product(bra: ExactVector, ket: ExactVector) -> Fraction:
    lengths = {len(state) for state in bra.components} | {len(state) for state in ket.components}
    if len(lengths) > 1:
        raise ValueError(f"Dimension mismatch: states of lengths {sorted(lengths)}")
    total = ZERO
    for state, coef in bra.components.items():
        total += coef * ket.component(state)
    return total


# ---------------------------------------------------------------------------
# Formal engine against matrices
# ---------------------------------------------------------------------------

def _expand(chain: ChainSpec, combination: FormalCombination) -> ExactVector:
    vector = ExactVector()
    for symbol, coef in combination.items():
        vector = vector + explicit_bv(chain, symbol.index).scaled(coef)
    return vector


def oracle_check_action(chain: ChainSpec, i: int, j: int, z: Iterable, t: BetheIndex) -> CheckOutcome:
    """Matrices on the explicit B(t) against the action formula re-expanded over explicit vectors."""
    ctx = chain.context()
    zs = list(ParamSet(z))
    direct = explicit_bv(chain, t)
    for value in reversed(zs):
        direct = apply_entry(chain, i, j, value, direct)
    if chain.spec.is_graded:
        formal = graded_act_multiple(ctx, i, j, zs, FormalBV(t))
        direct = direct.scaled(symmetric_product_normalizer(chain.spec, i, j, zs, chain.c))
    else:
        formal = act_multiple(ctx, i, j, zs, FormalBV(t))
    outcome = compare_vectors(direct, _expand(chain, formal))
    if not outcome:
        logger.warning(f"Action oracle mismatch for T_{i}{j} on {t}: {outcome.detail}")
    return outcome


def check_zero_mode_oracle(chain: ChainSpec, i: int, t: BetheIndex) -> CheckOutcome:
    """Chain-side T_{i+1,i}[0] on the explicit B(t) against the zero-mode formula."""
    ctx = chain.context()
    if chain.spec.is_graded:
        formal = graded_act_zero_mode(ctx, i, FormalBV(t))
    else:
        formal = act_zero_mode(ctx, i, FormalBV(t))
    return compare_vectors(zero_mode_apply(chain, i, explicit_bv(chain, t)), _expand(chain, formal))


def check_sum_formula_oracle(chain: ChainSpec, x: Iterable, t: Iterable) -> CheckOutcome:
    """Sum formula against the chain pairing C(x) B(t) at rank 1."""
    direct = inner_product(explicit_bra_rank1(chain, x), explicit_bv_rank1(chain, t))
    ctx = chain.context()
    xi, ti = BetheIndex.of(x), BetheIndex.of(t)
    if chain.spec.is_graded:
        formula = graded_scalar_product_sum(ctx, xi, ti)
    else:
        formula = scalar_product_sum(ctx, xi, ti)
    return compare_values(formula, direct)


def onshell_rank1_chain(xi: Sequence, t, c=ONE) -> ChainSpec:
    """gl(2) chain with kappa_2 = 1 and kappa_1 chosen so that the single root t is on shell."""
    product = ONE
    for x in xi:
        product = product * f(t, x, c)
    if product == 0:
        raise PoleError(f"No twist puts {format_rat(t)} on shell: lambda_1 vanishes there")
    return ChainSpec(GL2, tuple(xi), (ONE / product, ONE), c)


def transfer_residual(chain: ChainSpec, z, t: BetheIndex) -> ExactVector:
    """(sum_i T_ii(z) - tau(z; t)) B(t) on the explicit vector."""
    if chain.spec.is_graded:
        raise ValueError("The transfer residual is defined for gl(N+1) chains")
    ket = explicit_bv(chain, t)
    total = ExactVector()
    for i in span(1, chain.size):
        total = total + apply_entry(chain, i, i, z, ket)
    return total - ket.scaled(eigenvalue_tau(chain.context(), z, t))


def check_transfer_eigenvector(chain: ChainSpec, z, t: BetheIndex) -> CheckOutcome:
    residual = transfer_residual(chain, z, t)
    if residual.is_zero():
        return CheckOutcome(True)
    state, value = next(residual.items())
    return CheckOutcome(False, residual, None, f"residual component {state} is {format_rat(value)}")
