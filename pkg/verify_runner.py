"""
Verification suites: every identity of the engine registered as a check,
run on a thread pool and collected into an ordered, deterministic report.
"""
import logging
import os
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

from action import (
    FormalBV, check_composition, check_dual_mirror, check_eigenvector, check_renormalized_action,
    check_single_reduction, check_wanted_term, check_zero_mode_limit, span, unwanted_pair_terms,
    verify_zero_mode_commutator,
)
from chain import (
    GL11, GL2, ChainSpec, check_asymptotics, check_rtt, check_sum_formula_oracle,
    check_transfer_eigenvector, check_vacuum, check_zero_mode_oracle, onshell_rank1_chain,
    oracle_check_action,
)
from check_outcome import CheckOutcome, compare_values
from exactmath import (
    INFINITY, ONE, AlgebraSpec, GenericDraw, UniRat, f, format_rat, g, graded_f, h, limit_at, set_product,
)
from izergin import identity_izp, identity_lm1, izergin, izergin_over_f, izergin_over_f_reduced
from model_context import ContextFactory
from partitions import BetheIndex
from scalar import (
    SELECTORS, check_generalized_model_reduction, check_generalized_model_reduction_renormalized,
    check_graded_agreement, check_graded_mu_symmetry, check_graded_reduction, check_hc_agreement,
    check_hc_mu_symmetry, check_reflection, check_renormalized_sum, check_sp_symmetry, check_unrolled_base,
    graded_highest_coefficient, selector_applies,
)
from superaction import (
    check_graded_composition, check_graded_dual_mirror, check_phi_relation, check_t1N_reduction,
)

logger = logging.getLogger("bethe")


class CheckStatus(Enum):
    PASSED = "passed"
    FAILED = "failed"


def _jsonable(value):
    if isinstance(value, (Fraction, UniRat)):
        return format_rat(value)
    if isinstance(value, BetheIndex):
        return [level.to_json() for level in value.levels]
    if isinstance(value, AlgebraSpec):
        return value.label()
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def _scalar(value):
    if isinstance(value, (Fraction, UniRat, int)):
        return format_rat(value)
    return None


@dataclass
class CheckRecord:
    identity: str
    statement: str
    params: Dict[str, Any]
    status: CheckStatus = CheckStatus.FAILED
    lhs: Optional[Any] = None
    rhs: Optional[Any] = None
    detail: str = ""

    def to_dict(self):
        return {
            "identity": self.identity,
            "statement": self.statement,
            "params": _jsonable(self.params),
            "status": self.status.value,
            "lhs": _scalar(self.lhs),
            "rhs": _scalar(self.rhs),
            "detail": self.detail,
        }


@dataclass
class VerifyReport:
    suite: str
    seed: int
    records: List[CheckRecord] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.status == CheckStatus.PASSED for r in self.records)

    def summary(self) -> Dict[str, int]:
        passed = sum(1 for r in self.records if r.status == CheckStatus.PASSED)
        return {"total": len(self.records), "passed": passed, "failed": len(self.records) - passed}

    def to_dict(self):
        return {
            "suite": self.suite,
            "seed": self.seed,
            "passed": self.passed,
            "summary": self.summary(),
            "records": [r.to_dict() for r in self.records],
        }


Check = Tuple[str, str, Dict[str, Any], Callable[[], CheckOutcome]]


class VerifyRunner:
    """
    Collects checks for one or more suites and runs them on a thread pool.
    Records keep their registration order.
    """

    def __init__(self, seed: int = 0, c=ONE, workers: Optional[int] = None):
        self.seed = seed
        self.c = Fraction(c)
        self.workers = workers or int(os.getenv("BETHE_VERIFY_WORKERS", "4"))
        self.checks: List[Check] = []

    def register(self, identity: str, statement: str, params: Dict[str, Any],
                 check: Callable[[], CheckOutcome]):
        self.checks.append((identity, statement, params, check))

    def run_suite(self, suite: str) -> VerifyReport:
        if suite != "all" and suite not in SUITES:
            raise ValueError(f"Unknown suite: {suite}")
        self.checks = []
        for name in (SUITE_ORDER if suite == "all" else [suite]):
            SUITES[name](self)
        return self.execute(suite)

    def execute(self, suite: str) -> VerifyReport:
        logger.info(f"Running suite {suite}: {len(self.checks)} checks on {self.workers} workers")
        records: List[Optional[CheckRecord]] = [None] * len(self.checks)
        with ThreadPoolExecutor(max_workers=self.workers) as pool:
            futures = {pool.submit(self._run_one, check): k for k, check in enumerate(self.checks)}
            for future in as_completed(futures):
                records[futures[future]] = future.result()
        report = VerifyReport(suite, self.seed, records)
        summary = report.summary()
        logger.info(f"Suite {suite} finished: {summary['passed']}/{summary['total']} passed")
        return report

    def _run_one(self, check: Check) -> CheckRecord:
        identity, statement, params, fn = check
        record = CheckRecord(identity, statement, params)
        try:
            outcome = fn()
            record.status = CheckStatus.PASSED if outcome.passed else CheckStatus.FAILED
            record.lhs, record.rhs, record.detail = outcome.lhs, outcome.rhs, outcome.detail
            if not outcome.passed:
                logger.warning(f"Check {identity} failed: {outcome.detail}")
        except Exception as e:
            logger.error(f"Check {identity} raised: {e}")
            record.status = CheckStatus.FAILED
            record.detail = str(e)
        return record


def _index(draw: GenericDraw, sizes: Sequence[int]) -> BetheIndex:
    return BetheIndex(tuple(tuple(draw.values(k)) for k in sizes))


def _pair_outcome(pair: Tuple) -> CheckOutcome:
    return compare_values(*pair)


# ---------------------------------------------------------------------------
# Suites
# ---------------------------------------------------------------------------

def register_kernels(runner: VerifyRunner):
    c = runner.c
    draw = GenericDraw(runner.seed, c)
    U = UniRat.var()
    for _ in range(3):
        u, v = draw.values(2)
        params = {"u": u, "v": v, "c": c}
        runner.register("kernel-f", "f = 1 + g", params,
                        lambda u=u, v=v: compare_values(f(u, v, c), 1 + g(u, v, c)))
        runner.register("kernel-h", "h = f / g", params,
                        lambda u=u, v=v: compare_values(h(u, v, c), f(u, v, c) / g(u, v, c)))
        runner.register("kernel-graded", "odd-colored f runs at -c", params,
                        lambda u=u, v=v: compare_values(graded_f(1, u, v, c), f(u, v, -c)))
        runner.register("kernel-limit", "(u/c) g(u, v) -> 1 as u -> infinity", params,
                        lambda v=v: compare_values(limit_at(g(U, v, c) * U / c, INFINITY), ONE))


def register_izergin(runner: VerifyRunner):
    c = runner.c
    for seed in range(runner.seed, runner.seed + 3):
        draw = GenericDraw(seed, c)
        for p in span(1, 4):
            xs, ys = draw.values(p), draw.values(p)
            runner.register("izergin-shift", "K(x - c|y) = (-1)^p K(y|x) / f(y, x)",
                            {"x": xs, "y": ys, "c": c},
                            lambda xs=xs, ys=ys: _pair_outcome(identity_izp(xs, ys, c)))
            runner.register("izergin-symmetry", "K(y|x) is symmetric in y and in x",
                            {"x": xs, "y": ys, "c": c},
                            lambda xs=xs, ys=ys: compare_values(izergin(ys, xs, 0, c),
                                                                izergin(ys[::-1], xs[::-1], 0, c)))
        for a, b in ((1, 1), (1, 2), (2, 1), (2, 2)):
            us, vs, ws = draw.values(a), draw.values(b), draw.values(a + b)
            runner.register("izergin-sum", "sum over splits of w of K(w_I|u) K(v|w_II) f(w_II, w_I)",
                            {"u": us, "v": vs, "w": ws, "c": c},
                            lambda us=us, vs=vs, ws=ws: _pair_outcome(identity_lm1(us, vs, ws, c)))
        shared = draw.values(2)
        ys = shared + draw.values(1)
        xs = shared + draw.values(1)
        runner.register("izergin-regularized", "epsilon limit of K/f is independent of the order",
                        {"x": xs, "y": ys, "c": c},
                        lambda xs=xs, ys=ys: compare_values(izergin_over_f(ys, xs, 0, c, "forward"),
                                                            izergin_over_f(ys, xs, 0, c, "reverse")))
        runner.register("izergin-reduced", "epsilon limit of K/f equals the common-element reduction",
                        {"x": xs, "y": ys, "c": c},
                        lambda xs=xs, ys=ys: compare_values(izergin_over_f(ys, xs, 0, c),
                                                            izergin_over_f_reduced(ys, xs, 0, c)))


def register_action(runner: VerifyRunner):
    c = runner.c
    seed = runner.seed
    shapes = {1: (2,), 2: (1, 1), 3: (1, 1, 1)}
    for N, sizes in shapes.items():
        spec = AlgebraSpec.gl(N + 1)
        ctx = ContextFactory.get_context("free", spec, seed=seed, c=c)
        draw = GenericDraw(seed + N, c)
        t = _index(draw, sizes)
        B = FormalBV(t)
        z, z2, z3 = draw.values(3)
        base = {"algebra": spec, "t": t, "z": z}
        for i in span(1, N + 1):
            for j in span(1, N + 1):
                for ell in span(1, N):
                    runner.register("zero-mode-commutator", "[T_ij(z), T_{l+1,l}[0]] by rewriting",
                                    dict(base, i=i, j=j, l=ell),
                                    lambda ctx=ctx, i=i, j=j, ell=ell, z=z, B=B:
                                    verify_zero_mode_commutator(ctx, i, j, ell, z, B))
        for i in span(1, N):
            runner.register("zero-mode-limit", "(u/c) T_{i+1,i}(u) -> T_{i+1,i}[0]", dict(base, i=i),
                            lambda ctx=ctx, i=i, B=B: check_zero_mode_limit(ctx, i, B))
        if N > 2:
            continue
        for i in span(1, N + 1):
            for j in span(1, N + 1):
                params = dict(base, i=i, j=j, zbar=[z, z2])
                runner.register("multiple-action", "T_ij(z1) T_ij(z2) B = composed single actions", params,
                                lambda ctx=ctx, i=i, j=j, B=B: check_composition(ctx, i, j, [z, z2], B))
                runner.register("single-reduction", "p = 1 multiple action equals the single action",
                                dict(base, i=i, j=j),
                                lambda ctx=ctx, i=i, j=j, B=B: check_single_reduction(ctx, i, j, z, B))
                runner.register("dual-action", "C T_ji mirrors T_ij B", params,
                                lambda ctx=ctx, i=i, j=j, B=B: check_dual_mirror(ctx, i, j, [z, z2], B))
                runner.register("renormalized-action", "hatted action equals rescaled plain action",
                                dict(base, i=i, j=j),
                                lambda ctx=ctx, i=i, j=j, B=B: check_renormalized_action(ctx, i, j, [z], B))
        if N == 1:
            for i, j in ((1, 2), (2, 1), (1, 1)):
                zs = [z, z2, z3]
                runner.register("multiple-action", "p = 3 multiple action equals composed single actions",
                                dict(base, i=i, j=j, zbar=zs),
                                lambda ctx=ctx, i=i, j=j, B=B, zs=zs: check_composition(ctx, i, j, zs, B))
        runner.register("eigenvector", "on-shell T(z) B(t) = tau(z; t) B(t)", base,
                        lambda ctx=ctx, t=t: check_eigenvector(ctx, z, t))
        runner.register("wanted-term", "coefficient of B(t) in T(z) B(t) is tau(z; t)", base,
                        lambda ctx=ctx, t=t: check_wanted_term(ctx, z, t))
        for i in span(1, N):
            runner.register("unwanted-pair", "two partitions producing t^i_0 -> z sum to the closed form",
                            dict(base, i=i),
                            lambda ctx=ctx, t=t, i=i: _pair_outcome(unwanted_pair_terms(ctx, z, t, i, 0)))


def register_graded(runner: VerifyRunner):
    c = runner.c
    seed = runner.seed
    draw = GenericDraw(seed, c)
    gl21 = AlgebraSpec(2, 1)
    us, vs = draw.values(2), draw.values(2)
    runner.register("phi-relation", "Phi_m(u,v) = (-1)^{#u #v} Phi-hat_m(u,v)",
                    {"algebra": gl21, "u": us, "v": vs},
                    lambda: check_phi_relation(gl21, us, vs, c))
    for spec, sizes in ((GL11, (1,)), (gl21, (1, 1))):
        ctx = ContextFactory.get_context("free", spec, seed=seed, c=c)
        t = _index(draw, sizes)
        B = FormalBV(t)
        zs = draw.values(2)
        base = {"algebra": spec, "t": t, "zbar": zs}
        runner.register("graded-t1N", "symmetric T_{1,N+1}(zbar) equals repeated single additions", base,
                        lambda ctx=ctx, zs=zs, B=B: check_t1N_reduction(ctx, zs, B))
        for i in span(1, spec.N + 1):
            for j in span(1, spec.N + 1):
                runner.register("graded-dual-action", "C T_ji is the antimorphism image of T_ij B",
                                dict(base, i=i, j=j, zbar=zs[:1]),
                                lambda ctx=ctx, i=i, j=j, zs=zs, B=B: check_graded_dual_mirror(ctx, i, j, zs[:1], B))
        if spec == GL11:
            for i in span(1, 2):
                for j in span(1, 2):
                    runner.register("graded-multiple-action", "symmetric product equals composed single actions",
                                    dict(base, i=i, j=j),
                                    lambda ctx=ctx, i=i, j=j, zs=zs, B=B: check_graded_composition(ctx, i, j, zs, B))
    for r in (1, 2):
        x, t = BetheIndex.of(draw.values(r)), BetheIndex.of(draw.values(r))
        for selector in SELECTORS:
            expected = set_product(lambda a, b: g(a, b, c), x.level(1), t.level(1))
            runner.register("graded-base", "Z^{1|1}(x|t) = g(x, t)", {"x": x, "t": t, "selector": selector},
                            lambda x=x, t=t, selector=selector, expected=expected:
                            compare_values(graded_highest_coefficient(x, t, GL11, selector, c), expected))
        runner.register("graded-mu", "graded reordering symmetry", {"algebra": GL11, "x": x, "t": t},
                        lambda x=x, t=t: check_graded_mu_symmetry(x, t, GL11, c))
        runner.register("graded-reflection", "Z^{m|n}(x|t) = (-1)^{r_m} Z^{n|m}(reversed t|reversed x)",
                        {"algebra": GL11, "x": x, "t": t},
                        lambda x=x, t=t: check_reflection(x, t, GL11, c))
    x, t = _index(draw, (1, 1)), _index(draw, (1, 1))
    for spec in (AlgebraSpec(3, 0), AlgebraSpec(0, 3)):
        for selector in SELECTORS:
            if not selector_applies(spec, selector):
                continue
            runner.register("graded-reduction", "gl(m|0) and gl(0|n) reduce to the plain recursion",
                            {"algebra": spec, "x": x, "t": t, "selector": selector},
                            lambda spec=spec, selector=selector: check_graded_reduction(x, t, spec, selector, c))
    runner.register("graded-agreement", "applicable graded recursions agree", {"algebra": gl21, "x": x, "t": t},
                    lambda: check_graded_agreement(x, t, gl21, c))
    runner.register("graded-reflection", "Z^{m|n}(x|t) = (-1)^{r_m} Z^{n|m}(reversed t|reversed x)",
                    {"algebra": gl21, "x": x, "t": t},
                    lambda: check_reflection(x, t, gl21, c))
    runner.register("graded-mu", "graded reordering symmetry", {"algebra": gl21, "x": x, "t": t},
                    lambda: check_graded_mu_symmetry(x, t, gl21, c))


_AGREEMENT_SIZES = ((1, 1), (2, 1), (1, 2), (1, 1, 1), (2, 1, 1), (1, 2, 1), (2, 2, 2))
_MU_SIZES = ((1, 1), (2, 1), (1, 2), (1, 1, 1))


def register_scalar(runner: VerifyRunner):
    c = runner.c
    seed = runner.seed
    draw = GenericDraw(seed, c)
    for sizes in _AGREEMENT_SIZES:
        x, t = _index(draw, sizes), _index(draw, sizes)
        params = {"x": x, "t": t}
        runner.register("hc-agreement", "four recursions give the same highest coefficient", params,
                        lambda x=x, t=t: check_hc_agreement(x, t, c))
        if sizes not in _MU_SIZES:
            continue
        runner.register("hc-mu", "mu-symmetry of the highest coefficient", params,
                        lambda x=x, t=t: check_hc_mu_symmetry(x, t, c))
        runner.register("hc-mu", "last-level recursion against the mu-image of the first-level one",
                        dict(params, selector="first-level", mu_selector="last-level"),
                        lambda x=x, t=t: check_hc_mu_symmetry(x, t, c, "first-level", "last-level"))
    for r in (1, 2):
        x, t = BetheIndex.of(draw.values(r)), BetheIndex.of(draw.values(r))
        for selector in SELECTORS:
            runner.register("hc-base", "recursion unrolled to the empty algebra gives K(t|x)",
                            {"x": x, "t": t, "selector": selector},
                            lambda x=x, t=t, selector=selector: check_unrolled_base(x, t, selector, c))
    for N, sizes in ((1, (2,)), (2, (1, 1))):
        spec = AlgebraSpec.gl(N + 1)
        ctx = ContextFactory.get_context("free", spec, seed=seed, c=c)
        x, t = _index(draw, sizes), _index(draw, sizes)
        params = {"algebra": spec, "x": x, "t": t}
        runner.register("sp-symmetry", "S(x|t) = S(t|x)", params,
                        lambda ctx=ctx, x=x, t=t: check_sp_symmetry(ctx, x, t))
        runner.register("sp-renormalized", "beta-dressed sum equals the alpha form times beta weights", params,
                        lambda ctx=ctx, x=x, t=t: check_renormalized_sum(ctx, x, t))
        runner.register("generalized-model", "alpha(t) = 0 collapses the sum and the Q expectation value",
                        params, lambda ctx=ctx, x=x, t=t: check_generalized_model_reduction(ctx, x, t, ("bra", "ket")))
        runner.register("generalized-model-beta", "beta(t) = 0 collapses the hatted sum", params,
                        lambda ctx=ctx, x=x, t=t: check_generalized_model_reduction_renormalized(ctx, x, t))


# Level-1 vectors of gl(3) stay single-level under these entries.
_LEVEL_ONE_ENTRIES = ((1, 1), (2, 2), (3, 3), (2, 1), (3, 1), (3, 2), (1, 2))


def register_chain_checks(runner: VerifyRunner, chain: ChainSpec):
    """Every oracle that applies to the given chain."""
    spec = chain.spec
    base = {"chain": chain.to_dict()}
    u, v, z1, z2, a, b, t1, t2 = chain.parameters(8, runner.seed + 1)
    if chain.L <= 3:
        runner.register("chain-rtt", "R(u,v) T1(u) T2(v) = T2(v) T1(u) R(u,v)", dict(base, u=u, v=v),
                        lambda: check_rtt(chain, u, v))
        runner.register("chain-asymptotics", "T_ij(u) -> delta_ij kappa_i", base,
                        lambda: check_asymptotics(chain))
    runner.register("chain-vacuum", "reference state is an eigenvector of T_ii, killed by T_ij (i > j)",
                    dict(base, u=u), lambda: check_vacuum(chain, u))
    if spec in (GL2, GL11):
        ranks = (0, 1, 2) if spec == GL2 else (0, 1)
        counts = (1, 2) if spec == GL2 else (1,)
        for r in ranks:
            t = BetheIndex.of([t1, t2][:r])
            for p in counts:
                zs = [z1, z2][:p]
                for i in span(1, 2):
                    for j in span(1, 2):
                        runner.register("chain-action", "action formula against explicit matrices",
                                        dict(base, i=i, j=j, zbar=zs, t=t),
                                        lambda i=i, j=j, zs=zs, t=t: oracle_check_action(chain, i, j, zs, t))
            xs, ts = [a, b][:r], [t1, t2][:r]
            runner.register("chain-sum-formula", "sum formula against the chain pairing C(x) B(t)",
                            dict(base, x=xs, t=ts), lambda xs=xs, ts=ts: check_sum_formula_oracle(chain, xs, ts))
        runner.register("chain-zero-mode", "zero mode of the chain against the zero-mode formula",
                        dict(base, t=[t1]), lambda: check_zero_mode_oracle(chain, 1, BetheIndex.of([t1])))
        if spec == GL2:
            runner.register("chain-transfer", "on-shell transfer residual vanishes",
                            dict(base, z=z1, t=[t1]),
                            lambda: check_transfer_eigenvector(onshell_rank1_chain(chain.xi, t1, chain.c),
                                                               z1, BetheIndex.of([t1])))
    elif not spec.is_graded:
        N = spec.N
        empty = BetheIndex.empty(N)
        diagonal = BetheIndex(tuple((z1,) for _ in range(N)))
        runner.register("chain-action", "T_{1,N+1}(z) on the vacuum", dict(base, i=1, j=N + 1, zbar=[z1]),
                        lambda: oracle_check_action(chain, 1, N + 1, [z1], empty))
        runner.register("chain-action", "T_{1,N+1}(z2) on B(z1, ..., z1)", dict(base, i=1, j=N + 1, zbar=[z2]),
                        lambda: oracle_check_action(chain, 1, N + 1, [z2], diagonal))
        single = empty.with_level(1, [t1])
        if N == 2:
            for i, j in _LEVEL_ONE_ENTRIES:
                runner.register("chain-action", "action on a level-1 vector against explicit matrices",
                                dict(base, i=i, j=j, zbar=[z1], t=single),
                                lambda i=i, j=j: oracle_check_action(chain, i, j, [z1], single))
        for i in span(1, N):
            runner.register("chain-zero-mode", "zero mode of the chain against the zero-mode formula",
                            dict(base, i=i, t=single), lambda i=i: check_zero_mode_oracle(chain, i, single))


def register_chain(runner: VerifyRunner):
    for spec, sites in ((GL2, 3), (GL11, 2), (AlgebraSpec.gl(3), 2), (AlgebraSpec(2, 1), 2)):
        register_chain_checks(runner, ChainSpec.build(spec, sites, runner.seed, runner.c))


SUITES: Dict[str, Callable[[VerifyRunner], None]] = {
    "kernels": register_kernels,
    "izergin": register_izergin,
    "action": register_action,
    "graded": register_graded,
    "scalar": register_scalar,
    "chain": register_chain,
}

SUITE_ORDER = ("kernels", "izergin", "action", "graded", "scalar", "chain")
