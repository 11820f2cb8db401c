"""
Model context: algebra, constant c, twist and the free functional
parameters alpha_s(u) and lambda_{N+1}(u) the action formulas depend on.
"""
import logging
from abc import ABC, abstractmethod
from fractions import Fraction
from typing import Dict, Iterable, Optional, Sequence, Tuple

from exactmath import (
    ONE, AlgebraSpec, Kernels, PoleError, UniRat, format_rat, graded_f, hashed_rat, is_zero,
)
from memo_table import MemoTable

logger = logging.getLogger("bethe")

MODES = ("free", "on-shell", "generalized", "generalized-beta", "chain")


class IParameterSource(ABC):
    @abstractmethod
    def alpha(self, s: int, u):
        """
        Value of alpha_s(u) for 1 <= s <= N.
        Must accept plain rationals and UniRat arguments.
        """
        pass

    @abstractmethod
    def lam_last(self, u):
        """Value of lambda_{N+1}(u)."""
        pass

    def describe(self) -> Dict:
        return {"source": type(self).__name__}


def _moebius(ratio: Fraction, u, zero: Fraction, pole: Fraction):
    """ratio * (u - zero)/(u - pole): tends to ratio as u -> infinity."""
    if zero == pole:
        pole = pole + 1
    return ratio * (u - zero) / (u - pole)


class FreeSource(IParameterSource):
    """
    Seeded generic values keyed by (seed, kind, level, point).

    Symbolic arguments get a rational function of u with the asymptotics
    alpha_s -> kappa_s/kappa_{s+1} and lambda_{N+1} -> kappa_{N+1}.
    """

    def __init__(self, seed: int, kappa: Sequence[Fraction]):
        self.seed = seed
        self.kappa = tuple(kappa)

    def alpha(self, s: int, u):
        if isinstance(u, UniRat):
            ratio = self.kappa[s - 1] / self.kappa[s]
            return _moebius(ratio, u, hashed_rat(self.seed, "alpha-zero", s),
                            hashed_rat(self.seed, "alpha-pole", s))
        return hashed_rat(self.seed, "alpha", s, u)

    def lam_last(self, u):
        if isinstance(u, UniRat):
            return _moebius(self.kappa[-1], u, hashed_rat(self.seed, "lambda-zero"),
                            hashed_rat(self.seed, "lambda-pole"))
        return hashed_rat(self.seed, "lambda", u)

    def describe(self) -> Dict:
        return {"source": "free", "seed": self.seed}


class ChainSource(IParameterSource):
    """Vacuum eigenvalues of the fundamental inhomogeneous chain."""

    def __init__(self, spec: AlgebraSpec, kappa: Sequence[Fraction], xi: Sequence[Fraction], c=ONE):
        self.spec = spec
        self.kappa = tuple(kappa)
        self.xi = tuple(xi)
        self.c = Fraction(c)

    def alpha(self, s: int, u):
        ratio = self.kappa[s - 1] / self.kappa[s]
        if s > 1:
            return ratio
        value = ratio
        for x in self.xi:
            value = value * graded_f(self.spec.parity(1), u, x, self.c)
        return value

    def lam_last(self, u):
        return self.kappa[-1]

    def describe(self) -> Dict:
        return {"source": "chain", "xi": [format_rat(x) for x in self.xi]}


class ModelContext:
    """
    Algebra spec, constant c, twist kappa_1..kappa_{N+1} and the functional
    parameters. Values drawn from the source are memoized; overrides keyed
    by (level, point) take precedence.
    """

    def __init__(self, spec: AlgebraSpec, source: IParameterSource, c=ONE,
                 kappa: Optional[Sequence] = None, mode: str = "free",
                 gamma_profile: str = "standard", seed: int = 0):
        if mode not in MODES:
            raise ValueError(f"Unknown mode: {mode}")
        self.spec = spec
        self.source = source
        self.c = Fraction(c)
        if is_zero(self.c):
            raise ValueError("The constant c must be nonzero")
        self.kappa_values = tuple(Fraction(k) for k in (kappa or [ONE] * (spec.N + 1)))
        if len(self.kappa_values) != spec.N + 1:
            raise ValueError(f"Expected {spec.N + 1} twist values, got {len(self.kappa_values)}")
        if any(k == 0 for k in self.kappa_values):
            raise ValueError("Twist values must be nonzero")
        self.mode = mode
        self.gamma_profile = gamma_profile
        self.seed = seed
        self.kernels = Kernels(self.c)
        self.alpha_overrides: Dict[Tuple[int, object], Fraction] = {}
        self.beta_overrides: Dict[Tuple[int, object], Fraction] = {}
        self._alpha_memo = MemoTable(f"alpha:{spec.label()}:{seed}")
        self._lambda_memo = MemoTable(f"lambda:{spec.label()}:{seed}")

    @property
    def N(self) -> int:
        return self.spec.N

    def kappa(self, i: int) -> Fraction:
        return self.kappa_values[i - 1]

    def derive(self, mode: str, alpha_overrides: Optional[Dict] = None,
               beta_overrides: Optional[Dict] = None) -> "ModelContext":
        """Copy sharing source and memo tables, with additional overrides."""
        if mode not in MODES:
            raise ValueError(f"Unknown mode: {mode}")
        other = object.__new__(ModelContext)
        other.__dict__.update(self.__dict__)
        other.mode = mode
        other.alpha_overrides = dict(self.alpha_overrides)
        other.alpha_overrides.update(alpha_overrides or {})
        other.beta_overrides = dict(self.beta_overrides)
        other.beta_overrides.update(beta_overrides or {})
        return other

    def with_gamma_profile(self, name: str) -> "ModelContext":
        other = self.derive(self.mode)
        other.gamma_profile = name
        return other

    def alpha(self, s: int, u):
        key = (s, u)
        if key in self.alpha_overrides:
            return self.alpha_overrides[key]
        if key in self.beta_overrides:
            beta = self.beta_overrides[key]
            if beta == 0:
                raise PoleError(f"alpha_{s} is infinite at {format_rat(u)}")
            return 1 / beta
        return self._alpha_memo.get_or_insert(key, lambda: self.source.alpha(s, u))

    def beta(self, s: int, u):
        key = (s, u)
        if key in self.beta_overrides:
            return self.beta_overrides[key]
        return 1 / self.alpha(s, u)

    def alpha_set(self, s: int, us: Iterable):
        value = ONE
        for u in us:
            value = value * self.alpha(s, u)
        return value

    def beta_set(self, s: int, us: Iterable):
        value = ONE
        for u in us:
            value = value * self.beta(s, u)
        return value

    def lam_last(self, u):
        return self._lambda_memo.get_or_insert(u, lambda: self.source.lam_last(u))

    def lam(self, i: int, u):
        """lambda_i(u) = lambda_{N+1}(u) * prod_{s=i}^{N} alpha_s(u)."""
        value = self.lam_last(u)
        for s in range(i, self.N + 1):
            value = value * self.alpha(s, u)
        return value

    def lam_set(self, i: int, us: Iterable):
        value = ONE
        for u in us:
            value = value * self.lam(i, u)
        return value

    def get_status(self) -> Dict:
        return {
            "alpha_memo": self._alpha_memo.get_status(),
            "lambda_memo": self._lambda_memo.get_status(),
            "overrides": len(self.alpha_overrides) + len(self.beta_overrides),
        }

    def to_dict(self) -> Dict:
        data = {
            "algebra": self.spec.label(),
            "c": format_rat(self.c),
            "kappa": [format_rat(k) for k in self.kappa_values],
            "mode": self.mode,
            "gamma_profile": self.gamma_profile,
            "seed": self.seed,
        }
        data.update(self.source.describe())
        return data


def free_kappa(spec: AlgebraSpec, seed: int) -> Tuple[Fraction, ...]:
    return tuple(hashed_rat(seed, "kappa", i) for i in range(1, spec.N + 2))


class ContextFactory:
    @staticmethod
    def get_context(mode, spec: AlgebraSpec, **kwargs) -> ModelContext:
        seed = kwargs.get("seed", 0)
        profile = kwargs.get("gamma_profile", "standard")
        if mode == "free":
            kappa = kwargs.get("kappa") or free_kappa(spec, seed)
            return ModelContext(spec, FreeSource(seed, kappa), kwargs.get("c", ONE), kappa,
                                "free", profile, seed)
        elif mode == "chain":
            chain = kwargs["chain"]
            source = ChainSource(chain.spec, chain.kappa, chain.xi, chain.c)
            return ModelContext(chain.spec, source, chain.c, chain.kappa, "chain", profile, seed)
        else:
            raise ValueError(f"Unknown mode: {mode}")
