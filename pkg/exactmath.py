"""
Exact arithmetic for the Bethe-ansatz engine.

Every coefficient is a fractions.Fraction. Limits (epsilon regularization and
u -> infinity extraction) go through UniRat, a univariate rational function
over Fraction kept in lowest terms.
"""
import hashlib
import logging
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, List, Sequence, Tuple, Union

logger = logging.getLogger("bethe")

ONE = Fraction(1)
ZERO = Fraction(0)

# Primes used as denominators of generic draws.
DRAW_DENOMINATORS = (7, 11, 13, 17, 19, 23)
DRAW_RANGE = 200


class PoleError(ValueError):
    """Raised when a kernel or a limit hits a genuine pole."""


def parse_rat(text) -> Fraction:
    """Parse "p/q", "p" or an int into a Fraction."""
    if isinstance(text, Fraction):
        return text
    if isinstance(text, int):
        return Fraction(text)
    try:
        return Fraction(str(text).strip())
    except (ValueError, ZeroDivisionError) as e:
        raise ValueError(f"Invalid rational: {text!r}") from e


def format_rat(value) -> str:
    """Serialize a Fraction as "p/q" (or "p" when q = 1)."""
    if isinstance(value, UniRat):
        if value.is_constant():
            value = value.constant_value()
        else:
            return str(value)
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


# ---------------------------------------------------------------------------
# Dense polynomials over Fraction, low degree first
# ---------------------------------------------------------------------------

Poly = Tuple[Fraction, ...]


def _trim(coeffs: Sequence[Fraction]) -> Poly:
    coeffs = list(coeffs)
    while coeffs and coeffs[-1] == 0:
        coeffs.pop()
    return tuple(Fraction(x) for x in coeffs)


def _padd(a: Poly, b: Poly) -> Poly:
    size = max(len(a), len(b))
    return _trim([(a[k] if k < len(a) else ZERO) + (b[k] if k < len(b) else ZERO) for k in range(size)])


def _pneg(a: Poly) -> Poly:
    return tuple(-x for x in a)


def _pmul(a: Poly, b: Poly) -> Poly:
    if not a or not b:
        return ()
    out = [ZERO] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x == 0:
            continue
        for j, y in enumerate(b):
            out[i + j] += x * y
    return _trim(out)


def _pscale(a: Poly, k: Fraction) -> Poly:
    return _trim([x * k for x in a])


def _pdivmod(a: Poly, b: Poly) -> Tuple[Poly, Poly]:
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    rem = list(a)
    quot = [ZERO] * max(len(a) - len(b) + 1, 0)
    lead = b[-1]
    while len(rem) >= len(b) and rem:
        shift = len(rem) - len(b)
        factor = rem[-1] / lead
        quot[shift] = factor
        for k, y in enumerate(b):
            rem[shift + k] -= factor * y
        rem = list(_trim(rem))
    return _trim(quot), _trim(rem)


def _pmonic(a: Poly) -> Poly:
    return _pscale(a, ONE / a[-1]) if a else a


def _pgcd(a: Poly, b: Poly) -> Poly:
    while b:
        _, r = _pdivmod(a, b)
        a, b = b, r
    return _pmonic(a)


def _peval(a: Poly, point: Fraction) -> Fraction:
    acc = ZERO
    for x in reversed(a):
        acc = acc * point + x
    return acc


def _degree(a: Poly) -> int:
    return len(a) - 1


class UniRat:
    """
    Univariate rational function num/den over Fraction.

    Always reduced: gcd(num, den) = 1 and den is monic. A constant UniRat
    compares and hashes like the corresponding Fraction.
    """
    __slots__ = ("num", "den")

    def __init__(self, num: Sequence = (), den: Sequence = (ONE,)):
        num = _trim(num)
        den = _trim(den)
        if not den:
            raise PoleError("UniRat with zero denominator")
        if not num:
            self.num, self.den = (), (ONE,)
            return
        common = _pgcd(num, den)
        if len(common) > 1:
            num, _ = _pdivmod(num, common)
            den, _ = _pdivmod(den, common)
        lead = den[-1]
        self.num = _pscale(num, ONE / lead)
        self.den = _pscale(den, ONE / lead)

    @classmethod
    def var(cls) -> "UniRat":
        """The formal variable itself."""
        return cls((ZERO, ONE))

    @classmethod
    def const(cls, value) -> "UniRat":
        return cls((Fraction(value),))

    @staticmethod
    def lift(value) -> "UniRat":
        if isinstance(value, UniRat):
            return value
        return UniRat((Fraction(value),))

    def is_constant(self) -> bool:
        return len(self.num) <= 1 and len(self.den) == 1

    def constant_value(self) -> Fraction:
        return self.num[0] if self.num else ZERO

    def is_zero(self) -> bool:
        return not self.num

    def __call__(self, point) -> Fraction:
        return limit_at(self, point)

    def __add__(self, other):
        if not isinstance(other, (UniRat, Fraction, int)):
            return NotImplemented
        o = UniRat.lift(other)
        return UniRat(_padd(_pmul(self.num, o.den), _pmul(o.num, self.den)), _pmul(self.den, o.den))

    __radd__ = __add__

    def __neg__(self):
        return UniRat(_pneg(self.num), self.den)

    def __sub__(self, other):
        if not isinstance(other, (UniRat, Fraction, int)):
            return NotImplemented
        return self + (-UniRat.lift(other))

    def __rsub__(self, other):
        if not isinstance(other, (UniRat, Fraction, int)):
            return NotImplemented
        return UniRat.lift(other) + (-self)

    def __mul__(self, other):
        if not isinstance(other, (UniRat, Fraction, int)):
            return NotImplemented
        o = UniRat.lift(other)
        return UniRat(_pmul(self.num, o.num), _pmul(self.den, o.den))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, (UniRat, Fraction, int)):
            return NotImplemented
        o = UniRat.lift(other)
        if o.is_zero():
            raise PoleError("division by the zero function")
        return UniRat(_pmul(self.num, o.den), _pmul(self.den, o.num))

    def __rtruediv__(self, other):
        if not isinstance(other, (UniRat, Fraction, int)):
            return NotImplemented
        return UniRat.lift(other) / self

    def __pow__(self, exponent: int):
        result = UniRat.const(1)
        base = self if exponent >= 0 else UniRat.const(1) / self
        for _ in range(abs(exponent)):
            result = result * base
        return result

    def __eq__(self, other):
        if isinstance(other, (Fraction, int)):
            return self.is_constant() and self.constant_value() == other
        if isinstance(other, UniRat):
            return self.num == other.num and self.den == other.den
        return NotImplemented

    def __hash__(self):
        if self.is_constant():
            return hash(self.constant_value())
        return hash((self.num, self.den))

    def sort_key(self):
        return (self.num, self.den)

    def __repr__(self):
        return f"UniRat({self})"

    def __str__(self):
        def render(p: Poly) -> str:
            if not p:
                return "0"
            parts = []
            for k, x in enumerate(p):
                if x == 0:
                    continue
                if k == 0:
                    parts.append(format_rat(x))
                elif k == 1:
                    parts.append(f"{format_rat(x)}*u")
                else:
                    parts.append(f"{format_rat(x)}*u^{k}")
            return " + ".join(parts)
        if self.den == (ONE,):
            return render(self.num)
        return f"({render(self.num)})/({render(self.den)})"


Scalar = Union[Fraction, UniRat]


class _Infinity:
    def __repr__(self):
        return "INFINITY"


INFINITY = _Infinity()


def limit_at(fn, point) -> Fraction:
    """
    Exact value of a reduced rational function at a point, or at INFINITY.
    Plain Fractions are returned unchanged.
    """
    if not isinstance(fn, UniRat):
        return Fraction(fn)
    if point is INFINITY:
        dn, dd = _degree(fn.num), _degree(fn.den)
        if not fn.num or dn < dd:
            return ZERO
        if dn == dd:
            return fn.num[-1] / fn.den[-1]
        raise PoleError(f"limit at infinity diverges (degree {dn} over {dd})")
    point = Fraction(point)
    denominator = _peval(fn.den, point)
    if denominator == 0:
        raise PoleError(f"genuine pole at {format_rat(point)}")
    return _peval(fn.num, point) / denominator


def is_zero(value) -> bool:
    if isinstance(value, UniRat):
        return value.is_zero()
    return value == 0


# ---------------------------------------------------------------------------
# Kernels
# ---------------------------------------------------------------------------

def _exact(value):
    return value if isinstance(value, UniRat) else Fraction(value)


def _difference(u, v):
    d = u - v
    if is_zero(d):
        raise PoleError(f"pole at u - v = 0 (u = {format_rat(u)})")
    return d


def g(u, v, c=ONE):
    u, v, c = _exact(u), _exact(v), _exact(c)
    return c / _difference(u, v)


def f(u, v, c=ONE):
    u, v, c = _exact(u), _exact(v), _exact(c)
    return (u - v + c) / _difference(u, v)


def h(u, v, c=ONE):
    u, v, c = _exact(u), _exact(v), _exact(c)
    return (u - v + c) / c


def graded_c(parity: int, c=ONE):
    return -c if parity % 2 else c


def graded_g(parity: int, u, v, c=ONE):
    return g(u, v, graded_c(parity, c))


def graded_f(parity: int, u, v, c=ONE):
    return f(u, v, graded_c(parity, c))


def graded_h(parity: int, u, v, c=ONE):
    return h(u, v, graded_c(parity, c))


Kernel = Callable[[Scalar, Scalar], Scalar]


def set_product(kernel: Kernel, us: Iterable, vs: Iterable):
    """Product of kernel(u, v) over all pairs; 1 when either set is empty."""
    vs = list(vs)
    result = ONE
    for u in us:
        for v in vs:
            result = result * kernel(u, v)
    return result


def delta_product(kernel: Kernel, xs: Sequence):
    """Product of kernel(x_j, x_i) over i < j."""
    result = ONE
    for j in range(len(xs)):
        for i in range(j):
            result = result * kernel(xs[j], xs[i])
    return result


def delta_product_primed(kernel: Kernel, xs: Sequence):
    """Product of kernel(x_i, x_j) over i < j."""
    result = ONE
    for j in range(len(xs)):
        for i in range(j):
            result = result * kernel(xs[i], xs[j])
    return result


class Kernels:
    """The kernels g, f, h and their graded analogs bound to one constant c."""

    def __init__(self, c=ONE):
        self.c = Fraction(c)

    def g(self, u, v):
        return g(u, v, self.c)

    def f(self, u, v):
        return f(u, v, self.c)

    def h(self, u, v):
        return h(u, v, self.c)

    def gg(self, parity: int) -> Kernel:
        c = graded_c(parity, self.c)
        return lambda u, v: g(u, v, c)

    def gf(self, parity: int) -> Kernel:
        c = graded_c(parity, self.c)
        return lambda u, v: f(u, v, c)

    def gh(self, parity: int) -> Kernel:
        c = graded_c(parity, self.c)
        return lambda u, v: h(u, v, c)

    def fp(self, us, vs):
        return set_product(self.f, us, vs)

    def hp(self, us, vs):
        return set_product(self.h, us, vs)


def determinant(matrix: List[List]) -> Scalar:
    """Fraction-free (Bareiss) elimination over Fraction or UniRat entries."""
    n = len(matrix)
    if n == 0:
        return ONE
    a = [list(row) for row in matrix]
    sign = 1
    previous = ONE
    for k in range(n - 1):
        if is_zero(a[k][k]):
            for r in range(k + 1, n):
                if not is_zero(a[r][k]):
                    a[k], a[r] = a[r], a[k]
                    sign = -sign
                    break
            else:
                return ZERO
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / previous
        previous = a[k][k]
    return a[n - 1][n - 1] if sign > 0 else -a[n - 1][n - 1]


# ---------------------------------------------------------------------------
# Algebra and generic draws
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AlgebraSpec:
    m: int
    n: int = 0

    def __post_init__(self):
        if self.m < 0 or self.n < 0 or self.m + self.n < 2:
            raise ValueError(f"Invalid algebra gl({self.m}|{self.n}): need m, n >= 0 and m + n >= 2")

    @classmethod
    def gl(cls, rank_plus_one: int) -> "AlgebraSpec":
        """Non-graded gl(N+1)."""
        return cls(rank_plus_one, 0)

    @classmethod
    def parse(cls, text: str) -> "AlgebraSpec":
        try:
            m, n = (int(x) for x in text.split(","))
        except ValueError as e:
            raise ValueError(f"Invalid algebra {text!r}, expected 'm,n'") from e
        return cls(m, n)

    @property
    def N(self) -> int:
        return self.m + self.n - 1

    @property
    def is_graded(self) -> bool:
        return self.n > 0

    def parity(self, i: int) -> int:
        return 0 if i <= self.m else 1

    def label(self) -> str:
        return f"gl({self.m}|{self.n})" if self.is_graded else f"gl({self.m})"


def _integer_ratio(d: Fraction, c: Fraction) -> bool:
    return (d / c).denominator == 1


class GenericDraw:
    """
    Seeded generator of generic rational parameters.

    A candidate is rejected when its difference with any previously accepted
    value is an integer multiple of c (zero included). This covers every
    shift the recursions introduce.
    """

    def __init__(self, seed: int = 0, c=ONE):
        self.seed = seed
        self.c = Fraction(c)
        self.rng = random.Random(seed)
        self.accepted: List[Fraction] = []

    def reserve(self, values: Iterable):
        """Mark externally chosen values as taken."""
        for v in values:
            self.accepted.append(Fraction(v))

    def candidate(self) -> Fraction:
        q = self.rng.choice(DRAW_DENOMINATORS)
        p = self.rng.randint(-DRAW_RANGE * q, DRAW_RANGE * q)
        return Fraction(p, q)

    def value(self) -> Fraction:
        rejected = 0
        while True:
            x = self.candidate()
            if all(not _integer_ratio(x - y, self.c) for y in self.accepted):
                self.accepted.append(x)
                if rejected:
                    logger.debug(f"Generic draw rejected {rejected} candidates")
                return x
            rejected += 1

    def values(self, count: int) -> List[Fraction]:
        return [self.value() for _ in range(count)]


def hashed_rat(*key) -> Fraction:
    """Deterministic nonzero rational keyed by arbitrary reprs."""
    digest = hashlib.sha256(repr(key).encode()).digest()
    num = int.from_bytes(digest[:4], "big") % (2 * DRAW_RANGE) - DRAW_RANGE
    if num == 0:
        num = DRAW_RANGE + 1
    den = DRAW_DENOMINATORS[digest[4] % len(DRAW_DENOMINATORS)]
    return Fraction(num, den)
