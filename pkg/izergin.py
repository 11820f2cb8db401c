"""
Izergin determinant K(y|x), its graded analog and the regularized ratio
K(y|x)/f(y,x) used whenever the two argument sets intersect.
"""
import logging
from functools import lru_cache
from fractions import Fraction
from typing import Sequence, Tuple

from exactmath import (
    ONE, ZERO, PoleError, UniRat, delta_product, delta_product_primed, determinant,
    graded_c, g, h, is_zero, limit_at, set_product, f,
)
from partitions import enumerate_splits

logger = logging.getLogger("bethe")

EPSILON_ORDERS = ("forward", "reverse")


def izergin(ys: Sequence, xs: Sequence, parity: int = 0, c=ONE):
    """
    K(y|x) = Delta_g(y) Delta'_g(x) det[g(y_l, x_l') prod_{k != l'} h(y_l, x_k)].

    Each row of the textbook form is cleared of its h-denominators, so the
    value stays finite when some y - x = -c.
    """
    ys, xs = list(ys), list(xs)
    if len(ys) != len(xs):
        return ZERO
    if not ys:
        return ONE
    cs = graded_c(parity, c)
    for y in ys:
        for x in xs:
            if is_zero(y - x):
                raise PoleError(f"Izergin determinant has a pole: y = x = {x}")
    matrix = []
    for y in ys:
        row = []
        for col, x in enumerate(xs):
            entry = g(y, x, cs)
            for k, other in enumerate(xs):
                if k != col:
                    entry = entry * h(y, other, cs)
            row.append(entry)
        matrix.append(row)
    gk = lambda u, v: g(u, v, cs)
    return delta_product(gk, ys) * delta_product_primed(gk, xs) * determinant(matrix)


def _all_rational(values) -> bool:
    return all(not isinstance(v, UniRat) for v in values)


def _plain_ratio(ys, xs, parity, c):
    cs = graded_c(parity, c)
    return izergin(ys, xs, parity, c) / set_product(lambda u, v: f(u, v, cs), ys, xs)


def _epsilon_ratio(ys: Tuple, xs: Tuple, parity: int, c, order: str):
    eps = UniRat.var()
    coinciding = [k for k, y in enumerate(ys) if y in xs]
    if order == "reverse":
        coinciding = coinciding[::-1]
    shifted = list(ys)
    for rank, k in enumerate(coinciding, start=1):
        shifted[k] = ys[k] + rank * eps
    return limit_at(_plain_ratio(shifted, list(xs), parity, c), Fraction(0))


@lru_cache(maxsize=65536)
def _izergin_over_f(ys: Tuple, xs: Tuple, parity: int, c: Fraction, order: str):
    if len(ys) != len(xs):
        return ZERO
    if not set(ys) & set(xs):
        return _plain_ratio(ys, xs, parity, c)
    if _all_rational(ys + xs):
        return _epsilon_ratio(ys, xs, parity, c, order)
    return izergin_over_f_reduced(ys, xs, parity, c)


def izergin_over_f(ys: Sequence, xs: Sequence, parity: int = 0, c=ONE, order: str = "forward"):
    """
    Finite value of K(y|x)/f(y,x), also when y and x share elements.

    Rational inputs with coincidences are regularized by moving the k-th
    coinciding entry of y to y + k*eps and taking eps -> 0. Symbolic inputs
    use the common-element reduction.
    """
    if order not in EPSILON_ORDERS:
        raise ValueError(f"Unknown epsilon order: {order}")
    return _izergin_over_f(tuple(ys), tuple(xs), parity, Fraction(c), order)


def izergin_over_f_reduced(ys: Sequence, xs: Sequence, parity: int = 0, c=ONE):
    """K(y u {v}|x u {v}) / f(...) = K(y|x)/f(y,x): drop shared values, then divide."""
    ys, xs = list(ys), list(xs)
    if len(ys) != len(xs):
        return ZERO
    common = [y for y in ys if y in xs]
    rest_y = [y for y in ys if y not in common]
    rest_x = [x for x in xs if x not in common]
    return _plain_ratio(rest_y, rest_x, parity, c)


def identity_izp(xs: Sequence, ys: Sequence, c=ONE):
    """K(x - c|y) against (-1)^p K(y|x)/f(y,x)."""
    xs, ys = list(xs), list(ys)
    lhs = izergin([x - c for x in xs], ys, 0, c)
    sign = -1 if len(xs) % 2 else 1
    rhs = sign * izergin(ys, xs, 0, c) / set_product(lambda u, v: f(u, v, c), ys, xs)
    return lhs, rhs


def identity_lm1(us: Sequence, vs: Sequence, ws: Sequence, c=ONE):
    """
    Sum over {w_I, w_II} of K(w_I|u) K(v|w_II) f(w_II, w_I)
    against (-1)^{#u} f(w, u) K({u - c, v}|w).
    """
    us, vs, ws = list(us), list(vs), list(ws)
    fk = lambda a, b: f(a, b, c)
    lhs = ZERO
    for w_first, w_second in enumerate_splits(ws, (len(us), len(vs))):
        lhs += (izergin(w_first, us, 0, c) * izergin(vs, w_second, 0, c)
                * set_product(fk, w_second, w_first))
    sign = -1 if len(us) % 2 else 1
    rhs = sign * set_product(fk, ws, us) * izergin([u - c for u in us] + vs, ws, 0, c)
    return lhs, rhs


def cache_info():
    return _izergin_over_f.cache_info()
