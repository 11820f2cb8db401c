"""
Parameter sets, Bethe indices and the constrained partitions that index
every sum of the action and scalar-product formulas.
"""
import itertools
import logging
from math import comb
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Sequence, Tuple

from exactmath import AlgebraSpec, UniRat, format_rat, parse_rat

logger = logging.getLogger("bethe")


class DuplicateParameterError(ValueError):
    """A level holds the same value twice."""


class CardinalityError(ValueError):
    """Requested block sizes do not match the set size."""


def _canonical(value):
    if isinstance(value, UniRat):
        return value.constant_value() if value.is_constant() else value
    return Fraction(value)


def _order_key(value):
    if isinstance(value, UniRat):
        return (1, value.sort_key())
    return (0, value)


class ParamSet(tuple):
    """
    Set of parameters in canonical ascending order.

    Plain rationals sort before symbolic (UniRat) entries. Repeated values
    are rejected.
    """

    def __new__(cls, values: Iterable = ()):
        items = sorted((_canonical(v) for v in values), key=_order_key)
        if len(set(items)) != len(items):
            raise DuplicateParameterError(f"Repeated value in {[format_rat(x) for x in items]}")
        return super().__new__(cls, items)

    def union(self, *others: Iterable) -> "ParamSet":
        merged = list(self)
        for other in others:
            merged.extend(other)
        return ParamSet(merged)

    def without(self, values: Iterable) -> "ParamSet":
        drop = list(values)
        kept = list(self)
        for v in drop:
            kept.remove(_canonical(v))
        return ParamSet(kept)

    def shifted(self, delta) -> "ParamSet":
        return ParamSet(v + delta for v in self)

    def to_json(self) -> List[str]:
        return [format_rat(v) for v in self]

    @classmethod
    def from_json(cls, items: Sequence) -> "ParamSet":
        return cls(parse_rat(x) for x in items)

    def __repr__(self):
        return "{" + ",".join(format_rat(v) for v in self) + "}"


EMPTY = ParamSet()


@dataclass(frozen=True)
class BetheIndex:
    """The sets t^1..t^N of a Bethe vector; t^0 and t^{N+1} are implicitly empty."""
    levels: Tuple[ParamSet, ...]

    def __post_init__(self):
        object.__setattr__(self, "levels", tuple(ParamSet(level) for level in self.levels))

    @classmethod
    def empty(cls, N: int) -> "BetheIndex":
        return cls(tuple(EMPTY for _ in range(N)))

    @classmethod
    def of(cls, *levels: Iterable) -> "BetheIndex":
        return cls(tuple(ParamSet(level) for level in levels))

    @property
    def N(self) -> int:
        return len(self.levels)

    def level(self, s: int) -> ParamSet:
        if s <= 0 or s > self.N:
            return EMPTY
        return self.levels[s - 1]

    @property
    def cardinalities(self) -> Tuple[int, ...]:
        return tuple(len(level) for level in self.levels)

    def values(self) -> List:
        return [v for level in self.levels for v in level]

    def with_level(self, s: int, values: Iterable) -> "BetheIndex":
        levels = list(self.levels)
        levels[s - 1] = ParamSet(values)
        return BetheIndex(tuple(levels))

    def check_algebra(self, spec: AlgebraSpec):
        if self.N != spec.N:
            raise ValueError(f"Index has {self.N} levels but {spec.label()} needs {spec.N}")

    def to_dict(self) -> Dict:
        return {"levels": [level.to_json() for level in self.levels]}

    @classmethod
    def from_dict(cls, data: Dict) -> "BetheIndex":
        return cls(tuple(ParamSet.from_json(level) for level in data["levels"]))

    def __str__(self):
        return "(" + ",".join(repr(level) for level in self.levels) + ")"


@dataclass(frozen=True)
class IJPartition:
    """
    The triples (I, II, III) for s = 0..N+1 of an (i,j)-partition.
    Lists are indexed by level, boundaries included.
    """
    first: Tuple[ParamSet, ...]
    second: Tuple[ParamSet, ...]
    third: Tuple[ParamSet, ...]

    @property
    def N(self) -> int:
        return len(self.first) - 2

    def I(self, s: int) -> ParamSet:
        return self.first[s]

    def II(self, s: int) -> ParamSet:
        return self.second[s]

    def III(self, s: int) -> ParamSet:
        return self.third[s]

    def result_index(self) -> BetheIndex:
        """Index of the Bethe vector B(w_II) the term multiplies."""
        return BetheIndex(tuple(self.second[1:-1]))


def _level_options(w: Sequence, size_first: int, size_third: int) -> List[Tuple[ParamSet, ParamSet, ParamSet]]:
    positions = range(len(w))
    options = []
    if size_first + size_third > len(w):
        return options
    for first in itertools.combinations(positions, size_first):
        rest = [k for k in positions if k not in first]
        for third in itertools.combinations(rest, size_third):
            second = [k for k in rest if k not in third]
            options.append((
                ParamSet(w[k] for k in first),
                ParamSet(w[k] for k in second),
                ParamSet(w[k] for k in third),
            ))
    return options


def enumerate_ij_partitions(t: BetheIndex, z: Sequence, i: int, j: int) -> List[IJPartition]:
    """
    All partitions of w^s = {z, t^s} obeying the (i,j)-condition w.r.t. z.

    Subsets are chosen by position, so a value present in both z and t^s
    is still handled. The order is lexicographic in the chosen positions,
    level by level.
    """
    N = t.N
    if not (1 <= i <= N + 1 and 1 <= j <= N + 1):
        raise ValueError(f"Indices ({i},{j}) out of range 1..{N + 1}")
    z = list(z)
    p = len(z)
    per_level = []
    for s in range(1, N + 1):
        w = z + list(t.level(s))
        per_level.append(_level_options(w, p if s < i else 0, p if s >= j else 0))
    zs = ParamSet(z)
    result = []
    for choice in itertools.product(*per_level):
        first = (zs,) + tuple(c[0] for c in choice) + (EMPTY,)
        second = (EMPTY,) + tuple(c[1] for c in choice) + (EMPTY,)
        third = (EMPTY,) + tuple(c[2] for c in choice) + (zs,)
        result.append(IJPartition(first, second, third))
    logger.debug(f"({i},{j})-partitions of {t} w.r.t. {zs}: {len(result)}")
    return result


def enumerate_splits(w: Sequence, cardinalities: Sequence[int]) -> List[Tuple[ParamSet, ...]]:
    """All ordered set partitions of w into blocks of the given sizes."""
    w = list(w)
    if any(k < 0 for k in cardinalities) or sum(cardinalities) != len(w):
        raise CardinalityError(f"Block sizes {list(cardinalities)} do not partition a set of size {len(w)}")

    def split(positions: List[int], sizes: Sequence[int]):
        if not sizes:
            yield ()
            return
        for block in itertools.combinations(positions, sizes[0]):
            rest = [k for k in positions if k not in block]
            for tail in split(rest, sizes[1:]):
                yield (ParamSet(w[k] for k in block),) + tail

    return list(split(list(range(len(w))), list(cardinalities)))


def mu_map(t: BetheIndex, c=Fraction(1)) -> BetheIndex:
    """Reverse the levels; input level k moves to N+1-k shifted by -(N-k)c."""
    N = t.N
    return BetheIndex(tuple(t.level(N + 1 - k).shifted(-(k - 1) * c) for k in range(1, N + 1)))


def mu_map_graded(t: BetheIndex, spec: AlgebraSpec, c=Fraction(1)) -> BetheIndex:
    """Graded reordering: input level s moves to N+1-s shifted by +|s-m|c."""
    N = t.N
    out = []
    for k in range(1, N + 1):
        s = N + 1 - k
        out.append(t.level(s).shifted(abs(s - spec.m) * c))
    return BetheIndex(tuple(out))


def count_ij_partitions(t: BetheIndex, p: int, i: int, j: int) -> int:
    """Closed-form count of (i,j)-partitions for |z| = p."""
    total = 1
    for s in range(1, t.N + 1):
        size = p + len(t.level(s))
        first = p if s < i else 0
        third = p if s >= j else 0
        total *= comb(size, first) * comb(size - first, third)
    return total
