"""The group SL2(Z/NZ)/{+-I}, congruence-subgroup predicates and subgroup lattices."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from math import gcd
from typing import Iterable

from .errors import BoundExceeded, LevelMismatch

DEFAULT_SUBGROUP_BOUND = 60


class Family(str, Enum):
    GAMMA = "Gamma"
    GAMMA1 = "Gamma1"
    GAMMA0_UPPER = "Gamma0upper"


@dataclass(frozen=True, order=True)
class GroupElement:
    """A determinant-one matrix ``[[a, b], [c, d]]`` mod N, taken modulo +-I.

    Use :meth:`make` to build one; it reduces entries and picks the
    lexicographically smaller of ``(a, b, c, d)`` and its negative.
    """

    level: int
    a: int
    b: int
    c: int
    d: int

    @classmethod
    def make(cls, level: int, a: int, b: int, c: int, d: int) -> "GroupElement":
        if level < 1:
            raise ValueError("level must be positive")
        entries = (a % level, b % level, c % level, d % level)
        if (entries[0] * entries[3] - entries[1] * entries[2]) % level != 1 % level:
            raise ValueError(f"{entries} does not have determinant 1 mod {level}")
        neg = tuple((-x) % level for x in entries)
        return cls(level, *min(entries, neg))

    @classmethod
    def identity(cls, level: int) -> "GroupElement":
        return cls.make(level, 1, 0, 0, 1)

    @property
    def entries(self) -> tuple[int, int, int, int]:
        return (self.a, self.b, self.c, self.d)

    def is_identity(self) -> bool:
        return self == GroupElement.identity(self.level)

    def __mul__(self, other: "GroupElement") -> "GroupElement":
        return multiply(self, other)

    def __str__(self) -> str:
        return f"[[{self.a},{self.b}],[{self.c},{self.d}]]"


def multiply(s: GroupElement, r: GroupElement) -> GroupElement:
    """Matrix product ``s*r`` mod N, canonicalized."""
    if s.level != r.level:
        raise LevelMismatch(f"level {s.level} vs {r.level}")
    return GroupElement.make(
        s.level,
        s.a * r.a + s.b * r.c, s.a * r.b + s.b * r.d,
        s.c * r.a + s.d * r.c, s.c * r.b + s.d * r.d,
    )


def inverse(s: GroupElement) -> GroupElement:
    return GroupElement.make(s.level, s.d, -s.b, -s.c, s.a)


def power(s: GroupElement, k: int) -> GroupElement:
    result = GroupElement.identity(s.level)
    base = s if k >= 0 else inverse(s)
    for _ in range(abs(k)):
        result = multiply(result, base)
    return result


def element_order(s: GroupElement) -> int:
    k, x = 1, s
    while not x.is_identity():
        x = multiply(x, s)
        k += 1
    return k


def group_order_formula(level: int) -> int:
    """``N**3 * prod(1 - 1/p**2)``, halved when ``-I != I``."""
    n = level ** 3
    m = level
    p = 2
    while p * p <= m:
        if m % p == 0:
            n = n // (p * p) * (p * p - 1)
            while m % p == 0:
                m //= p
        p += 1
    if m > 1:
        n = n // (m * m) * (m * m - 1)
    return n // 2 if level > 2 else n


@lru_cache(maxsize=None)
def _enumerate(level: int) -> tuple[GroupElement, ...]:
    found = set()
    for a in range(level):
        for b in range(level):
            for c in range(level):
                for d in range(level):
                    if (a * d - b * c) % level == 1 % level:
                        found.add(GroupElement.make(level, a, b, c, d))
    return tuple(sorted(found))


def enumerate_group(level: int) -> tuple[GroupElement, ...]:
    """All elements of SL2(Z/NZ)/{+-I}, sorted."""
    if level < 2:
        raise ValueError("level must be at least 2")
    return _enumerate(level)


def membership(s: GroupElement, family: Family | str) -> bool:
    """Membership in the image of +-Gamma(N), +-Gamma_1(N) or Gamma^0(N)."""
    family = Family(family)
    n = s.level
    a, b, c, d = s.entries
    if family is Family.GAMMA:
        return s.is_identity()
    if family is Family.GAMMA1:
        # the canonical representative may be -[[1,*],[0,1]]
        return c == 0 and ((a == 1 % n and d == 1 % n) or (a == (-1) % n and d == (-1) % n))
    return b == 0


def act_on_index(s: GroupElement, v: tuple[int, int]) -> tuple[int, int]:
    """``s^T v`` mod N for ``v = (a, b)`` representing ``(a/N, b/N)``.

    Returns the raw (uncanonicalized) pair; the siegel module canonicalizes.
    """
    n = s.level
    x, y = v
    return ((s.a * x + s.c * y) % n, (s.b * x + s.d * y) % n)


def generated_subgroup(gens: Iterable[GroupElement], level: int) -> frozenset[GroupElement]:
    """Closure of ``gens`` under multiplication (finite group, so inverses come free)."""
    identity = GroupElement.identity(level)
    gens = [g for g in gens]
    elems = {identity}
    queue = deque([identity])
    while queue:
        x = queue.popleft()
        for g in gens:
            y = multiply(x, g)
            if y not in elems:
                elems.add(y)
                queue.append(y)
    return frozenset(elems)


@dataclass(frozen=True)
class Subgroup:
    level: int
    elements: tuple[GroupElement, ...]
    generators: tuple[GroupElement, ...] = field(default=())

    @property
    def order(self) -> int:
        return len(self.elements)

    def key(self) -> tuple:
        return tuple(e.entries for e in self.elements)

    def __contains__(self, s: GroupElement) -> bool:
        return s in set(self.elements)

    def to_dict(self) -> dict:
        return {
            "order": self.order,
            "generators": [list(g.entries) for g in self.generators],
        }


def _closure(gens: list[int], table: list[list[int]], identity: int) -> frozenset[int]:
    elems = {identity}
    queue = deque([identity])
    while queue:
        x = queue.popleft()
        row = table[x]
        for g in gens:
            y = row[g]
            if y not in elems:
                elems.add(y)
                queue.append(y)
    return frozenset(elems)


def _minimal_generators(elems: frozenset[int], table, identity: int) -> list[int]:
    """Greedy generating set: repeatedly add the element enlarging the span most."""
    gens: list[int] = []
    span = frozenset([identity])
    while span != elems:
        best, best_span = None, span
        for x in sorted(elems - span):
            cand = _closure(gens + [x], table, identity)
            if len(cand) > len(best_span):
                best, best_span = x, cand
        gens.append(best)
        span = best_span
    return gens


def enumerate_subgroups(group: Iterable[GroupElement],
                        bound: int = DEFAULT_SUBGROUP_BOUND) -> list[Subgroup]:
    """Every subgroup exactly once, by breadth-first closure.

    Seed with all cyclic subgroups, then repeatedly extend each known
    subgroup by one outside element and close.  Result is sorted by order,
    then by element key.
    """
    group = sorted(set(group))
    if not group:
        raise ValueError("empty group")
    if len(group) > bound:
        raise BoundExceeded(f"group of order {len(group)} exceeds bound {bound}")
    level = group[0].level
    index = {g: i for i, g in enumerate(group)}
    table = [[index[multiply(x, y)] for y in group] for x in group]
    identity = index[GroupElement.identity(level)]
    found: dict[frozenset[int], list[int]] = {}
    queue: deque[frozenset[int]] = deque()
    for i in range(len(group)):
        h = _closure([i], table, identity)
        if h not in found:
            found[h] = [i]
            queue.append(h)
    while queue:
        h = queue.popleft()
        gens = found[h]
        for x in range(len(group)):
            if x in h:
                continue
            bigger = _closure(gens + [x], table, identity)
            if bigger not in found:
                found[bigger] = gens + [x]
                queue.append(bigger)
    out = []
    for h in found:
        gens = _minimal_generators(h, table, identity)
        out.append(Subgroup(level, tuple(group[i] for i in sorted(h)),
                            tuple(group[i] for i in gens)))
    out.sort(key=lambda s: (s.order, s.key()))
    return out


def gamma0_image(level: int) -> tuple[GroupElement, ...]:
    """Elements of the Gamma^0(N) image in the quotient."""
    return tuple(s for s in enumerate_group(level) if membership(s, Family.GAMMA0_UPPER))


def is_subgroup(elems: Iterable[GroupElement]) -> bool:
    elems = set(elems)
    if not elems:
        return False
    level = next(iter(elems)).level
    if GroupElement.identity(level) not in elems:
        return False
    return all(multiply(x, y) in elems for x in elems for y in elems) and all(
        inverse(x) in elems for x in elems)


def units_mod(level: int) -> list[int]:
    return [u for u in range(level) if gcd(u, level) == 1]
