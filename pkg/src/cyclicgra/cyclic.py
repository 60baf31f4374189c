"""Divisor subgroups and cosets of the cyclic groups Z_n.

A subgroup of Z_n is stored as the pair (n, g) with g | n; it is the set of
multiples of g and has exactly g cosets.  Residue sets are only built when
asked for (``elements``), which keeps frame-level code O(1) per coset.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd


class InvalidIndexError(ValueError):
    pass


@dataclass(frozen=True)
class CyclicGroup:
    order: int

    def __post_init__(self):
        if self.order < 1:
            raise ValueError(f"group order must be positive, got {self.order}")

    @property
    def identity(self) -> int:
        return 0

    def elements(self) -> range:
        return range(self.order)

    def add(self, a: int, b: int) -> int:
        return (a + b) % self.order

    def subgroup(self, index: int) -> "Subgroup":
        return subgroup_of_index(self.order, index)


@dataclass(frozen=True, order=True)
class Subgroup:
    """Multiples of ``generator`` in Z_``group_order``."""

    group_order: int
    generator: int

    def __post_init__(self):
        if self.group_order < 1 or self.generator < 1:
            raise InvalidIndexError("group order and generator must be positive")
        if self.group_order % self.generator:
            raise InvalidIndexError(
                f"{self.generator} does not divide {self.group_order}"
            )

    @property
    def index(self) -> int:
        return self.generator

    def __len__(self) -> int:
        return self.group_order // self.generator

    def elements(self) -> frozenset[int]:
        return frozenset(range(0, self.group_order, self.generator))

    def __contains__(self, r: int) -> bool:
        return r % self.generator == 0

    def coset(self, offset: int) -> "Coset":
        return Coset(self, offset % self.generator)

    def cosets(self) -> list["Coset"]:
        return [Coset(self, ell) for ell in range(self.generator)]

    def contains_subgroup(self, other: "Subgroup") -> bool:
        return (
            self.group_order == other.group_order
            and other.generator % self.generator == 0
        )


@dataclass(frozen=True, order=True)
class Coset:
    subgroup: Subgroup
    offset: int

    def __post_init__(self):
        if not 0 <= self.offset < self.subgroup.generator:
            raise ValueError(
                f"offset {self.offset} outside 0..{self.subgroup.generator - 1}"
            )

    def elements(self) -> frozenset[int]:
        n, g = self.subgroup.group_order, self.subgroup.generator
        return frozenset((p * g + self.offset) % n for p in range(n // g))

    def __contains__(self, r: int) -> bool:
        return r % self.subgroup.generator == self.offset


def subgroup_of_index(n: int, m: int) -> Subgroup:
    """The subgroup of Z_n with m cosets, i.e. the multiples of m."""
    if n < 1 or m < 1 or n % m:
        raise InvalidIndexError(f"{m} is not a divisor of {n}")
    return Subgroup(n, m)


def composite_subgroup(a: Subgroup, b: Subgroup) -> Subgroup:
    """The complex sum a + b, generated by gcd of the two generators."""
    if a.group_order != b.group_order:
        raise ValueError(
            f"subgroups of Z_{a.group_order} and Z_{b.group_order} cannot be combined"
        )
    return Subgroup(a.group_order, gcd(a.generator, b.generator))


def coset_decomposition(h: Subgroup, k: Subgroup, s: int) -> frozenset[Coset]:
    """Cosets of h whose union is the coset (h + k) + s.

    With d = gcd of the generators these are h + q*d + s for q < index(h)/d.
    """
    d = composite_subgroup(h, k).generator
    if not 0 <= s < d:
        raise ValueError(f"s={s} outside 0..{d - 1}")
    return frozenset(Coset(h, q * d + s) for q in range(h.generator // d))


def sum_set(a: frozenset[int] | set[int], b: frozenset[int] | set[int], n: int) -> frozenset[int]:
    return frozenset((x + y) % n for x in a for y in b)


def divisors(n: int) -> list[int]:
    return [d for d in range(1, n + 1) if n % d == 0]


def factorize(n: int) -> dict[int, int]:
    """Prime factorization by trial division; factorize(1) == {}."""
    if n < 1:
        raise ValueError("factorize needs a positive integer")
    out: dict[int, int] = {}
    p = 2
    while p * p <= n:
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
        p += 1
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def is_prime(p: int) -> bool:
    return p >= 2 and factorize(p) == {p: 1}


def p_adic_valuation(n: int, p: int) -> int:
    k = 0
    while n % p == 0:
        n //= p
        k += 1
    return k
