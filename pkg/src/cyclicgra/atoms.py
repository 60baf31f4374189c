"""Finite atom structures.

Elements of the algebra are Python ints used as bitsets over the atom
positions: bit i set means atom i is below the element.  Boolean operations
are then ``|``, ``&`` and ``top ^ r``; converse and relative multiplication
are the completely additive lifts of the atom-level converse map and the
composition relation (a, b, c) meaning c <= a;b.
"""

from __future__ import annotations

from typing import Callable, Hashable, Iterable, Iterator, Mapping, Sequence

import numpy as np

Element = int


def bits(mask: int) -> Iterator[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def popcount(mask: int) -> int:
    return mask.bit_count()


class AtomStructure:
    """Atoms, identity atoms, a converse map on atoms and a composition relation.

    The constructor only checks that every label is known and the converse is
    total; the relation-algebra laws are the business of ``check_laws`` so
    that deliberately broken structures can be built and diagnosed.
    """

    def __init__(
        self,
        atoms: Sequence[Hashable],
        identity: Iterable[Hashable],
        converse: Mapping[Hashable, Hashable],
        triples: Iterable[tuple[Hashable, Hashable, Hashable]],
    ):
        self.atoms = tuple(atoms)
        if len(set(self.atoms)) != len(self.atoms):
            raise ValueError("duplicate atom label")
        self.pos = {a: i for i, a in enumerate(self.atoms)}
        self.n = len(self.atoms)
        ident = 0
        for e in identity:
            ident |= 1 << self._id(e)
        self.ident = ident
        conv = []
        for a in self.atoms:
            if a not in converse:
                raise ValueError(f"converse of {a!r} undefined")
            conv.append(self._id(converse[a]))
        self.conv = conv
        table = [[0] * self.n for _ in range(self.n)]
        tri = set()
        for a, b, c in triples:
            i, j, k = self._id(a), self._id(b), self._id(c)
            table[i][j] |= 1 << k
            tri.add((i, j, k))
        self.table = table
        self.triples = frozenset(tri)
        # nonzero row entries: rows[i] = [(j, mask)]
        self.rows = [[(j, m) for j, m in enumerate(r) if m] for r in table]
        # nzr[i]: atoms j with i;j != 0
        self.nzr = [sum(1 << j for j, _ in row) for row in self.rows]
        self._cache: dict[tuple[int, int], int] = {}
        self._dense = None
        self._conv_cache: dict[int, int] = {}

    def _id(self, label) -> int:
        try:
            return self.pos[label]
        except KeyError:
            raise ValueError(f"unknown atom label {label!r}") from None

    # element helpers

    @property
    def top(self) -> Element:
        return (1 << self.n) - 1

    @property
    def identity(self) -> Element:
        return self.ident

    @property
    def diversity(self) -> Element:
        return self.top ^ self.ident

    def atom(self, label) -> Element:
        return 1 << self._id(label)

    def element(self, labels: Iterable[Hashable]) -> Element:
        out = 0
        for a in labels:
            out |= 1 << self._id(a)
        return out

    def support(self, r: Element) -> list:
        return [self.atoms[i] for i in bits(r)]

    def identity_atoms(self) -> list[int]:
        return list(bits(self.ident))

    @staticmethod
    def is_atom(r: Element) -> bool:
        return r != 0 and r & (r - 1) == 0

    @staticmethod
    def le(r: Element, s: Element) -> bool:
        return r & ~s == 0

    def complement(self, r: Element) -> Element:
        return self.top ^ r

    def converse(self, r: Element) -> Element:
        hit = self._conv_cache.get(r)
        if hit is not None:
            return hit
        out = 0
        conv = self.conv
        for i in bits(r):
            out |= 1 << conv[i]
        self._conv_cache[r] = out
        return out

    def compose(self, r: Element, s: Element) -> Element:
        if not r or not s:
            return 0
        if r & (r - 1) == 0 and s & (s - 1) == 0:
            return self.table[r.bit_length() - 1][s.bit_length() - 1]
        key = (r, s)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        if r.bit_count() * s.bit_count() > 64:
            out = self._compose_dense(r, s)
            self._cache[key] = out
            return out
        out = 0
        table = self.table
        if s & (s - 1) == 0:
            j = s.bit_length() - 1
            for i in bits(r):
                out |= table[i][j]
        else:
            nzr = self.nzr
            for i in bits(r):
                ti = table[i]
                for j in bits(s & nzr[i]):
                    out |= ti[j]
        self._cache[key] = out
        return out

    def _compose_dense(self, r: Element, s: Element) -> Element:
        """Same lift as ``compose``, by a matrix product over the full table."""
        n = self.n
        if self._dense is None:
            t = np.zeros((n, n, n), dtype=np.float32)
            for i, j, k in self.triples:
                t[i, j, k] = 1.0
            self._dense = (t.reshape(n, n * n), (n + 7) // 8)
        flat, nbytes = self._dense
        rv = np.unpackbits(np.frombuffer(r.to_bytes(nbytes, "little"), np.uint8), bitorder="little")[:n]
        sv = np.unpackbits(np.frombuffer(s.to_bytes(nbytes, "little"), np.uint8), bitorder="little")[:n]
        hits = sv.astype(np.float32) @ (rv.astype(np.float32) @ flat).reshape(n, n)
        return int.from_bytes(np.packbits(hits > 0, bitorder="little").tobytes(), "little")

    def rectangle(self, x: int, y: int) -> Element:
        """x;1;y for atom positions x, y."""
        return self.compose(self.compose(1 << x, self.top), 1 << y)

    # structure-level

    def relabel(self, f: Callable[[Hashable], Hashable] | Mapping) -> "AtomStructure":
        g = f if callable(f) else f.__getitem__
        return AtomStructure(
            [g(a) for a in self.atoms],
            [g(self.atoms[i]) for i in bits(self.ident)],
            {g(a): g(self.atoms[self.conv[i]]) for i, a in enumerate(self.atoms)},
            [(g(self.atoms[i]), g(self.atoms[j]), g(self.atoms[k])) for i, j, k in self.triples],
        )

    def labelled_triples(self) -> list[tuple]:
        return [(self.atoms[i], self.atoms[j], self.atoms[k]) for i, j, k in sorted(self.triples)]

    def __eq__(self, other) -> bool:
        if not isinstance(other, AtomStructure):
            return NotImplemented
        return (
            self.atoms == other.atoms
            and self.ident == other.ident
            and self.conv == other.conv
            and self.triples == other.triples
        )

    def __hash__(self):
        return hash((self.atoms, self.ident, tuple(self.conv), self.triples))

    def __repr__(self) -> str:
        return f"AtomStructure({self.n} atoms, {popcount(self.ident)} identity, {len(self.triples)} triples)"


def complex_algebra(elements: Sequence, op: Callable, unit, inverse: Callable) -> AtomStructure:
    """Complex algebra of a finite group given by its multiplication."""
    elements = list(elements)
    return AtomStructure(
        elements,
        [unit],
        {g: inverse(g) for g in elements},
        [(g, h, op(g, h)) for g in elements for h in elements],
    )


def cyclic_complex_algebra(n: int) -> AtomStructure:
    """Complex algebra of Z_n with atoms labelled "0".."n-1"."""
    return complex_algebra(
        [str(k) for k in range(n)],
        lambda a, b: str((int(a) + int(b)) % n),
        "0",
        lambda a: str(-int(a) % n),
    )


def full_relation_algebra(blocks: Sequence[Sequence[Hashable]]) -> AtomStructure:
    """All relations below the equivalence whose classes are ``blocks``;
    atoms are the single pairs, labelled "u:v"."""
    pairs = [(u, v) for b in blocks for u in b for v in b]
    lab = {p: f"{p[0]}:{p[1]}" for p in pairs}
    triples = [
        (lab[(u, v)], lab[(v, w)], lab[(u, w)])
        for b in blocks
        for u in b
        for v in b
        for w in b
    ]
    return AtomStructure(
        [lab[p] for p in pairs],
        [lab[(u, u)] for b in blocks for u in b],
        {lab[(u, v)]: lab[(v, u)] for u, v in pairs},
        triples,
    )
