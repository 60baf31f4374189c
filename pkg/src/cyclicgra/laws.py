"""Runtime check of the relation-algebra laws on a finite atom structure.

Element-level clauses go through the structure's own ``converse`` and
``compose`` methods, evaluated on a fixed sample: every atom, every sum of
two atoms, and the distinguished elements (0, 1, 1', 0', the identity atoms
and all rectangles x;1;y); ternary laws use the coarse elements and chains
of rectangles.  Atom-level clauses read the converse map and the
composition relation directly.
"""

from __future__ import annotations

from itertools import combinations, product

import numpy as np
from scipy import sparse

from .atoms import AtomStructure, bits
from .report import ConditionReport

LAW_CLAUSES = (
    "converse-join",
    "converse-meet",
    "converse-monotone",
    "converse-atom",
    "subidentity",
    "associativity",
    "right-identity",
    "involution",
    "converse-product",
    "right-distributivity",
    "monotony",
    "rectangle-converse",
    "rectangle-bound",
    "rectangle-equality",
    "rectangle-sides",
    "converse-involution",
    "identity-converse",
    "cycle-law",
    "identity-law",
    "atom-associativity",
)

# at most this many witnesses per clause; one is enough to fail it
_CAP = 3


class _Collector:
    def __init__(self, a: AtomStructure):
        self.a = a
        self.report = ConditionReport("LAWS")
        self.count: dict[str, int] = {}

    def fail(self, clause, *elements, detail=""):
        c = self.count.get(clause, 0)
        self.count[clause] = c + 1
        if c < _CAP:
            self.report.add(clause, tuple(self.show(e) for e in elements), detail)

    def show(self, r):
        if isinstance(r, str):
            return r
        labels = self.a.support(r)
        if not labels:
            return "0"
        if len(labels) > 4:
            return f"<{len(labels)} atoms>"
        return "+".join(str(x) for x in labels)


def _atom_pairs(a: AtomStructure) -> list[tuple[int, int]]:
    """Pairs of atoms (as elements): all pairs inside one rectangle, and all
    pairs of the first atoms of any two rectangles."""
    ids = list(bits(a.ident))
    groups: dict[tuple, list[int]] = {}
    for i in range(a.n):
        left = next((e for e in ids if a.table[e][i]), None)
        right = next((e for e in ids if a.table[i][e]), None)
        groups.setdefault((left, right), []).append(i)
    out = []
    for members in groups.values():
        out += [(1 << i, 1 << j) for i in members for j in members]
    firsts = [m[0] for m in groups.values()]
    out += [(1 << i, 1 << j) for i in firsts for j in firsts if i != j]
    return out


def _samples(a: AtomStructure):
    atoms = [1 << i for i in range(a.n)]
    idents = [1 << e for e in bits(a.ident)]
    rects = [a.rectangle(x, y) for x in bits(a.ident) for y in bits(a.ident)]
    special = list(dict.fromkeys([0, a.top, a.ident, a.diversity, *idents, *rects]))
    pairs = _atom_pairs(a)
    sums = [r | s for r, s in pairs if r < s]
    return atoms, special, pairs, sums


def _ternary(a: AtomStructure):
    """Triples for the element-level ternary laws: all triples of the coarse
    elements (0, 1, 1', 0', identity atoms) and all chains of rectangles."""
    idents = list(bits(a.ident))
    coarse = list(dict.fromkeys([0, a.top, a.ident, a.diversity, *(1 << e for e in idents)]))
    yield from product(coarse, repeat=3)
    for x, y, z, w in product(idents, repeat=4):
        yield a.rectangle(x, y), a.rectangle(y, z), a.rectangle(z, w)


def check_laws(a: AtomStructure) -> ConditionReport:
    # structures are immutable, so the verdict is kept on the instance
    cached = getattr(a, "_laws_report", None)
    if cached is not None:
        return cached
    a._laws_report = report = _check_laws(a)
    return report


def _check_laws(a: AtomStructure) -> ConditionReport:
    out = _Collector(a)
    atoms, special, pairs, sums = _samples(a)
    unary = atoms + special + sums
    conv, compose = a.converse, a.compose
    small_pairs = pairs + list(product(special, special))

    for r, s in small_pairs:
        cr, cs = conv(r), conv(s)
        if conv(r | s) != cr | cs:
            out.fail("converse-join", r, s)
        if conv(r & s) != cr & cs:
            out.fail("converse-meet", r, s)
        if (r & ~s == 0) != (cr & ~cs == 0):
            out.fail("converse-monotone", r, s)
    for r in unary:
        if a.is_atom(r) != a.is_atom(conv(r)):
            out.fail("converse-atom", r)
        if conv(conv(r)) != r:
            out.fail("involution", r)
        if compose(r, a.ident) != r:
            out.fail("right-identity", r)

    idents = [1 << e for e in bits(a.ident)]
    subs = idents + [a.ident] + [x | y for x, y in combinations(idents, 2)]
    for x in subs:
        if conv(x) != x or compose(x, x) != x:
            out.fail("subidentity", x)

    ternary = list(_ternary(a))
    for r, s, t in ternary:
        if compose(compose(r, s), t) != compose(r, compose(s, t)):
            out.fail("associativity", r, s, t)

    top = a.top
    # atom pairs with a non-zero product, then the distinguished elements
    chained = [(r, s) for r in atoms for s in atoms if compose(r, s)]
    prod_pairs = chained + list(product(special, special))
    prod_pairs += [(r, top) for r in atoms] + [(top, r) for r in atoms]
    for r, s in prod_pairs:
        if conv(compose(r, s)) != compose(conv(s), conv(r)):
            out.fail("converse-product", r, s)

    for r, s in pairs:
        if r < s and compose(r | s, a.ident) != compose(r, a.ident) | compose(s, a.ident):
            out.fail("right-distributivity", r, s, a.ident)
    for r, s, t in ternary:
        if compose(r | s, t) != compose(r, t) | compose(s, t):
            out.fail("right-distributivity", r, s, t)

    tt = compose(top, top)
    right = {s: compose(top, s) for s in atoms}
    for r in atoms:
        left = compose(r, top) & tt
        for s in atoms:
            rs = compose(r, s)
            if rs and rs & ~(right[s] & left):
                out.fail("monotony", r, s)
    prods = {(r, s): compose(r, s) for r in special for s in special}
    below = [(r, r2) for r in special for r2 in special if r & ~r2 == 0]
    for r, r2 in below:
        for s, s2 in below:
            if prods[(r, s)] & ~prods[(r2, s2)]:
                out.fail("monotony", r, s, r2, s2)

    _rectangle_laws(a, out)
    _atom_level(a, out)
    return out.report


def _rect(a, x, y):
    return a.compose(a.compose(x, a.top), y)


def _rectangle_laws(a: AtomStructure, out: _Collector):
    conv, compose = a.converse, a.compose
    idents = [1 << e for e in bits(a.ident)]
    for x, y in product(idents, repeat=2):
        if conv(_rect(a, x, y)) != _rect(a, y, x):
            out.fail("rectangle-converse", x, y)
    for x, y, z in product(idents, repeat=3):
        xy, yz, xz = _rect(a, x, y), _rect(a, y, z), _rect(a, x, z)
        below = [1 << i for i in bits(yz)] + ([yz] if yz else [])
        for b in below:
            prod_ = compose(xy, b)
            if not a.le(prod_, xz):
                out.fail("rectangle-bound", x, y, z, b)
            elif xy and prod_ != xz:
                out.fail("rectangle-equality", x, y, z, b)
    for x, y in product(idents, repeat=2):
        xy = _rect(a, x, y)
        for b in [1 << i for i in bits(xy)] + ([xy] if xy else []):
            if compose(x, b) != b or compose(b, y) != b:
                out.fail("rectangle-sides", x, y, b)


def _atom_level(a: AtomStructure, out: _Collector):
    n, conv, table, tri = a.n, a.conv, a.table, a.triples
    for i in range(n):
        if conv[conv[i]] != i:
            out.fail("converse-involution", 1 << i)
    ids = set(bits(a.ident))
    if {conv[e] for e in ids} != ids:
        out.fail("identity-converse", a.ident)
    for i, j, k in sorted(tri):
        if (conv[i], k, j) not in tri or (k, conv[j], i) not in tri:
            out.fail("cycle-law", 1 << i, 1 << j, 1 << k)
    for i in range(n):
        acc = 0
        for e in ids:
            acc |= table[i][e]
        if acc != 1 << i:
            out.fail("identity-law", 1 << i)

    for i, j, k in _associativity_failures(a):
        out.fail("atom-associativity", 1 << i, 1 << j, 1 << k)


def _associativity_failures(a: AtomStructure) -> list[tuple[int, int, int]]:
    """Atom triples (a, b, c) with (a;b);c != a;(b;c).

    Both sides are joins over the composition relation: e <= (a;b);c iff
    some d has (a, b, d) and (d, c, e); e <= a;(b;c) iff some f has
    (b, c, f) and (a, f, e).  Each is one sparse matrix product.
    """
    n = a.n
    if not a.triples:
        return []
    t = np.array(sorted(a.triples), dtype=np.int64)
    i, j, k = t[:, 0], t[:, 1], t[:, 2]
    ones = np.ones(len(t), dtype=np.int32)
    # (a, b) x d  times  d x (c, e)
    ab_d = sparse.csr_matrix((ones, (i * n + j, k)), shape=(n * n, n))
    d_ce = sparse.csr_matrix((ones, (i, j * n + k)), shape=(n, n * n))
    lhs = (ab_d @ d_ce).tocoo()
    ab, ce = lhs.row.astype(np.int64), lhs.col.astype(np.int64)
    left = ab * n * n + ce
    # (b, c) x f  times  f x (a, e), from the triples (b, c, f) and (a, f, e)
    bc_f = ab_d
    f_ae = sparse.csr_matrix((ones, (j, i * n + k)), shape=(n, n * n))
    rhs = (bc_f @ f_ae).tocoo()
    bc, ae = rhs.row.astype(np.int64), rhs.col.astype(np.int64)
    b, c = bc // n, bc % n
    a_, e = ae // n, ae % n
    right = ((a_ * n + b) * n + c) * n + e
    left, right = np.unique(left), np.unique(right)
    if np.array_equal(left, right):
        return []
    bad = np.union1d(np.setdiff1d(left, right), np.setdiff1d(right, left)) // n
    return sorted({(int(q // (n * n)), int(q // n % n), int(q % n)) for q in bad})
