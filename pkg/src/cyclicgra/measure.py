"""Measurability analysis, stabilizers, regular elements and their indices."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from math import gcd, prod

from .atoms import AtomStructure, Element, bits, popcount
from .cyclic import Subgroup, divisors
from .laws import check_laws
from .report import ConditionReport


class LawlessError(ValueError):
    def __init__(self, report: ConditionReport):
        super().__init__("structure violates the relation-algebra laws")
        self.report = report


@dataclass
class GroupInfo:
    """The functional atoms below a square x;1;x."""

    identity: int
    elements: tuple[int, ...]
    table: dict[tuple[int, int], int]
    generator: int | None = None
    # atom -> exponent of the generator; only for cyclic groups
    residue: dict[int, int] = field(default_factory=dict)

    @property
    def order(self) -> int:
        return len(self.elements)

    @property
    def cyclic(self) -> bool:
        return self.generator is not None

    def power(self, r: int) -> int:
        """The atom g^r for the recorded generator g."""
        return self.by_residue[r % self.order]

    @property
    def by_residue(self) -> dict[int, int]:
        return {r: f for f, r in self.residue.items()}

    def subgroup(self, index: int) -> list[int]:
        """Atoms of the subgroup with ``index`` cosets (residues divisible by it)."""
        return [f for f, r in sorted(self.residue.items(), key=lambda kv: kv[1]) if r % index == 0]

    def as_subgroup(self, atoms) -> Subgroup:
        """A set of group atoms as a divisor subgroup of Z_n."""
        n = self.order
        return Subgroup(n, n // len(atoms))


@dataclass
class MeasurabilityAnalysis:
    structure: AtomStructure
    subidentity: tuple[int, ...]
    pairs: frozenset[tuple[int, int]]
    equivalence: bool
    blocks: tuple[tuple[int, ...], ...]
    groups: dict[int, GroupInfo]
    reasons: dict[int, str]
    indices: dict[tuple[int, int], int] = field(default_factory=dict)

    @property
    def measurable(self) -> bool:
        return not self.reasons and self.equivalence

    @property
    def cyclic(self) -> bool:
        return self.measurable and all(g.cyclic for g in self.groups.values())

    def label(self, i: int):
        return self.structure.atoms[i]

    def ordered_pairs(self) -> list[tuple[int, int]]:
        return sorted(self.pairs)

    def lines(self) -> list[str]:
        a = self.structure
        out = [f"MEASURABLE {'yes' if self.measurable else 'no'}"]
        out.append(f"EQUIVALENCE {'yes' if self.equivalence else 'no'}")
        for x in self.subidentity:
            g = self.groups.get(x)
            if g is None:
                out.append(f"GROUP {a.atoms[x]} refused : {self.reasons[x]}")
                continue
            gen = a.atoms[g.generator] if g.cyclic else "none"
            out.append(
                f"GROUP {a.atoms[x]} order={g.order} cyclic={'yes' if g.cyclic else 'no'} generator={gen}"
            )
        for (x, y), m in sorted(self.indices.items()):
            out.append(f"PAIR {a.atoms[x]} {a.atoms[y]} index={m}")
        return out


def _group(a: AtomStructure, x: int) -> tuple[GroupInfo | None, str]:
    sq = a.rectangle(x, x)
    funcs = [f for f in bits(sq) if a.le(a.compose(a.converse(1 << f), 1 << f), a.ident)]
    total = 0
    for f in funcs:
        total |= 1 << f
    if total != sq:
        missing = [a.atoms[i] for i in bits(sq & ~total)]
        return None, f"square is not a sum of functional atoms (non-functional: {missing})"
    fset = set(funcs)
    table = {}
    for f in funcs:
        for g in funcs:
            h = a.compose(1 << f, 1 << g)
            if not a.is_atom(h) or h.bit_length() - 1 not in fset:
                return None, f"{a.atoms[f]};{a.atoms[g]} is not a group element"
            table[(f, g)] = h.bit_length() - 1
    for f in funcs:
        if table[(f, x)] != f or table[(x, f)] != f:
            return None, f"{a.atoms[x]} is not the group identity"
        inv = a.conv[f]
        if inv not in fset or table[(f, inv)] != x:
            return None, f"converse of {a.atoms[f]} is not its inverse"
    info = GroupInfo(x, tuple(funcs), table)
    for g in funcs:
        seq, h = [x], g
        while h != x and len(seq) <= len(funcs):
            seq.append(h)
            h = table[(h, g)]
        if len(seq) == len(funcs):
            info.generator = g
            info.residue = {f: r for r, f in enumerate(seq)}
            info.elements = tuple(seq)
            break
    return info, ""


def analyze_measurability(a: AtomStructure, check: bool = True) -> MeasurabilityAnalysis:
    """Subidentity atoms, their groups of functional atoms, the rectangle
    relation and (when measurable) the index of every rectangle."""
    if check:
        rep = check_laws(a)
        if not rep.ok:
            raise LawlessError(rep)
    sub = tuple(bits(a.ident))
    pairs = frozenset((x, y) for x in sub for y in sub if a.rectangle(x, y))
    equivalence = all((x, x) in pairs for x in sub) and all((y, x) in pairs for x, y in pairs)
    equivalence = equivalence and all(
        (x, z) in pairs for x, y in pairs for y2, z in pairs if y == y2
    )
    blocks, seen = [], set()
    for x in sub:
        if x in seen:
            continue
        blk = tuple(y for y in sub if (x, y) in pairs)
        seen.update(blk)
        blocks.append(blk)
    groups, reasons = {}, {}
    for x in sub:
        g, why = _group(a, x)
        if g is None:
            reasons[x] = why
        else:
            groups[x] = g
    m = MeasurabilityAnalysis(a, sub, pairs, equivalence, tuple(blocks), groups, reasons)
    if m.measurable:
        for x, y in sorted(pairs):
            stabs = {frozenset(left_stabilizer(a, m, 1 << d, x)) for d in bits(a.rectangle(x, y))}
            if len(stabs) != 1:
                m.reasons[x] = f"atoms below {a.atoms[x]};1;{a.atoms[y]} have different stabilizers"
                m.indices.clear()
                break
            m.indices[(x, y)] = groups[x].order // len(stabs.pop())
    return m


def left_stabilizer(a, m, e, x):
    return [f for f in m.groups[x].elements if a.compose(1 << f, e) == e]


def right_stabilizer(a, m, e, y):
    return [g for g in m.groups[y].elements if a.compose(e, 1 << g) == e]


@dataclass(frozen=True)
class RegularElementInfo:
    element: Element
    x: int
    y: int
    left: frozenset[int]
    right: frozenset[int]
    index: int
    regular: bool


def rectangle_of(a: AtomStructure, m: MeasurabilityAnalysis, e: Element) -> tuple[int, int]:
    if not e:
        raise ValueError("the zero element lies in no single rectangle")
    xs = [x for x in m.subidentity if a.compose(1 << x, e)]
    ys = [y for y in m.subidentity if a.compose(e, 1 << y)]
    if len(xs) != 1 or len(ys) != 1 or not a.le(e, a.rectangle(xs[0], ys[0])):
        raise ValueError("element is not below a single rectangle")
    return xs[0], ys[0]


def stabilizers(a: AtomStructure, m: MeasurabilityAnalysis, e: Element) -> RegularElementInfo:
    x, y = rectangle_of(a, m, e)
    left = left_stabilizer(a, m, e, x)
    right = right_stabilizer(a, m, e, y)
    sum_l = sum(1 << f for f in left)
    sum_r = sum(1 << g for g in right)
    regular = a.compose(e, a.converse(e)) == sum_l and a.compose(a.converse(e), e) == sum_r
    return RegularElementInfo(
        e, x, y, frozenset(left), frozenset(right), m.groups[x].order // len(left), regular
    )


def translation_map(a: AtomStructure, m: MeasurabilityAnalysis, info: RegularElementInfo):
    """Graph of the quotient isomorphism H -> K defined by H;a = a;K, as
    (coset of the left stabilizer, coset of the right stabilizer) pairs."""
    gx, gy = m.groups[info.x], m.groups[info.y]
    out, done = [], set()
    for f in gx.elements:
        if f in done:
            continue
        coset = frozenset(gx.table[(f, h)] for h in info.left)
        done |= coset
        target = a.compose(1 << f, info.element)
        for g in gy.elements:
            if a.compose(info.element, 1 << g) == target:
                out.append((coset, frozenset(gy.table[(g, k)] for k in info.right)))
                break
        else:
            raise ValueError("left translation is not a right translation")
    return out


def regular_elements(
    a: AtomStructure, m: MeasurabilityAnalysis, x: int, y: int, exhaustive: bool = False, cache=None
) -> list[RegularElementInfo]:
    """All regular elements below x;1;y.

    By default the candidates are the sums L;d over subgroups L of G_x and
    atoms d below the rectangle; ``exhaustive`` tests every non-zero subset of
    the rectangle's atoms instead.
    """
    rect = a.rectangle(x, y)
    cache = {} if cache is None else cache
    if exhaustive:
        atoms = list(bits(rect))
        cands = set()
        for mask in range(1, 1 << len(atoms)):
            cands.add(sum(1 << atoms[i] for i in range(len(atoms)) if mask >> i & 1))
    else:
        g = m.groups[x]
        cands = set()
        for k in divisors(g.order):
            sub = g.subgroup(k)
            for d in bits(rect):
                e = 0
                for f in sub:
                    e |= a.compose(1 << f, 1 << d)
                cands.add(e)
    out = []
    for e in sorted(cands):
        info = _info(a, m, e, cache)
        if info is not None and info.regular:
            out.append(info)
    return out


def _info(a, m, e, cache):
    if e not in cache:
        try:
            cache[e] = stabilizers(a, m, e)
        except ValueError:
            cache[e] = None
    return cache[e]


def _coprime_laws(rep: ConditionReport, m: MeasurabilityAnalysis):
    """Subgroups of Z_n with coprime indices h, k: H+K is everything and the
    cosets of the intersection are (H+i) & (K+j), each of size n/(hk)."""
    for x in m.subidentity:
        n = m.groups[x].order
        for h, k in combinations(divisors(n), 2):
            if gcd(h, k) != 1:
                continue
            hs, ks = Subgroup(n, h), Subgroup(n, k)
            if {(p + q) % n for p in hs.elements() for q in ks.elements()} != set(range(n)):
                rep.add("subgroup-coprime", (m.label(x), h, k), "H+K is not the whole group")
            inter = hs.elements() & ks.elements()
            cosets = {frozenset((p + r) % n for p in inter) for r in range(n)}
            pieces = {hs.coset(i).elements() & ks.coset(j).elements() for i in range(h) for j in range(k)}
            if cosets != pieces or any(len(c) != n // (h * k) for c in pieces):
                rep.add("subgroup-coprime", (m.label(x), h, k), "coset system of the intersection")


def index_arithmetic_check(a: AtomStructure, m: MeasurabilityAnalysis) -> ConditionReport:
    """Gcd law for products, equal-index forcing, and the coprime meet laws,
    over every regular element of every rectangle."""
    rep = ConditionReport("INDEX-ARITHMETIC")
    cache: dict = {}
    regs = {p: regular_elements(a, m, *p, cache=cache) for p in m.ordered_pairs()}
    lab = a.support

    for (x, y), ra in regs.items():
        for (y2, z), rb in regs.items():
            if y2 != y:
                continue
            for u in ra:
                for v in rb:
                    c = a.compose(u.element, v.element)
                    info = _info(a, m, c, cache)
                    want = gcd(u.index, v.index)
                    if info is None or not info.regular or info.index != want:
                        got = None if info is None else (info.regular, info.index)
                        rep.add("gcd-law", (lab(u.element), lab(v.element)), f"want index {want}, got {got}")

    for (x, y), rs in regs.items():
        for u in rs:
            for v in rs:
                if u is v:
                    continue
                if u.index == v.index and a.le(u.element, v.element) and u.element != v.element:
                    rep.add("equal-index", (lab(u.element), lab(v.element)))
                if gcd(u.index, v.index) == 1 and u.element < v.element:
                    meet = u.element & v.element
                    info = _info(a, m, meet, cache) if meet else None
                    if info is None or not info.regular:
                        rep.add("coprime-meet-regular", (lab(u.element), lab(v.element)))
                    elif info.index != u.index * v.index:
                        rep.add(
                            "coprime-product",
                            (lab(u.element), lab(v.element)),
                            f"index {info.index} != {u.index}*{v.index}",
                        )
        # three or more pairwise coprime indices > 1
        nontrivial = [u for u in rs if u.index > 1]
        for trio in combinations(nontrivial, 3):
            if all(gcd(p.index, q.index) == 1 for p, q in combinations(trio, 2)):
                meet = trio[0].element & trio[1].element & trio[2].element
                info = _info(a, m, meet, cache) if meet else None
                want = prod(t.index for t in trio)
                if info is None or not info.regular or info.index != want:
                    rep.add("coprime-product", tuple(lab(t.element) for t in trio), f"want {want}")
    _coprime_laws(rep, m)
    return rep


def all_atoms_regular(a: AtomStructure, m: MeasurabilityAnalysis) -> ConditionReport:
    """Every atom below a rectangle is regular with the common stabilizers,
    and left translations by cosets of the stabilizer partition the rectangle."""
    rep = ConditionReport("ATOM-REGULARITY")
    for x, y in m.ordered_pairs():
        rect = a.rectangle(x, y)
        infos = [stabilizers(a, m, 1 << d) for d in bits(rect)]
        if not all(i.regular for i in infos):
            rep.add("regular", (m.label(x), m.label(y)))
        if len({(i.left, i.right) for i in infos}) != 1:
            rep.add("common-stabilizer", (m.label(x), m.label(y)))
        for info in infos:
            gx = m.groups[x]
            translations, cover = set(), 0
            for f in gx.elements:
                t = a.compose(1 << f, info.element)
                translations.add(t)
            total = sum(popcount(t) for t in translations)
            for t in translations:
                cover |= t
            if cover != rect or total != popcount(rect):
                rep.add("translation-partition", (m.label(x), m.label(y), a.atoms[info.element.bit_length() - 1]))
    return rep
