"""Prime layers, scaffolds, and the representation of a measurable algebra
with cyclic groups as a group relation algebra.

For a prime p the layer elements a^k_xy (x ~_k y) descend from the
rectangles x;1;y at k = 0 to regular elements of index p^k.  The scaffold
atom a_xy is the meet over the primes of m_xy of the layer element at the
full exponent, and the scaffold fixes the quotient isomorphisms of a frame
whose group relation algebra is isomorphic to the input.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import gcd

from .atoms import AtomStructure, Element, bits
from .cyclic import Subgroup, factorize, is_prime, p_adic_valuation
from .frame import GroupFrame, IndexSystem, QuotientIso, check_frame_conditions, indices_of_frame
from .gra import ConcreteRepresentation, build_gra, verify_complete_representation
from .iso import iso_search
from .measure import (
    MeasurabilityAnalysis,
    analyze_measurability,
    stabilizers,
    translation_map,
)
from .report import ConditionReport


class LayerError(RuntimeError):
    """A layer invariant failed; the input is corrupted or not measurable."""

    def __init__(self, clause: str, witness: tuple, detail: str = ""):
        super().__init__(f"layer condition {clause} fails at {witness} {detail}".rstrip())
        self.clause = clause
        self.witness = witness


class RepresentationError(ValueError):
    """Input refused: not measurable, or some group is not cyclic."""

    def __init__(self, message: str, analysis: MeasurabilityAnalysis | None = None):
        super().__init__(message)
        self.analysis = analysis


@dataclass(frozen=True)
class SimK:
    prime: int
    level: int
    classes: tuple[tuple[int, ...], ...]

    def representative(self, x: int) -> int:
        for c in self.classes:
            if x in c:
                return c[0]
        raise KeyError(x)

    def related(self, x: int, y: int) -> bool:
        return self.representative(x) == self.representative(y)


def sim_k(m: MeasurabilityAnalysis, p: int, k: int) -> SimK:
    """x ~_k y iff x = y or (x, y) is a pair whose index is divisible by p^k."""
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    if k < 0:
        raise ValueError("level must be a natural number")
    q = p**k

    def rel(x, y):
        return x == y or ((x, y) in m.pairs and m.indices[(x, y)] % q == 0)

    classes, seen = [], set()
    for x in m.subidentity:
        if x in seen:
            continue
        cls = tuple(y for y in m.subidentity if rel(x, y))
        seen.update(cls)
        classes.append(cls)
    for cls in classes:
        for y in cls:
            for z in cls:
                if not rel(y, z):
                    raise LayerError("~k", (m.label(y), m.label(z)), f"not transitive at p={p} k={k}")
    return SimK(p, k, tuple(classes))


@dataclass
class PrimeLayer:
    prime: int
    max_level: int
    # (k, x, y) -> a^k_xy for x ~_k y
    elements: dict[tuple[int, int, int], Element] = field(default_factory=dict)
    relations: list[SimK] = field(default_factory=list)

    def representatives(self, k: int) -> dict[int, int]:
        return {x: c[0] for c in self.relations[k].classes for x in c}


def _check_level(a: AtomStructure, m: MeasurabilityAnalysis, layer: PrimeLayer, k: int, cache: dict):
    p, elems = layer.prime, layer.elements
    sim = layer.relations[k]

    def info(e):
        if e not in cache:
            cache[e] = stabilizers(a, m, e)
        return cache[e]

    for cls in sim.classes:
        for x in cls:
            for y in cls:
                e = elems[(k, x, y)]
                w = (m.label(x), m.label(y), k)
                if not e or not a.le(e, a.rectangle(x, y)):
                    raise LayerError("(i)", w, "not below the rectangle")
                try:
                    inf = info(e)
                except ValueError as exc:
                    raise LayerError("(i)", w, str(exc)) from None
                if not inf.regular:
                    raise LayerError("(i)", w, "not regular")
                if k == 0 and x != y and e != a.rectangle(x, y):
                    raise LayerError("(i)", w, "level 0 is not the rectangle")
                if x == y and e != 1 << x:
                    raise LayerError("(ii)", w)
                if x != y and inf.index != p**k:
                    raise LayerError("(iii)", w, f"index {inf.index} != {p ** k}")
                if elems[(k, y, x)] != a.converse(e):
                    raise LayerError("(iv)", w)
                if k >= 1 and not a.le(e, elems[(k - 1, x, y)]):
                    raise LayerError("(vi)", w)
                for z in cls:
                    prod_ = a.compose(e, elems[(k, y, z)])
                    target = elems[(k, x, z)]
                    if not a.le(target, prod_) or (x != z and target != prod_):
                        raise LayerError("(v)", (m.label(x), m.label(y), m.label(z), k))


def build_prime_layer(a: AtomStructure, m: MeasurabilityAnalysis, p: int) -> PrimeLayer:
    if not m.cyclic:
        raise RepresentationError("layers need a measurable algebra with cyclic groups", m)
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    top = max(
        [p_adic_valuation(v, p) for (x, y), v in m.indices.items() if x != y] + [0]
    )
    layer = PrimeLayer(p, top)
    cache: dict = {}
    layer.relations.append(sim_k(m, p, 0))
    for cls in layer.relations[0].classes:
        for x in cls:
            for y in cls:
                layer.elements[(0, x, y)] = 1 << x if x == y else a.rectangle(x, y)
    _check_level(a, m, layer, 0, cache)

    for k in range(1, top + 1):
        sim = sim_k(m, p, k)
        layer.relations.append(sim)
        c: dict[tuple[int, int], Element] = {}
        for cls in sim.classes:
            rep = cls[0]
            c[(rep, rep)] = 1 << rep
            for y in cls[1:]:
                b = layer.elements[(k - 1, y, rep)]
                d = next(bits(b))  # least atom below b
                g = m.groups[y]
                sub = g.subgroup(p**k)
                e = 0
                for f in sub:
                    e |= a.compose(1 << f, 1 << d)
                c[(y, rep)] = e
                c[(rep, y)] = a.converse(e)
            for x in cls:
                for y in cls:
                    if x == y:
                        layer.elements[(k, x, y)] = 1 << x
                    else:
                        layer.elements[(k, x, y)] = a.compose(c[(x, rep)], c[(rep, y)])
        _check_level(a, m, layer, k, cache)
    return layer


@dataclass
class Scaffold:
    # (x, y) -> a_xy, over the pairs of the rectangle relation
    elements: dict[tuple[int, int], Element]

    def lines(self, a: AtomStructure, m: MeasurabilityAnalysis | None = None) -> list[str]:
        out = []
        for (x, y), e in sorted(self.elements.items()):
            label = "+".join(str(s) for s in a.support(e))
            idx = "" if m is None else f" index={m.indices[(x, y)]}"
            out.append(f"SCAFFOLD {a.atoms[x]} {a.atoms[y]} atom={label}{idx}")
        return out


def build_scaffold(
    a: AtomStructure, m: MeasurabilityAnalysis, layers: dict[int, PrimeLayer] | None = None
) -> Scaffold:
    if not m.cyclic:
        raise RepresentationError("a scaffold needs a measurable algebra with cyclic groups", m)
    primes = sorted({p for (x, y), v in m.indices.items() if x != y for p in factorize(v)})
    if layers is None:
        layers = {}
    for p in primes:
        if p not in layers:
            layers[p] = build_prime_layer(a, m, p)
    elements = {}
    for x, y in m.ordered_pairs():
        if x == y:
            elements[(x, y)] = 1 << x
            continue
        e = a.rectangle(x, y)
        for p, k in factorize(m.indices[(x, y)]).items():
            e &= layers[p].elements[(k, x, y)]
        elements[(x, y)] = e
    s = Scaffold(elements)
    rep = check_scaffold(a, s, m)
    if not rep.ok:
        v = rep.violations[0]
        raise LayerError(v.clause, v.witness, v.detail)
    return s


def check_scaffold(a: AtomStructure, s: Scaffold, m: MeasurabilityAnalysis | None = None) -> ConditionReport:
    """Scaffold conditions (i)-(iii) and atomicity; with an analysis, also the
    index of every a_xy and of every product a_xy;a_yz."""
    rep = ConditionReport("SCAFFOLD")
    el = s.elements
    lab = a.atoms

    def show(e):
        return "+".join(str(t) for t in a.support(e)) or "0"

    for (x, y), e in sorted(el.items()):
        if not a.is_atom(e):
            rep.add("atom", (lab[x], lab[y]), f"a_xy = {show(e)} is not an atom")
        if x == y and e != 1 << x:
            rep.add("(i)", (lab[x],), f"a_xx = {show(e)}")
        if (y, x) not in el or el[(y, x)] != a.converse(e):
            rep.add("(ii)", (lab[x], lab[y]), "a_yx is not the converse of a_xy")
    for (x, y), e in sorted(el.items()):
        for (y2, z), f in sorted(el.items()):
            if y2 != y or (x, z) not in el:
                continue
            if not a.le(el[(x, z)], a.compose(e, f)):
                rep.add("(iii)", (lab[x], lab[y], lab[z]), "a_xz is not below a_xy;a_yz")
    if m is not None and rep.ok:
        for (x, y), e in sorted(el.items()):
            want = m.indices[(x, y)]
            got = stabilizers(a, m, e).index
            if got != want:
                rep.add("index", (lab[x], lab[y]), f"index {got} != {want}")
        for (x, y), e in sorted(el.items()):
            for (y2, z), f in sorted(el.items()):
                if y2 != y:
                    continue
                info = stabilizers(a, m, a.compose(e, f))
                want = gcd(m.indices[(x, y)], m.indices[(y, z)])
                if not info.regular or info.index != want:
                    rep.add("gcd", (lab[x], lab[y], lab[z]), f"index {info.index} != {want}")
    return rep


def extract_frame(a: AtomStructure, m: MeasurabilityAnalysis, s: Scaffold) -> GroupFrame:
    """Kernels and cokernels are the stabilizers of the scaffold atoms; the
    quotient isomorphism sends H + l to the coset K + j with g^l;a = a;g^j."""
    name = {x: str(a.atoms[x]) for x in m.subidentity}
    isos = {}
    for (x, y), e in s.elements.items():
        info = stabilizers(a, m, e)
        gx, gy = m.groups[x], m.groups[y]
        h = gx.as_subgroup(info.left)
        k = gy.as_subgroup(info.right)
        action = [0] * h.generator
        for src, dst in translation_map(a, m, info):
            ell = min(gx.residue[f] for f in src) % h.generator
            action[ell] = min(gy.residue[g] for g in dst) % k.generator
        isos[(name[x], name[y])] = QuotientIso(h, k, tuple(action))
    return GroupFrame(
        tuple(name[x] for x in m.subidentity),
        tuple(tuple(name[x] for x in b) for b in m.blocks),
        {name[x]: m.groups[x].order for x in m.subidentity},
        isos,
    )


class InternalConsistencyError(RuntimeError):
    pass


@dataclass
class RepresentationResult:
    analysis: MeasurabilityAnalysis
    layers: dict[int, PrimeLayer]
    scaffold: Scaffold
    frame: GroupFrame
    system: IndexSystem
    gra: AtomStructure
    gra_representation: ConcreteRepresentation
    bijection: dict
    representation: ConcreteRepresentation
    report: ConditionReport

    def lines(self) -> list[str]:
        a, m = self.analysis.structure, self.analysis
        out = list(m.lines())
        out += self.scaffold.lines(a, m)
        for x, y in self.system.pairs():
            iso = self.frame.isos[(x, y)]
            out.append(f"FRAME {x} {y} index={self.system.index[(x, y)]} action={','.join(map(str, iso.action))}")
        for lab in a.atoms:
            out.append(f"ISO {lab} -> {self.bijection[lab]}")
        out += self.report.lines()
        return out


def _hint(a: AtomStructure, m: MeasurabilityAnalysis, s: Scaffold, rep: ConcreteRepresentation) -> dict:
    """Candidate bijection: the atom a_xy;g^v (g the recorded generator of G_y)
    goes to the frame atom containing the carrier pair ((x,0),(y,v))."""
    owner = {}
    for label, rel in rep.atom_map.items():
        for pq in rel.pairs:
            owner[pq] = label
    hint = {}
    for (x, y), e in s.elements.items():
        gy = m.groups[y]
        for v in range(gy.order):
            c = a.compose(e, 1 << gy.power(v))
            if not a.is_atom(c):
                return {}
            hint[a.atoms[c.bit_length() - 1]] = owner[((str(a.atoms[x]), 0), (str(a.atoms[y]), v))]
    return hint


def represent(a: AtomStructure, analysis: MeasurabilityAnalysis | None = None) -> RepresentationResult:
    m = analyze_measurability(a) if analysis is None else analysis
    if not m.measurable:
        raise RepresentationError("not measurable: " + "; ".join(m.reasons.values() or ["rectangles"]), m)
    if not m.cyclic:
        bad = [m.label(x) for x, g in m.groups.items() if not g.cyclic]
        raise RepresentationError(f"groups at {bad} are not cyclic", m)
    layers: dict[int, PrimeLayer] = {}
    s = build_scaffold(a, m, layers)
    f = extract_frame(a, m, s)
    frep = check_frame_conditions(f)
    if not frep.ok:
        raise InternalConsistencyError("extracted frame fails the frame conditions:\n" + str(frep))
    system = indices_of_frame(f)
    g, grep_ = build_gra(f)
    bij = iso_search(a, g, hint=_hint(a, m, s, grep_))
    if bij is None:
        raise InternalConsistencyError("no isomorphism onto the group relation algebra of the extracted frame")
    concrete = grep_.relabel(bij)
    report = verify_complete_representation(a, concrete)
    if not report.ok:
        raise InternalConsistencyError("transported representation fails:\n" + str(report))
    return RepresentationResult(m, layers, s, f, system, g, grep_, bij, concrete, report)
