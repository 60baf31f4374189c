"""Index systems, group frames over cyclic groups, and their condition checks.

An index system assigns a cyclic group Z_{n_x} to each label x and an index
m_xy to each pair inside a block of an equivalence relation on the labels.
When the index conditions hold, ``build_frame`` produces the quotient
isomorphisms H_xy + l -> K_xy + l (l < m_xy) between the quotients by the
subgroups of multiples of m_xy, and ``check_frame_conditions`` verifies the
four frame conditions exhaustively over every triple of every block.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from math import gcd
from typing import Iterator, Mapping

from .cyclic import Subgroup, composite_subgroup, divisors
from .report import ConditionReport

Pair = tuple[str, str]


class FrameError(ValueError):
    """Construction refused; ``report`` says why."""

    def __init__(self, message: str, report: ConditionReport):
        super().__init__(message)
        self.report = report


@dataclass(frozen=True)
class IndexSystem:
    atoms: tuple[str, ...]
    blocks: tuple[tuple[str, ...], ...]
    order: Mapping[str, int]
    index: Mapping[Pair, int]

    def __post_init__(self):
        seen: list[str] = [x for b in self.blocks for x in b]
        if sorted(seen) != sorted(self.atoms) or len(set(self.atoms)) != len(self.atoms):
            raise ValueError("blocks must partition the atoms")
        for x in self.atoms:
            if self.order.get(x, 0) < 1:
                raise ValueError(f"order of {x} must be a positive integer")
        wanted = set(self.pairs())
        if set(self.index) != wanted:
            extra = sorted(set(self.index) - wanted)
            missing = sorted(wanted - set(self.index))
            raise ValueError(
                f"index must be given exactly on block pairs (extra={extra}, missing={missing})"
            )
        for key, m in self.index.items():
            if m < 1:
                raise ValueError(f"index {key} must be positive")

    @classmethod
    def from_matrix(cls, atoms, order, index=None, blocks=None) -> "IndexSystem":
        """Convenience constructor: symmetric closure, m_xx defaults to n_x,
        a single block when ``blocks`` is omitted."""
        atoms = tuple(atoms)
        blocks = tuple(tuple(b) for b in blocks) if blocks is not None else (atoms,)
        full: dict[Pair, int] = {}
        for (x, y), m in (index or {}).items():
            full[(x, y)] = m
            full.setdefault((y, x), m)
        for x in atoms:
            full.setdefault((x, x), order[x])
        return cls(atoms, blocks, dict(order), full)

    def block_of(self, x: str) -> tuple[str, ...]:
        for b in self.blocks:
            if x in b:
                return b
        raise KeyError(x)

    def pairs(self) -> list[Pair]:
        """Pairs of the equivalence relation, in label order."""
        pos = {x: i for i, x in enumerate(self.atoms)}
        out = [(x, y) for b in self.blocks for x in b for y in b]
        return sorted(out, key=lambda p: (pos[p[0]], pos[p[1]]))

    def related(self, x: str, y: str) -> bool:
        return (x, y) in self.index


def check_index_conditions(s: IndexSystem) -> ConditionReport:
    rep = ConditionReport("INDEX-CONDITIONS")
    m, n = s.index, s.order
    for x, y in s.pairs():
        if gcd(n[x], n[y]) % m[(x, y)]:
            rep.add("(i)", (x, y), f"m={m[(x, y)]} does not divide gcd({n[x]},{n[y]})")
    for x in s.atoms:
        if m[(x, x)] != n[x]:
            rep.add("(ii)", (x,), f"m={m[(x, x)]} but order={n[x]}")
    for x, y in s.pairs():
        if s.atoms.index(x) < s.atoms.index(y) and m[(x, y)] != m[(y, x)]:
            rep.add("(iii)", (x, y), f"m_xy={m[(x, y)]} m_yx={m[(y, x)]}")
    reported = set()
    for b in s.blocks:
        for x, y, z in product(b, repeat=3):
            g1 = gcd(m[(x, y)], m[(y, z)])
            g2 = gcd(m[(x, y)], m[(x, z)])
            g3 = gcd(m[(x, z)], m[(y, z)])
            if g1 == g2 == g3:
                continue
            key = frozenset((x, y, z))
            if key in reported:
                continue
            reported.add(key)
            rep.add(
                "(iv)",
                (x, y, z),
                f"gcd(m_xy,m_yz)={g1} gcd(m_xy,m_xz)={g2} gcd(m_xz,m_yz)={g3}",
            )
    return rep


@dataclass(frozen=True)
class QuotientIso:
    """A map G_x/source -> G_y/target given by its action on coset offsets."""

    source: Subgroup
    target: Subgroup
    action: tuple[int, ...]

    def __call__(self, offset: int) -> int:
        return self.action[offset % self.source.generator]

    def is_isomorphism(self) -> bool:
        m = self.source.generator
        if self.target.generator != m or len(self.action) != m:
            return False
        if sorted(self.action) != list(range(m)):
            return False
        act = self.action
        return all(act[(a + b) % m] == (act[a] + act[b]) % m for a in range(m) for b in range(m))

    def inverse(self) -> "QuotientIso":
        inv = [0] * len(self.action)
        for ell, t in enumerate(self.action):
            inv[t] = ell
        return QuotientIso(self.target, self.source, tuple(inv))

    def image_offsets(self, offsets) -> frozenset[int]:
        return frozenset(self.action[o] for o in offsets)


class NotInducedError(ValueError):
    pass


def induce(iso: QuotientIso, domain: Subgroup, codomain: Subgroup) -> QuotientIso:
    """The map G/domain -> G'/codomain that ``iso`` induces on coarser quotients.

    Raises NotInducedError when some domain coset is not sent into a single
    codomain coset.
    """
    if not domain.contains_subgroup(iso.source) or not codomain.contains_subgroup(iso.target):
        raise NotInducedError("coarse subgroups must contain the kernels")
    d, e = domain.generator, codomain.generator
    action = [None] * d
    for ell, t in enumerate(iso.action):
        s, u = ell % d, t % e
        if action[s] is None:
            action[s] = u
        elif action[s] != u:
            raise NotInducedError(f"coset {s} of the domain splits across {action[s]} and {u}")
    return QuotientIso(domain, codomain, tuple(action))


@dataclass(frozen=True)
class GroupFrame:
    atoms: tuple[str, ...]
    blocks: tuple[tuple[str, ...], ...]
    orders: Mapping[str, int]
    isos: Mapping[Pair, QuotientIso]

    def pairs(self) -> list[Pair]:
        pos = {x: i for i, x in enumerate(self.atoms)}
        return sorted(
            ((x, y) for b in self.blocks for x in b for y in b),
            key=lambda p: (pos[p[0]], pos[p[1]]),
        )

    def kernel(self, x: str, y: str) -> Subgroup:
        return self.isos[(x, y)].source

    def cokernel(self, x: str, y: str) -> Subgroup:
        return self.isos[(x, y)].target


def build_frame(s: IndexSystem) -> GroupFrame:
    rep = check_index_conditions(s)
    if not rep.ok:
        raise FrameError("index conditions fail; no frame built", rep)
    isos = {}
    for x, y in s.pairs():
        m = s.index[(x, y)]
        isos[(x, y)] = QuotientIso(
            Subgroup(s.order[x], m), Subgroup(s.order[y], m), tuple(range(m))
        )
    return GroupFrame(s.atoms, s.blocks, dict(s.order), isos)


def induced_iso(f: GroupFrame, x: str, y: str, z: str) -> QuotientIso:
    """The map G_x/(H_xy + H_xz) -> G_y/(K_xy + H_yz) induced by phi_xy."""
    for pair in ((x, y), (y, z), (x, z)):
        if pair not in f.isos:
            raise KeyError(f"{pair} is not a pair of the frame")
    dom = composite_subgroup(f.kernel(x, y), f.kernel(x, z))
    cod = composite_subgroup(f.cokernel(x, y), f.kernel(y, z))
    return induce(f.isos[(x, y)], dom, cod)


def _check_iso_shape(f: GroupFrame, rep: ConditionReport) -> set[Pair]:
    bad = set()
    for x, y in f.pairs():
        iso = f.isos.get((x, y))
        if iso is None:
            rep.add("iso", (x, y), "missing quotient isomorphism")
            bad.add((x, y))
            continue
        if iso.source.group_order != f.orders[x] or iso.target.group_order != f.orders[y]:
            rep.add("iso", (x, y), "subgroups live in the wrong groups")
            bad.add((x, y))
        elif not iso.is_isomorphism():
            rep.add("iso", (x, y), f"action {iso.action} is not a quotient isomorphism")
            bad.add((x, y))
    return bad


def check_frame_conditions(f: GroupFrame) -> ConditionReport:
    # memoized on the frame; the snapshot guards against in-place edits of isos
    cached = f.__dict__.get("_report")
    snap = (f.atoms, f.blocks, dict(f.orders), dict(f.isos))
    if cached is not None and cached[0] == snap:
        return cached[1]
    rep = _check_frame_conditions(f)
    object.__setattr__(f, "_report", (snap, rep))
    return rep


def _check_frame_conditions(f: GroupFrame) -> ConditionReport:
    rep = ConditionReport("FRAME-CONDITIONS")
    bad = _check_iso_shape(f, rep)
    if any(p not in f.isos for p in bad):
        return rep
    for x in f.atoms:
        iso = f.isos[(x, x)]
        n = f.orders[x]
        if iso.source.generator != n or iso.target.generator != n or iso.action != tuple(range(n)):
            rep.add("(i)", (x,), "phi_xx is not the identity of G_x/{0}")
    for x, y in f.pairs():
        if f.isos[(y, x)] != f.isos[(x, y)].inverse():
            if f.atoms.index(x) <= f.atoms.index(y):
                rep.add("(ii)", (x, y), "phi_yx is not the inverse of phi_xy")
    for b in f.blocks:
        for x, y, z in product(b, repeat=3):
            phi = f.isos[(x, y)]
            h_xy, h_xz, h_yz = f.kernel(x, y), f.kernel(x, z), f.kernel(y, z)
            k_xy, k_xz, k_yz = f.cokernel(x, y), f.cokernel(x, z), f.cokernel(y, z)
            if h_xy.group_order != h_xz.group_order or k_xy.group_order != h_yz.group_order:
                continue
            d1 = gcd(h_xy.generator, h_xz.generator)
            d2 = gcd(k_xy.generator, h_yz.generator)
            image = phi.image_offsets(ell for ell in range(len(phi.action)) if ell % d1 == 0)
            expected = frozenset(t for t in range(k_xy.generator) if t % d2 == 0)
            if image != expected:
                rep.add("(iii)", (x, y, z), "phi_xy[H_xy+H_xz] != K_xy+H_yz")
                continue
            try:
                hat_xy = induce(phi, composite_subgroup(h_xy, h_xz), composite_subgroup(k_xy, h_yz))
                hat_yz = induce(
                    f.isos[(y, z)], composite_subgroup(k_xy, h_yz), composite_subgroup(k_xz, k_yz)
                )
                hat_xz = induce(
                    f.isos[(x, z)], composite_subgroup(h_xy, h_xz), composite_subgroup(k_xz, k_yz)
                )
            except (NotInducedError, ValueError) as exc:
                rep.add("(iv)", (x, y, z), f"induced map undefined: {exc}")
                continue
            composed = tuple(hat_yz.action[t] for t in hat_xy.action)
            if composed != hat_xz.action:
                rep.add("(iv)", (x, y, z), f"hat_yz o hat_xy = {composed} but hat_xz = {hat_xz.action}")
    return rep


def indices_of_frame(f: GroupFrame) -> IndexSystem:
    rep = check_frame_conditions(f)
    if not rep.ok:
        raise FrameError("frame conditions fail; indices not extracted", rep)
    index = {p: f.isos[p].source.index for p in f.pairs()}
    return IndexSystem(f.atoms, f.blocks, dict(f.orders), index)


LABELS = "xyzwuvpqrst"


def candidate_systems(n_atoms: int, max_order: int, labels: str = LABELS) -> Iterator[IndexSystem]:
    """Every single-block system over Z_1..Z_max_order whose off-diagonal
    entries divide the gcd of the orders (condition (iv) is not filtered)."""
    atoms = tuple(labels[:n_atoms])
    upper = [(atoms[i], atoms[j]) for i in range(n_atoms) for j in range(i + 1, n_atoms)]
    for orders in product(range(1, max_order + 1), repeat=n_atoms):
        order = dict(zip(atoms, orders))
        choices = [divisors(gcd(order[x], order[y])) for x, y in upper]
        for entries in product(*choices):
            yield IndexSystem.from_matrix(atoms, order, dict(zip(upper, entries)))


def valid_systems(max_atoms: int, max_order: int) -> Iterator[IndexSystem]:
    for k in range(1, max_atoms + 1):
        for s in candidate_systems(k, max_order):
            if check_index_conditions(s).ok:
                yield s
