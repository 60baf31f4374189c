"""The full group relation algebra of a group frame, built concretely.

The carrier is the disjoint union of the groups, each point tagged with its
group's label.  The atom (x, y, alpha) is the relation

    R_{xy,alpha} = union over gamma of (H_xy + gamma) x phi_xy(H_xy + gamma + alpha),

i.e. the pairs (u, v) with v in phi_xy(H_xy + u + alpha).  Its composition
table is obtained by composing the concrete relations over the carrier.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product
from math import gcd

import numpy as np

from .atoms import AtomStructure, bits
from .frame import FrameError, GroupFrame, check_frame_conditions
from .report import ConditionReport

Point = tuple[str, int]


@dataclass(frozen=True)
class ConcreteRelation:
    pairs: frozenset[tuple[Point, Point]]

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self):
        return iter(sorted(self.pairs))

    def converse(self) -> "ConcreteRelation":
        return ConcreteRelation(frozenset((q, p) for p, q in self.pairs))

    def compose(self, other: "ConcreteRelation") -> "ConcreteRelation":
        succ: dict = {}
        for q, r in other.pairs:
            succ.setdefault(q, []).append(r)
        return ConcreteRelation(frozenset((p, r) for p, q in self.pairs for r in succ.get(q, ())))

    def __or__(self, other: "ConcreteRelation") -> "ConcreteRelation":
        return ConcreteRelation(self.pairs | other.pairs)


@dataclass
class ConcreteRepresentation:
    carrier: tuple[Point, ...]
    atom_map: dict[str, ConcreteRelation]
    # atom label -> (x, y, alpha); only for relations built from a frame
    coords: dict[str, tuple[str, str, int]] = field(default_factory=dict)

    def relabel(self, mapping: dict) -> "ConcreteRepresentation":
        """Representation of the atoms ``mapping.keys()``, where atom a is sent
        to this representation's relation for ``mapping[a]``."""
        return ConcreteRepresentation(
            self.carrier,
            {a: self.atom_map[b] for a, b in mapping.items()},
            {a: self.coords[b] for a, b in mapping.items() if b in self.coords},
        )

    def rel_lines(self) -> list[str]:
        """One line per pair, sorted; atoms without frame coordinates are
        written by label."""
        out = []
        for label, rel in self.atom_map.items():
            head = " ".join(map(str, self.coords[label])) if label in self.coords else str(label)
            for p, q in rel:
                out.append(f"REL {head} : ({p[0]},{p[1]}) ({q[0]},{q[1]})")
        return sorted(out)


def atom_label(x: str, y: str, alpha: int) -> str:
    return f"{x}.{y}.{alpha}"


def carrier(f: GroupFrame) -> tuple[Point, ...]:
    return tuple((x, g) for x in f.atoms for g in range(f.orders[x]))


def _atom_matrix(f: GroupFrame, x: str, y: str, alpha: int) -> np.ndarray:
    iso = f.isos[(x, y)]
    m, mt = iso.source.generator, iso.target.generator
    act = np.asarray(iso.action)
    u = np.arange(f.orders[x])
    v = np.arange(f.orders[y])
    return (v[None, :] % mt) == act[(u[:, None] + alpha) % m]


def atom_relation(f: GroupFrame, x: str, y: str, alpha: int) -> ConcreteRelation:
    if (x, y) not in f.isos:
        raise KeyError(f"({x}, {y}) is not a pair of the frame")
    m = f.isos[(x, y)].source.generator
    if not 0 <= alpha < m:
        raise ValueError(f"alpha={alpha} outside 0..{m - 1}")
    mat = _atom_matrix(f, x, y, alpha)
    us, vs = np.nonzero(mat)
    return ConcreteRelation(frozenset(((x, int(u)), (y, int(v))) for u, v in zip(us, vs)))


def _compose_blocks(left: np.ndarray, right: np.ndarray, onehot: np.ndarray):
    """left (p, nx, ny), right (q, ny, nz), onehot (r, nx, nz), all bool.

    Returns an int array C of shape (p, q, r): C[i, j, k] is the number of
    carrier pairs of atom k hit by left[i] composed with right[j]; and the
    total number of pairs in each composite, shape (p, q).
    """
    p, nx, ny = left.shape
    q, _, nz = right.shape
    lf = left.reshape(p * nx, ny).astype(np.float32)
    rf = right.transpose(1, 0, 2).reshape(ny, q * nz).astype(np.float32)
    comp = (lf @ rf).reshape(p, nx, q, nz).transpose(0, 2, 1, 3) > 0
    flat = comp.reshape(p * q, nx * nz).astype(np.float32)
    oh = onehot.reshape(onehot.shape[0], nx * nz).astype(np.float32).T
    counts = (flat @ oh).round().astype(np.int64).reshape(p, q, -1)
    totals = comp.reshape(p, q, -1).sum(axis=2)
    return counts, totals


def _is_canonical(f: GroupFrame) -> bool:
    return all(iso.action == tuple(range(len(iso.action))) for iso in f.isos.values())


def predicted_composition(m_xy: int, m_yz: int, m_xz: int, alpha: int, beta: int) -> frozenset[int]:
    """Coset arithmetic for canonical frames: R_alpha ; R_beta is the union of
    the R_gamma with gamma = alpha + beta modulo gcd(m_xy, m_yz)."""
    d = gcd(m_xy, m_yz)
    return frozenset(g for g in range(m_xz) if (g - alpha - beta) % d == 0)


@lru_cache(maxsize=4096)
def _predicted_table(m_xy: int, m_yz: int, m_xz: int) -> np.ndarray:
    d = gcd(m_xy, m_yz)
    al, be, g = np.ogrid[:m_xy, :m_yz, :m_xz]
    return (g - al - be) % d == 0


def build_gra(f: GroupFrame) -> tuple[AtomStructure, ConcreteRepresentation]:
    rep = check_frame_conditions(f)
    if not rep.ok:
        raise FrameError("frame conditions fail; no group relation algebra", rep)
    pairs = f.pairs()
    labels, coords, stacks, names, which = [], {}, {}, {}, {}
    for x, y in pairs:
        m = f.isos[(x, y)].source.generator
        stack = np.stack([_atom_matrix(f, x, y, al) for al in range(m)])
        if not np.all(stack.sum(axis=0) == 1):
            raise RuntimeError(f"atoms do not partition the rectangle {x} {y}")
        stacks[(x, y)] = stack
        which[(x, y)] = stack.argmax(axis=0)  # the atom containing each pair
        names[(x, y)] = [atom_label(x, y, al) for al in range(m)]
        for al, lab in enumerate(names[(x, y)]):
            if lab in coords:
                raise ValueError(f"atom label collision: {lab}")
            labels.append(lab)
            coords[lab] = (x, y, al)

    conv = {}
    for x, y in pairs:
        # alpha -> beta with reversed R_alpha inside R_beta, read off cell by cell
        m = stacks[(x, y)].shape[0]
        links = np.unique(which[(x, y)] * m + which[(y, x)].T)
        al, be = links // m, links % m
        if len(links) != m or len(set(al.tolist())) != m or len(set(be.tolist())) != m:
            raise RuntimeError(f"converse of an atom of {x} {y} is not an atom")
        for i, j in zip(al.tolist(), be.tolist()):
            conv[names[(x, y)][i]] = names[(y, x)][j]

    canonical = _is_canonical(f)
    triples = []
    for blk in f.blocks:
        for x, y, z in product(blk, repeat=3):
            counts, totals = _compose_blocks(stacks[(x, y)], stacks[(y, z)], stacks[(x, z)])
            sizes = stacks[(x, z)].reshape(counts.shape[2], -1).sum(axis=1)
            mxy, myz, mxz = counts.shape
            hit = counts > 0
            if np.any(hit & (counts != sizes)) or np.any(totals != (hit * sizes).sum(axis=2)):
                raise RuntimeError(f"composite of atoms is not a union of atoms at {x}{y}{z}")
            if canonical and not np.array_equal(hit, _predicted_table(mxy, myz, mxz)):
                raise RuntimeError(f"coset arithmetic disagrees with relational composition at {x}{y}{z}")
            nxy, nyz, nxz = names[(x, y)], names[(y, z)], names[(x, z)]
            for al, be, g in zip(*(v.tolist() for v in np.nonzero(hit))):
                triples.append((nxy[al], nyz[be], nxz[g]))

    identity = [atom_label(x, x, 0) for x in f.atoms]
    structure = AtomStructure(labels, identity, conv, triples)
    rels = {}
    for lab in labels:
        x, y, al = coords[lab]
        us, vs = np.nonzero(stacks[(x, y)][al])
        rels[lab] = ConcreteRelation(frozenset(((x, int(u)), (y, int(v))) for u, v in zip(us, vs)))
    return structure, ConcreteRepresentation(carrier(f), rels, coords)


def verify_complete_representation(a: AtomStructure, r: ConcreteRepresentation) -> ConditionReport:
    """Check that atom -> relation is a complete representation of ``a``.

    (partition) atom relations are disjoint and tile the rectangles U_x x U_y
    they occupy; (converse) reversal matches the converse map; (composition)
    the relational composite of two atoms is exactly the union of the atoms
    the table lists; (identity) the identity atoms tile the diagonal.
    """
    rep = ConditionReport("REPRESENTATION")
    if set(r.atom_map) != set(a.atoms):
        rep.add("labels", (), "atom labels of structure and representation differ")
        return rep
    points = {p: i for i, p in enumerate(r.carrier)}
    for lab, rel in r.atom_map.items():
        for p, q in rel.pairs:
            if p not in points or q not in points:
                rep.add("partition", (lab,), f"pair ({p}, {q}) leaves the carrier")
                return rep

    # identity atoms: disjoint pieces of the diagonal, together all of it
    side: dict[int, list] = {}
    owner: dict = {}
    diag = set()
    for e in bits(a.ident):
        rel = r.atom_map[a.atoms[e]]
        if any(p != q for p, q in rel.pairs):
            rep.add("identity", (a.atoms[e],), "identity atom is not below the diagonal")
        dom = sorted({p for p, _ in rel.pairs}, key=points.__getitem__)
        side[e] = dom
        for p in dom:
            owner[p] = e
        diag |= rel.pairs
    if diag != {(p, p) for p in r.carrier}:
        rep.add("identity", (), "identity atoms do not cover the diagonal")
    if not rep.ok:
        return rep

    # every atom relation inside one rectangle, no pair claimed twice
    rect_of: dict[int, tuple[int, int]] = {}
    claimed: dict = {}
    for i, lab in enumerate(a.atoms):
        rel = r.atom_map[lab]
        if not rel.pairs:
            rep.add("partition", (lab,), "empty relation for an atom")
            continue
        xs = {owner[p] for p, _ in rel.pairs}
        ys = {owner[q] for _, q in rel.pairs}
        if len(xs) != 1 or len(ys) != 1:
            rep.add("partition", (lab,), "relation spans several rectangles")
            continue
        rect_of[i] = (xs.pop(), ys.pop())
        for pq in rel.pairs:
            if pq in claimed:
                rep.add("partition", (lab, a.atoms[claimed[pq]]), f"pair {pq} in two atoms")
            claimed[pq] = i
    occupied: dict[tuple[int, int], list[int]] = {}
    for i, xy in rect_of.items():
        occupied.setdefault(xy, []).append(i)
    for (x, y), members in occupied.items():
        size = sum(len(r.atom_map[a.atoms[i]]) for i in members)
        if size != len(side[x]) * len(side[y]):
            rep.add("partition", (a.atoms[x], a.atoms[y]), "atoms do not tile the rectangle")
    if not rep.ok:
        return rep

    for i, lab in enumerate(a.atoms):
        if r.atom_map[lab].converse() != r.atom_map[a.atoms[a.conv[i]]]:
            rep.add("converse", (lab, a.atoms[a.conv[i]]), "reversed relation differs")

    local = {e: {p: k for k, p in enumerate(dom)} for e, dom in side.items()}

    def matrix(i):
        x, y = rect_of[i]
        mat = np.zeros((len(side[x]), len(side[y])), dtype=bool)
        for p, q in r.atom_map[a.atoms[i]].pairs:
            mat[local[x][p], local[y][q]] = True
        return mat

    mats = {i: matrix(i) for i in rect_of}
    discrepant = 0
    for (x, y), left in occupied.items():
        for (y2, z), right in occupied.items():
            if y2 != y:
                for i in left:
                    for j in right:
                        if a.table[i][j]:
                            rep.add("composition", (a.atoms[i], a.atoms[j]), "table composes disjoint rectangles")
                continue
            targets = occupied.get((x, z), [])
            if not targets:
                rep.add("composition", (a.atoms[x], a.atoms[y], a.atoms[z]), "composite lands in an empty rectangle")
                continue
            counts, totals = _compose_blocks(
                np.stack([mats[i] for i in left]),
                np.stack([mats[j] for j in right]),
                np.stack([mats[k] for k in targets]),
            )
            sizes = np.array([len(r.atom_map[a.atoms[k]]) for k in targets])
            listed = np.array(
                [[[a.table[i][j] >> k & 1 for k in targets] for j in right] for i in left], dtype=bool
            )
            # pairs of listed atoms the composite misses, plus pairs it has outside them
            inside = (counts * listed).sum(axis=2)
            discrepant += int(((sizes - counts) * listed).sum() + (totals - inside).sum())
            bad = ((counts > 0) != listed).any(axis=2) | (totals != (listed * sizes).sum(axis=2))
            for p, q in zip(*np.nonzero(bad)):
                rep.add("composition", (a.atoms[left[p]], a.atoms[right[q]]), "composite differs from listed union")
    if discrepant:
        rep.add("composition", (), f"{discrepant} discrepant pairs in total")
    return rep
