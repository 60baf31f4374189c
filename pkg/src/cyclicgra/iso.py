"""Isomorphism search between finite atom structures.

Atoms are first split by joint colour refinement (identity flag, converse
class, and the multiset of colour pairs over composition triples), then a
backtracking search assigns atoms class by class.  Assigning an atom forces
its converse, and any composite of two assigned atoms that is itself a single
atom forces that image too.
"""

from __future__ import annotations

from collections import Counter

from .atoms import AtomStructure, bits, popcount


def _initial(a: AtomStructure) -> list:
    out = []
    for i in range(a.n):
        out.append(
            (
                a.ident >> i & 1,
                a.conv[i] == i,
                len(a.rows[i]),
                sum(popcount(m) for _, m in a.rows[i]),
                popcount(a.table[i][i]),
            )
        )
    return out


def _refine(structs: list[AtomStructure]) -> list[list[int]]:
    """Joint colour refinement; equal colours across structures are comparable."""
    colours = [_initial(a) for a in structs]
    n_classes = -1
    for _ in range(max(a.n for a in structs) + 1):
        palette: dict = {}
        new = []
        for a, col in zip(structs, colours):
            sig = [[] for _ in range(a.n)]
            for i, j, k in a.triples:
                sig[i].append((0, col[j], col[k]))
                sig[j].append((1, col[i], col[k]))
                sig[k].append((2, col[i], col[j]))
            row = []
            for i in range(a.n):
                key = (col[i], col[a.conv[i]], tuple(sorted(Counter(sig[i]).items())))
                row.append(palette.setdefault(key, len(palette)))
            new.append(row)
        colours = new
        if len(palette) == n_classes:
            break
        n_classes = len(palette)
    return colours


def is_isomorphism(a: AtomStructure, b: AtomStructure, mapping: dict) -> bool:
    """``mapping`` (label -> label) is a bijection preserving identity atoms,
    converse and the composition relation."""
    if a.n != b.n or len(a.triples) != len(b.triples) or set(mapping) != set(a.atoms):
        return False
    try:
        f = [b.pos[mapping[x]] for x in a.atoms]
    except KeyError:
        return False
    if len(set(f)) != a.n:
        return False
    for i in range(a.n):
        if (a.ident >> i & 1) != (b.ident >> f[i] & 1) or f[a.conv[i]] != b.conv[f[i]]:
            return False
    return all((f[i], f[j], f[k]) in b.triples for i, j, k in a.triples)


def iso_search(a: AtomStructure, b: AtomStructure, hint: dict | None = None) -> dict | None:
    """An isomorphism a -> b as a label mapping, or None if there is none.

    A ``hint`` that is already an isomorphism is returned as is.
    """
    if hint is not None and is_isomorphism(a, b, hint):
        return dict(hint)
    if a.n != b.n or len(a.triples) != len(b.triples) or popcount(a.ident) != popcount(b.ident):
        return None
    ca, cb = _refine([a, b])
    if Counter(ca) != Counter(cb):
        return None
    by_colour: dict[int, list[int]] = {}
    for j, c in enumerate(cb):
        by_colour.setdefault(c, []).append(j)

    n = a.n
    fwd = [-1] * n
    back = [-1] * n
    # atoms of a in search order: small colour classes first, identity atoms early
    order = sorted(range(n), key=lambda i: (len(by_colour[ca[i]]), -(a.ident >> i & 1), i))

    def assign(i, j, trail) -> bool:
        stack = [(i, j)]
        while stack:
            i, j = stack.pop()
            if fwd[i] == j:
                continue
            if fwd[i] != -1 or back[j] != -1 or ca[i] != cb[j]:
                return False
            fwd[i], back[j] = j, i
            trail.append(i)
            stack.append((a.conv[i], b.conv[j]))
            # composites with every assigned atom
            for u in list(trail):
                v = fwd[u]
                for p, q, r, s in ((i, u, j, v), (u, i, v, j)):
                    left, right = a.table[p][q], b.table[r][s]
                    if popcount(left) != popcount(right):
                        return False
                    for k in bits(left):
                        if fwd[k] != -1 and not right >> fwd[k] & 1:
                            return False
                    for k in bits(right):
                        if back[k] != -1 and not left >> back[k] & 1:
                            return False
                    if left and left & (left - 1) == 0:
                        stack.append((left.bit_length() - 1, right.bit_length() - 1))
        return True

    def undo(trail, mark):
        while len(trail) > mark:
            i = trail.pop()
            back[fwd[i]] = -1
            fwd[i] = -1

    trail: list[int] = []

    def search(pos) -> bool:
        while pos < n and fwd[order[pos]] != -1:
            pos += 1
        if pos == n:
            return True
        i = order[pos]
        for j in by_colour[ca[i]]:
            if back[j] != -1:
                continue
            mark = len(trail)
            if assign(i, j, trail) and search(pos + 1):
                return True
            undo(trail, mark)
        return False

    if not search(0):
        return None
    mapping = {a.atoms[i]: b.atoms[fwd[i]] for i in range(n)}
    # the propagation checks are necessary conditions; confirm in full
    if not is_isomorphism(a, b, mapping):
        raise RuntimeError("isomorphism search produced a non-isomorphism")
    return mapping
