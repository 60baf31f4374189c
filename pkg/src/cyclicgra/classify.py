"""Pairs, pair-density, the one-element-group case and n-density."""

from __future__ import annotations

from dataclasses import dataclass, field

from .atoms import AtomStructure, bits
from .measure import MeasurabilityAnalysis


class ClassificationError(RuntimeError):
    """The two pair-density computations disagree."""


def is_pair(a: AtomStructure, x: int) -> bool:
    """x;0';x;0';x <= 1' for the subidentity atom at position x."""
    if not (a.ident >> x & 1):
        raise ValueError(f"{a.atoms[x]!r} is not a subidentity atom")
    e = 1 << x
    div = a.diversity
    t = a.compose(a.compose(a.compose(a.compose(e, div), e), div), e)
    return a.le(t, a.ident)


@dataclass
class ClassificationReport:
    pair_dense: bool
    # subidentity atoms that are not pairs
    witnesses: list = field(default_factory=list)
    jt_case: bool = False
    n_density: int | None = None
    representable: str = "unknown"

    def line(self) -> str:
        yn = {True: "yes", False: "no"}
        n = "n/a" if self.n_density is None else str(self.n_density)
        return (
            f"CLASSIFY pair_dense={yn[self.pair_dense]} jt={yn[self.jt_case]} "
            f"n_dense={n} representable={self.representable}"
        )

    def lines(self) -> list[str]:
        out = [self.line()]
        out += [f"NOT-A-PAIR {w}" for w in self.witnesses]
        return out


def classify(a: AtomStructure, m: MeasurabilityAnalysis) -> ClassificationReport:
    direct = [x for x in bits(a.ident) if not is_pair(a, x)]
    dense_direct = not direct
    # group route: every subidentity atom measurable with a group of order <= 2
    dense_groups = all(x in m.groups and m.groups[x].order <= 2 for x in m.subidentity)
    if dense_direct != dense_groups:
        raise ClassificationError(
            f"pair test says {dense_direct}, group orders say {dense_groups}"
        )
    top, ident = a.top, a.ident
    jt = all(
        a.le(a.compose(a.compose(a.converse(1 << i), top), 1 << i), ident) for i in range(a.n)
    )
    n_density = max(g.order for g in m.groups.values()) if m.measurable else None
    return ClassificationReport(
        dense_direct,
        [a.atoms[x] for x in direct],
        jt,
        n_density,
        "yes" if m.cyclic else "unknown",
    )
