from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class Violation:
    clause: str
    witness: tuple
    detail: str = ""

    def line(self) -> str:
        wit = " ".join(str(w) for w in self.witness)
        text = f"VIOLATION {self.clause} {wit}".rstrip()
        return f"{text} : {self.detail}" if self.detail else text


@dataclass
class ConditionReport:
    """Outcome of a condition check; empty ``violations`` means pass."""

    name: str
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    @property
    def clauses(self) -> set[str]:
        return {v.clause for v in self.violations}

    def add(self, clause: str, witness: tuple = (), detail: str = "") -> None:
        self.violations.append(Violation(clause, tuple(witness), detail))

    def extend(self, other: "ConditionReport") -> None:
        self.violations.extend(other.violations)

    def lines(self) -> list[str]:
        out = [v.line() for v in self.violations]
        verdict = "PASS" if self.ok else f"FAIL violations={len(self.violations)}"
        out.append(f"{self.name} {verdict}")
        return out

    def __str__(self) -> str:
        return "\n".join(self.lines())
