"""Plain-text file formats and the ``cyclicgra`` command line.

Index-system files::

    # comments run to end of line
    atoms: x y z
    block: x y          one equivalence class per line (default: all atoms)
    block: z
    order x 6
    index x y 3         symmetric; ``index x x`` defaults to the order

Atom-structure files::

    atom e              declare labels before use
    identity e
    converse a b        symmetric, so one line per pair
    compose a b c       c <= a;b

``REL`` lines written by ``build --relations`` are ignored when parsing.
Exit status: 0 on success, 1 on reported violations, 2 on parse or usage errors.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .atoms import AtomStructure
from .classify import classify
from .frame import IndexSystem, build_frame, check_index_conditions
from .gra import build_gra
from .laws import check_laws
from .measure import analyze_measurability
from .scaffold import RepresentationError, build_scaffold, check_scaffold, represent


class ParseError(ValueError):
    def __init__(self, lineno: int, reason: str):
        super().__init__(f"line {lineno}: {reason}")
        self.lineno = lineno
        self.reason = reason


def _lines(doc: str):
    for no, raw in enumerate(doc.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield no, line


def _positive(tok: str, no: int) -> int:
    try:
        v = int(tok)
    except ValueError:
        raise ParseError(no, f"{tok!r} is not an integer") from None
    if v < 1:
        raise ParseError(no, f"{v} is not a positive integer")
    return v


def parse_index_system(doc: str) -> IndexSystem:
    atoms: list[str] = []
    blocks: list[list[str]] = []
    order: dict[str, int] = {}
    index: dict[tuple[str, str], tuple[int, int]] = {}
    first_line = 0

    def known(label, no):
        if label not in atoms:
            raise ParseError(no, f"unknown label {label!r}")

    for no, line in _lines(doc):
        if line.startswith("atoms:"):
            if atoms:
                raise ParseError(no, "atoms declared twice")
            for x in line[len("atoms:"):].split():
                if x in atoms:
                    raise ParseError(no, f"duplicate atom {x!r}")
                atoms.append(x)
            first_line = no
            continue
        if line.startswith("block:"):
            blk = line[len("block:"):].split()
            for x in blk:
                known(x, no)
                if any(x in b for b in blocks) or blk.count(x) > 1:
                    raise ParseError(no, f"atom {x!r} in two blocks")
            blocks.append(blk)
            continue
        tok = line.split()
        if tok[0] == "order" and len(tok) == 3:
            known(tok[1], no)
            if tok[1] in order:
                raise ParseError(no, f"order of {tok[1]!r} given twice")
            order[tok[1]] = _positive(tok[2], no)
        elif tok[0] == "index" and len(tok) == 4:
            x, y = tok[1], tok[2]
            known(x, no)
            known(y, no)
            v = _positive(tok[3], no)
            for key in ((x, y), (y, x)):
                if key in index and index[key][0] != v:
                    raise ParseError(
                        no, f"conflicting entries for {x} {y}: {index[key][0]} (line {index[key][1]}) and {v}"
                    )
                index[key] = (v, no)
        else:
            raise ParseError(no, f"cannot read {line!r}")

    if not atoms:
        raise ParseError(first_line or 1, "no 'atoms:' line")
    if not blocks:
        blocks = [list(atoms)]
    missing = [x for x in atoms if not any(x in b for b in blocks)]
    if missing:
        raise ParseError(first_line, f"atoms {missing} are in no block")
    for x in atoms:
        if x not in order:
            raise ParseError(first_line, f"missing order for {x!r}")
    block_of = {x: i for i, b in enumerate(blocks) for x in b}
    for (x, y), (v, no) in index.items():
        if block_of[x] != block_of[y]:
            raise ParseError(no, f"index {x} {y} lies outside a block")
    full = {}
    for b in blocks:
        for x in b:
            for y in b:
                if (x, y) in index:
                    full[(x, y)] = index[(x, y)][0]
                elif x == y:
                    full[(x, y)] = order[x]
                else:
                    raise ParseError(first_line, f"missing index for pair {x} {y}")
    return IndexSystem(tuple(atoms), tuple(tuple(b) for b in blocks), order, full)


def parse_atom_structure(doc: str) -> AtomStructure:
    atoms: list[str] = []
    seen: dict[str, int] = {}
    identity: list[str] = []
    conv: dict[str, tuple[str, int]] = {}
    triples: dict[tuple[str, str, str], int] = {}

    def known(label, no):
        if label not in seen:
            raise ParseError(no, f"unknown label {label!r}")

    last = 0
    for no, line in _lines(doc):
        last = no
        tok = line.split()
        head = tok[0]
        if head == "REL":
            continue
        if head == "atom" and len(tok) == 2:
            if tok[1] in seen:
                raise ParseError(no, f"duplicate atom {tok[1]!r}")
            seen[tok[1]] = no
            atoms.append(tok[1])
        elif head == "identity" and len(tok) >= 2:
            for x in tok[1:]:
                known(x, no)
                if x not in identity:
                    identity.append(x)
        elif head == "converse" and len(tok) == 3:
            x, y = tok[1], tok[2]
            known(x, no)
            known(y, no)
            for p, q in ((x, y), (y, x)):
                if p in conv and conv[p][0] != q:
                    raise ParseError(
                        no, f"converse of {p} given as {conv[p][0]} (line {conv[p][1]}) and {q}: not an involution"
                    )
                conv[p] = (q, no)
        elif head == "compose" and len(tok) == 4:
            for x in tok[1:]:
                known(x, no)
            triples.setdefault((tok[1], tok[2], tok[3]), no)
        else:
            raise ParseError(no, f"cannot read {line!r}")

    if not atoms:
        raise ParseError(last or 1, "no atoms declared")
    for x in atoms:
        if x not in conv:
            raise ParseError(seen[x], f"converse of {x!r} undefined")
    c = {x: v[0] for x, v in conv.items()}
    for (x, y, z), no in triples.items():
        for comp in ((c[x], z, y), (z, c[y], x)):
            if comp not in triples:
                raise ParseError(
                    no, f"cycle-law companion 'compose {' '.join(comp)}' of 'compose {x} {y} {z}' is missing"
                )
    return AtomStructure(atoms, identity, c, triples)


def dump_atom_structure(a: AtomStructure) -> str:
    out = [f"atom {x}" for x in a.atoms]
    out.append("identity " + " ".join(str(a.atoms[i]) for i in sorted(a.identity_atoms())))
    for i, x in enumerate(a.atoms):
        j = a.conv[i]
        if i <= j:
            out.append(f"converse {x} {a.atoms[j]}")
    for t in sorted(tuple(map(str, t)) for t in a.labelled_triples()):
        out.append("compose " + " ".join(t))
    return "\n".join(out) + "\n"


def dump_index_system(s: IndexSystem) -> str:
    out = ["atoms: " + " ".join(s.atoms)]
    out += ["block: " + " ".join(b) for b in s.blocks]
    out += [f"order {x} {s.order[x]}" for x in s.atoms]
    pos = {x: i for i, x in enumerate(s.atoms)}
    out += [f"index {x} {y} {s.index[(x, y)]}" for x, y in s.pairs() if pos[x] < pos[y]]
    return "\n".join(out) + "\n"


def diagram(s: IndexSystem) -> str:
    """Lower-triangular table of the indices; '.' marks unrelated pairs."""
    cells = {(x, y): str(s.index[(x, y)]) if (x, y) in s.index else "." for x in s.atoms for y in s.atoms}
    w = max(len(v) for v in [*cells.values(), *s.atoms])
    lw = max(len(x) for x in s.atoms)
    rows = [" " * lw + " " + " ".join(y.rjust(w) for y in s.atoms)]
    for i, x in enumerate(s.atoms):
        row = " ".join(cells[(x, y)].rjust(w) for y in s.atoms[: i + 1])
        rows.append(x.ljust(lw) + " " + row)
    return "\n".join(r.rstrip() for r in rows) + "\n"


def _is_index_file(doc: str) -> bool:
    return any(line.startswith("atoms:") for _, line in _lines(doc))


def load_structure(doc: str) -> AtomStructure:
    """An atom-structure file, or an index-system file (its group relation algebra)."""
    if _is_index_file(doc):
        s = parse_index_system(doc)
        rep = check_index_conditions(s)
        if not rep.ok:
            raise _Reported(rep.lines())
        return build_gra(build_frame(s))[0]
    return parse_atom_structure(doc)


class _Reported(Exception):
    """Carries report lines for a failing pipeline step (exit 1)."""

    def __init__(self, lines):
        super().__init__("\n".join(lines))
        self.lines = lines


def _analysis(a: AtomStructure):
    rep = check_laws(a)
    if not rep.ok:
        raise _Reported(rep.lines())
    return analyze_measurability(a)


def _cmd_check_indices(args, out):
    s = parse_index_system(args.text)
    rep = check_index_conditions(s)
    out(rep.lines())
    return 0 if rep.ok else 1


def _cmd_build(args, out):
    s = parse_index_system(args.text)
    rep = check_index_conditions(s)
    if not rep.ok:
        out(rep.lines())
        return 1
    a, r = build_gra(build_frame(s))
    text = dump_atom_structure(a)
    if args.relations:
        text += "\n".join(r.rel_lines()) + "\n"
    if args.out:
        Path(args.out).write_text(text)
        out([f"BUILD atoms={a.n} written={args.out}"])
    else:
        sys.stdout.write(text)
    return 0


def _cmd_laws(args, out):
    rep = check_laws(load_structure(args.text))
    out(rep.lines())
    return 0 if rep.ok else 1


def _cmd_analyze(args, out):
    m = _analysis(load_structure(args.text))
    out(m.lines())
    for x, why in sorted(m.reasons.items()):
        out([f"REASON {m.label(x)} : {why}"])
    return 0 if m.measurable else 1


def _cmd_scaffold(args, out):
    a = load_structure(args.text)
    m = _analysis(a)
    try:
        s = build_scaffold(a, m)
    except RepresentationError as exc:
        out(m.lines() + [f"SCAFFOLD refused : {exc}"])
        return 1
    rep = check_scaffold(a, s, m)
    out(s.lines(a, m) + rep.lines())
    return 0 if rep.ok else 1


def _cmd_represent(args, out):
    a = load_structure(args.text)
    m = _analysis(a)
    try:
        r = represent(a, m)
    except RepresentationError as exc:
        out(m.lines() + [f"REPRESENT refused : {exc}"])
        return 1
    out(r.lines())
    return 0


def _cmd_classify(args, out):
    a = load_structure(args.text)
    out(classify(a, _analysis(a)).lines())
    return 0


def _cmd_diagram(args, out):
    sys.stdout.write(diagram(parse_index_system(args.text)))
    return 0


COMMANDS = {
    "check-indices": (_cmd_check_indices, "verify the index conditions of an index-system file"),
    "build": (_cmd_build, "build the group relation algebra and dump its atom structure"),
    "laws": (_cmd_laws, "check the relation-algebra laws"),
    "analyze": (_cmd_analyze, "measurability analysis"),
    "scaffold": (_cmd_scaffold, "construct and verify a scaffold"),
    "represent": (_cmd_represent, "represent as a group relation algebra"),
    "classify": (_cmd_classify, "pair-density, one-element groups, n-density"),
    "diagram": (_cmd_diagram, "triangular table of the index matrix"),
}


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cyclicgra", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", metavar="COMMAND")
    for name, (_, help_) in COMMANDS.items():
        c = sub.add_parser(name, help=help_)
        c.add_argument("file")
        if name == "build":
            c.add_argument("--relations", action="store_true", help="append REL lines")
            c.add_argument("--out", help="write to this path instead of stdout")
    return p


def run(argv: list[str] | None = None) -> int:
    p = _parser()
    # argparse exits with status 2 on usage errors, which is the contract
    try:
        args = p.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command is None:
        p.print_usage(sys.stderr)
        return 2

    def out(lines):
        for line in lines:
            print(line)

    try:
        args.text = Path(args.file).read_text()
    except OSError as exc:
        print(f"cyclicgra: cannot read {args.file}: {exc.strerror}", file=sys.stderr)
        return 2
    try:
        return COMMANDS[args.command][0](args, out)
    except ParseError as exc:
        print(f"cyclicgra: {args.file}: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        # structural errors raised while assembling a parsed document
        print(f"cyclicgra: {args.file}: {exc}", file=sys.stderr)
        return 2
    except _Reported as exc:
        out(exc.lines)
        return 1


def main() -> None:
    sys.exit(run())
