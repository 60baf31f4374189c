from math import gcd

import pytest
from hypothesis import given

from cyclicgra.atoms import AtomStructure, bits, complex_algebra, cyclic_complex_algebra, full_relation_algebra
from cyclicgra.frame import build_frame, check_index_conditions
from cyclicgra.gra import build_gra
from cyclicgra.measure import (
    LawlessError,
    all_atoms_regular,
    analyze_measurability,
    index_arithmetic_check,
    rectangle_of,
    regular_elements,
    stabilizers,
    translation_map,
)

import oracles
from conftest import gra_of, valid_system


def klein():
    els = ["e", "a", "b", "c"]
    mul = {("a", "b"): "c", ("b", "a"): "c", ("a", "c"): "b", ("c", "a"): "b", ("b", "c"): "a", ("c", "b"): "a"}

    def op(p, q):
        if p == "e":
            return q
        if q == "e":
            return p
        return "e" if p == q else mul[(p, q)]

    return complex_algebra(els, op, "e", lambda p: p)


def test_z3_measurable_with_cayley_table():
    a = cyclic_complex_algebra(3)
    m = analyze_measurability(a)
    assert m.measurable and m.cyclic and m.subidentity == (0,)
    g = m.groups[0]
    assert g.order == 3
    for i in range(3):
        for j in range(3):
            assert g.table[(i, j)] == (i + j) % 3
    assert m.lines()[:3] == ["MEASURABLE yes", "EQUIVALENCE yes", "GROUP 0 order=3 cyclic=yes generator=1"]


def test_gra_groups_have_frame_orders():
    a, _ = gra_of("xyz", {"x": 4, "y": 6, "z": 2}, {("x", "y"): 2, ("x", "z"): 2, ("y", "z"): 2})
    m = analyze_measurability(a)
    assert m.measurable and m.equivalence
    assert {a.atoms[x]: g.order for x, g in m.groups.items()} == {"x.x.0": 4, "y.y.0": 6, "z.z.0": 2}
    assert {(a.atoms[x], a.atoms[y]): v for (x, y), v in m.indices.items()}[("x.x.0", "y.y.0")] == 2


def test_full_relations_on_two_points():
    a = full_relation_algebra([["p", "q"]])
    m = analyze_measurability(a)
    assert m.measurable and all(g.order == 1 for g in m.groups.values())
    assert set(m.pairs) == {(x, y) for x in m.subidentity for y in m.subidentity}


def test_non_functional_square_is_not_measurable():
    a = AtomStructure(["e", "d"], ["e"], {"e": "e", "d": "d"},
                      [("e", "e", "e"), ("e", "d", "d"), ("d", "e", "d"), ("d", "d", "e"), ("d", "d", "d")])
    m = analyze_measurability(a)
    assert not m.measurable
    assert "functional" in m.reasons[0]
    assert m.lines()[2].startswith("GROUP e refused")


def test_klein_group_is_measurable_but_not_cyclic():
    m = analyze_measurability(klein())
    assert m.measurable and not m.cyclic
    assert m.groups[0].order == 4


def test_lawless_input_refused():
    a = AtomStructure(["e", "f"], ["e"], {"e": "e", "f": "f"}, [("e", "e", "e")])
    with pytest.raises(LawlessError) as exc:
        analyze_measurability(a)
    assert not exc.value.report.ok


def test_generator_and_powers():
    m = analyze_measurability(cyclic_complex_algebra(6))
    g = m.groups[0]
    assert g.cyclic and g.residue[g.generator] == 1
    assert [g.power(r) for r in range(6)] == list(g.elements)
    assert sorted(g.subgroup(3)) == sorted([g.power(0), g.power(3)])


# stabilizers


def _measured(atoms, order, index):
    a, r = gra_of(atoms, order, index)
    return a, r, analyze_measurability(a)


def test_atom_index_is_m():
    a, _, m = _measured("xy", 6, {("x", "y"): 3})
    info = stabilizers(a, m, a.atom("x.y.1"))
    assert info.regular and info.index == 3
    assert len(info.left) == 2 and len(info.right) == 2


def test_subidentity_stabilizer():
    a, _, m = _measured("xy", 6, {("x", "y"): 3})
    x = a.pos["x.x.0"]
    info = stabilizers(a, m, 1 << x)
    assert info.left == info.right == frozenset({x}) and info.index == 6


def test_rectangle_stabilizer_is_whole_group():
    a, _, m = _measured("xy", 6, {("x", "y"): 3})
    x, y = a.pos["x.x.0"], a.pos["y.y.0"]
    info = stabilizers(a, m, a.rectangle(x, y))
    assert info.left == frozenset(m.groups[x].elements) and info.index == 1 and info.regular


def test_element_across_rectangles_rejected():
    a, _, m = _measured("xy", 2, {("x", "y"): 1})
    with pytest.raises(ValueError):
        stabilizers(a, m, a.element(["x.y.0", "y.x.0"]))
    with pytest.raises(ValueError):
        rectangle_of(a, m, 0)


def _concrete_index(a, r, m, e, x):
    """Left stabilizer computed on the concrete relations."""
    rel = set().union(*(r.atom_map[a.atoms[i]].pairs for i in bits(e)))
    stab = [f for f in m.groups[x].elements if oracles.compose_rel(r.atom_map[a.atoms[f]].pairs, rel) == rel]
    return m.groups[x].order // len(stab)


@given(valid_system(max_atoms=3, max_order=6))
def test_atom_index_matches_concrete_oracle(s):
    if not check_index_conditions(s).ok:
        return
    a, r = build_gra(build_frame(s))
    m = analyze_measurability(a)
    for i, lab in enumerate(a.atoms):
        x, y, _ = r.coords[lab]
        px = a.pos[f"{x}.{x}.0"]
        info = stabilizers(a, m, 1 << i)
        assert info.regular
        assert info.index == s.index[(x, y)] == _concrete_index(a, r, m, 1 << i, px)


def test_translation_map_graph():
    a, _, m = _measured("xy", 6, {("x", "y"): 3})
    info = stabilizers(a, m, a.atom("x.y.0"))
    graph = translation_map(a, m, info)
    assert len(graph) == 3
    assert all(len(h) == 2 and len(k) == 2 for h, k in graph)
    # the cosets on each side partition the group
    assert set().union(*(h for h, _ in graph)) == set(m.groups[info.x].elements)


# regular elements and index arithmetic


@pytest.mark.parametrize(
    "atoms, order, index",
    [("x", 6, {}), ("xy", 4, {("x", "y"): 2}), ("xy", {"x": 2, "y": 6}, {("x", "y"): 2}), ("x", 8, {})],
)
def test_sum_l_d_finds_every_regular_element(atoms, order, index):
    a, _, m = _measured(atoms, order, index)
    for x, y in m.ordered_pairs():
        fast = {i.element for i in regular_elements(a, m, x, y)}
        slow = {i.element for i in regular_elements(a, m, x, y, exhaustive=True)}
        assert fast == slow


def test_coprime_meet_example():
    a, _, m = _measured("x", 6, {})
    x = m.subidentity[0]
    regs = {i.index: i for i in regular_elements(a, m, x, x)}
    assert sorted(regs) == [1, 2, 3, 6]
    meet = regs[3].element & regs[2].element
    info = stabilizers(a, m, meet)
    assert info.regular and info.index == 6 and a.is_atom(meet)


def test_product_with_converse_keeps_index():
    a, _, m = _measured("xy", 12, {("x", "y"): 4})
    for info in regular_elements(a, m, m.subidentity[0], m.subidentity[1]):
        prod = stabilizers(a, m, a.compose(info.element, a.converse(info.element)))
        assert prod.regular and prod.index == info.index


def test_index_one_absorbs():
    a, _, m = _measured("xy", 6, {("x", "y"): 3})
    x, y = m.subidentity
    rect = a.rectangle(x, y)
    for info in regular_elements(a, m, y, y):
        assert stabilizers(a, m, a.compose(rect, info.element)).index == gcd(1, info.index) == 1


@pytest.mark.parametrize(
    "atoms, order, index",
    [
        ("x", 12, {}),
        ("xy", 6, {("x", "y"): 3}),
        ("xyz", 12, {("x", "y"): 6, ("x", "z"): 3, ("y", "z"): 3}),
        ("xyz", {"x": 6, "y": 10, "z": 12}, {("x", "y"): 2, ("x", "z"): 6, ("y", "z"): 2}),
    ],
)
def test_index_arithmetic_and_atom_regularity(atoms, order, index):
    a, _, m = _measured(atoms, order, index)
    assert index_arithmetic_check(a, m).ok
    assert all_atoms_regular(a, m).ok


def test_index_arithmetic_on_z30():
    # three pairwise coprime indices 2, 3, 5
    a = cyclic_complex_algebra(30)
    m = analyze_measurability(a)
    rep = index_arithmetic_check(a, m)
    assert rep.ok, rep.lines()
