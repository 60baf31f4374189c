import pytest
from hypothesis import given, settings

from cyclicgra.atoms import AtomStructure, complex_algebra, cyclic_complex_algebra
from cyclicgra.cli import parse_index_system
from cyclicgra.frame import build_frame, check_index_conditions
from cyclicgra.gra import build_gra
from cyclicgra.iso import is_isomorphism
from cyclicgra.measure import analyze_measurability, stabilizers
from cyclicgra.scaffold import (
    LayerError,
    RepresentationError,
    Scaffold,
    build_prime_layer,
    build_scaffold,
    check_scaffold,
    extract_frame,
    represent,
    sim_k,
)

from conftest import DATA, gra_of, valid_system


def measured(atoms, order, index=None):
    a, _ = gra_of(atoms, order, index)
    return a, analyze_measurability(a)


@pytest.fixture(scope="module")
def fig1():
    s = parse_index_system((DATA / "fig1.idx").read_text())
    a, _ = build_gra(build_frame(s))
    return a, analyze_measurability(a)


def named(a, sim):
    return sorted(sorted(a.atoms[x].split(".")[0] for x in c) for c in sim.classes)


@pytest.mark.parametrize(
    "p, k, classes",
    [
        (2, 0, [["p", "u", "v", "w", "x", "y", "z"]]),
        (2, 1, [["p", "u", "x", "y"], ["v", "w", "z"]]),
        (3, 1, [["p", "u", "v"], ["w"], ["x", "z"], ["y"]]),
        (2, 2, [[x] for x in "puvwxyz"]),
    ],
)
def test_sim_k_on_fig1(fig1, p, k, classes):
    a, m = fig1
    assert named(a, sim_k(m, p, k)) == classes


def test_sim_k_arguments():
    _, m = measured("xy", 4, {("x", "y"): 2})
    with pytest.raises(ValueError):
        sim_k(m, 4, 1)
    with pytest.raises(ValueError):
        sim_k(m, 2, -1)
    s = sim_k(m, 2, 1)
    x, y = m.subidentity
    assert s.related(x, y) and s.representative(y) == x


def test_layer_descends_by_p():
    a, m = measured("xy", 4, {("x", "y"): 4})
    layer = build_prime_layer(a, m, 2)
    x, y = m.subidentity
    assert layer.max_level == 2
    got = [stabilizers(a, m, layer.elements[(k, x, y)]).index for k in range(3)]
    assert got == [1, 2, 4]
    for k in (1, 2):
        assert a.le(layer.elements[(k, x, y)], layer.elements[(k - 1, x, y)])
        assert layer.elements[(k, y, x)] == a.converse(layer.elements[(k, x, y)])
    assert layer.elements[(0, x, y)] == a.rectangle(x, y)


def test_layer_level_classes_split():
    a, m = measured("xyz", 4, {("x", "y"): 4, ("x", "z"): 2, ("y", "z"): 2})
    layer = build_prime_layer(a, m, 2)
    assert [len(r.classes) for r in layer.relations] == [1, 1, 2]
    with pytest.raises(ValueError):
        build_prime_layer(a, m, 6)


@pytest.mark.parametrize(
    "atoms, order, index",
    [
        ("xyz", 1, {("x", "y"): 1, ("x", "z"): 1, ("y", "z"): 1}),
        ("xy", 12, {("x", "y"): 12}),
        ("x", 5, {}),
        ("xyz", 12, {("x", "y"): 6, ("x", "z"): 3, ("y", "z"): 3}),
        ("xyz", {"x": 4, "y": 6, "z": 10}, {("x", "y"): 2, ("x", "z"): 2, ("y", "z"): 2}),
    ],
)
def test_scaffold_atoms_have_the_indices(atoms, order, index):
    a, m = measured(atoms, order, index)
    s = build_scaffold(a, m)
    assert check_scaffold(a, s, m).ok
    for (x, y), e in s.elements.items():
        assert a.is_atom(e)
        assert stabilizers(a, m, e).index == m.indices[(x, y)]


def _shifted(a, s, x, y):
    """a_xy replaced by the other atom of its rectangle (index 2)."""
    e = s.elements[(x, y)]
    other = a.rectangle(x, y) & ~e
    return other, a.converse(other)


def test_scaffold_mutant_breaks_converse_clause():
    a, m = measured("xy", 2, {("x", "y"): 2})
    s = build_scaffold(a, m)
    x, y = m.subidentity
    other, _ = _shifted(a, s, x, y)
    bad = Scaffold({**s.elements, (x, y): other})
    rep = check_scaffold(a, bad, m)
    # a one-sided edit also leaves a_xx outside a_xy;a_yx
    assert rep.clauses == {"(ii)", "(iii)"}


def test_scaffold_mutant_breaks_product_clause():
    a, m = measured("xyz", 2, {("x", "y"): 2, ("x", "z"): 2, ("y", "z"): 2})
    s = build_scaffold(a, m)
    x, y, _ = m.subidentity
    other, back = _shifted(a, s, x, y)
    bad = Scaffold({**s.elements, (x, y): other, (y, x): back})
    assert "(iii)" in check_scaffold(a, bad, m).clauses
    assert "(ii)" not in check_scaffold(a, bad, m).clauses


def test_scaffold_identity_and_atom_clauses():
    a, m = measured("xy", 2, {("x", "y"): 2})
    s = build_scaffold(a, m)
    x, y = m.subidentity
    assert check_scaffold(a, Scaffold({**s.elements, (x, x): a.rectangle(x, x)}), m).clauses >= {"(i)", "atom"}


def test_extract_frame_recovers_indices():
    a, m = measured("xyz", {"x": 6, "y": 12, "z": 4}, {("x", "y"): 6, ("x", "z"): 2, ("y", "z"): 2})
    f = extract_frame(a, m, build_scaffold(a, m))
    assert f.orders == {"x.x.0": 6, "y.y.0": 12, "z.z.0": 4}
    assert {k: iso.source.generator for k, iso in f.isos.items()}[("x.x.0", "y.y.0")] == 6


@pytest.mark.parametrize("n", range(1, 13))
def test_cyclic_group_gets_cayley_representation(n):
    a = cyclic_complex_algebra(n)
    r = represent(a)
    assert r.system.index[("0", "0")] == n
    for k in range(n):
        want = {(("0", u), ("0", (u + k) % n)) for u in range(n)}
        assert set(r.representation.atom_map[str(k)].pairs) == want
    assert r.report.ok


@settings(max_examples=25)
@given(valid_system(max_atoms=3, max_order=8))
def test_represent_round_trip(s):
    if not check_index_conditions(s).ok:
        return
    a, _ = build_gra(build_frame(s))
    r = represent(a)
    assert {(x.split(".")[0], y.split(".")[0]): v for (x, y), v in r.system.index.items()} == dict(s.index)
    assert is_isomorphism(a, r.gra, r.bijection)
    assert r.report.ok


def test_represent_is_deterministic():
    a, _ = gra_of("xy", 6, {("x", "y"): 3})
    assert represent(a).lines() == represent(a).lines()


def test_represent_refuses_non_cyclic_groups():
    els = [(0, 0), (0, 1), (1, 0), (1, 1)]
    v4 = complex_algebra(els, lambda p, q: ((p[0] + q[0]) % 2, (p[1] + q[1]) % 2), (0, 0), lambda p: p)
    with pytest.raises(RepresentationError, match="not cyclic"):
        represent(v4)


def test_represent_refuses_non_measurable():
    a = AtomStructure(["e", "d"], ["e"], {"e": "e", "d": "d"},
                      [("e", "e", "e"), ("e", "d", "d"), ("d", "e", "d"), ("d", "d", "e"), ("d", "d", "d")])
    with pytest.raises(RepresentationError, match="not measurable") as exc:
        represent(a)
    assert exc.value.analysis is not None


def test_layer_error_carries_clause():
    err = LayerError("(iii)", ("x", "y", 1), "index 2 != 4")
    assert err.clause == "(iii)" and "index 2 != 4" in str(err)
