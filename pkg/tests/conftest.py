from math import gcd
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings, strategies as st

from cyclicgra.cyclic import divisors
from cyclicgra.frame import IndexSystem, build_frame
from cyclicgra.gra import build_gra

settings.register_profile(
    "default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

ROOT = Path(__file__).resolve().parent.parent
DATA = ROOT / "data"
GOLDEN = Path(__file__).resolve().parent / "golden"


def system(atoms, order, index=None, blocks=None):
    """Shorthand: ``order`` may be an int for equal orders."""
    if isinstance(order, int):
        order = {x: order for x in atoms}
    return IndexSystem.from_matrix(tuple(atoms), order, index or {}, blocks)


def gra_of(atoms, order, index=None, blocks=None):
    return build_gra(build_frame(system(atoms, order, index, blocks)))


@pytest.fixture
def data_dir():
    return DATA


@st.composite
def valid_system(draw, max_atoms=4, max_order=12):
    k = draw(st.integers(1, max_atoms))
    atoms = "xyzw"[:k]
    order = {x: draw(st.integers(1, max_order)) for x in atoms}
    # entries obey (i)-(iii); (iv) may fail
    index = {}
    for i, x in enumerate(atoms):
        for y in atoms[i + 1:]:
            index[(x, y)] = draw(st.sampled_from(divisors(gcd(order[x], order[y]))))
    return system(atoms, order, index)
