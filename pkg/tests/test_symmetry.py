import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gdfs import symmetry as sym

GROUPS = {
    "circle": sym.circle_group(),
    "interval": sym.interval_group(),
    "disk": sym.ball_group(2),
    "ball3": sym.ball_group(3),
    "ball4": sym.ball_group(4),
    "sphere2": sym.sphere_group(2),
    "sphere3": sym.sphere_group(3),
    "so3": sym.so3_group(),
    "cylinder": sym.product_group(sym.ball_group(2), sym.interval_group()),
}

DISK = GROUPS["disk"]
SO3 = GROUPS["so3"]


@st.composite
def group_and_index(draw, bound=6):
    name = draw(st.sampled_from(sorted(GROUPS)))
    g = GROUPS[name]
    n = tuple(draw(st.lists(st.integers(-bound, bound), min_size=g.d, max_size=g.d)))
    return g, n


@st.composite
def group_index_subsets(draw):
    g, n = draw(group_and_index())
    ids = list(range(g.p))
    i = draw(st.sets(st.sampled_from(ids))) if ids else set()
    j = draw(st.sets(st.sampled_from(ids))) if ids else set()
    return g, n, i, j


# examples; generator ids are 0-based


def test_apply_reflection_examples():
    assert sym.apply_reflection(DISK, [0], (1, 1)) == (-1, 1)
    assert sym.apply_reflection(DISK, [], (3, -2)) == (3, -2)
    assert sym.apply_reflection(SO3, [0], (1, 2, 3)) == (1, -2, 3)


def test_shift_parity_examples():
    assert sym.shift_parity(SO3, [0], (1, 2, 3)) == 4
    assert sym.shift_parity(DISK, [1], (1, 1)) == 2
    assert sym.shift_parity(DISK, [], (5, 7)) == 0


def test_stabilizer_count_examples():
    assert sym.stabilizer_count(GROUPS["circle"], (4,)) == 1
    assert sym.stabilizer_count(DISK, (1, 1)) == 2
    assert sym.stabilizer_count(DISK, (0, 0)) == 4


def test_r_diag_examples():
    assert sym.r_diag(DISK, (0, 0)) == 1
    assert sym.r_diag(DISK, (1, 0)) == 0
    assert sym.r_diag(DISK, (1, 1)) == 1


def test_r_pair_examples():
    assert sym.r_pair(DISK, (2, 0), (-2, 0)) == 1
    assert sym.r_pair(SO3, (1, 2, 2), (1, -2, 2)) == -1
    for n in [(0, 0), (1, 0), (1, 1), (2, 3)]:
        assert sym.r_pair(DISK, n, n) == sym.r_diag(DISK, n)


def test_orbit_examples():
    o = sym.orbit(DISK, (0, 0))
    assert o.members == {(0, 0)} and o.coefficients[(0, 0)] == 1
    o = sym.orbit(DISK, (1, 1))
    assert o.members == {(1, 1), (-1, 1)}
    assert o.terms() == [((-1, 1), 1), ((1, 1), 1)]
    o = sym.orbit(SO3, (1, 2, 3))
    assert o.members == {(1, 2, 3), (1, -2, 3)}
    assert set(o.coefficients.values()) == {1}


def test_generic_index_set_examples():
    circle = sym.build_generic_index_set(GROUPS["circle"], 3)
    assert sorted(circle) == [(k,) for k in range(-3, 4)]
    interval = sym.build_generic_index_set(GROUPS["interval"], 3)
    assert len(interval) == 4
    assert sym.validate_index_set(GROUPS["interval"], interval, 3).valid
    # the listed set only covers |n_1| + |n_2| <= 2, so compare on that part
    disk = [n for n in sym.build_generic_index_set(DISK, 2) if abs(n[0]) + abs(n[1]) <= 2]
    expected = [(0, 0), (1, 1), (1, -1), (2, 0), (0, 2), (0, -2)]
    assert sym.orbit_union(DISK, disk) == sym.orbit_union(DISK, expected)


def test_validate_index_set_examples():
    closed = [n for n in map(tuple, sym.box(2, 4).tolist()) if n[0] >= 0 and (n[0] + n[1]) % 2 == 0]
    assert sym.validate_index_set(DISK, closed, 4).valid
    rep = sym.validate_index_set(DISK, [(1, 1), (-1, 1)], 2)
    assert not rep.valid and rep.collisions
    rep = sym.validate_index_set(DISK, [], 1)
    assert not rep.valid and (0, 0) in rep.uncovered
    rep = sym.validate_index_set(DISK, [(1, 0)], 1)
    assert (1, 0) in rep.zero_members


def test_errors():
    with pytest.raises(ValueError):
        sym.apply_reflection(DISK, [0], (1, 2, 3))
    with pytest.raises(ValueError):
        sym.apply_reflection(DISK, [2], (1, 2))
    with pytest.raises(ValueError):
        sym.shift_parity(SO3, [-1], (1, 2, 3))
    with pytest.raises(ValueError):
        sym.stabilizer_count(DISK, (1,))
    with pytest.raises(ValueError):
        sym.r_pair(DISK, (1, 1), (1, -1))
    with pytest.raises(ValueError):
        sym.build_generic_index_set(DISK, -1)
    with pytest.raises(ValueError):
        sym.SymmetryGenerator((True,), (2,))
    with pytest.raises(ValueError):
        sym.SymmetryGroup(2, [sym.SymmetryGenerator((True,), (1,))])
    with pytest.raises(ValueError):
        sym.IndexSet(2, [(1, 1), (1, 1)])


def test_apply_on_points_matches_generator():
    x = np.random.default_rng(0).uniform(-np.pi, np.pi, (50, 3))
    g = SO3.generators[0]
    assert np.allclose(SO3.apply([0], x), g(x))
    assert np.allclose(SO3.apply([], x), x)


def test_product_group_structure():
    cyl = GROUPS["cylinder"]
    assert cyl.p == 3 and cyl.d == 3
    assert cyl.generators[2].signs == (1, 1, -1)


# properties


@given(group_index_subsets())
def test_reflection_self_inverse(data):
    g, n, _, _ = data
    for i in range(g.p):
        assert sym.apply_reflection(g, [i], sym.apply_reflection(g, [i], n)) == n


@given(group_index_subsets())
def test_symmetric_difference_law(data):
    g, n, i, j = data
    assert sym.apply_reflection(g, i, sym.apply_reflection(g, j, n)) == sym.apply_reflection(g, i ^ j, n)


@given(group_index_subsets())
def test_parity_law(data):
    g, n, i, j = data
    lhs = (-1) ** (sym.shift_parity(g, i, n) + sym.shift_parity(g, j, n))
    assert lhs == (-1) ** sym.shift_parity(g, i ^ j, n)


@given(group_index_subsets())
def test_shift_parity_additive_on_disjoint_subsets(data):
    g, n, i, j = data
    j = j - i
    assert sym.shift_parity(g, i | j, n) == sym.shift_parity(g, i, n) + sym.shift_parity(g, j, n)


@pytest.mark.parametrize("name", sorted(GROUPS))
def test_orbit_stabilizer(name):
    g = GROUPS[name]
    bound = 6 if g.d <= 3 else 3
    for n in sym.box(g.d, bound):
        assert sym.stabilizer_count(g, n) * len(sym.orbit(g, n)) == 2 ** g.p


def _r_oracle(g, n, m):
    # averaging form: sum over all J with M^J(n) = m of (-1)^N^J(n), divided by the stabilizer count
    hits = [
        (-1) ** sym.shift_parity(g, subset, n)
        for subset in sym.all_subsets(g.p)
        if sym.apply_reflection(g, subset, n) == tuple(m)
    ]
    return sum(hits) / len(hits) * sym.r_diag(g, n)


@settings(max_examples=200)
@given(group_and_index())
def test_r_pair_matches_averaging_oracle(data):
    g, n = data
    for m in sym.orbit(g, n).members:
        assert sym.r_pair(g, n, m) == _r_oracle(g, n, m)


@given(group_and_index())
def test_r_diag_constant_on_orbit(data):
    g, n = data
    for m in sym.orbit(g, n).members:
        assert sym.r_diag(g, m) == sym.r_diag(g, n)


@given(group_and_index())
def test_vectorised_helpers_agree(data):
    g, n = data
    arr = np.asarray([n])
    assert sym.r_diag_many(g, arr)[0] == sym.r_diag(g, n)
    images = {tuple(row) for row in sym.reflect_many(g, arr)[:, 0, :].tolist()}
    assert images == set(sym.orbit(g, n).members)


@pytest.mark.parametrize("name", sorted(GROUPS))
def test_generators_commute(name):
    g = GROUPS[name]
    x = np.random.default_rng(1).uniform(-np.pi, np.pi, (20, g.d))
    for i, j in itertools.combinations(range(g.p), 2):
        a = g.apply([i], g.apply([j], x))
        b = g.apply([j], g.apply([i], x))
        assert np.allclose(np.exp(1j * a), np.exp(1j * b))


@pytest.mark.parametrize("name,bound", [
    (name, bound) for name in sorted(GROUPS) for bound in (1, 3, 5) if GROUPS[name].d < 4 or bound < 5
])
def test_generic_set_valid(name, bound):
    g = GROUPS[name]
    assert sym.validate_index_set(g, sym.build_generic_index_set(g, bound), bound).valid


def test_box_is_lexicographic():
    b = sym.box(2, 1).tolist()
    assert b == sorted(b) and len(b) == 9
