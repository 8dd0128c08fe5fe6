import numpy as np
from hypothesis import given, strategies as st

from swarm3d import shapes
from swarm3d.geom3 import DEFAULT_TOL, random_rotation, smallest_enclosing_ball
from swarm3d.shapes import CATALOG, place
from swarm3d.symmetry import O, decompose, local_view, view_key


def _views(pts):
    ball = smallest_enclosing_ball(pts)
    return [view_key(local_view(pts, i, None, DEFAULT_TOL, ball)) for i in range(len(pts))]


def test_cube_single_orbit():
    dec = decompose(shapes.cube())
    assert len(dec) == 1 and len(dec.orbits[0]) == 8 and dec.foldings == (3,)


def test_cube_octahedron_inner_first():
    pts = shapes.composite(shapes.cube(), shapes.octahedron(0.5))
    dec = decompose(pts)
    assert [len(o) for o in dec.orbits] == [6, 8]
    assert set(dec.orbits[0]) == set(range(8, 14))


def test_generic_orbit_of_o():
    pts = shapes.orbit(O, shapes.generic_seed(5))
    dec = decompose(pts)
    assert len(dec) == 1 and len(dec.orbits[0]) == 24 and dec.foldings == (1,)


def test_cube_views_identical():
    assert len(set(_views(shapes.cube()))) == 1


def test_pyramid_apex_differs_from_base():
    v = _views(shapes.pyramid(4))
    assert len(set(v[:-1])) == 1 or len(set(v[1:])) == 1
    assert len(set(v)) == 2


def test_asymmetric_views_pairwise_distinct():
    pts = shapes.random_cloud(5, 2)
    v = _views(pts)
    for i in range(5):
        for j in range(i + 1, 5):
            assert v[i] != v[j]


@given(st.integers(0, 10_000), st.sampled_from(CATALOG))
def test_decomposition_frame_independent(seed, shape):
    base = place(shape.points, 1)
    rng = np.random.default_rng(seed)
    moved = (0.3 + 3 * rng.random()) * base @ random_rotation(rng).T + rng.normal(size=3)
    a, b = decompose(base), decompose(moved)
    assert a.orbits == b.orbits
    assert a.foldings == b.foldings
    assert a.views == b.views


def test_views_invariant_under_permutation():
    pts = place(shapes.composite(shapes.cube(), shapes.octahedron(0.4)), 4)
    perm = np.random.default_rng(0).permutation(len(pts))
    assert sorted(_views(pts)) == sorted(_views(pts[perm]))
