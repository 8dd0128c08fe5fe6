import itertools
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.spatial import ConvexHull

from swarm3d import shapes
from swarm3d.geom3 import (
    DEFAULT_TOL,
    Tolerance,
    innermost_empty_ball,
    match_multisets,
    random_rotation,
    rotation_matrix,
    similar,
    smallest_enclosing_ball,
)


def brute_force_seb(pts):
    """Minimum over balls spanned by support sets of 1 to 4 points.

    Support points are extreme, so only hull vertices are enumerated.
    """
    best = None
    hull = pts[ConvexHull(pts).vertices]
    for k in range(1, 5):
        for idx in itertools.combinations(range(len(hull)), k):
            s = hull[list(idx)]
            c = circumcenter(s)
            if c is None:
                continue
            r = float(np.max(np.linalg.norm(s - c, axis=1)))
            if best is not None and r >= best[1]:
                continue
            if np.all(np.linalg.norm(pts - c, axis=1) <= r * (1 + 1e-9) + 1e-12):
                best = (c, r)
    return best


def circumcenter(s):
    """Center of the smallest sphere through all points of s (affine hull)."""
    if len(s) == 1:
        return s[0]
    a = s[1:] - s[0]
    gram = a @ a.T
    if abs(np.linalg.det(gram)) < 1e-14:
        return None
    lam = np.linalg.solve(gram, 0.5 * np.diag(gram))
    return s[0] + lam @ a


def test_seb_cube():
    b = smallest_enclosing_ball(shapes.cube(math.sqrt(3) / 2))
    assert np.allclose(b.center, 0, atol=1e-12)
    assert b.radius == pytest.approx(math.sqrt(3) / 2, rel=1e-12)


def test_seb_unit_cube_vertices():
    pts = np.array(list(itertools.product((-0.5, 0.5), repeat=3)))
    b = smallest_enclosing_ball(pts)
    assert np.allclose(b.center, 0, atol=1e-12)
    assert b.radius == pytest.approx(math.sqrt(3) / 2)


def test_seb_tetrahedron():
    b = smallest_enclosing_ball(shapes.tetrahedron())
    assert np.allclose(b.center, 0, atol=1e-12)
    assert b.radius == pytest.approx(1.0)


@pytest.mark.parametrize("seed", range(5))
def test_seb_matches_support_set_oracle(seed):
    pts = np.random.default_rng(seed).uniform(-1, 1, size=(50, 3))
    b = smallest_enclosing_ball(pts)
    c, r = brute_force_seb(pts)
    assert b.radius == pytest.approx(r, rel=1e-9)
    assert np.allclose(b.center, c, atol=1e-9)


@given(st.integers(0, 10_000), st.integers(1, 30))
def test_seb_contains_all_points(seed, n):
    pts = np.random.default_rng(seed).normal(size=(n, 3))
    b = smallest_enclosing_ball(pts)
    assert np.all(np.linalg.norm(pts - b.center, axis=1) <= b.radius + DEFAULT_TOL.length(b.radius))


@given(st.integers(0, 10_000))
def test_seb_equivariant_under_similarity(seed):
    rng = np.random.default_rng(seed)
    pts = rng.normal(size=(12, 3))
    rot, s, t = random_rotation(rng), float(rng.uniform(0.2, 5)), rng.normal(size=3)
    b0 = smallest_enclosing_ball(pts)
    b1 = smallest_enclosing_ball(s * pts @ rot.T + t)
    assert b1.radius == pytest.approx(s * b0.radius, rel=1e-8)
    assert np.allclose(b1.center, s * rot @ b0.center + t, atol=1e-8 * s)


def test_innermost_empty_ball():
    assert innermost_empty_ball(shapes.cube(), np.zeros(3)).radius == pytest.approx(1.0)
    pts = shapes.composite(shapes.cube(), shapes.octahedron(0.5))
    assert innermost_empty_ball(pts, np.zeros(3)).radius == pytest.approx(0.5)


def test_innermost_empty_ball_random(rng):
    pts = rng.normal(size=(30, 3))
    c = smallest_enclosing_ball(pts).center
    assert innermost_empty_ball(pts, c).radius == pytest.approx(np.min(np.linalg.norm(pts - c, axis=1)))


def test_similar_constructed_copy(rng):
    p = rng.normal(size=(10, 3))
    rot = rotation_matrix([1, 2, 3], math.radians(37))
    f = 2.5 * p @ rot.T + 5.0
    z = similar(p, f)
    assert z is not None
    assert z.residual < DEFAULT_TOL.rel_eps
    assert np.allclose(z.apply(f)[np.argsort(z.apply(f)[:, 0])], p[np.argsort(p[:, 0])], atol=1e-8)


def test_similar_rejects_other_shape():
    assert similar(shapes.cube(), shapes.antiprism(4)) is None


def test_similar_rejects_displaced_vertex():
    f = shapes.cube().copy()
    f[0] += 10 * DEFAULT_TOL.rel_eps * np.array([1.0, 0.3, -0.2])
    assert similar(shapes.cube(), f) is None


def test_similar_rejects_mirror_image():
    chiral = shapes.orbit(shapes.GroupKind("T"), (0.9, 0.3, 0.1))
    mirrored = chiral * np.array([-1.0, 1.0, 1.0])
    assert similar(chiral, chiral[::-1]) is not None
    # T orbits of generic seeds are chiral: no proper similarity reaches the mirror image
    assert similar(chiral, mirrored) is None


def test_similar_size_mismatch():
    with pytest.raises(ValueError):
        similar(shapes.cube(), shapes.octahedron())


def test_similar_multisets():
    f = shapes.with_multiplicity(shapes.cube(), 3)
    assert similar(f, 2 * f[::-1] + 1) is not None
    assert similar(f, shapes.with_multiplicity(shapes.octahedron(), 4)) is None


def test_match_multisets(rng):
    a = rng.normal(size=(9, 3))
    perm = rng.permutation(9)
    got = match_multisets(a, a[perm], 1e-9)
    assert got is not None
    assert np.allclose(a, a[perm][got])
    assert match_multisets(a, a + 1, 1e-9) is None


def test_tolerance_validation():
    with pytest.raises(ValueError):
        Tolerance(rel_eps=0)
    assert Tolerance().length(2.0) == pytest.approx(2e-9 + 1e-12)


@given(st.integers(0, 10_000))
def test_random_rotation_is_proper(seed):
    r = random_rotation(np.random.default_rng(seed))
    assert np.allclose(r.T @ r, np.eye(3), atol=1e-12)
    assert np.linalg.det(r) == pytest.approx(1.0)
