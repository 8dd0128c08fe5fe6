import numpy as np
import pytest
from hypothesis import given, strategies as st

from swarm3d import shapes
from swarm3d.formation import analyze, go_to_center_step, psi_sym_step, psi_sym_terminal, reference_prism
from swarm3d.formation.common import MoveSet
from swarm3d.formation.pf import has_multiplicity
from swarm3d.geom3 import smallest_enclosing_ball
from swarm3d.shapes import CATALOG, place
from swarm3d.symmetry import C, D, T, detect_rotation_group, is_subgroup, symmetricity
from swarm3d.symmetry.symmetricity import random_frame

POLYHEDRA = list(shapes.POLYHEDRA)


def _frames(pts, seed):
    rng = np.random.default_rng(seed)
    return [random_frame(rng, p) for p in pts]


def _iterate(P, seed, limit=10):
    fr = _frames(P, seed)
    procs = []
    for _ in range(limit):
        a = analyze(P)
        if psi_sym_terminal(P, analysis=a):
            return P, procs
        m = psi_sym_step(P, seed, fr, analysis=a)
        procs.append(m.procedure)
        fr = [f.moved_to(d) if d is not None else f for f, d in zip(fr, m.destinations)]
        P = m.apply(P)
        assert not has_multiplicity(P)
    raise AssertionError(f"not terminal after {limit} steps: {procs}")


def test_terminal_examples():
    assert psi_sym_terminal(shapes.random_cloud(7, 1))
    assert psi_sym_terminal(shapes.ngon(6))
    assert not psi_sym_terminal(shapes.cube())
    assert psi_sym_terminal(shapes.prism(5))  # nobody on an axis


def test_step_on_terminal_raises():
    with pytest.raises(ValueError, match="already terminal"):
        psi_sym_step(shapes.random_cloud(6, 2))


@pytest.mark.parametrize("seed", range(10))
def test_octahedron_go_to_center_bound(seed):
    P = place(shapes.octahedron(), seed)
    Q = go_to_center_step(P, seed, _frames(P, seed)).apply(P)
    assert is_subgroup(detect_rotation_group(Q).kind, D(3))


@pytest.mark.parametrize("seed", range(10))
def test_cube_go_to_center_bound(seed):
    P = place(shapes.cube(), seed)
    Q = go_to_center_step(P, seed, _frames(P, seed)).apply(P)
    assert is_subgroup(detect_rotation_group(Q).kind, D(4))


def test_cuboctahedron_go_to_center_results():
    P = place(shapes.cuboctahedron(), 2)
    a = analyze(P)
    for seed in range(100):
        Q = go_to_center_step(P, seed, _frames(P, seed), analysis=a).apply(P)
        k = detect_rotation_group(Q).kind
        assert any(is_subgroup(k, g) for g in (T, C(4), C(3))), k


def test_go_to_center_rejects_non_polyhedral():
    with pytest.raises(ValueError):
        go_to_center_step(shapes.prism(4), 0)


def test_go_to_center_moves_one_orbit_inside():
    P = shapes.icosahedron()
    m = go_to_center_step(P, 3)
    Q = m.apply(P)
    assert len(m.moved()) == 12
    r0 = smallest_enclosing_ball(P).radius
    assert np.all(np.linalg.norm(Q, axis=1) < r0)


def test_cube_octahedron_composite_breaks_inner_orbit():
    # the inner octahedron is already the first orbit on the 4-fold axes
    P = place(shapes.composite(shapes.cube(), shapes.octahedron(0.5)), 1)
    Q, procs = _iterate(P, 4)
    assert procs[0] == "go-to-center"
    assert is_subgroup(detect_rotation_group(Q).kind, C(2))


def test_outer_octahedron_shrinks_first():
    P = place(shapes.composite(shapes.cube(), shapes.octahedron(2.0)), 1)
    Q, procs = _iterate(P, 4)
    assert procs[:2] == ["shrink", "go-to-center"]
    assert is_subgroup(detect_rotation_group(Q).kind, C(2))


@pytest.mark.parametrize("k", [3, 4, 5])
def test_pyramid_apex_goes_to_sphere(k):
    P = place(shapes.pyramid(k), k)
    Q, procs = _iterate(P, 1)
    assert procs[-1] == "go-to-sphere"
    assert set(procs[:-1]) <= {"shrink"}
    assert detect_rotation_group(Q).kind == C(1)


def test_inner_apex_goes_to_sphere_at_once():
    P = shapes.composite(shapes.ngon(4, 1.0, -0.3), np.array([[0.0, 0.0, 0.1]]))
    m = psi_sym_step(P, 1, _frames(P, 1))
    assert m.procedure == "go-to-sphere" and m.moved() == [4]
    assert detect_rotation_group(m.apply(P)).kind == C(1)


@given(st.integers(0, 10_000), st.sampled_from([s for s in CATALOG if not s.name.startswith("perturbed")]))
def test_reaches_terminal_within_bound_and_stays_in_symmetricity(seed, shape):
    P0 = place(shape.points, seed % 97)
    rho = symmetricity(P0)
    P, procs = _iterate(P0, seed)
    assert len(procs) <= 7
    k = analyze(P).arr.kind
    assert k in rho or shape.name.startswith("ngon")


def test_regular_polygon_left_alone():
    P = place(shapes.ngon(7), 3)
    assert psi_sym_terminal(P)


def test_destinations_are_deterministic():
    P = place(shapes.cube(), 5)
    fr = _frames(P, 1)
    a = psi_sym_step(P, 9, fr).destinations
    b = psi_sym_step(P, 9, fr).destinations
    assert all((x is None and y is None) or np.array_equal(x, y) for x, y in zip(a, b))


@pytest.mark.parametrize("l,per_layer", [(2, 4), (3, 6), (6, 12)])
def test_reference_prism_layers(l, per_layer):
    arr = detect_rotation_group(shapes.prism(l))
    pts = reference_prism(arr.center, 1.0, arr)
    assert len(pts) == 2 * per_layer
    z = arr.principal_axis.direction if arr.principal_axis is not None else arr.axes[0].direction
    h = (pts - arr.center) @ z
    assert np.allclose(np.sort(np.abs(h)), np.sqrt(3) / 4)
    radial = np.linalg.norm((pts - arr.center) - np.outer(h, z), axis=1)
    assert np.allclose(radial, 0.25)
    assert np.allclose(np.linalg.norm(pts - arr.center, axis=1), 0.5)
    top = pts[h > 0]
    ang = np.sort(np.arctan2(*(np.linalg.svd(top - top.mean(0))[2][:2] @ (top - top.mean(0)).T)))
    assert np.allclose(np.diff(ang), 2 * np.pi / per_layer)


def test_moveset_rejects_non_finite():
    with pytest.raises(ValueError):
        MoveSet([np.array([np.nan, 0, 0])])
