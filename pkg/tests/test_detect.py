import numpy as np
import pytest
from hypothesis import given, strategies as st

from swarm3d import shapes
from swarm3d.geom3 import random_rotation
from swarm3d.shapes import CATALOG, place
from swarm3d.symmetry import C, D, O, T, GroupKind, LocalFrame, detect_rotation_group, frame_group, group_acts, is_subgroup
from swarm3d.symmetry.symmetricity import random_frame, symmetric_frame_assignment

CATALOG_IDS = [s.name for s in CATALOG]


@pytest.mark.parametrize("shape", CATALOG, ids=CATALOG_IDS)
def test_catalog_ground_truth(shape):
    arr = detect_rotation_group(place(shape.points, 11))
    assert str(arr.kind) == shape.kind
    assert arr.order == GroupKind.parse(shape.kind).order


def test_catalog_size():
    assert len(CATALOG) >= 25


def test_cube_axes_occupancy():
    arr = detect_rotation_group(shapes.cube())
    assert arr.kind == O
    occ = {f: {a.occupied for a in arr.axes if a.fold == f} for f in (2, 3, 4)}
    assert occ == {2: {False}, 3: {True}, 4: {False}}
    assert sum(a.fold == 3 for a in arr.axes) == 4


def test_square_pyramid():
    arr = detect_rotation_group(shapes.pyramid(4))
    assert arr.kind == C(4)
    assert len(arr.axes) == 1 and arr.axes[0].oriented


def test_perturbed_cloud_is_trivial():
    pts = shapes.perturbed(shapes.random_cloud(20, 3), 1e-3, 4)
    assert detect_rotation_group(pts).kind == C(1)


def test_collinear_is_infinite():
    line = np.array([[0, 0, 0], [0, 0, 1.0], [0, 0, 3.0]])
    sym = np.array([[0, 0, -1.0], [0, 0, 0], [0, 0, 1.0]])
    assert detect_rotation_group(line).kind == GroupKind("Cinf")
    assert detect_rotation_group(sym).kind == GroupKind("Dinf")


def test_coincident_points_rejected():
    with pytest.raises(ValueError):
        detect_rotation_group(np.ones((5, 3)))


@given(st.integers(0, 10_000), st.sampled_from(CATALOG))
def test_detection_invariant_under_similarity(seed, shape):
    arr = detect_rotation_group(place(shape.points, seed))
    assert str(arr.kind) == shape.kind


@pytest.mark.parametrize("shape", CATALOG, ids=CATALOG_IDS)
def test_detected_group_acts(shape):
    pts = place(shape.points, 5)
    arr = detect_rotation_group(pts)
    assert group_acts(pts, arr)


@pytest.mark.parametrize(
    "name", ["tetrahedron", "cuboctahedron", "orbit(T)", "orbit(O)", "orbit(I)", "cube", "icosahedron"]
)
def test_interchangeable_two_fold_axes_give_polyhedral_kind(name):
    pts = place(shapes.catalog_by_name()[name].points, 3)
    arr = detect_rotation_group(pts)
    assert is_subgroup(T, arr.kind)


def test_sphenoid_keeps_d2_with_distinguished_axes():
    arr = detect_rotation_group(shapes.sphenoid())
    assert arr.kind == D(2)
    assert arr.principal_distinguished


# frames


def test_identical_world_bases_break_symmetry():
    pts = shapes.cube()
    frames = [LocalFrame(p, np.eye(3)) for p in pts]
    assert frame_group(frames).kind == C(1)


def test_bases_carried_by_the_group_keep_it():
    # O acts freely on a generic orbit, so its rotations can carry one basis around
    pts = shapes.orbit(O, shapes.generic_seed(4))
    elems = detect_rotation_group(pts).elements
    base = random_rotation(np.random.default_rng(0))
    frames = []
    for p in pts:
        g = next(g for g in elems if np.allclose(g @ pts[0], p))
        frames.append(LocalFrame(p, g @ base))
    assert frame_group(frames).kind == O


def test_random_frames_are_asymmetric(rng):
    frames = [random_frame(rng, p) for p in shapes.cube()]
    assert frame_group(frames).kind == C(1)


@pytest.mark.parametrize(
    "name,kind", [("cube", D(4)), ("cube", C(4)), ("icosahedron", T), ("icosahedron", D(3)), ("orbit(O)", O)]
)
def test_symmetric_assignment_round_trip(name, kind):
    pts = place(shapes.catalog_by_name()[name].points, 2)
    frames = symmetric_frame_assignment(pts, kind, seed=7)
    assert frame_group(frames).kind == kind


def test_local_frame_validation():
    with pytest.raises(ValueError):
        LocalFrame(np.zeros(3), np.diag([1.0, 1.0, -1.0]))
    with pytest.raises(ValueError):
        LocalFrame(np.zeros(3), 2 * np.eye(3))
    with pytest.raises(ValueError):
        LocalFrame(np.zeros(3), np.eye(3), scale=0)


def test_detection_cache_returns_read_only_copies():
    from swarm3d.symmetry.detect import clear_detection_cache

    pts = place(shapes.cube(), 9)
    a = detect_rotation_group(pts)
    assert detect_rotation_group(pts.copy()) is a
    with pytest.raises(ValueError):
        a.center[0] = 1.0
    clear_detection_cache()
    b = detect_rotation_group(pts)
    assert b is not a and b.kind == a.kind and np.array_equal(b.center, a.center)
