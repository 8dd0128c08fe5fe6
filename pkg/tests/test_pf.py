import numpy as np
import pytest

from swarm3d import shapes
from swarm3d.formation import feasible, psi_pf_step, psi_sym_terminal
from swarm3d.formation.pf import naive_targets
from swarm3d.geom3 import similar
from swarm3d.shapes import place
from swarm3d.symmetry import O, T, frame_group
from swarm3d.symmetry.symmetricity import random_frame, symmetric_frame_assignment


def test_feasibility_examples():
    cube = shapes.cube()
    assert feasible(cube, shapes.ngon(8)).ok
    assert feasible(cube, shapes.antiprism(4)).ok
    v = feasible(shapes.icosahedron(), shapes.random_cloud(12, 2))
    assert not v.ok and v.blocker == T


def test_feasibility_size_mismatch():
    with pytest.raises(ValueError, match="size mismatch"):
        feasible(shapes.cube(), shapes.octahedron())


def test_feasible_accepts_multiset_target():
    assert feasible(shapes.truncated_cube(), shapes.with_multiplicity(shapes.cube(), 3)).ok


@pytest.mark.parametrize("seed", range(5))
def test_terminal_robots_form_in_one_step(seed):
    rng = np.random.default_rng(seed)
    P = shapes.random_cloud(8, seed)
    F = shapes.antiprism(4)
    assert psi_sym_terminal(P)
    fr = [random_frame(rng, p) for p in P]
    Q = psi_pf_step(P, F, seed, fr).apply(P)
    assert similar(Q, F) is not None


def test_similar_configuration_stays():
    P = place(shapes.cube(), 3)
    m = psi_pf_step(P, shapes.cube())
    assert m.procedure == "stay" and not m.moved()


def test_truncated_cube_gathers_on_cube_vertices():
    P = place(shapes.truncated_cube(), 4)
    F = shapes.with_multiplicity(shapes.cube(), 3)
    m = psi_pf_step(P, F)
    assert m.procedure == "form"
    Q = m.apply(P)
    assert similar(Q, F) is not None
    dest = np.array(m.destinations)
    corners = np.unique(np.round(dest, 9), axis=0)
    assert len(corners) == 8
    d = np.linalg.norm(P[:, None] - corners[None], axis=2)
    assert np.allclose(np.linalg.norm(P - dest, axis=1), d.min(axis=1))


def test_strict_mode_rejects_infeasible_terminal():
    P = shapes.prism(4)
    with pytest.raises(ValueError, match="infeasible"):
        psi_pf_step(P, shapes.random_cloud(8, 1))


def test_permissive_naive_moves_keep_frame_symmetry():
    P = place(shapes.icosahedron(), 2)
    fr = symmetric_frame_assignment(P, T, seed=3)
    F = shapes.random_cloud(12, 4)
    Q = P
    for t in range(3):
        m = psi_pf_step(Q, F, t, fr, strict=False)
        fr = [f.moved_to(d) if d is not None else f for f, d in zip(fr, m.destinations)]
        Q = m.apply(Q)
        assert frame_group(fr).kind in (T, O) or frame_group(fr).kind.polyhedral
        assert similar(Q, F) is None


def test_naive_preserves_distances_to_center():
    P = shapes.icosahedron()
    fr = symmetric_frame_assignment(P, T, seed=1)
    dest = np.array(naive_targets(P, shapes.random_cloud(12, 5), fr))
    assert np.allclose(np.linalg.norm(dest, axis=1), 1.0)
