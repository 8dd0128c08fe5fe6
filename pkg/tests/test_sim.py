import dataclasses

import numpy as np
import pytest

from swarm3d import shapes
from swarm3d.formation import MoveSet
from swarm3d.geom3 import random_rotation, similar
from swarm3d.shapes import place
from swarm3d.sim import Robot, SimConfig, fsync_step, look, make_adversary, run, verify
from swarm3d.symmetry import C, D, T, GroupKind, LocalFrame, frame_group, is_subgroup
from swarm3d.symmetry.symmetricity import random_frame

CUBE = place(shapes.cube(), 3)


def test_look_identity_frame_translates():
    P = shapes.cube()
    obs = look(P, LocalFrame(P[2], np.eye(3)))
    assert np.allclose(obs, P - P[2])


def test_look_scale_halves_distances():
    P = shapes.random_cloud(6, 1)
    a = look(P, LocalFrame(P[0], np.eye(3), 1.0))
    b = look(P, LocalFrame(P[0], np.eye(3), 2.0))
    assert np.allclose(b, a / 2)


def test_look_then_map_back_matches_composition(rng):
    P = shapes.random_cloud(5, 3)
    fr = LocalFrame(P[1], random_rotation(rng), 1.7)
    local_target = np.array([0.3, -0.2, 0.9])
    expected = fr.origin + fr.scale * fr.basis @ local_target
    assert np.allclose(fr.to_global(local_target), expected)
    assert np.allclose(fr.to_global(look(P, fr)), P)


def test_all_stay_keeps_configuration():
    P = shapes.cube()
    robots = [Robot(i, LocalFrame(p, np.eye(3))) for i, p in enumerate(P)]
    new, _, _ = fsync_step(P, robots, lambda p, fr, s, t: MoveSet.stay(len(p)), 0)
    assert np.array_equal(new, P)


def test_symmetric_frames_never_lose_symmetry():
    P = place(shapes.icosahedron(), 1)
    frames = make_adversary("symmetric:T", 2)(P)
    tr = run(P, shapes.random_cloud(12, 4), SimConfig(adversary="symmetric:T", strict=False, max_steps=15, seed=2), frames)
    assert tr.outcome.kind == "BudgetExceeded"
    for s, g in zip(tr.sigma, tr.gamma):
        assert is_subgroup(T, GroupKind.parse(s)) and is_subgroup(T, GroupKind.parse(g))


def test_one_step_from_terminal_forms_target():
    P = shapes.random_cloud(8, 7)
    tr = run(P, shapes.ngon(8), SimConfig(seed=1))
    assert str(tr.outcome) == "Formed(1)"


@pytest.mark.parametrize("seed", range(5))
def test_cube_to_antiprism(seed):
    tr = run(CUBE, shapes.antiprism(4), SimConfig(seed=seed))
    assert tr.outcome.kind == "Formed" and tr.outcome.step <= 9
    assert similar(tr.configurations[-1], shapes.antiprism(4)) is not None


def test_cube_without_target_reaches_terminal():
    tr = run(CUBE, None, SimConfig(algorithm="psi_sym", seed=2))
    assert tr.outcome.kind == "Terminal-no-target" and tr.outcome.step <= 7


def test_infeasible_strict_run_refused():
    with pytest.raises(ValueError, match="infeasible"):
        run(shapes.icosahedron(), shapes.random_cloud(12, 1))


def test_size_mismatch_refused():
    with pytest.raises(ValueError, match="size mismatch"):
        run(shapes.cube(), shapes.icosahedron())


def test_random_adversary_gives_trivial_sigma():
    assert frame_group(make_adversary("random", 3)(CUBE)).kind == C(1)


def test_symmetric_adversaries():
    assert frame_group(make_adversary("symmetric:D4", 1)(CUBE)).kind == D(4)
    assert frame_group(make_adversary("symmetric(D4, 1, 5)")(CUBE)).kind == D(4)
    ico = place(shapes.icosahedron(), 2)
    assert frame_group(make_adversary("symmetric:T", 1)(ico)).kind == T


def test_unknown_adversary():
    with pytest.raises(ValueError):
        make_adversary("friendly")


def test_adversary_rejects_unrealizable_group():
    with pytest.raises(ValueError, match="not realizable"):
        make_adversary("symmetric:O")(shapes.cube())


def test_local_mode_agrees_with_global():
    cfg = SimConfig(seed=3)
    a = run(CUBE, shapes.ngon(8), cfg)
    b = run(CUBE, shapes.ngon(8), dataclasses.replace(cfg, local=True))
    assert str(a.outcome) == str(b.outcome)
    for x, y in zip(a.configurations, b.configurations):
        assert np.allclose(x, y, atol=1e-9)


def test_identical_inputs_give_identical_traces():
    a = run(CUBE, shapes.ngon(8), SimConfig(seed=8))
    b = run(CUBE, shapes.ngon(8), SimConfig(seed=8))
    assert len(a.configurations) == len(b.configurations)
    assert all(np.array_equal(x, y) for x, y in zip(a.configurations, b.configurations))
    assert a.gamma == b.gamma and a.sigma == b.sigma and a.steps == b.steps


def test_verify_passes_on_real_trace():
    tr = run(CUBE, shapes.ngon(8), SimConfig(seed=1))
    assert all(c.passed for c in verify(tr))


def test_verify_catches_teleported_robot():
    P = place(shapes.composite(shapes.cube(), shapes.octahedron(0.5)), 1)
    tr = run(P, None, SimConfig(algorithm="psi_sym", seed=1))
    t = 0
    idle = next(i for i in range(len(P)) if i not in tr.steps[t].moved)
    bad = [c.copy() for c in tr.configurations]
    for c in bad[t + 1:]:
        c[idle] += np.array([0.5, -0.25, 0.1])
    checks = {c.name: c.passed for c in verify(dataclasses.replace(tr, configurations=bad))}
    assert not checks["replay"]
    assert not checks["move-sets"]


def test_verify_catches_unrecorded_mover():
    tr = run(CUBE, shapes.ngon(8), SimConfig(seed=1))
    steps = list(tr.steps)
    steps[0] = dataclasses.replace(steps[0], moved=())
    checks = {c.name: c.passed for c in verify(dataclasses.replace(tr, steps=steps), replay=False)}
    assert steps[0] != tr.steps[0] and not checks["move-sets"]


def test_sim_config_validation():
    with pytest.raises(ValueError):
        SimConfig(max_steps=0)
    with pytest.raises(ValueError):
        SimConfig(algorithm="teleport")
    with pytest.raises(ValueError):
        SimConfig(algorithm="external")


def test_external_algorithm_hook():
    calls = []

    def algo(p, fr, seed, tol):
        calls.append(len(p))
        return MoveSet.stay(len(p))

    tr = run(CUBE, None, SimConfig(algorithm="external", external=algo, max_steps=3))
    assert tr.outcome.kind == "BudgetExceeded" and calls == [8, 8, 8]


def test_frames_keep_orientation_after_moves():
    tr = run(CUBE, shapes.ngon(8), SimConfig(seed=4))
    assert len(tr.frames) == 8
    rng = np.random.default_rng(4)
    expected = [random_frame(rng, p) for p in CUBE]
    assert all(np.array_equal(a.basis, b.basis) for a, b in zip(tr.frames, expected))


def test_batch_verify_hundred_seeds():
    failed = []
    for seed in range(100):
        tr = run(CUBE, shapes.ngon(8), SimConfig(seed=seed))
        if not all(c.passed for c in verify(tr)):
            failed.append(seed)
    assert failed == []
