import numpy as np
import pytest
from scipy.spatial.transform import Rotation

from swarm3d.geom3 import random_rotation
from swarm3d.symmetry import C, D, I, O, T, GroupKind, canonical_elements, is_proper_subgroup, is_subgroup, maximal_kinds
from swarm3d.symmetry.detect import detect_rotation_group
from swarm3d.symmetry.embeddings import enumerate_embeddings
from swarm3d.symmetry.groups import classify_elements, element_lines, parse_kind_list
from swarm3d import shapes

KINDS = [C(k) for k in range(1, 7)] + [D(l) for l in range(2, 7)] + [T, O, I]


def _contained(elems, host, tol=1e-6):
    diff = np.abs(elems[:, None] - host[None]).reshape(len(elems), len(host), -1).max(axis=2)
    return bool(np.all(diff.min(axis=1) < tol))


def _rotvecs(elems):
    rv = Rotation.from_matrix(elems).as_rotvec()
    ang = np.linalg.norm(rv, axis=1)
    return rv, ang


def _frames_between(u1, u2, v1, v2):
    """Rotation taking the pair (u1, u2) onto (v1, v2) when their angles agree."""
    def frame(a, b):
        x = a / np.linalg.norm(a)
        y = b - (b @ x) * x
        if np.linalg.norm(y) < 1e-9:
            return None
        y /= np.linalg.norm(y)
        return np.column_stack([x, y, np.cross(x, y)])
    fu, fv = frame(u1, u2), frame(v1, v2)
    if fu is None or fv is None:
        return None
    return fv @ fu.T


def brute_force_subgroup(g: GroupKind, h: GroupKind) -> bool:
    """Search conjugations R with R g R^T contained in h, from generator axis matches."""
    ge, he = canonical_elements(g), canonical_elements(h)
    if len(he) % len(ge):
        return False
    if len(ge) == 1:
        return True
    grv, gang = _rotvecs(ge)
    hrv, hang = _rotvecs(he)
    a = int(np.argmin(np.where(gang > 1e-9, gang, np.inf)))
    others = [j for j in range(len(ge)) if gang[j] > 1e-9 and np.linalg.norm(np.cross(grv[a], grv[j])) > 1e-6]
    cand_a = [i for i in range(len(he)) if abs(hang[i] - gang[a]) < 1e-7]
    signs = (1, -1) if abs(gang[a] - np.pi) < 1e-7 else (1,)
    if not others:
        # cyclic: one axis with matching rotation angle suffices
        return bool(cand_a)
    b = others[0]
    cand_b = [i for i in range(len(he)) if abs(hang[i] - gang[b]) < 1e-7]
    sb = (1, -1) if abs(gang[b] - np.pi) < 1e-7 else (1,)
    ua, ub = grv[a], grv[b]
    cos_g = ua @ ub / (np.linalg.norm(ua) * np.linalg.norm(ub))
    for i in cand_a:
        for s1 in signs:
            va = s1 * hrv[i]
            for j in cand_b:
                for s2 in sb:
                    vb = s2 * hrv[j]
                    if abs(va @ vb / (np.linalg.norm(va) * np.linalg.norm(vb)) - cos_g) > 1e-7:
                        continue
                    r = _frames_between(ua, ub, va, vb)
                    if r is not None and _contained(r @ ge @ r.T, he):
                        return True
    return False


def test_orders():
    assert (T.order, O.order, I.order) == (12, 24, 60)
    for k in KINDS:
        assert len(canonical_elements(k)) == k.order


def test_named_relations():
    assert is_subgroup(T, O) and is_subgroup(T, I)
    assert not is_subgroup(O, I)
    for k in KINDS:
        assert is_subgroup(C(1), k)
        assert is_subgroup(k, k) and not is_proper_subgroup(k, k)


@pytest.mark.parametrize("g", KINDS, ids=str)
def test_subgroup_table_matches_brute_force(g):
    for h in KINDS:
        assert is_subgroup(g, h) == brute_force_subgroup(g, h), (g, h)


def test_maximal_kinds():
    assert set(maximal_kinds([C(2), C(4), D(2), T])) == {C(4), T}
    assert maximal_kinds([C(3), T, O]) == (O,)


def test_parse_and_format():
    assert parse_kind_list("C4, D6 T O I") == [C(4), D(6), T, O, I]
    assert str(GroupKind.parse("D_3")) == "D3"
    with pytest.raises(ValueError):
        GroupKind.parse("X9")
    with pytest.raises(ValueError):
        C(0)


@pytest.mark.parametrize("k", KINDS, ids=str)
def test_classify_canonical_and_conjugated(k):
    r = random_rotation(np.random.default_rng(k.order))
    elems = canonical_elements(k)
    assert classify_elements(elems) == k
    assert classify_elements(r @ elems @ r.T) == k


def test_element_lines_of_octahedral_group():
    folds = sorted(f for _, f in element_lines(canonical_elements(O)))
    assert folds == [2] * 6 + [3] * 4 + [4] * 3


def test_c4_into_o_embeddings():
    arr = detect_rotation_group(shapes.cube())
    assert len(enumerate_embeddings(C(4), arr)) == 6


def test_identity_embedding_present():
    for name in ("cube", "icosahedron", "tetrahedron"):
        arr = detect_rotation_group(shapes.catalog_by_name()[name].points)
        embs = enumerate_embeddings(arr.kind, arr)
        assert any(_contained(e.elements(), arr.elements) and _contained(arr.elements, e.elements()) for e in embs)


def _subgroup_copies(g, host_elems):
    """Distinct subsets of host elements that are conjugates of canonical g."""
    copies = set()
    ge = canonical_elements(g)
    for r in _candidate_rotations(ge, host_elems):
        img = r @ ge @ r.T
        if _contained(img, host_elems):
            idx = tuple(sorted(int(np.argmin(np.abs(host_elems - m).reshape(len(host_elems), -1).max(axis=1))) for m in img))
            copies.add(idx)
    return copies


def _candidate_rotations(ge, he):
    grv, gang = _rotvecs(ge)
    hrv, hang = _rotvecs(he)
    nz = [j for j in range(len(ge)) if gang[j] > 1e-9]
    a = max(nz, key=lambda j: (-gang[j], j))
    b = next(j for j in nz if np.linalg.norm(np.cross(grv[a], grv[j])) > 1e-6)
    live = [i for i in range(len(he)) if hang[i] > 1e-9]
    for i in live:
        for j in live:
            for s1 in (1, -1):
                for s2 in (1, -1):
                    r = _frames_between(grv[a], grv[b], s1 * hrv[i], s2 * hrv[j])
                    if r is not None and np.linalg.norm(r.T @ r - np.eye(3)) < 1e-6:
                        yield r


def test_t_into_o_embedding_count_matches_brute_force():
    from swarm3d.symmetry.groups import canonical_axes

    arr = detect_rotation_group(shapes.cube())
    host_dirs = np.array([a.direction for a in arr.axes])
    maps = set()
    for r in _candidate_rotations(canonical_elements(T), arr.elements):
        if not _contained(r @ canonical_elements(T) @ r.T, arr.elements):
            continue
        m = []
        for ax in canonical_axes(T):
            v = r @ np.asarray(ax.direction)
            dots = host_dirs @ v
            j = int(np.argmax(np.abs(dots)))
            m.append((j, 0 if not ax.oriented else 1 if dots[j] > 0 else -1))
        maps.add(tuple(m))
    embs = enumerate_embeddings(T, arr)
    assert len(_subgroup_copies(T, arr.elements)) == 1
    assert {e.axis_map for e in embs} == maps
    assert len(embs) == len(maps)
