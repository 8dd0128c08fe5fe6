"""Placing the target pattern inside the robots' enclosing ball.

The placed copy F~ shares the robots' smallest enclosing ball, and the
robots' rotation group acts on it without fixed points, so every robot
orbit can be matched with a full orbit of targets.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import linear_sum_assignment

from ..geom3 import (
    DEFAULT_TOL,
    SimilarityTransform,
    Tolerance,
    as_points,
    cross,
    frame_from_pair,
    rotation_matrix,
    smallest_enclosing_ball,
    unit,
)
from ..symmetry.detect import Arrangement, _merge, detect_rotation_group, group_acts
from ..symmetry.embeddings import acts_freely, enumerate_embeddings
from ..symmetry.groups import C1, is_subgroup
from ..symmetry.views import OrbitDecomposition, decompose
from .common import Analysis, analyze
from .psisym import is_regular_polygon


@dataclass(frozen=True)
class ReferencePolygon:
    """Regular polygon in the plane through ``center`` perpendicular to ``normal``."""

    center: np.ndarray
    normal: np.ndarray
    vertices: np.ndarray


@dataclass(frozen=True)
class EmbeddedTarget:
    points: np.ndarray
    source: np.ndarray
    transform: SimilarityTransform


# ---------------------------------------------------------------------------
# reference polygons


@dataclass
class _Structure:
    """Distinct positions of a (multi)set with their ordered orbits."""

    uniq: np.ndarray
    mult: np.ndarray
    arr: Arrangement
    dec: OrbitDecomposition
    eps: float


def _structure(points, tol: Tolerance, arr: Optional[Arrangement] = None) -> _Structure:
    pts = as_points(points)
    if arr is None:
        arr = detect_rotation_group(pts, tol)
    if arr.kind.infinite:
        raise ValueError("unsupported: collinear configuration (C_inf / D_inf)")
    ball = smallest_enclosing_ball(pts)
    eps = tol.length(ball.radius if ball.radius > 0 else 1.0)
    uniq, mult, _ = _merge(pts, eps)
    dec = decompose(uniq, arr, tol, labels=mult)
    return _Structure(uniq, mult, arr, dec, eps)


def _project(x: np.ndarray, center: np.ndarray, normal: np.ndarray) -> np.ndarray:
    y = x - center
    return center + y - np.outer(y @ normal, normal)


def _axis_index(arr: Arrangement, axis) -> int:
    if isinstance(axis, (int, np.integer)):
        return int(axis)
    for j, a in enumerate(arr.axes):
        if abs(abs(float(a.direction @ axis.direction)) - 1.0) < 1e-9:
            return j
    raise ValueError("axis does not belong to the arrangement")


def _c1_polygon(st: _Structure) -> ReferencePolygon:
    center = st.arr.center
    order = [i for o in st.dec.orbits for i in o]
    x = st.uniq[order] - center
    far = [k for k in range(len(x)) if np.linalg.norm(x[k]) > 8 * st.eps]
    if not far:
        raise ValueError("unsupported degenerate input")
    normal = unit(x[far[0]])
    for k in far[1:]:
        if np.linalg.norm(cross(normal, x[k])) > 8 * st.eps:
            return ReferencePolygon(center, normal, _project(st.uniq[order[k]][None], center, normal))
    raise ValueError("unsupported: collinear configuration (C_inf / D_inf)")


def _orbit_points(st: _Structure, k: int) -> np.ndarray:
    return st.uniq[list(st.dec.orbits[k])]


def _off_axis(st: _Structure, k: int, d: np.ndarray) -> bool:
    rep = st.uniq[st.dec.orbits[k][0]] - st.arr.center
    return bool(np.linalg.norm(cross(rep, d)) > 8 * st.eps)


def _twisted(q: np.ndarray, center: np.ndarray, z: np.ndarray, x0: np.ndarray, l: int) -> np.ndarray:
    """Rotate each base of a dihedral orbit onto the planes spanned by the
    principal axis and a secondary axis, turning right-handedly about the
    direction from that base toward the center."""
    y0 = cross(z, x0)
    y = q - center
    h = y @ z
    phi = np.arctan2(y @ y0, y @ x0)
    step = np.pi / l
    t = phi / step
    snapped = np.where(h > 0, np.floor(t + 1e-9), np.ceil(t - 1e-9)) * step
    rad = np.linalg.norm(y - np.outer(h, z), axis=1)
    return center + np.outer(rad * np.cos(snapped), x0) + np.outer(rad * np.sin(snapped), y0)


def _rounded_unique(v: np.ndarray, scale: float) -> np.ndarray:
    _, idx = np.unique(np.round(v / (1e-7 * scale)), axis=0, return_index=True)
    return v[np.sort(idx)]


def _polyhedral_polygon(arr: Arrangement, j: int, radius: float) -> ReferencePolygon:
    d = arr.axes[j].direction
    others = [(k, a) for k, a in enumerate(arr.axes) if k != j]
    dots = np.array([abs(float(a.direction @ d)) for _, a in others])
    near = [others[i] for i in np.flatnonzero(dots >= dots.max() - 1e-9)]
    top = max(a.fold for _, a in near)
    dirs = []
    for _, a in near:
        if a.fold != top:
            continue
        dirs.append(a.direction)
        if not a.oriented:
            dirs.append(-a.direction)
    verts = _project(arr.center + radius * np.array(dirs), arr.center, d)
    verts = arr.center + radius * np.array([unit(v - arr.center) for v in verts])
    return ReferencePolygon(arr.center, d, _rounded_unique(verts, radius))


def reference_polygon(
    points,
    arr: Optional[Arrangement] = None,
    axis=None,
    tol: Tolerance = DEFAULT_TOL,
) -> ReferencePolygon:
    """Intrinsic regular polygon anchoring rotations about ``axis``.

    Cyclic groups project the first orbit off the axis onto the equator
    (for C1 the axis is the line to the first robot off the center).
    Dihedral groups about the principal axis use the first orbit lying on
    the secondary axes, or else twist the first free orbit into a prism
    and project it; about a secondary axis the polygon is the pair of
    principal-axis points on the ball. Polyhedral groups use the nearest
    highest-fold axes around ``axis``.
    """
    st = _structure(points, tol, arr)
    arr = st.arr
    if arr.kind == C1:
        return _c1_polygon(st)
    j = 0 if axis is None else _axis_index(arr, axis)
    d = arr.axes[j].direction
    radius = float(np.max(np.linalg.norm(st.uniq - arr.center, axis=1)))
    if arr.kind.family == "C":
        for k in range(len(st.dec)):
            if _off_axis(st, k, d):
                return ReferencePolygon(arr.center, d, _project(_orbit_points(st, k), arr.center, d))
        raise ValueError("unsupported: collinear configuration (C_inf / D_inf)")
    if arr.kind.family == "D":
        l = arr.kind.n
        if not arr.axes[j].principal and not (j == 0 and arr.principal_axis is None):
            z = arr.axes[0].direction
            return ReferencePolygon(arr.center, d, arr.center + radius * np.array([z, -z]))
        secondaries = [a.direction for k, a in enumerate(arr.axes) if k != j]
        for k in range(len(st.dec)):
            if st.dec.foldings[k] == 2 and _off_axis(st, k, d):
                return ReferencePolygon(arr.center, d, _project(_orbit_points(st, k), arr.center, d))
        for k in range(len(st.dec)):
            if st.dec.foldings[k] == 1:
                q = _twisted(_orbit_points(st, k), arr.center, d, secondaries[0], l)
                return ReferencePolygon(arr.center, d, _rounded_unique(q, radius))
        raise ValueError("unsupported degenerate input")
    return _polyhedral_polygon(arr, j, radius)


# ---------------------------------------------------------------------------
# embedding


def _placement(p_ball, f_ball, rot: np.ndarray) -> SimilarityTransform:
    s = p_ball.radius / f_ball.radius
    return SimilarityTransform(rot, p_ball.center - s * rot @ f_ball.center, s)


def _assignment_cost(p: np.ndarray, q: np.ndarray) -> float:
    cost = np.linalg.norm(p[:, None, :] - q[None, :, :], axis=2)
    r, c = linear_sum_assignment(cost)
    return float(cost[r, c].sum())


def _cyclic_frame(a: Analysis) -> tuple[np.ndarray, np.ndarray]:
    """Intrinsic (axis, reference direction) of a cyclic or trivial group."""
    poly = reference_polygon(a.points, a.arr, 0 if a.arr.axes else None, a.tol)
    v = unit(poly.vertices[0] - poly.center)
    return poly.normal, v


def _cyclic_candidates(a: Analysis, st: _Structure) -> list[np.ndarray]:
    """Rotations taking target coordinates to robot coordinates (about the centers)."""
    k = a.arr.kind.n
    z_p, x_p = _cyclic_frame(a)
    phi_p = frame_from_pair(z_p, x_p)
    out = []
    if st.arr.kind == C1:
        poly = _c1_polygon(st)
        phi_f = frame_from_pair(poly.normal, unit(poly.vertices[0] - poly.center))
        return [phi_p @ phi_f.T]
    hosts = []
    for j, ax in enumerate(st.arr.axes):
        if ax.fold % k:
            continue
        if k > 1:
            elems = np.array([
                rotation_matrix(ax.direction, 2 * np.pi * i / k) for i in range(k)
            ])
            if not acts_freely(st.uniq, st.mult, st.arr.center, elems, 8 * st.eps):
                continue
        hosts.append(j)
    if not hosts:
        raise ValueError("infeasible: no free axis for the robots' group in the target")
    top = max(st.arr.axes[j].fold for j in hosts)
    for j in hosts:
        if st.arr.axes[j].fold != top:
            continue
        poly = reference_polygon(st.uniq, st.arr, j, a.tol)
        for sign in (1.0, -1.0):
            z_f = sign * st.arr.axes[j].direction
            for v in poly.vertices:
                phi_f = frame_from_pair(z_f, unit(v - poly.center))
                out.append(phi_p @ phi_f.T)
    return out


def _group_candidates(a: Analysis, st: _Structure, free: bool) -> list[np.ndarray]:
    kind = a.arr.kind
    embs = enumerate_embeddings(kind, st.arr)
    if free:
        embs = [
            e for e in embs
            if acts_freely(st.uniq, st.mult, st.arr.center, e.elements(), 8 * st.eps)
        ]
    if not embs:
        raise ValueError(f"infeasible: {kind} does not embed freely into the target group")
    if kind.family == "D":
        top = max(st.arr.axes[e.axis_map[0][0]].fold for e in embs)
        embs = [e for e in embs if st.arr.axes[e.axis_map[0][0]].fold == top]
    return [a.arr.frame @ e.rotation.T for e in embs]


def _point_key(x: np.ndarray, scale: float) -> bytes:
    q = np.round(x / (1e-7 * scale)).astype(np.int64)
    return q[np.lexsort(q.T[::-1])].tobytes()


def embed_target(
    points,
    target,
    tol: Tolerance = DEFAULT_TOL,
    analysis: Optional[Analysis] = None,
) -> EmbeddedTarget:
    """Similar copy F~ of ``target`` sharing the robots' enclosing ball, with
    the robots' rotation group acting freely on it.

    Among the admissible placements the one needing the least total travel
    is used.
    """
    a = analysis or analyze(points, tol)
    f = as_points(target)
    if len(f) != len(a.points):
        raise ValueError("size mismatch")
    st = _structure(f, tol)
    f_ball = smallest_enclosing_ball(f)
    if f_ball.radius == 0:
        raise ValueError("unsupported degenerate input")
    kind = a.arr.kind
    if not is_subgroup(kind, st.arr.kind):
        raise ValueError(f"infeasible: {kind} is not a subgroup of the target's {st.arr.kind}")
    if kind.family == "C":
        rots = _cyclic_candidates(a, st)
    elif is_regular_polygon(a):
        rots = _group_candidates(a, st, free=False)
    else:
        rots = _group_candidates(a, st, free=True)
    best = None
    seen: set = set()
    for rot in rots:
        z = _placement(a.ball, f_ball, rot)
        ft = z.apply(f)
        key = _point_key(ft - a.center, a.ball.radius)
        if key in seen:
            continue
        seen.add(key)
        cost = _assignment_cost(a.points, ft)
        if best is None or cost < best[0] - 1e-9 * a.ball.radius * len(f):
            best = (cost, ft, z)
    _, ft, z = best
    if kind != C1 and not group_acts(ft, a.arr, tol):
        raise RuntimeError("embedded target is not invariant under the robots' group")
    return EmbeddedTarget(ft, f, z)
