"""Symmetry-breaking phase: drive the swarm to a configuration whose
rotation group acts without fixed robots.

One orbit moves per round. Moves either shrink an orbit toward the
center of the enclosing ball, push the outermost orbit out to the ball,
or scatter an innermost orbit off every rotation axis (random direction,
a corner of a small prism, or the center of an adjacent face).
"""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np
from scipy.spatial import ConvexHull

from ..geom3 import DEFAULT_TOL, Tolerance, cross, smallest_enclosing_ball, unit
from ..symmetry.detect import Arrangement, LocalFrame
from ..symmetry.groups import C1, D, GroupKind, O, I
from .common import (
    Analysis,
    ChoiceSeed,
    MoveSet,
    analyze,
    choose,
    rank_in_frame,
    resolve_frames,
    robot_rng,
)

AXIS_CLEARANCE = 1e-3  # radians kept between a random direction and any axis


# ---------------------------------------------------------------------------
# axis bookkeeping


def _on_line(x: np.ndarray, d: np.ndarray, eps: float) -> bool:
    return bool(np.linalg.norm(cross(x, d)) <= eps)


def _orbit_axis(a: Analysis, k: int) -> Optional[int]:
    """Index of an axis through a representative of orbit ``k``, if any."""
    rep = a.points[a.decomposition.orbits[k][0]] - a.arr.center
    for j, ax in enumerate(a.arr.axes):
        if _on_line(rep, ax.direction, 8 * a.eps):
            return j
    return None


def _center_robot(a: Analysis) -> Optional[int]:
    d = np.linalg.norm(a.points - a.ball.center, axis=1)
    hits = np.flatnonzero(d <= 8 * a.eps)
    return int(hits[0]) if len(hits) else None


def is_regular_polygon(a: Analysis) -> bool:
    n = len(a.points)
    return (
        n >= 3
        and a.arr.kind == D(n)
        and len(a.decomposition) == 1
        and a.decomposition.foldings[0] == 2
    )


def psi_sym_terminal(points, tol: Tolerance = DEFAULT_TOL, analysis: Optional[Analysis] = None) -> bool:
    """True when the symmetry-breaking phase has nothing left to do."""
    a = analysis or analyze(points, tol)
    if a.arr.kind == C1 or is_regular_polygon(a):
        return True
    if _center_robot(a) is not None:
        return False
    return all(_orbit_axis(a, k) is None for k in range(len(a.decomposition)))


# ---------------------------------------------------------------------------
# elementary moves


def shrink_targets(points: np.ndarray, movers: Sequence[int], base: np.ndarray) -> list:
    """Move ``movers`` radially to half the inner radius of ``base``."""
    ball = smallest_enclosing_ball(base)
    r = float(np.min(np.linalg.norm(base - ball.center, axis=1)))
    out: list = [None] * len(points)
    for i in movers:
        out[i] = ball.center + 0.5 * r * unit(points[i] - ball.center)
    return out


def _expand_targets(a: Analysis, movers: Sequence[int]) -> list:
    out: list = [None] * len(a.points)
    for i in movers:
        out[i] = a.center + 2.0 * a.ball.radius * unit(a.points[i] - a.center)
    return out


def _avoid_dirs(arr: Arrangement) -> tuple[np.ndarray, Optional[np.ndarray]]:
    dirs = np.array([ax.direction for ax in arr.axes]) if arr.axes else np.zeros((0, 3))
    pole = None
    if arr.kind.family in "CD" and arr.axes:
        p = arr.principal_axis or arr.axes[0]
        pole = p.direction
    return dirs, pole


def sphere_point(
    center: np.ndarray,
    radius: float,
    arr: Arrangement,
    frame: LocalFrame,
    rng: np.random.Generator,
) -> np.ndarray:
    """Random point on a sphere, at least ``AXIS_CLEARANCE`` from every axis
    (and from the equator of a cyclic or dihedral group)."""
    dirs, pole = _avoid_dirs(arr)
    s = np.sin(AXIS_CLEARANCE)
    for _ in range(1000):
        v = rng.normal(size=3)
        if np.linalg.norm(v) < 1e-9:
            continue
        u = unit(frame.basis @ v)
        if len(dirs) and np.min(np.linalg.norm(cross(dirs, u), axis=1)) < s:
            continue
        if pole is not None and abs(float(u @ pole)) < s:
            continue
        return center + radius * u
    raise RuntimeError("could not sample a direction away from the axes")


def reference_prism(center: np.ndarray, radius: float, arr: Arrangement) -> np.ndarray:
    """Corners of the small prism used to break a dihedral symmetry.

    The layers sit at heights +-(sqrt(3)/4) r on the principal axis and
    each carries a point at distance r/4 along every secondary direction,
    so all corners lie at distance r/2 from the center.
    """
    if arr.kind.family != "D":
        raise ValueError("reference prism needs a dihedral arrangement")
    zi = next((j for j, ax in enumerate(arr.axes) if ax.principal), 0)
    z = arr.axes[zi].direction
    secondaries = [ax.direction for j, ax in enumerate(arr.axes) if j != zi]
    signed = []
    for s in secondaries:
        signed.append(s)
        signed.append(-s)
    out = []
    h = np.sqrt(3.0) / 4.0 * radius
    for sign in (1.0, -1.0):
        for s in signed:
            out.append(center + sign * h * z + 0.25 * radius * s)
    return np.array(out)


def _nearest_options(p: np.ndarray, options: np.ndarray, scale: float) -> np.ndarray:
    d = np.linalg.norm(options - p, axis=1)
    return options[d <= d.min() + 1e-9 * scale]


def _polyhedron_faces(q: np.ndarray, scale: float) -> list[np.ndarray]:
    """Vertex index arrays of the faces of a convex polyhedron."""
    hull = ConvexHull(q)
    eq = hull.equations / np.array([1.0, 1.0, 1.0, scale])
    # coplanar triangles of the hull share (nearly) identical plane equations
    _, plane = np.unique(np.round(eq, 6), axis=0, return_inverse=True)
    plane = plane.ravel()
    return [np.unique(hull.simplices[plane == k]) for k in range(plane.max() + 1)]


def _allowed_face_size(kind: GroupKind, folding: int) -> Optional[int]:
    # for the two vertex-transitive shapes with two face types, only one
    # type keeps the destinations off every axis of the orbit's symmetry
    if folding == 2 and kind == O:
        return 3
    if folding == 2 and kind == I:
        return 5
    return None


def _face_data(q: np.ndarray, a: Analysis):
    scale = float(np.max(np.linalg.norm(q - a.center, axis=1)))
    faces = _polyhedron_faces(q, scale)
    size = _allowed_face_size(a.arr.kind, len(a.arr.elements) // len(q))
    if size is not None:
        faces = [f for f in faces if len(f) == size]
    gaps = np.linalg.norm(q[:, None, :] - q[None, :, :], axis=2)
    edge = float(np.min(gaps[gaps > 1e-9 * scale]))
    centers = np.array([q[f].mean(axis=0) for f in faces])
    incident = np.zeros((len(q), len(faces)), dtype=bool)
    for j, f in enumerate(faces):
        incident[f, j] = True
    return centers, incident, edge / 100.0


def go_to_center_targets(
    a: Analysis,
    k: int,
    frames: Sequence[LocalFrame],
    seed: ChoiceSeed,
) -> list:
    """Each robot of orbit ``k`` heads for the center of an adjacent face of
    the polyhedron spanned by that orbit."""
    members = list(a.decomposition.orbits[k])
    q = a.points[members]
    if ("faces", k) not in a.cache:
        a.cache[("faces", k)] = _face_data(q, a)
    centers, incident, step = a.cache[("faces", k)]
    out: list = [None] * len(a.points)
    draw: dict[int, int] = {}
    for local_idx, i in enumerate(members):
        own = centers[incident[local_idx]]
        if len(own) == 0:
            raise RuntimeError("robot is not on a face of its orbit polyhedron")
        # robots of one orbit share a view and hence the same first draw
        if len(own) not in draw:
            draw[len(own)] = int(robot_rng(seed, a.view_of(i)).integers(len(own)))
        c = own[rank_in_frame(own, frames[i])[draw[len(own)]]]
        out[i] = c + step * unit(a.points[i] - c)
    return out


def go_to_center_step(
    points,
    seed: ChoiceSeed | int = 0,
    frames: Optional[Sequence[LocalFrame]] = None,
    tol: Tolerance = DEFAULT_TOL,
    analysis: Optional[Analysis] = None,
) -> MoveSet:
    """Go-to-center on a configuration that is one polyhedral orbit."""
    a = analysis or analyze(points, tol)
    if not a.arr.kind.polyhedral or len(a.decomposition) != 1:
        raise ValueError("go-to-center needs a single orbit of a polyhedral group")
    seed = seed if isinstance(seed, ChoiceSeed) else ChoiceSeed(int(seed))
    frames = resolve_frames(a.points, frames)
    return MoveSet(go_to_center_targets(a, 0, frames, seed), "go-to-center", 0)


# ---------------------------------------------------------------------------
# the round


def _first_on(a: Analysis, axes: Sequence[int]) -> Optional[int]:
    wanted = set(axes)
    for k in range(len(a.decomposition)):
        j = _orbit_axis(a, k)
        if j is not None and j in wanted:
            return k
    return None


def _sphere_moves(a: Analysis, movers, radius: float, frames, seed) -> list:
    out: list = [None] * len(a.points)
    for i in movers:
        rng = robot_rng(seed, a.view_of(i))
        out[i] = sphere_point(a.center, radius, a.arr, frames[i], rng)
    return out


def _corner_moves(a: Analysis, movers, frames, seed) -> list:
    prism = reference_prism(a.center, a.inner_radius, a.arr)
    out: list = [None] * len(a.points)
    for i in movers:
        opts = _nearest_options(a.points[i], prism, a.ball.radius)
        out[i] = opts[choose(opts, frames[i], robot_rng(seed, a.view_of(i)))]
    return out


def psi_sym_step(
    points,
    seed: ChoiceSeed | int = 0,
    frames: Optional[Sequence[LocalFrame]] = None,
    tol: Tolerance = DEFAULT_TOL,
    analysis: Optional[Analysis] = None,
) -> MoveSet:
    """Destinations for one round of the symmetry-breaking phase."""
    a = analysis or analyze(points, tol)
    pts = a.points
    n = len(pts)
    if len(np.unique(np.round(pts / max(a.ball.radius, 1e-300) / 1e-9), axis=0)) != n:
        raise ValueError("symmetry breaking expects distinct robot positions")
    if psi_sym_terminal(pts, tol, a):
        raise ValueError("already terminal")
    seed = seed if isinstance(seed, ChoiceSeed) else ChoiceSeed(int(seed))
    frames = resolve_frames(pts, frames)
    dec = a.decomposition
    kind = a.arr.kind

    c = _center_robot(a)
    if c is not None:
        rest = np.delete(pts, c, axis=0)
        r = float(np.min(np.linalg.norm(rest - a.center, axis=1)))
        k = int(a.orbit_of[c])
        return MoveSet(_sphere_moves(a, [c], 0.5 * r, frames, seed), "go-to-sphere", k)

    last = len(dec) - 1
    on_ball = set(np.flatnonzero(np.linalg.norm(pts - a.center, axis=1) >= a.ball.radius - 8 * a.eps).tolist())
    if kind.family != "C" and on_ball != set(dec.orbits[last]):
        return MoveSet(_expand_targets(a, dec.orbits[last]), "expand", last)

    if kind.family == "C":
        k = _first_on(a, [0])
        members = list(dec.orbits[k])
        if k != 0:
            others = np.delete(pts, members, axis=0)
            return MoveSet(shrink_targets(pts, members, others), "shrink", k)
        return MoveSet(_sphere_moves(a, members, 0.5 * a.inner_radius, frames, seed), "go-to-sphere", k)

    if kind.family == "D":
        principal = next((j for j, ax in enumerate(a.arr.axes) if ax.principal), 0)
        k = _first_on(a, [principal])
        if k is None:
            k = _first_on(a, [j for j in range(len(a.arr.axes)) if j != principal])
        members = list(dec.orbits[k])
        if k != 0:
            return MoveSet(shrink_targets(pts, members, pts), "shrink", k)
        return MoveSet(_corner_moves(a, members, frames, seed), "go-to-corner", k)

    occupied = [j for j in range(len(a.arr.axes)) if _first_on(a, [j]) is not None]
    top = max(a.arr.axes[j].fold for j in occupied)
    k = _first_on(a, [j for j in occupied if a.arr.axes[j].fold == top])
    members = list(dec.orbits[k])
    if k != 0:
        return MoveSet(shrink_targets(pts, members, pts), "shrink", k)
    return MoveSet(go_to_center_targets(a, k, frames, seed), "go-to-center", k)
