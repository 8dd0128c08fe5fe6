"""Geometric primitives: tolerances, rotations, enclosing balls, similarity.

Configurations are plain ``(n, 3)`` float arrays. Repeated rows encode
multiplicity, so the same array type serves for sets and multisets.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.spatial import cKDTree

DEFAULT_REL_EPS = 1e-9
DEFAULT_ABS_EPS = 1e-12


@dataclass(frozen=True)
class Tolerance:
    """Two-level geometric tolerance: relative to a length scale plus a floor."""

    rel_eps: float = DEFAULT_REL_EPS
    abs_eps: float = DEFAULT_ABS_EPS

    def __post_init__(self):
        if not (0 < self.rel_eps < 1e-2 and 0 < self.abs_eps < 1e-2):
            raise ValueError("tolerances must be positive and small")

    def length(self, scale: float) -> float:
        """Absolute distance tolerance for a configuration of size ``scale``."""
        return self.rel_eps * max(scale, 0.0) + self.abs_eps


DEFAULT_TOL = Tolerance()


@dataclass(frozen=True)
class Ball:
    center: np.ndarray
    radius: float

    def __post_init__(self):
        if not np.isfinite(self.radius) or self.radius < 0:
            raise ValueError("ball radius must be finite and non-negative")


@dataclass(frozen=True)
class Rotation:
    """Rotation by ``angle`` (radians, in (-pi, pi]) about the unit ``axis``."""

    axis: np.ndarray
    angle: float

    def matrix(self) -> np.ndarray:
        return rotation_matrix(self.axis, self.angle)

    @staticmethod
    def from_matrix(mat: np.ndarray) -> "Rotation":
        axis, angle = axis_angle(mat)
        return Rotation(axis, angle)


@dataclass(frozen=True)
class SimilarityTransform:
    """Maps ``x`` to ``scale * rotation @ x + translation``."""

    rotation: np.ndarray
    translation: np.ndarray
    scale: float
    residual: float = 0.0

    def __post_init__(self):
        if self.scale <= 0:
            raise ValueError("scale must be positive")
        if abs(np.linalg.det(self.rotation) - 1.0) > 1e-6:
            raise ValueError("rotation part must be proper (det = +1)")

    def apply(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        return self.scale * pts @ self.rotation.T + self.translation


def as_points(points) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 3:
        raise ValueError("expected an (n, 3) array of points")
    if not np.all(np.isfinite(pts)):
        raise ValueError("point coordinates must be finite")
    return pts


def cross(a, b) -> np.ndarray:
    """Cross product over the last axis; np.cross's axis handling dominates on small inputs."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    a0, a1, a2 = a[..., 0], a[..., 1], a[..., 2]
    b0, b1, b2 = b[..., 0], b[..., 1], b[..., 2]
    return np.stack([a1 * b2 - a2 * b1, a2 * b0 - a0 * b2, a0 * b1 - a1 * b0], axis=-1)


def unit(v: np.ndarray) -> np.ndarray:
    n = np.linalg.norm(v)
    if n == 0:
        raise ValueError("cannot normalise a zero vector")
    return v / n


def rotation_matrix(axis, angle: float) -> np.ndarray:
    """Right-handed rotation matrix (Rodrigues)."""
    a = unit(np.asarray(axis, dtype=float))
    x, y, z = a
    k = np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])
    return np.eye(3) + np.sin(angle) * k + (1.0 - np.cos(angle)) * (k @ k)


def axis_angle(mat: np.ndarray) -> tuple[np.ndarray, float]:
    """Axis and angle of a proper rotation; the angle lies in [0, pi]."""
    c = np.clip((np.trace(mat) - 1.0) / 2.0, -1.0, 1.0)
    angle = float(np.arccos(c))
    skew = np.array([mat[2, 1] - mat[1, 2], mat[0, 2] - mat[2, 0], mat[1, 0] - mat[0, 1]])
    s = np.linalg.norm(skew)
    if angle < 1e-12:
        return np.array([0.0, 0.0, 1.0]), 0.0
    if s > 1e-6:
        return skew / s, angle
    # near a half turn: R + I = 2 a a^T
    sym = (mat + np.eye(3)) / 2.0
    col = int(np.argmax(np.diag(sym)))
    axis = unit(sym[:, col])
    if s > 0 and np.dot(axis, skew) < 0:
        axis = -axis
    return axis, angle


def frame_from_pair(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Orthonormal right-handed frame (columns) built from two non-parallel vectors."""
    e1 = unit(a)
    e2 = b - np.dot(b, e1) * e1
    e2 = unit(e2)
    e3 = cross(e1, e2)
    return np.column_stack([e1, e2, e3])


def rotation_between_pairs(a, b, a2, b2) -> np.ndarray:
    """Rotation taking the frame of (a, b) to the frame of (a2, b2)."""
    return frame_from_pair(a2, b2) @ frame_from_pair(a, b).T


def perpendicular(v: np.ndarray) -> np.ndarray:
    """Some unit vector perpendicular to ``v`` (deterministic)."""
    v = unit(v)
    trial = np.array([1.0, 0.0, 0.0]) if abs(v[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    return unit(trial - np.dot(trial, v) * v)


def random_rotation(rng: np.random.Generator) -> np.ndarray:
    q = rng.normal(size=4)
    q /= np.linalg.norm(q)
    w, x, y, z = q
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)],
            [2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)],
            [2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)],
        ]
    )


# ---------------------------------------------------------------------------
# enclosing balls


def _ball_through(support: list[np.ndarray]) -> tuple[np.ndarray, float]:
    if not support:
        return np.zeros(3), -1.0
    p0 = support[0]
    if len(support) == 1:
        return p0.copy(), 0.0
    sup = np.array(support)
    a = sup[1:] - p0
    gram = a @ a.T
    rhs = 0.5 * np.diag(gram)
    try:
        lam = np.linalg.solve(gram, rhs)
    except np.linalg.LinAlgError:
        lam, *_ = np.linalg.lstsq(gram, rhs, rcond=None)
    center = p0 + lam @ a
    radius = float(np.max(np.linalg.norm(sup - center, axis=1)))
    return center, radius


def _welzl(pts: np.ndarray, end: int, support: list[np.ndarray], slack: float):
    """Welzl recursion with move-to-front; reorders ``pts[:end]`` in place."""
    center, radius = _ball_through(support)
    if len(support) == 4:
        return center, radius
    i = 0
    while i < end:
        if radius < 0:
            j = i
        else:
            d = np.linalg.norm(pts[i:end] - center, axis=1)
            out = np.flatnonzero(d > radius + slack)
            if len(out) == 0:
                break
            j = i + int(out[0])
        p = pts[j].copy()
        center, radius = _welzl(pts, j, support + [p], slack)
        pts[1 : j + 1] = pts[0:j].copy()
        pts[0] = p
        i = j + 1
    return center, radius


@functools.lru_cache(maxsize=256)
def _seb_cached(key: bytes, n: int, seed: int) -> tuple[tuple[float, ...], float]:
    pts = np.frombuffer(key, dtype=float).reshape(n, 3)
    uniq = np.unique(pts, axis=0)
    order = np.random.default_rng(seed).permutation(len(uniq))
    shuffled = uniq[order].copy()
    scale = float(np.max(np.abs(shuffled - shuffled.mean(axis=0)))) or 1.0
    center, radius = _welzl(shuffled, len(shuffled), [], 1e-13 * scale)
    # enforce containment exactly despite floating point
    radius = max(radius, float(np.max(np.linalg.norm(pts - center, axis=1))))
    return tuple(float(c) for c in center), float(radius)


def smallest_enclosing_ball(points, seed: int = 0) -> Ball:
    """Smallest enclosing ball by randomized incremental construction.

    The input order is shuffled with a fixed seed, so the result is
    deterministic for a given array.
    """
    pts = np.asarray(points, dtype=float)
    if pts.size == 0:
        raise ValueError("empty point set")
    pts = np.ascontiguousarray(as_points(pts))
    center, radius = _seb_cached(pts.tobytes(), len(pts), seed)
    return Ball(np.array(center), radius)


def innermost_empty_ball(points, center) -> Ball:
    """Largest ball about ``center`` with no point strictly inside."""
    pts = as_points(points)
    c = np.asarray(center, dtype=float)
    return Ball(c, float(np.min(np.linalg.norm(pts - c, axis=1))))


# ---------------------------------------------------------------------------
# similarity


def _shell_labels(radii: np.ndarray, tol: float) -> np.ndarray:
    order = np.argsort(radii, kind="stable")
    labels = np.empty(len(radii), dtype=int)
    current = 0
    prev = None
    for idx in order:
        if prev is not None and radii[idx] - prev > tol:
            current += 1
        labels[idx] = current
        prev = radii[idx]
    return labels


def match_multisets(a: np.ndarray, b: np.ndarray, tol: float) -> Optional[np.ndarray]:
    """Bijection ``perm`` with ``a[i] ~ b[perm[i]]`` within ``tol``, or None.

    Greedy nearest-neighbour first; when two points claim the same partner
    the assignment is settled by a minimum-cost matching.
    """
    if len(a) != len(b):
        return None
    tree = cKDTree(b)
    dist, idx = tree.query(a, k=1)
    if np.max(dist) > tol:
        return None
    if len(np.unique(idx)) == len(idx):
        return idx
    cost = np.linalg.norm(a[:, None, :] - b[None, :, :], axis=2)
    rows, cols = linear_sum_assignment(cost)
    if np.max(cost[rows, cols]) > tol:
        return None
    perm = np.empty(len(a), dtype=int)
    perm[rows] = cols
    return perm


def similar(p, f, tol: Tolerance = DEFAULT_TOL) -> Optional[SimilarityTransform]:
    """Find an orientation-preserving similarity Z with Z(f) = p as multisets."""
    p = as_points(p)
    f = as_points(f)
    if len(p) != len(f):
        raise ValueError("size mismatch")
    if len(p) < 3:
        raise ValueError("similarity needs at least 3 points")
    bp = smallest_enclosing_ball(p)
    bf = smallest_enclosing_ball(f)
    if bp.radius == 0 or bf.radius == 0:
        if bp.radius == bf.radius:
            return SimilarityTransform(np.eye(3), bp.center - bf.center, 1.0)
        return None
    scale = bp.radius / bf.radius
    x = p - bp.center
    y = (f - bf.center) * scale
    eps = tol.length(bp.radius)
    match_eps = 4 * eps
    rx = np.linalg.norm(x, axis=1)
    ry = np.linalg.norm(y, axis=1)
    if np.max(np.abs(np.sort(rx) - np.sort(ry))) > match_eps:
        return None

    def finish(rot: np.ndarray) -> Optional[SimilarityTransform]:
        moved = y @ rot.T
        perm = match_multisets(moved, x, match_eps)
        if perm is None:
            return None
        resid = float(np.max(np.linalg.norm(moved - x[perm], axis=1))) / bp.radius
        trans = bp.center - scale * rot @ bf.center
        return SimilarityTransform(rot, trans, scale, resid)

    # anchor on the outermost shell of f
    outer = np.flatnonzero(ry > ry.max() - match_eps)
    a_idx = outer[0]
    a = y[a_idx]
    off_line = [
        i for i in np.argsort(-ry, kind="stable")
        if np.linalg.norm(cross(unit(a), y[i])) > 1e3 * eps
    ]
    if not off_line:
        # collinear through the centre
        for cand in np.flatnonzero(np.abs(rx - ry[a_idx]) <= match_eps):
            if np.linalg.norm(x[cand]) <= eps:
                continue
            axis = cross(a, x[cand])
            if np.linalg.norm(axis) < 1e-12:
                rot = np.eye(3) if np.dot(a, x[cand]) > 0 else rotation_matrix(perpendicular(a), np.pi)
            else:
                ang = np.arctan2(np.linalg.norm(axis), np.dot(a, x[cand]))
                rot = rotation_matrix(axis, ang)
            res = finish(rot)
            if res is not None:
                return res
        return None
    b_idx = off_line[0]
    b = y[b_idx]
    dab = float(np.dot(a, b))
    a_cands = np.flatnonzero(np.abs(rx - ry[a_idx]) <= match_eps)
    b_cands = np.flatnonzero(np.abs(rx - ry[b_idx]) <= match_eps)
    seen: list[np.ndarray] = []
    for i in a_cands:
        for j in b_cands:
            if i == j and ry[a_idx] > eps:
                continue
            if abs(float(np.dot(x[i], x[j])) - dab) > 8 * match_eps * max(1.0, bp.radius):
                continue
            if np.linalg.norm(cross(x[i], x[j])) < 1e-12:
                continue
            rot = rotation_between_pairs(a, b, x[i], x[j])
            if any(np.allclose(rot, s, atol=1e-9) for s in seen):
                continue
            seen.append(rot)
            res = finish(rot)
            if res is not None:
                return res
    return None


def similarity_residual(p, f) -> float:
    """Relative residual of the best found similarity, inf if none."""
    z = similar(p, f, Tolerance(rel_eps=1e-4))
    return np.inf if z is None else z.residual
