"""Local views and the ordered orbit decomposition they induce."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from ..geom3 import DEFAULT_TOL, Tolerance, as_points, cross, smallest_enclosing_ball
from .detect import Arrangement, _merge, detect_rotation_group

VIEW_QUANTUM = 1e-6


def _quant(v: np.ndarray) -> np.ndarray:
    return np.round(np.asarray(v) / VIEW_QUANTUM).astype(np.int64)


def _rows_sorted(rows: np.ndarray) -> np.ndarray:
    if len(rows) == 0:
        return rows
    return rows[np.lexsort(rows.T[::-1])]


def _view_from(
    x: np.ndarray, labels: np.ndarray, i: int, m: int, radius: float, eps: float
) -> np.ndarray:
    """View of robot ``i`` with robot ``m`` as meridian; ``x`` is centered."""
    e3 = x[i] / np.linalg.norm(x[i])
    xm = x[m] - (x[m] @ e3) * e3
    e1 = xm / np.linalg.norm(xm)
    e2 = cross(e3, e1)
    amp = np.linalg.norm(x, axis=1)
    c1, c2, c3 = x @ e1, x @ e2, x @ e3
    perp = np.hypot(c1, c2)
    lat = np.arctan2(c3, perp)
    lon = np.mod(np.arctan2(c2, c1), 2 * np.pi)
    lon[perp <= eps] = 0.0
    lat[amp <= eps] = 0.0
    q_amp = _quant(amp / radius)
    q_lon = _quant(lon)
    q_lon[q_lon >= _quant(2 * np.pi)] = 0
    q_lat = _quant(lat)
    rows = np.column_stack([q_amp, q_lon, q_lat, labels])
    rest = np.ones(len(x), dtype=bool)
    rest[[i, m]] = False
    return np.vstack([rows[i], rows[m], _rows_sorted(rows[rest])])


def _compare(a: np.ndarray, b: np.ndarray) -> int:
    fa, fb = a.ravel(), b.ravel()
    diff = np.flatnonzero(fa != fb)
    if len(diff) == 0:
        return 0
    k = diff[0]
    return -1 if fa[k] < fb[k] else 1


def view_key(view: np.ndarray) -> tuple:
    return tuple(view.ravel().tolist())


def local_view(
    points,
    i: int,
    labels: Optional[Sequence[int]] = None,
    tol: Tolerance = DEFAULT_TOL,
    ball=None,
) -> np.ndarray:
    """Frame-independent description of the configuration seen from robot ``i``.

    Rows are (amplitude, longitude, latitude, label) quantized to integers;
    row 0 is robot ``i`` itself, row 1 the meridian robot, the rest sorted.
    Amplitude is relative to the enclosing-ball radius, angles in radians.
    The earth axis runs from the ball center through robot ``i``; among
    the off-axis robots nearest to the center, the meridian is the one
    giving the smallest view.
    """
    pts = as_points(points)
    if ball is None:
        ball = smallest_enclosing_ball(pts)
    radius = ball.radius if ball.radius > 0 else 1.0
    eps = tol.length(radius)
    x = pts - ball.center
    lab = np.zeros(len(pts), dtype=np.int64) if labels is None else np.asarray(labels, dtype=np.int64)
    if np.linalg.norm(x[i]) <= eps:
        raise ValueError("center robot has no axis")
    e3 = x[i] / np.linalg.norm(x[i])
    perp = np.linalg.norm(cross(e3, x), axis=1)
    off = np.flatnonzero(perp > 8 * eps)
    if len(off) == 0:
        # collinear configuration: no meridian, views reduce to heights
        h = _quant(x @ e3 / radius)
        rows = np.column_stack([h, np.zeros_like(h), np.zeros_like(h), lab])
        rest = np.ones(len(x), dtype=bool)
        rest[i] = False
        return np.vstack([rows[i], _rows_sorted(rows[rest])])
    amp = np.linalg.norm(x[off], axis=1)
    cands = off[amp <= amp.min() + 8 * eps]
    if len(cands) > 1:
        # the meridian's own row comes right after robot i's row, so only
        # candidates with the smallest such row can give the smallest view
        c3 = x[cands] @ e3
        perp_c = np.linalg.norm(x[cands] - np.outer(c3, e3), axis=1)
        head = np.column_stack([
            _quant(np.linalg.norm(x[cands], axis=1) / radius),
            _quant(np.arctan2(c3, perp_c)),
            lab[cands],
        ])
        keep = np.all(head == head[np.lexsort(head.T[::-1])[0]], axis=1)
        cands = cands[keep]
    best = None
    for m in cands:
        v = _view_from(x, lab, i, int(m), radius, 8 * eps)
        if best is None or _compare(v, best) < 0:
            best = v
    return best


def view_seed(view: np.ndarray, seed: int) -> int:
    """Deterministic integer seed from a view and a global seed."""
    h = hashlib.sha256()
    h.update(np.int64(seed).tobytes())
    h.update(np.ascontiguousarray(view, dtype=np.int64).tobytes())
    return int.from_bytes(h.digest()[:8], "little")


# ---------------------------------------------------------------------------
# orbits


def orbits(points, elems: np.ndarray, center: np.ndarray, tol: float) -> list[list[int]]:
    """Orbit partition of distinct ``points`` under the rotations ``elems``."""
    pts = np.asarray(points, dtype=float)
    n = len(pts)
    x = pts - center
    moved = np.einsum("mij,nj->mni", np.asarray(elems), x).reshape(-1, 3) + center
    dist, idx = cKDTree(pts).query(moved, k=1)
    if dist.max() > tol:
        raise ValueError("arrangement does not act on the configuration")
    src = np.tile(np.arange(n), len(elems))
    graph = coo_matrix((np.ones(len(src)), (src, idx)), shape=(n, n))
    _, labels = connected_components(graph, directed=False)
    groups: dict[int, list[int]] = {}
    for a in range(n):
        groups.setdefault(int(labels[a]), []).append(a)
    return list(groups.values())


@dataclass(frozen=True)
class OrbitDecomposition:
    """Orbits as lists of point indices, with foldings and (optionally) views.

    ``ordered`` is False for multisets, where the ordering of orbits at
    shared positions is not agreed upon.
    """

    orbits: tuple[tuple[int, ...], ...]
    foldings: tuple[int, ...]
    views: tuple[Optional[tuple], ...]
    ordered: bool = True

    def __len__(self) -> int:
        return len(self.orbits)

    def orbit_of(self) -> np.ndarray:
        n = sum(len(o) for o in self.orbits)
        out = np.empty(n, dtype=int)
        for k, o in enumerate(self.orbits):
            out[list(o)] = k
        return out


def decompose(
    points,
    arr: Optional[Arrangement] = None,
    tol: Tolerance = DEFAULT_TOL,
    labels: Optional[Sequence[int]] = None,
    elems: Optional[np.ndarray] = None,
) -> OrbitDecomposition:
    """Orbit decomposition ordered by local views (inner orbits first).

    ``elems`` overrides the rotations used (a subgroup of ``arr``), giving
    a G-decomposition. ``labels`` distinguish points of different kinds,
    e.g. robots and target points, inside the views. Multisets get an
    unordered decomposition of their distinct positions.
    """
    pts = as_points(points)
    if arr is None:
        arr = detect_rotation_group(pts, tol)
    if arr.kind.infinite:
        raise ValueError("unsupported: collinear configuration (C_inf / D_inf)")
    ball = smallest_enclosing_ball(pts)
    radius = ball.radius if ball.radius > 0 else 1.0
    eps = tol.length(radius)
    rot = arr.elements if elems is None else np.asarray(elems)
    uniq, mult, label_of = _merge(pts, eps)
    if np.any(mult > 1):
        orbs = orbits(uniq, rot, arr.center, 8 * eps)
        members = []
        for o in orbs:
            members.append(tuple(int(i) for i in np.flatnonzero(np.isin(label_of, o))))
        fold = tuple(len(rot) // len(o) for o in orbs)
        return OrbitDecomposition(tuple(members), fold, tuple(None for _ in orbs), ordered=False)
    orbs = orbits(pts, rot, arr.center, 8 * eps)
    keyed = []
    for o in orbs:
        rep = o[0]
        if np.linalg.norm(pts[rep] - ball.center) <= 8 * eps:
            view = np.zeros((1, 4), dtype=np.int64)
        else:
            view = local_view(pts, rep, labels, tol, ball)
        keyed.append((view_key(view), min(o), o))
    keyed.sort(key=lambda t: (t[0], t[1]))
    return OrbitDecomposition(
        tuple(tuple(o) for _, _, o in keyed),
        tuple(len(rot) // len(o) for _, _, o in keyed),
        tuple(k for k, _, _ in keyed),
    )
