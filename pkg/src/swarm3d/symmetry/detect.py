"""Detection of the rotation group of a point (multi)set and of a set of frames."""

from __future__ import annotations

from collections import OrderedDict
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.spatial import cKDTree

from ..geom3 import (
    DEFAULT_TOL,
    Tolerance,
    as_points,
    axis_angle,
    cross,
    frame_from_pair,
    perpendicular,
    rotation_between_pairs,
    rotation_matrix,
    smallest_enclosing_ball,
    unit,
)
from .groups import (
    C1,
    GroupKind,
    I,
    O,
    T,
    canonical_axes,
    canonical_elements,
    classify_elements,
    element_lines,
)


@dataclass(frozen=True)
class Axis:
    direction: np.ndarray
    fold: int
    oriented: bool
    principal: bool = False
    occupied: bool = False

    def __repr__(self) -> str:
        d = np.round(self.direction, 4).tolist()
        flags = "".join(
            c for c, on in (("o", self.oriented), ("p", self.principal), ("*", self.occupied)) if on
        )
        return f"Axis({self.fold}, {d}, {flags})"


@dataclass(frozen=True)
class Arrangement:
    """A concrete placement of a rotation group.

    ``elements[j] = frame @ canonical_elements(kind)[j] @ frame.T`` and
    ``axes[j]`` is the image of ``canonical_axes(kind)[j]``, so canonical
    lookup tables apply by index.
    """

    kind: GroupKind
    center: np.ndarray
    axes: tuple[Axis, ...]
    elements: np.ndarray
    frame: np.ndarray
    principal_distinguished: bool = True
    line: Optional[np.ndarray] = None  # direction for collinear kinds

    @property
    def order(self) -> int:
        return len(self.elements)

    def apply(self, j: int, points: np.ndarray) -> np.ndarray:
        return (points - self.center) @ self.elements[j].T + self.center

    @property
    def principal_axis(self) -> Optional[Axis]:
        for a in self.axes:
            if a.principal:
                return a
        return None

    def occupied_classes(self) -> set:
        return {(a.fold, i) for i, a in enumerate(self.axes) if a.occupied}


# ---------------------------------------------------------------------------
# point-set signatures used to pick intrinsic orientations


def _quantize(values: np.ndarray, scale: float, q: float = 1e-6) -> np.ndarray:
    return np.round(values / (q * max(scale, 1e-300))).astype(np.int64)


def _sorted_rows(rows: np.ndarray) -> np.ndarray:
    if len(rows) == 0:
        return rows
    order = np.lexsort(rows.T[::-1])
    return rows[order]


def _compare_arrays(a: np.ndarray, b: np.ndarray) -> int:
    fa, fb = a.ravel(), b.ravel()
    diff = np.flatnonzero(fa != fb)
    if len(diff) == 0:
        return 0
    i = diff[0]
    return -1 if fa[i] < fb[i] else 1


def direction_signature(points: np.ndarray, center: np.ndarray, d: np.ndarray, scale: float) -> np.ndarray:
    """Quantized description of a point set as seen along direction ``d``."""
    x = points - center
    h = x @ d
    r = np.linalg.norm(x - np.outer(h, d), axis=1)
    single = _sorted_rows(np.column_stack([_quantize(r, scale), _quantize(h, scale)]))
    if len(x) > 80:
        return single
    idx_i, idx_j = np.triu_indices(len(x), 1)
    trip = np.einsum("ij,ij->i", cross(x[idx_i], x[idx_j]), np.broadcast_to(d, (len(idx_i), 3)))
    hi, hj = h[idx_i], h[idx_j]
    lo = np.minimum(hi, hj)
    hi2 = np.maximum(hi, hj)
    dist = np.linalg.norm(x[idx_i] - x[idx_j], axis=1)
    pairs = _sorted_rows(
        np.column_stack(
            [_quantize(dist, scale), _quantize(lo, scale), _quantize(hi2, scale), _quantize(trip, scale * scale)]
        )
    )
    return np.concatenate([single.ravel(), pairs.ravel()])


def orient_direction(points: np.ndarray, center: np.ndarray, d: np.ndarray, scale: float) -> tuple[np.ndarray, bool]:
    """Choose the sign of ``d`` intrinsically; second value is False on a tie."""
    d = unit(d)
    s_pos = direction_signature(points, center, d, scale)
    s_neg = direction_signature(points, center, -d, scale)
    c = _compare_arrays(s_pos, s_neg)
    if c == 0:
        return d, False
    return (d if c > 0 else -d), True


def axis_signature(points: np.ndarray, center: np.ndarray, d: np.ndarray, scale: float) -> np.ndarray:
    """Sign-independent description of the point set around the line ``d``."""
    x = points - center
    h = x @ d
    r = np.linalg.norm(x - np.outer(h, d), axis=1)
    return _sorted_rows(np.column_stack([_quantize(r, scale), _quantize(np.abs(h), scale)])).ravel()


# ---------------------------------------------------------------------------
# symmetry search


def _merge(points: np.ndarray, tol: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Distinct positions, multiplicities, and the index of each input row."""
    tree = cKDTree(points)
    groups = tree.query_ball_point(points, r=tol)
    label = -np.ones(len(points), dtype=int)
    reps = []
    for i in range(len(points)):
        if label[i] >= 0:
            continue
        lab = len(reps)
        for j in groups[i]:
            if label[j] < 0:
                label[j] = lab
        reps.append(i)
    uniq = points[reps]
    mult = np.bincount(label, minlength=len(reps))
    return uniq, mult, label


def _shells(radii: np.ndarray, mult: np.ndarray, tol: float) -> np.ndarray:
    order = np.lexsort((mult, radii))
    labels = np.empty(len(radii), dtype=int)
    cur = -1
    prev_r, prev_m = None, None
    for idx in order:
        if prev_r is None or radii[idx] - prev_r > tol or mult[idx] != prev_m:
            cur += 1
        labels[idx] = cur
        prev_r, prev_m = radii[idx], mult[idx]
    return labels


def _symmetry_rotations(x: np.ndarray, mult: np.ndarray, tol: float) -> Optional[list[np.ndarray]]:
    """All rotations about the origin preserving the weighted set ``x``.

    Returns None if the set is collinear through the origin.
    """
    n = len(x)
    radii = np.linalg.norm(x, axis=1)
    shells = _shells(radii, mult, tol)
    sizes = np.bincount(shells)
    off = np.flatnonzero(radii > tol)
    if len(off) == 0:
        return None
    # anchor a: smallest shell away from the centre
    a_idx = min(off, key=lambda i: (sizes[shells[i]], radii[i], i))
    a = x[a_idx]
    ua = a / radii[a_idx]
    cross_norm = np.linalg.norm(cross(ua, x), axis=1)
    non_col = np.flatnonzero(cross_norm > 10 * tol)
    if len(non_col) == 0:
        return None
    b_idx = min(non_col, key=lambda i: (sizes[shells[i]], -cross_norm[i], i))
    b = x[b_idx]
    dab = float(a @ b)
    a_cands = np.flatnonzero(shells == shells[a_idx])
    b_cands = np.flatnonzero(shells == shells[b_idx])
    scale = max(radii.max(), 1e-300)
    dots = x[a_cands] @ x[b_cands].T
    ii, jj = np.nonzero(np.abs(dots - dab) <= 20 * tol * scale)
    ci, cj = a_cands[ii], b_cands[jj]
    keep = ci != cj
    ci, cj = ci[keep], cj[keep]
    if len(ci) == 0:
        return []
    rots = _pair_rotations(a, b, x[ci], x[cj])
    ok = np.isfinite(rots).all(axis=(1, 2))
    rots = rots[ok]
    tree = cKDTree(x)
    moved = np.einsum("mij,nj->mni", rots, x)
    dist, idx = tree.query(moved.reshape(-1, 3), k=1)
    dist = dist.reshape(len(rots), n)
    idx = idx.reshape(len(rots), n)
    good = dist.max(axis=1) <= 8 * tol
    srt = np.sort(idx, axis=1)
    good &= np.all(np.diff(srt, axis=1) != 0, axis=1) if n > 1 else True
    good &= np.all(mult[idx] == mult[None, :], axis=1)
    cand = rots[good]
    if len(cand) == 0:
        return []
    flat = cand.reshape(-1, 9)
    near = cKDTree(flat).query_ball_point(flat, r=1e-6)
    seen = np.zeros(len(cand), dtype=bool)
    found: list[np.ndarray] = []
    for k in range(len(cand)):
        if not seen[k]:
            found.append(cand[k])
            seen[near[k]] = True
    return found


def _pair_rotations(a: np.ndarray, b: np.ndarray, a2: np.ndarray, b2: np.ndarray) -> np.ndarray:
    """Batched rotations taking the frame of (a, b) to the frames of (a2[k], b2[k])."""
    f0 = frame_from_pair(a, b)
    with np.errstate(invalid="ignore", divide="ignore"):
        e1 = a2 / np.linalg.norm(a2, axis=1)[:, None]
        e2 = b2 - np.sum(b2 * e1, axis=1)[:, None] * e1
        n2 = np.linalg.norm(e2, axis=1)
        e2 = e2 / n2[:, None]
        e2[n2 < 1e-12] = np.nan
    e3 = cross(e1, e2)
    frames = np.stack([e1, e2, e3], axis=2)
    return frames @ f0.T


def _is_collinear(x: np.ndarray, tol: float) -> Optional[np.ndarray]:
    radii = np.linalg.norm(x, axis=1)
    off = np.flatnonzero(radii > tol)
    if len(off) == 0:
        return np.array([0.0, 0.0, 1.0])
    d = x[off[0]] / radii[off[0]]
    if np.all(np.linalg.norm(cross(d, x), axis=1) <= 10 * tol):
        return d
    return None


def _occupied(points: np.ndarray, center: np.ndarray, direction: np.ndarray, tol: float) -> bool:
    x = points - center
    return bool(np.any(np.linalg.norm(cross(direction, x), axis=1) <= tol))


def _align(kind: GroupKind, elems: np.ndarray) -> np.ndarray:
    """Rotation ``frame`` with ``frame @ canonical @ frame.T`` equal to ``elems``."""
    canon = canonical_elements(kind)
    if kind == C1:
        return np.eye(3)
    lines = element_lines(elems)
    by_fold: dict[int, list[np.ndarray]] = {}
    for d, f in lines:
        by_fold.setdefault(f, []).append(d)

    def check(frame: np.ndarray) -> bool:
        mapped = np.einsum("ij,njk,lk->nil", frame, canon, frame)
        for m in mapped:
            if not np.any(np.max(np.abs(elems - m), axis=(1, 2)) < 1e-6):
                return False
        return True

    if kind.family == "C":
        d = by_fold[kind.n][0]
        frame = frame_from_pair(d, perpendicular(d))
        frame = frame[:, [1, 2, 0]]  # z maps to d
        return frame
    if kind.family == "D":
        raise ValueError("dihedral alignment needs the principal axis; use _align_dihedral")
    refs = {
        T: ((np.array([0.0, 0.0, 1.0]), 2), (np.array([1.0, 1.0, 1.0]) / np.sqrt(3), 3)),
        O: ((np.array([0.0, 0.0, 1.0]), 4), (np.array([1.0, 0.0, 0.0]), 4)),
        I: ((np.array([0.0, 0.0, 1.0]), 2), (np.array([1.0, 1.0, 1.0]) / np.sqrt(3), 3)),
    }[kind]
    (u0, fu), (v0, fv) = refs
    target = float(u0 @ v0)
    for u in by_fold[fu]:
        for v in by_fold[fv]:
            for su in (1, -1):
                for sv in (1, -1):
                    uu, vv = su * u, sv * v
                    if abs(float(uu @ vv) - target) > 1e-6:
                        continue
                    frame = rotation_between_pairs(u0, v0, uu, vv)
                    if check(frame):
                        return frame
    raise ValueError(f"could not align rotation set with canonical {kind}")


def _dihedral_frame(principal: np.ndarray, secondary: np.ndarray) -> np.ndarray:
    """Frame taking z to ``principal`` and x to ``secondary``."""
    z = unit(principal)
    x = unit(secondary - (secondary @ z) * z)
    y = cross(z, x)
    return np.column_stack([x, y, z])


def _canonical_images(kind: GroupKind, frame: np.ndarray):
    elems = np.einsum("ij,njk,lk->nil", frame, canonical_elements(kind), frame)
    dirs = [frame @ np.array(a.direction) for a in canonical_axes(kind)]
    return elems, dirs


def arrangement_from_elements(
    elems: Sequence[np.ndarray],
    center: np.ndarray,
    points: np.ndarray,
    tol: Tolerance = DEFAULT_TOL,
    scale: Optional[float] = None,
) -> Arrangement:
    """Build an arrangement for an explicit rotation set acting on ``points``."""
    elems = np.asarray(elems)
    kind = classify_elements(elems)
    center = np.asarray(center, dtype=float)
    pts = np.asarray(points, dtype=float)
    if scale is None:
        scale = float(np.max(np.linalg.norm(pts - center, axis=1))) if len(pts) else 1.0
    eps = tol.length(scale)
    distinguished = True
    if kind == C1:
        frame = np.eye(3)
    elif kind.family == "C":
        frame = _align(kind, elems)
        d, _ = orient_direction(pts, center, frame[:, 2], scale)
        if d @ frame[:, 2] < 0:
            frame = frame @ rotation_matrix([1, 0, 0], np.pi)
    elif kind.family == "D":
        lines = element_lines(elems)
        l = kind.n
        if l > 2:
            principal = next(dv for dv, f in lines if f == l)
            secondaries = [dv for dv, f in lines if f == 2 and abs(dv @ principal) < 1e-6]
        else:
            dirs = [dv for dv, _ in lines]
            sigs = [axis_signature(pts, center, dv, scale) for dv in dirs]
            pick = _pick_distinguished(sigs)
            distinguished = pick is not None
            pick = 0 if pick is None else pick
            principal = dirs[pick]
            secondaries = [dv for i, dv in enumerate(dirs) if i != pick]
        frame = None
        for s in secondaries:
            cand = _dihedral_frame(principal, s)
            ce, _ = _canonical_images(kind, cand)
            if all(np.any(np.max(np.abs(elems - m), axis=(1, 2)) < 1e-6) for m in ce):
                frame = cand
                break
        if frame is None:
            raise ValueError("could not align dihedral rotation set")
        if l % 2:
            d, _ = orient_direction(pts, center, frame[:, 0], scale)
            if d @ frame[:, 0] < 0:
                frame = frame @ rotation_matrix([0, 0, 1], np.pi / l)
    else:
        frame = _align(kind, elems)
        if kind == T:
            d3 = frame @ (np.ones(3) / np.sqrt(3))
            d, _ = orient_direction(pts, center, d3, scale)
            if d @ d3 < 0:
                frame = frame @ rotation_matrix([0, 0, 1], np.pi / 2)
    mapped, dirs = _canonical_images(kind, frame)
    axes = []
    for ca, dv in zip(canonical_axes(kind), dirs):
        axes.append(
            Axis(
                direction=dv,
                fold=ca.fold,
                oriented=ca.oriented,
                principal=ca.principal and (kind.family != "D" or distinguished),
                occupied=_occupied(pts, center, dv, eps),
            )
        )
    return Arrangement(kind, center, tuple(axes), mapped, frame, distinguished)


def _pick_distinguished(sigs: list[np.ndarray]) -> Optional[int]:
    """Index of the D2 axis singled out by the point geometry, if any."""
    n = len(sigs)
    same = [[_equal_sig(sigs[i], sigs[j]) for j in range(n)] for i in range(n)]
    classes = [sum(row) for row in same]
    unique = [i for i in range(n) if classes[i] == 1]
    if len(unique) == n:
        # all three differ: take the lexicographically largest description
        best = 0
        for i in range(1, n):
            if _compare_sig(sigs[i], sigs[best]) > 0:
                best = i
        return best
    if len(unique) == 1:
        return unique[0]
    return None


def _equal_sig(a, b) -> bool:
    return len(a) == len(b) and bool(np.all(a == b))


def _compare_sig(a, b) -> int:
    if len(a) != len(b):
        return -1 if len(a) < len(b) else 1
    return _compare_arrays(a, b)


_DETECT_CACHE: OrderedDict = OrderedDict()
_DETECT_CACHE_SIZE = 512


def _freeze(arr: Arrangement) -> Arrangement:
    for a in (arr.center, arr.elements, arr.frame, arr.line, *(ax.direction for ax in arr.axes)):
        if isinstance(a, np.ndarray):
            a.setflags(write=False)
    return arr


def clear_detection_cache() -> None:
    _DETECT_CACHE.clear()


def detect_rotation_group(points, tol: Tolerance = DEFAULT_TOL) -> Arrangement:
    """Rotation group of a point (multi)set together with its arrangement.

    Results are memoized on the exact coordinates; the returned arrays are
    read-only.
    """
    pts = as_points(points)
    key = (pts.shape, pts.tobytes(), tol)
    hit = _DETECT_CACHE.get(key)
    if hit is not None:
        _DETECT_CACHE.move_to_end(key)
        return hit
    arr = _freeze(_detect(pts, tol))
    _DETECT_CACHE[key] = arr
    if len(_DETECT_CACHE) > _DETECT_CACHE_SIZE:
        _DETECT_CACHE.popitem(last=False)
    return arr


def _detect(pts: np.ndarray, tol: Tolerance) -> Arrangement:
    if len(pts) < 3:
        raise ValueError("detection needs at least 3 points")
    ball = smallest_enclosing_ball(pts)
    if ball.radius <= tol.abs_eps:
        raise ValueError("unsupported: all points coincide")
    scale = ball.radius
    eps = tol.length(scale)
    centroid = pts.mean(axis=0)
    uniq, mult, _ = _merge(pts, eps)
    # centroid of the multiset is fixed by every symmetry
    x = uniq - centroid
    line = _is_collinear(x, eps)
    if line is not None:
        h = np.sort(np.repeat(x @ line, mult))
        symmetric = np.allclose(h, -h[::-1], atol=4 * eps)
        kind = GroupKind("Dinf") if symmetric else GroupKind("Cinf")
        return Arrangement(kind, centroid, (), np.eye(3)[None], np.eye(3), True, line)
    rots = _symmetry_rotations(x, mult, eps)
    kind = classify_elements(np.array(rots)) if rots else C1
    if kind == C1:
        return Arrangement(C1, ball.center, (), np.eye(3)[None], np.eye(3))
    center = centroid
    if kind.family == "C":
        axis, _ = axis_angle(next(r for r in rots if axis_angle(r)[1] > 1e-7))
        # put the center on the axis at the foot of the enclosing-ball center
        center = centroid + ((ball.center - centroid) @ axis) * axis
    return arrangement_from_elements(np.array(rots), center, pts, tol, scale)


def group_acts(points, arr: Arrangement, tol: Tolerance = DEFAULT_TOL) -> bool:
    """Whether every element of ``arr`` permutes ``points`` as a multiset."""
    pts = as_points(points)
    scale = float(np.max(np.linalg.norm(pts - arr.center, axis=1))) or 1.0
    eps = 8 * tol.length(scale)
    uniq, mult, _ = _merge(pts, tol.length(scale))
    tree = cKDTree(uniq)
    for j in range(arr.order):
        moved = arr.apply(j, uniq)
        dist, idx = tree.query(moved, k=1)
        if dist.max() > eps or len(np.unique(idx)) != len(uniq) or np.any(mult[idx] != mult):
            return False
    return True


# ---------------------------------------------------------------------------
# frames


@dataclass(frozen=True)
class LocalFrame:
    """Right-handed local coordinate system: columns of ``basis`` are the local axes."""

    origin: np.ndarray
    basis: np.ndarray
    scale: float = 1.0

    def __post_init__(self):
        b = np.asarray(self.basis, dtype=float)
        if b.shape != (3, 3):
            raise ValueError("basis must be 3x3")
        if not float(np.abs(b.T @ b - np.eye(3)).max()) <= 1e-8:
            raise ValueError("basis must be orthonormal")
        det = (
            b[0, 0] * (b[1, 1] * b[2, 2] - b[1, 2] * b[2, 1])
            - b[0, 1] * (b[1, 0] * b[2, 2] - b[1, 2] * b[2, 0])
            + b[0, 2] * (b[1, 0] * b[2, 1] - b[1, 1] * b[2, 0])
        )
        if det < 0:
            raise ValueError("basis must be right-handed")
        if not self.scale > 0:
            raise ValueError("scale must be positive")

    def to_local(self, points: np.ndarray) -> np.ndarray:
        return (np.asarray(points, dtype=float) - self.origin) @ self.basis / self.scale

    def to_global(self, local: np.ndarray) -> np.ndarray:
        return np.asarray(local, dtype=float) * self.scale @ self.basis.T + self.origin

    def moved_to(self, origin: np.ndarray) -> "LocalFrame":
        return LocalFrame(np.asarray(origin, dtype=float), self.basis, self.scale)


def world_frames(points: np.ndarray) -> list[LocalFrame]:
    return [LocalFrame(p.copy(), np.eye(3), 1.0) for p in np.asarray(points, dtype=float)]


def frame_group(frames: Sequence[LocalFrame], tol: Tolerance = DEFAULT_TOL) -> Arrangement:
    """Rotation group of an arrangement of local frames (positions, bases, scales)."""
    if len(frames) < 3:
        raise ValueError("frame group needs at least 3 frames")
    pts = np.array([f.origin for f in frames])
    gamma = detect_rotation_group(pts, tol)
    if gamma.kind.infinite:
        return gamma
    scale = float(np.max(np.linalg.norm(pts - gamma.center, axis=1))) or 1.0
    eps = 8 * tol.length(scale)
    bases = np.array([f.basis for f in frames])
    scales = np.array([f.scale for f in frames])
    kept = []
    for j in range(gamma.order):
        g = gamma.elements[j]
        moved = (pts - gamma.center) @ g.T + gamma.center
        ok = True
        used = np.zeros(len(frames), dtype=bool)
        for i in range(len(frames)):
            gb = g @ bases[i]
            cands = np.flatnonzero(
                (np.linalg.norm(pts - moved[i], axis=1) <= eps)
                & (np.max(np.abs(bases - gb), axis=(1, 2)) <= 1e-7)
                & (np.abs(scales - scales[i]) <= 1e-9 * scales[i])
                & ~used
            )
            if len(cands) == 0:
                ok = False
                break
            used[cands[0]] = True
        if ok:
            kept.append(g)
    return arrangement_from_elements(np.array(kept), gamma.center, pts, tol, scale)
