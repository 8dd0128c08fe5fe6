"""Symmetricity: the rotation groups a configuration can never break."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..geom3 import DEFAULT_TOL, Tolerance, as_points, cross, random_rotation
from .detect import Arrangement, LocalFrame, _merge, detect_rotation_group
from .embeddings import Embedding, acts_freely, enumerate_embeddings
from .groups import (
    C1,
    GroupKind,
    canonical_element_axes,
    canonical_subgroups,
    is_subgroup,
    maximal_kinds,
)


@dataclass(frozen=True)
class SymmetricitySet:
    """Downward-closed set of group kinds, stored by its maximal elements."""

    maximal: tuple[GroupKind, ...]

    def __contains__(self, kind: GroupKind) -> bool:
        return any(is_subgroup(kind, m) for m in self.maximal)

    def contains(self, kind: GroupKind) -> bool:
        return kind in self

    def issubset(self, other: "SymmetricitySet") -> bool:
        return all(m in other for m in self.maximal)

    def blocker(self, other: "SymmetricitySet") -> Optional[GroupKind]:
        """First maximal element of self missing from ``other``."""
        for m in self.maximal:
            if m not in other:
                return m
        return None

    def names(self) -> list[str]:
        return [str(k) for k in self.maximal]

    def __str__(self) -> str:
        return "{" + ", ".join(self.names()) + "}"


def _scale(pts: np.ndarray, center: np.ndarray) -> float:
    return float(np.max(np.linalg.norm(pts - center, axis=1))) or 1.0


def _on_axis_matrix(points: np.ndarray, arr: Arrangement, eps: float) -> np.ndarray:
    x = points - arr.center
    dirs = np.array([a.direction for a in arr.axes])
    # |x cross d| for every point/axis pair
    dist = np.linalg.norm(cross(x[:, None, :], dirs[None, :, :]), axis=2)
    return dist <= eps


def realizable_subgroups(points, arr: Arrangement, tol: Tolerance = DEFAULT_TOL):
    """Canonical subgroups of ``arr`` whose orbits on ``points`` are full.

    A point on a k-fold axis of the subgroup must carry a multiplicity
    divisible by its stabilizer size; for plain sets this forbids any
    point on a non-trivial axis.
    """
    pts = as_points(points)
    if arr.kind.infinite:
        raise ValueError("unsupported: collinear configuration (C_inf / D_inf)")
    scale = _scale(pts, arr.center)
    eps = tol.length(scale)
    uniq, mult, _ = _merge(pts, eps)
    if arr.kind == C1:
        return [canonical_subgroups(C1)[0]]
    on_axis = _on_axis_matrix(uniq, arr, 8 * eps)
    elem_axis = canonical_element_axes(arr.kind)
    out = []
    for sub in canonical_subgroups(arr.kind):
        stab = np.ones(len(uniq), dtype=int)
        for m in sub.members:
            a = elem_axis[m]
            if a >= 0:
                stab += on_axis[:, a]
        if np.all(mult % stab == 0):
            out.append(sub)
    return out


def symmetricity_multiset(points, tol: Tolerance = DEFAULT_TOL, arr: Optional[Arrangement] = None) -> SymmetricitySet:
    """Symmetricity of a configuration that may contain repeated points."""
    pts = as_points(points)
    if len(pts) < 3:
        raise ValueError("symmetricity needs at least 3 points")
    if arr is None:
        arr = detect_rotation_group(pts, tol)
    subs = realizable_subgroups(pts, arr, tol)
    return SymmetricitySet(maximal_kinds({s.kind for s in subs}))


def symmetricity(points, tol: Tolerance = DEFAULT_TOL, arr: Optional[Arrangement] = None) -> SymmetricitySet:
    """Symmetricity of a set: groups embeddable into the unoccupied axes."""
    pts = as_points(points)
    if len(pts) < 3:
        raise ValueError("symmetricity needs at least 3 points")
    if arr is None:
        arr = detect_rotation_group(pts, tol)
    if arr.kind.infinite:
        raise ValueError("unsupported: collinear configuration (C_inf / D_inf)")
    _, mult, _ = _merge(pts, tol.length(_scale(pts, arr.center)))
    if np.any(mult > 1):
        raise ValueError("symmetricity expects a set; use symmetricity_multiset")
    return symmetricity_multiset(pts, tol, arr)


def free_embeddings(points, kind: GroupKind, arr: Optional[Arrangement] = None,
                    tol: Tolerance = DEFAULT_TOL) -> list[Embedding]:
    """Embeddings of ``kind`` into the rotation group of ``points`` whose orbits are full."""
    pts = as_points(points)
    if arr is None:
        arr = detect_rotation_group(pts, tol)
    eps = tol.length(_scale(pts, arr.center))
    uniq, mult, _ = _merge(pts, eps)
    return [
        e for e in enumerate_embeddings(kind, arr)
        if acts_freely(uniq, mult, arr.center, e.elements(), 8 * eps)
    ]


def random_frame(rng: np.random.Generator, origin) -> LocalFrame:
    return LocalFrame(np.asarray(origin, dtype=float), random_rotation(rng), float(rng.uniform(0.5, 2.0)))


def symmetric_frame_assignment(
    points,
    kind: GroupKind,
    emb: Optional[Embedding] = None,
    seed: int = 0,
    tol: Tolerance = DEFAULT_TOL,
) -> list[LocalFrame]:
    """Local frames whose rotation group is exactly ``kind``.

    One random frame is drawn per orbit of the embedded group and then
    carried around the orbit by the group's rotations.
    """
    pts = as_points(points)
    rng = np.random.default_rng(seed)
    if kind == C1:
        return [random_frame(rng, p) for p in pts]
    arr = detect_rotation_group(pts, tol)
    if kind not in symmetricity(pts, tol, arr):
        raise ValueError(f"not realizable: {kind} is not in the symmetricity of the configuration")
    if emb is None:
        cands = free_embeddings(pts, kind, arr, tol)
        emb = cands[int(rng.integers(len(cands)))]
    elems = emb.elements()
    eps = 8 * tol.length(_scale(pts, arr.center))
    frames: list[Optional[LocalFrame]] = [None] * len(pts)
    for i in range(len(pts)):
        if frames[i] is not None:
            continue
        base = random_rotation(rng)
        scale = float(rng.uniform(0.5, 2.0))
        x = pts[i] - arr.center
        for g in elems:
            q = g @ x + arr.center
            j = int(np.argmin(np.linalg.norm(pts - q, axis=1)))
            if np.linalg.norm(pts[j] - q) > eps or frames[j] is not None:
                raise ValueError("not realizable: embedding does not act freely")
            frames[j] = LocalFrame(pts[j].copy(), g @ base, scale)
    return frames  # type: ignore[return-value]
