"""Embeddings of a canonical rotation group into a placed host arrangement."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..geom3 import rotation_between_pairs, unit
from .detect import Arrangement
from .groups import C1, GroupKind, canonical_axes, canonical_elements, is_subgroup


@dataclass(frozen=True)
class Embedding:
    """A copy of canonical ``kind`` inside ``host``.

    ``rotation @ canonical_elements(kind)[j] @ rotation.T`` is an element
    of the host, and ``axis_map[j] = (host axis index, sign)`` records
    where canonical axis ``j`` lands (sign +1 when the canonical direction
    maps onto the host direction).
    """

    kind: GroupKind
    rotation: np.ndarray
    axis_map: tuple[tuple[int, int], ...]

    def elements(self) -> np.ndarray:
        return np.einsum("ij,njk,lk->nil", self.rotation, canonical_elements(self.kind), self.rotation)

    def axis_directions(self) -> list[np.ndarray]:
        return [self.rotation @ np.array(a.direction) for a in canonical_axes(self.kind)]


_REFS = {
    "T": (((0.0, 0.0, 1.0), 2), ((1.0, 1.0, 1.0), 3)),
    "O": (((0.0, 0.0, 1.0), 4), ((1.0, 0.0, 0.0), 4)),
    "I": (((0.0, 0.0, 1.0), 2), ((1.0, 1.0, 1.0), 3)),
}


def _reference_pair(kind: GroupKind):
    if kind.family == "D":
        return (np.array([0.0, 0.0, 1.0]), kind.n), (np.array([1.0, 0.0, 0.0]), 2)
    (u, fu), (v, fv) = _REFS[kind.family]
    return (unit(np.array(u)), fu), (unit(np.array(v)), fv)


def _contains(host_elems: np.ndarray, mats: np.ndarray) -> bool:
    h = host_elems.reshape(len(host_elems), 9)
    m = mats.reshape(len(mats), 9)
    diff = np.max(np.abs(m[:, None, :] - h[None, :, :]), axis=2)
    return bool(np.all(np.min(diff, axis=1) < 1e-6))


def _axis_map(kind: GroupKind, rot: np.ndarray, host: Arrangement) -> Optional[tuple]:
    host_dirs = np.array([a.direction for a in host.axes])
    out = []
    for ca in canonical_axes(kind):
        d = rot @ np.array(ca.direction)
        dots = host_dirs @ d
        j = int(np.argmax(np.abs(dots)))
        if abs(abs(dots[j]) - 1.0) > 1e-6:
            return None
        sign = 1 if dots[j] > 0 else -1
        # unoriented canonical axes only fix a line
        out.append((j, sign if ca.oriented else 0))
    return tuple(out)


def enumerate_embeddings(kind: GroupKind, host: Arrangement) -> list[Embedding]:
    """All distinct axis maps of canonical ``kind`` into ``host``.

    Two embeddings are the same when every canonical axis lands on the
    same host axis (with the same sign for oriented axes). A cyclic group
    leaves the rotation about its axis free; the returned rotation fixes
    it arbitrarily.
    """
    if host.kind.infinite:
        raise ValueError("unsupported: infinite rotation groups")
    if not is_subgroup(kind, host.kind):
        return []
    if kind == C1:
        return [Embedding(kind, np.eye(3), ())]
    canon = canonical_elements(kind)
    found: dict[tuple, Embedding] = {}
    if kind.family == "C":
        for j, a in enumerate(host.axes):
            if a.fold % kind.n:
                continue
            for sign in (1, -1):
                d = sign * a.direction
                rot = rotation_between_pairs(
                    np.array([0.0, 0.0, 1.0]), np.array([1.0, 0.0, 0.0]), d, _any_perp(d)
                )
                mats = np.einsum("ij,njk,lk->nil", rot, canon, rot)
                if not _contains(host.elements, mats):
                    continue
                key = ((j, sign),)
                found.setdefault(key, Embedding(kind, rot, key))
        return list(found.values())
    (u0, fu), (v0, fv) = _reference_pair(kind)
    target = float(u0 @ v0)
    rejected: set = set()
    for iu, au in enumerate(host.axes):
        if au.fold % fu:
            continue
        for iv, av in enumerate(host.axes):
            if iv == iu or av.fold % fv:
                continue
            for su in (1, -1):
                for sv in (1, -1):
                    uu = su * au.direction
                    vv = sv * av.direction
                    if abs(float(uu @ vv) - target) > 1e-6:
                        continue
                    rot = rotation_between_pairs(u0, v0, uu, vv)
                    key = _axis_map(kind, rot, host)
                    if key is None or key in found or key in rejected:
                        continue
                    mats = np.einsum("ij,njk,lk->nil", rot, canon, rot)
                    if not _contains(host.elements, mats):
                        rejected.add(key)
                        continue
                    found[key] = Embedding(kind, rot, key)
    return list(found.values())


def _any_perp(d: np.ndarray) -> np.ndarray:
    trial = np.array([1.0, 0.0, 0.0]) if abs(d[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    return unit(trial - (trial @ d) * d)


def stabilizer_sizes(points: np.ndarray, center: np.ndarray, elems: np.ndarray, tol: float) -> np.ndarray:
    """For each point, how many of ``elems`` fix it."""
    x = np.asarray(points, dtype=float) - center
    counts = np.zeros(len(x), dtype=int)
    for m in elems:
        counts += np.linalg.norm(x @ m.T - x, axis=1) <= tol
    return counts


def acts_freely(
    points: np.ndarray,
    mult: np.ndarray,
    center: np.ndarray,
    elems: np.ndarray,
    tol: float,
) -> bool:
    """Whether every distinct point's stabilizer size divides its multiplicity.

    For a plain set this means no point lies on a rotation axis.
    """
    stab = stabilizer_sizes(points, center, elems, tol)
    return bool(np.all(np.asarray(mult) % stab == 0))
