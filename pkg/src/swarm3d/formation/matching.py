"""Orbit-wise matching of robots to the embedded target points."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import linear_sum_assignment

from ..geom3 import DEFAULT_TOL, Tolerance, cross, unit
from ..symmetry.detect import _merge
from ..symmetry.views import local_view, orbits, view_key
from .common import Analysis, analyze
from .embed import EmbeddedTarget


@dataclass(frozen=True)
class Matching:
    """``target[i]`` is the row of the embedded target robot ``i`` goes to.

    ``fallbacks`` counts orbit pairs where the nearest-target rule did not
    yield a perfect matching and a minimum-cost assignment was used.
    """

    target: np.ndarray
    pairs: tuple[tuple[tuple[int, ...], tuple[int, ...]], ...]
    fallbacks: int = 0

    def weight(self, points: np.ndarray, targets: np.ndarray) -> float:
        return float(np.linalg.norm(points - targets[self.target], axis=1).sum())


def _hungarian(robots: np.ndarray, slots: np.ndarray) -> np.ndarray:
    cost = np.linalg.norm(robots[:, None, :] - slots[None, :, :], axis=2)
    r, c = linear_sum_assignment(cost)
    out = np.empty(len(robots), dtype=int)
    out[r] = c
    return out


def match_orbit(
    robots: np.ndarray,
    targets: np.ndarray,
    center: np.ndarray,
    capacity: int = 1,
    tol: float = 1e-9,
) -> tuple[np.ndarray, bool]:
    """Assign each robot of one orbit to a target position of one orbit.

    Every target position receives ``capacity`` robots. Each robot takes its
    nearest target; a robot with two nearest targets sits on a cycle around
    a rotation axis and takes the one that lies clockwise when looking down
    the axis from outside. Returns (target index per robot, used_fallback).
    """
    robots = np.asarray(robots, dtype=float)
    targets = np.asarray(targets, dtype=float)
    scale = float(np.max(np.linalg.norm(np.vstack([robots, targets]) - center, axis=1))) or 1.0
    dist = np.linalg.norm(robots[:, None, :] - targets[None, :, :], axis=2)
    nearest = dist <= dist.min(axis=1, keepdims=True) + 1e3 * tol * scale
    choice = np.full(len(robots), -1, dtype=int)
    for i in range(len(robots)):
        cand = np.flatnonzero(nearest[i])
        if len(cand) == 1:
            choice[i] = cand[0]
            continue
        if len(cand) != 2:
            break
        p = robots[i]
        t1, t2 = targets[cand[0]], targets[cand[1]]
        n = cross(t1 - p, t2 - p)
        if np.linalg.norm(n) <= 1e3 * tol * scale * scale:
            break
        axis = unit(n)
        height = float(axis @ (p - center))
        if abs(height) <= 1e3 * tol * scale:
            break
        if height < 0:
            axis = -axis
        turn = [float(cross(p - center, t - center) @ axis) for t in (t1, t2)]
        choice[i] = cand[0] if turn[0] < turn[1] else cand[1]
    counts = np.bincount(choice[choice >= 0], minlength=len(targets))
    if np.all(choice >= 0) and np.all(counts == capacity):
        return choice, False
    slots = np.repeat(np.arange(len(targets)), capacity)
    return slots[_hungarian(robots, targets[slots])], True


def _view(points: np.ndarray, i: int, labels, tol, ball, eps: float) -> tuple:
    if np.linalg.norm(points[i] - ball.center) <= 8 * eps:
        return (0, 0, 0, int(labels[i]))
    return view_key(local_view(points, i, labels, tol, ball))


def match_assign(
    points,
    ft: EmbeddedTarget,
    tol: Tolerance = DEFAULT_TOL,
    analysis: Optional[Analysis] = None,
) -> Matching:
    """Perfect matching of robots to F~ that respects the orbits of the robots' group."""
    a = analysis or analyze(points, tol)
    pts = a.points
    n = len(pts)
    elems = a.arr.elements
    center = a.arr.center
    order = len(elems)
    fpos, fmult, flabel = _merge(ft.points, a.eps)
    f_orbits = orbits(fpos, elems, center, 8 * a.eps)
    p_orbits = orbits(pts, elems, center, 8 * a.eps)
    union = np.vstack([pts, fpos])
    labels = np.concatenate([np.zeros(n, dtype=np.int64), 1 + fmult])
    ball = a.ball

    def key(o, offset):
        return (_view(union, offset + o[0], labels, a.tol, ball, a.eps), min(o))

    p_sorted = sorted(p_orbits, key=lambda o: key(o, 0))
    f_elements: list[tuple[int, ...]] = []
    for o in sorted(f_orbits, key=lambda o: key(o, n)):
        stab = order // len(o)
        if fmult[o[0]] % stab:
            raise ValueError("robots' group does not act freely on the target")
        f_elements.extend([tuple(o)] * (int(fmult[o[0]]) // stab))
    if len(f_elements) != len(p_sorted):
        raise ValueError("orbit counts of robots and target differ")
    # rows of ft.points sharing each distinct position
    rows: list[list[int]] = [[] for _ in range(len(fpos))]
    for r, lab in enumerate(flabel):
        rows[lab].append(r)
    target = np.full(n, -1, dtype=int)
    fallbacks = 0
    pairs = []
    for po, fo in zip(p_sorted, f_elements):
        stab = order // len(fo)
        pick, fb = match_orbit(pts[list(po)], fpos[list(fo)], center, stab, a.tol.rel_eps)
        fallbacks += fb
        pairs.append((tuple(po), fo))
        for robot, k in zip(po, pick):
            target[robot] = rows[fo[k]].pop()
    if np.any(target < 0) or len(np.unique(target)) != n:
        raise RuntimeError("matching is not a bijection")
    return Matching(target, tuple(pairs), fallbacks)
