"""Pattern formation: break symmetry, then jump onto the embedded target."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from ..geom3 import DEFAULT_TOL, Tolerance, as_points, similar, smallest_enclosing_ball
from ..symmetry.detect import LocalFrame, _merge
from ..symmetry.groups import GroupKind
from ..symmetry.symmetricity import SymmetricitySet, symmetricity, symmetricity_multiset
from .common import Analysis, ChoiceSeed, MoveSet, analyze, resolve_frames
from .embed import embed_target
from .matching import match_assign
from .psisym import psi_sym_step, psi_sym_terminal


@dataclass(frozen=True)
class Feasibility:
    ok: bool
    blocker: Optional[GroupKind]
    robots: SymmetricitySet
    target: SymmetricitySet

    def __bool__(self) -> bool:
        return self.ok


def feasible(points, target, tol: Tolerance = DEFAULT_TOL) -> Feasibility:
    """Whether robots at ``points`` can form ``target`` whatever their frames.

    Formable exactly when every group the robots can never break is also
    a symmetricity of the target; otherwise the first missing maximal group
    is returned as the blocker.
    """
    p = as_points(points)
    f = as_points(target)
    if len(p) != len(f):
        raise ValueError(f"size mismatch: {len(p)} robots, {len(f)} target points")
    sp = symmetricity(p, tol)
    sf = symmetricity_multiset(f, tol)
    blocker = sp.blocker(sf)
    return Feasibility(blocker is None, blocker, sp, sf)


def naive_targets(points: np.ndarray, target: np.ndarray, frames: Sequence[LocalFrame]) -> list:
    """Each robot overlays the target on its own axes, inside the robots'
    enclosing ball, and heads for the overlay point a minimum-cost
    assignment gives it, keeping its own distance to the ball's centre.

    Used only when formation is known to be impossible; robots with
    symmetric frames then make symmetric moves.
    """
    p_ball = smallest_enclosing_ball(points)
    f_ball = smallest_enclosing_ball(target)
    s = p_ball.radius / f_ball.radius if f_ball.radius > 0 else 1.0
    out = []
    for i, fr in enumerate(frames):
        placed = (target - f_ball.center) * s @ fr.basis.T + p_ball.center
        cost = np.linalg.norm(points[:, None, :] - placed[None, :, :], axis=2)
        rows, cols = linear_sum_assignment(cost)
        goal = placed[cols[np.flatnonzero(rows == i)[0]]] - p_ball.center
        # keep the current distance to the centre so the swarm cannot contract
        r_i = float(np.linalg.norm(points[i] - p_ball.center))
        g = float(np.linalg.norm(goal))
        out.append(p_ball.center + (goal * (r_i / g) if g > 0 else points[i] - p_ball.center))
    return out


def psi_pf_step(
    points,
    target,
    seed: ChoiceSeed | int = 0,
    frames: Optional[Sequence[LocalFrame]] = None,
    tol: Tolerance = DEFAULT_TOL,
    analysis: Optional[Analysis] = None,
    strict: bool = True,
) -> MoveSet:
    """One round of pattern formation toward ``target``.

    With ``strict=False`` an infeasible pair does not raise: the robots fall
    back to overlaying the target in their own frames.
    """
    a = analysis or analyze(points, tol)
    f = as_points(target)
    if len(f) != len(a.points):
        raise ValueError("size mismatch")
    if similar(a.points, f, tol) is not None:
        return MoveSet.stay(len(a.points))
    if not psi_sym_terminal(a.points, tol, a):
        return psi_sym_step(a.points, seed, frames, tol, a)
    try:
        ft = embed_target(a.points, f, tol, a)
        m = match_assign(a.points, ft, tol, a)
    except ValueError as exc:
        if strict or not str(exc).startswith("infeasible"):
            raise
        frames = resolve_frames(a.points, frames)
        return MoveSet(naive_targets(a.points, f, frames), "naive")
    dest = [ft.points[m.target[i]].copy() for i in range(len(a.points))]
    return MoveSet(dest, "form")


def has_multiplicity(points, tol: Tolerance = DEFAULT_TOL) -> bool:
    pts = as_points(points)
    scale = smallest_enclosing_ball(pts).radius or 1.0
    _, mult, _ = _merge(pts, tol.length(scale))
    return bool(np.any(mult > 1))

