"""Shared plumbing for the formation algorithms: analyses, moves, choices."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ..geom3 import DEFAULT_TOL, Ball, Tolerance, as_points, smallest_enclosing_ball
from ..symmetry.detect import Arrangement, LocalFrame, detect_rotation_group, world_frames
from ..symmetry.views import OrbitDecomposition, decompose, view_seed


@dataclass(frozen=True)
class ChoiceSeed:
    """Seed for every free choice an algorithm makes."""

    value: int = 0


@dataclass
class MoveSet:
    """Destination per robot (None = stay), plus what produced it."""

    destinations: list
    procedure: str = "stay"
    orbit: Optional[int] = None

    def __post_init__(self):
        for d in self.destinations:
            if d is not None and not np.all(np.isfinite(d)):
                raise ValueError("destinations must be finite")

    @staticmethod
    def stay(n: int) -> "MoveSet":
        return MoveSet([None] * n)

    def apply(self, points: np.ndarray) -> np.ndarray:
        out = np.array(points, dtype=float, copy=True)
        for i, d in enumerate(self.destinations):
            if d is not None:
                out[i] = d
        return out

    def moved(self) -> list[int]:
        return [i for i, d in enumerate(self.destinations) if d is not None]


@dataclass
class Analysis:
    """Everything a robot derives from one observation."""

    points: np.ndarray
    tol: Tolerance
    arr: Arrangement
    ball: Ball
    decomposition: OrbitDecomposition
    eps: float
    orbit_of: np.ndarray = field(default=None)  # type: ignore[assignment]
    cache: dict = field(default_factory=dict)

    @property
    def center(self) -> np.ndarray:
        return self.ball.center

    @property
    def inner_radius(self) -> float:
        return float(np.min(np.linalg.norm(self.points - self.ball.center, axis=1)))

    def orbit_radius(self, k: int) -> float:
        i = self.decomposition.orbits[k][0]
        return float(np.linalg.norm(self.points[i] - self.ball.center))

    def view_of(self, i: int) -> np.ndarray:
        key = self.decomposition.views[int(self.orbit_of[i])]
        return np.asarray(key if key is not None else (), dtype=np.int64)


def analyze(points, tol: Tolerance = DEFAULT_TOL) -> Analysis:
    pts = as_points(points)
    arr = detect_rotation_group(pts, tol)
    if arr.kind.infinite:
        raise ValueError("unsupported: collinear configuration (C_inf / D_inf)")
    ball = smallest_enclosing_ball(pts)
    dec = decompose(pts, arr, tol)
    eps = tol.length(ball.radius if ball.radius > 0 else 1.0)
    a = Analysis(pts, tol, arr, ball, dec, eps)
    a.orbit_of = dec.orbit_of()
    return a


def resolve_frames(points: np.ndarray, frames: Optional[Sequence[LocalFrame]]) -> list[LocalFrame]:
    return world_frames(points) if frames is None else list(frames)


def robot_rng(seed: ChoiceSeed | int, view: np.ndarray) -> np.random.Generator:
    """Choice stream shared by all robots that have the same local view."""
    s = seed.value if isinstance(seed, ChoiceSeed) else int(seed)
    return np.random.default_rng(view_seed(view, s))


def rank_in_frame(options: np.ndarray, frame: LocalFrame) -> np.ndarray:
    """Order of ``options`` by their quantized coordinates in ``frame``."""
    local = frame.to_local(np.asarray(options, dtype=float))
    scale = float(np.max(np.linalg.norm(local, axis=1))) or 1.0
    q = np.round(local / (1e-6 * scale)).astype(np.int64)
    return np.lexsort(q.T[::-1])


def choose(options: np.ndarray, frame: LocalFrame, rng: np.random.Generator) -> int:
    """Index into ``options`` picked by a robot from its own point of view."""
    order = rank_in_frame(options, frame)
    return int(order[int(rng.integers(len(order)))])
