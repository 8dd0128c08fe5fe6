"""Fully synchronous Look-Compute-Move execution with per-robot frames."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .geom3 import DEFAULT_TOL, Tolerance, as_points, similar
from .formation import (
    ChoiceSeed,
    MoveSet,
    analyze,
    feasible,
    go_to_center_step,
    has_multiplicity,
    psi_pf_step,
    psi_sym_step,
    psi_sym_terminal,
)
from .symmetry.detect import LocalFrame, detect_rotation_group, frame_group, world_frames
from .symmetry.groups import GroupKind, is_subgroup
from .symmetry.symmetricity import free_embeddings, random_frame, symmetric_frame_assignment

ALGORITHMS = ("psi_sym", "psi_pf", "go_to_center", "external")

# algorithm(points, frames, seed, tol) -> MoveSet, all in one coordinate system
Algorithm = Callable[[np.ndarray, Sequence[LocalFrame], ChoiceSeed, Tolerance], MoveSet]


@dataclass
class Robot:
    index: int
    frame: LocalFrame


@dataclass(frozen=True)
class SimConfig:
    algorithm: str = "psi_pf"
    adversary: str = "random"
    seed: int = 0
    max_steps: int = 50
    tol: Tolerance = DEFAULT_TOL
    strict: bool = True
    local: bool = False  # every robot computes on its own observation
    external: Optional[Algorithm] = None

    def __post_init__(self):
        if self.max_steps < 1:
            raise ValueError("max_steps must be at least 1")
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}")
        if self.algorithm == "external" and self.external is None:
            raise ValueError("external algorithm needs a callable")


@dataclass(frozen=True)
class StepRecord:
    moved: tuple[int, ...]
    moved_orbit: Optional[int]
    procedure: str


@dataclass(frozen=True)
class Outcome:
    kind: str  # Formed | Terminal-no-target | BudgetExceeded | Error
    step: Optional[int] = None
    message: str = ""

    def __str__(self) -> str:
        if self.kind == "Formed":
            return f"Formed({self.step})"
        if self.kind == "Error":
            return f"Error({self.message})"
        return self.kind


@dataclass
class Trace:
    """Configurations P(0..t) with per-step metadata.

    ``gamma[t]`` and ``sigma[t]`` are the detected groups of the robots'
    positions and frames at time t; ``steps[t]`` produced P(t+1).
    """

    configurations: list
    steps: list
    gamma: list
    sigma: list
    outcome: Outcome
    frames: list  # frames at time 0
    target: Optional[np.ndarray]
    config: SimConfig
    metadata: dict = field(default_factory=dict)


class RobotError(RuntimeError):
    def __init__(self, index: int, exc: Exception):
        super().__init__(f"robot {index}: {exc}")
        self.index = index
        self.cause = exc


# ---------------------------------------------------------------------------
# observation and one round


def look(points, frame: LocalFrame) -> np.ndarray:
    """Positions of all robots in the observer's local coordinates."""
    return frame.to_local(as_points(points))


def _algorithm(cfg: SimConfig, target: Optional[np.ndarray]) -> Algorithm:
    if cfg.algorithm == "external":
        return cfg.external  # type: ignore[return-value]
    if cfg.algorithm == "go_to_center":
        return lambda p, fr, seed, tol: go_to_center_step(p, seed, fr, tol)
    if cfg.algorithm == "psi_sym":

        def sym(p, fr, seed, tol):
            a = analyze(p, tol)
            if psi_sym_terminal(p, tol, a):
                return MoveSet.stay(len(p))
            return psi_sym_step(p, seed, fr, tol, a)

        return sym
    if target is None:
        raise ValueError("psi_pf needs a target pattern")
    return lambda p, fr, seed, tol: psi_pf_step(p, target, seed, fr, tol, strict=cfg.strict)


def fsync_step(
    points,
    robots: Sequence[Robot],
    algorithm: Algorithm,
    seed: ChoiceSeed | int,
    tol: Tolerance = DEFAULT_TOL,
    local: bool = False,
) -> tuple[np.ndarray, list[Robot], MoveSet]:
    """All robots look at the same configuration, compute, and move together.

    In local mode each robot runs ``algorithm`` on its own observation
    with itself as the only known frame, and its local destination is
    mapped back to global coordinates.
    """
    pts = as_points(points)
    seed = seed if isinstance(seed, ChoiceSeed) else ChoiceSeed(int(seed))
    frames = [r.frame for r in robots]
    if not local:
        try:
            moves = algorithm(pts, frames, seed, tol)
        except Exception as exc:
            raise RobotError(0, exc) from exc
    else:
        dest: list = []
        info = None
        for r in robots:
            obs = look(pts, r.frame)
            local_frames = world_frames(obs)
            try:
                m = algorithm(obs, local_frames, seed, tol)
            except Exception as exc:
                raise RobotError(r.index, exc) from exc
            d = m.destinations[r.index]
            dest.append(None if d is None else r.frame.to_global(d))
            if info is None and d is not None:
                info = m
        moves = MoveSet(dest, info.procedure if info else "stay", info.orbit if info else None)
    new = moves.apply(pts)
    moved = [Robot(r.index, r.frame.moved_to(new[r.index])) for r in robots]
    return new, moved, moves


# ---------------------------------------------------------------------------
# adversaries


def make_adversary(spec: str, seed: int = 0) -> Callable[[np.ndarray], list[LocalFrame]]:
    """Frame generator from ``random``, ``random(S)``, ``world``,
    ``symmetric:G`` or ``symmetric(G, E, S)`` (E indexes the free embeddings)."""
    spec = spec.strip()
    if spec == "world":
        return lambda p: world_frames(as_points(p))
    m = re.fullmatch(r"random(?:\((\d+)\))?", spec)
    if m:
        s = int(m.group(1)) if m.group(1) else seed

        def rand(p):
            rng = np.random.default_rng(s)
            return [random_frame(rng, q) for q in as_points(p)]

        return rand
    m = re.fullmatch(r"symmetric:(\w+)", spec) or re.fullmatch(
        r"symmetric\(\s*(\w+)\s*(?:,\s*(\d+)\s*)?(?:,\s*(\d+)\s*)?\)", spec
    )
    if m:
        kind = GroupKind.parse(m.group(1))
        emb_idx = int(m.group(2)) if m.lastindex and m.lastindex >= 2 and m.group(2) else None
        s = int(m.group(3)) if m.lastindex and m.lastindex >= 3 and m.group(3) else seed

        def sym(p):
            emb = None
            if emb_idx is not None:
                embs = free_embeddings(as_points(p), kind)
                if not embs:
                    raise ValueError(f"not realizable: {kind} does not act freely")
                emb = embs[emb_idx % len(embs)]
            return symmetric_frame_assignment(as_points(p), kind, emb, s)

        return sym
    raise ValueError(f"unknown adversary {spec!r}")


# ---------------------------------------------------------------------------
# runs


def _kinds(points, frames, tol) -> tuple[str, str]:
    return str(detect_rotation_group(points, tol).kind), str(frame_group(frames, tol).kind)


def run(
    P0,
    target=None,
    cfg: SimConfig = SimConfig(),
    frames: Optional[Sequence[LocalFrame]] = None,
) -> Trace:
    """Iterate rounds until the target is formed, the symmetry-breaking
    phase ends (no target), or the step budget runs out."""
    pts = as_points(P0)
    f = None if target is None else as_points(target)
    tol = cfg.tol
    if f is not None:
        if len(f) != len(pts):
            raise ValueError("size mismatch")
        if cfg.algorithm == "psi_pf" and cfg.strict:
            verdict = feasible(pts, f, tol)
            if not verdict.ok:
                raise ValueError(f"infeasible: {verdict.blocker} is in the robots' symmetricity but not the target's")
    if frames is None:
        frames = make_adversary(cfg.adversary, cfg.seed)(pts)
    frames = list(frames)
    robots = [Robot(i, fr) for i, fr in enumerate(frames)]
    algorithm = _algorithm(cfg, f)
    configs = [pts]
    steps: list[StepRecord] = []
    g, s = _kinds(pts, frames, tol)
    gamma, sigma = [g], [s]
    outcome = Outcome("BudgetExceeded")
    for t in range(cfg.max_steps + 1):
        cur = configs[-1]
        if f is not None and similar(cur, f, tol) is not None:
            outcome = Outcome("Formed", t)
            break
        if f is None and _finished(cur, cfg, tol):
            outcome = Outcome("Terminal-no-target", t)
            break
        if t == cfg.max_steps:
            break
        try:
            new, robots, moves = fsync_step(cur, robots, algorithm, cfg.seed, tol, cfg.local)
        except RobotError as exc:
            outcome = Outcome("Error", t, str(exc))
            break
        configs.append(new)
        steps.append(StepRecord(tuple(moves.moved()), moves.orbit, moves.procedure))
        try:
            g, s = _kinds(new, [r.frame for r in robots], tol)
        except ValueError as exc:
            gamma.append("?")
            sigma.append("?")
            outcome = Outcome("Error", t + 1, str(exc))
            break
        gamma.append(g)
        sigma.append(s)
    meta = {"algorithm": cfg.algorithm, "seed": cfg.seed, "adversary": cfg.adversary}
    return Trace(configs, steps, gamma, sigma, outcome, frames, f, cfg, meta)


def _finished(points: np.ndarray, cfg: SimConfig, tol: Tolerance) -> bool:
    if cfg.algorithm == "go_to_center":
        a = analyze(points, tol)
        return not (a.arr.kind.polyhedral and len(a.decomposition) == 1)
    if cfg.algorithm == "psi_sym":
        return psi_sym_terminal(points, tol)
    return False


# ---------------------------------------------------------------------------
# offline checks


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str = ""


def verify(trace: Trace, replay: bool = True) -> list[Check]:
    """Re-check a trace: replay, move sets, frame-group monotonicity,
    multiplicity and the similarity claim."""
    tol = trace.config.tol
    checks: list[Check] = []
    configs = [as_points(c) for c in trace.configurations]
    if replay and (trace.config.algorithm != "external"):
        try:
            again = run(configs[0], trace.target, trace.config, trace.frames)
            same = len(again.configurations) == len(configs) and all(
                np.array_equal(a, b) for a, b in zip(again.configurations, configs)
            )
            checks.append(Check("replay", same, "" if same else "replayed configurations differ"))
        except Exception as exc:  # noqa: BLE001 - reported as a failed check
            checks.append(Check("replay", False, str(exc)))
    bad = []
    for t, st in enumerate(trace.steps):
        if t + 1 >= len(configs):
            bad.append(t)
            continue
        changed = np.flatnonzero(np.any(configs[t] != configs[t + 1], axis=1))
        if not set(changed.tolist()) <= set(st.moved):
            bad.append(t)
    checks.append(Check("move-sets", not bad, f"steps {bad}" if bad else ""))
    # frames at every step are the initial frames translated with their robots
    sig_bad = []
    g0 = GroupKind.parse(trace.sigma[0]) if trace.sigma else None
    for t, c in enumerate(configs):
        frames = [fr.moved_to(c[i]) for i, fr in enumerate(trace.frames)]
        recorded = trace.sigma[t] if t < len(trace.sigma) else None
        try:
            k = frame_group(frames, tol).kind
        except ValueError:
            if recorded != "?":
                sig_bad.append(t)
            continue
        if g0 is not None and not (g0.infinite or is_subgroup(g0, k)):
            sig_bad.append(t)
        elif recorded is not None and recorded != str(k):
            sig_bad.append(t)
    checks.append(Check("sigma-monotone", not sig_bad, f"steps {sig_bad}" if sig_bad else ""))
    mult_bad = []
    if not has_multiplicity(configs[0], tol):
        last = len(configs) - 1
        for t, c in enumerate(configs):
            if has_multiplicity(c, tol) and not (t == last and trace.outcome.kind == "Formed"):
                mult_bad.append(t)
    checks.append(Check("no-multiplicity", not mult_bad, f"steps {mult_bad}" if mult_bad else ""))
    if trace.outcome.kind == "Formed":
        ok = trace.target is not None and similar(configs[trace.outcome.step], trace.target, tol) is not None
        checks.append(Check("formed-similar", ok, "" if ok else "final configuration is not similar to the target"))
    return checks
