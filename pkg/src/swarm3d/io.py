"""JSON files for configurations and traces.

Floats are written with Python's shortest round-trip representation, which
never needs more than 17 significant digits, so files reload bit-for-bit.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional, Union

import numpy as np

from .geom3 import Tolerance
from .sim import Outcome, SimConfig, StepRecord, Trace
from .symmetry.detect import LocalFrame

VERSION = 1

PathLike = Union[str, Path]


class FormatError(ValueError):
    """Malformed or schema-violating file."""


def _floats(value, name: str) -> np.ndarray:
    try:
        arr = np.array(value, dtype=float)
    except (TypeError, ValueError) as exc:
        raise FormatError(f"{name}: not numeric") from exc
    if not np.all(np.isfinite(arr)):
        raise FormatError(f"{name}: non-finite coordinate")
    return arr


def _points(value, name: str = "points") -> np.ndarray:
    arr = _floats(value, name)
    if arr.ndim != 2 or arr.shape[1] != 3:
        raise FormatError(f"{name}: expected a list of [x, y, z]")
    return arr


def _rows(arr: np.ndarray) -> list:
    return [[float(x) for x in row] for row in np.asarray(arr, dtype=float)]


def frame_to_json(fr: LocalFrame) -> dict:
    return {"origin": [float(x) for x in fr.origin], "basis": _rows(fr.basis), "scale": float(fr.scale)}


def frame_from_json(d: dict) -> LocalFrame:
    try:
        origin = _floats(d["origin"], "frame origin")
        basis = _floats(d["basis"], "frame basis")
        scale = float(d.get("scale", 1.0))
    except (KeyError, TypeError) as exc:
        raise FormatError(f"frame: {exc}") from exc
    if origin.shape != (3,):
        raise FormatError("frame origin must have 3 coordinates")
    try:
        return LocalFrame(origin, basis, scale)
    except ValueError as exc:
        raise FormatError(f"frame: {exc}") from exc


@dataclass
class ConfigFile:
    """Robot positions, optionally with multiplicities and local frames."""

    points: np.ndarray
    multiplicities: Optional[list[int]] = None
    frames: Optional[list[LocalFrame]] = None

    def __post_init__(self):
        self.points = _points(self.points)
        if self.multiplicities is not None:
            if len(self.multiplicities) != len(self.points) or any(
                int(m) != m or m < 1 for m in self.multiplicities
            ):
                raise FormatError("multiplicities must be positive integers, one per point")
            self.multiplicities = [int(m) for m in self.multiplicities]
        if len(self.expanded()) < 3:
            raise FormatError("a configuration needs at least 3 robots")
        if self.frames is not None and len(self.frames) != len(self.expanded()):
            raise FormatError("one frame per robot is required")

    def expanded(self) -> np.ndarray:
        """Positions with repeated points written out."""
        if self.multiplicities is None:
            return self.points
        return np.repeat(self.points, self.multiplicities, axis=0)

    def to_json(self) -> dict:
        d: dict[str, Any] = {"version": VERSION, "points": _rows(self.points)}
        if self.multiplicities is not None:
            d["multiplicities"] = list(self.multiplicities)
        if self.frames is not None:
            d["frames"] = [frame_to_json(f) for f in self.frames]
        return d

    @classmethod
    def from_json(cls, d: dict) -> "ConfigFile":
        _check_version(d)
        if "points" not in d:
            raise FormatError("missing 'points'")
        frames = d.get("frames")
        return cls(
            d["points"],
            d.get("multiplicities"),
            None if frames is None else [frame_from_json(f) for f in frames],
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, ConfigFile):
            return NotImplemented
        return (
            np.array_equal(self.points, other.points)
            and self.multiplicities == other.multiplicities
            and _frames_equal(self.frames, other.frames)
        )


def _frames_equal(a, b) -> bool:
    if a is None or b is None:
        return a is b
    return len(a) == len(b) and all(
        np.array_equal(x.origin, y.origin) and np.array_equal(x.basis, y.basis) and x.scale == y.scale
        for x, y in zip(a, b)
    )


def _check_version(d) -> None:
    if not isinstance(d, dict):
        raise FormatError("expected a JSON object")
    if d.get("version") != VERSION:
        raise FormatError(f"unsupported version {d.get('version')!r}")


# ---------------------------------------------------------------------------
# traces


def trace_to_json(tr: Trace) -> dict:
    cfg = tr.config
    steps = []
    for t, st in enumerate(tr.steps):
        steps.append(
            {
                "configuration": _rows(tr.configurations[t + 1]),
                "moved": list(st.moved),
                "moved_orbit": st.moved_orbit,
                "procedure": st.procedure,
                "gamma": tr.gamma[t + 1] if t + 1 < len(tr.gamma) else None,
                "sigma": tr.sigma[t + 1] if t + 1 < len(tr.sigma) else None,
            }
        )
    return {
        "version": VERSION,
        "metadata": {
            "algorithm": cfg.algorithm,
            "seed": cfg.seed,
            "adversary": cfg.adversary,
            "max_steps": cfg.max_steps,
            "strict": cfg.strict,
            "local": cfg.local,
            "tol": {"rel": cfg.tol.rel_eps, "abs": cfg.tol.abs_eps},
            **{k: v for k, v in tr.metadata.items() if k not in ("algorithm", "seed", "adversary")},
        },
        "initial": {"configuration": _rows(tr.configurations[0]), "gamma": tr.gamma[0], "sigma": tr.sigma[0]},
        "frames": [frame_to_json(f) for f in tr.frames],
        "target": None if tr.target is None else _rows(tr.target),
        "steps": steps,
        "outcome": {"kind": tr.outcome.kind, "step": tr.outcome.step, "message": tr.outcome.message},
    }


def trace_from_json(d: dict) -> Trace:
    _check_version(d)
    try:
        meta = dict(d["metadata"])
        tol = Tolerance(float(meta["tol"]["rel"]), float(meta["tol"]["abs"]))
        cfg = SimConfig(
            algorithm=meta["algorithm"],
            adversary=meta["adversary"],
            seed=int(meta["seed"]),
            max_steps=int(meta["max_steps"]),
            tol=tol,
            strict=bool(meta["strict"]),
            local=bool(meta["local"]),
        )
        init = d["initial"]
        configs = [_points(init["configuration"], "initial configuration")]
        gamma, sigma = [init["gamma"]], [init["sigma"]]
        steps = []
        for i, st in enumerate(d["steps"]):
            configs.append(_points(st["configuration"], f"step {i} configuration"))
            steps.append(StepRecord(tuple(int(j) for j in st["moved"]), st["moved_orbit"], str(st["procedure"])))
            gamma.append(st["gamma"])
            sigma.append(st["sigma"])
        frames = [frame_from_json(f) for f in d["frames"]]
        target = None if d["target"] is None else _points(d["target"], "target")
        out = d["outcome"]
        outcome = Outcome(str(out["kind"]), out.get("step"), str(out.get("message", "")))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, FormatError):
            raise
        raise FormatError(f"malformed trace: {exc!r}") from exc
    n = len(configs[0])
    if len(frames) != n or any(len(c) != n for c in configs):
        raise FormatError("inconsistent robot counts")
    extra = {k: v for k, v in meta.items() if k not in ("algorithm", "seed", "adversary", "max_steps", "strict", "local", "tol")}
    meta_out = {"algorithm": cfg.algorithm, "seed": cfg.seed, "adversary": cfg.adversary, **extra}
    return Trace(configs, steps, gamma, sigma, outcome, frames, target, cfg, meta_out)


# ---------------------------------------------------------------------------
# files


def _check_floats(obj) -> None:
    if isinstance(obj, float) and not math.isfinite(obj):
        raise FormatError("non-finite number")
    if isinstance(obj, dict):
        for v in obj.values():
            _check_floats(v)
    elif isinstance(obj, list):
        for v in obj:
            _check_floats(v)


_NUMBER_LIST = re.compile(r"\[\s*([-+0-9.eE]+(?:\s*,\s*[-+0-9.eE]+)*)\s*\]")


def dumps(obj: dict) -> str:
    """Indented JSON with every list of numbers kept on one line."""
    _check_floats(obj)
    text = json.dumps(obj, indent=1, allow_nan=False)
    return _NUMBER_LIST.sub(lambda m: "[" + ", ".join(x.strip() for x in m.group(1).split(",")) + "]", text)


def read_json(path: PathLike) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON ({exc.msg})") from exc


def write_json(path: PathLike, obj: dict) -> None:
    Path(path).write_text(dumps(obj) + "\n", encoding="utf-8")


def load_config(path: PathLike) -> ConfigFile:
    return ConfigFile.from_json(read_json(path))


def save_config(path: PathLike, cfg: ConfigFile) -> None:
    write_json(path, cfg.to_json())


def load_trace(path: PathLike) -> Trace:
    return trace_from_json(read_json(path))


def save_trace(path: PathLike, tr: Trace) -> None:
    write_json(path, trace_to_json(tr))
