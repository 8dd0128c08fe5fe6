"""``swarm3d`` command line: gen, analyze, check, run, verify.

Exit codes: 0 success or positive verdict, 1 negative verdict, 2 error.
"""

from __future__ import annotations

import json
import sys
from typing import Optional

import click
import numpy as np

from . import io
from .formation import feasible
from .geom3 import DEFAULT_ABS_EPS, Tolerance
from .shapes import parse_shape, place, scaled
from .sim import ALGORITHMS, SimConfig, run, verify
from .symmetry.detect import detect_rotation_group, frame_group
from .symmetry.symmetricity import symmetricity_multiset
from .symmetry.views import decompose

EXIT_OK, EXIT_NO, EXIT_ERROR = 0, 1, 2


class Failure(click.ClickException):
    exit_code = EXIT_ERROR

    def __init__(self, message: str, as_json: bool = False):
        super().__init__(message)
        self.as_json = as_json

    def show(self, file=None):
        if self.as_json:
            click.echo(json.dumps({"error": self.message}))
        else:
            click.echo(f"error: {self.message}", err=True)


def _tol(value: Optional[float]) -> Tolerance:
    if value is None:
        return Tolerance()
    try:
        return Tolerance(value, min(DEFAULT_ABS_EPS, value))
    except ValueError as exc:
        raise Failure(str(exc)) from exc


def _load(path: str, as_json: bool) -> io.ConfigFile:
    try:
        return io.load_config(path)
    except (OSError, ValueError) as exc:
        raise Failure(f"{path}: {exc}", as_json) from exc


def _emit(obj: dict, out: Optional[str]) -> None:
    text = io.dumps(obj)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        click.echo(text)


json_opt = click.option("--json", "as_json", is_flag=True, help="Machine-readable output.")
tol_opt = click.option("--tol", type=float, default=None, help="Relative geometric tolerance.")
out_opt = click.option("--out", type=click.Path(dir_okay=False, writable=True), default=None, help="Output file.")


@click.group()
@click.version_option(package_name="artifact")
def main() -> None:
    """Pattern formation by oblivious robots in 3D space."""


@main.command()
@click.argument("shape")
@click.option("--radius", type=float, default=1.0, show_default=True, help="Farthest point distance.")
@click.option("--seed", type=int, default=None, help="Apply a seeded random rotation, scale and shift.")
@out_opt
def gen(shape: str, radius: float, seed: Optional[int], out: Optional[str]) -> None:
    """Write a configuration file for SHAPE, e.g. cube, prism(5), orbit(O,2), union(I,5)."""
    try:
        pts = scaled(parse_shape(shape), radius)
    except (ValueError, IndexError) as exc:
        raise Failure(str(exc)) from exc
    if seed is not None:
        pts = place(pts, seed)
    uniq, first, counts = np.unique(pts, axis=0, return_index=True, return_counts=True)
    order = np.argsort(first)
    if np.any(counts > 1):
        cfg = io.ConfigFile(uniq[order], [int(c) for c in counts[order]])
    else:
        cfg = io.ConfigFile(pts)
    _emit(cfg.to_json(), out)


def _analysis(cfg: io.ConfigFile, tol: Tolerance) -> dict:
    pts = cfg.expanded()
    arr = detect_rotation_group(pts, tol)
    if arr.kind.infinite:
        raise ValueError(f"unsupported: collinear configuration, rotation group {arr.kind}")
    dec = decompose(pts, arr, tol)
    report = {
        "n": len(pts),
        "gamma": str(arr.kind),
        "order": arr.order,
        "center": [float(x) for x in arr.center],
        "axes": [
            {
                "fold": a.fold,
                "direction": [float(x) for x in a.direction],
                "oriented": a.oriented,
                "principal": a.principal,
                "occupied": a.occupied,
            }
            for a in arr.axes
        ],
        "orbits": [
            {"index": k, "members": list(o), "folding": f}
            for k, (o, f) in enumerate(zip(dec.orbits, dec.foldings))
        ],
        "ordered": dec.ordered,
        "symmetricity": symmetricity_multiset(pts, tol, arr).names(),
    }
    if cfg.frames is not None:
        report["sigma"] = str(frame_group(cfg.frames, tol).kind)
    return report


@main.command()
@click.argument("config", type=click.Path(exists=True, dir_okay=False))
@json_opt
@tol_opt
def analyze(config: str, as_json: bool, tol: Optional[float]) -> None:
    """Rotation group, axes, orbit decomposition and symmetricity of CONFIG."""
    cfg = _load(config, as_json)
    try:
        rep = _analysis(cfg, _tol(tol))
    except ValueError as exc:
        raise Failure(str(exc), as_json) from exc
    if as_json:
        click.echo(json.dumps(rep, indent=1))
        return
    click.echo(f"robots: {rep['n']}")
    click.echo(f"gamma: {rep['gamma']} (order {rep['order']})")
    for a in rep["axes"]:
        flags = ",".join(k for k in ("oriented", "principal", "occupied") if a[k])
        d = " ".join(f"{x:+.6f}" for x in a["direction"])
        click.echo(f"  axis fold {a['fold']}: [{d}] {flags}")
    for o in rep["orbits"]:
        click.echo(f"  orbit {o['index']}: folding {o['folding']}, size {len(o['members'])}, robots {o['members']}")
    click.echo("symmetricity: {" + ", ".join(rep["symmetricity"]) + "}")
    if "sigma" in rep:
        click.echo(f"sigma: {rep['sigma']}")


@main.command()
@click.argument("config", type=click.Path(exists=True, dir_okay=False))
@click.argument("target", type=click.Path(exists=True, dir_okay=False))
@json_opt
@tol_opt
def check(config: str, target: str, as_json: bool, tol: Optional[float]) -> None:
    """Whether robots at CONFIG can form TARGET from any frames."""
    p, f = _load(config, as_json), _load(target, as_json)
    try:
        v = feasible(p.expanded(), f.expanded(), _tol(tol))
    except ValueError as exc:
        raise Failure(str(exc), as_json) from exc
    rep = {
        "feasible": v.ok,
        "blocker": None if v.blocker is None else str(v.blocker),
        "robots": v.robots.names(),
        "target": v.target.names(),
    }
    if as_json:
        click.echo(json.dumps(rep))
    else:
        click.echo(f"robots: {v.robots}  target: {v.target}")
        click.echo("feasible" if v.ok else f"infeasible: {v.blocker} is not a symmetricity of the target")
    sys.exit(EXIT_OK if v.ok else EXIT_NO)


@main.command("run")
@click.argument("config", type=click.Path(exists=True, dir_okay=False))
@click.argument("target", type=click.Path(exists=True, dir_okay=False), required=False)
@click.option("--algorithm", type=click.Choice([a for a in ALGORITHMS if a != "external"]), default=None,
              help="Default psi_pf with a target, psi_sym without.")
@click.option("--adversary", default="random", show_default=True,
              help="random, random(S), world, symmetric:G or symmetric(G,E,S).")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--max-steps", type=int, default=50, show_default=True)
@click.option("--permissive", is_flag=True, help="Run infeasible pairs instead of refusing them.")
@click.option("--local", is_flag=True, help="Each robot computes in its own coordinates.")
@json_opt
@tol_opt
@out_opt
def run_cmd(config, target, algorithm, adversary, seed, max_steps, permissive, local, as_json, tol, out) -> None:
    """Simulate robots from CONFIG, optionally forming TARGET; --out writes the trace."""
    p = _load(config, as_json)
    f = None if target is None else _load(target, as_json).expanded()
    algorithm = algorithm or ("psi_pf" if f is not None else "psi_sym")
    try:
        cfg = SimConfig(algorithm, adversary, seed, max_steps, _tol(tol), strict=not permissive, local=local)
        tr = run(p.expanded(), f, cfg, p.frames)
    except ValueError as exc:
        raise Failure(str(exc), as_json) from exc
    if out:
        io.save_trace(out, tr)
    last = len(tr.configurations) - 1
    summary = {
        "outcome": str(tr.outcome),
        "steps": len(tr.steps),
        "gamma": tr.gamma[last] if last < len(tr.gamma) else None,
        "sigma": tr.sigma[last] if last < len(tr.sigma) else None,
    }
    if as_json:
        click.echo(json.dumps(summary))
    else:
        click.echo(f"{summary['outcome']} after {summary['steps']} steps; gamma {summary['gamma']}, sigma {summary['sigma']}")
    kind = tr.outcome.kind
    sys.exit(EXIT_OK if kind in ("Formed", "Terminal-no-target") else EXIT_NO if kind == "BudgetExceeded" else EXIT_ERROR)


@main.command("verify")
@click.argument("trace", type=click.Path(exists=True, dir_okay=False))
@click.option("--no-replay", is_flag=True, help="Skip re-running the simulation.")
@json_opt
def verify_cmd(trace: str, no_replay: bool, as_json: bool) -> None:
    """Re-check the invariants recorded in TRACE."""
    try:
        tr = io.load_trace(trace)
        checks = verify(tr, replay=not no_replay)
    except (OSError, ValueError) as exc:
        raise Failure(f"{trace}: {exc}", as_json) from exc
    ok = all(c.passed for c in checks)
    if as_json:
        click.echo(json.dumps({"passed": ok, "checks": [c.__dict__ for c in checks]}))
    else:
        for c in checks:
            click.echo(f"{'PASS' if c.passed else 'FAIL'} {c.name}" + (f": {c.detail}" if c.detail else ""))
    sys.exit(EXIT_OK if ok else EXIT_NO)


if __name__ == "__main__":  # pragma: no cover
    main()
