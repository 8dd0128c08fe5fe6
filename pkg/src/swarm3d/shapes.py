"""Catalog of configurations: regular polyhedra, prisms, orbits, composites."""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .geom3 import random_rotation
from .symmetry.groups import PHI, GroupKind, canonical_axes, canonical_elements


def _normalize(points: np.ndarray, radius: float = 1.0) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    pts = pts - pts.mean(axis=0)
    return pts * (radius / np.max(np.linalg.norm(pts, axis=1)))


def _signed_perms(base, even_only=False):
    out = set()
    perms = itertools.permutations(range(3))
    for perm in perms:
        if even_only and perm not in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
            continue
        for signs in itertools.product((1, -1), repeat=3):
            out.add(tuple(float(signs[i] * base[perm[i]]) for i in range(3)))
    return np.array(sorted(out))


def tetrahedron(radius: float = 1.0) -> np.ndarray:
    return _normalize([(1, 1, 1), (1, -1, -1), (-1, 1, -1), (-1, -1, 1)], radius)


def cube(radius: float = 1.0) -> np.ndarray:
    return _normalize(list(itertools.product((1, -1), repeat=3)), radius)


def octahedron(radius: float = 1.0) -> np.ndarray:
    return _normalize(_signed_perms((1, 0, 0)), radius)


def cuboctahedron(radius: float = 1.0) -> np.ndarray:
    return _normalize(_signed_perms((1, 1, 0)), radius)


def icosahedron(radius: float = 1.0) -> np.ndarray:
    return _normalize(_signed_perms((0, 1, PHI), even_only=True), radius)


def dodecahedron(radius: float = 1.0) -> np.ndarray:
    pts = list(itertools.product((1, -1), repeat=3))
    pts += [tuple(p) for p in _signed_perms((0, 1 / PHI, PHI), even_only=True)]
    return _normalize(pts, radius)


def icosidodecahedron(radius: float = 1.0) -> np.ndarray:
    pts = [tuple(p) for p in _signed_perms((0, 0, PHI))]
    pts += [tuple(p) for p in _signed_perms((0.5, PHI / 2, PHI * PHI / 2), even_only=True)]
    return _normalize(np.unique(np.round(pts, 12), axis=0), radius)


def truncated_cube(radius: float = 1.0) -> np.ndarray:
    xi = np.sqrt(2.0) - 1.0
    return _normalize(_signed_perms((xi, 1, 1)), radius)


def expanded_cube(delta: float = 0.05, radius: float = 1.0) -> np.ndarray:
    """Each cube corner split into three points pushed out along the face normals."""
    return _normalize(_signed_perms((1 + delta, 1, 1)), radius)


def eps_truncated_cube(eps: float = 0.05, radius: float = 1.0) -> np.ndarray:
    """Each cube corner split into three points pulled in along its edges."""
    return _normalize(_signed_perms((1 - eps, 1, 1)), radius)


def ngon(n: int, radius: float = 1.0, z: float = 0.0, phase: float = 0.0) -> np.ndarray:
    ang = phase + 2 * np.pi * np.arange(n) / n
    return np.column_stack([radius * np.cos(ang), radius * np.sin(ang), np.full(n, z)])


def pyramid(k: int, apex: float = 1.0, base_z: float = -0.35) -> np.ndarray:
    return np.vstack([ngon(k, 1.0, base_z), [[0.0, 0.0, apex]]])


def prism(l: int, half_height: float = 0.4) -> np.ndarray:
    return np.vstack([ngon(l, 1.0, half_height), ngon(l, 1.0, -half_height)])


def antiprism(l: int, half_height: float = 0.45) -> np.ndarray:
    return np.vstack([ngon(l, 1.0, half_height), ngon(l, 1.0, -half_height, np.pi / l)])


def sphenoid(a: float = 1.0, b: float = 0.7, c: float = 0.45) -> np.ndarray:
    return np.array([(a, b, c), (a, -b, -c), (-a, b, -c), (-a, -b, c)], dtype=float)


def rectangle(a: float = 1.0, b: float = 0.6) -> np.ndarray:
    return np.array([(a, b, 0), (-a, b, 0), (-a, -b, 0), (a, -b, 0)], dtype=float)


def orbit(kind: GroupKind, seed_point, frame: Optional[np.ndarray] = None) -> np.ndarray:
    """Image of ``seed_point`` under every rotation of the canonical ``kind``."""
    elems = canonical_elements(kind)
    pts = np.einsum("nij,j->ni", elems, np.asarray(seed_point, dtype=float))
    if frame is not None:
        pts = pts @ frame.T
    return pts


def generic_seed(seed: int = 0) -> np.ndarray:
    rng = np.random.default_rng(seed)
    v = rng.normal(size=3)
    return v / np.linalg.norm(v) * (0.8 + 0.4 * rng.random())


def perturbed(points: np.ndarray, noise: float, seed: int = 0) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return np.asarray(points, dtype=float) + noise * rng.normal(size=np.shape(points))


def random_cloud(n: int, seed: int = 0) -> np.ndarray:
    return np.random.default_rng(seed).uniform(-1, 1, size=(n, 3))


def composite(*parts: np.ndarray) -> np.ndarray:
    return np.vstack(parts)


def place(points: np.ndarray, seed: int) -> np.ndarray:
    """Apply a seeded random rotation, scale and translation."""
    rng = np.random.default_rng(seed)
    rot = random_rotation(rng)
    return (0.5 + 2 * rng.random()) * np.asarray(points) @ rot.T + rng.normal(size=3)


def with_multiplicity(points: np.ndarray, k: int) -> np.ndarray:
    return np.repeat(np.asarray(points, dtype=float), k, axis=0)


def transitive_set(kind: GroupKind, folding: int = 1, radius: float = 1.0, seed: int = 0) -> np.ndarray:
    """U_{G,mu}: the orbit of a seed point whose stabilizer has ``folding`` elements.

    Folding 1 uses a generic seed; larger foldings put the seed on the first
    canonical axis of that fold (the secondary axes for dihedral fold 2).
    """
    if folding == kind.order:
        return np.zeros((1, 3))
    if folding == 1:
        v = generic_seed(seed)
        return orbit(kind, v / np.linalg.norm(v) * radius)
    axes = [a for a in canonical_axes(kind) if a.fold == folding]
    if kind.family == "D" and folding == 2 and kind.n > 2:
        axes = [a for a in axes if not a.principal]
    if not axes:
        raise ValueError(f"{kind} has no orbit with folding {folding}")
    pts = orbit(kind, np.asarray(axes[0].direction, dtype=float) * radius)
    return np.unique(np.round(pts, 12), axis=0)


def basic_union(kind: GroupKind, folding: int, seed: int = 0) -> np.ndarray:
    """U_{G,mu} together with a generic orbit U_{G,1} at a smaller radius."""
    inner = transitive_set(kind, 1, 0.55, seed)
    if folding == 1:
        return composite(inner, transitive_set(kind, 1, 1.0, seed + 1))
    return composite(inner, transitive_set(kind, folding, 1.0))


def _split_args(text: str) -> list[str]:
    out, depth, cur = [], 0, ""
    for ch in text:
        if ch == "," and depth == 0:
            out.append(cur.strip())
            cur = ""
            continue
        depth += (ch == "(") - (ch == ")")
        if depth < 0:
            raise ValueError("unbalanced parentheses")
        cur += ch
    if depth:
        raise ValueError("unbalanced parentheses")
    if cur.strip():
        out.append(cur.strip())
    return out


def parse_shape(expr: str) -> np.ndarray:
    """Build points from an expression such as ``cube``, ``prism(5)``,
    ``orbit(O, 2)``, ``orbit(T, 0.3, 0.5, 0.8)``, ``composite(cube, octahedron)``,
    ``perturbed(icosahedron, 1e-3)`` or ``multiplicity(cube, 3)``."""
    expr = expr.strip()
    m = re.fullmatch(r"([A-Za-z_]\w*)\s*(?:\((.*)\))?", expr, flags=re.S)
    if not m:
        raise ValueError(f"cannot parse shape {expr!r}")
    name, inner = m.group(1), m.group(2)
    args = _split_args(inner) if inner is not None else []
    if name in POLYHEDRA and not args:
        return POLYHEDRA[name]()
    simple = {"truncated_cube": truncated_cube, "sphenoid": sphenoid, "rectangle": rectangle,
              "expanded_cube": expanded_cube, "eps_truncated_cube": eps_truncated_cube}
    if name in simple:
        return simple[name](*[float(a) for a in args])
    ints = {"pyramid": pyramid, "prism": prism, "antiprism": antiprism, "ngon": ngon}
    if name in ints:
        if len(args) != 1:
            raise ValueError(f"{name} takes one integer")
        return ints[name](int(args[0]))
    if name == "random":
        return random_cloud(int(args[0]), int(args[1]) if len(args) > 1 else 0)
    if name == "orbit":
        if not args:
            raise ValueError("orbit needs a group")
        kind = GroupKind.parse(args[0])
        if len(args) == 1:
            return transitive_set(kind, 1)
        if len(args) == 2:
            return transitive_set(kind, int(args[1]))
        if len(args) == 4:
            return orbit(kind, [float(a) for a in args[1:]])
        raise ValueError("orbit takes a group and a folding or a seed point")
    if name == "union":
        return basic_union(GroupKind.parse(args[0]), int(args[1]))
    if name == "composite":
        return composite(*[parse_shape(a) for a in args])
    if name == "perturbed":
        return perturbed(parse_shape(args[0]), float(args[1]), int(args[2]) if len(args) > 2 else 0)
    if name == "multiplicity":
        return with_multiplicity(parse_shape(args[0]), int(args[1]))
    raise ValueError(f"unknown shape {name!r}")


def scaled(points: np.ndarray, radius: float) -> np.ndarray:
    """Scale about the origin so the farthest point lies at ``radius``."""
    pts = np.asarray(points, dtype=float)
    r = float(np.max(np.linalg.norm(pts, axis=1)))
    return pts if r == 0 else pts * (radius / r)


# ---------------------------------------------------------------------------
# named catalog


@dataclass(frozen=True)
class Shape:
    name: str
    points: np.ndarray
    kind: str  # ground-truth rotation group


def _catalog() -> list[Shape]:
    out = [
        Shape("tetrahedron", tetrahedron(), "T"),
        Shape("cube", cube(), "O"),
        Shape("octahedron", octahedron(), "O"),
        Shape("cuboctahedron", cuboctahedron(), "O"),
        Shape("icosahedron", icosahedron(), "I"),
        Shape("dodecahedron", dodecahedron(), "I"),
        Shape("icosidodecahedron", icosidodecahedron(), "I"),
        Shape("truncated_cube", truncated_cube(), "O"),
    ]
    for k in range(2, 7):
        out.append(Shape(f"pyramid({k})", pyramid(k), f"C{k}"))
    for l in range(2, 7):
        out.append(Shape(f"prism({l})", prism(l), f"D{l}"))
    for l in range(2, 7):
        out.append(Shape(f"antiprism({l})", antiprism(l), f"D{l}"))
    out += [
        Shape("sphenoid", sphenoid(), "D2"),
        Shape("rectangle", rectangle(), "D2"),
        Shape("ngon(5)", ngon(5), "D5"),
        Shape("ngon(8)", ngon(8), "D8"),
        Shape("orbit(T)", orbit(GroupKind("T"), generic_seed(1)), "T"),
        Shape("orbit(O)", orbit(GroupKind("O"), generic_seed(2)), "O"),
        Shape("orbit(I)", orbit(GroupKind("I"), generic_seed(3)), "I"),
        Shape("orbit(C3)+orbit(C3)",
              composite(orbit(GroupKind("C", 3), (0.9, 0.1, 0.3)), orbit(GroupKind("C", 3), (0.4, 0.5, -0.6))), "C3"),
        Shape("orbit(D4)", orbit(GroupKind("D", 4), (0.8, 0.15, 0.4)), "D4"),
        Shape("cube+octahedron", composite(cube(), octahedron(0.5)), "O"),
        Shape("perturbed(cube)", perturbed(cube(), 1e-3, 7), "C1"),
        Shape("perturbed(icosahedron)", perturbed(icosahedron(), 1e-3, 8), "C1"),
        Shape("random(20)", random_cloud(20, 9), "C1"),
    ]
    return out


CATALOG: list[Shape] = _catalog()


def catalog_by_name() -> dict[str, Shape]:
    return {s.name: s for s in CATALOG}


POLYHEDRA: dict[str, Callable[[], np.ndarray]] = {
    "tetrahedron": tetrahedron,
    "cube": cube,
    "octahedron": octahedron,
    "cuboctahedron": cuboctahedron,
    "icosahedron": icosahedron,
    "dodecahedron": dodecahedron,
    "icosidodecahedron": icosidodecahedron,
}
