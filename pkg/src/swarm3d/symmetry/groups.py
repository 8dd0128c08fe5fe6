"""Finite rotation groups: kinds, canonical elements, axes and the subgroup lattice."""

from __future__ import annotations

import functools
import re
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..geom3 import axis_angle, rotation_matrix, unit

PHI = (1.0 + 5.0 ** 0.5) / 2.0


@dataclass(frozen=True, order=True)
class GroupKind:
    """One of C_k, D_l, T, O, I, or the collinear kinds Cinf / Dinf."""

    family: str
    n: int = 0

    def __post_init__(self):
        if self.family == "C" and self.n < 1:
            raise ValueError("C_k needs k >= 1")
        if self.family == "D" and self.n < 2:
            raise ValueError("D_l needs l >= 2")
        if self.family not in ("C", "D", "T", "O", "I", "Cinf", "Dinf"):
            raise ValueError(f"unknown group family {self.family!r}")

    @property
    def infinite(self) -> bool:
        return self.family in ("Cinf", "Dinf")

    @property
    def polyhedral(self) -> bool:
        return self.family in ("T", "O", "I")

    @property
    def order(self) -> int:
        if self.family == "C":
            return self.n
        if self.family == "D":
            return 2 * self.n
        if self.family in ("T", "O", "I"):
            return {"T": 12, "O": 24, "I": 60}[self.family]
        raise ValueError("infinite group has no finite order")

    def __str__(self) -> str:
        if self.family in ("C", "D"):
            return f"{self.family}{self.n}"
        return self.family

    def __repr__(self) -> str:
        return f"GroupKind({self})"

    @staticmethod
    def parse(text: str) -> "GroupKind":
        text = text.strip()
        m = re.fullmatch(r"([CD])_?(\d+)", text)
        if m:
            return GroupKind(m.group(1), int(m.group(2)))
        if text in ("T", "O", "I", "Cinf", "Dinf"):
            return GroupKind(text)
        raise ValueError(f"cannot parse group kind {text!r}")


def C(k: int) -> GroupKind:
    return GroupKind("C", k)


def D(l: int) -> GroupKind:
    return GroupKind("D", l)


T = GroupKind("T")
O = GroupKind("O")
I = GroupKind("I")
C1 = C(1)


def _divisors(n: int) -> list[int]:
    return [d for d in range(1, n + 1) if n % d == 0]


_POLY_SUBGROUPS = {
    "T": {C(1), C(2), C(3), D(2), T},
    "O": {C(1), C(2), C(3), C(4), D(2), D(3), D(4), T, O},
    "I": {C(1), C(2), C(3), C(5), D(2), D(3), D(5), T, I},
}


def is_subgroup(g: GroupKind, h: GroupKind) -> bool:
    """Whether some copy of ``g`` sits inside ``h`` (the lattice relation g <= h)."""
    if g.infinite or h.infinite:
        raise ValueError("unsupported: infinite rotation groups")
    if g == C1:
        return True
    if h.polyhedral:
        return g in _POLY_SUBGROUPS[h.family]
    if g.polyhedral:
        return False
    if h.family == "C":
        return g.family == "C" and h.n % g.n == 0
    # h dihedral
    if g.family == "C":
        return h.n % g.n == 0 or g.n == 2
    return h.n % g.n == 0


def is_proper_subgroup(g: GroupKind, h: GroupKind) -> bool:
    return g != h and is_subgroup(g, h)


def maximal_kinds(kinds) -> tuple[GroupKind, ...]:
    kinds = set(kinds)
    out = [k for k in kinds if not any(is_proper_subgroup(k, other) for other in kinds)]
    return tuple(sorted(out, key=_kind_sort_key))


def _kind_sort_key(k: GroupKind):
    return (-k.order, k.family, k.n)


# ---------------------------------------------------------------------------
# canonical elements and axes


@dataclass(frozen=True)
class CanonicalAxis:
    direction: tuple[float, float, float]
    fold: int
    oriented: bool
    principal: bool = False


def _key(mat: np.ndarray) -> tuple:
    return tuple(np.round(mat, 8).ravel().tolist())


def closure(generators: list[np.ndarray]) -> list[np.ndarray]:
    elems = [np.eye(3)]
    seen = {_key(np.eye(3))}
    frontier = [np.eye(3)]
    while frontier:
        nxt = []
        for e in frontier:
            for g in generators:
                m = g @ e
                k = _key(m)
                if k not in seen:
                    seen.add(k)
                    elems.append(m)
                    nxt.append(m)
        frontier = nxt
        if len(elems) > 200:
            raise RuntimeError("closure exceeded finite group size")
    return elems


def _line_key(v: np.ndarray) -> tuple:
    v = unit(v)
    for c in v:
        if abs(c) > 1e-9:
            if c < 0:
                v = -v
            break
    return tuple(np.round(v, 7).tolist())


@functools.lru_cache(maxsize=None)
def _canonical(kind: GroupKind):
    if kind.family == "C":
        k = kind.n
        elems = [rotation_matrix([0, 0, 1], 2 * np.pi * j / k) for j in range(k)]
        axes = [CanonicalAxis((0.0, 0.0, 1.0), k, True, True)] if k > 1 else []
    elif kind.family == "D":
        l = kind.n
        elems = [rotation_matrix([0, 0, 1], 2 * np.pi * j / l) for j in range(l)]
        axes = [CanonicalAxis((0.0, 0.0, 1.0), l, False, True)]
        if l % 2:
            dirs = [2 * np.pi * j / l for j in range(l)]
        else:
            dirs = [np.pi * j / l for j in range(l)]
        for ang in dirs:
            d = (float(np.cos(ang)), float(np.sin(ang)), 0.0)
            elems.append(rotation_matrix(d, np.pi))
            axes.append(CanonicalAxis(d, 2, bool(l % 2)))
    elif kind == T:
        gens = [rotation_matrix([0, 0, 1], np.pi), rotation_matrix([1, 1, 1], 2 * np.pi / 3)]
        elems = closure(gens)
        axes = [CanonicalAxis(d, 2, False) for d in [(1.0, 0, 0), (0, 1.0, 0), (0, 0, 1.0)]]
        s = 1 / np.sqrt(3)
        for d in [(1, 1, 1), (1, -1, -1), (-1, 1, -1), (-1, -1, 1)]:
            axes.append(CanonicalAxis(tuple(float(s * c) for c in d), 3, True))
    elif kind == O:
        gens = [rotation_matrix([0, 0, 1], np.pi / 2), rotation_matrix([1, 1, 1], 2 * np.pi / 3)]
        elems = closure(gens)
        axes = _axes_from_elements(elems)
    elif kind == I:
        gens = [rotation_matrix([0, 0, 1], np.pi), rotation_matrix([1, 1, 1], 2 * np.pi / 3),
                rotation_matrix([0, 1, PHI], 2 * np.pi / 5)]
        elems = closure(gens)
        axes = _axes_from_elements(elems)
    else:
        raise ValueError("unsupported: infinite rotation groups")
    elems = np.array(elems)
    if len(elems) != kind.order:
        raise AssertionError(f"canonical {kind} has {len(elems)} elements")
    canon_axes = tuple(axes)
    element_axis = _element_axis_map(elems, canon_axes)
    return elems, canon_axes, element_axis


def _axes_from_elements(elems) -> list[CanonicalAxis]:
    lines: dict[tuple, list] = {}
    exact: dict[tuple, np.ndarray] = {}
    for m in elems:
        ax, ang = axis_angle(m)
        if ang < 1e-9:
            continue
        key = _line_key(ax)
        lines.setdefault(key, []).append(m)
        if key not in exact:
            exact[key] = ax if np.dot(ax, np.array(key)) > 0 else -ax
    out = []
    for key, members in lines.items():
        d = tuple(float(c) for c in unit(exact[key]))
        out.append(CanonicalAxis(d, len(members) + 1, False))
    out.sort(key=lambda a: (-a.fold, a.direction))
    return out


def _element_axis_map(elems, axes) -> tuple[int, ...]:
    """Index of the axis of each element (-1 for the identity)."""
    dirs = np.array([a.direction for a in axes]) if axes else np.zeros((0, 3))
    out = []
    for m in elems:
        ax, ang = axis_angle(m)
        if ang < 1e-9:
            out.append(-1)
            continue
        dots = np.abs(dirs @ ax)
        out.append(int(np.argmax(dots)))
    return tuple(out)


def canonical_elements(kind: GroupKind) -> np.ndarray:
    return _canonical(kind)[0]


def canonical_axes(kind: GroupKind) -> tuple[CanonicalAxis, ...]:
    return _canonical(kind)[1]


def canonical_element_axes(kind: GroupKind) -> tuple[int, ...]:
    return _canonical(kind)[2]


# ---------------------------------------------------------------------------
# classification of an explicit set of rotations


def axis_angles(elems: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Batched axis/angle of proper rotations (angles in [0, pi])."""
    elems = np.asarray(elems, dtype=float)
    tr = np.trace(elems, axis1=1, axis2=2)
    ang = np.arccos(np.clip((tr - 1.0) / 2.0, -1.0, 1.0))
    skew = np.stack(
        [elems[:, 2, 1] - elems[:, 1, 2], elems[:, 0, 2] - elems[:, 2, 0], elems[:, 1, 0] - elems[:, 0, 1]],
        axis=1,
    )
    s = np.linalg.norm(skew, axis=1)
    axes = np.zeros((len(elems), 3))
    big = s > 1e-6
    axes[big] = skew[big] / s[big, None]
    half = ~big & (ang > 1e-9)
    if np.any(half):
        sym = (elems[half] + np.eye(3)) / 2.0
        col = np.argmax(np.diagonal(sym, axis1=1, axis2=2), axis=1)
        v = sym[np.arange(len(sym)), :, col]
        axes[half] = v / np.linalg.norm(v, axis=1)[:, None]
    axes[ang <= 1e-9] = (0.0, 0.0, 1.0)
    return axes, ang


def element_lines(elems: np.ndarray) -> list[tuple[np.ndarray, int]]:
    """Distinct rotation axes (as lines) with their folds."""
    axes, ang = axis_angles(elems)
    ax = axes[ang >= 1e-7]
    if len(ax) == 0:
        return []
    same = np.abs(np.abs(ax @ ax.T) - 1.0) < 1e-7
    # first element on each line represents it
    first = np.argmax(same, axis=1)
    reps, counts = np.unique(first, return_counts=True)
    return [(ax[r], int(c) + 1) for r, c in zip(reps, counts)]


def classify_elements(elems: np.ndarray) -> GroupKind:
    m = len(elems)
    if m == 1:
        return C1
    lines = element_lines(elems)
    if len(lines) == 1:
        return C(m)
    max_fold = max(f for _, f in lines)
    if m == 12 and max_fold == 3:
        return T
    if m == 24 and max_fold == 4 and len(lines) == 13:
        return O
    if m == 60 and max_fold == 5:
        return I
    if m % 2:
        raise ValueError("inconsistent rotation set")
    return D(m // 2)


# ---------------------------------------------------------------------------
# subgroups of canonical groups


@functools.lru_cache(maxsize=None)
def multiplication_table(kind: GroupKind) -> np.ndarray:
    elems = canonical_elements(kind)
    index = {_key(m): i for i, m in enumerate(elems)}
    n = len(elems)
    table = np.empty((n, n), dtype=int)
    for i in range(n):
        for j in range(n):
            table[i, j] = index[_key(elems[i] @ elems[j])]
    return table


def _close_indices(table: np.ndarray, gens: tuple[int, ...]) -> frozenset:
    members = {0}
    frontier = [0]
    while frontier:
        nxt = []
        for e in frontier:
            for g in gens:
                p = int(table[g, e])
                if p not in members:
                    members.add(p)
                    nxt.append(p)
        frontier = nxt
    return frozenset(members)


@dataclass(frozen=True)
class CanonicalSubgroup:
    kind: GroupKind
    members: frozenset


@functools.lru_cache(maxsize=None)
def canonical_subgroups(kind: GroupKind) -> tuple[CanonicalSubgroup, ...]:
    """Every subgroup of the canonical copy of ``kind`` (each is 2-generated)."""
    table = multiplication_table(kind)
    n = len(table)
    elems = canonical_elements(kind)
    found: dict[frozenset, GroupKind] = {}
    cyclic = {}
    for g in range(n):
        s = _close_indices(table, (g,))
        cyclic[g] = s
    reps = sorted({s for s in cyclic.values()}, key=len)
    gen_of = {s: min(g for g, t in cyclic.items() if t == s) for s in reps}
    for s in reps:
        found.setdefault(s, None)
    rep_list = list(reps)
    for i, s1 in enumerate(rep_list):
        for s2 in rep_list[i:]:
            if s2 <= s1 or s1 <= s2:
                continue
            s = _close_indices(table, (gen_of[s1], gen_of[s2]))
            found.setdefault(s, None)
    out = []
    for members in found:
        sub = elems[sorted(members)]
        out.append(CanonicalSubgroup(classify_elements(sub), members))
    out.sort(key=lambda s: (len(s.members), str(s.kind), sorted(s.members)))
    return tuple(out)


def parse_kind_list(text: str) -> list[GroupKind]:
    return [GroupKind.parse(t) for t in re.split(r"[,\s]+", text.strip()) if t]


def kind_to_str(kind: Optional[GroupKind]) -> Optional[str]:
    return None if kind is None else str(kind)
