"""Seeded go-to-center runs on the seven regular and semiregular polyhedra.

Reports the distribution of rotation groups after one step and how many
fall outside the symmetricity of the start.
"""

import argparse
import time
from collections import Counter

import numpy as np

from swarm3d import shapes
from swarm3d.formation import analyze, go_to_center_step
from swarm3d.shapes import place
from swarm3d.symmetry import detect_rotation_group, symmetricity
from swarm3d.symmetry.symmetricity import random_frame


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--runs", type=int, default=1000)
    args = ap.parse_args()
    for name, make in shapes.POLYHEDRA.items():
        P = place(make(), 1)
        a = analyze(P)
        rho = symmetricity(P, arr=a.arr)
        kinds, outside = Counter(), 0
        t0 = time.perf_counter()
        for seed in range(args.runs):
            rng = np.random.default_rng(seed)
            frames = [random_frame(rng, p) for p in P]
            k = detect_rotation_group(go_to_center_step(P, seed, frames, analysis=a).apply(P)).kind
            kinds[str(k)] += 1
            outside += k not in rho
        dt = time.perf_counter() - t0
        print(f"{name:18s} rho={str(rho):12s} outside={outside:4d} {dict(kinds)} ({dt:.1f}s)")


if __name__ == "__main__":
    main()
