"""Robots whose frames share a symmetry chase an asymmetric target.

The frame group is printed for every step range; it never drops below the
group the adversary imposed, so the target is never formed.
"""

import argparse
from itertools import groupby

from swarm3d import shapes
from swarm3d.shapes import parse_shape, place
from swarm3d.sim import SimConfig, run


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--robots", default="icosahedron")
    ap.add_argument("--group", default="T")
    ap.add_argument("--steps", type=int, default=100)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args()
    P = place(parse_shape(args.robots), 2)
    F = shapes.random_cloud(len(P), 4)
    tr = run(P, F, SimConfig(adversary=f"symmetric:{args.group}", strict=False, max_steps=args.steps, seed=args.seed))
    print(f"outcome: {tr.outcome} after {len(tr.steps)} steps")
    t = 0
    for (g, s), block in groupby(zip(tr.gamma, tr.sigma)):
        n = len(list(block))
        print(f"  t={t:3d}..{t + n - 1:3d}  gamma={g:4s} sigma={s}")
        t += n


if __name__ == "__main__":
    main()
