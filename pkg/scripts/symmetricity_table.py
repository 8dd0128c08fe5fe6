"""Print rotation group and symmetricity of every basic union U_{G,mu} with a generic orbit."""

import argparse

from swarm3d.shapes import basic_union, place
from swarm3d.symmetry import C, D, I, O, T, detect_rotation_group, symmetricity

ROWS = [(C(4), 4), (C(4), 1), (D(2), 2), (D(2), 1), (D(4), 4), (D(4), 2), (D(5), 2), (D(6), 2), (D(5), 1),
        (T, 3), (T, 2), (T, 1), (O, 4), (O, 3), (O, 2), (O, 1), (I, 5), (I, 3), (I, 2), (I, 1)]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=5, help="placement seed")
    args = ap.parse_args()
    print(f"{'group':>6} {'mu':>3} {'n':>4} {'gamma':>6}  symmetricity")
    for kind, mu in ROWS:
        pts = place(basic_union(kind, mu), args.seed)
        print(f"{str(kind):>6} {mu:>3} {len(pts):>4} {str(detect_rotation_group(pts).kind):>6}  {symmetricity(pts)}")


if __name__ == "__main__":
    main()
