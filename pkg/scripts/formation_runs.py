"""End-to-end formation runs with random frames: outcome, steps and timing per target."""

import argparse
import statistics
import time
from collections import Counter

from swarm3d.formation import feasible
from swarm3d.geom3 import similarity_residual
from swarm3d.shapes import parse_shape, place
from swarm3d.sim import SimConfig, run


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--robots", default="cube", help="shape expression for the start")
    ap.add_argument("--targets", nargs="+", default=["ngon(8)", "antiprism(4)", "prism(4)", "pyramid(7)"])
    ap.add_argument("--seeds", type=int, default=100)
    args = ap.parse_args()
    P = place(parse_shape(args.robots), 3)
    for expr in args.targets:
        F = parse_shape(expr)
        v = feasible(P, F)
        if not v.ok:
            print(f"{expr:16s} infeasible (blocker {v.blocker})")
            continue
        outcomes, times, resid = Counter(), [], []
        for seed in range(args.seeds):
            t0 = time.perf_counter()
            tr = run(P, F, SimConfig(seed=seed))
            times.append(time.perf_counter() - t0)
            outcomes[str(tr.outcome)] += 1
            resid.append(similarity_residual(tr.configurations[-1], F))
        print(f"{expr:16s} {dict(outcomes)} mean {statistics.mean(times) * 1e3:.0f}ms "
              f"max {max(times) * 1e3:.0f}ms residual<= {max(resid):.1e}")


if __name__ == "__main__":
    main()
