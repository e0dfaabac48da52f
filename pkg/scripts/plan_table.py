"""Transport cost of each method on the Gaussians -> moons instance, over several seeds."""
import argparse

import numpy as np

from dgswp.config import resolve
from dgswp.experiments import DEFAULTS, run_plan


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", type=int, default=5)
    ap.add_argument("--steps", type=int, default=10_000)
    args = ap.parse_args()
    rows = []
    for seed in range(args.seeds):
        res = run_plan(resolve(DEFAULTS["plan"], {"seed": seed, "opt.steps": args.steps}))
        rows.append(res.costs)
        ratios = "  ".join(f"{m} {c / res.costs['exact']:.3f}" for m, c in res.costs.items())
        print(f"seed {seed}: {ratios}", flush=True)
    for method in rows[0]:
        vals = np.array([r[method] for r in rows])
        print(f"{method:14s} mean cost {vals.mean():.4f} +- {vals.std():.4f}")


if __name__ == "__main__":
    main()
