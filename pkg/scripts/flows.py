"""Final log10 W2 of the Euclidean (d = 2, 20) and hyperbolic flows over several seeds."""
import argparse

from dgswp.config import resolve
from dgswp.experiments import DEFAULTS, run_flows, run_hflows


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", type=int, default=3)
    ap.add_argument("--skip-hyperbolic", action="store_true")
    args = ap.parse_args()
    for seed in range(args.seeds):
        for d in (2, 20):
            res = run_flows(resolve(DEFAULTS["flow"], {"seed": seed, "d": d}))
            summary = "  ".join(f"{m} {tr.probes[-1].log10_w2:.3f}" for m, tr in res.traces.items())
            start = next(iter(res.traces.values())).probes[0].log10_w2
            print(f"seed {seed} d={d:2d}: start {start:.3f}  {summary}", flush=True)
        if not args.skip_hyperbolic:
            res = run_hflows(resolve(DEFAULTS["hflow"], {"seed": seed}))
            summary = "  ".join(f"{m} {tr.w2[-1] / tr.w2[0]:.4f}" for m, tr in res.traces.items())
            print(f"seed {seed} hyperbolic final/initial W2: {summary}", flush=True)


if __name__ == "__main__":
    main()
