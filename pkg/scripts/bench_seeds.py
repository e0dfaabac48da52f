"""Matched wall-clock budgets, min-SWGG against DGSWP(linear), over several seeds."""
import argparse

from dgswp.config import resolve
from dgswp.experiments import DEFAULTS, run_bench


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", type=int, default=5)
    args = ap.parse_args()
    wins = 0
    for seed in range(args.seeds):
        res = run_bench(resolve(DEFAULTS["bench"], {"seed": seed}))
        wins += res.crossover
        print(f"seed {seed} (start log10 W2 {res.initial_log10_w2:.3f})")
        for a, b in res.pairs():
            print(f"  {a.seconds:6.2f}s  min-SWGG {a.iterations:5d} it {a.log10_w2:7.3f}   "
                  f"DGSWP {b.iterations:4d} it {b.log10_w2:7.3f}")
    print(f"crossover on {wins}/{args.seeds} seeds")


if __name__ == "__main__":
    main()
