"""Sample (x0, x1) training pairs from a lifted slice plan over aggregated minibatches."""
from __future__ import annotations

import csv
import hashlib
from dataclasses import dataclass, replace

import numpy as np

from .gswp import gswp_eval, pair_costs
from .measures import as_generator, make_uniform
from .optimize import OptimizerConfig, minimize_gswp
from .ot1d import Coupling
from .projectors import Projector


@dataclass(frozen=True, eq=False)
class PairBatch:
    x0: np.ndarray
    x1: np.ndarray
    src_index: np.ndarray
    tgt_index: np.ndarray
    pair_cost: np.ndarray
    plan_cost: float
    theta_id: str
    plan: Coupling

    def __len__(self):
        return len(self.src_index)

    @property
    def mean_cost(self) -> float:
        return float(np.mean(self.pair_cost))

    def to_csv(self, path) -> None:
        d0, d1 = self.x0.shape[1], self.x1.shape[1]
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow([f"x0_{k}" for k in range(d0)] + [f"x1_{k}" for k in range(d1)] + ["cost"])
            for a, b, c in zip(self.x0, self.x1, self.pair_cost):
                writer.writerow([repr(float(v)) for v in a] + [repr(float(v)) for v in b] + [repr(float(c))])


def theta_fingerprint(theta) -> str:
    return hashlib.sha1(np.ascontiguousarray(theta, dtype=float).tobytes()).hexdigest()[:12]


def pairs_from_plan(plan: Coupling, rng=None, size=None):
    """Index pairs drawn from a plan.

    Permutation plans (one entry per row and column) are returned whole,
    sorted by source index. Otherwise ``size`` pairs (default n) are drawn
    with replacement proportionally to mass.
    """
    n, m = plan.shape
    is_perm = (n == m and plan.nnz == n and np.unique(plan.rows).size == n
               and np.unique(plan.cols).size == m)
    if is_perm and size is None:
        order = np.argsort(plan.rows, kind="stable")
        return plan.rows[order], plan.cols[order]
    gen = as_generator(rng)
    k = n if size is None else int(size)
    pick = gen.choice(plan.nnz, size=k, replace=True, p=plan.mass / plan.mass.sum())
    return plan.rows[pick], plan.cols[pick]


class CouplingSampler:
    """Warm-started projector shared across successive calls.

    One instance per data stream; calls mutate the stored projector, so an
    instance must not be used from several threads at once.
    """

    def __init__(self, proj: Projector, opt_cfg: OptimizerConfig | None = None, p=2.0, rng=None):
        self.proj = proj
        self.opt_cfg = OptimizerConfig(steps=1) if opt_cfg is None else opt_cfg
        self.p = p
        self.rng = as_generator(self.opt_cfg.stein.rng if rng is None else rng)
        self.state = None

    def warmup(self, src, tgt, steps):
        mu, nu = _aggregate(src, tgt)
        cfg = replace(self.opt_cfg, steps=int(steps))
        self.proj, trace = minimize_gswp(mu, nu, self.proj, self.p, cfg, rng=self.rng, state=self.state)
        self.state = trace.state
        return trace

    def __call__(self, src_batches, tgt_batches) -> PairBatch:
        mu, nu = _aggregate(src_batches, tgt_batches)
        self.proj, trace = minimize_gswp(mu, nu, self.proj, self.p, self.opt_cfg,
                                         rng=self.rng, state=self.state)
        self.state = trace.state
        res = gswp_eval(mu, nu, self.proj, self.p)
        i, j = pairs_from_plan(res.plan, self.rng)
        x0, x1 = mu.points[i], nu.points[j]
        return PairBatch(x0, x1, i, j, pair_costs(x0, x1, self.p), res.ambient_cost,
                         theta_fingerprint(self.proj.theta), res.plan)


def _aggregate(src_batches, tgt_batches):
    if isinstance(src_batches, np.ndarray) and src_batches.ndim == 2:
        src_batches = [src_batches]
    if isinstance(tgt_batches, np.ndarray) and tgt_batches.ndim == 2:
        tgt_batches = [tgt_batches]
    if len(src_batches) < 1 or len(tgt_batches) < 1:
        raise ValueError("need at least one batch on each side")
    X = np.vstack([np.asarray(b, dtype=float) for b in src_batches])
    Y = np.vstack([np.asarray(b, dtype=float) for b in tgt_batches])
    if X.shape[0] != Y.shape[0]:
        raise ValueError(f"aggregate sizes differ: {X.shape[0]} vs {Y.shape[0]}")
    return make_uniform(X), make_uniform(Y)


def sample_pairs(src_batches, tgt_batches, proj: Projector, p=2.0,
                 opt_cfg: OptimizerConfig | None = None, rng=None) -> PairBatch:
    """One-shot sampler: optimize the slice on the aggregate, then pair by the lifted plan."""
    return CouplingSampler(proj, opt_cfg, p, rng)(src_batches, tgt_batches)
