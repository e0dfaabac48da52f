"""Lifted 1D plans: evaluate h(theta), d^theta and the random-search baselines."""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .exact import cost_matrix
from .measures import as_generator
from .ot1d import Coupling, SortedPlan, nw_corner_plan, solve_1d_uniform
from .poincare import poincare_distance
from .projectors import Projector, linear, project_many, theta_set

_WORKERS = 1


def set_workers(n: int) -> None:
    """Cap the thread pool used for batched objective evaluations."""
    global _WORKERS
    _WORKERS = max(1, int(n))


def get_workers() -> int:
    return _WORKERS


@dataclass(frozen=True, eq=False)
class GswpResult:
    theta_cost: float
    ambient_cost: float
    plan: Coupling

    @property
    def d_theta(self) -> float:
        return self.theta_cost

    def to_json(self) -> dict:
        return {
            "theta_cost": self.theta_cost,
            "ambient_cost": self.ambient_cost,
            "plan": self.plan.to_coo_list(),
        }


def pair_costs(u, v, p=2.0, geometry="euclidean") -> np.ndarray:
    """Ground cost between matched rows of u and v (last axis is the space)."""
    if geometry == "poincare":
        return poincare_distance(u, v) ** p
    diff = u - v
    if p == 2:
        return np.sum(diff * diff, axis=-1)
    return np.sum(np.abs(diff) ** p, axis=-1)


def _check_pair(mu, nu, proj):
    if mu.dim != nu.dim:
        raise ValueError(f"measures live in different dimensions ({mu.dim} vs {nu.dim})")
    if mu.geometry != nu.geometry:
        raise ValueError("measures have different geometries")
    if proj.dim != mu.dim:
        raise ValueError(f"projector expects dimension {proj.dim}, measures have {mu.dim}")


def sorted_plan(mu, nu, xs, ys, p=2.0) -> SortedPlan:
    if mu.n == nu.n and mu.is_uniform and nu.is_uniform:
        return solve_1d_uniform(xs, ys, p)[1]
    return nw_corner_plan(xs, mu.weights, ys, nu.weights)


def gswp_eval(mu, nu, proj: Projector, p=2.0) -> GswpResult:
    """theta-GSWP: 1D OT on the projected supports, lifted to ambient indices."""
    _check_pair(mu, nu, proj)
    if not p > 1:
        raise ValueError(f"exponent p must be > 1, got {p}")
    proj_vals = project_many(proj, proj.theta[None, :], np.vstack([mu.points, nu.points]))[0]
    xs, ys = proj_vals[:mu.n], proj_vals[mu.n:]
    plan = sorted_plan(mu, nu, xs, ys, p)
    i, j, w = plan.seg_i, plan.seg_j, plan.seg_mass
    theta_cost = float(np.sum(w * np.abs(xs[i] - ys[j]) ** p))
    ambient = float(np.sum(w * pair_costs(mu.points[i], nu.points[j], p, mu.geometry)))
    return GswpResult(theta_cost, ambient, plan.to_coupling(mu.n, nu.n))


@dataclass(frozen=True, eq=False)
class BatchEval:
    """h and the projected cost for a stack of parameter vectors."""

    ambient: np.ndarray
    theta_cost: np.ndarray
    # uniform equal-size case only: matched index arrays, shape (K, n)
    src: np.ndarray | None = None
    tgt: np.ndarray | None = None


def _eval_chunk(mu, nu, proj, thetas, p, keep_orders):
    vals = project_many(proj, thetas, np.vstack([mu.points, nu.points]))
    xs, ys = vals[:, :mu.n], vals[:, mu.n:]
    if mu.n == nu.n and mu.is_uniform and nu.is_uniform:
        sig = np.argsort(xs, axis=1, kind="stable")
        tau = np.argsort(ys, axis=1, kind="stable")
        px = np.take_along_axis(xs, sig, axis=1)
        py = np.take_along_axis(ys, tau, axis=1)
        theta_cost = np.mean(np.abs(px - py) ** p, axis=1)
        ambient = np.mean(pair_costs(mu.points[sig], nu.points[tau], p, mu.geometry), axis=1)
        if keep_orders:
            return BatchEval(ambient, theta_cost, sig, tau)
        return BatchEval(ambient, theta_cost)
    ambient = np.empty(len(thetas))
    theta_cost = np.empty(len(thetas))
    for k in range(len(thetas)):
        plan = nw_corner_plan(xs[k], mu.weights, ys[k], nu.weights)
        i, j, w = plan.seg_i, plan.seg_j, plan.seg_mass
        theta_cost[k] = np.sum(w * np.abs(xs[k, i] - ys[k, j]) ** p)
        ambient[k] = np.sum(w * pair_costs(mu.points[i], nu.points[j], p, mu.geometry))
    return BatchEval(ambient, theta_cost)


def evaluate_many(mu, nu, proj: Projector, thetas, p=2.0, keep_orders=False,
                  chunk=64) -> BatchEval:
    """Evaluate the lifted plan cost at every row of ``thetas``.

    Rows are split into chunks that may run on a thread pool; results are
    concatenated in row order, so the output does not depend on scheduling.
    """
    _check_pair(mu, nu, proj)
    thetas = np.atleast_2d(np.asarray(thetas, dtype=float))
    bounds = list(range(0, len(thetas), chunk)) + [len(thetas)]
    parts = [(bounds[k], bounds[k + 1]) for k in range(len(bounds) - 1)]
    run = lambda s: _eval_chunk(mu, nu, proj, thetas[s[0]:s[1]], p, keep_orders)
    if _WORKERS > 1 and len(parts) > 1:
        with ThreadPoolExecutor(max_workers=_WORKERS) as ex:
            results = list(ex.map(run, parts))
    else:
        results = [run(s) for s in parts]
    if len(results) == 1:
        return results[0]
    cat = lambda name: (None if getattr(results[0], name) is None
                        else np.concatenate([getattr(r, name) for r in results]))
    return BatchEval(cat("ambient"), cat("theta_cost"), cat("src"), cat("tgt"))


def h_value(mu, nu, proj: Projector, p=2.0) -> float:
    return float(evaluate_many(mu, nu, proj, proj.theta[None, :], p).ambient[0])


def ambient_cost_of(mu, nu, plan: Coupling, p=2.0) -> float:
    """<C, plan> accumulated over the plan's non-zero entries."""
    return float(np.sum(plan.mass * pair_costs(mu.points[plan.rows], nu.points[plan.cols], p, mu.geometry)))


def average_couplings(couplings) -> Coupling:
    couplings = list(couplings)
    shape = couplings[0].shape
    rows = np.concatenate([c.rows for c in couplings])
    cols = np.concatenate([c.cols for c in couplings])
    mass = np.concatenate([c.mass for c in couplings]) / len(couplings)
    lin, inv = np.unique(rows * shape[1] + cols, return_inverse=True)
    return Coupling(lin // shape[1], lin % shape[1], np.bincount(inv, weights=mass), shape)


def sphere_directions(L, d, rng=None) -> np.ndarray:
    """L directions uniform on S^{d-1}; the first L rows of a larger draw coincide."""
    gen = as_generator(rng)
    g = gen.standard_normal((int(L), d))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def min_swgg_random_search(mu, nu, L, p=2.0, rng=None):
    """Best of L random linear slices by lifted ambient cost.

    Returns ``(GswpResult, theta)`` for the first minimizing direction.
    """
    if L < 1:
        raise ValueError("need at least one direction")
    thetas = sphere_directions(L, mu.dim, rng)
    batch = evaluate_many(mu, nu, linear(thetas[0]), thetas, p)
    k = int(np.argmin(batch.ambient))
    return gswp_eval(mu, nu, linear(thetas[k]), p), thetas[k]


def swd_monte_carlo(mu, nu, L, p=2.0, rng=None) -> float:
    """Monte-Carlo sliced Wasserstein SW_p^p over L uniform directions."""
    if L < 1:
        raise ValueError("need at least one direction")
    thetas = sphere_directions(L, mu.dim, rng)
    return float(np.mean(evaluate_many(mu, nu, linear(thetas[0]), thetas, p).theta_cost))


def dense_cost(mu, nu, p=2.0) -> np.ndarray:
    return cost_matrix(mu.points, nu.points, p, mu.geometry)


__all__ = [
    "GswpResult", "BatchEval", "gswp_eval", "evaluate_many", "h_value", "min_swgg_random_search",
    "swd_monte_carlo", "average_couplings", "ambient_cost_of", "pair_costs", "sphere_directions",
    "set_workers", "get_workers", "theta_set", "dense_cost",
]
