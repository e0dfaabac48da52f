"""Particle gradient flows driven by lifted slice plans."""
from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .exact import wasserstein_exact, HUNGARIAN_MAX_N
from .gswp import evaluate_many, gswp_eval, min_swgg_random_search, sphere_directions
from .measures import RngStream, as_generator, DiscreteMeasure
from .optimize import OptimizerConfig, minimize_gswp
from .poincare import (MAX_NORM, conformal_factor, poincare_distance, poincare_distance_grad,
                       poincare_exp_map)
from .projectors import Projector, linear, random_direction

__all__ = [
    "FlowConfig", "FlowTrace", "ProbeRecord", "particle_cost_gradient", "run_flow",
    "poincare_exp_map", "poincare_distance", "exact_w2",
]

BASELINES = ("dgswp", "fixed_direction", "min_swgg", "swd")


@dataclass(frozen=True)
class FlowConfig:
    """Outer particle loop settings.

    ``outer_step_size`` multiplies the per-particle velocity ``-grad_i / a_i``
    (the plan-cost gradient divided by the particle's mass), so the step does
    not depend on the sample size.
    """

    outer_steps: int = 2000
    inner_theta_steps: int = 20
    outer_step_size: float = 0.0025
    particle_update: str = "euclidean_gd"
    probe_every: int = 10
    baseline: str = "dgswp"
    directions: int = 20
    seed: int = 0

    def __post_init__(self):
        if int(self.outer_steps) < 0:
            raise ValueError("outer_steps must be >= 0")
        if int(self.inner_theta_steps) < 1:
            raise ValueError("inner_theta_steps must be >= 1")
        if self.particle_update not in ("euclidean_gd", "poincare_rgd"):
            raise ValueError(f"unknown particle update {self.particle_update!r}")
        if self.baseline not in BASELINES:
            raise ValueError(f"unknown baseline {self.baseline!r}")
        if int(self.probe_every) < 1:
            raise ValueError("probe_every must be >= 1")


@dataclass
class ProbeRecord:
    step: int
    w2: float
    objective: float
    elapsed: float = 0.0

    @property
    def log10_w2(self) -> float:
        return math.log10(self.w2) if self.w2 > 0 else float("-inf")


@dataclass
class FlowTrace:
    probes: list
    final: DiscreteMeasure | None = None
    elapsed: float = 0.0
    clamped: int = 0
    snapshots: list = field(default_factory=list)
    projector: Projector | None = None

    @property
    def w2(self) -> np.ndarray:
        return np.array([r.w2 for r in self.probes])

    @property
    def steps(self) -> np.ndarray:
        return np.array([r.step for r in self.probes])

    def to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["step", "log10_W2", "objective"])
            for r in self.probes:
                writer.writerow([r.step, repr(r.log10_w2), repr(r.objective)])


def particle_cost_gradient(source, target, plan, p=2.0, geometry=None) -> np.ndarray:
    """Gradient of <C, plan> with respect to the source particles (plan frozen).

    Euclidean cost sum_k |x_k - y_k|^p differentiates coordinatewise; on the
    Poincare ball the Riemannian gradient of d_B^p is returned.
    """
    geometry = source.geometry if geometry is None else geometry
    if plan.shape != (source.n, target.n):
        raise ValueError(f"plan shape {plan.shape} does not match measures ({source.n}, {target.n})")
    if not plan.check_marginals(source.weights, target.weights, tol=1e-9):
        raise ValueError("plan marginals do not match the measures' weights")
    x = source.points[plan.rows]
    y = target.points[plan.cols]
    w = plan.mass[:, None]
    if geometry == "poincare":
        d = poincare_distance(x, y)[:, None]
        pair = p * d ** (p - 1) * poincare_distance_grad(x, y)
    else:
        diff = x - y
        pair = 2.0 * diff if p == 2 else p * np.abs(diff) ** (p - 1) * np.sign(diff)
    grad = np.zeros_like(source.points)
    np.add.at(grad, plan.rows, w * pair)
    if geometry == "poincare":
        grad = grad / conformal_factor(source.points) ** 2
    return grad


def exact_w2(source, target) -> float:
    if max(source.n, target.n) > HUNGARIAN_MAX_N:
        return float("nan")
    cost, _ = wasserstein_exact(source, target, 2.0)
    return math.sqrt(max(cost, 0.0))


def _move(points, weights, grad, eta, update):
    velocity = -grad / weights[:, None]
    if update == "poincare_rgd":
        moved = poincare_exp_map(points, eta * velocity)
        clamped = int(np.sum(np.linalg.norm(moved, axis=1) >= MAX_NORM - 1e-15))
        return moved, clamped
    return points + eta * velocity, 0


def _swd_gradient(source, target, thetas, p):
    """Gradient of the Monte-Carlo SW_p^p with respect to the source particles."""
    batch = evaluate_many(source, target, linear(thetas[0]), thetas, p, keep_orders=True)
    grad = np.zeros_like(source.points)
    n = source.n
    for theta, sig, tau in zip(thetas, batch.src, batch.tgt):
        diff = source.points[sig] @ theta - target.points[tau] @ theta
        g = p * np.abs(diff) ** (p - 1) * np.sign(diff) / n
        grad[sig] += g[:, None] * theta[None, :]
    return grad / len(thetas), float(np.mean(batch.theta_cost))


def run_flow(source_init, target, proj_init: Projector | None = None, p=2.0,
             flow_cfg: FlowConfig | None = None, opt_cfg: OptimizerConfig | None = None,
             snapshot_every: int = 0, probe_at=(), time_limit: float | None = None) -> FlowTrace:
    """Move the source particles toward the target along lifted-plan gradients.

    Each outer step: refine theta for ``inner_theta_steps`` (warm-started),
    recompute the lifted plan, then take one particle step. Exact-W2 probes
    run outside the timed section. ``probe_at`` adds probes at given steps;
    ``time_limit`` stops the loop once the timed seconds exceed it.
    """
    flow_cfg = FlowConfig() if flow_cfg is None else flow_cfg
    opt_cfg = OptimizerConfig() if opt_cfg is None else opt_cfg
    if source_init.geometry != target.geometry:
        raise ValueError("source and target geometries differ")
    if (flow_cfg.particle_update == "poincare_rgd") != (source_init.geometry == "poincare"):
        raise ValueError("particle update does not match the measures' geometry")
    gen = as_generator(RngStream(flow_cfg.seed, 17))
    inner_cfg = replace(opt_cfg, steps=int(flow_cfg.inner_theta_steps))
    inner_rng = as_generator(opt_cfg.stein.rng)
    state = None
    proj = proj_init
    if proj is None or flow_cfg.baseline == "fixed_direction":
        proj = linear(random_direction(source_init.dim, gen)) if proj is None else proj
    src = source_init
    trace = FlowTrace([ProbeRecord(0, exact_w2(src, target), math.nan)])
    if snapshot_every:
        trace.snapshots.append((0, src.points.copy()))
    elapsed = 0.0
    T = int(flow_cfg.outer_steps)
    extra = {int(k) for k in probe_at}
    for t in range(T):
        start = time.perf_counter()
        if flow_cfg.baseline == "swd":
            thetas = sphere_directions(flow_cfg.directions, src.dim, gen)
            grad, objective = _swd_gradient(src, target, thetas, p)
        else:
            if flow_cfg.baseline == "dgswp":
                proj, otrace = minimize_gswp(src, target, proj, p, inner_cfg, rng=inner_rng, state=state)
                state = otrace.state
                result = gswp_eval(src, target, proj, p)
            elif flow_cfg.baseline == "min_swgg":
                result, theta = min_swgg_random_search(src, target, flow_cfg.directions, p, gen)
                proj = linear(theta)
            else:
                result = gswp_eval(src, target, proj, p)
            objective = result.ambient_cost
            grad = particle_cost_gradient(src, target, result.plan, p)
        moved, clamped = _move(src.points, src.weights, grad, flow_cfg.outer_step_size,
                               flow_cfg.particle_update)
        if not np.all(np.isfinite(moved)):
            raise FloatingPointError(f"non-finite particles after outer step {t}")
        trace.clamped += clamped
        src = src.with_points(moved)
        elapsed += time.perf_counter() - start
        out_of_time = time_limit is not None and elapsed >= time_limit
        if (t + 1) % flow_cfg.probe_every == 0 or t + 1 == T or t + 1 in extra or out_of_time:
            trace.probes.append(ProbeRecord(t + 1, exact_w2(src, target), objective, elapsed))
        if snapshot_every and (t + 1) % snapshot_every == 0:
            trace.snapshots.append((t + 1, src.points.copy()))
        if out_of_time:
            break
    trace.final = src
    trace.elapsed = elapsed
    trace.projector = proj
    return trace
