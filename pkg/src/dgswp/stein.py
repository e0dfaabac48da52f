"""Gaussian smoothing of h and its Monte-Carlo (Stein) gradient estimators."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .gswp import average_couplings, dense_cost, evaluate_many, gswp_eval
from .measures import RngStream, as_generator
from .ot1d import Coupling
from .projectors import Projector, theta_set


@dataclass(frozen=True)
class SteinConfig:
    epsilon: float = 0.05
    n_samples: int = 20
    rng: RngStream = field(default_factory=lambda: RngStream(0))
    variance_reduction: bool = True
    perturbation: str = "gaussian"
    kappa: float | None = None

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if int(self.n_samples) < 1:
            raise ValueError("n_samples must be >= 1")
        if self.perturbation not in ("gaussian", "vmf"):
            raise ValueError(f"unknown perturbation {self.perturbation!r}")
        if self.perturbation == "vmf" and not self.concentration > 0:
            raise ValueError("vmf concentration must be positive")

    @property
    def concentration(self) -> float:
        return 1.0 / self.epsilon ** 2 if self.kappa is None else float(self.kappa)


@dataclass(frozen=True, eq=False)
class GradEstimate:
    gradient: np.ndarray
    h_at_theta: float
    h_perturbed: np.ndarray
    samples_used: int


def sample_vmf(mean_direction, kappa, rng=None, size=None) -> np.ndarray:
    """von Mises-Fisher draws on S^{d-1} by Wood's rejection scheme.

    Returns a single unit vector when ``size`` is None, else ``(size, d)``.
    """
    mu = np.asarray(mean_direction, dtype=float).ravel()
    if abs(np.linalg.norm(mu) - 1.0) > 1e-9:
        raise ValueError("mean_direction must be a unit vector")
    if not kappa > 0:
        raise ValueError("kappa must be positive")
    gen = as_generator(rng)
    d = mu.size
    if d < 2:
        raise ValueError("vMF sampling needs d >= 2")
    k = 1 if size is None else int(size)
    m1 = d - 1.0
    b = m1 / (2.0 * kappa + np.sqrt(4.0 * kappa ** 2 + m1 ** 2))
    x0 = (1.0 - b) / (1.0 + b)
    c = kappa * x0 + m1 * np.log(1.0 - x0 ** 2)
    w = np.empty(k)
    pending = np.arange(k)
    while pending.size:
        z = gen.beta(m1 / 2.0, m1 / 2.0, size=pending.size)
        cand = (1.0 - (1.0 + b) * z) / (1.0 - (1.0 - b) * z)
        u = gen.uniform(size=pending.size)
        ok = kappa * cand + m1 * np.log(1.0 - x0 * cand) - c >= np.log(u)
        w[pending[ok]] = cand[ok]
        pending = pending[~ok]
    v = gen.standard_normal((k, d))
    v -= np.outer(v @ mu, mu)
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    out = w[:, None] * mu[None, :] + np.sqrt(np.maximum(1.0 - w ** 2, 0.0))[:, None] * v
    out /= np.linalg.norm(out, axis=1, keepdims=True)
    return out[0] if size is None else out


Objective = Callable[[np.ndarray], np.ndarray]


def draw_perturbations(theta, cfg: SteinConfig, gen):
    """Perturbed parameter rows plus the per-sample direction used in the estimator.

    Gaussian: rows theta + eps z_k, weights z_k / eps.
    vMF: rows w_k ~ vMF(theta/|theta|, kappa), weights kappa (I - u u^T) w_k.
    """
    theta = np.asarray(theta, dtype=float)
    N = int(cfg.n_samples)
    if cfg.perturbation == "gaussian":
        z = gen.standard_normal((N, theta.size))
        return theta[None, :] + cfg.epsilon * z, z / cfg.epsilon
    u = theta / np.linalg.norm(theta)
    w = sample_vmf(u, cfg.concentration, gen, size=N)
    tangent = w - np.outer(w @ u, u)
    return w, cfg.concentration * tangent


def stein_gradient(objective: Objective, theta, cfg: SteinConfig, rng=None,
                   noise=None) -> GradEstimate:
    """Stein gradient of the smoothed objective for an arbitrary vectorized objective.

    ``objective`` maps a (K, q) stack of parameters to K values. ``noise``
    overrides the Gaussian draws (shape (N, q)), mainly for tests.
    """
    theta = np.asarray(theta, dtype=float).ravel()
    gen = as_generator(cfg.rng if rng is None else rng)
    if noise is not None:
        z = np.asarray(noise, dtype=float).reshape(-1, theta.size)
        rows, weights = theta[None, :] + cfg.epsilon * z, z / cfg.epsilon
    else:
        rows, weights = draw_perturbations(theta, cfg, gen)
    values = np.asarray(objective(np.vstack([theta[None, :], rows])), dtype=float)
    h0, hk = float(values[0]), values[1:]
    if not np.all(np.isfinite(values)):
        raise FloatingPointError("objective returned a non-finite value")
    coef = hk - h0 if cfg.variance_reduction else hk
    grad = coef @ weights / len(hk)
    return GradEstimate(grad, h0, hk, len(hk))


def ot_objective(mu, nu, proj: Projector, p=2.0) -> Objective:
    return lambda thetas: evaluate_many(mu, nu, proj, thetas, p).ambient


def estimate_gradient(mu, nu, proj: Projector, p=2.0, cfg: SteinConfig | None = None,
                      rng=None, noise=None) -> GradEstimate:
    """Monte-Carlo gradient of h_eps at the projector's parameters (N + 1 plan solves)."""
    cfg = SteinConfig() if cfg is None else cfg
    if cfg.perturbation == "vmf" and not proj.on_sphere:
        raise ValueError("vmf perturbations need a sphere-constrained projector")
    return stein_gradient(ot_objective(mu, nu, proj, p), proj.theta, cfg, rng, noise)


@dataclass(frozen=True, eq=False)
class SmoothedPlan:
    h_eps: float
    plan: Coupling
    plan_cost: float


def smoothed_plan(mu, nu, proj: Projector, p=2.0, cfg: SteinConfig | None = None,
                  rng=None) -> SmoothedPlan:
    """Empirical average of lifted plans at the perturbed parameters."""
    cfg = SteinConfig() if cfg is None else cfg
    gen = as_generator(cfg.rng if rng is None else rng)
    rows, _ = draw_perturbations(proj.theta, cfg, gen)
    uniform = mu.n == nu.n and mu.is_uniform and nu.is_uniform
    if uniform:
        batch = evaluate_many(mu, nu, proj, rows, p, keep_orders=True)
        n, m = mu.n, nu.n
        counts = np.bincount((batch.src * m + batch.tgt).ravel(), minlength=n * m)
        lin = np.flatnonzero(counts)
        plan = Coupling(lin // m, lin % m, counts[lin] / (n * len(rows)), (n, m))
        h_eps = float(np.mean(batch.ambient))
    else:
        results = [gswp_eval(mu, nu, theta_set(proj, r), p) for r in rows]
        plan = average_couplings([r.plan for r in results])
        h_eps = float(np.mean([r.ambient_cost for r in results]))
    C = dense_cost(mu, nu, p)
    plan_cost = float(np.sum(plan.mass * C[plan.rows, plan.cols]))
    return SmoothedPlan(h_eps, plan, plan_cost)


def h_eps_estimate(mu, nu, proj: Projector, p=2.0, cfg: SteinConfig | None = None,
                   rng=None) -> float:
    """Monte-Carlo h_eps; cross-checked against the cost of the averaged plan."""
    res = smoothed_plan(mu, nu, proj, p, cfg, rng)
    if abs(res.h_eps - res.plan_cost) > 1e-9 * max(1.0, abs(res.h_eps)):
        raise RuntimeError(f"averaged-plan cost {res.plan_cost!r} disagrees with mean h {res.h_eps!r}")
    return res.h_eps
