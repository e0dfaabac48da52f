"""Monte-Carlo gradient descent on the smoothed slice objective."""
from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .gswp import h_value
from .measures import as_generator
from .projectors import Projector, theta_set
from .stein import SteinConfig, estimate_gradient

DIVERGENCE_FACTOR = 10.0


@dataclass(frozen=True)
class StepSize:
    """Step-size policy: constant(eta), cosine(eta over ``horizon`` steps) or exponential(eta, decay)."""

    kind: str = "constant"
    eta: float = 0.2
    decay: float = 0.999
    horizon: int | None = None

    def __post_init__(self):
        if self.kind not in ("constant", "cosine", "exponential"):
            raise ValueError(f"unknown step-size policy {self.kind!r}")
        if not self.eta > 0:
            raise ValueError("step size must be positive")
        if self.kind == "exponential" and not self.decay > 0:
            raise ValueError("decay must be positive")


def step_size(policy: StepSize, t: int, horizon: int | None = None) -> float:
    if t < 0:
        raise ValueError("t must be >= 0")
    if policy.kind == "constant":
        return policy.eta
    if policy.kind == "exponential":
        return policy.eta * policy.decay ** t
    T = policy.horizon if policy.horizon is not None else horizon
    if not T:
        raise ValueError("cosine schedule needs a horizon")
    return policy.eta * (1.0 + math.cos(math.pi * min(t, T) / T)) / 2.0


@dataclass(frozen=True)
class OptimizerConfig:
    steps: int = 1000
    step_size: StepSize = field(default_factory=StepSize)
    method: str = "sgd"
    momentum: float = 0.9
    beta1: float = 0.9
    beta2: float = 0.999
    delta: float = 1e-8
    stein: SteinConfig = field(default_factory=SteinConfig)
    renormalize_each_step: bool = False
    divergence_guard: bool = True

    def __post_init__(self):
        if int(self.steps) < 1:
            raise ValueError("steps must be >= 1")
        if self.method not in ("sgd", "momentum", "adam"):
            raise ValueError(f"unknown method {self.method!r}")
        for name in ("momentum", "beta1", "beta2", "delta"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")


class OptimizerState:
    """Moment buffers and step counter; kept across warm-started calls."""

    def __init__(self, cfg: OptimizerConfig, q: int):
        self.cfg = cfg
        self.t = 0
        self.m = np.zeros(q)
        self.v = np.zeros(q)
        self.eta_scale = 1.0

    def direction(self, grad):
        cfg = self.cfg
        self.t += 1
        if cfg.method == "sgd":
            return grad
        if cfg.method == "momentum":
            self.m = cfg.momentum * self.m + grad
            return self.m
        self.m = cfg.beta1 * self.m + (1 - cfg.beta1) * grad
        self.v = cfg.beta2 * self.v + (1 - cfg.beta2) * grad * grad
        m_hat = self.m / (1 - cfg.beta1 ** self.t)
        v_hat = self.v / (1 - cfg.beta2 ** self.t)
        return m_hat / (np.sqrt(v_hat) + cfg.delta)


@dataclass
class StepRecord:
    t: int
    h: float
    norm_theta: float
    ms: float
    eta: float
    halved: bool = False


@dataclass
class OptTrace:
    records: list
    final: Projector | None = None
    best_index: int = 0
    state: OptimizerState | None = None
    rng: np.random.Generator | None = None

    @property
    def h(self) -> np.ndarray:
        return np.array([r.h for r in self.records])

    @property
    def norms(self) -> np.ndarray:
        return np.array([r.norm_theta for r in self.records])

    def to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t", "h", "norm_theta", "ms"])
            for r in self.records:
                writer.writerow([r.t, repr(r.h), repr(r.norm_theta), f"{r.ms:.3f}"])


class OptimizationError(FloatingPointError):
    def __init__(self, message, trace):
        super().__init__(message)
        self.trace = trace


def _tangent(theta, grad):
    u = theta / np.linalg.norm(theta)
    return grad - (grad @ u) * u


def minimize_gswp(mu, nu, proj_init: Projector, p=2.0, cfg: OptimizerConfig | None = None,
                  rng=None, state: OptimizerState | None = None):
    """Minimize h_eps over the projector parameters.

    Returns ``(best_projector, trace)``; the trace holds T + 1 records (one
    per visited iterate) and the optimizer state / generator for warm
    restarts.
    """
    cfg = OptimizerConfig() if cfg is None else cfg
    gen = as_generator(cfg.stein.rng if rng is None else rng)
    state = OptimizerState(cfg, proj_init.q) if state is None else state
    proj = proj_init
    thetas = []
    records = []
    h0 = None
    trace = OptTrace(records, state=state, rng=gen)
    T = int(cfg.steps)
    for t in range(T):
        start = time.perf_counter()
        est = estimate_gradient(mu, nu, proj, p, cfg.stein, rng=gen)
        h_t = est.h_at_theta
        if not math.isfinite(h_t):
            raise OptimizationError(f"non-finite objective at step {t}", trace)
        h0 = h_t if h0 is None else h0
        halved = False
        if cfg.divergence_guard and h0 > 0 and h_t > DIVERGENCE_FACTOR * h0:
            state.eta_scale *= 0.5
            halved = True
        eta = step_size(cfg.step_size, t, T) * state.eta_scale
        grad = est.gradient
        if proj.on_sphere:
            grad = _tangent(proj.theta, grad)
        new_theta = proj.theta - eta * state.direction(grad)
        if cfg.renormalize_each_step and proj.kind == "linear":
            new_theta = new_theta * (np.linalg.norm(proj.theta) / np.linalg.norm(new_theta))
        if not np.all(np.isfinite(new_theta)):
            raise OptimizationError(f"non-finite parameters after step {t}", trace)
        thetas.append(proj.theta)
        records.append(StepRecord(t, h_t, float(np.linalg.norm(proj.theta)),
                                  1e3 * (time.perf_counter() - start), eta, halved))
        proj = theta_set(proj, new_theta)
    start = time.perf_counter()
    h_T = h_value(mu, nu, proj, p)
    if not math.isfinite(h_T):
        raise OptimizationError("non-finite objective at the final iterate", trace)
    thetas.append(proj.theta)
    records.append(StepRecord(T, h_T, float(np.linalg.norm(proj.theta)),
                              1e3 * (time.perf_counter() - start), 0.0))
    best = int(np.argmin([r.h for r in records]))
    trace.best_index = best
    trace.final = proj
    return theta_set(proj_init, thetas[best]), trace
