"""Experiment drivers shared by the command line, scripts and acceptance tests.

Every driver takes a flat config dict (see ``DEFAULTS``) and returns plain
result objects; writing artifacts is left to the caller.
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .exact import wasserstein_exact
from .flows import FlowConfig, run_flow
from .gswp import gswp_eval, min_swgg_random_search
from .measures import (DiscreteMeasure, RngStream, as_generator, gen_eight_gaussians,
                       gen_hypercube_uniform, gen_swiss_roll, gen_two_moons,
                       gen_wrapped_normal_poincare)
from .optimize import OptimizerConfig, OptTrace, StepSize, minimize_gswp
from .projectors import horospherical, linear, mlp_init_he, random_direction
from .stein import SteinConfig, ot_objective, smoothed_plan, stein_gradient

# RNG stream ids, one per independent random consumer of a run.
SOURCE, TARGET, SEARCH, MLP_INIT, STEIN, LINEAR_INIT, LINEAR_STEIN, SMOOTHING, VARIANCE = range(1, 10)

_STEIN_KEYS = {
    "stein.epsilon": 0.05,
    "stein.n_samples": 20,
    "stein.variance_reduction": True,
    "stein.perturbation": "gaussian",
    "stein.kappa": None,
}

DEFAULTS = {
    "plan": {
        "seed": 0, "n": 50, "source": "eight_gaussians", "target": "two_moons",
        "moons.noise": 0.05, "p": 2.0, "minswgg.directions": 1000,
        "mlp.layers": (2, 64, 16, 1), "mlp.activation": "relu", "linear.enabled": True,
        "opt.method": "sgd", "opt.eta": 0.1, "opt.schedule": "constant", "opt.steps": 10000,
        **_STEIN_KEYS,
    },
    "ablate-vr": {
        "seed": 0, "seeds": 10, "n": 50, "source": "eight_gaussians", "target": "two_moons",
        "moons.noise": 0.05, "p": 2.0, "mlp.layers": (2, 64, 16, 1), "mlp.activation": "relu",
        "opt.method": "sgd", "opt.eta": 0.2, "opt.schedule": "constant", "opt.steps": 1000,
        "variance.trials": 1000, **_STEIN_KEYS,
    },
    "flow": {
        "seed": 0, "n": 50, "d": 2, "source": "hypercube", "target": "swiss_roll", "p": 2.0,
        "outer_steps": 2000, "inner_steps": 20, "outer_step": 0.0025, "probe_every": 10,
        "directions": 20, "methods": ("dgswp", "fixed_direction", "min_swgg", "swd"),
        "opt.method": "adam", "opt.eta": 0.01, "opt.schedule": "constant", **_STEIN_KEYS,
    },
    "hflow": {
        "seed": 0, "n": 50, "source.mean": (0.0, 0.0), "source.scale": 0.3,
        "target.mean": (0.6, 0.3), "target.scale": 0.3, "p": 2.0,
        "outer_steps": 200, "inner_steps": 100, "outer_step": 0.1, "probe_every": 5,
        "methods": ("dgswp", "fixed_direction"),
        "opt.method": "adam", "opt.eta": 0.01, "opt.schedule": "constant",
        **dict(_STEIN_KEYS, **{"stein.perturbation": "vmf"}),
    },
    "couple": {
        "seed": 0, "source": None, "target": None, "p": 2.0, "projector": "linear",
        "mlp.layers": (2, 64, 16, 1), "mlp.activation": "relu", "aggregate": 0,
        "warmup": 200, "steps_per_call": 1,
        "opt.method": "adam", "opt.eta": 0.01, "opt.schedule": "constant", **_STEIN_KEYS,
    },
    "bench": {
        "seed": 0, "n": 50, "d": 2, "p": 2.0, "budgets": (2000, 4000, 6000, 8000),
        "directions": 20, "inner_steps": 20, "outer_step": 0.0025,
        "opt.method": "adam", "opt.eta": 0.01, "opt.schedule": "constant", **_STEIN_KEYS,
    },
}


def as_tuple(value) -> tuple:
    return tuple(value) if isinstance(value, (tuple, list)) else (value,)


def stein_config(cfg: dict, stream: int) -> SteinConfig:
    return SteinConfig(
        epsilon=float(cfg["stein.epsilon"]),
        n_samples=int(cfg["stein.n_samples"]),
        rng=RngStream(int(cfg["seed"]), stream),
        variance_reduction=bool(cfg["stein.variance_reduction"]),
        perturbation=str(cfg["stein.perturbation"]),
        kappa=None if cfg["stein.kappa"] is None else float(cfg["stein.kappa"]),
    )


def optimizer_config(cfg: dict, steps: int, stream: int = STEIN) -> OptimizerConfig:
    return OptimizerConfig(
        steps=int(steps),
        method=str(cfg["opt.method"]),
        step_size=StepSize(kind=str(cfg["opt.schedule"]), eta=float(cfg["opt.eta"])),
        stein=stein_config(cfg, stream),
    )


def make_dataset(name: str, n: int, d: int, rng, noise: float = 0.0) -> DiscreteMeasure:
    if name == "eight_gaussians":
        return gen_eight_gaussians(n, rng)
    if name == "two_moons":
        return gen_two_moons(n, noise, rng)
    if name == "swiss_roll":
        return gen_swiss_roll(n, rng, d=d, noise=noise)
    if name == "hypercube":
        return gen_hypercube_uniform(n, d, rng)
    raise ValueError(f"unknown dataset {name!r}")


def inputs_hash(*measures: DiscreteMeasure) -> str:
    h = hashlib.sha256()
    for m in measures:
        h.update(m.geometry.encode())
        h.update(np.ascontiguousarray(m.points).tobytes())
        h.update(np.ascontiguousarray(m.weights).tobytes())
    return h.hexdigest()


# --- plan table -------------------------------------------------------------

@dataclass
class PlanResult:
    source: DiscreteMeasure
    target: DiscreteMeasure
    costs: dict
    plans: dict
    traces: dict = field(default_factory=dict)
    projectors: dict = field(default_factory=dict)
    smoothed_cost: float = math.nan


def plan_instance(cfg: dict):
    seed, n = int(cfg["seed"]), int(cfg["n"])
    noise = float(cfg["moons.noise"])
    mu = make_dataset(cfg["source"], n, 2, RngStream(seed, SOURCE), noise)
    nu = make_dataset(cfg["target"], n, 2, RngStream(seed, TARGET), noise)
    return mu, nu


def run_plan(cfg: dict, source=None, target=None) -> PlanResult:
    """Exact OT, min-SWGG random search, DGSWP(linear) and DGSWP(mlp) on one instance."""
    seed, p = int(cfg["seed"]), float(cfg["p"])
    mu, nu = plan_instance(cfg) if source is None else (source, target)
    exact_cost, exact_plan = wasserstein_exact(mu, nu, p)
    res = PlanResult(mu, nu, {"exact": exact_cost}, {"exact": exact_plan})

    search, theta = min_swgg_random_search(mu, nu, int(cfg["minswgg.directions"]), p,
                                           RngStream(seed, SEARCH))
    res.costs["min_swgg"] = search.ambient_cost
    res.plans["min_swgg"] = search.plan
    res.projectors["min_swgg"] = linear(theta)

    steps = int(cfg["opt.steps"])
    if cfg["linear.enabled"]:
        init = linear(random_direction(mu.dim, RngStream(seed, LINEAR_INIT)))
        proj, trace = minimize_gswp(mu, nu, init, p, optimizer_config(cfg, steps, LINEAR_STEIN))
        out = gswp_eval(mu, nu, proj, p)
        res.costs["dgswp_linear"] = out.ambient_cost
        res.plans["dgswp_linear"] = out.plan
        res.traces["dgswp_linear"] = trace
        res.projectors["dgswp_linear"] = proj

    layers = tuple(int(k) for k in as_tuple(cfg["mlp.layers"]))
    init = mlp_init_he(layers, RngStream(seed, MLP_INIT), cfg["mlp.activation"])
    proj, trace = minimize_gswp(mu, nu, init, p, optimizer_config(cfg, steps, STEIN))
    out = gswp_eval(mu, nu, proj, p)
    res.costs["dgswp_mlp"] = out.ambient_cost
    res.plans["dgswp_mlp"] = out.plan
    res.traces["dgswp_mlp"] = trace
    res.projectors["dgswp_mlp"] = proj
    res.smoothed_cost = smoothed_plan(mu, nu, proj, p, stein_config(cfg, SMOOTHING)).plan_cost
    return res


# --- variance-reduction ablation ---------------------------------------------

@dataclass
class AblationResult:
    curves: dict
    final: dict
    variance: dict

    @property
    def frac_vr_lower(self) -> float:
        return float(np.mean(self.variance["vr"] < self.variance["naive"]))


def gradient_variances(mu, nu, proj, p, cfg: SteinConfig, trials: int, rng) -> dict:
    """Per-coordinate variance of both estimators over shared perturbation draws."""
    gen = as_generator(rng)
    objective = ot_objective(mu, nu, proj, p)
    with_vr = replace(cfg, variance_reduction=True)
    naive = replace(cfg, variance_reduction=False)
    grads = {"vr": [], "naive": []}
    for _ in range(int(trials)):
        z = gen.standard_normal((cfg.n_samples, proj.q))
        grads["vr"].append(stein_gradient(objective, proj.theta, with_vr, noise=z).gradient)
        grads["naive"].append(stein_gradient(objective, proj.theta, naive, noise=z).gradient)
    return {k: np.var(np.array(v), axis=0, ddof=1) for k, v in grads.items()}


def run_ablation(cfg: dict) -> AblationResult:
    seed, p, steps = int(cfg["seed"]), float(cfg["p"]), int(cfg["opt.steps"])
    layers = tuple(int(k) for k in as_tuple(cfg["mlp.layers"]))
    curves = {"vr": [], "naive": []}
    final = {"vr": [], "naive": []}
    for k in range(int(cfg["seeds"])):
        run_cfg = dict(cfg, seed=seed + k)
        mu, nu = plan_instance(run_cfg)
        init = mlp_init_he(layers, RngStream(seed + k, MLP_INIT), cfg["mlp.activation"])
        for variant, flag in (("vr", True), ("naive", False)):
            opt = optimizer_config(dict(run_cfg, **{"stein.variance_reduction": flag}), steps)
            _, trace = minimize_gswp(mu, nu, init, p, opt)
            curves[variant].append(trace.h[:steps])
            final[variant].append(trace.h[-1])
    mu, nu = plan_instance(cfg)
    init = mlp_init_he(layers, RngStream(seed, MLP_INIT), cfg["mlp.activation"])
    variance = gradient_variances(mu, nu, init, p, stein_config(cfg, STEIN),
                                  int(cfg["variance.trials"]), RngStream(seed, VARIANCE))
    return AblationResult({k: np.array(v) for k, v in curves.items()},
                          {k: np.array(v) for k, v in final.items()}, variance)


# --- gradient flows --------------------------------------------------------------

@dataclass
class FlowResult:
    source: DiscreteMeasure
    target: DiscreteMeasure
    traces: dict


def flow_instance(cfg: dict):
    seed, n, d = int(cfg["seed"]), int(cfg["n"]), int(cfg["d"])
    mu = make_dataset(cfg.get("source", "hypercube"), n, d, RngStream(seed, SOURCE))
    nu = make_dataset(cfg.get("target", "swiss_roll"), n, d, RngStream(seed, TARGET))
    return mu, nu


def _flow_config(cfg, method, geometry="euclidean", steps=None) -> FlowConfig:
    return FlowConfig(
        outer_steps=int(cfg["outer_steps"] if steps is None else steps),
        inner_theta_steps=int(cfg["inner_steps"]),
        outer_step_size=float(cfg["outer_step"]),
        particle_update="poincare_rgd" if geometry == "poincare" else "euclidean_gd",
        probe_every=int(cfg.get("probe_every", 10)),
        baseline=method,
        directions=int(cfg.get("directions", 20)),
        seed=int(cfg["seed"]),
    )


def run_flows(cfg: dict, snapshot_every: int = 0) -> FlowResult:
    """Euclidean flows from the uniform hypercube, one trace per configured method."""
    seed, p = int(cfg["seed"]), float(cfg["p"])
    mu, nu = flow_instance(cfg)
    init = linear(random_direction(mu.dim, RngStream(seed, MLP_INIT)))
    opt = optimizer_config(cfg, int(cfg["inner_steps"]))
    traces = {}
    for method in as_tuple(cfg["methods"]):
        traces[method] = run_flow(mu, nu, init, p, _flow_config(cfg, method), opt,
                                  snapshot_every=snapshot_every)
    return FlowResult(mu, nu, traces)


HFLOW_METHODS = ("dgswp", "fixed_direction")


def hflow_instance(cfg: dict):
    seed, n = int(cfg["seed"]), int(cfg["n"])
    mu = gen_wrapped_normal_poincare(n, np.array(as_tuple(cfg["source.mean"]), dtype=float),
                                     float(cfg["source.scale"]), RngStream(seed, SOURCE))
    nu = gen_wrapped_normal_poincare(n, np.array(as_tuple(cfg["target.mean"]), dtype=float),
                                     float(cfg["target.scale"]), RngStream(seed, TARGET))
    return mu, nu


def run_hflows(cfg: dict, snapshot_every: int = 0) -> FlowResult:
    """Poincare-ball flows with a horospherical projector."""
    seed, p = int(cfg["seed"]), float(cfg["p"])
    mu, nu = hflow_instance(cfg)
    init = horospherical(random_direction(mu.dim, RngStream(seed, MLP_INIT)))
    opt = optimizer_config(cfg, int(cfg["inner_steps"]))
    traces = {}
    for method in as_tuple(cfg["methods"]):
        if method not in HFLOW_METHODS:
            raise ValueError(f"method {method!r} is not available on the Poincare ball")
        traces[method] = run_flow(mu, nu, init, p, _flow_config(cfg, method, "poincare"), opt,
                                  snapshot_every=snapshot_every)
    return FlowResult(mu, nu, traces)


# --- time-budget benchmark -----------------------------------------------------------

@dataclass
class BenchRow:
    budget: int
    seconds: float
    method: str
    iterations: int
    log10_w2: float


@dataclass
class BenchResult:
    rows: list
    initial_log10_w2: float

    def pairs(self):
        """(min_swgg row, dgswp row) for each budget, in budget order."""
        by = {}
        for r in self.rows:
            by.setdefault(r.budget, {})[r.method] = r
        return [(by[b]["min_swgg"], by[b]["dgswp"]) for b in sorted(by)]

    @property
    def leaders(self) -> list:
        return ["min_swgg" if a.log10_w2 < b.log10_w2 else "dgswp" for a, b in self.pairs()]

    @property
    def crossover(self) -> bool:
        lead = self.leaders
        return lead[0] == "min_swgg" and lead[-1] == "dgswp"


def run_bench(cfg: dict) -> BenchResult:
    """min-SWGG random search against DGSWP(linear) at matched wall-clock budgets.

    Budgets are min-SWGG iteration counts; the seconds min-SWGG needs to reach
    each one become the DGSWP budget, and DGSWP is scored at its last
    iteration finished within that time.
    """
    seed, p = int(cfg["seed"]), float(cfg["p"])
    mu, nu = flow_instance(dict(cfg, source="hypercube", target="swiss_roll"))
    init = linear(random_direction(mu.dim, RngStream(seed, MLP_INIT)))
    opt = optimizer_config(cfg, int(cfg["inner_steps"]))
    budgets = sorted(int(b) for b in as_tuple(cfg["budgets"]))
    big = dict(cfg, probe_every=10 ** 9)
    search = run_flow(mu, nu, init, p, _flow_config(big, "min_swgg", steps=budgets[-1]), opt,
                      probe_at=budgets)
    at = {r.step: r for r in search.probes}
    seconds = [at[b].elapsed for b in budgets]
    dense = dict(cfg, probe_every=1)
    ours = run_flow(mu, nu, init, p, _flow_config(dense, "dgswp", steps=10 ** 9), opt,
                    time_limit=seconds[-1])
    rows = []
    for b, sec in zip(budgets, seconds):
        rows.append(BenchRow(b, sec, "min_swgg", b, at[b].log10_w2))
        done = [r for r in ours.probes if r.elapsed <= sec]
        rows.append(BenchRow(b, sec, "dgswp", done[-1].step, done[-1].log10_w2))
    return BenchResult(rows, search.probes[0].log10_w2)


# --- coupling ---------------------------------------------------------------------------

def load_points(path, geometry="euclidean") -> DiscreteMeasure:
    return DiscreteMeasure.from_csv(path, geometry)


def chunks(n: int, size: int):
    size = n if size <= 0 else size
    return [np.arange(s, min(s + size, n)) for s in range(0, n, size)]


def trace_rows(trace: OptTrace):
    """Deterministic learning-curve rows (no wall-time column)."""
    return [(r.t, r.h, r.norm_theta) for r in trace.records]


def flow_summary(traces: dict) -> list:
    return [(name, tr.probes[0].log10_w2, tr.probes[-1].log10_w2) for name, tr in traces.items()]


__all__ = [
    "DEFAULTS", "PlanResult", "AblationResult", "FlowResult", "BenchResult", "BenchRow",
    "run_plan", "run_ablation", "run_flows", "run_hflows", "run_bench", "gradient_variances",
    "plan_instance", "flow_instance", "hflow_instance", "make_dataset", "inputs_hash",
    "stein_config", "optimizer_config", "as_tuple", "load_points", "chunks", "trace_rows",
    "flow_summary",
]
