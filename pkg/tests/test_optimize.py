import csv

import numpy as np
import pytest

from dgswp.exact import wasserstein_exact
from dgswp.gswp import h_value
from dgswp.measures import DiscreteMeasure, RngStream, make_uniform
from dgswp.optimize import OptimizerConfig, StepSize, minimize_gswp, step_size
from dgswp.projectors import horospherical, linear, mlp_init_he
from dgswp.stein import SteinConfig

from conftest import crossing_pair


def config(steps, eta, method="sgd", seed=0, epsilon=0.05, **kw):
    return OptimizerConfig(steps=steps, step_size=StepSize("constant", eta), method=method,
                           stein=SteinConfig(epsilon=epsilon, rng=RngStream(seed)), **kw)


def test_step_size_policies():
    assert step_size(StepSize(), 17) == 0.2
    cos = StepSize("cosine", 0.4)
    assert step_size(cos, 0, 10) == pytest.approx(0.4)
    assert step_size(cos, 10, 10) == pytest.approx(0.0, abs=1e-15)
    assert step_size(cos, 5, 10) == pytest.approx(0.2)
    assert step_size(StepSize("exponential", 1.0, 0.5), 3) == 0.125


def test_step_size_validation():
    with pytest.raises(ValueError):
        StepSize("linear")
    with pytest.raises(ValueError):
        step_size(StepSize("cosine"), 1)
    with pytest.raises(ValueError):
        OptimizerConfig(steps=0)


def test_identical_measures_keep_theta():
    mu = make_uniform(np.random.default_rng(0).normal(size=(6, 2)))
    best, trace = minimize_gswp(mu, mu, linear([0.3, 0.7]), cfg=config(5, 0.5))
    assert np.array_equal(trace.final.theta, [0.3, 0.7])
    assert np.all(trace.h == 0)


def test_escapes_crossing_slice():
    mu, nu = crossing_pair()
    best, trace = minimize_gswp(mu, nu, linear([1.0, 0.08]), cfg=config(100, 1e-3))
    assert trace.h[0] == pytest.approx(100.0)
    assert h_value(mu, nu, best) == pytest.approx(1.0)
    assert trace.h[trace.best_index] == pytest.approx(1.0)


def test_points_on_a_line_stay_near_exact():
    rng = np.random.default_rng(1)
    v = np.array([0.8, 0.6])
    mu = make_uniform(np.outer(rng.normal(size=10), v))
    nu = make_uniform(np.outer(rng.normal(size=10) + 3, v))
    best, _ = minimize_gswp(mu, nu, linear([1.0, 0.2]), cfg=config(30, 0.05))
    assert h_value(mu, nu, best) <= 1.02 * wasserstein_exact(mu, nu)[0]


@pytest.mark.parametrize("method,eta", [("sgd", 0.05), ("momentum", 0.01), ("adam", 0.02)])
def test_best_iterate_never_worse_than_start(method, eta):
    rng = np.random.default_rng(2)
    mu = make_uniform(rng.normal(size=(12, 2)))
    nu = make_uniform(rng.normal(size=(12, 2)) * [3, 0.5] + 1)
    proj = mlp_init_he((2, 8, 1), 0)
    best, trace = minimize_gswp(mu, nu, proj, cfg=config(40, eta, method))
    assert len(trace.records) == 41
    assert [r.t for r in trace.records] == list(range(41))
    assert h_value(mu, nu, best) == pytest.approx(trace.h.min())
    assert trace.h.min() <= trace.h[0]


def test_renormalized_linear_keeps_norm():
    rng = np.random.default_rng(3)
    mu, nu = make_uniform(rng.normal(size=(8, 2))), make_uniform(rng.normal(size=(8, 2)) + 2)
    _, trace = minimize_gswp(mu, nu, linear([3.0, 4.0]), cfg=config(20, 0.5, renormalize_each_step=True))
    assert np.allclose(trace.norms, 5.0)


def test_linear_norm_drift_is_small_without_renormalization():
    rng = np.random.default_rng(4)
    mu, nu = make_uniform(rng.normal(size=(10, 2))), make_uniform(rng.normal(size=(10, 2)) + 1)
    _, trace = minimize_gswp(mu, nu, linear([1.0, 0.0]), cfg=config(50, 0.01))
    assert abs(trace.norms[-1] - 1.0) < 0.2


def test_sphere_parameters_stay_on_sphere():
    rng = np.random.default_rng(5)
    pts = lambda: DiscreteMeasure(rng.uniform(-0.4, 0.4, size=(6, 2)), np.full(6, 1 / 6), "poincare")
    mu, nu = pts(), pts()
    cfg = OptimizerConfig(steps=15, step_size=StepSize("constant", 0.05), method="adam",
                          stein=SteinConfig(epsilon=0.2, perturbation="vmf", rng=RngStream(1)))
    _, trace = minimize_gswp(mu, nu, horospherical([1.0, 0.0]), cfg=cfg)
    assert np.allclose(trace.norms, 1.0)


def test_runs_are_reproducible(tmp_path):
    rng = np.random.default_rng(6)
    mu, nu = make_uniform(rng.normal(size=(8, 2))), make_uniform(rng.normal(size=(8, 2)) + 1)
    a = minimize_gswp(mu, nu, linear([1.0, 1.0]), cfg=config(10, 0.1, seed=3))[1]
    b = minimize_gswp(mu, nu, linear([1.0, 1.0]), cfg=config(10, 0.1, seed=3))[1]
    assert np.array_equal(a.h, b.h)
    a.to_csv(tmp_path / "trace.csv")
    rows = list(csv.reader(open(tmp_path / "trace.csv")))
    assert rows[0] == ["t", "h", "norm_theta", "ms"] and len(rows) == 12


def test_warm_start_continues_state():
    rng = np.random.default_rng(7)
    mu, nu = make_uniform(rng.normal(size=(8, 2))), make_uniform(rng.normal(size=(8, 2)) + 1)
    cfg = config(5, 0.01, method="adam")
    _, first = minimize_gswp(mu, nu, linear([1.0, 0.0]), cfg=cfg)
    _, second = minimize_gswp(mu, nu, first.final, cfg=cfg, rng=first.rng, state=first.state)
    assert second.state.t == 10


def test_divergence_guard_halves_step():
    rng = np.random.default_rng(0)
    x = rng.normal(size=(10, 2))
    mu, nu = make_uniform(x), make_uniform(x + 1e-3 * rng.normal(size=(10, 2)))
    cfg = config(10, 1.0, seed=2, epsilon=0.5)
    _, trace = minimize_gswp(mu, nu, mlp_init_he((2, 16, 1), 2), cfg=cfg)
    halved = [r for r in trace.records if r.halved]
    assert len(halved) == 1
    assert halved[0].h > 10 * trace.h[0]
    assert halved[0].eta == 0.5
    assert all(r.eta == 0.5 for r in trace.records[halved[0].t:-1])


def test_guard_can_be_disabled():
    rng = np.random.default_rng(0)
    x = rng.normal(size=(10, 2))
    mu, nu = make_uniform(x), make_uniform(x + 1e-3 * rng.normal(size=(10, 2)))
    cfg = config(10, 1.0, seed=2, epsilon=0.5, divergence_guard=False)
    _, trace = minimize_gswp(mu, nu, mlp_init_he((2, 16, 1), 2), cfg=cfg)
    assert not any(r.halved for r in trace.records)
