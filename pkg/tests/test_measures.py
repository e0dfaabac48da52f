import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from dgswp.measures import (DiscreteMeasure, RngStream, as_generator, gen_eight_gaussians,
                            gen_hypercube_uniform, gen_swiss_roll, gen_two_moons,
                            gen_wrapped_normal_poincare, make_uniform, normalize_weights)
from dgswp.poincare import MAX_NORM


def test_make_uniform_two_points():
    m = make_uniform([[0, 0], [1, 1]])
    assert m.weights.tolist() == [0.5, 0.5]
    assert m.geometry == "euclidean"


def test_make_uniform_single_point():
    m = make_uniform([3.0])
    assert m.weights.tolist() == [1.0]
    assert m.dim == 1


def test_make_uniform_fifty_points():
    m = make_uniform(np.zeros((50, 2)))
    assert np.all(m.weights == 0.02)


def test_make_uniform_rejects_empty():
    with pytest.raises(ValueError):
        make_uniform([])


@pytest.mark.parametrize("weights", [[0.5, 0.6], [-0.1, 1.1], [1.0]])
def test_invalid_weights_rejected(weights):
    with pytest.raises(ValueError):
        DiscreteMeasure(np.zeros((2, 1)), weights)


def test_poincare_points_must_be_inside_ball():
    with pytest.raises(ValueError):
        DiscreteMeasure([[1.0, 0.0]], [1.0], "poincare")
    DiscreteMeasure([[0.999, 0.0]], [1.0], "poincare")


def test_measure_is_read_only():
    m = make_uniform([[0.0], [1.0]])
    with pytest.raises(ValueError):
        m.points[0, 0] = 5.0


@given(arrays(float, st.integers(1, 40), elements=st.floats(1e-6, 1e6)))
def test_normalize_weights_sums_to_one_exactly(w):
    out = normalize_weights(w)
    assert math.fsum(out) == pytest.approx(1.0, abs=1e-15)
    assert np.all(out >= 0)
    DiscreteMeasure(np.zeros((len(w), 1)), out)


def test_rng_stream_reproducible_and_independent():
    a = RngStream(7, 1).generator().standard_normal(5)
    b = RngStream(7, 1).generator().standard_normal(5)
    c = RngStream(7, 2).generator().standard_normal(5)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
    assert isinstance(as_generator(3), np.random.Generator)


def test_eight_gaussians_zero_std_gives_means():
    m = gen_eight_gaussians(8, RngStream(0), std=0.0)
    angles = np.arctan2(m.points[:, 1], m.points[:, 0])
    expected = 2 * np.pi * np.arange(8) / 8
    got = np.sort(np.mod(angles, 2 * np.pi))
    assert np.allclose(got, expected, atol=1e-12)
    assert np.allclose(np.linalg.norm(m.points, axis=1), 2.0)


def test_eight_gaussians_mean_near_origin():
    m = gen_eight_gaussians(800, RngStream(1))
    stderr = m.points.std(axis=0) / math.sqrt(800)
    assert np.all(np.abs(m.points.mean(axis=0)) < 3 * stderr)


def test_eight_gaussians_mode_counts():
    m = gen_eight_gaussians(500, RngStream(2), std=0.2)
    angles = 2 * np.pi * np.arange(8) / 8
    means = 2 * np.stack([np.cos(angles), np.sin(angles)], axis=1)
    label = np.argmin(((m.points[:, None, :] - means[None]) ** 2).sum(-1), axis=1)
    counts = np.bincount(label, minlength=8)
    sigma = math.sqrt(500 * (1 / 8) * (7 / 8))
    assert np.all(np.abs(counts - 62.5) <= 5 * sigma)


def test_eight_gaussians_needs_eight():
    with pytest.raises(ValueError):
        gen_eight_gaussians(7)


def test_two_moons_on_arcs():
    m = gen_two_moons(400, 0.0, RngStream(3))
    upper = np.abs(np.hypot(m.points[:, 0] + 0.5, m.points[:, 1] + 0.25) - 1.0)
    lower = np.abs(np.hypot(m.points[:, 0] - 0.5, m.points[:, 1] - 0.25) - 1.0)
    assert np.all(np.minimum(upper, lower) < 1e-12)


def test_hypercube_in_unit_square():
    m = gen_hypercube_uniform(300, 2, RngStream(4))
    assert np.all((m.points >= 0) & (m.points <= 1))


def test_swiss_roll_parametric_equation():
    m = gen_swiss_roll(1000, RngStream(5))
    r = np.linalg.norm(m.points, axis=1)
    t = 4 * np.pi * r
    assert np.all((t >= np.pi - 1e-9) & (t <= 4 * np.pi + 1e-9))
    assert np.allclose(m.points[:, 0], r * np.cos(t), atol=1e-9)
    assert np.allclose(m.points[:, 1], r * np.sin(t), atol=1e-9)


def test_swiss_roll_high_dim_preserves_radii():
    low = gen_swiss_roll(50, RngStream(6), d=2)
    high = gen_swiss_roll(50, RngStream(6), d=20)
    assert high.dim == 20
    assert np.allclose(np.linalg.norm(low.points, axis=1), np.linalg.norm(high.points, axis=1))


def test_wrapped_normal_degenerate_scale():
    mean = np.array([0.3, -0.2])
    m = gen_wrapped_normal_poincare(20, mean, 1e-14, RngStream(7))
    assert np.allclose(m.points, mean, atol=1e-12)


def test_wrapped_normal_isotropic_at_origin():
    m = gen_wrapped_normal_poincare(2000, np.zeros(2), 0.5, RngStream(8))
    u = m.points / np.linalg.norm(m.points, axis=1, keepdims=True)
    assert np.linalg.norm(u.mean(axis=0)) < 0.1


def test_wrapped_normal_rejects_bad_mean():
    with pytest.raises(ValueError):
        gen_wrapped_normal_poincare(5, np.array([1.0, 0.0]), 0.1)


@given(st.floats(0.05, 5.0), st.integers(0, 2 ** 32 - 1))
def test_wrapped_normal_inside_ball(scale, seed):
    m = gen_wrapped_normal_poincare(30, np.array([0.7, 0.1]), scale, RngStream(seed))
    assert m.geometry == "poincare"
    assert np.all(np.linalg.norm(m.points, axis=1) <= MAX_NORM)


@pytest.mark.parametrize("make", [
    lambda r: gen_eight_gaussians(40, r),
    lambda r: gen_two_moons(40, 0.1, r),
    lambda r: gen_swiss_roll(40, r, d=5),
    lambda r: gen_hypercube_uniform(40, 3, r),
    lambda r: gen_wrapped_normal_poincare(40, np.array([0.2, 0.2]), 0.4, r),
])
def test_generators_reproducible(make):
    a, b = make(RngStream(11, 3)), make(RngStream(11, 3))
    assert np.array_equal(a.points, b.points)
    assert abs(a.weights.sum() - 1.0) <= 1e-9


def test_json_round_trip():
    m = gen_wrapped_normal_poincare(5, np.zeros(2), 0.3, RngStream(0))
    back = DiscreteMeasure.from_json(json.dumps(m.to_json()))
    assert np.array_equal(back.points, m.points)
    assert back.geometry == "poincare"


def test_csv_round_trip(tmp_path):
    m = DiscreteMeasure([[0.1, 2.0], [3.0, -1.5], [0.0, 0.0]], [0.2, 0.3, 0.5])
    path = tmp_path / "m.csv"
    m.to_csv(path)
    back = DiscreteMeasure.from_csv(path)
    assert np.array_equal(back.points, m.points)
    assert np.allclose(back.weights, m.weights, atol=1e-15)


def test_csv_without_weight_column_is_uniform(tmp_path):
    path = tmp_path / "pts.csv"
    path.write_text("a,b\n0,1\n2,3\n")
    m = DiscreteMeasure.from_csv(path)
    assert m.weights.tolist() == [0.5, 0.5]
    assert m.points.tolist() == [[0.0, 1.0], [2.0, 3.0]]
