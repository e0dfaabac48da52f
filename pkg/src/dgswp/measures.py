"""Discrete measures, seeded random streams and toy dataset generators."""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass

import numpy as np

from .poincare import MAX_NORM, clamp_to_ball, mobius_add

GEOMETRIES = ("euclidean", "poincare")


@dataclass(frozen=True)
class RngStream:
    """A (seed, stream_id) pair naming a reproducible stream of draws."""

    seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(int(self.seed), spawn_key=(int(self.stream_id),))
        return np.random.Generator(np.random.PCG64(ss))

    def child(self, stream_id: int) -> "RngStream":
        return RngStream(self.seed, self.stream_id * 1_000_003 + int(stream_id) + 1)


def as_generator(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, RngStream):
        return rng.generator()
    if rng is None or isinstance(rng, (int, np.integer)):
        return RngStream(0 if rng is None else int(rng)).generator()
    raise TypeError(f"cannot build a generator from {type(rng).__name__}")


def normalize_weights(weights) -> np.ndarray:
    w = np.asarray(weights, dtype=float).copy()
    if w.ndim != 1 or w.size == 0:
        raise ValueError("weights must be a non-empty vector")
    if np.any(w < 0) or not np.all(np.isfinite(w)):
        raise ValueError("weights must be finite and non-negative")
    total = w.sum()
    if total <= 0:
        raise ValueError("weights must have positive total mass")
    w /= total
    if math.fsum(w) != 1.0 and w.size > 1:
        # final-element correction keeps the float sum at exactly 1
        w[-1] = max(1.0 - math.fsum(w[:-1]), 0.0)
    return w


@dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    points: np.ndarray
    weights: np.ndarray
    geometry: str = "euclidean"

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        w = np.array(self.weights, dtype=float)
        if pts.ndim != 2 or pts.shape[0] == 0:
            raise ValueError("points must be a non-empty (n, d) array")
        if w.shape != (pts.shape[0],):
            raise ValueError(f"expected {pts.shape[0]} weights, got shape {w.shape}")
        if self.geometry not in GEOMETRIES:
            raise ValueError(f"unknown geometry {self.geometry!r}")
        if np.any(w < 0):
            raise ValueError("weights must be non-negative")
        if abs(w.sum() - 1.0) > 1e-9:
            raise ValueError(f"weights sum to {w.sum()!r}, not 1")
        if not np.all(np.isfinite(pts)):
            raise ValueError("points must be finite")
        if self.geometry == "poincare" and np.any(np.linalg.norm(pts, axis=1) >= 1.0):
            raise ValueError("poincare points must lie in the open unit ball")
        pts.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def is_uniform(self) -> bool:
        return bool(np.allclose(self.weights, 1.0 / self.n, rtol=0, atol=1e-12))

    def with_points(self, points) -> "DiscreteMeasure":
        return DiscreteMeasure(points, self.weights, self.geometry)

    def to_json(self) -> dict:
        return {
            "points": self.points.tolist(),
            "weights": self.weights.tolist(),
            "geometry": self.geometry,
        }

    @classmethod
    def from_json(cls, obj) -> "DiscreteMeasure":
        if isinstance(obj, str):
            obj = json.loads(obj)
        return cls(obj["points"], obj["weights"], obj.get("geometry", "euclidean"))

    def to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow([f"x{k}" for k in range(self.dim)] + ["weight"])
            for pt, w in zip(self.points, self.weights):
                writer.writerow([repr(float(v)) for v in pt] + [repr(float(w))])

    @classmethod
    def from_csv(cls, path, geometry="euclidean") -> "DiscreteMeasure":
        """Read a point-per-row CSV; the last column is the weight.

        A file whose header has no ``weight`` column is read as bare points
        with uniform weights.
        """
        with open(path, newline="", encoding="utf-8") as fh:
            rows = [r for r in csv.reader(fh) if r]
        header = rows[0]
        try:
            [float(v) for v in header]
        except ValueError:
            rows = rows[1:]
        else:
            header = None
        data = np.array([[float(v) for v in r] for r in rows], dtype=float)
        if header is not None and header[-1].strip().lower() != "weight":
            return make_uniform(data, geometry=geometry)
        return cls(data[:, :-1], normalize_weights(data[:, -1]), geometry)


def make_uniform(points, geometry="euclidean") -> DiscreteMeasure:
    pts = np.asarray(points, dtype=float)
    if pts.size == 0:
        raise ValueError("cannot build a measure from an empty point list")
    if pts.ndim == 1:
        pts = pts[:, None]
    n = pts.shape[0]
    return DiscreteMeasure(pts, np.full(n, 1.0 / n), geometry)


def _balanced_labels(n, k, gen):
    return gen.permutation(np.arange(n) % k)


def gen_eight_gaussians(n, rng=None, radius=2.0, std=0.2) -> DiscreteMeasure:
    """Balanced mixture of 8 isotropic Gaussians with means on a circle.

    Mode labels are a shuffled round-robin, so every mode receives either
    floor(n/8) or ceil(n/8) samples.
    """
    if n < 8:
        raise ValueError("eight_gaussians needs n >= 8")
    gen = as_generator(rng)
    labels = _balanced_labels(n, 8, gen)
    angles = 2 * np.pi * np.arange(8) / 8
    means = radius * np.stack([np.cos(angles), np.sin(angles)], axis=1)
    pts = means[labels] + std * gen.standard_normal((n, 2))
    return make_uniform(pts)


def gen_two_moons(n, noise=0.0, rng=None) -> DiscreteMeasure:
    """Two interleaved unit half-circles, centered at (-0.5, -0.25) and (0.5, 0.25)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    gen = as_generator(rng)
    labels = _balanced_labels(n, 2, gen)
    t = gen.uniform(0.0, np.pi, size=n)
    upper = np.stack([np.cos(t) - 0.5, np.sin(t) - 0.25], axis=1)
    lower = np.stack([0.5 - np.cos(t), 0.25 - np.sin(t)], axis=1)
    pts = np.where(labels[:, None] == 0, upper, lower)
    if noise > 0:
        pts = pts + noise * gen.standard_normal(pts.shape)
    return make_uniform(pts)


def random_rotation(d, rng=None) -> np.ndarray:
    gen = as_generator(rng)
    q, r = np.linalg.qr(gen.standard_normal((d, d)))
    return q * np.sign(np.diag(r))


def gen_swiss_roll(n, rng=None, d=2, noise=0.0) -> DiscreteMeasure:
    """2D swiss roll r = t / (4 pi), t in [pi, 4 pi].

    For d > 2 the roll is zero-padded and rotated by a random orthogonal
    matrix drawn from the same stream after the roll parameters.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if d < 2:
        raise ValueError("swiss roll needs d >= 2")
    gen = as_generator(rng)
    t = gen.uniform(np.pi, 4 * np.pi, size=n)
    r = t / (4 * np.pi)
    pts = np.stack([r * np.cos(t), r * np.sin(t)], axis=1)
    if noise > 0:
        pts = pts + noise * gen.standard_normal(pts.shape)
    if d > 2:
        pts = np.hstack([pts, np.zeros((n, d - 2))]) @ random_rotation(d, gen).T
    return make_uniform(pts)


def gen_hypercube_uniform(n, d, rng=None) -> DiscreteMeasure:
    if n < 1:
        raise ValueError("n must be >= 1")
    gen = as_generator(rng)
    return make_uniform(gen.uniform(0.0, 1.0, size=(n, d)))


def gen_wrapped_normal_poincare(n, mean, scale, rng=None) -> DiscreteMeasure:
    """Wrapped normal on the Poincare ball.

    A Gaussian tangent vector at the origin is transported to ``mean`` and
    pushed through the exponential map there, which reduces to
    ``mean (+) tanh(|v|) v/|v|`` with (+) the Mobius addition.
    """
    mean = np.asarray(mean, dtype=float)
    if np.linalg.norm(mean) >= 1.0:
        raise ValueError("mean must lie in the open unit ball")
    if scale <= 0:
        raise ValueError("scale must be positive")
    gen = as_generator(rng)
    v = scale * gen.standard_normal((n, mean.size))
    vnorm = np.linalg.norm(v, axis=1, keepdims=True)
    at_origin = np.tanh(vnorm) * v / np.maximum(vnorm, 1e-300)
    pts = clamp_to_ball(mobius_add(mean[None, :], at_origin), MAX_NORM)
    return make_uniform(pts, geometry="poincare")
