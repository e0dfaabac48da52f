"""Parametrized scalar fields phi(x, theta) with a flat parameter vector."""
from __future__ import annotations

import json
from dataclasses import dataclass, replace

import numpy as np

from .measures import as_generator

KINDS = ("linear", "mlp", "horospherical")


def _selu(x):
    alpha, scale = 1.6732632423543772, 1.0507009873554805
    return scale * np.where(x > 0, x, alpha * np.expm1(np.minimum(x, 0.0)))


ACTIVATIONS = {
    "relu": lambda x: np.maximum(x, 0.0),
    "selu": _selu,
    "identity": lambda x: x,
}


@dataclass(frozen=True, eq=False)
class Projector:
    kind: str
    theta: np.ndarray
    dim: int
    layer_sizes: tuple = ()
    activation: str = "relu"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown projector kind {self.kind!r}")
        theta = np.array(self.theta, dtype=float).ravel()
        if self.kind == "horospherical":
            nrm = np.linalg.norm(theta)
            if nrm == 0:
                raise ValueError("horospherical theta must be non-zero")
            theta = theta / nrm
        if theta.size != expected_q(self.kind, self.dim, self.layer_sizes):
            raise ValueError(f"{self.kind} projector expects q = "
                             f"{expected_q(self.kind, self.dim, self.layer_sizes)}, got {theta.size}")
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")
        theta.setflags(write=False)
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "layer_sizes", tuple(int(s) for s in self.layer_sizes))

    @property
    def q(self) -> int:
        return self.theta.size

    @property
    def homogeneous(self) -> bool:
        return self.kind == "linear"

    @property
    def on_sphere(self) -> bool:
        return self.kind == "horospherical"

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "dim": self.dim,
            "layer_sizes": list(self.layer_sizes),
            "activation": self.activation,
            "theta": self.theta.tolist(),
        }

    @classmethod
    def from_json(cls, obj) -> "Projector":
        if isinstance(obj, str):
            obj = json.loads(obj)
        sizes = tuple(obj.get("layer_sizes") or ())
        dim = obj.get("dim", sizes[0] if sizes else len(obj["theta"]))
        return cls(obj["kind"], obj["theta"], dim, sizes, obj.get("activation", "relu"))


def expected_q(kind, dim, layer_sizes=()) -> int:
    if kind == "mlp":
        return sum(i * o + o for i, o in zip(layer_sizes[:-1], layer_sizes[1:]))
    return int(dim)


def linear(theta) -> Projector:
    theta = np.asarray(theta, dtype=float).ravel()
    return Projector("linear", theta, theta.size)


def horospherical(theta) -> Projector:
    theta = np.asarray(theta, dtype=float).ravel()
    return Projector("horospherical", theta, theta.size)


def mlp(layer_sizes, theta, activation="relu") -> Projector:
    layer_sizes = tuple(layer_sizes)
    return Projector("mlp", theta, layer_sizes[0], layer_sizes, activation)


def mlp_init_he(layer_sizes, rng=None, activation="relu") -> Projector:
    """Feed-forward projector with He-normal weights and zero biases."""
    layer_sizes = tuple(int(s) for s in layer_sizes)
    if len(layer_sizes) < 2:
        raise ValueError("an mlp needs at least an input and an output size")
    if layer_sizes[-1] != 1:
        raise ValueError("the last layer of a projector must have width 1")
    gen = as_generator(rng)
    chunks = []
    for fan_in, fan_out in zip(layer_sizes[:-1], layer_sizes[1:]):
        chunks.append(gen.normal(0.0, np.sqrt(2.0 / fan_in), size=fan_in * fan_out))
        chunks.append(np.zeros(fan_out))
    return mlp(layer_sizes, np.concatenate(chunks), activation)


def random_direction(d, rng=None) -> np.ndarray:
    gen = as_generator(rng)
    v = gen.standard_normal(d)
    return v / np.linalg.norm(v)


def theta_get(proj: Projector) -> np.ndarray:
    return proj.theta.copy()


def theta_set(proj: Projector, vector) -> Projector:
    vector = np.asarray(vector, dtype=float).ravel()
    if vector.size != proj.q:
        raise ValueError(f"expected {proj.q} parameters, got {vector.size}")
    return replace(proj, theta=vector)


def _unflatten(layer_sizes, thetas):
    """Split (K, q) parameter rows into per-layer (K, out, in) / (K, out) arrays."""
    layers = []
    offset = 0
    K = thetas.shape[0]
    for fan_in, fan_out in zip(layer_sizes[:-1], layer_sizes[1:]):
        W = thetas[:, offset:offset + fan_in * fan_out].reshape(K, fan_out, fan_in)
        offset += fan_in * fan_out
        b = thetas[:, offset:offset + fan_out]
        offset += fan_out
        layers.append((W, b))
    return layers


def _check_points(proj, points):
    points = np.asarray(points, dtype=float)
    if points.ndim == 1:
        points = points[None, :]
    if points.shape[1] != proj.dim:
        raise ValueError(f"points have dimension {points.shape[1]}, projector expects {proj.dim}")
    if proj.kind == "horospherical" and np.any(np.sum(points * points, axis=1) >= 1.0):
        raise ValueError("horospherical projection needs points strictly inside the unit ball")
    return points


def project_many(proj: Projector, thetas, points) -> np.ndarray:
    """Evaluate phi(points, theta_k) for every row of ``thetas``; shape (K, n).

    Horospherical rows are normalized to the unit sphere before use.
    """
    points = _check_points(proj, points)
    thetas = np.atleast_2d(np.asarray(thetas, dtype=float))
    if thetas.shape[1] != proj.q:
        raise ValueError(f"expected {proj.q} parameters per row, got {thetas.shape[1]}")
    if proj.kind == "linear":
        return thetas @ points.T
    if proj.kind == "horospherical":
        u = thetas / np.linalg.norm(thetas, axis=1, keepdims=True)
        sq = np.sum(points * points, axis=1)
        dist2 = sq[None, :] - 2.0 * (u @ points.T) + 1.0
        return np.log(np.maximum(dist2, 1e-300)) - np.log1p(-sq)[None, :]
    act = ACTIVATIONS[proj.activation]
    layers = _unflatten(proj.layer_sizes, thetas)
    hidden = np.matmul(points[None], layers[0][0].transpose(0, 2, 1)) + layers[0][1][:, None, :]
    for W, b in layers[1:]:
        hidden = np.matmul(act(hidden), W.transpose(0, 2, 1)) + b[:, None, :]
    return hidden[..., 0]


def project(proj: Projector, points) -> np.ndarray:
    return project_many(proj, proj.theta[None, :], points)[0]
