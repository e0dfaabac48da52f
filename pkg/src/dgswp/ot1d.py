"""Closed-form one-dimensional optimal transport."""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

MARGINAL_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class Coupling:
    """Sparse (coordinate-list) transport plan of shape ``(n, m)``."""

    rows: np.ndarray
    cols: np.ndarray
    mass: np.ndarray
    shape: tuple

    def __post_init__(self):
        object.__setattr__(self, "rows", np.asarray(self.rows, dtype=np.intp))
        object.__setattr__(self, "cols", np.asarray(self.cols, dtype=np.intp))
        object.__setattr__(self, "mass", np.asarray(self.mass, dtype=float))
        object.__setattr__(self, "shape", (int(self.shape[0]), int(self.shape[1])))
        if not (self.rows.shape == self.cols.shape == self.mass.shape):
            raise ValueError("rows, cols and mass must have equal length")

    @classmethod
    def from_dense(cls, matrix, atol=0.0) -> "Coupling":
        matrix = np.asarray(matrix, dtype=float)
        r, c = np.nonzero(np.abs(matrix) > atol)
        return cls(r, c, matrix[r, c], matrix.shape)

    @property
    def nnz(self) -> int:
        return int(self.mass.size)

    def to_dense(self) -> np.ndarray:
        out = np.zeros(self.shape)
        np.add.at(out, (self.rows, self.cols), self.mass)
        return out

    def row_sums(self) -> np.ndarray:
        return np.bincount(self.rows, weights=self.mass, minlength=self.shape[0])

    def col_sums(self) -> np.ndarray:
        return np.bincount(self.cols, weights=self.mass, minlength=self.shape[1])

    def check_marginals(self, a, b, tol=1e-9) -> bool:
        return bool(
            np.all(self.mass >= 0)
            and np.allclose(self.row_sums(), a, rtol=0, atol=tol)
            and np.allclose(self.col_sums(), b, rtol=0, atol=tol)
        )

    def transpose(self) -> "Coupling":
        return Coupling(self.cols, self.rows, self.mass, self.shape[::-1])

    def to_coo_list(self) -> list:
        return [[int(i), int(j), float(w)] for i, j, w in zip(self.rows, self.cols, self.mass)]

    def to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["i", "j", "mass"])
            for i, j, w in zip(self.rows, self.cols, self.mass):
                writer.writerow([int(i), int(j), repr(float(w))])

    @classmethod
    def from_csv(cls, path, shape) -> "Coupling":
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))[1:]
        i = [int(r[0]) for r in rows]
        j = [int(r[1]) for r in rows]
        w = [float(r[2]) for r in rows]
        return cls(i, j, w, shape)


@dataclass(frozen=True, eq=False)
class SortedPlan:
    """Monotone 1D plan: segments (i, j, mass) listed in increasing order."""

    source_order: np.ndarray
    target_order: np.ndarray
    seg_i: np.ndarray
    seg_j: np.ndarray
    seg_mass: np.ndarray

    @property
    def segments(self) -> list:
        return list(zip(self.seg_i.tolist(), self.seg_j.tolist(), self.seg_mass.tolist()))

    def to_coupling(self, n=None, m=None) -> Coupling:
        n = len(self.source_order) if n is None else n
        m = len(self.target_order) if m is None else m
        return Coupling(self.seg_i, self.seg_j, self.seg_mass, (n, m))


def _check_p(p):
    if not p > 1:
        raise ValueError(f"exponent p must be > 1, got {p}")


def stable_order(values) -> np.ndarray:
    """Permutation sorting ``values``; ties keep original index order."""
    return np.argsort(values, kind="stable", axis=-1)


def solve_1d_uniform(xs, ys, p=2.0):
    """Sorted matching between two equal-size uniform samples.

    Returns ``(cost, plan)`` with cost = (1/n) sum |x_sigma(k) - y_tau(k)|^p.
    """
    _check_p(p)
    xs = np.asarray(xs, dtype=float).ravel()
    ys = np.asarray(ys, dtype=float).ravel()
    if xs.size != ys.size:
        raise ValueError(f"length mismatch: {xs.size} vs {ys.size}")
    if xs.size == 0:
        raise ValueError("empty input")
    n = xs.size
    sigma = stable_order(xs)
    tau = stable_order(ys)
    cost = float(np.mean(np.abs(xs[sigma] - ys[tau]) ** p))
    plan = SortedPlan(sigma, tau, sigma, tau, np.full(n, 1.0 / n))
    return cost, plan


def nw_corner_plan(xs, a, ys, b) -> SortedPlan:
    """North-west-corner coupling of the sorted supports."""
    xs = np.asarray(xs, dtype=float).ravel()
    ys = np.asarray(ys, dtype=float).ravel()
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    if xs.size != a.size or ys.size != b.size:
        raise ValueError("support and weight lengths differ")
    if abs(a.sum() - b.sum()) > MARGINAL_TOL:
        raise ValueError(f"marginal masses differ: {a.sum()!r} vs {b.sum()!r}")
    sigma = stable_order(xs)
    tau = stable_order(ys)
    ca = np.cumsum(a[sigma])
    cb = np.cumsum(b[tau])
    total = max(ca[-1], cb[-1])
    ca[-1] = cb[-1] = total
    breaks = np.union1d(ca, cb)
    lower = np.concatenate([[0.0], breaks[:-1]])
    mass = breaks - lower
    keep = mass > 0
    mid = 0.5 * (lower[keep] + breaks[keep])
    ri = np.minimum(np.searchsorted(ca, mid, side="left"), xs.size - 1)
    rj = np.minimum(np.searchsorted(cb, mid, side="left"), ys.size - 1)
    return SortedPlan(sigma, tau, sigma[ri], tau[rj], mass[keep])


def solve_1d_general(xs, a, ys, b, p=2.0):
    """1D OT with arbitrary weights; returns ``(cost, Coupling)``.

    The coupling has at most n + m - 1 non-zero entries.
    """
    _check_p(p)
    plan = nw_corner_plan(xs, a, ys, b)
    xs = np.asarray(xs, dtype=float).ravel()
    ys = np.asarray(ys, dtype=float).ravel()
    cost = float(np.sum(plan.seg_mass * np.abs(xs[plan.seg_i] - ys[plan.seg_j]) ** p))
    return cost, plan.to_coupling(xs.size, ys.size)
