"""Exact small-instance optimal transport, used as a validation oracle."""
from __future__ import annotations

import itertools
import math

import numpy as np
from scipy.optimize import linear_sum_assignment, linprog

from .ot1d import Coupling
from .poincare import pairwise_poincare_distance

HUNGARIAN_MAX_N = 512
BRUTE_FORCE_MAX_N = 8
GENERAL_MAX_CELLS = 64
VERTEX_ENUM_MAX_BASES = 20_000


def cost_matrix(xs, ys, p=2.0, geometry="euclidean") -> np.ndarray:
    """Entry (i, j) = ||x_i - y_j||_p^p, or d_B(x_i, y_j)^p on the Poincare ball."""
    xs = np.atleast_2d(np.asarray(xs, dtype=float))
    ys = np.atleast_2d(np.asarray(ys, dtype=float))
    if geometry == "poincare":
        return pairwise_poincare_distance(xs, ys) ** p
    if p == 2:
        diff = xs[:, None, :] - ys[None, :, :]
        return np.einsum("ijk,ijk->ij", diff, diff)
    return np.sum(np.abs(xs[:, None, :] - ys[None, :, :]) ** p, axis=-1)


def brute_force_assignment(cost):
    """Minimum-cost permutation by exhaustive search (n <= 8).

    Returns ``(total_cost, perm)`` where ``perm[i]`` is the column matched to
    row i; among optimal permutations the lexicographically smallest wins.
    """
    cost = np.asarray(cost, dtype=float)
    n, m = cost.shape
    if n != m:
        raise ValueError("brute force assignment needs a square matrix")
    if n > BRUTE_FORCE_MAX_N:
        raise ValueError(f"n = {n} exceeds brute-force limit {BRUTE_FORCE_MAX_N}")
    perms = np.array(list(itertools.permutations(range(n))), dtype=np.intp)
    totals = cost[np.arange(n), perms].sum(axis=1)
    best = totals.min()
    # itertools yields permutations in lexicographic order
    k = int(np.flatnonzero(totals <= best + 1e-12 * (1.0 + abs(best)))[0])
    return float(totals[k]), perms[k]


def hungarian_assignment(cost):
    cost = np.asarray(cost, dtype=float)
    rows, cols = linear_sum_assignment(cost)
    perm = np.empty(cost.shape[0], dtype=np.intp)
    perm[rows] = cols
    return float(cost[rows, cols].sum()), perm


def _transport_equalities(n, m):
    A = np.zeros((n + m, n * m))
    for i in range(n):
        A[i, i * m:(i + 1) * m] = 1.0
    for j in range(m):
        A[n + j, j::m] = 1.0
    return A


def vertex_brute_force(cost, a, b):
    """Exact OT by enumerating every basic feasible solution of U(a, b)."""
    cost = np.asarray(cost, dtype=float)
    n, m = cost.shape
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    r = n + m - 1
    if math.comb(n * m, r) > VERTEX_ENUM_MAX_BASES:
        raise ValueError("too many candidate bases for vertex enumeration")
    A = _transport_equalities(n, m)[:-1]  # last equation is redundant
    rhs = np.concatenate([a, b])[:-1]
    flat_cost = cost.ravel()
    best_val, best_x = np.inf, None
    for basis in itertools.combinations(range(n * m), r):
        sub = A[:, basis]
        if abs(np.linalg.det(sub)) < 1e-12:
            continue
        x_b = np.linalg.solve(sub, rhs)
        if np.any(x_b < -1e-12):
            continue
        val = float(flat_cost[list(basis)] @ x_b)
        if val < best_val - 1e-14:
            best_val = val
            best_x = np.zeros(n * m)
            best_x[list(basis)] = np.maximum(x_b, 0.0)
    return best_val, best_x.reshape(n, m)


def lp_transport(cost, a, b):
    cost = np.asarray(cost, dtype=float)
    n, m = cost.shape
    res = linprog(cost.ravel(), A_eq=_transport_equalities(n, m), b_eq=np.concatenate([a, b]),
                  bounds=(0, None), method="highs")
    if res.status != 0:
        raise RuntimeError(f"LP solver failed: {res.message}")
    return float(res.fun), res.x.reshape(n, m)


def wasserstein_exact(mu, nu, p=2.0):
    """Exact W_p^p and an optimal coupling for small instances.

    Uniform equal-size inputs (n <= 512) use the assignment solver; other
    weightings are limited to n * m <= 64 cells.
    """
    C = cost_matrix(mu.points, nu.points, p, mu.geometry)
    n, m = C.shape
    if n == m and mu.is_uniform and nu.is_uniform:
        if n > HUNGARIAN_MAX_N:
            raise ValueError(f"n = {n} exceeds assignment-oracle limit {HUNGARIAN_MAX_N}")
        total, perm = hungarian_assignment(C)
        return total / n, Coupling(np.arange(n), perm, np.full(n, 1.0 / n), (n, m))
    if n * m > GENERAL_MAX_CELLS:
        raise ValueError(f"general-marginal exact OT limited to {GENERAL_MAX_CELLS} cells, got {n * m}")
    if math.comb(n * m, n + m - 1) <= VERTEX_ENUM_MAX_BASES:
        val, plan = vertex_brute_force(C, mu.weights, nu.weights)
    else:
        val, plan = lp_transport(C, mu.weights, nu.weights)
    return val, Coupling.from_dense(plan, atol=1e-15)
