"""Poincare-ball geometry (curvature -1)."""
import numpy as np

BOUNDARY_EPS = 1e-12
MAX_NORM = 1.0 - BOUNDARY_EPS


def clamp_to_ball(x, max_norm=MAX_NORM):
    """Radially pull points with norm >= max_norm back to max_norm."""
    x = np.asarray(x, dtype=float)
    norms = np.linalg.norm(x, axis=-1, keepdims=True)
    # a few ulps of margin so rounding in any norm routine stays at or below max_norm
    target = max_norm * (1.0 - 2.0 ** -50)
    scale = np.where(norms >= max_norm, target / np.maximum(norms, 1e-300), 1.0)
    return x * scale


def mobius_add(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    xy = np.sum(x * y, axis=-1, keepdims=True)
    x2 = np.sum(x * x, axis=-1, keepdims=True)
    y2 = np.sum(y * y, axis=-1, keepdims=True)
    num = (1 + 2 * xy + y2) * x + (1 - x2) * y
    den = 1 + 2 * xy + x2 * y2
    return num / den


def conformal_factor(x):
    """lambda_x = 2 / (1 - |x|^2)."""
    x = np.asarray(x, dtype=float)
    return 2.0 / (1.0 - np.sum(x * x, axis=-1, keepdims=True))


def poincare_exp_map(x, v):
    """Exponential map at x applied to tangent vector v (broadcasts over rows)."""
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    vnorm = np.linalg.norm(v, axis=-1, keepdims=True)
    lam = conformal_factor(x)
    safe = np.maximum(vnorm, 1e-300)
    second = np.tanh(lam * vnorm / 2.0) * v / safe
    second = np.where(vnorm > 0, second, 0.0)
    return clamp_to_ball(mobius_add(x, second))


def poincare_log_map(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    w = mobius_add(-x, y)
    wnorm = np.linalg.norm(w, axis=-1, keepdims=True)
    lam = conformal_factor(x)
    safe = np.maximum(wnorm, 1e-300)
    out = 2.0 / lam * np.arctanh(np.minimum(wnorm, MAX_NORM)) * w / safe
    return np.where(wnorm > 0, out, 0.0)


def poincare_distance(u, v):
    """Geodesic distance arccosh(1 + 2|u-v|^2 / ((1-|u|^2)(1-|v|^2)))."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    diff2 = np.sum((u - v) ** 2, axis=-1)
    den = (1.0 - np.sum(u * u, axis=-1)) * (1.0 - np.sum(v * v, axis=-1))
    return np.arccosh(1.0 + 2.0 * diff2 / den)


def pairwise_poincare_distance(xs, ys):
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    diff2 = np.sum((xs[:, None, :] - ys[None, :, :]) ** 2, axis=-1)
    den = np.outer(1.0 - np.sum(xs * xs, axis=1), 1.0 - np.sum(ys * ys, axis=1))
    return np.arccosh(1.0 + 2.0 * diff2 / den)


def poincare_distance_grad(x, y):
    """Euclidean gradient of d(x, y) with respect to x, rowwise.

    Returns zeros where x == y (the distance is not differentiable there but
    every power p > 1 of it has zero gradient).
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    diff = x - y
    d2 = np.sum(diff * diff, axis=-1, keepdims=True)
    ax = 1.0 - np.sum(x * x, axis=-1, keepdims=True)
    ay = 1.0 - np.sum(y * y, axis=-1, keepdims=True)
    s = 1.0 + 2.0 * d2 / (ax * ay)
    # d/dx of s
    ds = 4.0 * diff / (ax * ay) + 4.0 * d2 * x / (ax * ax * ay)
    root = np.sqrt(np.maximum(s * s - 1.0, 0.0))
    return np.where(root > 0, ds / np.maximum(root, 1e-300), 0.0)
