"""Slow, independent reference implementations used as test oracles."""

from itertools import permutations

import numpy as np
from scipy.optimize import minimize


def lasso_objective(y, X, c, theta):
    r = y - X.T @ c
    return 0.5 * r @ r + theta * np.abs(c).sum()


def kkt_violation(y, X, c, theta):
    """Largest violation of the LASSO optimality conditions at ``c``."""
    g = X @ (y - X.T @ c)
    on = c != 0
    v = np.maximum(np.abs(g) - theta, 0.0)
    v[on] = np.abs(g[on] - theta * np.sign(c[on]))
    return v.max(initial=0.0)


def duality_gap(y, X, c, theta):
    """Primal minus dual objective at ``c`` and its rescaled residual.

    The dual point ``nu = r * min(1, theta / ||X r||_inf)`` is feasible, so
    the gap bounds the distance of the primal objective from its optimum.
    """
    r = y - X.T @ c
    corr = np.abs(X @ r).max(initial=0.0)
    nu = r * (min(1.0, theta / corr) if corr > 0 else 1.0)
    dual = 0.5 * y @ y - 0.5 * (y - nu) @ (y - nu)
    return lasso_objective(y, X, c, theta) - dual


def fista_lasso(y, X, theta, iters=20000, gap_tol=1e-10):
    """Accelerated proximal gradient for 1/2||y - X^T c||^2 + theta||c||_1.

    Momentum is reset whenever the objective goes up. Stops once the
    duality gap is below ``gap_tol``; returns ``(c, objective, gap)``.
    """
    y = np.asarray(y, dtype=float)
    X = np.asarray(X, dtype=float)
    m = X.shape[0]
    L = max(np.linalg.norm(X, 2) ** 2, 1e-300)
    c = np.zeros(m)
    w = c.copy()
    t = 1.0
    f = lasso_objective(y, X, c, theta)
    for k in range(iters):
        u = w - X @ (X.T @ w - y) / L
        c_new = np.sign(u) * np.maximum(np.abs(u) - theta / L, 0.0)
        f_new = lasso_objective(y, X, c_new, theta)
        if f_new > f:
            w, t = c.copy(), 1.0
            continue
        t_new = (1 + np.sqrt(1 + 4 * t * t)) / 2
        w = c_new + (t - 1) / t_new * (c_new - c)
        c, t, f = c_new, t_new, f_new
        if k % 20 == 0 and duality_gap(y, X, c, theta) <= gap_tol:
            break
    return c, f, duality_gap(y, X, c, theta)


def qp_lasso(y, X, theta):
    """The LASSO as a bound-constrained QP in ``(c+, c-)`` solved by L-BFGS-B."""
    y = np.asarray(y, dtype=float)
    X = np.asarray(X, dtype=float)
    m = X.shape[0]
    G, b = X @ X.T, X @ y

    def fun(w):
        c = w[:m] - w[m:]
        g = G @ c - b
        f = 0.5 * y @ y - b @ c + 0.5 * c @ G @ c + theta * w.sum()
        return f, np.concatenate([g + theta, theta - g])

    res = minimize(fun, np.zeros(2 * m), jac=True, method="L-BFGS-B",
                   bounds=[(0, None)] * (2 * m),
                   options={"ftol": 0.0, "gtol": 1e-14, "maxiter": 100000, "maxcor": 30})
    c = res.x[:m] - res.x[m:]
    return c, lasso_objective(y, X, c, theta)


def brute_force_error(pred, truth):
    """Minimum disagreement count over all injective relabelings of ``pred``."""
    pred, truth = np.asarray(pred), np.asarray(truth)
    pv, tv = np.unique(pred), np.unique(truth)
    targets = list(tv) + [None] * max(0, len(pv) - len(tv))
    best = len(pred)
    for perm in permutations(targets, len(pv)):
        mapping = dict(zip(pv, perm))
        mapped = np.array([mapping[p] for p in pred], dtype=object)
        best = min(best, int(np.sum(mapped != truth)))
    return best


def _comb2(x):
    return x * (x - 1) // 2


def ari_oracle(pred, truth):
    """Adjusted Rand index from an explicit loop over the contingency table."""
    pred, truth = list(pred), list(truth)
    n = len(pred)
    if n < 2:
        return 1.0
    labels_p, labels_t = sorted(set(pred)), sorted(set(truth))
    table = [[sum(1 for i in range(n) if pred[i] == a and truth[i] == b) for b in labels_t]
             for a in labels_p]
    index = sum(_comb2(x) for row in table for x in row)
    a = sum(_comb2(sum(row)) for row in table)
    b = sum(_comb2(sum(col)) for col in zip(*table))
    expected = a * b / _comb2(n)
    top = (a + b) / 2
    if top == expected:
        return 1.0
    return (index - expected) / (top - expected)
