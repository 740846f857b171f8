"""Community detection: orthogonal spectral clustering and SSC on the ASE.

Both methods build an affinity matrix from the embedding of ``A`` and then
partition it into ``K`` groups, either by thresholding plus connected
components or by a Laplacian eigenmap followed by a Gaussian mixture.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy import linalg
from scipy.sparse.csgraph import connected_components
from scipy.special import logsumexp

from .errors import InvalidArgument, LassoConvergenceError, NumericFailure
from .spectral import _fix_signs


@dataclass(frozen=True, eq=False)
class AffinityMatrix:
    B: np.ndarray
    method: str
    params: dict = field(default_factory=dict)
    coef: np.ndarray = None  # SSC self-representation matrix, row i = c_i


@dataclass(frozen=True, eq=False)
class ClusteringResult:
    """Labels in ``1..K`` plus whatever the partition step wants to report."""

    labels: np.ndarray
    K: int
    diagnostics: dict = field(default_factory=dict)


@dataclass(frozen=True)
class LassoProblem:
    theta: float
    tol: float = 1e-6
    max_iter: int = 500

    def __post_init__(self):
        if not self.theta > 0:
            raise InvalidArgument(f"sparsity penalty must be positive, got {self.theta}")
        if not self.tol > 0:
            raise InvalidArgument(f"tolerance must be positive, got {self.tol}")


def _relabel(raw):
    """Map arbitrary labels to ``1..m`` in order of first appearance."""
    _, first, inverse = np.unique(raw, return_index=True, return_inverse=True)
    order = np.argsort(np.argsort(first))
    return order[inverse] + 1


# -- orthogonal spectral clustering -----------------------------------------


def osc_affinity(V):
    """``B = |n V V^T|`` from an ``n x d`` matrix of orthonormal eigenvectors."""
    V = np.asarray(V, dtype=float)
    n = V.shape[0]
    return AffinityMatrix(B=np.abs(n * (V @ V.T)), method="OSC")


# -- LASSO ------------------------------------------------------------------


def _soft(x, t):
    return np.sign(x) * np.maximum(np.abs(x) - t, 0.0)


def _stationarity(G, C, theta, mask=None):
    """Per-row KKT violation for ``min 1/2||y - c D||^2 + theta ||c||_1``.

    ``G = (Y - C D) D^T`` is the negative gradient of the smooth part.
    """
    viol = np.where(C == 0, np.maximum(np.abs(G) - theta, 0.0), np.abs(G - theta * np.sign(C)))
    if mask is not None:
        viol[mask] = 0.0
    return viol.max(axis=1, initial=0.0)


def lasso_stationarity(y, X, c, theta):
    """Largest KKT violation of coefficients ``c`` (see :func:`lasso_cd`)."""
    y = np.atleast_2d(np.asarray(y, dtype=float))
    c = np.atleast_2d(np.asarray(c, dtype=float))
    X = np.asarray(X, dtype=float)
    G = (y - c @ X) @ X.T
    return float(_stationarity(G, c, theta)[0])


def _polish(c, y, D, theta):
    """Exact solve on the current support with signs held fixed.

    First prunes the support until its atoms are linearly independent,
    moving along null directions of the atoms (the fit is unchanged and the
    l1 term does not grow). Then steps towards the minimiser of the
    restricted problem, stopping at the first coefficient that would change
    sign. The objective never increases.
    """
    c = c.copy()
    while True:
        S = np.flatnonzero(c)
        if S.size == 0:
            return c
        s = np.sign(c[S])
        Uf, sv, _ = np.linalg.svd(D[S], full_matrices=True)
        rank = int(np.sum(sv > 1e-9 * sv[0]))
        if rank < S.size:
            direction = Uf[:, rank]
            if s @ direction > 0:
                direction = -direction
        else:
            DS = D[S]
            target = np.linalg.solve(DS @ DS.T, DS @ y - theta * s)
            direction = target - c[S]
            if np.all(np.sign(target) == s):
                c[S] = target
                return c
        shrinking = c[S] * direction < 0
        ratios = np.full(S.size, np.inf)
        ratios[shrinking] = -c[S][shrinking] / direction[shrinking]
        hit = int(np.argmin(ratios))
        c[S] += ratios[hit] * direction
        c[S[hit]] = 0.0


def _sweep(C, R, D, sq, theta, mask):
    for j in range(D.shape[0]):
        if sq[j] == 0.0:
            continue
        dj = D[j]
        cj = C[:, j]
        new = _soft(R @ dj + cj * sq[j], theta) / sq[j]
        if mask is not None:
            new[mask[:, j]] = 0.0
        delta = new - cj
        rows = np.flatnonzero(delta)
        if rows.size:
            R[rows] -= np.outer(delta[rows], dj)
            C[rows, j] = new[rows]


def _lasso_rows(Y, D, prob, exclude=None):
    """Coordinate descent for many LASSO problems sharing a dictionary.

    Row ``i`` of the result minimises ``1/2||Y[i] - c D||^2 + theta||c||_1``
    with ``c[exclude[i]]`` held at zero when ``exclude`` is given. Rows are
    independent problems; batching only shares the loop over coordinates.

    Each iteration is one cyclic sweep over all coordinates followed by an
    exact solve on every row's current support (signs fixed). The second
    step matters when atoms are nearly collinear, where plain cyclic
    descent converges very slowly. Rows stop once their KKT violation is
    at most ``prob.tol``.
    """
    r, m = Y.shape[0], D.shape[0]
    theta = prob.theta
    C = np.zeros((r, m))
    R = Y.copy()
    sq = np.einsum("ij,ij->i", D, D)
    mask = None
    if exclude is not None:
        mask = np.zeros((r, m), dtype=bool)
        mask[np.arange(r), exclude] = True
    viol = _stationarity(R @ D.T, C, theta, mask)
    for it in range(1, prob.max_iter + 1):
        act = np.flatnonzero(viol > prob.tol)
        if act.size == 0:
            return C, viol, it - 1
        Ca, Ra = C[act], R[act]
        ma = None if mask is None else mask[act]
        _sweep(Ca, Ra, D, sq, theta, ma)
        for a in range(act.size):
            Ca[a] = _polish(Ca[a], Y[act[a]], D, theta)
        Ra = Y[act] - Ca @ D
        C[act], R[act] = Ca, Ra
        viol[act] = _stationarity(Ra @ D.T, Ca, theta, ma)
    if viol.max(initial=0.0) <= prob.tol:
        return C, viol, prob.max_iter
    worst = int(np.argmax(viol))
    raise LassoConvergenceError(
        f"coordinate descent did not reach tol={prob.tol} in {prob.max_iter} iterations "
        f"(residual {viol[worst]:.3g})",
        coef=C, residual=viol, n_iter=prob.max_iter, row=worst,
    )


def lasso_cd(y, X, prob):
    """Solve ``argmin_c 1/2||y - X^T c||^2 + theta ||c||_1`` by coordinate descent.

    Parameters
    ----------
    y : (d,) array
        Target point.
    X : (m, d) array
        Dictionary; each row is one atom.
    prob : LassoProblem

    Returns
    -------
    c : (m,) array

    Raises
    ------
    LassoConvergenceError
        If the stationarity residual is still above ``prob.tol`` after
        ``prob.max_iter`` sweeps. The exception carries the last iterate.
    """
    y = np.asarray(y, dtype=float)
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != y.size:
        raise InvalidArgument(f"dictionary shape {X.shape} does not match target length {y.size}")
    try:
        C, _, _ = _lasso_rows(y[None, :], X, prob)
    except LassoConvergenceError as exc:
        raise LassoConvergenceError(
            str(exc), coef=exc.coef[0], residual=float(exc.residual[0]), n_iter=exc.n_iter,
        ) from None
    return C[0]


def ssc_affinity(V, prob):
    """Sparse subspace clustering affinity on the rows of ``sqrt(n) V``.

    Every row is regressed on all other rows; ``C[i]`` holds those
    coefficients with a zero at position ``i``, and ``B = |C| + |C^T|``.
    """
    V = np.asarray(V, dtype=float)
    n = V.shape[0]
    if n < 2:
        raise InvalidArgument("need at least two points for self-representation")
    W = np.sqrt(n) * V
    C, viol, n_iter = _lasso_rows(W, W, prob, exclude=np.arange(n))
    B = np.abs(C) + np.abs(C.T)
    return AffinityMatrix(
        B=B, method="SSC", coef=C,
        params={"theta": prob.theta, "tol": prob.tol, "sweeps": n_iter,
                "max_residual": float(viol.max(initial=0.0))},
    )


def default_theta(n):
    return 0.05 / np.sqrt(n)


# -- partitioning -----------------------------------------------------------


def laplacian_eigenmap(B, d, return_isolated=False):
    """Bottom ``d`` generalized eigenvectors of ``(Deg - B) y = mu Deg y``.

    Computed through the symmetric normalized Laplacian
    ``I - Deg^{-1/2} B Deg^{-1/2}``; columns are orthonormal in the
    degree-weighted inner product. Zero-degree vertices get a zero row.
    """
    B = np.asarray(B, dtype=float)
    n = B.shape[0]
    if d > n:
        raise InvalidArgument(f"embedding dimension {d} exceeds n={n}")
    deg = B.sum(axis=1)
    live = deg > 0
    if not live.any():
        raise InvalidArgument("affinity matrix is identically zero")
    idx = np.flatnonzero(live)
    s = 1.0 / np.sqrt(deg[idx])
    L = np.eye(idx.size) - s[:, None] * B[np.ix_(idx, idx)] * s[None, :]
    L = (L + L.T) / 2
    k = min(d, idx.size)
    _, X = linalg.eigh(L, subset_by_index=[0, k - 1])
    Y = np.zeros((n, d))
    Y[idx, :k] = _fix_signs(X) * s[:, None]
    if return_isolated:
        return Y, ~live
    return Y


def _kmeanspp(X, K, rng):
    n = X.shape[0]
    centers = [X[rng.integers(n)]]
    d2 = np.sum((X - centers[0]) ** 2, axis=1)
    for _ in range(1, K):
        total = d2.sum()
        i = rng.choice(n, p=d2 / total) if total > 0 else rng.integers(n)
        centers.append(X[i])
        d2 = np.minimum(d2, np.sum((X - X[i]) ** 2, axis=1))
    return np.array(centers)


def _sqdist(X, centers):
    return ((X[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)


def _standardize(points):
    X = np.asarray(points, dtype=float)
    X = X - X.mean(axis=0)
    sd = X.std(axis=0)
    # columns that are constant up to rounding carry no information
    flat = sd <= 1e-9 * sd.max(initial=0.0)
    X[:, flat] = 0.0
    sd[flat] = 1.0
    return X / sd


def gmm_cluster(points, K, seed, restarts=10, max_iter=300, tol=1e-6, reg=1e-6):
    """Diagonal-covariance Gaussian mixture fitted by EM.

    Each restart seeds the component means with k-means++, runs EM until
    the relative change in mean log-likelihood drops below ``tol``, and the
    restart with the highest likelihood wins. Columns are standardized first
    (a diagonal mixture is equivariant to that) so ``reg`` is scale free.
    A restart whose clusters empty out is discarded and counted.
    """
    X = _standardize(points)
    n = X.shape[0]
    if K > n:
        raise InvalidArgument(f"cannot fit {K} components to {n} points")
    rng = np.random.default_rng(seed)
    best_ll, best_resp, degenerate = -np.inf, None, 0
    for _ in range(restarts):
        hard = np.argmin(_sqdist(X, _kmeanspp(X, K, rng)), axis=1)
        resp = np.eye(K)[hard]
        ll, prev = -np.inf, -np.inf
        ok = True
        for _ in range(max_iter):
            Nk = resp.sum(axis=0)
            if np.any(Nk < 1e-10):
                ok = False
                break
            means = resp.T @ X / Nk[:, None]
            var = np.maximum(resp.T @ X**2 / Nk[:, None] - means**2, 0.0) + reg
            logp = (
                np.log(Nk / n)
                - 0.5 * np.sum(np.log(2 * np.pi * var), axis=1)
                - 0.5 * (X**2 @ (1 / var).T - 2 * X @ (means / var).T + np.sum(means**2 / var, axis=1))
            )
            norm = logsumexp(logp, axis=1)
            resp = np.exp(logp - norm[:, None])
            ll = norm.mean()
            if abs(ll - prev) <= tol * abs(ll):
                break
            prev = ll
        if not ok:
            degenerate += 1
            continue
        if ll > best_ll:
            best_ll, best_resp = ll, resp
    if best_resp is None:
        raise NumericFailure("every GMM restart degenerated", restarts=restarts, degenerate=degenerate)
    labels = _relabel(np.argmax(best_resp, axis=1))
    return ClusteringResult(
        labels=labels, K=K,
        diagnostics={"log_likelihood": float(best_ll), "restarts": restarts,
                     "degenerate_restarts": degenerate},
    )


def kmeans_cluster(points, K, seed, restarts=10, max_iter=300):
    """Lloyd's k-means from k-means++ seeds; cheaper alternative to the GMM."""
    X = _standardize(points)
    n = X.shape[0]
    if K > n:
        raise InvalidArgument(f"cannot form {K} clusters from {n} points")
    rng = np.random.default_rng(seed)
    best, best_inertia = None, np.inf
    for _ in range(restarts):
        centers = _kmeanspp(X, K, rng)
        for _ in range(max_iter):
            hard = np.argmin(_sqdist(X, centers), axis=1)
            new = np.array([X[hard == k].mean(axis=0) if np.any(hard == k) else centers[k]
                            for k in range(K)])
            if np.array_equal(new, centers):
                break
            centers = new
        inertia = np.min(_sqdist(X, centers), axis=1).sum()
        if inertia < best_inertia:
            best, best_inertia = hard, inertia
    return ClusteringResult(labels=_relabel(best), K=K,
                            diagnostics={"inertia": float(best_inertia), "restarts": restarts})


def partition_affinity(aff, K, mode="spectral", threshold=None, seed=0, clusterer="gmm",
                       restarts=10, max_iter=300, tol=1e-6):
    """Split the affinity graph into ``K`` communities.

    ``mode="threshold"`` drops entries below ``threshold`` (default
    ``1e-3 * max(B)``) and uses connected components; if that does not give
    exactly ``K`` components it falls back to the spectral route and says so
    in ``diagnostics``. ``mode="spectral"`` clusters the ``K``-dimensional
    Laplacian eigenmap with a Gaussian mixture (or k-means).
    """
    B = np.asarray(getattr(aff, "B", aff), dtype=float)
    n = B.shape[0]
    if K > n:
        raise InvalidArgument(f"K={K} exceeds the number of vertices n={n}")
    if mode not in ("spectral", "threshold"):
        raise InvalidArgument(f"unknown partition mode {mode!r}")
    diag = {"mode": mode, "fallback": False}
    if mode == "threshold":
        tau = 1e-3 * B.max() if threshold is None else float(threshold)
        ncomp, comp = connected_components(B > tau, directed=False)
        diag.update(threshold=float(tau), n_components=int(ncomp))
        if ncomp == K:
            return ClusteringResult(labels=_relabel(comp), K=K, diagnostics=diag)
        diag["fallback"] = True
    Y, isolated = laplacian_eigenmap(B, K, return_isolated=True)
    diag["isolated"] = int(isolated.sum())
    if clusterer == "gmm":
        res = gmm_cluster(Y, K, seed, restarts=restarts, max_iter=max_iter, tol=tol)
    elif clusterer == "kmeans":
        res = kmeans_cluster(Y, K, seed, restarts=restarts, max_iter=max_iter)
    else:
        raise InvalidArgument(f"unknown clusterer {clusterer!r}")
    diag.update(res.diagnostics)
    diag["clusterer"] = clusterer
    if np.unique(res.labels).size < K:
        diag["degenerate"] = True
    return ClusteringResult(labels=res.labels, K=K, diagnostics=diag)
