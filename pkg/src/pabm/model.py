"""Popularity adjusted block model: parameters, latent geometry, sampling.

A PABM on ``n`` vertices with ``K`` communities assigns vertex ``i`` a label
``z[i]`` and one popularity ``Lam[i, k]`` towards every community ``k``. Edge
probabilities are ``P[i, j] = rho * Lam[i, z[j]] * Lam[j, z[i]]``.

The same matrix is a generalized random dot product graph with ``K**2``
dimensional latent positions and signature ``(K(K+1)/2, K(K-1)/2)``; the
helpers below build that latent configuration explicitly.

Labels are 1-based (``1..K``) throughout the public API.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import InvalidArgument


@dataclass(frozen=True)
class Signature:
    p: int
    q: int

    @property
    def d(self):
        return self.p + self.q

    def metric(self):
        """The diagonal indefinite metric ``I_{p,q}`` as a dense matrix."""
        return ipq(self.p, self.q)


def ipq(p, q):
    return np.diag(np.concatenate([np.ones(p), -np.ones(q)]))


def signature_for(K):
    """Signature ``(K(K+1)/2, K(K-1)/2)`` of a ``K``-community PABM."""
    K = _check_K(K)
    return Signature(K * (K + 1) // 2, K * (K - 1) // 2)


def _check_K(K):
    if int(K) != K or K < 1:
        raise InvalidArgument(f"community count must be a positive integer, got {K!r}")
    return int(K)


@dataclass(frozen=True, eq=False)
class PabmParams:
    """Parameters of a PABM.

    Parameters
    ----------
    z : array of int, shape (n,)
        Community labels in ``1..K``.
    Lam : array, shape (n, K)
        Popularity parameters in ``[0, 1]``; ``Lam[i, k-1]`` is the affinity
        of vertex ``i`` towards community ``k``.
    rho : float
        Sparsity parameter in ``(0, 1]``.
    K : int, optional
        Number of communities. Defaults to ``Lam.shape[1]``.
    own_positive : bool
        Assert ``Lam[i, z[i]-1] > 0`` for every vertex.
    """

    z: np.ndarray
    Lam: np.ndarray
    rho: float = 1.0
    K: int = None
    own_positive: bool = False

    def __post_init__(self):
        z = np.asarray(self.z)
        Lam = np.asarray(self.Lam, dtype=float)
        if Lam.ndim != 2:
            raise InvalidArgument("Lam must be a 2-d array")
        K = Lam.shape[1] if self.K is None else _check_K(self.K)
        if z.ndim != 1 or z.shape[0] != Lam.shape[0]:
            raise InvalidArgument(f"z has shape {z.shape}, expected ({Lam.shape[0]},)")
        if Lam.shape[1] != K:
            raise InvalidArgument(f"Lam has {Lam.shape[1]} columns but K={K}")
        if not np.issubdtype(z.dtype, np.integer) and not np.all(z == np.round(z)):
            raise InvalidArgument("labels must be integers")
        z = z.astype(int)
        if z.size and (z.min() < 1 or z.max() > K):
            raise InvalidArgument(f"labels must lie in 1..{K}")
        if not np.all(np.isfinite(Lam)) or Lam.min(initial=0.0) < 0 or Lam.max(initial=0.0) > 1:
            raise InvalidArgument("popularity parameters must lie in [0, 1]")
        if not 0 < self.rho <= 1:
            raise InvalidArgument(f"rho must lie in (0, 1], got {self.rho}")
        if self.own_positive and np.any(Lam[np.arange(z.size), z - 1] <= 0):
            raise InvalidArgument("own-community popularity must be positive for every vertex")
        z.setflags(write=False)
        Lam = Lam.copy()
        Lam.setflags(write=False)
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "Lam", Lam)
        object.__setattr__(self, "K", K)

    @property
    def n(self):
        return self.z.size

    def community_sizes(self):
        return np.bincount(self.z - 1, minlength=self.K)

    def block(self, k, l):
        """``lambda^{(kl)}``: popularities towards ``l`` of the members of ``k``."""
        return self.Lam[self.z == k, l - 1]


def pabm_probabilities(z, Lam, rho=1.0):
    """``rho * Lam[i, z_j] * Lam[j, z_i]`` without any validation.

    Used both for true parameters and for estimates, which may fall outside
    ``[0, 1]``.
    """
    z = np.asarray(z, dtype=int) - 1
    M = np.asarray(Lam, dtype=float)[:, z]
    return rho * (M * M.T)


def edge_prob_matrix(params):
    """Edge probability matrix of a PABM (dense, symmetric, diagonal kept)."""
    return pabm_probabilities(params.z, params.Lam, params.rho)


def normalize_popularity(params):
    """Rescale so that ``||Lam||_F = sqrt(n)``, compensating in ``rho``.

    The edge probabilities are unchanged. Returns a plain ``(Lam, rho)``
    pair because the rescaled values need not satisfy the ``[0, 1]`` box.
    """
    norm = np.linalg.norm(params.Lam)
    if norm == 0:
        raise InvalidArgument("cannot normalize an all-zero popularity matrix")
    c = np.sqrt(params.n) / norm
    return params.Lam * c, params.rho / c**2


# -- latent configuration --------------------------------------------------


def _cycle_pairs(K):
    # 0-based (s, t) index pairs swapped by the permutation, k < l lexicographic
    return [(k * K + l, l * K + k) for k in range(K) for l in range(k + 1, K)]


def _fixed_points(K):
    return [r * (K + 1) for r in range(K)]


def build_permutation(K):
    """``K**2 x K**2`` permutation ``Pi`` with ``Y = X @ Pi``.

    ``Pi`` fixes positions ``r(K+1)`` (0-based) and swaps ``kK + l`` with
    ``lK + k`` for every ``k < l``.
    """
    K = _check_K(K)
    perm = np.arange(K * K)
    for s, t in _cycle_pairs(K):
        perm[s], perm[t] = t, s
    Pi = np.zeros((K * K, K * K))
    Pi[perm, np.arange(K * K)] = 1.0
    return Pi


def build_U(K):
    """Orthonormal eigenbasis of :func:`build_permutation`.

    Columns: the ``K`` fixed-point basis vectors, then ``(e_s + e_t)/sqrt(2)``
    for each swapped pair, then ``(e_s - e_t)/sqrt(2)`` in the same order, so
    that ``U @ I_{p,q} @ U.T`` is the permutation.
    """
    K = _check_K(K)
    d = K * K
    U = np.zeros((d, d))
    fixed = _fixed_points(K)
    pairs = _cycle_pairs(K)
    for col, s in enumerate(fixed):
        U[s, col] = 1.0
    h = 1.0 / np.sqrt(2.0)
    for j, (s, t) in enumerate(pairs):
        plus = K + j
        minus = K + len(pairs) + j
        U[s, plus], U[t, plus] = h, h
        U[s, minus], U[t, minus] = h, -h
    return U


@dataclass(frozen=True, eq=False)
class LatentConfig:
    """GRDPG view of a PABM.

    ``X`` is the block-diagonal ``n x K**2`` matrix in community-sorted vertex
    order, ``perm`` lists original vertex indices in that order (so the
    community-sorted matrix is ``P[np.ix_(perm, perm)]``), and ``positions``
    holds the latent vectors in the original vertex order. For a freshly
    built configuration ``positions[perm] == X @ U``.
    """

    X: np.ndarray
    U: np.ndarray
    Pi: np.ndarray
    perm: np.ndarray
    signature: Signature
    rho: float
    positions: np.ndarray = field(repr=False)

    def vertex_permutation_matrix(self):
        """``Pi_tilde`` with ``P = Pi_tilde @ P_sorted @ Pi_tilde.T``."""
        n = self.perm.size
        T = np.zeros((n, n))
        T[self.perm, np.arange(n)] = 1.0
        return T

    def edge_probabilities(self):
        """``rho * Z I_{p,q} Z^T`` from the stored latent positions."""
        Z = self.positions
        s = np.concatenate([np.ones(self.signature.p), -np.ones(self.signature.q)])
        return self.rho * ((Z * s) @ Z.T)


def latent_config(params):
    """Latent configuration ``(X, U, Pi, perm)`` realising ``params`` as a GRDPG."""
    K = params.K
    sizes = params.community_sizes()
    if np.any(sizes == 0):
        empty = [k + 1 for k in np.flatnonzero(sizes == 0)]
        raise InvalidArgument(f"communities {empty} are empty")
    perm = np.argsort(params.z, kind="stable")
    n = params.n
    X = np.zeros((n, K * K))
    start = 0
    for k in range(K):
        rows = perm[start:start + sizes[k]]
        X[start:start + sizes[k], k * K:(k + 1) * K] = params.Lam[rows]
        start += sizes[k]
    U = build_U(K)
    positions = np.empty((n, K * K))
    positions[perm] = X @ U
    return LatentConfig(
        X=X, U=U, Pi=build_permutation(K), perm=perm,
        signature=signature_for(K), rho=params.rho, positions=positions,
    )


def in_indefinite_orthogonal_group(Q, signature, atol=1e-10):
    Q = np.asarray(Q, dtype=float)
    d = signature.d
    if Q.shape != (d, d):
        return False
    I = signature.metric()
    return bool(np.max(np.abs(Q @ I @ Q.T - I)) <= atol)


def apply_indefinite_orthogonal(config, Q, atol=1e-10):
    """Transform latent positions ``x_i -> Q x_i`` for ``Q`` in ``O(p, q)``.

    The induced edge probabilities are unchanged.
    """
    if not in_indefinite_orthogonal_group(Q, config.signature, atol):
        raise InvalidArgument("Q is not in the indefinite orthogonal group O(p, q)")
    return replace(config, positions=config.positions @ np.asarray(Q, dtype=float).T)


# -- sampling ---------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Adjacency:
    """Hollow symmetric 0/1 adjacency matrix together with its seed.

    Behaves like an array under ``np.asarray``.
    """

    A: np.ndarray
    seed: object = None

    def __array__(self, dtype=None, copy=None):
        return self.A if dtype is None else self.A.astype(dtype)

    @property
    def n(self):
        return self.A.shape[0]


def sample_adjacency(P, seed):
    """Draw ``A_ij ~ Bernoulli(P_ij)`` independently for ``i < j``.

    ``seed`` is anything accepted by :func:`numpy.random.default_rng`. The
    upper triangle is filled row by row, so the result depends only on
    ``(P, seed)``.
    """
    P = np.asarray(P, dtype=float)
    n = P.shape[0]
    if P.shape != (n, n):
        raise InvalidArgument("P must be square")
    rng = np.random.default_rng(seed)
    A = np.zeros((n, n))
    for i in range(n - 1):
        A[i, i + 1:] = rng.random(n - i - 1) < P[i, i + 1:]
    A += A.T
    return Adjacency(A, seed if not isinstance(seed, np.random.Generator) else None)


def mixture_weights(K, balance="balanced"):
    """Community probabilities: uniform, or ``alpha_k proportional to 1/k``."""
    K = _check_K(K)
    if balance == "balanced":
        return np.full(K, 1.0 / K)
    if balance == "imbalanced":
        w = 1.0 / np.arange(1, K + 1)
        return w / w.sum()
    raise InvalidArgument(f"unknown balance {balance!r}")


def random_params(n, K, rng, alpha=None, within=(2.0, 1.0), between=(1.0, 2.0), rho=1.0):
    """Draw labels from ``Multinomial(alpha)`` and popularities from Betas.

    Own-community popularities come from ``Beta(*within)``, all others from
    ``Beta(*between)``. Communities may come out empty; callers decide what
    that means.
    """
    K = _check_K(K)
    alpha = mixture_weights(K) if alpha is None else np.asarray(alpha, dtype=float)
    z = rng.choice(K, size=n, p=alpha) + 1
    Lam = rng.beta(between[0], between[1], size=(n, K))
    Lam[np.arange(n), z - 1] = rng.beta(within[0], within[1], size=n)
    return PabmParams(z=z, Lam=Lam, rho=rho, K=K)
