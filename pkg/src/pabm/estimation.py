"""Popularity estimation by blockwise rank-1 SVD and edge-probability reconstruction."""

from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from .errors import InvalidArgument
from .model import pabm_probabilities, signature_for
from .spectral import ase


@dataclass(frozen=True, eq=False)
class LambdaEstimates:
    """Estimated popularity vectors, one per ordered community pair.

    ``vectors[(k, l)]`` has one entry per member of community ``k`` (in
    increasing vertex order, see ``members``) and estimates
    ``sigma^{(kl)} u^{(kl)}``. ``sigma[(k, l)]`` is stored for ``k <= l``;
    its square is the top singular value of the block.
    """

    K: int
    members: dict
    vectors: dict
    sigma: dict
    degenerate: frozenset = frozenset()

    def matrix(self, n):
        """Assemble the ``n x K`` matrix whose ``(i, l)`` entry is ``lambda-hat^{(z_i l)}_i``."""
        Lam = np.zeros((n, self.K))
        for (k, l), vec in self.vectors.items():
            Lam[self.members[k], l - 1] = vec
        return Lam


@dataclass(frozen=True, eq=False)
class ReconstructedP:
    P: np.ndarray
    route: str
    meta: dict = field(default_factory=dict)


def _labels_of(labels):
    z = np.asarray(getattr(labels, "labels", labels))
    K = getattr(labels, "K", None)
    if K is None:
        K = int(z.max()) if z.size else 0
    return z.astype(int), int(K)


def _orient(u, v=None):
    # popularities are nonnegative, so pick the sign with a nonnegative sum
    total = u.sum() if v is None or u.sum() != 0 else v.sum()
    return -1.0 if total < 0 else 1.0


def estimate_lambdas(A, labels):
    """Blockwise rank-1 estimates of the popularity vectors.

    For ``k < l`` the top singular triple ``(s, u, v)`` of the block
    ``A[z == k][:, z == l]`` gives ``lambda-hat^{(kl)} = sqrt(s) u`` and
    ``lambda-hat^{(lk)} = sqrt(s) v``. Diagonal blocks use the top eigenpair
    of the (symmetric) block. Blocks without signal are returned as zero
    vectors and listed in ``degenerate``.

    Works on a sampled adjacency or on an exact probability matrix.
    """
    A = np.asarray(A, dtype=float)
    z, K = _labels_of(labels)
    if K < 1:
        raise InvalidArgument("need at least one community")
    if z.shape[0] != A.shape[0]:
        raise InvalidArgument(f"{z.shape[0]} labels for a {A.shape[0]}-vertex graph")
    members = {k: np.flatnonzero(z == k) for k in range(1, K + 1)}
    empty = [k for k, m in members.items() if m.size == 0]
    if empty:
        raise InvalidArgument(f"communities {empty} are empty")

    vectors, sigma, degenerate = {}, {}, set()
    for k in range(1, K + 1):
        mk = members[k]
        block = A[np.ix_(mk, mk)]
        w, V = linalg.eigh(block, subset_by_index=[mk.size - 1, mk.size - 1])
        if w[0] <= 0:
            degenerate.add((k, k))
            sigma[(k, k)] = 0.0
            vectors[(k, k)] = np.zeros(mk.size)
        else:
            u = V[:, 0]
            s = np.sqrt(w[0])
            sigma[(k, k)] = s
            vectors[(k, k)] = _orient(u) * s * u
        for l in range(k + 1, K + 1):
            ml = members[l]
            U, sv, Vt = linalg.svd(A[np.ix_(mk, ml)], full_matrices=False)
            if sv[0] == 0:
                degenerate.update({(k, l), (l, k)})
                sigma[(k, l)] = 0.0
                vectors[(k, l)] = np.zeros(mk.size)
                vectors[(l, k)] = np.zeros(ml.size)
                continue
            u, v = U[:, 0], Vt[0]
            sign = _orient(u, v)
            s = np.sqrt(sv[0])
            sigma[(k, l)] = s
            vectors[(k, l)] = sign * s * u
            vectors[(l, k)] = sign * s * v
    return LambdaEstimates(K=K, members=members, vectors=vectors, sigma=sigma,
                           degenerate=frozenset(degenerate))


def reconstruct_P_blockwise(est, labels):
    """``P-hat`` with blocks ``lambda-hat^{(kl)} (lambda-hat^{(lk)})^T`` in vertex order."""
    z, K = _labels_of(labels)
    if K != est.K:
        raise InvalidArgument(f"estimates are for K={est.K}, labels have K={K}")
    Lam = est.matrix(z.size)
    return ReconstructedP(P=pabm_probabilities(z, Lam, 1.0), route="blockwise")


def reconstruct_P_labelfree(A, K, clip=False, embedding=None):
    """``Z I_{p,q} Z^T`` from the adjacency spectral embedding of ``A``.

    Needs no labels. ``clip`` truncates the result to ``[0, 1]``.
    """
    A = np.asarray(A, dtype=float)
    sig = signature_for(K)
    if sig.d > A.shape[0]:
        raise InvalidArgument(f"K^2={sig.d} exceeds n={A.shape[0]}")
    emb = ase(A, sig) if embedding is None else embedding
    G = emb.gram()
    P = (G + G.T) / 2
    if clip:
        P = np.clip(P, 0.0, 1.0)
    return ReconstructedP(P=P, route="label-free", meta={"padded": emb.padded, "clipped": clip})
