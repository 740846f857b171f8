"""Dense symmetric eigendecomposition and adjacency spectral embedding."""

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateSpectrumWarning, InvalidArgument, NumericFailure
from .model import Signature


@dataclass(frozen=True, eq=False)
class EigenSystem:
    values: np.ndarray
    vectors: np.ndarray


def _fix_signs(V):
    # make the largest-magnitude entry of every column positive
    idx = np.argmax(np.abs(V), axis=0)
    signs = np.sign(V[idx, np.arange(V.shape[1])])
    signs[signs == 0] = 1.0
    return V * signs


def sym_eigen(M, sym_tol=1e-10):
    """Full eigendecomposition of a symmetric matrix, eigenvalues descending.

    Each eigenvector is sign-normalised so its largest-magnitude entry is
    positive, which makes the output reproducible across calls.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise InvalidArgument(f"expected a square matrix, got shape {M.shape}")
    asym = np.max(np.abs(M - M.T), initial=0.0)
    if asym > sym_tol * max(1.0, np.max(np.abs(M), initial=0.0)):
        raise InvalidArgument(f"matrix is not symmetric (max asymmetry {asym:.3g})")
    try:
        w, V = np.linalg.eigh(M)
    except np.linalg.LinAlgError as exc:
        raise NumericFailure(f"symmetric eigensolver failed: {exc}", n=M.shape[0]) from exc
    return EigenSystem(values=w[::-1].copy(), vectors=_fix_signs(V[:, ::-1]))


@dataclass(frozen=True, eq=False)
class SpectralEmbedding:
    """Selected eigenpairs of an adjacency (or probability) matrix.

    Attributes
    ----------
    vectors : (n, d) array
        Orthonormal eigenvectors; the first ``signature.p`` columns belong
        to the most positive eigenvalues, the rest to the most negative.
    values : (d,) array
        The matching eigenvalues.
    Z : (n, d) array
        Scaled embedding ``vectors * sqrt(|values|)``.
    padded : int
        Number of slots filled with small-magnitude eigenvalues of the
        wrong sign because the spectrum ran short.
    """

    vectors: np.ndarray
    values: np.ndarray
    Z: np.ndarray
    signature: Signature
    padded: int = 0
    meta: dict = field(default_factory=dict)

    def gram(self):
        """``Z I_{p,q} Z^T``, the signature-constrained low-rank fit."""
        s = np.concatenate([np.ones(self.signature.p), -np.ones(self.signature.q)])
        return (self.Z * s) @ self.Z.T


def select_eigenpairs(values, p, q):
    """Indices of the ``p`` most positive and ``q`` most negative eigenvalues.

    ``values`` must be sorted in descending order. Returns ``(idx, padded)``;
    if either side is short, the gap is filled with the unused eigenvalues of
    smallest magnitude and ``padded`` counts them.
    """
    values = np.asarray(values)
    n = values.size
    if p + q > n:
        raise InvalidArgument(f"cannot select p+q={p + q} eigenpairs from an order-{n} matrix")
    pos = [i for i in range(n) if values[i] > 0][:p]
    neg = sorted((i for i in range(n) if values[i] < 0), key=lambda i: (values[i], i))[:q]
    padded = (p - len(pos)) + (q - len(neg))
    if padded:
        used = set(pos) | set(neg)
        rest = sorted((i for i in range(n) if i not in used), key=lambda i: (abs(values[i]), i))
        fill = iter(rest)
        pos += [next(fill) for _ in range(p - len(pos))]
        neg += [next(fill) for _ in range(q - len(neg))]
    return np.array(pos + neg, dtype=int), padded


def ase(A, sig, eig=None):
    """Adjacency spectral embedding with signature ``sig``.

    Works on a sampled adjacency or an exact probability matrix. Pass a
    precomputed ``eig`` to avoid repeating the decomposition.
    """
    A = np.asarray(A, dtype=float)
    if eig is None:
        eig = sym_eigen(A)
    idx, padded = select_eigenpairs(eig.values, sig.p, sig.q)
    if padded:
        warnings.warn(
            f"spectrum lacks eigenvalues of the required sign; padded {padded} slot(s) "
            "with the smallest-magnitude remaining eigenvalues",
            DegenerateSpectrumWarning, stacklevel=2,
        )
    V = eig.vectors[:, idx]
    D = eig.values[idx]
    return SpectralEmbedding(
        vectors=V, values=D, Z=V * np.sqrt(np.abs(D)), signature=sig, padded=padded,
        meta={"n_positive": int(np.sum(eig.values > 0)), "n_negative": int(np.sum(eig.values < 0))},
    )
