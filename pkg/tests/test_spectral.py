import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pabm.errors import DegenerateSpectrumWarning, InvalidArgument
from pabm.model import Signature, edge_prob_matrix, signature_for
from pabm.spectral import ase, select_eigenpairs, sym_eigen

from conftest import exact_params


def test_identity_values():
    eig = sym_eigen(np.eye(3))
    np.testing.assert_allclose(eig.values, [1, 1, 1])


def test_diagonal_order_and_vectors():
    eig = sym_eigen(np.diag([3.0, -2.0, 1.0]))
    np.testing.assert_allclose(eig.values, [3, 1, -2])
    # signed permutation of the basis, sign fixed so the big entry is positive
    np.testing.assert_allclose(eig.vectors, np.eye(3)[:, [0, 2, 1]], atol=1e-15)


def test_random_reconstruction(rng):
    M = rng.normal(size=(10, 10))
    M = M + M.T
    eig = sym_eigen(M)
    R = eig.vectors @ np.diag(eig.values) @ eig.vectors.T
    assert np.linalg.norm(R - M) < 1e-8
    assert np.all(np.diff(eig.values) <= 0)


def test_nonsymmetric_rejected():
    with pytest.raises(InvalidArgument):
        sym_eigen(np.array([[1.0, 2.0], [0.0, 1.0]]))


def test_rank_one_embedding(rng):
    lam = rng.uniform(0.2, 1.0, size=15)
    emb = ase(np.outer(lam, lam), Signature(1, 0))
    z = emb.Z[:, 0]
    assert min(np.max(np.abs(z - lam)), np.max(np.abs(z + lam))) < 1e-10


def test_exact_K2_reconstruction():
    P = edge_prob_matrix(exact_params(80, 2, 3))
    emb = ase(P, signature_for(2))
    assert np.linalg.norm(emb.gram() - P) < 1e-8
    assert emb.padded == 0


def test_exact_K3_inertia():
    P = edge_prob_matrix(exact_params(120, 3, 8))
    emb = ase(P, signature_for(3))
    scale = np.abs(emb.values).max()
    assert np.sum(emb.values[:6] > 1e-10 * scale) == 6
    assert np.sum(emb.values[6:] < -1e-10 * scale) == 3
    assert emb.meta["n_positive"] >= 6 and emb.meta["n_negative"] >= 3


def test_padding_warns_and_records():
    P = np.diag([3.0, 2.0, 1.0, 0.5])  # no negative eigenvalues
    with pytest.warns(DegenerateSpectrumWarning):
        emb = ase(P, Signature(3, 1))
    assert emb.padded == 1
    np.testing.assert_allclose(sorted(emb.values), [0.5, 1, 2, 3])


def test_select_eigenpairs():
    idx, padded = select_eigenpairs(np.array([5.0, 2.0, 0.1, -0.3, -4.0]), 2, 2)
    assert padded == 0
    assert list(idx) == [0, 1, 4, 3]
    with pytest.raises(InvalidArgument):
        select_eigenpairs(np.array([1.0, -1.0]), 2, 1)


@settings(max_examples=30, deadline=None)
@given(n=st.integers(2, 25), seed=st.integers(0, 2**32 - 1))
def test_property_orthonormal_vectors(n, seed):
    M = np.random.default_rng(seed).normal(size=(n, n))
    M = M + M.T
    eig = sym_eigen(M)
    np.testing.assert_allclose(eig.vectors.T @ eig.vectors, np.eye(n), atol=1e-10)
    p = max(1, n // 3)
    q = max(0, min(n - p, n // 4))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegenerateSpectrumWarning)
        emb = ase(M, Signature(p, q), eig=eig)
    np.testing.assert_allclose(emb.Z, emb.vectors * np.sqrt(np.abs(emb.values)))


def test_bitwise_deterministic(rng):
    M = rng.normal(size=(40, 40))
    M = M + M.T
    a, b = sym_eigen(M), sym_eigen(M.copy())
    assert a.values.tobytes() == b.values.tobytes()
    assert a.vectors.tobytes() == b.vectors.tobytes()


def test_sign_convention(rng):
    M = rng.normal(size=(12, 12))
    V = sym_eigen(M + M.T).vectors
    idx = np.argmax(np.abs(V), axis=0)
    assert np.all(V[idx, np.arange(12)] > 0)
