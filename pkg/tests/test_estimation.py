import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pabm.cluster import ClusteringResult
from pabm.errors import InvalidArgument
from pabm.estimation import estimate_lambdas, reconstruct_P_blockwise, reconstruct_P_labelfree
from pabm.metrics import rmse_P
from pabm.model import edge_prob_matrix, sample_adjacency

from conftest import blocky_params, exact_params


def scaled_truth(params, k, l):
    """sigma u for the rank-one block lambda^{(kl)} (lambda^{(lk)})^T, sign made positive."""
    a, b = params.block(k, l), params.block(l, k)
    return a * np.sqrt(np.linalg.norm(b) / np.linalg.norm(a))


def test_rank_one_blocks_recovered_exactly():
    params = exact_params(40, 3, 6)
    est = estimate_lambdas(edge_prob_matrix(params), params.z)
    for k in range(1, 4):
        for l in range(1, 4):
            np.testing.assert_allclose(est.vectors[(k, l)], scaled_truth(params, k, l), atol=1e-10)
    assert not est.degenerate


def test_all_ones_block():
    A = np.zeros((7, 7))
    A[:3, 3:] = 1.0
    A[3:, :3] = 1.0
    est = estimate_lambdas(A, [1, 1, 1, 2, 2, 2, 2])
    u, v = est.vectors[(1, 2)], est.vectors[(2, 1)]
    np.testing.assert_allclose(u, u[0])
    np.testing.assert_allclose(v, v[0])
    np.testing.assert_allclose(np.outer(u, v), 1.0, atol=1e-12)
    assert est.sigma[(1, 2)] ** 2 == pytest.approx(np.sqrt(12))
    # empty diagonal blocks carry no signal
    assert {(1, 1), (2, 2)} <= est.degenerate
    np.testing.assert_array_equal(est.vectors[(1, 1)], 0.0)


def test_blockwise_reconstruction_exact():
    params = exact_params(50, 3, 9)
    P = edge_prob_matrix(params)
    rec = reconstruct_P_blockwise(estimate_lambdas(P, params.z), params.z)
    assert np.max(np.abs(rec.P - P)) < 1e-9
    assert rec.route == "blockwise"


def test_single_community():
    params = blocky_params([9], 1)
    P = edge_prob_matrix(params)
    est = estimate_lambdas(P, np.ones(9, dtype=int))
    lam = est.vectors[(1, 1)]
    rec = reconstruct_P_blockwise(est, np.ones(9, dtype=int))
    np.testing.assert_allclose(rec.P, np.outer(lam, lam))
    np.testing.assert_allclose(lam, params.Lam[:, 0], atol=1e-12)


def test_accepts_clustering_result():
    params = exact_params(30, 2, 2)
    res = ClusteringResult(labels=params.z, K=2)
    est = estimate_lambdas(edge_prob_matrix(params), res)
    assert est.K == 2


def test_errors():
    with pytest.raises(InvalidArgument):
        estimate_lambdas(np.ones((4, 4)), [1, 1, 3, 3])
    with pytest.raises(InvalidArgument):
        estimate_lambdas(np.ones((4, 4)), [1, 2, 1])
    params = exact_params(20, 2, 0)
    est = estimate_lambdas(edge_prob_matrix(params), params.z)
    with pytest.raises(InvalidArgument):
        reconstruct_P_blockwise(est, np.ones(20, dtype=int))


def test_labelfree_exact():
    for K, seed in [(1, 0), (2, 1), (3, 2)]:
        params = exact_params(60, K, seed)
        P = edge_prob_matrix(params)
        rec = reconstruct_P_labelfree(P, K)
        assert np.max(np.abs(rec.P - P)) < 1e-8
        assert rec.meta["padded"] == 0


def test_labelfree_K1_sampled_rank_one():
    lam = np.random.default_rng(0).uniform(0.3, 0.9, 50)
    A = np.asarray(sample_adjacency(np.outer(lam, lam), 1))
    rec = reconstruct_P_labelfree(A, 1)
    np.testing.assert_array_equal(rec.P, rec.P.T)
    assert np.linalg.matrix_rank(rec.P, tol=1e-8 * np.abs(rec.P).max()) == 1


def test_labelfree_clip():
    params = exact_params(40, 2, 3)
    A = np.asarray(sample_adjacency(edge_prob_matrix(params), 0))
    rec = reconstruct_P_labelfree(A, 2, clip=True)
    assert rec.P.min() >= 0 and rec.P.max() <= 1


def test_dilation_identity():
    # the off-diagonal blocks of a symmetric matrix are read through the SVD of one block:
    # the top eigenpair of [[0, M], [M^T, 0]] is (s, [u; v] / sqrt 2)
    rng = np.random.default_rng(4)
    M = rng.random((5, 3))
    D = np.block([[np.zeros((5, 5)), M], [M.T, np.zeros((3, 3))]])
    w, V = np.linalg.eigh(D)
    est = estimate_lambdas(D, [1] * 5 + [2] * 3)
    top = V[:, -1] * np.sign(V[:, -1].sum())
    np.testing.assert_allclose(est.sigma[(1, 2)] ** 2, w[-1], rtol=1e-12)
    np.testing.assert_allclose(est.vectors[(1, 2)], np.sqrt(2 * w[-1]) * top[:5], rtol=1e-10)
    np.testing.assert_allclose(est.vectors[(2, 1)], np.sqrt(2 * w[-1]) * top[5:], rtol=1e-10)


@pytest.mark.slow
def test_sampled_rates():
    rng = np.random.default_rng(11)
    sup, rmse_b, rmse_f = {}, {}, {}
    for n in (128, 256, 1024):
        params = exact_params(n, 2, int(rng.integers(1 << 30)))
        P = edge_prob_matrix(params)
        A = np.asarray(sample_adjacency(P, int(rng.integers(1 << 30))))
        est = estimate_lambdas(A, params.z)
        sup[n] = max(np.abs(est.vectors[(k, l)] - scaled_truth(params, k, l)).max()
                     for k in (1, 2) for l in (1, 2))
        rmse_b[n] = rmse_P(reconstruct_P_blockwise(est, params.z), P)
        rmse_f[n] = rmse_P(reconstruct_P_labelfree(A, 2), P)
    assert sup[1024] < sup[256]
    assert rmse_b[1024] < rmse_b[128]
    assert rmse_f[1024] < rmse_f[128]


@pytest.mark.slow
def test_labelfree_K3_rate():
    out = {}
    for n in (256, 1024):
        params = exact_params(n, 3, n)
        P = edge_prob_matrix(params)
        A = np.asarray(sample_adjacency(P, 1))
        out[n] = rmse_P(reconstruct_P_labelfree(A, 3), P)
    assert out[1024] < out[256]



def test_dilation_factor_two():
    rng = np.random.default_rng(5)
    a, b = rng.random(4), rng.random(6)
    P12 = np.outer(a, b)
    M = 2 * np.block([[np.zeros((4, 4)), P12], [P12.T, np.zeros((6, 6))]])
    est = estimate_lambdas(M / 2, [1] * 4 + [2] * 6)
    assert np.linalg.eigvalsh(M)[-1] == pytest.approx(2 * est.sigma[(1, 2)] ** 2, rel=1e-12)


@settings(max_examples=25, deadline=None)
@given(K=st.integers(1, 3), seed=st.integers(0, 2**32 - 1))
def test_property_scale_consistency_and_symmetry(K, seed):
    params = exact_params(K * K + 20, K, seed)
    A = np.asarray(sample_adjacency(edge_prob_matrix(params), seed))
    est = estimate_lambdas(A, params.z)
    for k in range(1, K + 1):
        for l in range(k + 1, K + 1):
            prod = np.linalg.norm(est.vectors[(k, l)]) * np.linalg.norm(est.vectors[(l, k)])
            assert prod == pytest.approx(est.sigma[(k, l)] ** 2, abs=1e-8)
        if (k, k) not in est.degenerate:
            assert np.linalg.norm(est.vectors[(k, k)]) ** 2 == pytest.approx(est.sigma[(k, k)] ** 2)
    Pb = reconstruct_P_blockwise(est, params.z).P
    Pf = reconstruct_P_labelfree(A, K).P
    assert np.array_equal(Pb, Pb.T) and np.array_equal(Pf, Pf.T)
