"""Clustering and estimation error metrics."""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import InvalidArgument


@dataclass(frozen=True)
class ErrorReport:
    miscluster_count: int
    miscluster_rate: float
    ari: float
    best_permutation: dict

    def as_dict(self):
        return {
            "miscluster_count": self.miscluster_count,
            "miscluster_rate": self.miscluster_rate,
            "ari": self.ari,
            "best_permutation": {str(k): v for k, v in self.best_permutation.items()},
        }


def _as_labels(x):
    return np.asarray(getattr(x, "labels", x))


def _check_pair(pred, truth):
    pred, truth = _as_labels(pred), _as_labels(truth)
    if pred.shape != truth.shape or pred.ndim != 1:
        raise InvalidArgument(f"label vectors differ in shape: {pred.shape} vs {truth.shape}")
    return pred, truth


def contingency(pred, truth):
    """Confusion counts plus the label values indexing its rows and columns."""
    pred, truth = _check_pair(pred, truth)
    pv, pi = np.unique(pred, return_inverse=True)
    tv, ti = np.unique(truth, return_inverse=True)
    M = np.zeros((pv.size, tv.size), dtype=np.int64)
    np.add.at(M, (pi.ravel(), ti.ravel()), 1)
    return M, pv, tv


def _py(x):
    return x.item() if hasattr(x, "item") else x


def community_error(pred, truth):
    """Misclustering count minimised over relabelings of ``pred``.

    Solved exactly as an assignment problem on the confusion matrix. When
    the two sides use different numbers of labels the matrix is padded, so
    members of an unmatched predicted cluster all count as errors.
    """
    pred, truth = _check_pair(pred, truth)
    n = pred.size
    M, pv, tv = contingency(pred, truth)
    size = max(M.shape)
    padded = np.zeros((size, size), dtype=np.int64)
    padded[:M.shape[0], :M.shape[1]] = M
    rows, cols = linear_sum_assignment(padded, maximize=True)
    matched = int(padded[rows, cols].sum())
    perm = {
        _py(pv[r]): (_py(tv[c]) if c < tv.size else None)
        for r, c in zip(rows, cols) if r < pv.size
    }
    count = n - matched
    return ErrorReport(
        miscluster_count=count,
        miscluster_rate=count / n if n else 0.0,
        ari=adjusted_rand(pred, truth),
        best_permutation=perm,
    )


def _pairs(x):
    return x * (x - 1) / 2.0


def adjusted_rand(pred, truth):
    """Adjusted Rand index from the pair-counting contingency table.

    Two labelings that both put everything in one cluster (or both use
    singletons) score 1.
    """
    M, _, _ = contingency(pred, truth)
    n = M.sum()
    if n < 2:
        return 1.0
    index = _pairs(M).sum()
    a = _pairs(M.sum(axis=1)).sum()
    b = _pairs(M.sum(axis=0)).sum()
    expected = a * b / _pairs(n)
    top = (a + b) / 2.0
    if top == expected:
        return 1.0
    return float((index - expected) / (top - expected))


def rmse_P(P_hat, P):
    """``||P_hat - P||_F / n``."""
    P_hat = np.asarray(getattr(P_hat, "P", P_hat), dtype=float)
    P = np.asarray(P, dtype=float)
    if P_hat.shape != P.shape or P.ndim != 2 or P.shape[0] != P.shape[1]:
        raise InvalidArgument(f"need two square matrices of equal shape, got {P_hat.shape} and {P.shape}")
    return float(np.linalg.norm(P_hat - P) / P.shape[0])
