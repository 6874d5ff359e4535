"""Pure NumPy fallback for the dynamic-programming kernels.

Each recursion is swept along anti-diagonals so that every cell on a
diagonal is updated in one vectorized step.  Cell (i, j) of an
(n+2) x (m+2) table depends only on diagonals i+j-1 and i+j-2 in the
forward pass and on i+j+1, i+j+2 in the backward pass.
"""

import numpy as np


def _diag(s, n, m):
    # 1-based (i, j) with i + j == s, 1 <= i <= n, 1 <= j <= m
    i = np.arange(max(1, s - m), min(n, s - 1) + 1)
    return i, s - i


def _softmin3(a, b, c, gamma):
    stacked = np.stack([a, b, c])
    lo = stacked.min(axis=0)
    if gamma == 0.0:
        return lo
    out = lo.copy()
    finite = np.isfinite(lo)
    z = np.exp(-(stacked[:, finite] - lo[finite]) / gamma).sum(axis=0)
    out[finite] = lo[finite] - gamma * np.log(z)
    return out


def soft_dtw_forward(D, gamma):
    """Accumulated soft-min cost table R, shape (n+2, m+2).

    ``R[i, j] = D[i-1, j-1] + softmin(R[i-1, j-1], R[i-1, j], R[i, j-1])``
    with ``R[0, 0] = 0`` and infinite borders; the result is ``R[n, m]``.
    """
    D = np.ascontiguousarray(D, dtype=np.float64)
    n, m = D.shape
    R = np.full((n + 2, m + 2), np.inf)
    R[0, 0] = 0.0
    for s in range(2, n + m + 1):
        i, j = _diag(s, n, m)
        R[i, j] = D[i - 1, j - 1] + _softmin3(R[i - 1, j - 1], R[i - 1, j], R[i, j - 1], gamma)
    return R


def soft_dtw_backward(D, R, gamma):
    """Expected alignment matrix E (n x m) for ``gamma > 0``."""
    D = np.ascontiguousarray(D, dtype=np.float64)
    n, m = D.shape
    Dp = np.zeros((n + 2, m + 2))
    Dp[1:n + 1, 1:m + 1] = D
    R = np.array(R, dtype=np.float64, copy=True)
    R[:, m + 1] = -np.inf
    R[n + 1, :] = -np.inf
    R[n + 1, m + 1] = R[n, m]
    E = np.zeros((n + 2, m + 2))
    E[n + 1, m + 1] = 1.0
    for s in range(n + m, 1, -1):
        i, j = _diag(s, n, m)
        r = R[i, j]
        a = np.exp((R[i + 1, j] - r - Dp[i + 1, j]) / gamma)
        b = np.exp((R[i, j + 1] - r - Dp[i, j + 1]) / gamma)
        c = np.exp((R[i + 1, j + 1] - r - Dp[i + 1, j + 1]) / gamma)
        E[i, j] = E[i + 1, j] * a + E[i, j + 1] * b + E[i + 1, j + 1] * c
    return E[1:n + 1, 1:m + 1].copy()


def soft_dtw_forward_weights(D, gamma, symmetric=False):
    """Forward table R plus normalized soft-min weights, for ``gamma > 0``.

    ``W[i, j]`` holds the share of the diagonal, upper and left
    predecessors in cell (i, j)'s soft-min; they sum to one.  The backward
    pass then needs no further exponentials.  ``symmetric`` is accepted for
    interface parity and ignored.
    """
    D = np.ascontiguousarray(D, dtype=np.float64)
    n, m = D.shape
    if symmetric and n != m:
        raise ValueError("symmetric mode needs a square cost matrix")
    R = np.full((n + 2, m + 2), np.inf)
    W = np.zeros((n + 2, m + 2, 3))
    R[0, 0] = 0.0
    for s in range(2, n + m + 1):
        i, j = _diag(s, n, m)
        stacked = np.stack([R[i - 1, j - 1], R[i - 1, j], R[i, j - 1]])
        lo = stacked.min(axis=0)
        e = np.exp(-(stacked - lo) / gamma)
        tot = e.sum(axis=0)
        R[i, j] = D[i - 1, j - 1] + lo - gamma * np.log(tot)
        W[i, j] = (e / tot).T
    return R, W


def soft_dtw_backward_weights(W):
    """Expected alignment from the forward weights: E[i, j] sums each
    successor's E times the weight it gives to (i, j)."""
    n, m = W.shape[0] - 2, W.shape[1] - 2
    E = np.zeros((n + 2, m + 2))
    E[n, m] = 1.0
    for s in range(n + m - 1, 1, -1):
        i, j = _diag(s, n, m)
        E[i, j] = (E[i + 1, j] * W[i + 1, j, 1] + E[i, j + 1] * W[i, j + 1, 2]
                   + E[i + 1, j + 1] * W[i + 1, j + 1, 0])
    return E[1:n + 1, 1:m + 1].copy()


def frechet_dp(dist):
    """Discrete Frechet coupling DP over a pointwise distance matrix."""
    dist = np.ascontiguousarray(dist, dtype=np.float64)
    p, q = dist.shape
    C = np.empty((p, q))
    C[0, :] = np.maximum.accumulate(dist[0, :])
    C[:, 0] = np.maximum.accumulate(dist[:, 0])
    # 0-based diagonals i + j == s over the interior
    for s in range(2, p + q - 1):
        i = np.arange(max(1, s - q + 1), min(p - 1, s - 1) + 1)
        j = s - i
        best = np.minimum(np.minimum(C[i - 1, j - 1], C[i - 1, j]), C[i, j - 1])
        C[i, j] = np.maximum(best, dist[i, j])
    return float(C[p - 1, q - 1])
