"""Scaled cosine attention similarity, as used in Swin-style generators."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, ZeroVectorError


@dataclass(frozen=True)
class AttentionKernelInput:
    Q: np.ndarray
    K: np.ndarray
    tau: float
    B: np.ndarray | float = 0.0


def scaled_cosine_attention(Q, K=None, tau: float | None = None, B=0.0) -> np.ndarray:
    """Similarity ``S[i, j] = cos(q_i, k_j) / tau + B[i, j]``.

    Parameters
    ----------
    Q : (n, d) array_like or AttentionKernelInput
        Query rows.  When an :class:`AttentionKernelInput` is passed the
        remaining arguments are taken from it.
    K : (m, d) array_like
        Key rows.
    tau : float
        Positive temperature.
    B : (n, m) array_like or float
        Additive bias; scalars broadcast.

    Raises
    ------
    ZeroVectorError
        If any query or key row has zero norm.
    """
    if isinstance(Q, AttentionKernelInput):
        Q, K, tau, B = Q.Q, Q.K, Q.tau, Q.B
    Q = np.atleast_2d(np.asarray(Q, dtype=np.float64))
    K = np.atleast_2d(np.asarray(K, dtype=np.float64))
    if Q.shape[1] != K.shape[1] or Q.shape[1] < 1:
        raise DimensionMismatchError(f"query dim {Q.shape[1]} != key dim {K.shape[1]}")
    if tau is None or not tau > 0:
        raise ValueError("tau must be positive")
    qn = np.linalg.norm(Q, axis=1)
    kn = np.linalg.norm(K, axis=1)
    if np.any(qn == 0) or np.any(kn == 0):
        raise ZeroVectorError("zero-norm row in Q or K")
    B = np.asarray(B, dtype=np.float64)
    if B.ndim and B.shape != (Q.shape[0], K.shape[0]):
        raise DimensionMismatchError(f"bias shape {B.shape} != {(Q.shape[0], K.shape[0])}")
    cos = np.clip((Q / qn[:, None]) @ (K / kn[:, None]).T, -1.0, 1.0)
    return cos / tau + B
