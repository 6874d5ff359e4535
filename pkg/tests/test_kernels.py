import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ppgloss.errors import DimensionMismatchError, ZeroVectorError
from ppgloss.kernels import AttentionKernelInput, scaled_cosine_attention


def reference(Q, K, tau, B):
    out = np.empty((len(Q), len(K)))
    for i, q in enumerate(Q):
        for j, k in enumerate(K):
            dot = sum(a * b for a, b in zip(q, k))
            out[i, j] = dot / (np.sqrt(sum(a * a for a in q)) * np.sqrt(sum(b * b for b in k)))
    return out / tau + B


def test_identical_unit_vectors():
    q = np.array([[0.6, 0.8]])
    assert scaled_cosine_attention(AttentionKernelInput(q, q, 1.0))[0, 0] == pytest.approx(1.0)


def test_orthogonal_with_bias():
    S = scaled_cosine_attention(np.array([[1.0, 0.0]]), np.array([[0.0, 2.0]]), 1.0, np.array([[0.5]]))
    assert S[0, 0] == 0.5


def test_random_oracle(rng):
    Q, K, B = rng.normal(size=(4, 8)), rng.normal(size=(5, 8)), rng.normal(size=(4, 5))
    S = scaled_cosine_attention(AttentionKernelInput(Q, K, 0.7, B))
    np.testing.assert_allclose(S, reference(Q, K, 0.7, B), atol=1e-12)


@given(st.integers(0, 2**32 - 1), st.floats(0.05, 20))
def test_bounds_and_scale_invariance(seed, tau):
    r = np.random.default_rng(seed)
    Q, K, B = r.normal(size=(3, 4)), r.normal(size=(6, 4)), r.normal(size=(3, 6))
    S = scaled_cosine_attention(Q, K, tau, B)
    assert np.all(S >= -1 / tau + B.min() - 1e-12) and np.all(S <= 1 / tau + B.max() + 1e-12)
    scale = r.uniform(0.1, 10, size=(3, 1))
    np.testing.assert_allclose(scaled_cosine_attention(Q * scale, K, tau, B), S, atol=1e-12)


def test_errors():
    with pytest.raises(ZeroVectorError):
        scaled_cosine_attention(np.zeros((1, 3)), np.ones((2, 3)), 1.0)
    with pytest.raises(ZeroVectorError):
        scaled_cosine_attention(np.ones((1, 3)), np.zeros((2, 3)), 1.0)
    with pytest.raises(DimensionMismatchError):
        scaled_cosine_attention(np.ones((1, 3)), np.ones((2, 4)), 1.0)
    with pytest.raises(DimensionMismatchError):
        scaled_cosine_attention(np.ones((1, 3)), np.ones((2, 3)), 1.0, np.zeros((2, 2)))
    with pytest.raises(ValueError):
        scaled_cosine_attention(np.ones((1, 3)), np.ones((2, 3)), 0.0)
