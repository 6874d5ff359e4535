import numpy as np
import pytest

from ppgloss import _backend, _pycore

compiled = pytest.importorskip("ppgloss._ccore")


def cost(x, y):
    return np.ascontiguousarray((x[:, None] - y[None, :]) ** 2)


@pytest.mark.parametrize("shape", [(1, 1), (1, 7), (6, 1), (13, 9), (40, 40)])
@pytest.mark.parametrize("gamma", [0.0, 0.1, 1.0, 10.0])
def test_forward_agrees(rng, shape, gamma):
    D = cost(rng.normal(size=shape[0]), rng.normal(size=shape[1]))
    np.testing.assert_allclose(compiled.soft_dtw_forward(D, gamma), _pycore.soft_dtw_forward(D, gamma),
                               rtol=1e-12, atol=1e-12)


@pytest.mark.parametrize("shape", [(1, 1), (5, 8), (21, 17), (40, 40)])
@pytest.mark.parametrize("gamma", [0.1, 1.0, 10.0])
def test_weights_kernels(rng, shape, gamma):
    D = cost(rng.normal(size=shape[0]), rng.normal(size=shape[1]))
    n, m = shape
    R_ref = _pycore.soft_dtw_forward(D, gamma)
    E_ref = _pycore.soft_dtw_backward(D, R_ref, gamma)
    for mod in (compiled, _pycore):
        R, W = mod.soft_dtw_forward_weights(D, gamma)
        np.testing.assert_allclose(R[1:n + 1, 1:m + 1], R_ref[1:n + 1, 1:m + 1], rtol=1e-12)
        # softmin shares are a probability vector at each interior cell
        np.testing.assert_allclose(W[1:n + 1, 1:m + 1].sum(axis=-1), 1.0, atol=1e-12)
        E = mod.soft_dtw_backward_weights(W)
        np.testing.assert_allclose(E, E_ref, atol=1e-12)
        np.testing.assert_allclose(mod.soft_dtw_backward(D, R_ref, gamma), E_ref, atol=1e-12)


@pytest.mark.parametrize("n", [1, 2, 9, 33])
def test_symmetric_mode(rng, n):
    x = rng.normal(size=n)
    D = cost(x, x)
    R_full, W_full = compiled.soft_dtw_forward_weights(D, 0.8, False)
    R_sym, W_sym = compiled.soft_dtw_forward_weights(D, 0.8, True)
    np.testing.assert_allclose(R_sym[1:n + 1, 1:n + 1], R_full[1:n + 1, 1:n + 1], rtol=1e-12)
    np.testing.assert_allclose(compiled.soft_dtw_backward_weights(W_sym),
                               compiled.soft_dtw_backward_weights(W_full), atol=1e-12)


def test_python_symmetric_rejects_rectangular():
    with pytest.raises(ValueError):
        _pycore.soft_dtw_forward_weights(np.zeros((3, 4)), 1.0, True)


def test_frechet_agrees(rng):
    for _ in range(10):
        d = np.ascontiguousarray(np.abs(rng.normal(size=(rng.integers(1, 30), rng.integers(1, 30)))))
        assert compiled.frechet_dp(d) == _pycore.frechet_dp(d)


def test_use_backend_roundtrip():
    start = _backend.active_backend()
    prev = _backend.use_backend("python")
    assert prev == start and _backend.active_backend() == "python"
    _backend.use_backend("compiled")
    assert _backend.active_backend() == "compiled"
    _backend.use_backend(start)
    with pytest.raises(ValueError):
        _backend.use_backend("fortran")


def test_compiled_is_default():
    assert "compiled" in _backend.available_backends()
