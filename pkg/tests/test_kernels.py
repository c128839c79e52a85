"""Compiled and pure-numpy kernels must agree."""
import numpy as np
import pytest

from pentaspec import kernels
from pentaspec._accel import HAVE_NUMBA

pytestmark = pytest.mark.skipif(not HAVE_NUMBA, reason="numba not installed")


@pytest.fixture
def bands():
    rng = np.random.default_rng(3)
    n = 400
    return rng.uniform(0.5, 1.5, n), rng.uniform(-1, 1, n), rng.uniform(0.5, 1.5, n)


def test_forward(bands):
    C, A, B = bands
    a = kernels.forward_sweep_nb(C, A, B, 0.3 + 0.1j, 0j, 1 + 0j, 60)
    b = kernels.forward_sweep_np(C, A, B, 0.3 + 0.1j, 0j, 1 + 0j, 60)
    assert a[1] == b[1] and np.allclose(a[0], b[0], rtol=1e-13)


def test_backward(bands):
    C, A, B = bands
    lams = np.array([3.5, 4 + 1j, -3.2j])
    a = kernels.backward_minimal_nb(C, A, B, lams, 300, 5)
    b = kernels.backward_minimal_np(C, A, B, lams, 300, 5)
    assert a[1] == b[1]
    assert np.allclose(a[0] / a[0][:, 1:2], b[0] / b[0][:, 1:2], rtol=1e-12)


def test_jost(bands):
    C, A, B = bands
    lams = np.array([3.5 + 0j, 4 + 1j])
    alphas = np.array([0.3 + 0j, 0.2 - 0.1j])
    a = kernels.jost_sweep_nb(C, A, B, lams, alphas, 200)
    b = kernels.jost_sweep_np(C, A, B, lams, alphas, 200)
    assert np.allclose(a[0], b[0], rtol=1e-11) and np.allclose(a[1], b[1], rtol=1e-11)


def test_tridiag():
    rng = np.random.default_rng(5)
    d, e = rng.standard_normal(200), rng.standard_normal(200)
    e[-1] = 0
    w, its, st = kernels.tridiag_eigvalsh_nb(d, e, 0.0, 6000)
    ref = kernels.tridiag_eigvalsh_np(d, e, 0.0, 6000)[0]
    assert st == kernels.OK and np.allclose(np.sort(w), np.sort(ref), atol=1e-12)


def test_hessenberg():
    rng = np.random.default_rng(6)
    n = 80
    H = np.diag(rng.standard_normal(n)) + np.diag(rng.standard_normal(n - 1), 1) + np.diag(rng.standard_normal(n - 1), -1)
    w = kernels.hessenberg_eigvals_nb(H.astype(complex), 1e-13, 2400)
    ref = kernels.hessenberg_eigvals_np(H.astype(complex), 1e-13, 2400)[0]
    assert w[3] == kernels.OK
    key = lambda z: (round(z.real, 6), round(z.imag, 6))
    assert np.allclose(sorted(w[0], key=key), sorted(ref, key=key), atol=1e-9)
