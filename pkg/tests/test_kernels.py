import numpy as np
import pytest
import scipy.sparse as sp

from cavlab import _kernels_py, kernels

try:
    from cavlab import _kernels as _kernels_c
except ImportError:  # extension not built
    _kernels_c = None

needs_ext = pytest.mark.skipif(_kernels_c is None, reason="Cython extension not built")


def _brute_table(p, q, N_max):
    rows = [(n * n * p + m * m * q, n, m)
            for n in range(1, 200) for m in range(1, 200) if n * n * p + m * m * q <= N_max]
    return sorted(rows)


@pytest.mark.parametrize("p,q,N_max", [(1, 1, 50), (1, 3, 500), (2, 5, 1000), (7, 3, 10), (1, 1, 1)])
def test_python_mode_table_matches_brute_force(p, q, N_max):
    N, n, m = _kernels_py.mode_table(p, q, N_max)
    assert list(zip(N.tolist(), n.tolist(), m.tolist())) == _brute_table(p, q, N_max)


@needs_ext
@pytest.mark.parametrize("p,q,N_max", [(1, 1, 50), (1, 3, 5000), (4, 1, 1300), (3, 7, 10000), (2, 1, 2)])
def test_backends_agree_on_mode_table(p, q, N_max):
    for a, b in zip(_kernels_py.mode_table(p, q, N_max), _kernels_c.mode_table(p, q, N_max)):
        np.testing.assert_array_equal(a, b)


def _coefficients(rng, Nu, Nv):
    return (1 + 0.1 * rng.random((Nv, Nu - 1)), 1 + 0.1 * rng.random((Nv - 1, Nu)),
            0.05 * rng.standard_normal((Nv - 1, Nu - 1)))


def _matrix(backend, Nu, Nv, seed=0, hu=0.1, hv=0.07):
    k11, k22, k12 = _coefficients(np.random.default_rng(seed), Nu, Nv)
    r, c, v = backend.assemble_stiffness(k11, k22, k12, hu, hv)
    n = (Nu - 2) * (Nv - 2)
    return sp.csr_matrix((v, (r, c)), shape=(n, n))


@pytest.mark.parametrize("Nu,Nv", [(5, 4), (17, 23)])
def test_stiffness_is_symmetric(Nu, Nv):
    A = _matrix(_kernels_py, Nu, Nv)
    assert abs(A - A.T).max() == 0.0


@needs_ext
@pytest.mark.parametrize("Nu,Nv", [(5, 4), (17, 23), (40, 31)])
def test_backends_agree_on_stiffness(Nu, Nv):
    A = _matrix(_kernels_py, Nu, Nv, seed=3)
    B = _matrix(_kernels_c, Nu, Nv, seed=3)
    assert abs(A - B).max() <= 1e-13 * abs(A).max()


def test_identity_metric_gives_five_point_laplacian():
    Nu = Nv = 6
    h = 0.2
    r, c, v = kernels.assemble_stiffness(np.ones((Nv, Nu - 1)), np.ones((Nv - 1, Nu)), np.zeros((Nv - 1, Nu - 1)), h, h)
    A = sp.csr_matrix((v, (r, c)), shape=(16, 16)).toarray()
    T = 2 * np.eye(4) - np.eye(4, k=1) - np.eye(4, k=-1)
    expected = np.kron(np.eye(4), T) + np.kron(T, np.eye(4))
    np.testing.assert_allclose(A, expected, atol=1e-14)


def test_backend_name():
    assert kernels.BACKEND in ("cython", "python")
