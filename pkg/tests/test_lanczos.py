import numpy as np
import pytest

from ptfidelity import (
    NoConvergenceError,
    QuasiNullBreakdownError,
    complex_symmetric_lanczos,
    ground_state_index,
)
from ptfidelity.xxz import XxzParams, build_hamiltonian, build_m0_basis


def test_real_tridiagonal_smallest_eigenvalue():
    A = np.array([[2.0, -1.0, 0.0], [-1.0, 2.0, -1.0], [0.0, -1.0, 2.0]])
    res = complex_symmetric_lanczos(A, 3, rng=np.random.default_rng(1))
    assert abs(res.eigenvalue - (2.0 - np.sqrt(2.0))) < 1e-12
    assert res.residual < 1e-10


def test_imaginary_pair_tie_break_to_plus_im():
    A = np.array([[0.0, 1j], [1j, 0.0]])  # eigenvalues +-i, both Re = 0
    res = complex_symmetric_lanczos(A, 2, rng=np.random.default_rng(2))
    assert abs(res.eigenvalue - 1j) < 1e-12


def test_left_vector_is_transpose_by_symmetry():
    rng = np.random.default_rng(3)
    A = rng.standard_normal((40, 40)) + 1j * rng.standard_normal((40, 40))
    A = 0.5 * (A + A.T)
    res = complex_symmetric_lanczos(A, 40, rng=rng, max_iter=80)
    x = res.vector
    left_resid = x @ A - res.eigenvalue * x
    assert np.abs(left_resid).max() < 1e-8


@pytest.mark.parametrize("L,jz,gamma", [(8, 0.5, 0.1), (10, 1.0, 0.5), (12, 0.5, 0.1)])
def test_matches_dense_ground_value(L, jz, gamma):
    basis = build_m0_basis(L)
    H = build_hamiltonian(XxzParams(jz=jz, gamma=gamma, L=L), basis)
    res = complex_symmetric_lanczos(H, basis.size, rng=np.random.default_rng(4),
                                    max_iter=400)
    w = np.linalg.eigvals(H.to_dense())
    dense = w[ground_state_index(w)]
    assert abs(res.eigenvalue - dense) < 1e-10


def test_quasi_null_seed_restarts():
    A = np.diag(np.array([1.0, 2.0, 3.0, 4.0], dtype=complex))
    seed = np.zeros(4, dtype=complex)
    seed[0] = 1.0
    seed[1] = 1j    # <v, v> = 1 - 1 = 0: quasi-null seed
    res = complex_symmetric_lanczos(A, 4, v0=seed, rng=np.random.default_rng(5))
    assert res.restarts >= 1
    assert abs(res.eigenvalue - 1.0) < 1e-12


def test_quasi_null_exhausts_restarts():
    A = np.diag(np.array([1.0, 2.0], dtype=complex))
    seed = np.array([1.0, 1j])
    with pytest.raises(QuasiNullBreakdownError):
        complex_symmetric_lanczos(A, 2, v0=seed, restart_max=0,
                                  rng=np.random.default_rng(6))


def test_no_convergence_raises():
    rng = np.random.default_rng(7)
    A = rng.standard_normal((200, 200))
    A = 0.5 * (A + A.T)
    with pytest.raises(NoConvergenceError):
        complex_symmetric_lanczos(A, 200, max_iter=3, rng=rng)


def test_seed_vector_determinism():
    rng1 = np.random.default_rng(8)
    rng2 = np.random.default_rng(8)
    A = np.diag(np.arange(1.0, 30.0)) + 0.01 * np.ones((29, 29))
    r1 = complex_symmetric_lanczos(A, 29, rng=rng1)
    r2 = complex_symmetric_lanczos(A, 29, rng=rng2)
    assert r1.eigenvalue == r2.eigenvalue
    assert np.array_equal(r1.vector, r2.vector)
