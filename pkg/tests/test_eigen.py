import numpy as np
import pytest

from mpcanet.eigen import canonical_signs, jacobi_eigh


def random_symmetric(rng, n):
    m = rng.normal(size=(n, n))
    return (m + m.T) / 2.0


def test_diagonal_matrix():
    w, v = jacobi_eigh(np.diag([1.0, 3.0, 2.0]))
    assert np.allclose(w, [3.0, 2.0, 1.0])
    assert np.allclose(np.abs(v), np.eye(3)[:, [1, 2, 0]])


def test_one_by_one():
    w, v = jacobi_eigh(np.array([[5.0]]))
    assert w.tolist() == [5.0]
    assert v.tolist() == [[1.0]]


@pytest.mark.parametrize("n", [2, 3, 5, 12, 30])
def test_matches_lapack_eigensolver(n):
    rng = np.random.default_rng(n)
    a = random_symmetric(rng, n)
    w, v = jacobi_eigh(a)
    ref = np.sort(np.linalg.eigvalsh(a))[::-1]
    assert np.allclose(w, ref, atol=1e-10)
    # residual and orthonormality
    assert np.max(np.abs(a @ v - v @ np.diag(w))) < 1e-9
    assert np.max(np.abs(v.T @ v - np.eye(n))) < 1e-10


def test_psd_scatter_eigenvalues_nonnegative():
    rng = np.random.default_rng(99)
    x = rng.normal(size=(20, 6))
    a = x.T @ x
    w, _ = jacobi_eigh(a)
    assert w.min() > -1e-12
    assert np.all(np.diff(w) <= 1e-12)


def test_sign_canonicalization():
    v = np.array([[0.6, -0.8], [-0.8, -0.6]])
    fixed = canonical_signs(v)
    for j in range(2):
        col = fixed[:, j]
        assert col[np.argmax(np.abs(col))] > 0


def test_deterministic_repeat():
    rng = np.random.default_rng(7)
    a = random_symmetric(rng, 8)
    w1, v1 = jacobi_eigh(a)
    w2, v2 = jacobi_eigh(a)
    assert np.array_equal(w1, w2)
    assert np.array_equal(v1, v2)


def test_rejects_nonsquare():
    with pytest.raises(ValueError):
        jacobi_eigh(np.ones((2, 3)))
