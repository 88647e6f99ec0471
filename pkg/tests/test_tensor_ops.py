import numpy as np
import pytest

from mpcanet.tensor_ops import (
    fold,
    frobenius_sq_distance,
    kron_chain,
    mode_multiply,
    multi_mode_multiply,
    unfold,
)


def naive_unfold(t, mode):
    """Index-loop oracle: rows index the chosen mode, columns walk the other
    modes in ascending order, last fastest."""
    t = np.asarray(t, dtype=float)
    other = [n for n in range(t.ndim) if n != mode]
    rows = t.shape[mode]
    cols = int(np.prod([t.shape[n] for n in other])) if other else 1
    out = np.zeros((rows, cols))
    for idx in np.ndindex(*t.shape):
        col = 0
        for n in other:
            col = col * t.shape[n] + idx[n]
        out[idx[mode], col] = t[idx]
    return out


def naive_mode_multiply(t, u, mode):
    """Direct summation over the contracted index."""
    t = np.asarray(t, dtype=float)
    u = np.asarray(u, dtype=float)
    dims = list(t.shape)
    dims[mode] = u.shape[0]
    out = np.zeros(dims)
    for idx in np.ndindex(*out.shape):
        total = 0.0
        for i in range(t.shape[mode]):
            src = list(idx)
            src[mode] = i
            total += t[tuple(src)] * u[idx[mode], i]
        out[idx] = total
    return out


def naive_kron(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    out = np.zeros((a.shape[0] * b.shape[0], a.shape[1] * b.shape[1]))
    for i in range(a.shape[0]):
        for j in range(a.shape[1]):
            for k in range(b.shape[0]):
                for l in range(b.shape[1]):
                    out[i * b.shape[0] + k, j * b.shape[1] + l] = a[i, j] * b[k, l]
    return out


class TestUnfold:
    def test_order1_is_column(self):
        assert unfold(np.array([1.0, 2.0, 3.0]), 0).tolist() == [[1.0], [2.0], [3.0]]

    def test_matrix_unfolds_to_itself(self):
        m = np.array([[1.0, 2.0], [3.0, 4.0]])
        assert np.array_equal(unfold(m, 0), m)

    def test_mode2_of_cube_matches_loop_oracle(self):
        rng = np.random.default_rng(0)
        t = rng.normal(size=(2, 2, 2))
        assert np.array_equal(unfold(t, 2), naive_unfold(t, 2))

    def test_all_modes_match_oracle(self):
        rng = np.random.default_rng(1)
        t = rng.normal(size=(3, 2, 4))
        for mode in range(3):
            assert np.array_equal(unfold(t, mode), naive_unfold(t, mode))

    def test_mode_out_of_range(self):
        with pytest.raises(ValueError):
            unfold(np.ones((2, 2)), 2)

    def test_fold_inverts(self):
        rng = np.random.default_rng(2)
        t = rng.normal(size=(3, 4, 2))
        for mode in range(3):
            assert np.array_equal(fold(unfold(t, mode), mode, t.shape), t)


class TestModeMultiply:
    def test_identity_leaves_tensor(self):
        rng = np.random.default_rng(3)
        t = rng.normal(size=(3, 2, 2))
        assert np.array_equal(mode_multiply(t, np.eye(2), 1), t)

    def test_zero_matrix_gives_zero(self):
        t = np.arange(12.0).reshape(3, 4)
        assert not mode_multiply(t, np.zeros((2, 4)), 1).any()

    def test_worked_example_and_oracle(self):
        t = np.array([[1.0, 2.0], [3.0, 4.0]])
        u = np.array([[1.0, 1.0], [0.0, 1.0]])
        got = mode_multiply(t, u, 0)
        assert got.tolist() == [[4.0, 6.0], [3.0, 4.0]]
        assert np.allclose(got, naive_mode_multiply(t, u, 0), atol=1e-12)

    def test_oracle_on_random_order3(self):
        rng = np.random.default_rng(4)
        t = rng.normal(size=(3, 2, 4))
        for mode in range(3):
            u = rng.normal(size=(5, t.shape[mode]))
            assert np.allclose(
                mode_multiply(t, u, mode), naive_mode_multiply(t, u, mode), atol=1e-12
            )

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            mode_multiply(np.ones((2, 3)), np.ones((2, 2)), 1)

    def test_linear_in_both_arguments(self):
        rng = np.random.default_rng(5)
        t1 = rng.normal(size=(2, 3, 2))
        t2 = rng.normal(size=(2, 3, 2))
        u1 = rng.normal(size=(4, 3))
        u2 = rng.normal(size=(4, 3))
        a, b = 0.7, -1.3
        left = mode_multiply(a * t1 + b * t2, u1, 1)
        right = a * mode_multiply(t1, u1, 1) + b * mode_multiply(t2, u1, 1)
        assert np.allclose(left, right, atol=1e-12)
        left = mode_multiply(t1, a * u1 + b * u2, 1)
        right = a * mode_multiply(t1, u1, 1) + b * mode_multiply(t1, u2, 1)
        assert np.allclose(left, right, atol=1e-12)


class TestMultiModeMultiply:
    def test_empty_list_is_identity(self):
        t = np.arange(6.0).reshape(2, 3)
        assert np.array_equal(multi_mode_multiply(t, []), t)

    def test_order_independence(self):
        rng = np.random.default_rng(6)
        t = rng.normal(size=(3, 3, 3))
        us = [rng.normal(size=(2, 3)) for _ in range(3)]
        forward_order = multi_mode_multiply(t, [(0, us[0]), (1, us[1]), (2, us[2])])
        backward = multi_mode_multiply(t, [(2, us[2]), (0, us[0]), (1, us[1])])
        assert np.allclose(forward_order, backward, atol=1e-12)

    def test_all_identity_factors(self):
        rng = np.random.default_rng(7)
        t = rng.normal(size=(2, 4, 3))
        out = multi_mode_multiply(t, [(n, np.eye(t.shape[n])) for n in range(3)])
        assert np.allclose(out, t, atol=1e-12)

    def test_duplicate_mode_rejected(self):
        t = np.ones((2, 2))
        with pytest.raises(ValueError):
            multi_mode_multiply(t, [(0, np.eye(2)), (0, np.eye(2))])


class TestKronChain:
    def test_single_matrix(self):
        m = np.array([[1.0, 2.0]])
        assert np.array_equal(kron_chain([m]), m)

    def test_identity_times_identity(self):
        assert np.array_equal(kron_chain([np.eye(2), np.eye(3)]), np.eye(6))

    def test_worked_example_and_oracle(self):
        a = np.array([[1.0, 2.0]])
        b = np.array([[3.0], [4.0]])
        got = kron_chain([a, b])
        assert got.tolist() == [[3.0, 6.0], [4.0, 8.0]]
        assert np.array_equal(got, naive_kron(a, b))

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            kron_chain([])


class TestFrobeniusSqDistance:
    def test_equal_tensors(self):
        t = np.arange(6.0).reshape(2, 3)
        assert frobenius_sq_distance(t, t) == 0.0

    def test_zeros_vs_one_two(self):
        a = np.zeros((1, 2))
        b = np.array([[1.0, 2.0]])
        assert frobenius_sq_distance(a, b) == 5.0

    def test_symmetric(self):
        rng = np.random.default_rng(8)
        a = rng.normal(size=(2, 2, 2))
        b = rng.normal(size=(2, 2, 2))
        assert frobenius_sq_distance(a, b) == frobenius_sq_distance(b, a)

    def test_dims_mismatch(self):
        with pytest.raises(ValueError):
            frobenius_sq_distance(np.ones((2, 2)), np.ones((2, 3)))


class TestConventionInvariants:
    def test_unfold_product_compatibility(self):
        rng = np.random.default_rng(9)
        for _ in range(40):
            order = int(rng.integers(1, 5))
            dims = tuple(int(rng.integers(1, 5)) for _ in range(order))
            t = rng.normal(size=dims)
            mode = int(rng.integers(0, order))
            u = rng.normal(size=(int(rng.integers(1, 5)), dims[mode]))
            left = unfold(mode_multiply(t, u, mode), mode)
            right = u @ unfold(t, mode)
            assert np.max(np.abs(left - right)) < 1e-12

    def test_full_kron_unfolding_identity(self):
        # documented order: remaining factors in ascending mode order
        rng = np.random.default_rng(10)
        for _ in range(40):
            order = int(rng.integers(2, 5))
            dims = tuple(int(rng.integers(1, 5)) for _ in range(order))
            t = rng.normal(size=dims)
            us = [rng.normal(size=(int(rng.integers(1, 4)), dims[n])) for n in range(order)]
            y = multi_mode_multiply(t, list(enumerate(us)))
            for mode in range(order):
                k = kron_chain([us[n] for n in range(order) if n != mode])
                right = us[mode] @ unfold(t, mode) @ k.T
                assert np.max(np.abs(unfold(y, mode) - right)) < 1e-12
