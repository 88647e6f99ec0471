"""Cyclic Jacobi eigensolver for small symmetric matrices.

Self-contained so that dictionary fits are reproducible bit-for-bit across
runs: rotation order is fixed (row-cyclic), eigenvalues are returned in
descending order, and every eigenvector column is sign-canonicalized so that
its first largest-magnitude entry is positive.
"""

import numpy as np


def canonical_signs(vectors: np.ndarray) -> np.ndarray:
    """Flip columns so the first entry of largest magnitude is positive."""
    v = np.array(vectors, dtype=np.float64)
    for j in range(v.shape[1]):
        col = v[:, j]
        lead = int(np.argmax(np.abs(col)))
        if col[lead] < 0:
            v[:, j] = -col
    return v


def jacobi_eigh(a: np.ndarray, tol: float = 1e-14, max_sweeps: int = 60):
    """Eigendecomposition of a symmetric matrix via cyclic Jacobi rotations.

    Returns ``(eigenvalues, eigenvectors)`` with eigenvalues descending and
    eigenvectors as columns. Convergence: the off-diagonal Frobenius mass
    drops below ``tol`` relative to the matrix norm, or ``max_sweeps`` pass.
    """
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("matrix must be square")
    n = a.shape[0]
    a = (a + a.T) / 2.0
    v = np.eye(n)
    if n == 1:
        return a.diagonal().copy(), v

    norm = np.sqrt(np.sum(a * a))
    thresh = tol * max(norm, 1.0)
    off_mask = ~np.eye(n, dtype=bool)
    for _ in range(max_sweeps):
        # summed directly over off-diagonal entries; a subtraction of the
        # diagonal mass from the total cancels catastrophically near zero
        off = np.sqrt(np.sum(a[off_mask] ** 2))
        if off <= thresh:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= thresh / n:
                    continue
                # stable rotation angle (Golub & Van Loan)
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                if theta >= 0:
                    t = 1.0 / (theta + np.sqrt(theta * theta + 1.0))
                else:
                    t = -1.0 / (-theta + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c

                col_p = a[:, p].copy()
                col_q = a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                row_p = a[p, :].copy()
                row_q = a[q, :].copy()
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                a[p, q] = 0.0
                a[q, p] = 0.0

                vp = v[:, p].copy()
                v[:, p] = c * vp - s * v[:, q]
                v[:, q] = s * vp + c * v[:, q]

    eigvals = a.diagonal().copy()
    order = np.argsort(-eigvals, kind="stable")
    return eigvals[order], canonical_signs(v[:, order])
