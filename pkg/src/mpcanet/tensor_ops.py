"""Dense tensor algebra: unfolding, mode products, Kronecker chains.

Tensors are plain ``numpy.ndarray`` values in float64, stored row-major
(C order, last mode varies fastest). Modes are 0-based axis indices.

Convention pinned here and relied on everywhere else: ``unfold(t, n)`` puts
mode ``n`` on the rows and flattens the remaining modes in ascending mode
order, row-major. Under this convention

    unfold(mode_multiply(t, u, n), n) == u @ unfold(t, n)

and, for a full multilinear product ``y = t x_0 u_0 x_1 u_1 ...``,

    unfold(y, n) == u_n @ unfold(t, n) @ kron_chain(others ascending).T
"""

import numpy as np


def as_tensor(values) -> np.ndarray:
    """Coerce to a float64 tensor of order >= 1 with every extent >= 1."""
    t = np.asarray(values, dtype=np.float64)
    if t.ndim == 0:
        raise ValueError("tensor order must be >= 1")
    if any(e < 1 for e in t.shape):
        raise ValueError(f"every extent must be >= 1, got shape {t.shape}")
    return t


def _check_mode(t: np.ndarray, mode: int) -> None:
    if not 0 <= mode < t.ndim:
        raise ValueError(f"mode {mode} out of range for order-{t.ndim} tensor")


def unfold(t: np.ndarray, mode: int) -> np.ndarray:
    """Mode-n matricization: rows index mode ``mode``, columns the rest."""
    t = as_tensor(t)
    _check_mode(t, mode)
    return np.moveaxis(t, mode, 0).reshape(t.shape[mode], -1)


def fold(m: np.ndarray, mode: int, dims) -> np.ndarray:
    """Inverse of :func:`unfold` for a tensor of the given dims."""
    dims = tuple(int(d) for d in dims)
    m = np.asarray(m, dtype=np.float64)
    lead = dims[mode]
    rest = dims[:mode] + dims[mode + 1 :]
    if m.shape != (lead, int(np.prod(rest, dtype=np.int64)) if rest else 1):
        raise ValueError(f"matrix shape {m.shape} does not fold into dims {dims}")
    return np.moveaxis(m.reshape((lead,) + rest), 0, mode)


def mode_multiply(t: np.ndarray, u: np.ndarray, mode: int) -> np.ndarray:
    """Multiply tensor ``t`` by matrix ``u`` along ``mode``.

    ``u`` has shape (rows, t.shape[mode]); the result replaces that extent
    with ``rows``.
    """
    t = as_tensor(t)
    _check_mode(t, mode)
    u = np.asarray(u, dtype=np.float64)
    if u.ndim != 2:
        raise ValueError("factor must be a matrix")
    if u.shape[1] != t.shape[mode]:
        raise ValueError(
            f"factor has {u.shape[1]} columns but mode {mode} has extent {t.shape[mode]}"
        )
    dims = list(t.shape)
    dims[mode] = u.shape[0]
    return fold(u @ unfold(t, mode), mode, dims)


def multi_mode_multiply(t: np.ndarray, factors) -> np.ndarray:
    """Apply ``(mode, matrix)`` factors sequentially; modes must be distinct.

    The result is independent of application order, so factors are applied
    in the order given.
    """
    t = as_tensor(t)
    seen = set()
    for mode, _ in factors:
        if mode in seen:
            raise ValueError(f"duplicate mode {mode} in multi-mode product")
        seen.add(mode)
    out = t
    for mode, u in factors:
        out = mode_multiply(out, u, mode)
    return out


def kron_chain(ms) -> np.ndarray:
    """Kronecker product of a nonempty list of matrices, left to right."""
    ms = list(ms)
    if not ms:
        raise ValueError("kron_chain needs at least one matrix")
    out = np.asarray(ms[0], dtype=np.float64)
    for m in ms[1:]:
        out = np.kron(out, np.asarray(m, dtype=np.float64))
    return out


def frobenius_sq_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Sum of squared entrywise differences."""
    a = as_tensor(a)
    b = as_tensor(b)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    d = a - b
    return float(np.sum(d * d))


def mode_multiply_stack(stack: np.ndarray, u: np.ndarray, mode: int) -> np.ndarray:
    """Mode-multiply every tensor in a stacked batch (axis 0 is the batch)."""
    out = np.tensordot(stack, u, axes=([mode + 1], [1]))
    return np.moveaxis(out, -1, mode + 1)
