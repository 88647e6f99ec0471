"""Multilinear PCA: per-mode orthonormal projections maximizing total scatter.

The fit alternates mode-wise eigendecompositions of the projected scatter.
Working truncation widths are fixed once from the initialization spectra so
the alternation cannot oscillate; reported output widths are re-selected
from the final spectra. Order-1 input degenerates to ordinary PCA.
"""

from dataclasses import dataclass, field

import numpy as np

from .eigen import jacobi_eigh
from .errors import ConfigError
from .tensor_ops import as_tensor, mode_multiply_stack


@dataclass(frozen=True)
class EnergyPolicy:
    """Per-mode cumulative eigenvalue-energy threshold in (0, 1]."""

    q: float = 0.97
    min_dims: tuple | None = None

    def __post_init__(self):
        if not 0.0 < self.q <= 1.0:
            raise ValueError(f"energy threshold must be in (0, 1], got {self.q}")


@dataclass
class MpcaModel:
    input_dims: tuple
    output_dims: tuple
    factors: list  # per mode, (I_n, P_n) with orthonormal columns
    mean: np.ndarray
    mode_eigenvalues: list  # per mode, full length I_n, descending
    variance_order: np.ndarray  # permutation of range(prod(output_dims))
    captured_scatter: float
    psi_history: list = field(default_factory=list)

    @property
    def core_size(self) -> int:
        return int(np.prod(self.output_dims, dtype=np.int64))


# Eigenvalues this far below the mode's total energy count as exact zeros.
_ZERO_EIGVAL_REL = 1e-12


def select_mode_dims(eigvals, policy: EnergyPolicy, floor: int = 1) -> int:
    """Smallest P whose cumulative energy ratio reaches the policy threshold.

    A zero spectrum yields P = 1. At q == 1.0 trailing (numerically) zero
    eigenvalues are dropped, keeping only the rank.
    """
    ev = np.maximum(np.asarray(eigvals, dtype=np.float64), 0.0)
    if ev.size == 0:
        raise ValueError("empty eigenvalue list")
    total = float(ev.sum())
    if total <= 0.0:
        p = 1
    elif policy.q == 1.0:
        p = int(np.sum(ev > total * _ZERO_EIGVAL_REL))
        p = max(p, 1)
    else:
        ratios = np.cumsum(ev) / total
        p = int(np.searchsorted(ratios, policy.q, side="left")) + 1
        p = min(p, ev.size)
    p = max(p, min(floor, ev.size))
    return p


def _mode_scatter(centered: np.ndarray, mode: int) -> np.ndarray:
    """Sum over samples of the mode-n unfolding times its transpose."""
    flat = np.moveaxis(centered, mode + 1, 1).reshape(
        centered.shape[0], centered.shape[mode + 1], -1
    )
    return np.einsum("mij,mkj->ik", flat, flat)


def _project_stack(centered: np.ndarray, factors) -> np.ndarray:
    out = centered
    for n, v in enumerate(factors):
        out = mode_multiply_stack(out, v.T, n)
    return out


def _total_scatter(centered: np.ndarray, factors) -> float:
    cores = _project_stack(centered, factors)
    return float(np.sum(cores * cores))


def _floors(policy: EnergyPolicy, order: int) -> list:
    if policy.min_dims is None:
        return [1] * order
    if len(policy.min_dims) != order:
        raise ValueError("min_dims length does not match tensor order")
    return [int(f) for f in policy.min_dims]


def _widen_for_core_size(dims, eigenvalues, min_core_size: int) -> list:
    """Greedily widen modes, largest next eigenvalue first, to reach the size."""
    dims = list(dims)
    full = [len(ev) for ev in eigenvalues]
    while int(np.prod(dims, dtype=np.int64)) < min_core_size:
        best_mode = -1
        best_gain = -1.0
        for n, p in enumerate(dims):
            if p < full[n]:
                gain = float(eigenvalues[n][p])
                if gain > best_gain:
                    best_gain = gain
                    best_mode = n
        if best_mode < 0:
            raise ConfigError(
                f"cannot reach {min_core_size} core coordinates: "
                f"full dims give only {int(np.prod(full, dtype=np.int64))}"
            )
        dims[best_mode] += 1
    return dims


def fit_mpca(
    samples,
    policy: EnergyPolicy,
    max_iter: int = 10,
    tol: float = 1e-6,
    min_core_size: int = 1,
) -> MpcaModel:
    """Fit per-mode projections to a list of same-shaped tensors.

    Parameters
    ----------
    samples : sequence of arrays sharing one shape, at least two of them.
    policy : energy threshold used to pick each mode's output width.
    max_iter : alternation sweeps after initialization.
    tol : stop when the relative change of the captured scatter drops below.
    min_core_size : widen mode dims until the core has at least this many
        coordinates (error if impossible at full dims).
    """
    stack = np.stack([as_tensor(s) for s in samples])
    if stack.shape[0] < 2:
        raise ValueError("need at least 2 samples")
    order = stack.ndim - 1
    mean = stack.mean(axis=0)
    centered = stack - mean
    floors = _floors(policy, order)

    eigenvalues = []
    bases = []
    for n in range(order):
        w, v = jacobi_eigh(_mode_scatter(centered, n))
        eigenvalues.append(w)
        bases.append(v)
    working = [select_mode_dims(eigenvalues[n], policy, floors[n]) for n in range(order)]

    truncated = [bases[n][:, : working[n]] for n in range(order)]
    psi_history = [_total_scatter(centered, truncated)]

    if order > 1:
        for _ in range(max_iter):
            for n in range(order):
                partial = centered
                for k in range(order):
                    if k != n:
                        partial = mode_multiply_stack(partial, truncated[k].T, k)
                w, v = jacobi_eigh(_mode_scatter(partial, n))
                eigenvalues[n] = w
                bases[n] = v
                truncated[n] = v[:, : working[n]]
            psi = _total_scatter(centered, truncated)
            psi_history.append(psi)
            prev = psi_history[-2]
            if abs(psi - prev) <= tol * max(prev, 1e-300):
                break

    dims = [select_mode_dims(eigenvalues[n], policy, floors[n]) for n in range(order)]
    dims = _widen_for_core_size(dims, eigenvalues, min_core_size)
    factors = [bases[n][:, : dims[n]].copy() for n in range(order)]

    model = MpcaModel(
        input_dims=tuple(stack.shape[1:]),
        output_dims=tuple(dims),
        factors=factors,
        mean=mean,
        mode_eigenvalues=[ev.copy() for ev in eigenvalues],
        variance_order=np.arange(int(np.prod(dims, dtype=np.int64)), dtype=np.int64),
        captured_scatter=_total_scatter(centered, factors),
        psi_history=psi_history,
    )
    return model


def project(model: MpcaModel, t: np.ndarray) -> np.ndarray:
    """Center and project one tensor to its core of shape ``output_dims``."""
    t = as_tensor(t)
    if t.shape != model.input_dims:
        raise ValueError(f"expected dims {model.input_dims}, got {t.shape}")
    return _project_stack((t - model.mean)[None, ...], model.factors)[0]


def project_batch(model: MpcaModel, stack: np.ndarray) -> np.ndarray:
    """Project a stacked batch (axis 0) of tensors; returns stacked cores."""
    stack = np.asarray(stack, dtype=np.float64)
    if stack.shape[1:] != model.input_dims:
        raise ValueError(f"expected dims {model.input_dims}, got {stack.shape[1:]}")
    return _project_stack(stack - model.mean, model.factors)


def compute_variance_order(model: MpcaModel, samples) -> np.ndarray:
    """Order core coordinates by descending variance over the given samples.

    Ties break toward the lower linear (row-major) index. The permutation is
    stored on the model and returned.
    """
    stack = np.stack([as_tensor(s) for s in samples])
    if stack.shape[0] == 0:
        raise ValueError("need at least one sample")
    cores = project_batch(model, stack).reshape(stack.shape[0], -1)
    variances = np.mean((cores - cores.mean(axis=0)) ** 2, axis=0)
    order = np.argsort(-variances, kind="stable").astype(np.int64)
    model.variance_order = order
    return order


def vectorize_core(model: MpcaModel, core: np.ndarray) -> np.ndarray:
    """Flatten a core tensor in the model's variance order."""
    core = as_tensor(core)
    if core.shape != model.output_dims:
        raise ValueError(f"expected core dims {model.output_dims}, got {core.shape}")
    if model.variance_order is None or len(model.variance_order) != model.core_size:
        raise ValueError("variance order not populated for this model")
    return core.ravel()[model.variance_order]
