"""Sliding tensor-patch extraction with explicit boundary policy.

A window slides with stride 1 along the chosen modes; every other mode must
be consumed whole (window extent equals the tensor extent there) and is
squeezed out of the position grid. ``same`` padding zero-pads each slid mode
by floor(k/2) leading and k-1-floor(k/2) trailing entries so the grid keeps
the source extent; ``valid`` keeps only fully interior windows.
"""

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .tensor_ops import as_tensor

PADDINGS = ("same", "valid")


@dataclass(frozen=True)
class PatchGeometry:
    patch_dims: tuple
    slide_modes: tuple
    padding: str = "same"

    def __post_init__(self):
        object.__setattr__(self, "patch_dims", tuple(int(k) for k in self.patch_dims))
        object.__setattr__(self, "slide_modes", tuple(int(m) for m in self.slide_modes))
        if any(k < 1 for k in self.patch_dims):
            raise ValueError("patch extents must be >= 1")
        if self.padding not in PADDINGS:
            raise ValueError(f"padding must be one of {PADDINGS}")
        order = len(self.patch_dims)
        if len(set(self.slide_modes)) != len(self.slide_modes):
            raise ValueError("slide modes must be distinct")
        if any(not 0 <= m < order for m in self.slide_modes):
            raise ValueError("slide mode out of range")

    def validate_source(self, source_dims) -> None:
        source_dims = tuple(source_dims)
        if len(source_dims) != len(self.patch_dims):
            raise ValueError(
                f"patch order {len(self.patch_dims)} does not match "
                f"tensor order {len(source_dims)}"
            )
        for n, (k, i) in enumerate(zip(self.patch_dims, source_dims)):
            if k > i:
                raise ValueError(f"patch extent {k} exceeds mode-{n} extent {i}")
            if n not in self.slide_modes and k != i:
                raise ValueError(
                    f"mode {n} does not slide, so its patch extent {k} "
                    f"must equal the tensor extent {i}"
                )

    def grid_dims(self, source_dims) -> tuple:
        """Window positions per slid mode, in mode order."""
        self.validate_source(source_dims)
        out = []
        for n in sorted(self.slide_modes):
            if self.padding == "same":
                out.append(int(source_dims[n]))
            else:
                out.append(int(source_dims[n]) - self.patch_dims[n] + 1)
        return tuple(out)


@dataclass
class PatchSet:
    patches: np.ndarray  # (count, *patch_dims), row-major position order
    grid_dims: tuple
    source_dims: tuple


def extract_patches(t: np.ndarray, geometry: PatchGeometry) -> PatchSet:
    """Collect every window position of the tensor as a stacked patch array."""
    t = as_tensor(t)
    geometry.validate_source(t.shape)
    source_dims = tuple(t.shape)
    grid = geometry.grid_dims(source_dims)

    if geometry.padding == "same":
        widths = []
        for n, k in enumerate(geometry.patch_dims):
            if n in geometry.slide_modes:
                lead = k // 2
                widths.append((lead, k - 1 - lead))
            else:
                widths.append((0, 0))
        t = np.pad(t, widths)

    windows = sliding_window_view(t, geometry.patch_dims)
    patches = windows.reshape((-1,) + geometry.patch_dims).copy()
    return PatchSet(patches=patches, grid_dims=grid, source_dims=source_dims)


def center_patches(ps: PatchSet, mean: np.ndarray | None = None):
    """Subtract the given mean patch, or the ensemble mean; returns both."""
    if ps.patches.shape[0] == 0:
        raise ValueError("empty patch set")
    if mean is None:
        mean = ps.patches.mean(axis=0)
    else:
        mean = as_tensor(mean)
        if mean.shape != ps.patches.shape[1:]:
            raise ValueError(
                f"mean dims {mean.shape} do not match patch dims {ps.patches.shape[1:]}"
            )
    centered = PatchSet(
        patches=ps.patches - mean,
        grid_dims=ps.grid_dims,
        source_dims=ps.source_dims,
    )
    return centered, mean
