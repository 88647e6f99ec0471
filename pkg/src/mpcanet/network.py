"""Convolutional feature pipeline built on multilinear PCA dictionaries.

Each encoder layer learns per-mode projections from sliding patches, emits
one feature map per kept coefficient, and the final stage is hashed into
overlapping block histograms: binarize at zero, combine the L binary maps
into one integer map with powers of two, then count values per box.

Architectures: ``mpcanet1`` (one tensor layer), ``mpcanet2-vector`` (tensor
then flattened-patch layer), ``mpcanet2-cuboid`` (two tensor layers), and
``pcanet1``/``pcanet2`` (flattened-patch layers throughout). For two-stage
networks the second stage re-encodes every first-stage map; its L2 children
are weighted per parent, giving ``2^L2 * boxes * L1`` features.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import ConfigError, ZeroVarianceError
from .mpca import EnergyPolicy, MpcaModel, compute_variance_order, fit_mpca, project_batch
from .patches import PatchGeometry, extract_patches
from .tensor_ops import as_tensor

ARCHITECTURES = ("mpcanet1", "mpcanet2-vector", "mpcanet2-cuboid", "pcanet1", "pcanet2")

ARCHITECTURE_KINDS = {
    "mpcanet1": ("tensor-mpca",),
    "mpcanet2-vector": ("tensor-mpca", "vector-pca"),
    "mpcanet2-cuboid": ("tensor-mpca", "tensor-mpca"),
    "pcanet1": ("vector-pca",),
    "pcanet2": ("vector-pca", "vector-pca"),
}

DICTIONARY_KINDS = ("tensor-mpca", "vector-pca")


@dataclass(frozen=True)
class LayerConfig:
    geometry: PatchGeometry
    filters: int  # encoders per layer (L)
    dictionary_kind: str = "tensor-mpca"
    energy: EnergyPolicy = field(default_factory=EnergyPolicy)

    def __post_init__(self):
        if self.filters < 1:
            raise ValueError("filters must be >= 1")
        if self.dictionary_kind not in DICTIONARY_KINDS:
            raise ValueError(f"dictionary kind must be one of {DICTIONARY_KINDS}")


@dataclass
class LayerDictionary:
    config: LayerConfig
    model: MpcaModel
    mean_patch: np.ndarray  # patch-shaped ensemble mean


@dataclass(frozen=True)
class PoolingConfig:
    box_dims: tuple
    overlap_ratio: float
    normalized: bool = False

    def __post_init__(self):
        object.__setattr__(self, "box_dims", tuple(int(b) for b in self.box_dims))
        if any(b < 1 for b in self.box_dims):
            raise ValueError("box extents must be >= 1")
        if not 0.0 <= self.overlap_ratio < 1.0:
            raise ValueError("overlap ratio must be in [0, 1)")

    @property
    def strides(self) -> tuple:
        # round half up so the stride is reproducible across platforms
        return tuple(
            max(1, int(math.floor(b * (1.0 - self.overlap_ratio) + 0.5)))
            for b in self.box_dims
        )


@dataclass
class Network:
    architecture: str
    layers: list
    pooling: PoolingConfig
    input_dims: tuple

    @property
    def feature_dim(self) -> int:
        plan = plan_geometry(
            self.input_dims, [layer.config for layer in self.layers], self.pooling
        )
        return plan.feature_dim


@dataclass
class GeometryPlan:
    """Shape bookkeeping derived from configs alone, no training needed."""

    map_dims: list  # per stage, the squeezed feature-map dims
    anchors: list  # per pooled mode, box anchor offsets
    box_count: int
    feature_dim: int


def box_anchors(extent: int, box: int, stride: int) -> list:
    """Anchor offsets: stride multiples plus a final anchor clamped to the
    boundary so the last box always touches it; duplicates removed."""
    if box > extent:
        raise ValueError(f"box extent {box} exceeds map extent {extent}")
    last = extent - box
    anchors = list(range(0, last + 1, stride))
    if anchors[-1] != last:
        anchors.append(last)
    return anchors


def plan_geometry(input_dims, layer_configs, pooling: PoolingConfig) -> GeometryPlan:
    """Validate layer/pooling geometry against the input dims and derive the
    pooled feature length without touching any data."""
    if not layer_configs:
        raise ConfigError("at least one layer is required")
    dims = tuple(int(d) for d in input_dims)
    map_dims = []
    for level, cfg in enumerate(layer_configs):
        try:
            dims = cfg.geometry.grid_dims(dims)
        except ValueError as exc:
            raise ConfigError(f"layer {level + 1}: {exc}") from exc
        map_dims.append(dims)

    last = map_dims[-1]
    if len(pooling.box_dims) != len(last):
        raise ConfigError(
            f"pooling box has {len(pooling.box_dims)} modes but the final "
            f"feature map has {len(last)}"
        )
    anchors = []
    for extent, box, stride in zip(last, pooling.box_dims, pooling.strides):
        try:
            anchors.append(box_anchors(extent, box, stride))
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    box_count = int(np.prod([len(a) for a in anchors], dtype=np.int64))
    feature_dim = (2 ** layer_configs[-1].filters) * box_count
    for cfg in layer_configs[:-1]:
        feature_dim *= cfg.filters
    return GeometryPlan(
        map_dims=map_dims, anchors=anchors, box_count=box_count, feature_dim=feature_dim
    )


_ZERO_VARIANCE_REL = 1e-24


def learn_layer_dictionary(inputs, cfg: LayerConfig) -> LayerDictionary:
    """Learn one layer's projection dictionary from all patches of all inputs.

    Patches are pooled across inputs, centered by their ensemble mean, and
    fitted with MPCA (on patch tensors, or on flattened patches for the
    vector kind). The fit is widened as needed so at least ``filters`` core
    coordinates exist.
    """
    tensors = [as_tensor(t) for t in inputs]
    if not tensors:
        raise ValueError("no inputs to learn from")
    patch_blocks = [extract_patches(t, cfg.geometry).patches for t in tensors]
    patches = np.concatenate(patch_blocks, axis=0)

    centered = patches - patches.mean(axis=0)
    total_sq = float(np.sum(centered * centered))
    scale = float(np.sum(patches * patches))
    if total_sq <= max(scale, 1.0) * _ZERO_VARIANCE_REL:
        raise ZeroVarianceError(
            "training patches carry no variance; cannot learn a dictionary"
        )

    if cfg.dictionary_kind == "vector-pca":
        fit_samples = patches.reshape(patches.shape[0], -1)
    else:
        fit_samples = patches
    model = fit_mpca(fit_samples, cfg.energy, min_core_size=cfg.filters)
    compute_variance_order(model, fit_samples)
    mean_patch = model.mean.reshape(cfg.geometry.patch_dims).copy()
    return LayerDictionary(config=cfg, model=model, mean_patch=mean_patch)


def encode_layer(t: np.ndarray, d: LayerDictionary) -> list:
    """Encode one tensor into the layer's L feature maps.

    At each window position the centered patch is projected, vectorized in
    variance order, and truncated to the first L coefficients; coefficient l
    over all positions forms map l, shaped like the squeezed position grid.
    """
    ps = extract_patches(t, d.config.geometry)
    if d.config.dictionary_kind == "vector-pca":
        flat = ps.patches.reshape(ps.patches.shape[0], -1)
        cores = project_batch(d.model, flat)
    else:
        cores = project_batch(d.model, ps.patches)
    flat_cores = cores.reshape(cores.shape[0], -1)
    kept = flat_cores[:, d.model.variance_order[: d.config.filters]]
    return [kept[:, l].reshape(ps.grid_dims) for l in range(d.config.filters)]


def binarize(feature_map: np.ndarray) -> np.ndarray:
    """Heaviside step: strictly positive entries become 1, the rest 0."""
    m = np.asarray(feature_map, dtype=np.float64)
    return np.where(m > 0.0, 1.0, 0.0)


def weight_maps(binary_maps) -> np.ndarray:
    """Combine L binary maps into one integer map, map l weighted 2^(l-1)."""
    maps = [np.asarray(m, dtype=np.float64) for m in binary_maps]
    if not maps:
        raise ValueError("need at least one map")
    shape = maps[0].shape
    out = np.zeros(shape, dtype=np.float64)
    for l, m in enumerate(maps):
        if m.shape != shape:
            raise ValueError("maps must share dims")
        if not np.all((m == 0.0) | (m == 1.0)):
            raise ValueError("maps must be binary")
        out += (2.0**l) * m
    return out


def pool_histograms(decimal_map: np.ndarray, pooling: PoolingConfig, filters: int) -> np.ndarray:
    """Concatenated per-box histograms of an integer-valued map.

    Boxes are anchored at stride multiples (plus a clamped final anchor per
    mode) and enumerated in row-major anchor order; each contributes a
    2^filters-bin count histogram, normalized to relative frequencies when
    the pooling config says so.
    """
    m = as_tensor(decimal_map)
    if len(pooling.box_dims) != m.ndim:
        raise ValueError(
            f"pooling box has {len(pooling.box_dims)} modes, map has {m.ndim}"
        )
    bins = 2**filters
    if not np.all(m == np.floor(m)):
        raise ValueError("decimal map entries must be integers")
    if m.min() < 0 or m.max() > bins - 1:
        raise ValueError(f"decimal map entries must lie in [0, {bins - 1}]")

    anchors = [
        box_anchors(extent, box, stride)
        for extent, box, stride in zip(m.shape, pooling.box_dims, pooling.strides)
    ]
    windows = sliding_window_view(m, pooling.box_dims)
    boxes = windows[np.ix_(*anchors)].reshape(-1, int(np.prod(pooling.box_dims)))

    values = boxes.astype(np.int64)
    box_index = np.repeat(np.arange(boxes.shape[0]), boxes.shape[1])
    counts = np.bincount(
        box_index * bins + values.ravel(), minlength=boxes.shape[0] * bins
    ).astype(np.float64)
    if pooling.normalized:
        counts /= float(np.prod(pooling.box_dims))
    return counts


def _layer_configs_for(architecture: str, layer_configs) -> list:
    if architecture not in ARCHITECTURES:
        raise ConfigError(f"unknown architecture {architecture!r}")
    kinds = ARCHITECTURE_KINDS[architecture]
    if len(layer_configs) != len(kinds):
        raise ConfigError(
            f"{architecture} needs {len(kinds)} layer configs, got {len(layer_configs)}"
        )
    for level, (cfg, kind) in enumerate(zip(layer_configs, kinds)):
        if cfg.dictionary_kind != kind:
            raise ConfigError(
                f"layer {level + 1} of {architecture} must use {kind}, "
                f"got {cfg.dictionary_kind}"
            )
    return list(layer_configs)


def train_network(samples, architecture: str, layer_configs, pooling: PoolingConfig) -> Network:
    """Learn every stage's dictionary and assemble an immutable network.

    The first stage learns from the raw tensors; a second stage learns from
    every first-stage feature map of every training sample.
    """
    tensors = [as_tensor(t) for t in samples]
    if not tensors:
        raise ValueError("empty training set")
    configs = _layer_configs_for(architecture, layer_configs)
    input_dims = tensors[0].shape
    for t in tensors:
        if t.shape != input_dims:
            raise ValueError("training tensors must share dims")
    plan_geometry(input_dims, configs, pooling)

    layers = [learn_layer_dictionary(tensors, configs[0])]
    if len(configs) == 2:
        stage1_maps = []
        for t in tensors:
            stage1_maps.extend(encode_layer(t, layers[0]))
        layers.append(learn_layer_dictionary(stage1_maps, configs[1]))
    return Network(
        architecture=architecture,
        layers=layers,
        pooling=pooling,
        input_dims=tuple(input_dims),
    )


def forward(net: Network, t: np.ndarray) -> np.ndarray:
    """Map one tensor to its pooled feature vector."""
    t = as_tensor(t)
    if t.shape != net.input_dims:
        raise ValueError(f"expected dims {net.input_dims}, got {t.shape}")
    first = net.layers[0]
    maps = encode_layer(t, first)
    if len(net.layers) == 1:
        decimal = weight_maps([binarize(m) for m in maps])
        return pool_histograms(decimal, net.pooling, first.config.filters)

    second = net.layers[1]
    parts = []
    for parent_map in maps:
        children = encode_layer(parent_map, second)
        decimal = weight_maps([binarize(c) for c in children])
        parts.append(pool_histograms(decimal, net.pooling, second.config.filters))
    return np.concatenate(parts)
