"""Tensor files, dataset manifests, deterministic splits, synthetic data.

Tensor file layout (all little-endian): magic ``TOBJ``, version u8, order u8,
one u32 extent per mode, then the float64 payload row-major. A dataset
manifest is JSON: ``{"dims": [...]?, "entries": [{"path", "label"}, ...]}``
with paths resolved relative to the manifest's directory.
"""

import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataError, TensorFormatError
from .rng import Xoshiro256PlusPlus
from .tensor_ops import as_tensor, mode_multiply

TENSOR_MAGIC = b"TOBJ"
TENSOR_VERSION = 1
_U32_MAX = 2**32 - 1


def write_tensor(path, t: np.ndarray) -> None:
    t = as_tensor(t)
    if t.ndim > 255:
        raise TensorFormatError(f"order {t.ndim} exceeds the format limit")
    if any(e > _U32_MAX for e in t.shape):
        raise TensorFormatError(f"extent overflow in shape {t.shape}")
    with open(path, "wb") as fh:
        fh.write(TENSOR_MAGIC)
        fh.write(struct.pack("<BB", TENSOR_VERSION, t.ndim))
        fh.write(struct.pack(f"<{t.ndim}I", *t.shape))
        fh.write(np.ascontiguousarray(t, dtype="<f8").tobytes())


def read_tensor(path) -> np.ndarray:
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise DataError(f"cannot read tensor file {path}: {exc}") from exc
    if len(raw) < 6:
        raise TensorFormatError(f"{path}: truncated header")
    if raw[:4] != TENSOR_MAGIC:
        raise TensorFormatError(f"{path}: bad magic {raw[:4]!r}")
    version, order = struct.unpack_from("<BB", raw, 4)
    if version != TENSOR_VERSION:
        raise TensorFormatError(f"{path}: unsupported version {version}")
    if order < 1:
        raise TensorFormatError(f"{path}: tensor order must be >= 1")
    header_end = 6 + 4 * order
    if len(raw) < header_end:
        raise TensorFormatError(f"{path}: truncated extents")
    extents = struct.unpack_from(f"<{order}I", raw, 6)
    if any(e < 1 for e in extents):
        raise TensorFormatError(f"{path}: zero extent")
    count = 1
    for e in extents:
        count *= e
    if len(raw) != header_end + 8 * count:
        raise TensorFormatError(
            f"{path}: payload is {len(raw) - header_end} bytes, expected {8 * count}"
        )
    data = np.frombuffer(raw, dtype="<f8", count=count, offset=header_end)
    return data.astype(np.float64).reshape(extents)


@dataclass
class Dataset:
    tensors: list
    labels: np.ndarray  # (samples,) indices into label_names
    label_names: list
    dims: tuple | None

    def __len__(self) -> int:
        return len(self.tensors)

    def subset(self, indices) -> "Dataset":
        idx = [int(i) for i in indices]
        return Dataset(
            tensors=[self.tensors[i] for i in idx],
            labels=self.labels[idx],
            label_names=list(self.label_names),
            dims=self.dims,
        )


def load_dataset(manifest_path) -> Dataset:
    """Load a manifest and its tensors; labels intern in first-appearance order."""
    manifest_path = Path(manifest_path)
    try:
        doc = json.loads(manifest_path.read_text())
    except OSError as exc:
        raise DataError(f"cannot read manifest {manifest_path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise DataError(f"manifest {manifest_path} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or "entries" not in doc:
        raise DataError(f"manifest {manifest_path} lacks an 'entries' list")

    dims = tuple(int(d) for d in doc["dims"]) if doc.get("dims") else None
    base = manifest_path.parent
    tensors = []
    names = []
    indices = []
    for entry in doc["entries"]:
        if not isinstance(entry, dict) or "path" not in entry or "label" not in entry:
            raise DataError(f"manifest {manifest_path}: entry needs 'path' and 'label'")
        path = base / entry["path"]
        t = read_tensor(path)
        expected = dims if dims is not None else (tensors[0].shape if tensors else None)
        if expected is not None and t.shape != expected:
            raise DataError(
                f"{path}: dims {tuple(t.shape)} do not match expected {tuple(expected)}"
            )
        label = str(entry["label"])
        if label not in names:
            names.append(label)
        tensors.append(t)
        indices.append(names.index(label))

    if dims is None and tensors:
        dims = tuple(tensors[0].shape)
    return Dataset(
        tensors=tensors,
        labels=np.asarray(indices, dtype=np.int64),
        label_names=names,
        dims=dims,
    )


def split_dataset(ds: Dataset, ratio: float, seed: int):
    """Stratified train/test split, reproducible from (dataset order, ratio, seed).

    Per class the train count is ratio * count rounded to nearest; exact .5
    ties alternate, ceiling first, in class-index order. Counts are clamped
    so both sides of every class stay nonempty. Returns sorted index arrays.
    """
    if not 0.0 < ratio < 1.0:
        raise ValueError("ratio must be in (0, 1)")
    counts = np.bincount(ds.labels, minlength=len(ds.label_names))
    if len(ds) == 0 or counts.min() < 2:
        raise DataError("every class needs at least 2 samples to split")

    rng = Xoshiro256PlusPlus(seed)
    take_ceil = True
    train, test = [], []
    for k in range(len(ds.label_names)):
        members = [int(i) for i in np.flatnonzero(ds.labels == k)]
        rng.shuffle(members)
        target = ratio * len(members)
        frac = target - np.floor(target)
        if frac == 0.5:
            n_train = int(np.ceil(target)) if take_ceil else int(np.floor(target))
            take_ceil = not take_ceil
        else:
            n_train = int(np.floor(target + 0.5))
        n_train = min(max(n_train, 1), len(members) - 1)
        train.extend(members[:n_train])
        test.extend(members[n_train:])
    return np.asarray(sorted(train), dtype=np.int64), np.asarray(sorted(test), dtype=np.int64)


@dataclass(frozen=True)
class SynthSpec:
    dims: tuple
    num_classes: int
    samples_per_class: int
    template_rank: tuple  # per-mode core extents
    noise_sigma: float
    seed: int

    def __post_init__(self):
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        ranks = self.template_rank
        if isinstance(ranks, int):
            ranks = (ranks,) * len(self.dims)
        object.__setattr__(self, "template_rank", tuple(int(r) for r in ranks))
        if len(self.template_rank) != len(self.dims):
            raise ValueError("template rank must give one extent per mode")
        if any(r < 1 or r > d for r, d in zip(self.template_rank, self.dims)):
            raise ValueError("template rank must satisfy 1 <= rank <= extent")
        if self.num_classes < 1 or self.samples_per_class < 1:
            raise ValueError("need at least one class and one sample per class")
        if self.noise_sigma < 0:
            raise ValueError("noise sigma must be >= 0")


def _gaussian_array(rng: Xoshiro256PlusPlus, shape) -> np.ndarray:
    flat = np.array(rng.gaussians(int(np.prod(shape, dtype=np.int64))))
    return flat.reshape(shape)


def _orthonormal_columns(rng: Xoshiro256PlusPlus, rows: int, cols: int) -> np.ndarray:
    """Gaussian matrix orthonormalized by modified Gram-Schmidt."""
    m = _gaussian_array(rng, (rows, cols))
    for j in range(cols):
        v = m[:, j]
        for i in range(j):
            v -= (m[:, i] @ v) * m[:, i]
        norm = np.linalg.norm(v)
        if norm < 1e-12:
            raise ValueError("degenerate random draw while orthonormalizing")
        m[:, j] = v / norm
    return m


def synth_generate(spec: SynthSpec) -> Dataset:
    """Class templates are random low-rank tensors; samples add Gaussian noise.

    Everything is drawn from one seeded stream in a fixed order (per class:
    mode factors, then the core, then per-sample noise), so the dataset is a
    pure function of the spec.
    """
    rng = Xoshiro256PlusPlus(spec.seed)
    tensors = []
    labels = []
    for c in range(spec.num_classes):
        factors = [
            _orthonormal_columns(rng, d, r) for d, r in zip(spec.dims, spec.template_rank)
        ]
        core = _gaussian_array(rng, spec.template_rank)
        template = core
        for n, f in enumerate(factors):
            template = mode_multiply(template, f, n)
        for _ in range(spec.samples_per_class):
            noise = _gaussian_array(rng, spec.dims) * spec.noise_sigma
            tensors.append(template + noise)
            labels.append(c)
    return Dataset(
        tensors=tensors,
        labels=np.asarray(labels, dtype=np.int64),
        label_names=[f"class{c}" for c in range(spec.num_classes)],
        dims=spec.dims,
    )


def write_dataset(ds: Dataset, out_dir) -> Path:
    """Write one tensor file per sample plus a manifest; returns its path."""
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise DataError(f"cannot create output directory {out_dir}: {exc}") from exc

    entries = []
    per_class = {}
    for t, label_idx in zip(ds.tensors, ds.labels):
        name = ds.label_names[int(label_idx)]
        k = per_class.get(name, 0)
        per_class[name] = k + 1
        filename = f"{name}_{k:03d}.tobj"
        write_tensor(out_dir / filename, t)
        entries.append({"path": filename, "label": name})

    manifest = {"entries": entries}
    if ds.dims is not None:
        manifest["dims"] = list(ds.dims)
    manifest_path = out_dir / "manifest.json"
    manifest_path.write_text(json.dumps(manifest, indent=2) + "\n")
    return manifest_path
