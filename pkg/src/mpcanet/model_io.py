"""Binary container for trained networks and their classifier.

Layout (all integers little-endian fixed width, reals float64 little-endian):
magic ``MPCM``, version u8, architecture string, input dims, then per layer
the patch geometry, encoder count, dictionary kind, mean patch, projection
model (factors, full eigenvalue spectra, variance order, captured scatter),
then the pooling config and an optional ``CLSF`` classifier section. The
writer is canonical, so save -> load -> save round-trips bitwise.
"""

import io
import struct

import numpy as np

from .classify import LinearModel, NearestNeighborModel
from .errors import ModelFormatError
from .mpca import EnergyPolicy, MpcaModel
from .network import ARCHITECTURES, LayerConfig, LayerDictionary, Network, PoolingConfig
from .patches import PADDINGS, PatchGeometry

MODEL_MAGIC = b"MPCM"
MODEL_VERSION = 1
CLASSIFIER_MAGIC = b"CLSF"

_KIND_CODES = {"tensor-mpca": 0, "vector-pca": 1}
_KIND_NAMES = {v: k for k, v in _KIND_CODES.items()}
_CLS_CODES = {"ridge": 0, "nn1": 1}
_CLS_NAMES = {v: k for k, v in _CLS_CODES.items()}


def _w(fh, fmt, *values):
    fh.write(struct.pack("<" + fmt, *values))


def _w_string(fh, s: str):
    raw = s.encode("utf-8")
    _w(fh, "I", len(raw))
    fh.write(raw)


def _w_f64_array(fh, arr):
    arr = np.ascontiguousarray(arr, dtype="<f8")
    fh.write(arr.tobytes())


def _w_tensor(fh, t):
    t = np.asarray(t, dtype=np.float64)
    _w(fh, "B", t.ndim)
    _w(fh, f"{t.ndim}I", *t.shape)
    _w_f64_array(fh, t)


def _w_matrix(fh, m):
    m = np.asarray(m, dtype=np.float64)
    _w(fh, "II", m.shape[0], m.shape[1])
    _w_f64_array(fh, m)


class _Reader:
    def __init__(self, raw: bytes, label: str):
        self.buf = io.BytesIO(raw)
        self.label = label

    def take(self, n: int) -> bytes:
        chunk = self.buf.read(n)
        if len(chunk) != n:
            raise ModelFormatError(f"{self.label}: truncated file")
        return chunk

    def r(self, fmt):
        size = struct.calcsize("<" + fmt)
        values = struct.unpack("<" + fmt, self.take(size))
        return values[0] if len(values) == 1 else values

    def r_string(self) -> str:
        n = self.r("I")
        return self.take(n).decode("utf-8")

    def r_f64_array(self, count: int) -> np.ndarray:
        return np.frombuffer(self.take(8 * count), dtype="<f8").astype(np.float64)

    def r_tensor(self) -> np.ndarray:
        order = self.r("B")
        shape = self.r(f"{order}I")
        shape = (shape,) if order == 1 else tuple(shape)
        count = int(np.prod(shape, dtype=np.int64))
        return self.r_f64_array(count).reshape(shape)

    def r_matrix(self) -> np.ndarray:
        rows, cols = self.r("II")
        return self.r_f64_array(rows * cols).reshape(rows, cols)

    def at_end(self) -> bool:
        pos = self.buf.tell()
        extra = self.buf.read(1)
        self.buf.seek(pos)
        return extra == b""


def _write_layer(fh, layer: LayerDictionary):
    g = layer.config.geometry
    _w(fh, "B", len(g.patch_dims))
    _w(fh, f"{len(g.patch_dims)}I", *g.patch_dims)
    _w(fh, "B", len(g.slide_modes))
    if g.slide_modes:
        _w(fh, f"{len(g.slide_modes)}B", *g.slide_modes)
    _w(fh, "B", PADDINGS.index(g.padding))
    _w(fh, "I", layer.config.filters)
    _w(fh, "B", _KIND_CODES[layer.config.dictionary_kind])
    _w(fh, "d", layer.config.energy.q)
    _w_tensor(fh, layer.mean_patch)

    m = layer.model
    _w(fh, "B", len(m.input_dims))
    _w(fh, f"{len(m.input_dims)}I", *m.input_dims)
    _w(fh, f"{len(m.output_dims)}I", *m.output_dims)
    for factor in m.factors:
        _w_matrix(fh, factor)
    for ev in m.mode_eigenvalues:
        _w(fh, "I", len(ev))
        _w_f64_array(fh, ev)
    _w(fh, "Q", len(m.variance_order))
    _w(fh, f"{len(m.variance_order)}Q", *(int(i) for i in m.variance_order))
    _w(fh, "d", m.captured_scatter)


def _read_layer(r: _Reader) -> LayerDictionary:
    order = r.r("B")
    patch_dims = r.r(f"{order}I")
    patch_dims = (patch_dims,) if order == 1 else tuple(patch_dims)
    n_slide = r.r("B")
    if n_slide:
        slide = r.r(f"{n_slide}B")
        slide = (slide,) if n_slide == 1 else tuple(slide)
    else:
        slide = ()
    pad_code = r.r("B")
    if pad_code >= len(PADDINGS):
        raise ModelFormatError(f"{r.label}: unknown padding code {pad_code}")
    filters = r.r("I")
    kind_code = r.r("B")
    if kind_code not in _KIND_NAMES:
        raise ModelFormatError(f"{r.label}: unknown dictionary kind {kind_code}")
    q = r.r("d")
    mean_patch = r.r_tensor()

    m_order = r.r("B")
    in_dims = r.r(f"{m_order}I")
    in_dims = (in_dims,) if m_order == 1 else tuple(in_dims)
    out_dims = r.r(f"{m_order}I")
    out_dims = (out_dims,) if m_order == 1 else tuple(out_dims)
    factors = [r.r_matrix() for _ in range(m_order)]
    eigenvalues = []
    for _ in range(m_order):
        n = r.r("I")
        eigenvalues.append(r.r_f64_array(n))
    n_ord = r.r("Q")
    if n_ord:
        entries = r.r(f"{n_ord}Q")
        entries = (entries,) if n_ord == 1 else entries
    else:
        entries = ()
    captured = r.r("d")

    geometry = PatchGeometry(patch_dims=patch_dims, slide_modes=slide, padding=PADDINGS[pad_code])
    config = LayerConfig(
        geometry=geometry,
        filters=filters,
        dictionary_kind=_KIND_NAMES[kind_code],
        energy=EnergyPolicy(q=q),
    )
    model = MpcaModel(
        input_dims=in_dims,
        output_dims=out_dims,
        factors=factors,
        mean=mean_patch.reshape(in_dims),
        mode_eigenvalues=eigenvalues,
        variance_order=np.asarray(entries, dtype=np.int64),
        captured_scatter=captured,
    )
    return LayerDictionary(config=config, model=model, mean_patch=mean_patch)


def _write_classifier(fh, classifier):
    fh.write(CLASSIFIER_MAGIC)
    if isinstance(classifier, LinearModel):
        _w(fh, "B", _CLS_CODES["ridge"])
        _w(fh, "I", len(classifier.class_labels))
        for name in classifier.class_labels:
            _w_string(fh, str(name))
        _w_matrix(fh, classifier.weights)
        _w(fh, "I", len(classifier.bias))
        _w_f64_array(fh, classifier.bias)
    elif isinstance(classifier, NearestNeighborModel):
        _w(fh, "B", _CLS_CODES["nn1"])
        _w(fh, "I", len(classifier.class_labels))
        for name in classifier.class_labels:
            _w_string(fh, str(name))
        _w_matrix(fh, classifier.features)
        _w(fh, "I", len(classifier.labels))
        _w(fh, f"{len(classifier.labels)}I", *(int(i) for i in classifier.labels))
    else:
        raise ModelFormatError(
            f"cannot serialize classifier type {type(classifier).__name__}"
        )


def _read_classifier(r: _Reader):
    code = r.r("B")
    if code not in _CLS_NAMES:
        raise ModelFormatError(f"{r.label}: unknown classifier code {code}")
    n_labels = r.r("I")
    labels = [r.r_string() for _ in range(n_labels)]
    if _CLS_NAMES[code] == "ridge":
        weights = r.r_matrix()
        n_bias = r.r("I")
        bias = r.r_f64_array(n_bias)
        return LinearModel(class_labels=labels, weights=weights, bias=bias)
    features = r.r_matrix()
    n = r.r("I")
    idx = r.r(f"{n}I") if n else ()
    idx = (idx,) if n == 1 else idx
    return NearestNeighborModel(
        class_labels=labels, features=features, labels=np.asarray(idx, dtype=np.int64)
    )


def save_model(path, net: Network, classifier=None) -> None:
    fh = io.BytesIO()
    fh.write(MODEL_MAGIC)
    _w(fh, "B", MODEL_VERSION)
    _w_string(fh, net.architecture)
    _w(fh, "B", len(net.input_dims))
    _w(fh, f"{len(net.input_dims)}I", *net.input_dims)
    _w(fh, "B", len(net.layers))
    for layer in net.layers:
        _write_layer(fh, layer)
    _w(fh, "B", len(net.pooling.box_dims))
    _w(fh, f"{len(net.pooling.box_dims)}I", *net.pooling.box_dims)
    _w(fh, "d", net.pooling.overlap_ratio)
    _w(fh, "B", 1 if net.pooling.normalized else 0)
    if classifier is not None:
        _write_classifier(fh, classifier)
    with open(path, "wb") as out:
        out.write(fh.getvalue())


def load_model(path):
    """Returns ``(network, classifier_or_None)``."""
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise ModelFormatError(f"cannot read model file {path}: {exc}") from exc
    r = _Reader(raw, str(path))
    if r.take(4) != MODEL_MAGIC:
        raise ModelFormatError(f"{path}: bad magic")
    version = r.r("B")
    if version != MODEL_VERSION:
        raise ModelFormatError(f"{path}: unsupported version {version}")
    architecture = r.r_string()
    if architecture not in ARCHITECTURES:
        raise ModelFormatError(f"{path}: unknown architecture {architecture!r}")
    n_dims = r.r("B")
    input_dims = r.r(f"{n_dims}I")
    input_dims = (input_dims,) if n_dims == 1 else tuple(input_dims)
    n_layers = r.r("B")
    layers = [_read_layer(r) for _ in range(n_layers)]
    n_box = r.r("B")
    box = r.r(f"{n_box}I")
    box = (box,) if n_box == 1 else tuple(box)
    overlap = r.r("d")
    normalized = bool(r.r("B"))
    pooling = PoolingConfig(box_dims=box, overlap_ratio=overlap, normalized=normalized)
    net = Network(
        architecture=architecture, layers=layers, pooling=pooling, input_dims=input_dims
    )

    classifier = None
    if not r.at_end():
        if r.take(4) != CLASSIFIER_MAGIC:
            raise ModelFormatError(f"{path}: unexpected trailing section")
        classifier = _read_classifier(r)
        if not r.at_end():
            raise ModelFormatError(f"{path}: trailing bytes after classifier")
    return net, classifier
