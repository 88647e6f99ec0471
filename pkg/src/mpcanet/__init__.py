"""Multilinear PCA feature networks for tensor object classification."""

from .classify import (
    LdaModel,
    LinearModel,
    NearestNeighborModel,
    evaluate,
    fit_lda,
    fit_nearest_neighbor,
    fit_ridge_ovr,
    predict,
)
from .data import (
    Dataset,
    SynthSpec,
    load_dataset,
    read_tensor,
    split_dataset,
    synth_generate,
    write_dataset,
    write_tensor,
)
from .errors import (
    ConfigError,
    DataError,
    ModelFormatError,
    MpcanetError,
    NumericError,
    TensorFormatError,
    ZeroVarianceError,
)
from .model_io import load_model, save_model
from .mpca import (
    EnergyPolicy,
    MpcaModel,
    compute_variance_order,
    fit_mpca,
    project,
    project_batch,
    select_mode_dims,
    vectorize_core,
)
from .network import (
    ARCHITECTURES,
    LayerConfig,
    LayerDictionary,
    Network,
    PoolingConfig,
    binarize,
    encode_layer,
    forward,
    learn_layer_dictionary,
    plan_geometry,
    pool_histograms,
    train_network,
    weight_maps,
)
from .patches import PatchGeometry, PatchSet, center_patches, extract_patches
from .tensor_ops import (
    frobenius_sq_distance,
    kron_chain,
    mode_multiply,
    multi_mode_multiply,
    unfold,
)

__version__ = "0.1.0"
