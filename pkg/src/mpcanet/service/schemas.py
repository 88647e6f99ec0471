"""Pydantic request/response models for the service API."""

from typing import Optional

from pydantic import BaseModel, Field

from ..config import RunConfig


class TrainRequest(BaseModel):
    config: RunConfig
    data: str = Field(..., description="Path to a dataset manifest on the server")
    model_out: str = Field(..., description="Where to write the trained model file")
    ratio: Optional[float] = Field(None, description="Train on a split instead of everything")
    seed: Optional[int] = None


class LayerInfo(BaseModel):
    level: int
    kind: str
    patch_dims: list[int]
    slide_modes: list[int]
    padding: str
    filters: int
    input_dims: list[int]
    output_dims: list[int]
    energy_curves: Optional[list[list[float]]] = None
    captured_scatter: Optional[float] = None


class TrainResponse(BaseModel):
    feature_dim: int
    box_count: int
    layers: list[LayerInfo]
    model_path: str
    trained_on: int
    labels: list[str]
    config: dict


class EvalRequest(BaseModel):
    model: str
    data: str


class EvalResponse(BaseModel):
    accuracy: float
    confusion: list[list[int]]
    labels: list[str]
    count: int


class BenchRequest(BaseModel):
    config: RunConfig
    data: str
    splits: int = 5
    seed_base: int = 0
    ratio: Optional[float] = None
    patch_sweep: Optional[list[list[int]]] = None


class BenchRow(BaseModel):
    architecture: str
    patch: str
    L: str
    box: str
    split: int
    accuracy: float


class BenchSummary(BaseModel):
    architecture: str
    patch: str
    mean: float
    stddev: float


class BenchResponse(BaseModel):
    rows: list[BenchRow]
    summary: list[BenchSummary]
    splits: int
    ratio: float
    seed_base: int
    config: dict


class SweepRequest(BaseModel):
    data: str
    d_min: int = 10
    d_max: int = 100
    d_step: int = 10
    splits: int = 5
    seed_base: int = 0
    ratio: float = 0.5
    energy_q: float = 1.0


class SweepRow(BaseModel):
    d: int
    split: int
    accuracy: Optional[float]
    status: str


class SweepPerD(BaseModel):
    d: int
    mean: Optional[float]
    splits_ok: int


class SweepResponse(BaseModel):
    rows: list[SweepRow]
    per_d: list[SweepPerD]
    best_d: Optional[int]
    best_accuracy: Optional[float]
    splits: int
    ratio: float
    seed_base: int
    energy_q: float


class SynthRequest(BaseModel):
    dims: list[int]
    classes: int = 4
    per_class: int = 20
    rank: int = 2
    sigma: float = 0.05
    seed: int = 0
    out_dir: str


class SynthResponse(BaseModel):
    manifest: str
    files: int
    labels: list[str]
    dims: list[int]
    seed: int


class InspectRequest(BaseModel):
    model: str


class PoolingInfo(BaseModel):
    box_dims: list[int]
    overlap: float
    strides: list[int]
    normalized: bool


class ClassifierInfo(BaseModel):
    kind: str
    labels: list[str]


class InspectResponse(BaseModel):
    architecture: str
    input_dims: list[int]
    feature_dim: int
    layers: list[LayerInfo]
    pooling: PoolingInfo
    classifier: Optional[ClassifierInfo]


class ErrorBody(BaseModel):
    kind: str
    message: str
