"""Run configuration: the JSON document accepted by the CLI and service.

Example::

    {
      "architecture": "mpcanet2-vector",
      "layers": [
        {"patch_dims": [3, 3, 8], "slide_modes": [0, 1], "filters": 8,
         "energy_q": 0.97},
        {"patch_dims": [3, 3], "filters": 8, "energy_q": 0.97}
      ],
      "pooling": {"box_dims": [4, 4], "overlap": 0.5},
      "classifier": {"kind": "ridge", "lambda": 0.01},
      "seed": 0, "splits": 5, "ratio": 0.5
    }

Pooling boxes may instead be given as a base times a factor
(``{"box_base": [8, 5], "box_factor": 2}`` means 16x10); the resolved
absolute extents are what gets stored and echoed. ``slide_modes`` defaults
to every mode whose patch extent is smaller than the data extent.
"""

from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .errors import ConfigError
from .mpca import EnergyPolicy
from .network import ARCHITECTURE_KINDS, PoolingConfig, LayerConfig
from .patches import PatchGeometry


class LayerSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    patch_dims: list[int]
    slide_modes: Optional[list[int]] = None
    padding: Literal["same", "valid"] = "same"
    filters: int = 8
    energy_q: float = 0.97
    min_dims: Optional[list[int]] = None

    @field_validator("patch_dims")
    @classmethod
    def _patch_positive(cls, v):
        if not v or any(k < 1 for k in v):
            raise ValueError("patch_dims must be positive")
        return v

    @field_validator("filters")
    @classmethod
    def _filters_positive(cls, v):
        if v < 1:
            raise ValueError("filters must be >= 1")
        return v

    @field_validator("energy_q")
    @classmethod
    def _q_range(cls, v):
        if not 0.0 < v <= 1.0:
            raise ValueError("energy_q must be in (0, 1]")
        return v


class PoolingSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    box_dims: Optional[list[int]] = None
    box_base: Optional[list[int]] = None
    box_factor: Optional[int] = None
    overlap: float = 0.5
    normalized: bool = False

    @model_validator(mode="after")
    def _exactly_one_box_form(self):
        has_abs = self.box_dims is not None
        has_mult = self.box_base is not None or self.box_factor is not None
        if has_abs == has_mult:
            raise ValueError("give either box_dims or box_base with box_factor")
        if has_mult and (self.box_base is None or self.box_factor is None):
            raise ValueError("box_base and box_factor go together")
        if not 0.0 <= self.overlap < 1.0:
            raise ValueError("overlap must be in [0, 1)")
        return self

    def resolved_box_dims(self) -> list[int]:
        if self.box_dims is not None:
            return list(self.box_dims)
        return [b * self.box_factor for b in self.box_base]


class ClassifierSpec(BaseModel):
    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    kind: Literal["ridge", "nn1"] = "ridge"
    ridge_lambda: float = Field(default=1e-2, alias="lambda", gt=0)


class RunConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    architecture: Literal[
        "mpcanet1", "mpcanet2-vector", "mpcanet2-cuboid", "pcanet1", "pcanet2"
    ]
    layers: list[LayerSpec]
    pooling: PoolingSpec
    classifier: ClassifierSpec = Field(default_factory=ClassifierSpec)
    seed: int = 0
    splits: int = 5
    ratio: float = 0.5

    @model_validator(mode="after")
    def _shape_checks(self):
        expected = len(ARCHITECTURE_KINDS[self.architecture])
        if len(self.layers) != expected:
            raise ValueError(
                f"{self.architecture} needs {expected} layer configs, got {len(self.layers)}"
            )
        if not 0.0 < self.ratio < 1.0:
            raise ValueError("ratio must be in (0, 1)")
        if self.splits < 1:
            raise ValueError("splits must be >= 1")
        return self


def parse_config(doc: dict) -> RunConfig:
    """Validate a raw config document, raising ConfigError on any problem."""
    try:
        return RunConfig.model_validate(doc)
    except Exception as exc:
        raise ConfigError(f"invalid config: {exc}") from exc


def resolve_layers(config: RunConfig, input_dims) -> list[LayerConfig]:
    """Turn layer specs into concrete geometries for the given input dims.

    Walks the stages, so the second layer is checked against the first
    layer's feature-map dims.
    """
    kinds = ARCHITECTURE_KINDS[config.architecture]
    dims = tuple(int(d) for d in input_dims)
    out = []
    for level, (spec, kind) in enumerate(zip(config.layers, kinds)):
        if len(spec.patch_dims) != len(dims):
            raise ConfigError(
                f"layer {level + 1}: patch order {len(spec.patch_dims)} does not "
                f"match its input order {len(dims)} (dims {dims})"
            )
        if spec.slide_modes is not None:
            slide = tuple(spec.slide_modes)
        else:
            slide = tuple(
                n for n, (k, i) in enumerate(zip(spec.patch_dims, dims)) if k < i
            )
        try:
            geometry = PatchGeometry(
                patch_dims=tuple(spec.patch_dims), slide_modes=slide, padding=spec.padding
            )
            geometry.validate_source(dims)
            policy = EnergyPolicy(
                q=spec.energy_q,
                min_dims=tuple(spec.min_dims) if spec.min_dims else None,
            )
            layer = LayerConfig(
                geometry=geometry,
                filters=spec.filters,
                dictionary_kind=kind,
                energy=policy,
            )
        except ValueError as exc:
            raise ConfigError(f"layer {level + 1}: {exc}") from exc
        dims = geometry.grid_dims(dims)
        out.append(layer)
    return out


def resolve_pooling(config: RunConfig) -> PoolingConfig:
    try:
        return PoolingConfig(
            box_dims=tuple(config.pooling.resolved_box_dims()),
            overlap_ratio=config.pooling.overlap,
            normalized=config.pooling.normalized,
        )
    except ValueError as exc:
        raise ConfigError(f"pooling: {exc}") from exc


def effective_config(config: RunConfig) -> dict:
    """The fully resolved config echoed into command outputs."""
    doc = config.model_dump(by_alias=True)
    doc["pooling"] = {
        "box_dims": config.pooling.resolved_box_dims(),
        "overlap": config.pooling.overlap,
        "normalized": config.pooling.normalized,
    }
    return doc
