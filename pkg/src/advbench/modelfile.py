"""Model persistence.

Layout of a model file:

    line 1   UTF-8 JSON header terminated by b"\\n":
             {"magic": "ABNET1", "input_dim": d, "num_classes": C,
              "layers": [{"in": i, "out": o, "activation": "relu"|"identity"}, ...]}
    then     for each layer in order: the weight matrix (out × in, row-major)
             followed by the bias vector (out), every value a little-endian
             IEEE-754 float32.

Parameters are upcast to float64 on load. The payload length must match the
header exactly.
"""

import json
from pathlib import Path

import numpy as np
from pydantic import BaseModel, Field, ValidationError

from .errors import DimensionError, FormatError
from .network import Activation, DenseLayer, ModelParams

MAGIC = "ABNET1"
_FLOAT = np.dtype("<f4")


class LayerSpec(BaseModel):
    in_dim: int = Field(alias="in", ge=1)
    out_dim: int = Field(alias="out", ge=1)
    activation: Activation

    model_config = {"populate_by_name": True}


class ModelFileHeader(BaseModel):
    magic: str
    input_dim: int = Field(ge=1)
    num_classes: int = Field(ge=2)
    layers: list[LayerSpec] = Field(min_length=1)


def _header_for(model: ModelParams) -> ModelFileHeader:
    return ModelFileHeader(
        magic=MAGIC,
        input_dim=model.input_dim,
        num_classes=model.num_classes,
        layers=[
            LayerSpec(in_dim=layer.in_dim, out_dim=layer.out_dim, activation=layer.activation)
            for layer in model.layers
        ],
    )


def dump_model(model: ModelParams) -> bytes:
    """Serialize a model to bytes."""
    header = _header_for(model).model_dump(mode="json", by_alias=True)
    blocks = [json.dumps(header, sort_keys=True).encode("utf-8"), b"\n"]
    for layer in model.layers:
        blocks.append(np.ascontiguousarray(layer.weight, dtype=_FLOAT).tobytes())
        blocks.append(np.ascontiguousarray(layer.bias, dtype=_FLOAT).tobytes())
    return b"".join(blocks)


def parse_model(data: bytes) -> ModelParams:
    """Parse model bytes, validating the header against the payload."""
    newline = data.find(b"\n")
    if not data or newline < 0:
        raise FormatError("Model file has no header")
    try:
        header = ModelFileHeader.model_validate_json(data[:newline])
    except ValidationError as e:
        raise FormatError(f"Invalid model header: {e}") from e
    if header.magic != MAGIC:
        raise FormatError(f"Bad magic {header.magic!r}, expected {MAGIC!r}")

    payload = data[newline + 1 :]
    expected = sum(spec.out_dim * (spec.in_dim + 1) for spec in header.layers)
    if len(payload) != expected * _FLOAT.itemsize:
        raise FormatError(
            f"Payload holds {len(payload)} bytes, header describes {expected * _FLOAT.itemsize}"
        )
    values = np.frombuffer(payload, dtype=_FLOAT).astype(np.float64)

    layers = []
    offset = 0
    for spec in header.layers:
        n_weight = spec.out_dim * spec.in_dim
        weight = values[offset : offset + n_weight].reshape(spec.out_dim, spec.in_dim)
        offset += n_weight
        bias = values[offset : offset + spec.out_dim]
        offset += spec.out_dim
        layers.append(
            DenseLayer(weight=weight.copy(), bias=bias.copy(), activation=spec.activation)
        )

    try:
        model = ModelParams(layers=tuple(layers))
    except DimensionError as e:
        raise FormatError(f"Inconsistent layer dimensions: {e}") from e
    if model.input_dim != header.input_dim or model.num_classes != header.num_classes:
        raise FormatError("Header input_dim/num_classes disagree with the layer specs")
    return model


def save_model(model: ModelParams, path: Path) -> None:
    """Write a model file."""
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(dump_model(model))


def load_model(path: Path) -> ModelParams:
    """Read a model file.

    Raises:
        FormatError: If the file is empty or malformed
        FileNotFoundError: If the file does not exist
    """
    return parse_model(path.read_bytes())
