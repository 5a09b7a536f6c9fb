"""
Model - network description, shapes, accounting, BN fusion and model files.
"""

from snnpu._internal.model.schema import (
    BatchNormParams,
    FormatSet,
    LayerSpec,
    LayerStats,
    LayerWeights,
    ModelStats,
    NetworkSpec,
)
from snnpu._internal.model.shapes import (
    LayerGeometry,
    extraction_shapes,
    infer_shapes,
    layer_geometry,
    model_stats,
)
from snnpu._internal.model.parser import (
    parse_model_config,
    render_model_config,
    zero_weights,
)
from snnpu._internal.model.fusion import fuse_batchnorm, fuse_network, quantize_network
from snnpu._internal.model.serialization import (
    load_model,
    load_model_file,
    save_model,
    write_model_file,
)
from snnpu._internal.model.zoo import (
    REFERENCE_MODELS,
    load_reference,
    random_network,
    randomize_weights,
)

__all__ = [
    "BatchNormParams",
    "FormatSet",
    "LayerSpec",
    "LayerStats",
    "LayerWeights",
    "ModelStats",
    "NetworkSpec",
    "LayerGeometry",
    "extraction_shapes",
    "infer_shapes",
    "layer_geometry",
    "model_stats",
    "parse_model_config",
    "render_model_config",
    "zero_weights",
    "fuse_batchnorm",
    "fuse_network",
    "quantize_network",
    "load_model",
    "load_model_file",
    "save_model",
    "write_model_file",
    "REFERENCE_MODELS",
    "load_reference",
    "random_network",
    "randomize_weights",
]
