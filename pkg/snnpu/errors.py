"""
snnpu Errors - Public API

Clean imports for snnpu error types.
"""

from snnpu._internal.errors import (
    BatchNormFusionError,
    CalibrationError,
    ConfigError,
    EnergyInputError,
    EngineConfigurationError,
    EngineInputError,
    EventBoundsError,
    EventFormatError,
    FormatMismatchError,
    GeometryMismatchError,
    InvalidFormatError,
    ModelFileError,
    ModelSyntaxError,
    NeuronQuantizationError,
    NonBinaryFrameError,
    ProtocolError,
    RemoteError,
    ShapeError,
    SnnpuError,
    TimestepOutOfRangeError,
    TraceMismatchError,
    UnfusedBatchNormError,
    UnknownMessageTypeError,
)

__all__ = [
    "BatchNormFusionError",
    "CalibrationError",
    "ConfigError",
    "EnergyInputError",
    "EngineConfigurationError",
    "EngineInputError",
    "EventBoundsError",
    "EventFormatError",
    "FormatMismatchError",
    "GeometryMismatchError",
    "InvalidFormatError",
    "ModelFileError",
    "ModelSyntaxError",
    "NeuronQuantizationError",
    "NonBinaryFrameError",
    "ProtocolError",
    "RemoteError",
    "ShapeError",
    "SnnpuError",
    "TimestepOutOfRangeError",
    "TraceMismatchError",
    "UnfusedBatchNormError",
    "UnknownMessageTypeError",
]
