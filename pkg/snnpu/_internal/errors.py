"""
snnpu Error Classes

Canonical error codes for machine-readable failures.

Error code format: SNNPU_Exxx
"""


class SnnpuError(Exception):
    """Base class for all snnpu errors."""

    code: str = "SNNPU_E000"

    def __init__(self, message: str = ""):
        self.message = message
        super().__init__(f"[{self.code}] {message}")


# =============================================================================
# E1xx: Fixed-point and neuron quantization
# =============================================================================

class FormatMismatchError(SnnpuError, ValueError):
    """Operands of a fixed-point operation use different formats."""

    code = "SNNPU_E101"

    def __init__(self, left: str = "", right: str = ""):
        super().__init__(f"Fixed-point format mismatch: {left} vs {right}")


class InvalidFormatError(SnnpuError, ValueError):
    """Fixed-point format outside the supported width range."""

    code = "SNNPU_E102"


class NeuronQuantizationError(SnnpuError, ValueError):
    """Neuron parameter cannot be represented in the target format."""

    code = "SNNPU_E103"


# =============================================================================
# E2xx: Model description, model files, shapes, BN fusion
# =============================================================================

class ModelSyntaxError(SnnpuError, ValueError):
    """Model config document does not follow the grammar."""

    code = "SNNPU_E201"

    def __init__(self, message: str = "", line: int = 0, column: int = 0):
        self.line = line
        self.column = column
        super().__init__(f"line {line}, column {column}: {message}")
        self.message = message


class ShapeError(SnnpuError, ValueError):
    """Shape inference produced a non-positive dimension or inputs mismatch."""

    code = "SNNPU_E202"


class BatchNormFusionError(SnnpuError, ValueError):
    """Batch normalization cannot be fused into the layer."""

    code = "SNNPU_E203"


class ModelFileError(SnnpuError, ValueError):
    """Binary model file is malformed (magic, version, truncation)."""

    code = "SNNPU_E204"


# =============================================================================
# E3xx: Event streams
# =============================================================================

class EventFormatError(SnnpuError, ValueError):
    """Event stream row or record is malformed."""

    code = "SNNPU_E301"


class EventBoundsError(SnnpuError, ValueError):
    """Event coordinate lies outside the declared sensor geometry."""

    code = "SNNPU_E302"


class NonBinaryFrameError(SnnpuError, ValueError):
    """A frame carrying counts was used where binary spikes are required."""

    code = "SNNPU_E303"


# =============================================================================
# E4xx: Engines
# =============================================================================

class EngineInputError(SnnpuError, ValueError):
    """Engine input does not match the network input geometry or contract."""

    code = "SNNPU_E401"


class UnfusedBatchNormError(SnnpuError):
    """Fixed-point inference requested on a network with unfused BN."""

    code = "SNNPU_E402"

    def __init__(self, layer_index: int = -1):
        super().__init__(
            f"Layer {layer_index} carries batch normalization. "
            "Fuse it before fixed-point inference."
        )


class EngineConfigurationError(SnnpuError, ValueError):
    """Engine/arithmetic combination is not supported."""

    code = "SNNPU_E403"


class TimestepOutOfRangeError(SnnpuError, IndexError):
    """Requested timestep is outside a run."""

    code = "SNNPU_E404"


# =============================================================================
# E5xx: Performance model
# =============================================================================

class TraceMismatchError(SnnpuError, ValueError):
    """Spike trace does not belong to the given network or hardware config."""

    code = "SNNPU_E501"


class EnergyInputError(SnnpuError, ValueError):
    """Energy calculus input is zero or negative where a divisor is needed."""

    code = "SNNPU_E502"


class CalibrationError(SnnpuError, ValueError):
    """No per-spike overhead reproduces the target latency."""

    code = "SNNPU_E503"


# =============================================================================
# E6xx: Wire protocol
# =============================================================================

class ProtocolError(SnnpuError, ValueError):
    """Wire message cannot be decoded."""

    code = "SNNPU_E601"


class UnknownMessageTypeError(ProtocolError):
    """Header is valid but its message type is not known."""

    code = "SNNPU_E602"

    def __init__(self, type_code: int = 0, length: int = 0):
        self.type_code = type_code
        self.length = length
        super().__init__(f"Unknown message type {type_code}")


class GeometryMismatchError(ProtocolError):
    """Client geometry disagrees with the served model."""

    code = "SNNPU_E603"


class RemoteError(SnnpuError):
    """The peer answered with an ERROR message."""

    code = "SNNPU_E604"

    def __init__(self, remote_code: int = 0, message: str = ""):
        self.remote_code = remote_code
        super().__init__(f"remote error {remote_code}: {message}")


# =============================================================================
# E7xx: Configuration
# =============================================================================

class ConfigError(SnnpuError, ValueError):
    """Configuration file is malformed."""

    code = "SNNPU_E701"
