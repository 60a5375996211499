"""Exception hierarchy shared across the package."""


class HalluxError(Exception):
    """Base class for all errors raised by this package."""


class TensorError(HalluxError):
    """Invalid tensor construction (non-finite values, bad shape)."""


class ShapeError(HalluxError):
    """Operand shapes are inconsistent with an op's signature."""


class GraphError(HalluxError):
    """Graph construction or execution failure; message names the node."""


class EncodingError(HalluxError):
    """Raw signal cannot be encoded into a network input."""


class ManifestError(HalluxError):
    """Dataset manifest is missing, malformed, or inconsistent."""


class SplitError(HalluxError):
    """Split specification is invalid for the given manifest."""


class CacheError(HalluxError):
    """Feature cache file is malformed or an id is missing."""


class StaleCacheError(CacheError):
    """Feature cache fingerprint does not match the producing model."""


class ConfigError(HalluxError):
    """Experiment configuration is invalid."""


class TrainingError(HalluxError):
    """Training preconditions are violated."""


class ProtocolError(HalluxError):
    """Evaluation protocol cannot run on the given manifest."""
