"""Exception hierarchy.

Every error raised by the library derives from GrayAnchorError and carries
an exit_code used by the CLI: 1 = usage/config, 2 = data, 3 = numerical or
training failure.
"""


class GrayAnchorError(Exception):
    exit_code = 2


class UsageError(GrayAnchorError):
    """Bad command line or API usage."""
    exit_code = 1


class ConfigError(GrayAnchorError):
    """Unknown method id or inconsistent configuration."""
    exit_code = 1


class DecodeError(GrayAnchorError):
    """Image file could not be read or has an unsupported format."""


class DimensionError(GrayAnchorError):
    """Image smaller than the 16x16 minimum or mismatched shapes."""


class MaskError(GrayAnchorError):
    """Degenerate exclusion polygon or invalid mask parameters."""


class ManifestError(GrayAnchorError):
    """Malformed manifest CSV."""


class DetectorError(GrayAnchorError):
    """A grayness detector excluded every pixel (e.g. a flat image)."""


class SelectionError(GrayAnchorError):
    """Not enough valid pixels to select from."""


class EstimationError(GrayAnchorError):
    """Selected pixels or statistics give no usable illuminant."""


class MetricError(GrayAnchorError):
    """Invalid inputs to an error metric."""


class StatsError(GrayAnchorError):
    """Summary statistics requested for an empty error list."""


class SplitError(GrayAnchorError):
    """Cross-validation split with more folds than entries."""


class CheckpointError(GrayAnchorError):
    """Malformed or incompatible parameter checkpoint."""


class GenerationError(GrayAnchorError):
    """Synthetic scene spec cannot be rendered without clipping."""


class LossError(GrayAnchorError):
    exit_code = 3


class TrainingError(GrayAnchorError):
    """Training diverged; carries the failing step index."""
    exit_code = 3

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step
