"""Exception types shared across the toolkit."""


class MarkerMineError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(MarkerMineError):
    """A configuration object or file is invalid for the requested operation."""


class TrainingError(MarkerMineError):
    """Training cannot proceed or finish (empty input, unknown label, ...)."""


class BuildError(MarkerMineError):
    """A dataset variant cannot be built from the available instances."""


class ExportError(MarkerMineError):
    """A model export failed (degenerate weights, ...)."""


class FormatError(MarkerMineError):
    """An input or model file does not match its documented format."""
