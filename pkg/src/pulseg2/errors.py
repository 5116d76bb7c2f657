"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid configuration file, spec string or CLI usage."""


class StreamFormatError(RuntimeError):
    """A stream file or its sidecar could not be parsed."""


class EstimationError(RuntimeError):
    """An estimator's preconditions are not met (e.g. no clicks)."""
