"""Shared exception types."""


class ConfigurationError(ValueError):
    """A caller-supplied configuration is inconsistent or incomplete."""


class InstanceFormatError(ValueError):
    """An instance file is malformed; the message names the offending row/column."""


class GenerationError(RuntimeError):
    """A synthetic instance could not be produced within the retry budget."""
