"""Trainer-side adapter for the activemix serve protocol."""

from .adapter import (
    DEFAULT_COMMAND,
    AdapterConfig,
    AdapterError,
    ProtocolError,
    SubprocessMixingEnv,
)

__version__ = "0.1.0"
