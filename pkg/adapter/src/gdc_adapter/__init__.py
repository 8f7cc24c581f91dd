"""Generation/encoding adapter producing GDCE embedding archives."""

from .config import AdapterConfig
from .encode import EncodeReport, encode_images
from .errors import (
    AdapterError,
    BackendUnavailable,
    ConfigError,
    EmptyClass,
    ManifestError,
)
from .generate import GenerationReport, generate_references
from .manifest import ManifestEntry, read_manifest

__all__ = [
    "AdapterConfig",
    "AdapterError",
    "BackendUnavailable",
    "ConfigError",
    "EmptyClass",
    "EncodeReport",
    "GenerationReport",
    "ManifestEntry",
    "ManifestError",
    "encode_images",
    "generate_references",
    "read_manifest",
]

__version__ = "0.1.0"
