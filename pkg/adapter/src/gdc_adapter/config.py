"""Adapter configuration."""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ConfigError

DEFAULT_DIFFUSION_MODEL = "stabilityai/sdxl-turbo"
DEFAULT_ENCODER = "facebook/dinov2-giant"


@dataclass(frozen=True)
class AdapterConfig:
    diffusion_model: str = DEFAULT_DIFFUSION_MODEL
    encoder: str = DEFAULT_ENCODER
    generation_size: int = 512
    encoder_size: int = 224
    device: str = "cpu"
    batch_size: int = 8

    def __post_init__(self):
        if not self.diffusion_model:
            raise ConfigError("diffusion model identifier must be non-empty")
        if not self.encoder:
            raise ConfigError("encoder identifier must be non-empty")
        for name in ("generation_size", "encoder_size", "batch_size"):
            value = getattr(self, name)
            if not isinstance(value, int) or value < 1:
                raise ConfigError(f"{name} must be a positive integer, "
                                  f"got {value!r}")
