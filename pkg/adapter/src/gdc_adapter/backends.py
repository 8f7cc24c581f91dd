"""Default ML backends, loaded lazily so the package imports without them.

A generation backend is a callable ``(prompt, seed, size) -> uint8 HxWx3
array``.  An encoder backend is a callable ``(batch) -> (n, d) float array``
where ``batch`` is a list of float32 HxWx3 arrays scaled to [0, 1].
"""

from __future__ import annotations

import numpy as np

from .config import AdapterConfig
from .errors import BackendUnavailable


def load_generation_backend(config: AdapterConfig):
    try:
        import torch
        from diffusers import AutoPipelineForText2Image
    except ImportError as exc:
        raise BackendUnavailable(
            f"diffusion backend requires torch and diffusers: {exc}") from exc
    try:
        pipe = AutoPipelineForText2Image.from_pretrained(
            config.diffusion_model)
        pipe = pipe.to(config.device)
    except Exception as exc:
        raise BackendUnavailable(
            f"cannot load diffusion model {config.diffusion_model!r}: "
            f"{exc}") from exc

    def generate(prompt: str, seed: int, size: int) -> np.ndarray:
        generator = torch.Generator(device=config.device).manual_seed(seed)
        image = pipe(prompt=prompt, width=size, height=size,
                     num_inference_steps=1, guidance_scale=0.0,
                     generator=generator).images[0]
        return np.asarray(image.convert("RGB"), dtype=np.uint8)

    return generate


def load_encoder_backend(config: AdapterConfig):
    try:
        import torch
        from transformers import AutoImageProcessor, AutoModel
    except ImportError as exc:
        raise BackendUnavailable(
            f"encoder backend requires torch and transformers: "
            f"{exc}") from exc
    try:
        processor = AutoImageProcessor.from_pretrained(config.encoder)
        model = AutoModel.from_pretrained(config.encoder)
        model = model.to(config.device).eval()
    except Exception as exc:
        raise BackendUnavailable(
            f"cannot load encoder {config.encoder!r}: {exc}") from exc

    def encode(batch: list[np.ndarray]) -> np.ndarray:
        inputs = processor(images=[(b * 255).astype(np.uint8) for b in batch],
                           return_tensors="pt").to(config.device)
        with torch.no_grad():
            out = model(**inputs)
        features = out.pooler_output
        return features.cpu().numpy().astype(np.float32)

    return encode
