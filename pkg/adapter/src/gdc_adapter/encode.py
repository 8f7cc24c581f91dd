"""Image encoding: class-partitioned image tree in, GDCE archive out."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image

from . import gdce
from .backends import load_encoder_backend
from .config import AdapterConfig
from .errors import AdapterError, EmptyClass

log = logging.getLogger(__name__)

IMAGE_SUFFIXES = {".png", ".jpg", ".jpeg", ".bmp", ".webp"}


@dataclass
class EncodeReport:
    d: int = 0
    classes: list[tuple[str, int]] = field(default_factory=list)
    skipped: list[str] = field(default_factory=list)


def _load_image(path: Path, size: int) -> np.ndarray:
    with Image.open(path) as img:
        img = img.convert("RGB").resize((size, size), Image.BICUBIC)
        return np.asarray(img, dtype=np.float32) / 255.0


def encode_images(image_dir, config: AdapterConfig, out_path,
                  encoder=None) -> EncodeReport:
    """Encode every image under ``image_dir/<label>/`` into a GDCE archive.

    Class order is sorted label order and row order is sorted filename
    order, so re-encoding identical images yields identical archives.
    Unreadable images are skipped with a warning and listed in a sidecar
    skip manifest; the encoder identifier is recorded in a second sidecar.
    """
    image_dir = Path(image_dir)
    out_path = Path(out_path)
    class_dirs = sorted(p for p in image_dir.iterdir() if p.is_dir())
    if not class_dirs:
        raise AdapterError(f"{image_dir}: no class subdirectories found")
    if encoder is None:
        encoder = load_encoder_backend(config)

    report = EncodeReport()
    blocks: list[tuple[str, np.ndarray]] = []
    for class_dir in class_dirs:
        label = class_dir.name
        files = sorted(p for p in class_dir.iterdir()
                       if p.suffix.lower() in IMAGE_SUFFIXES)
        loaded = []
        for path in files:
            try:
                loaded.append(_load_image(path, config.encoder_size))
            except Exception as exc:
                log.warning("skipping unreadable image %s: %s", path, exc)
                report.skipped.append(str(path))
        if not loaded:
            raise EmptyClass(
                f"class {label!r} has no readable images in {class_dir}")
        rows = []
        for start in range(0, len(loaded), config.batch_size):
            rows.append(np.asarray(
                encoder(loaded[start:start + config.batch_size]),
                dtype=np.float32))
        block = np.vstack(rows)
        if report.d == 0:
            report.d = block.shape[1]
        elif block.shape[1] != report.d:
            raise AdapterError(
                f"encoder returned d={block.shape[1]} for class {label!r}, "
                f"expected {report.d}")
        blocks.append((label, block))
        report.classes.append((label, block.shape[0]))

    gdce.write_archive(out_path, report.d, blocks)
    out_path.with_name(out_path.name + ".encoder.txt").write_text(
        config.encoder + "\n", encoding="utf-8")
    out_path.with_name(out_path.name + ".skipped.txt").write_text(
        "".join(f"{p}\n" for p in report.skipped), encoding="utf-8")
    return report
