"""Reference-image generation: manifest in, class-partitioned image tree out."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image

from .backends import load_generation_backend
from .config import AdapterConfig
from .manifest import ManifestEntry, read_manifest

log = logging.getLogger(__name__)


@dataclass
class GenerationReport:
    written: int = 0
    skipped_existing: int = 0
    failures: list[tuple[ManifestEntry, str]] = field(default_factory=list)


def image_filename(entry: ManifestEntry, index: int) -> str:
    """Deterministic per-image filename; reruns resume by skipping
    files that already exist."""
    return f"s{entry.seed:010d}_{index:03d}.png"


def generate_references(manifest_path, config: AdapterConfig,
                        out_dir, backend=None) -> GenerationReport:
    """Produce ``entry.count`` images per manifest entry under
    ``out_dir/<label>/``.

    ``backend`` is ``(prompt, seed, size) -> uint8 HxWx3 array``; the
    default loads the configured text-to-image model.  Failures are
    logged per entry and collected in the report so a rerun can resume.
    """
    entries = read_manifest(manifest_path)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    report = GenerationReport()
    if not entries:
        return report
    if backend is None:
        backend = load_generation_backend(config)
    for entry in entries:
        class_dir = out_dir / entry.label
        class_dir.mkdir(parents=True, exist_ok=True)
        for j in range(entry.count):
            target = class_dir / image_filename(entry, j)
            if target.exists():
                report.skipped_existing += 1
                continue
            try:
                pixels = backend(entry.prompt, entry.seed + j,
                                 config.generation_size)
                image = Image.fromarray(np.asarray(pixels, dtype=np.uint8))
                image.save(target)
                report.written += 1
            except Exception as exc:
                log.warning("generation failed for %r (prompt %r, image %d): "
                            "%s", entry.label, entry.prompt, j, exc)
                report.failures.append((entry, str(exc)))
                break  # move to the next entry; rerun resumes here
    return report
