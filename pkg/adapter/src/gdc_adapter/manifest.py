"""Reader for the generation-manifest interchange format.

One tab-separated record per line: label, prompt, count, seed.
An empty file is a valid manifest with no entries.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ManifestError


@dataclass(frozen=True)
class ManifestEntry:
    label: str
    prompt: str
    count: int
    seed: int


def read_manifest(source) -> list[ManifestEntry]:
    entries = []
    with open(source, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 4:
                raise ManifestError(
                    f"{source}: line {lineno}: expected 4 tab-separated "
                    f"fields, got {len(parts)}")
            label, prompt, count_s, seed_s = parts
            try:
                count, seed = int(count_s), int(seed_s)
            except ValueError as exc:
                raise ManifestError(
                    f"{source}: line {lineno}: {exc}") from exc
            if count < 0:
                raise ManifestError(
                    f"{source}: line {lineno}: negative count {count}")
            entries.append(ManifestEntry(label, prompt, count, seed))
    return entries
