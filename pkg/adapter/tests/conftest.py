import zlib

import numpy as np
import pytest


@pytest.fixture
def stub_generator():
    """Deterministic fake text-to-image backend: pixels derived from the
    prompt and seed only."""
    def generate(prompt, seed, size):
        rng = np.random.default_rng([seed, zlib.crc32(prompt.encode())])
        return rng.integers(0, 256, size=(size, size, 3), dtype=np.uint8)
    return generate


@pytest.fixture
def stub_encoder():
    """Deterministic fake encoder: 16 summary statistics per image."""
    def encode(batch):
        out = []
        for img in batch:
            h, w, _ = img.shape
            quads = [img[:h // 2, :w // 2], img[:h // 2, w // 2:],
                     img[h // 2:, :w // 2], img[h // 2:, w // 2:]]
            feats = ([img[..., c].mean() for c in range(3)]
                     + [img[..., c].std() for c in range(3)]
                     + [q.mean() for q in quads]
                     + [q.std() for q in quads]
                     + [img.min(), img.max()])
            out.append(np.asarray(feats, dtype=np.float32))
        return np.stack(out)
    return encode


@pytest.fixture
def write_manifest_lines():
    def write(path, entries):
        path.write_text("".join(
            f"{label}\t{prompt}\t{count}\t{seed}\n"
            for label, prompt, count, seed in entries), encoding="utf-8")
    return write
