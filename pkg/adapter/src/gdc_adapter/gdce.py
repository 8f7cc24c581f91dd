"""Writer for the GDCE embedding-archive binary interchange format.

Layout (all integers little-endian):

    magic   4 bytes  "GDCE"
    version u16      1
    dtype   u8       0 (float32)
    d       u32      embedding dimension
    then per class block:
        label length u16 (non-zero), utf-8 label bytes,
        row count    u32,
        rows * d     float32 values
    terminated by a u32 zero end marker.
"""

from __future__ import annotations

import struct

import numpy as np

from .errors import AdapterError

MAGIC = b"GDCE"
VERSION = 1
DTYPE_F32 = 0


def write_archive(destination, d: int,
                  classes: list[tuple[str, np.ndarray]]) -> None:
    """Write ``classes`` (label, rows-by-d float32 block) to ``destination``."""
    if d < 1:
        raise AdapterError(f"embedding dimension must be positive, got {d}")
    seen = set()
    with open(destination, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<HBI", VERSION, DTYPE_F32, d))
        for label, block in classes:
            if label in seen:
                raise AdapterError(f"duplicate class label {label!r}")
            seen.add(label)
            encoded = label.encode("utf-8")
            if not 0 < len(encoded) < 2 ** 16:
                raise AdapterError(f"label {label!r} not encodable")
            rows = np.ascontiguousarray(block, dtype="<f4")
            if rows.ndim != 2 or rows.shape[1] != d:
                raise AdapterError(
                    f"class {label!r}: expected shape (n, {d}), "
                    f"got {rows.shape}")
            if rows.shape[0] == 0:
                raise AdapterError(f"class {label!r} has no rows")
            if not np.all(np.isfinite(rows)):
                raise AdapterError(
                    f"class {label!r} contains non-finite values")
            fh.write(struct.pack("<H", len(encoded)))
            fh.write(encoded)
            fh.write(struct.pack("<I", rows.shape[0]))
            fh.write(rows.data)
        fh.write(struct.pack("<I", 0))
