"""Binary interchange formats for embeddings and fitted models, plus
prompt-manifest expansion.

Embedding archive (".gdce", little-endian throughout):

    magic   "GDCE"        4 bytes
    version u16 = 1
    dtype   u8  = 0       (single-precision floats)
    d       u32
    per class:
        label length u16 (> 0)
        label        UTF-8 bytes
        rows         u32
        values       rows * d * f32, row-major
    end marker u32 = 0    (reads as a zero label length)

Model file (".gdcm"):

    magic   "GDCM"        4 bytes
    version u16 = 1
    d       u32
    k       u32
    eps     f64
    per class (k records):
        label length u16, label UTF-8
        prior        f64
        n_ref        u32
        mean         d * f64
        inv. factor  d(d+1)/2 * f64, packed lower triangle, row-major
        log_det_cov  f64

Embeddings are stored single-precision (matching encoder output, halving
archive size) and upcast to double at fit/score time.  Model doubles are
stored raw so a reloaded model reproduces posteriors bitwise.
"""

from __future__ import annotations

import importlib.resources
import struct
from dataclasses import dataclass
from typing import BinaryIO, Iterable, Iterator

import numpy as np

from .errors import (
    BadMagic,
    DimensionMismatch,
    DuplicateLabel,
    EmptyInput,
    MissingPlaceholder,
    NonFiniteValue,
    TruncatedFile,
    UnsupportedVersion,
)

__all__ = [
    "EmbeddingArchive",
    "GenerationManifest",
    "ManifestEntry",
    "default_templates",
    "expand_manifest",
    "write_manifest",
    "read_manifest",
    "write_embeddings",
    "read_embeddings",
    "write_model",
    "read_model",
    "write_model_stream",
    "scan_model",
    "ModelHeader",
    "ModelClassRef",
]

EMBED_MAGIC = b"GDCE"
MODEL_MAGIC = b"GDCM"
FORMAT_VERSION = 1
DTYPE_F32 = 0


@dataclass
class EmbeddingArchive:
    """Named classes, each an N x d block of single-precision embeddings."""

    d: int
    classes: list[tuple[str, np.ndarray]]

    def __post_init__(self):
        if self.d < 1:
            raise DimensionMismatch(f"d must be >= 1, got {self.d}")
        seen = set()
        normalized = []
        for label, block in self.classes:
            if not label:
                raise DuplicateLabel("class labels must be non-empty")
            if label in seen:
                raise DuplicateLabel(f"duplicate class label {label!r}")
            seen.add(label)
            block = np.asarray(block, dtype=np.float32)
            if block.ndim != 2 or block.shape[1] != self.d:
                raise DimensionMismatch(
                    f"class {label!r}: block shape {block.shape} does not "
                    f"match d={self.d}")
            if not np.all(np.isfinite(block)):
                raise NonFiniteValue(
                    f"class {label!r} contains non-finite values")
            normalized.append((label, block))
        self.classes = normalized

    @property
    def labels(self) -> list[str]:
        return [label for label, _ in self.classes]

    def block(self, label: str) -> np.ndarray:
        for lab, blk in self.classes:
            if lab == label:
                return blk
        raise KeyError(label)


# -- prompt manifests --------------------------------------------------------

@dataclass
class ManifestEntry:
    label: str
    prompt: str
    count: int
    seed: int


@dataclass
class GenerationManifest:
    entries: list[ManifestEntry]
    templates: list[str]
    per_class_total: int


def default_templates() -> list[str]:
    text = (importlib.resources.files("gdc") / "templates.txt").read_text(
        encoding="utf-8")
    return [line for line in text.splitlines() if line]


def expand_manifest(labels, templates=None, per_template: int = 30,
                    seed: int = 0) -> GenerationManifest:
    """Expand class labels through caption templates into generation records.

    Each (label, template) pair becomes one entry asking for
    ``per_template`` images under a distinct derived seed.
    """
    labels = list(labels)
    templates = default_templates() if templates is None else list(templates)
    if not labels:
        raise EmptyInput("no class labels given")
    if not templates:
        raise EmptyInput("no prompt templates given")
    if per_template < 1:
        raise EmptyInput(f"per_template must be >= 1, got {per_template}")
    for t in templates:
        if t.count("{}") != 1:
            raise MissingPlaceholder(
                f"template {t!r} must contain the placeholder '{{}}' "
                f"exactly once")
    entries = []
    idx = 0
    for label in labels:
        for template in templates:
            entries.append(ManifestEntry(
                label=label,
                prompt=template.replace("{}", label),
                count=per_template,
                seed=seed + idx,
            ))
            idx += 1
    return GenerationManifest(entries=entries, templates=templates,
                              per_class_total=per_template * len(templates))


def write_manifest(manifest: GenerationManifest, destination) -> None:
    """One tab-separated record per line: label, prompt, count, seed."""
    with open(destination, "w", encoding="utf-8") as fh:
        for e in manifest.entries:
            fh.write(f"{e.label}\t{e.prompt}\t{e.count}\t{e.seed}\n")


def read_manifest(source) -> GenerationManifest:
    entries = []
    with open(source, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 4:
                raise EmptyInput(
                    f"{source}: line {lineno}: expected 4 tab-separated "
                    f"fields, got {len(parts)}")
            label, prompt, count, seed = parts
            entries.append(ManifestEntry(label, prompt, int(count), int(seed)))
    if not entries:
        raise EmptyInput(f"{source}: manifest is empty")
    per_class = {}
    for e in entries:
        per_class[e.label] = per_class.get(e.label, 0) + e.count
    totals = set(per_class.values())
    total = totals.pop() if len(totals) == 1 else max(per_class.values())
    return GenerationManifest(entries=entries, templates=[],
                              per_class_total=total)


# -- low-level binary helpers ------------------------------------------------

def _read_exact(fh: BinaryIO, n: int, what: str) -> bytes:
    offset = fh.tell()
    data = fh.read(n)
    if len(data) != n:
        raise TruncatedFile(
            f"unexpected end of file while reading {what} "
            f"({len(data)} of {n} bytes)", offset=offset)
    return data


def _read_struct(fh: BinaryIO, fmt: str, what: str):
    size = struct.calcsize(fmt)
    return struct.unpack(fmt, _read_exact(fh, size, what))


def _read_label(fh: BinaryIO, length: int) -> str:
    raw = _read_exact(fh, length, "class label")
    return raw.decode("utf-8")


# -- embedding archives ------------------------------------------------------

def write_embeddings(archive: EmbeddingArchive, destination) -> None:
    with open(destination, "wb") as fh:
        fh.write(EMBED_MAGIC)
        fh.write(struct.pack("<HBI", FORMAT_VERSION, DTYPE_F32, archive.d))
        for label, block in archive.classes:
            encoded = label.encode("utf-8")
            fh.write(struct.pack("<H", len(encoded)))
            fh.write(encoded)
            fh.write(struct.pack("<I", block.shape[0]))
            fh.write(np.ascontiguousarray(block, dtype="<f4").tobytes())
        fh.write(struct.pack("<I", 0))


def read_embeddings(source) -> EmbeddingArchive:
    with open(source, "rb") as fh:
        magic = _read_exact(fh, 4, "magic")
        if magic != EMBED_MAGIC:
            raise BadMagic(f"bad magic {magic!r}, expected {EMBED_MAGIC!r}",
                           offset=0)
        (version,) = _read_struct(fh, "<H", "version")
        if version != FORMAT_VERSION:
            raise UnsupportedVersion(
                f"unsupported embedding archive version {version}", offset=4)
        (dtype,) = _read_struct(fh, "<B", "dtype")
        if dtype != DTYPE_F32:
            raise UnsupportedVersion(f"unsupported dtype code {dtype}",
                                     offset=6)
        (d,) = _read_struct(fh, "<I", "dimension")
        if d < 1:
            raise DimensionMismatch(f"{source}: d must be >= 1, got {d}")
        classes = []
        seen = set()
        while True:
            (label_len,) = _read_struct(fh, "<H", "label length")
            if label_len == 0:
                (tail,) = _read_struct(fh, "<H", "end marker")
                if tail != 0:
                    raise TruncatedFile("malformed end marker",
                                        offset=fh.tell() - 2)
                break
            label = _read_label(fh, label_len)
            if label in seen:
                raise DuplicateLabel(f"{source}: duplicate class {label!r}")
            seen.add(label)
            (rows,) = _read_struct(fh, "<I", f"row count of class {label!r}")
            data_offset = fh.tell()
            raw = fh.read(rows * d * 4)
            if len(raw) != rows * d * 4:
                raise TruncatedFile(
                    f"class {label!r}: embedding block truncated "
                    f"({len(raw)} of {rows * d * 4} bytes)",
                    offset=data_offset)
            block = np.frombuffer(raw, dtype="<f4").reshape(rows, d)
            finite = np.isfinite(block)
            if not finite.all():
                bad = int(np.argmin(finite.ravel()))
                raise NonFiniteValue(
                    f"class {label!r}: non-finite value at row "
                    f"{bad // d}, column {bad % d}",
                    offset=data_offset + bad * 4)
            classes.append((label, block.copy()))
    return EmbeddingArchive(d=d, classes=classes)


# -- model files -------------------------------------------------------------

@dataclass
class ModelHeader:
    d: int
    k: int
    eps: float


@dataclass
class ModelClassRef:
    """Byte offsets of one class record inside a model file."""

    label: str
    prior: float
    n_ref: int
    mean_offset: int
    factor_offset: int
    log_det_cov: float


def _write_model_class(fh: BinaryIO, label: str, prior: float, n_ref: int,
                       mean: np.ndarray, packed_factor: np.ndarray,
                       log_det_cov: float) -> None:
    encoded = label.encode("utf-8")
    fh.write(struct.pack(f"<H{len(encoded)}sdI",
                         len(encoded), encoded, prior, n_ref))
    # memoryview of the contiguous array avoids a tobytes() copy, which
    # matters when streaming multi-gigabyte models.
    fh.write(np.ascontiguousarray(mean, dtype="<f8").data)
    fh.write(np.ascontiguousarray(packed_factor, dtype="<f8").data)
    fh.write(struct.pack("<d", log_det_cov))


def write_model_stream(destination, d: int, k: int, eps: float,
                       records: Iterable[tuple]) -> None:
    """Write a model file from an iterator of
    (label, prior, n_ref, mean, packed_factor, log_det_cov) tuples,
    never holding more than one class in memory.
    """
    with open(destination, "wb") as fh:
        fh.write(MODEL_MAGIC)
        fh.write(struct.pack("<HIId", FORMAT_VERSION, d, k, eps))
        count = 0
        for label, prior, n_ref, mean, packed, log_det in records:
            _write_model_class(fh, label, prior, n_ref, mean, packed, log_det)
            count += 1
        if count != k:
            raise DimensionMismatch(
                f"model header promises {k} classes, got {count}")


def write_model(model, destination) -> None:
    eps = model.components[0].eps
    write_model_stream(
        destination, model.d, model.k, eps,
        ((g.label, float(model.priors[i]), g.n_ref, g.mean,
          g.inv_factor.packed, g.log_det_cov)
         for i, g in enumerate(model.components)))


def _read_model_header(fh: BinaryIO) -> ModelHeader:
    magic = _read_exact(fh, 4, "magic")
    if magic != MODEL_MAGIC:
        raise BadMagic(f"bad magic {magic!r}, expected {MODEL_MAGIC!r}",
                       offset=0)
    version, d, k, eps = _read_struct(fh, "<HIId", "model header")
    if version != FORMAT_VERSION:
        raise UnsupportedVersion(f"unsupported model version {version}",
                                 offset=4)
    if d < 1 or k < 1:
        raise DimensionMismatch(f"invalid model header: d={d}, k={k}")
    return ModelHeader(d=d, k=k, eps=eps)


def read_model(source):
    """Load a model file back into a GdcModel."""
    from . import linalg
    from .gaussian import ClassGaussian
    from .mixture import GdcModel

    with open(source, "rb") as fh:
        header = _read_model_header(fh)
        d = header.d
        psize = d * (d + 1) // 2
        components = []
        priors = []
        labels = []
        for i in range(header.k):
            (label_len,) = _read_struct(fh, "<H", "label length")
            label = _read_label(fh, label_len)
            prior, n_ref = _read_struct(fh, "<dI",
                                        f"class {label!r} metadata")
            mean = np.frombuffer(
                _read_exact(fh, d * 8, f"class {label!r} mean"),
                dtype="<f8").copy()
            packed = np.frombuffer(
                _read_exact(fh, psize * 8, f"class {label!r} factor"),
                dtype="<f8").copy()
            (log_det,) = _read_struct(fh, "<d",
                                      f"class {label!r} log-determinant")
            components.append(ClassGaussian(
                class_id=i, label=label, mean=mean,
                inv_factor=linalg.LowerTriangular(d, packed),
                log_det_cov=log_det, n_ref=n_ref, eps=header.eps))
            priors.append(prior)
            labels.append(label)
        extra = fh.read(1)
        if extra:
            raise TruncatedFile("trailing bytes after last class record",
                                offset=fh.tell() - 1)
    return GdcModel(components=components, priors=np.array(priors),
                    labels=labels, d=d)


def scan_model(source) -> tuple[ModelHeader, list[ModelClassRef]]:
    """Index a model file without loading the numeric payload.

    Used by the benchmark path to stream class blocks from disk when the
    whole model does not fit in memory.
    """
    refs = []
    with open(source, "rb") as fh:
        header = _read_model_header(fh)
        d = header.d
        psize = d * (d + 1) // 2
        for _ in range(header.k):
            (label_len,) = _read_struct(fh, "<H", "label length")
            label = _read_label(fh, label_len)
            prior, n_ref = _read_struct(fh, "<dI",
                                        f"class {label!r} metadata")
            mean_offset = fh.tell()
            factor_offset = mean_offset + d * 8
            fh.seek(factor_offset + psize * 8)
            (log_det,) = _read_struct(fh, "<d",
                                      f"class {label!r} log-determinant")
            refs.append(ModelClassRef(label=label, prior=prior, n_ref=n_ref,
                                      mean_offset=mean_offset,
                                      factor_offset=factor_offset,
                                      log_det_cov=log_det))
    return header, refs
