"""Dataset ingestion: IDX image files, numeric CSV, preprocessing, synthesis.

IDX is the big-endian binary layout used by the classic handwritten-digit
releases: a 4-byte magic, big-endian int32 dimensions, then raw unsigned
bytes.  CSV ingestion handles plain numeric tables with one sample per row
and an arbitrary label column.
"""
from __future__ import annotations

import csv
import struct
from dataclasses import dataclass

import numpy as np

from .errors import ContractViolation, ParseError
from .scatter import LabeledDataset

IMAGE_MAGIC = 0x00000803  # unsigned byte, 3 dimensions
LABEL_MAGIC = 0x00000801  # unsigned byte, 1 dimension


@dataclass(frozen=True)
class RawImageSet:
    """Unprocessed image stack (N x H x W, values 0..255) with integer labels."""

    images: np.ndarray
    labels: np.ndarray

    def __post_init__(self) -> None:
        images = np.asarray(self.images)
        labels = np.asarray(self.labels)
        if images.ndim != 3:
            raise ContractViolation(f"images must be N x H x W, got ndim {images.ndim}")
        if labels.ndim != 1 or labels.shape[0] != images.shape[0]:
            raise ContractViolation("labels length does not match image count")
        if labels.size and labels.min() < 0:
            raise ContractViolation("labels must be non-negative")
        object.__setattr__(self, "images", images)
        object.__setattr__(self, "labels", labels)

    @property
    def n_images(self) -> int:
        return self.images.shape[0]


def _read_exact(fh, count: int, offset: int, path: str) -> bytes:
    buf = fh.read(count)
    if len(buf) != count:
        raise ParseError(
            f"{path}: truncated at offset {offset}: needed {count} bytes, got {len(buf)}"
        )
    return buf


def load_idx(images_path: str, labels_path: str) -> RawImageSet:
    """Read an IDX image file and its companion label file.

    Raises ParseError (with byte offsets) on bad magics or truncation, and
    when the two files disagree on the sample count.
    """
    with open(images_path, "rb") as fh:
        header = _read_exact(fh, 16, 0, images_path)
        magic, n, h, w = struct.unpack(">iiii", header)
        if magic != IMAGE_MAGIC:
            raise ParseError(
                f"{images_path}: bad magic 0x{magic & 0xFFFFFFFF:08x} at offset 0 "
                f"(expected 0x{IMAGE_MAGIC:08x})"
            )
        if n < 0 or h <= 0 or w <= 0:
            raise ParseError(f"{images_path}: invalid dimensions {n} x {h} x {w}")
        pixels = _read_exact(fh, n * h * w, 16, images_path)
        if fh.read(1):
            raise ParseError(f"{images_path}: trailing bytes after offset {16 + n * h * w}")
    images = np.frombuffer(pixels, dtype=np.uint8).reshape(n, h, w)

    with open(labels_path, "rb") as fh:
        header = _read_exact(fh, 8, 0, labels_path)
        magic, n_labels = struct.unpack(">ii", header)
        if magic != LABEL_MAGIC:
            raise ParseError(
                f"{labels_path}: bad magic 0x{magic & 0xFFFFFFFF:08x} at offset 0 "
                f"(expected 0x{LABEL_MAGIC:08x})"
            )
        raw = _read_exact(fh, n_labels, 8, labels_path)
        if fh.read(1):
            raise ParseError(f"{labels_path}: trailing bytes after offset {8 + n_labels}")
    labels = np.frombuffer(raw, dtype=np.uint8)

    if n != n_labels:
        raise ParseError(f"image count {n} != label count {n_labels}")
    return RawImageSet(images, labels.astype(np.int64))


def write_idx(raw: RawImageSet, images_path: str, labels_path: str) -> None:
    """Write a RawImageSet in IDX layout (inverse of load_idx on valid data)."""
    images = np.ascontiguousarray(raw.images, dtype=np.uint8)
    labels = np.ascontiguousarray(raw.labels, dtype=np.uint8)
    n, h, w = images.shape
    with open(images_path, "wb") as fh:
        fh.write(struct.pack(">iiii", IMAGE_MAGIC, n, h, w))
        fh.write(images.tobytes())
    with open(labels_path, "wb") as fh:
        fh.write(struct.pack(">ii", LABEL_MAGIC, n))
        fh.write(labels.tobytes())


def densify_labels(values: list) -> tuple[np.ndarray, np.ndarray]:
    """Map arbitrary label values to dense 0..C-1 in first-appearance order."""
    mapping: dict = {}
    dense = np.empty(len(values), dtype=np.int64)
    for i, v in enumerate(values):
        if v not in mapping:
            mapping[v] = len(mapping)
        dense[i] = mapping[v]
    return dense, np.asarray(list(mapping.keys()))


def load_csv(path: str, label_column: int = -1, has_header: bool = False) -> LabeledDataset:
    """Read a numeric CSV with one sample per row and one label column.

    All cells must be numeric; rows must have equal length.  Label values are
    densified to 0..C-1 preserving first appearance, with the original values
    recorded on the dataset.  Errors name the offending row and column
    (1-based, header row included in the count).
    """
    rows: list[list[float]] = []
    raw_labels: list[float] = []
    width: int | None = None
    with open(path, "r", newline="") as fh:
        reader = csv.reader(fh)
        for lineno, row in enumerate(reader, start=1):
            if has_header and lineno == 1:
                continue
            if not row:
                continue
            if width is None:
                width = len(row)
                if width < 2:
                    raise ParseError(f"{path}: row {lineno} has {width} columns, need at least 2")
                col = label_column if label_column >= 0 else width + label_column
                if not (0 <= col < width):
                    raise ParseError(
                        f"{path}: label column {label_column} out of range for {width} columns"
                    )
            if len(row) != width:
                raise ParseError(
                    f"{path}: row {lineno} has {len(row)} fields, expected {width}"
                )
            values = []
            for j, cell in enumerate(row):
                try:
                    values.append(float(cell))
                except ValueError:
                    raise ParseError(
                        f"{path}: non-numeric cell {cell!r} at row {lineno}, column {j + 1}"
                    ) from None
            raw_labels.append(values.pop(col))
            rows.append(values)
    if not rows:
        raise ParseError(f"{path}: no data rows")
    dense, label_values = densify_labels(raw_labels)
    data = np.asarray(rows, dtype=float).T  # rows are samples; store columns
    return LabeledDataset.from_arrays(data, dense, label_values)


def write_csv(ds: LabeledDataset, path: str, label_column: int = -1) -> None:
    """Write one sample per row with the label in the requested column.

    Floats are written with repr (shortest round-trip form), so rewriting the
    same dataset is byte-identical.
    """
    d = ds.n_features
    col = label_column if label_column >= 0 else d + 1 + label_column
    if not (0 <= col <= d):
        raise ContractViolation(f"label column {label_column} out of range")
    labels = ds.label_values[ds.labels] if ds.label_values is not None else ds.labels
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        for i in range(ds.n_samples):
            fields = [repr(float(v)) for v in ds.data[:, i]]
            label = labels[i]
            text = str(int(label)) if float(label) == int(label) else repr(float(label))
            fields.insert(col, text)
            writer.writerow(fields)


def bilinear_resize(images: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Downsample an N x H x W stack by bilinear interpolation.

    Output pixel centers are mapped into input coordinates (pixel-center
    convention), so a 2x2 image resized to 1x1 yields the average of the four
    pixels.  Upsampling is rejected.
    """
    images = np.asarray(images, dtype=float)
    n, h, w = images.shape
    if out_h > h or out_w > w or out_h < 1 or out_w < 1:
        raise ContractViolation(f"target {out_h}x{out_w} must be within the source {h}x{w}")
    ys = (np.arange(out_h) + 0.5) * (h / out_h) - 0.5
    xs = (np.arange(out_w) + 0.5) * (w / out_w) - 0.5
    y0 = np.floor(ys).astype(int)
    x0 = np.floor(xs).astype(int)
    y1 = np.minimum(y0 + 1, h - 1)
    x1 = np.minimum(x0 + 1, w - 1)
    wy = (ys - y0)[None, :, None]
    wx = (xs - x0)[None, None, :]
    top = images[:, y0][:, :, x0] * (1 - wx) + images[:, y0][:, :, x1] * wx
    bottom = images[:, y1][:, :, x0] * (1 - wx) + images[:, y1][:, :, x1] * wx
    return top * (1 - wy) + bottom * wy


def preprocess(
    raw: RawImageSet, shuffle_seed: int, target_hw: tuple[int, int] | None = None
) -> LabeledDataset:
    """Vectorize an image set into a LabeledDataset.

    Optionally bilinearly downsamples to target_hw, scales intensities to
    [0, 1] by dividing by 255, flattens row-major into feature columns, and
    applies one seeded shuffle to the sample order.  Labels are densified by
    sorted unique value (shuffle-independent mapping).
    """
    if raw.n_images == 0:
        raise ContractViolation("image set is empty")
    images = np.asarray(raw.images, dtype=float)
    if target_hw is not None:
        images = bilinear_resize(images, target_hw[0], target_hw[1])
    images = images / 255.0
    n = images.shape[0]
    data = images.reshape(n, -1).T
    values, dense = np.unique(raw.labels, return_inverse=True)
    perm = np.random.default_rng(shuffle_seed).permutation(n)
    return LabeledDataset.from_arrays(data[:, perm], dense[perm], values)


def synth_gaussian_classes(
    dim: int, n_classes: int, per_class: int, spread: float, within_std: float, seed: int
) -> LabeledDataset:
    """Gaussian class blobs with orthonormal mean directions.

    Class means are spread * (columns of a seeded random orthonormal D x C
    matrix), so all pairwise mean distances equal spread * sqrt(2); samples
    add isotropic within_std noise.  Labels come out grouped by class.
    """
    if n_classes < 2:
        raise ContractViolation(f"need at least 2 classes, got {n_classes}")
    if dim < n_classes:
        raise ContractViolation(f"need dim >= n_classes, got {dim} < {n_classes}")
    if per_class < 1:
        raise ContractViolation("need at least one sample per class")
    if spread < 0 or within_std < 0:
        raise ContractViolation("spread and within_std must be non-negative")
    rng = np.random.default_rng(seed)
    basis, r = np.linalg.qr(rng.standard_normal((dim, n_classes)))
    basis = basis * np.sign(np.diag(r))
    means = spread * basis
    n = n_classes * per_class
    labels = np.repeat(np.arange(n_classes), per_class)
    data = means[:, labels] + within_std * rng.standard_normal((dim, n))
    return LabeledDataset.from_arrays(data, labels)
