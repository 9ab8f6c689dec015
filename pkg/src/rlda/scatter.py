"""Labeled datasets and within/between-class scatter matrices.

Data matrices hold one sample per column (D features x N samples).  Labels
are dense integers 0..C-1; ingestion code is responsible for densifying and
may record the original label values on the dataset.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractViolation


def _readonly(a: np.ndarray) -> np.ndarray:
    out = np.array(a, order="C")
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class LabeledDataset:
    data: np.ndarray          # D x N, float, one sample per column
    labels: np.ndarray        # N, int, dense in [0, C)
    class_counts: np.ndarray  # C, int, all positive
    label_values: np.ndarray | None = None  # original label per dense index

    def __post_init__(self) -> None:
        data = np.asarray(self.data, dtype=float)
        labels = np.asarray(self.labels)
        if data.ndim != 2:
            raise ContractViolation(f"data must be 2-d (features x samples), got ndim {data.ndim}")
        if labels.ndim != 1 or labels.shape[0] != data.shape[1]:
            raise ContractViolation(
                f"labels length {labels.shape} does not match {data.shape[1]} samples"
            )
        if not np.isfinite(data).all():
            raise ContractViolation("data contains non-finite entries")
        if labels.size == 0:
            raise ContractViolation("dataset is empty")
        if not np.issubdtype(labels.dtype, np.integer):
            raise ContractViolation(f"labels must be integers, got dtype {labels.dtype}")
        counts = np.asarray(self.class_counts)
        c = counts.shape[0]
        if labels.min() < 0 or labels.max() >= c:
            raise ContractViolation("labels are not dense in [0, C)")
        recount = np.bincount(labels, minlength=c)
        if not np.array_equal(recount, counts):
            raise ContractViolation("class_counts disagree with labels")
        if (counts <= 0).any():
            raise ContractViolation("every class must appear at least once")
        object.__setattr__(self, "data", _readonly(data))
        object.__setattr__(self, "labels", _readonly(labels.astype(np.int64)))
        object.__setattr__(self, "class_counts", _readonly(counts.astype(np.int64)))
        if self.label_values is not None:
            lv = np.asarray(self.label_values)
            if lv.shape[0] != c:
                raise ContractViolation("label_values length must equal the class count")
            object.__setattr__(self, "label_values", _readonly(lv))

    @classmethod
    def from_arrays(
        cls, data: np.ndarray, labels: np.ndarray, label_values: np.ndarray | None = None
    ) -> "LabeledDataset":
        labels = np.asarray(labels)
        if not np.issubdtype(labels.dtype, np.integer):
            raise ContractViolation(f"labels must be integers, got dtype {labels.dtype}")
        counts = (
            np.bincount(labels) if labels.size and labels.min() >= 0 else np.zeros(0, dtype=np.int64)
        )
        return cls(data, labels, counts, label_values)

    @property
    def n_features(self) -> int:
        return self.data.shape[0]

    @property
    def n_samples(self) -> int:
        return self.data.shape[1]

    @property
    def n_classes(self) -> int:
        return self.class_counts.shape[0]


@dataclass(frozen=True)
class ScatterPair:
    """Within-class and between-class scatter matrices of one dataset."""

    s_w: np.ndarray
    s_b: np.ndarray

    def __post_init__(self) -> None:
        sw = np.asarray(self.s_w, dtype=float)
        sb = np.asarray(self.s_b, dtype=float)
        if sw.ndim != 2 or sw.shape[0] != sw.shape[1] or sw.shape != sb.shape:
            raise ContractViolation(f"scatter matrices must be square and matching, got {sw.shape}, {sb.shape}")
        object.__setattr__(self, "s_w", _readonly(sw))
        object.__setattr__(self, "s_b", _readonly(sb))

    @property
    def dim(self) -> int:
        return self.s_w.shape[0]

    def check(self, sym_tol: float = 1e-12, psd_tol: float = 1e-10) -> None:
        """Verify symmetry (relative Frobenius) and positive semidefiniteness."""
        for name, s in (("s_w", self.s_w), ("s_b", self.s_b)):
            scale = max(np.linalg.norm(s), np.finfo(float).tiny)
            if np.linalg.norm(s - s.T) > sym_tol * scale:
                raise ContractViolation(f"{name} is not symmetric")
            w = np.linalg.eigvalsh(s)
            bound = -psd_tol * max(abs(w[-1]), 1.0)
            if w[0] < bound:
                raise ContractViolation(f"{name} has negative eigenvalue {w[0]:.3e}")


def class_means(ds: LabeledDataset) -> tuple[np.ndarray, np.ndarray]:
    """Per-class means (D x C) and the global mean (D,)."""
    d, c = ds.n_features, ds.n_classes
    means = np.empty((d, c))
    for k in range(c):
        means[:, k] = ds.data[:, ds.labels == k].mean(axis=1)
    return means, ds.data.mean(axis=1)


def scatter_matrices(ds: LabeledDataset) -> ScatterPair:
    """Raw (unnormalized) within-class and between-class scatter sums.

    s_w sums (x - class mean)(x - class mean)^T over all samples; s_b sums
    N_c (class mean - global mean)(class mean - global mean)^T over classes.
    Together they decompose the total scatter about the global mean.
    """
    means, grand = class_means(ds)
    centered = ds.data - means[:, ds.labels]
    s_w = centered @ centered.T
    spread = (means - grand[:, None]) * np.sqrt(ds.class_counts)
    s_b = spread @ spread.T
    # the Gram products are symmetric up to roundoff; make it exact
    return ScatterPair((s_w + s_w.T) / 2.0, (s_b + s_b.T) / 2.0)
