"""Labeled datasets and scatter matrices: frozen values and decompositions."""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rlda import ContractViolation, LabeledDataset, ScatterPair, class_means, scatter_matrices


def _random_dataset(seed, max_dim=32, max_per=32, max_classes=8):
    rng = np.random.default_rng(seed)
    d = int(rng.integers(1, max_dim + 1))
    c = int(rng.integers(2, max_classes + 1))
    counts = rng.integers(1, max_per + 1, size=c)
    labels = np.repeat(np.arange(c), counts)
    data = rng.standard_normal((d, labels.shape[0])) * rng.uniform(0.5, 3.0)
    return LabeledDataset.from_arrays(data, labels)


# ---------------------------------------------------------------- frozen values


def test_scalar_two_class_scatter_values():
    # class means 1 and 5, global mean 3:
    #   s_w = (0-1)^2 + (2-1)^2 + (4-5)^2 + (6-5)^2              = 4
    #   s_b = 2*(1-3)^2 + 2*(5-3)^2                              = 16
    #   s_t = (0-3)^2 + (2-3)^2 + (4-3)^2 + (6-3)^2              = 20
    ds = LabeledDataset.from_arrays(
        np.array([[0.0, 2.0, 4.0, 6.0]]), np.array([0, 0, 1, 1])
    )
    pair = scatter_matrices(ds)
    np.testing.assert_allclose(pair.s_w, [[4.0]], atol=1e-14)
    np.testing.assert_allclose(pair.s_b, [[16.0]], atol=1e-14)
    np.testing.assert_allclose(pair.s_w + pair.s_b, [[20.0]], atol=1e-14)


def test_class_means_single_class():
    ds = LabeledDataset.from_arrays(np.array([[0.0, 2.0], [0.0, 0.0]]), np.array([0, 0]))
    means, grand = class_means(ds)
    np.testing.assert_allclose(means, [[1.0], [0.0]], atol=1e-15)
    np.testing.assert_allclose(grand, [1.0, 0.0], atol=1e-15)


def test_scatter_against_looped_reference():
    # the vectorized Gram products must match the naive double loop
    ds = _random_dataset(7)
    pair = scatter_matrices(ds)
    means, grand = class_means(ds)
    s_w = np.zeros((ds.n_features, ds.n_features))
    s_b = np.zeros_like(s_w)
    for n in range(ds.n_samples):
        dev = ds.data[:, n] - means[:, ds.labels[n]]
        s_w += np.outer(dev, dev)
    for c in range(ds.n_classes):
        dev = means[:, c] - grand
        s_b += ds.class_counts[c] * np.outer(dev, dev)
    np.testing.assert_allclose(pair.s_w, s_w, rtol=1e-12, atol=1e-12)
    np.testing.assert_allclose(pair.s_b, s_b, rtol=1e-12, atol=1e-12)


def test_singleton_class_contributes_nothing_within():
    ds = LabeledDataset.from_arrays(
        np.array([[0.0, 2.0, 9.0]]), np.array([0, 0, 1])
    )
    pair = scatter_matrices(ds)
    # the singleton class sits exactly on its own mean
    assert pair.s_w[0, 0] == pytest.approx(2.0)


# ---------------------------------------------------------------- decomposition


@settings(max_examples=50)
@given(seed=st.integers(0, 100_000))
def test_within_plus_between_equals_total(seed):
    ds = _random_dataset(seed)
    pair = scatter_matrices(ds)
    centered = ds.data - ds.data.mean(axis=1, keepdims=True)
    total = centered @ centered.T
    scale = max(np.linalg.norm(total), np.finfo(float).tiny)
    assert np.linalg.norm(pair.s_w + pair.s_b - total) / scale <= 1e-10


@given(seed=st.integers(0, 100_000))
def test_scatter_invariant_under_sample_permutation(seed):
    ds = _random_dataset(seed)
    rng = np.random.default_rng(seed + 1)
    perm = rng.permutation(ds.n_samples)
    shuffled = LabeledDataset.from_arrays(ds.data[:, perm], ds.labels[perm])
    a, b = scatter_matrices(ds), scatter_matrices(shuffled)
    assert np.linalg.norm(a.s_w - b.s_w) <= 1e-12 * max(np.linalg.norm(a.s_w), 1.0)
    assert np.linalg.norm(a.s_b - b.s_b) <= 1e-12 * max(np.linalg.norm(a.s_b), 1.0)


@given(seed=st.integers(0, 100_000))
def test_scatter_invariant_under_translation(seed):
    ds = _random_dataset(seed)
    shift = np.random.default_rng(seed + 2).standard_normal((ds.n_features, 1)) * 5.0
    moved = LabeledDataset.from_arrays(ds.data + shift, ds.labels)
    a, b = scatter_matrices(ds), scatter_matrices(moved)
    assert np.linalg.norm(a.s_w - b.s_w) <= 1e-10 * max(np.linalg.norm(a.s_w), 1.0)
    assert np.linalg.norm(a.s_b - b.s_b) <= 1e-10 * max(np.linalg.norm(a.s_b), 1.0)


@given(seed=st.integers(0, 100_000))
def test_scatter_outputs_are_symmetric_psd(seed):
    pair = scatter_matrices(_random_dataset(seed))
    pair.check()  # raises on asymmetry or a negative eigenvalue


# ---------------------------------------------------------------- validation


def test_dataset_counts_sum_to_samples():
    ds = _random_dataset(3)
    assert int(ds.class_counts.sum()) == ds.n_samples


def test_dataset_rejects_label_length_mismatch():
    with pytest.raises(ContractViolation, match="does not match"):
        LabeledDataset.from_arrays(np.zeros((2, 3)), np.array([0, 1]))


def test_dataset_rejects_non_integer_labels():
    with pytest.raises(ContractViolation, match="integers"):
        LabeledDataset.from_arrays(np.zeros((2, 2)), np.array([0.0, 1.0]))


def test_dataset_rejects_sparse_labels():
    # label 2 with no label 1 is not dense in [0, C)
    with pytest.raises(ContractViolation):
        LabeledDataset.from_arrays(np.zeros((2, 2)), np.array([0, 2]))


def test_dataset_rejects_non_finite_data():
    with pytest.raises(ContractViolation, match="non-finite"):
        LabeledDataset.from_arrays(np.array([[0.0, np.nan]]), np.array([0, 1]))


def test_dataset_rejects_empty():
    with pytest.raises(ContractViolation, match="empty"):
        LabeledDataset.from_arrays(np.zeros((2, 0)), np.array([], dtype=int))


def test_dataset_rejects_wrong_counts():
    with pytest.raises(ContractViolation, match="class_counts"):
        LabeledDataset(np.zeros((1, 2)), np.array([0, 1]), np.array([2, 0]))


def test_dataset_arrays_are_read_only():
    ds = _random_dataset(1)
    with pytest.raises(ValueError):
        ds.data[0, 0] = 1.0
    with pytest.raises(ValueError):
        ds.labels[0] = 1


def test_scatter_pair_rejects_mismatched_shapes():
    with pytest.raises(ContractViolation, match="square and matching"):
        ScatterPair(np.eye(2), np.eye(3))


def test_scatter_pair_check_flags_asymmetry():
    pair = ScatterPair(np.array([[1.0, 0.5], [0.0, 1.0]]), np.eye(2))
    with pytest.raises(ContractViolation, match="not symmetric"):
        pair.check()


def test_scatter_pair_check_flags_negative_eigenvalue():
    pair = ScatterPair(np.diag([1.0, -1.0]), np.eye(2))
    with pytest.raises(ContractViolation, match="negative eigenvalue"):
        pair.check()
