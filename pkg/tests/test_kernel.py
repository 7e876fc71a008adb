import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from glptest.data import Dataset
from glptest.errors import EmptyFeatureMapError
from glptest.kernel import LPKernel, feature_map, fuse, gram
from glptest.sim import ScenarioSpec, generate


def three_sample(seed=0, d=500, n=25):
    spec = ScenarioSpec("location", d, [n, n, n], {"shifts": [0.0, 1.5, 3.0]}, seed)
    return generate(spec)


def test_all_binary_order_two_is_empty():
    x = np.array([[0, 1], [1, 0], [0, 0], [1, 1]], dtype=float)
    with pytest.raises(EmptyFeatureMapError):
        feature_map(x, 2)


def test_continuous_columns_all_kept():
    rng = np.random.default_rng(1)
    fm = feature_map(rng.normal(size=(40, 500)), 1)
    assert fm.values.shape == (40, 500)
    np.testing.assert_allclose(fm.values.mean(axis=0), 0, atol=1e-10)
    np.testing.assert_allclose(np.mean(fm.values**2, axis=0), 1, atol=1e-8)


def test_constant_column_excluded():
    rng = np.random.default_rng(2)
    x = rng.normal(size=(20, 10))
    x[:, 4] = 3.0
    fm = feature_map(x, 1)
    assert fm.values.shape[1] == 9
    assert fm.excluded_columns.tolist() == [4]
    assert 4 not in fm.kept_columns


def test_gram_zero_rows():
    k = gram(np.zeros((3, 2)), c=0.5)
    np.testing.assert_allclose(k.w, 0.25)


def test_gram_arithmetic():
    phi = np.array([[1.0, 0.5], [1.0, 1.0]])  # inner product 1.5
    k = gram(phi, c=0.5, scale="sum")
    assert k.w[0, 1] == pytest.approx(4.0)
    # the default divides the inner product by d' = 2
    assert gram(phi, c=0.5).w[0, 1] == pytest.approx((0.5 + 0.75) ** 2)


def test_gram_rejects_negative_c():
    with pytest.raises(ValueError):
        gram(np.zeros((2, 1)), c=-1)


@pytest.mark.parametrize("scale", ["mean", "sum"])
def test_gram_symmetric_psd(scale):
    rng = np.random.default_rng(4)
    w = gram(feature_map(rng.normal(size=(30, 12)), 1), 0.5, scale).w
    assert np.max(np.abs(w - w.T)) <= 1e-12
    assert np.all(w >= 0)
    assert np.linalg.eigvalsh(w).min() >= -1e-8 * np.trace(w)


def test_three_sample_block_means():
    ds = three_sample()
    w = gram(feature_map(ds, 1)).w
    blocks = np.zeros((3, 3))
    for a in range(3):
        for b in range(3):
            blocks[a, b] = w[np.ix_(ds.y == a + 1, ds.y == b + 1)].mean()
    for a in range(3):
        for b in range(3):
            if a != b:
                assert blocks[a, a] > blocks[a, b]


def test_fuse_singleton_and_pair():
    rng = np.random.default_rng(5)
    x = rng.normal(size=(15, 4))
    w1, w2 = gram(feature_map(x, 1)), gram(feature_map(x, 2))
    assert fuse([w1]) is w1
    f = fuse([w1, w2])
    np.testing.assert_array_equal(f.w, w1.w + w2.w)
    assert f.order == "fused{1,2}"
    np.testing.assert_array_equal(fuse([w1, w1]).w, 2 * w1.w)
    assert np.linalg.eigvalsh(f.w).min() >= -1e-8 * np.trace(f.w)


def test_fuse_rejects_empty_and_mismatch():
    with pytest.raises(ValueError):
        fuse([])
    a = LPKernel(1, np.ones((2, 2)), 0.5)
    b = LPKernel(2, np.ones((3, 3)), 0.5)
    with pytest.raises(ValueError):
        fuse([a, b])


def test_fused_label_flattens():
    a = LPKernel(1, np.ones((2, 2)), 0.5)
    b = LPKernel(2, np.ones((2, 2)), 0.5)
    c = LPKernel(4, np.ones((2, 2)), 0.5)
    assert fuse([fuse([a, b]), c]).order == "fused{1,2,4}"


def test_dataset_input_equals_array_input():
    rng = np.random.default_rng(6)
    x = rng.normal(size=(10, 3))
    ds = Dataset(x, [1] * 5 + [2] * 5)
    np.testing.assert_array_equal(feature_map(ds, 2).values, feature_map(x, 2).values)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**31 - 1), st.integers(4, 25), st.integers(1, 6))
def test_gram_column_permutation_invariant(seed, n, d):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(n, d))
    perm = rng.permutation(d)
    for scale in ("mean", "sum"):
        a = gram(feature_map(x, 1), scale=scale).w
        b = gram(feature_map(x[:, perm], 1), scale=scale).w
        np.testing.assert_allclose(a, b, atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**31 - 1), st.integers(4, 25), st.integers(1, 6))
def test_rank_invariance(seed, n, d):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(n, d))
    warped = np.exp(x)
    warped[:, ::2] = np.arctan(3 * x[:, ::2]) + x[:, ::2] ** 3
    np.testing.assert_allclose(gram(feature_map(x, 1)).w, gram(feature_map(warped, 1)).w, atol=1e-12)
