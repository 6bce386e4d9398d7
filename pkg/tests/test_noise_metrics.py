import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from robustvb.errors import DegenerateMaskError, ParameterDomainError, UndefinedMetricError
from robustvb.noise_metrics import (
    NoiseSpec,
    corrupt,
    relative_error,
    standard_normals,
    weight_separation,
    _streams,
)


def test_zero_rate_is_identity():
    y = np.linspace(-1, 2, 30)
    res = corrupt(y, NoiseSpec(0.0, 1))
    np.testing.assert_array_equal(res.data, y)
    assert not res.mask.any()
    assert res.realized_rate == 0.0


def test_full_rate_corrupts_all():
    assert corrupt(np.ones(50), NoiseSpec(1.0, 1)).mask.all()


def test_large_sample_statistics():
    y = np.sin(np.linspace(0, 20, 100_000))
    res = corrupt(y, NoiseSpec(0.5, 42))
    assert abs(res.realized_rate - 0.5) <= 0.01
    dev = (res.data - y)[res.mask]
    assert abs(dev.std() / res.magnitude - 1) < 0.05
    assert res.magnitude == np.max(np.abs(y))


def test_box_muller_normals():
    z = standard_normals(_streams(3)[1], 200_000)
    assert abs(z.mean()) < 0.01 and abs(z.std() - 1) < 0.01
    assert abs(np.mean(z ** 4) - 3) < 0.05


@pytest.mark.parametrize("r", [-0.1, 1.5, float("nan")])
def test_rate_domain(r):
    with pytest.raises(ParameterDomainError):
        NoiseSpec(r, 0)


def test_empty_input():
    with pytest.raises(ParameterDomainError):
        corrupt(np.array([]), NoiseSpec(0.5))


def test_bitwise_reproducible():
    y = np.random.default_rng(0).normal(size=500)
    a = corrupt(y, NoiseSpec(0.4, 123))
    b = corrupt(y, NoiseSpec(0.4, 123))
    assert a.data.tobytes() == b.data.tobytes()
    assert a.mask.tobytes() == b.mask.tobytes()
    assert not np.array_equal(a.data, corrupt(y, NoiseSpec(0.4, 124)).data)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.0, 1.0), st.integers(0, 2 ** 63))
def test_clean_entries_untouched(r, seed):
    y = np.random.default_rng(1).normal(size=64)
    res = corrupt(y, NoiseSpec(r, seed))
    assert np.array_equal(res.data[~res.mask], y[~res.mask])


def test_nested_masks_and_aligned_draws():
    y = np.linspace(1, 2, 400)
    lo, hi = corrupt(y, NoiseSpec(0.2, 9)), corrupt(y, NoiseSpec(0.6, 9))
    assert np.all(hi.mask[lo.mask])
    both = lo.mask & hi.mask
    np.testing.assert_array_equal(lo.noise[both], hi.noise[both])


class TestRelativeError:
    def test_identity(self):
        u = np.array([1.0, -2.0])
        assert relative_error(u, u) == 0.0

    def test_doubling(self):
        u = np.array([3.0, 4.0])
        assert relative_error(2 * u, u) == 1.0

    def test_basis_shift(self):
        u = np.array([0.0, 2.0, 0.0])
        assert relative_error(u + np.eye(3)[0], u) == 0.5

    def test_zero_reference(self):
        with pytest.raises(UndefinedMetricError):
            relative_error(np.ones(2), np.zeros(2))

    @given(st.integers(0, 10_000))
    def test_triangle_bound(self, seed):
        rng = np.random.default_rng(seed)
        t, u, v = rng.normal(size=(3, 8))
        assert relative_error(u, t) <= relative_error(v, t) + np.linalg.norm(u - v) / np.linalg.norm(t) + 1e-12


class TestWeightSeparation:
    def test_constructed(self):
        mask = np.array([True, False, True, False])
        res = weight_separation(np.where(mask, 0.1, 10.0), mask)
        assert res.separated
        assert (res.min_clean, res.max_corrupt) == (10.0, 0.1)

    def test_all_equal(self):
        assert not weight_separation(np.ones(4), np.array([True, False, False, True])).separated

    @pytest.mark.parametrize("mask", [[True, True], [False, False]])
    def test_degenerate(self, mask):
        with pytest.raises(DegenerateMaskError):
            weight_separation(np.ones(2), np.array(mask))
