import numpy as np
import pytest

from thermolag.crossbasis import LagBasis, LagSpec, build_crossbasis, build_lag_basis, cumulative_contrast
from thermolag.errors import InvalidSpec, SeriesTooShort

from oracles import lag_expand


def test_lag_df1_is_moving_sum():
    spec = LagSpec(10, 1)
    B = build_lag_basis(spec)
    assert B.shape == (11, 1) and np.all(B == 1.0)
    x = np.random.default_rng(0).integers(0, 2, 60)
    cb = build_crossbasis(x, spec)
    sums = [x[t - 10:t + 1].sum() for t in range(10, 60)]
    assert cb.design_block[:, 0].tolist() == sums
    np.testing.assert_array_equal(cumulative_contrast(cb), [11.0])


def test_heat_wave_lag_basis_rank():
    B = build_lag_basis(LagSpec(10, 4))
    assert B.shape == (11, 4)
    eig = np.linalg.eigvalsh(B.T @ B)
    assert eig.min() > 1e-8 * eig.max()
    np.testing.assert_array_equal(B[:, 0], 1.0)


def test_lag_basis_smooth_in_lag():
    lb = LagBasis(LagSpec(10, 4))
    h = 1e-4
    for l in (1.5, 4.2, 6.9, 8.3):
        fd = (lb(l + h) - 2 * lb(l) + lb(l - h)) / h**2
        np.testing.assert_allclose(fd, lb(l, deriv=2), atol=1e-6 * max(1, np.abs(lb(l, 2)).max()))
    # fractional rows interpolate between the integer rows
    B = build_lag_basis(LagSpec(10, 4))
    mid = lb(np.arange(10) + 0.5)
    lo, hi = np.minimum(B[:-1], B[1:]), np.maximum(B[:-1], B[1:])
    span = hi - lo + 0.1
    assert np.all(mid >= lo - span) and np.all(mid <= hi + span)


def test_log_knots_option():
    lin = LagBasis(LagSpec(27, 4, "linear")).to_dict()["interior_knots"]
    log = LagBasis(LagSpec(27, 4, "log")).to_dict()["interior_knots"]
    np.testing.assert_allclose(lin, [9.0, 18.0])
    assert log[0] < lin[0] and log[1] < lin[1]


@pytest.mark.parametrize("bad", [(-1, 1), (3, 0), (2, 4), (5, 2, "cubic")])
def test_invalid_spec(bad):
    with pytest.raises(InvalidSpec):
        LagSpec(*bad)


def test_series_too_short():
    with pytest.raises(SeriesTooShort):
        build_crossbasis(np.zeros(10), LagSpec(10, 4))


def test_all_zero_flags():
    cb = build_crossbasis(np.zeros(100), LagSpec(10, 4))
    assert cb.design_block.shape == (90, 4)
    assert not cb.design_block.any()
    assert cb.dropped_prefix == 10


def test_unit_impulse_reproduces_lag_basis():
    spec = LagSpec(10, 4)
    x = np.zeros(60)
    t0 = 20
    x[t0] = 1
    cb = build_crossbasis(x, spec)
    for l in range(11):
        row = t0 + l - cb.dropped_prefix
        np.testing.assert_array_equal(cb.design_block[row], cb.lag_basis[l])


@pytest.mark.parametrize("spec", [LagSpec(10, 4), LagSpec(27, 3), LagSpec(7, 2), LagSpec(21, 4)])
def test_matches_explicit_lag_expansion(spec):
    rng = np.random.default_rng(spec.max_lag)
    x = rng.integers(0, 2, 200)
    cb = build_crossbasis(x, spec)
    expected = lag_expand(x, spec.max_lag) @ build_lag_basis(spec)
    assert np.max(np.abs(cb.design_block - expected)) <= 1e-12


def test_contrast_is_column_sum():
    rng = np.random.default_rng(7)
    for _ in range(50):
        L = int(rng.integers(0, 40))
        spec = LagSpec(L, int(rng.integers(1, min(L + 1, 6) + 1)))
        cb = build_crossbasis(np.zeros(L + 5), spec)
        np.testing.assert_array_equal(cumulative_contrast(cb), cb.lag_basis.sum(axis=0))


@pytest.mark.parametrize("spec", [LagSpec(10, 4), LagSpec(27, 3)])
def test_contrast_recovers_uniform_total(spec):
    B = build_lag_basis(spec)
    target = np.full(spec.max_lag + 1, np.log(1.5) / (spec.max_lag + 1))
    theta, *_ = np.linalg.lstsq(B, target, rcond=None)
    cb = build_crossbasis(np.zeros(spec.max_lag + 2), spec)
    assert np.exp(cumulative_contrast(cb) @ theta) == pytest.approx(1.5, abs=1e-9)
    assert np.exp(cumulative_contrast(cb) @ np.zeros(spec.lag_df)) == 1.0


def test_translation_equivariance():
    spec = LagSpec(10, 3)
    rng = np.random.default_rng(3)
    x = np.r_[rng.integers(0, 2, 150), np.zeros(20)]
    k = 7
    shifted = np.r_[np.zeros(k), x[:-k]]
    a = build_crossbasis(x, spec).design_block
    b = build_crossbasis(shifted, spec).design_block
    np.testing.assert_allclose(b[k:], a[:-k], atol=1e-12)
