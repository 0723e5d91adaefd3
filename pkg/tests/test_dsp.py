import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from specfree import dsp

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)


def complex_arrays(shape):
    return st.tuples(arrays(float, shape, elements=finite), arrays(float, shape, elements=finite)).map(
        lambda ri: ri[0] + 1j * ri[1]
    )


@given(st.integers(1, 64).flatmap(lambda n: complex_arrays(n)))
def test_dft1_round_trip_and_parseval(f):
    F = dsp.dft1(f)
    scale = max(1.0, np.abs(f).max())
    assert np.abs(dsp.idft1(F) - f).max() < 1e-10 * scale
    assert np.sum(np.abs(F) ** 2) / len(f) == pytest.approx(np.sum(np.abs(f) ** 2), rel=1e-10, abs=1e-10 * scale**2)


@given(st.tuples(st.integers(1, 12), st.integers(1, 12)).flatmap(complex_arrays))
def test_dft2_round_trip_and_parseval(f):
    F = dsp.dft2(f)
    scale = max(1.0, np.abs(f).max())
    assert np.abs(dsp.idft2(F) - f).max() < 1e-10 * scale
    assert np.sum(np.abs(F) ** 2) / f.size == pytest.approx(np.sum(np.abs(f) ** 2), rel=1e-10, abs=1e-10 * scale**2)


def test_dft_sign_convention():
    # a single e^{+i 2 pi 3 j / N} lands in bin 3 with height N
    n = 16
    f = np.exp(2j * np.pi * 3 * np.arange(n) / n)
    F = dsp.dft1(f)
    assert abs(F[3] - n) < 1e-12 and np.abs(np.delete(F, 3)).max() < 1e-12


def test_triangular_window_values():
    t = np.array([-6.0, -5.0, -2.5, 0.0, 2.5, 5.0, 6.0])
    np.testing.assert_allclose(dsp.window(t, 10.0), [0, 0, 0.5, 1, 0.5, 0, 0])
    np.testing.assert_allclose(dsp.window(t, 10.0, "rectangular"), [0, 1, 1, 1, 1, 1, 0])


def test_l1_error_definition():
    a = np.array([1 + 0j, -2, 3j])
    b = np.array([1j, 1, 0])
    assert dsp.spectrum_l1_error(a, b) == pytest.approx((0 + 1 + 3) / 3)
    with pytest.raises(ValueError):
        dsp.spectrum_l1_error(a, b[:2])


@given(
    st.integers(4, 40).flatmap(lambda n: st.tuples(st.just(n), st.integers(0, n - 1))),
    st.booleans(),
    st.floats(-np.pi, np.pi),
    st.integers(0, 2**32 - 1),
)
def test_align_recovers_constructed_1d(n_shift, reflect, phase, seed):
    n, shift = n_shift
    F = np.random.default_rng(seed).normal(size=(n, 2)) @ np.array([1, 1j])
    tr = dsp.AmbiguityTransform((shift,), reflect, phase)
    moved = tr.apply(F)
    found, back = dsp.align_ambiguities(moved, F)
    np.testing.assert_allclose(back, F, atol=1e-10)
    np.testing.assert_allclose(found.invert(back), moved, atol=1e-10)


@given(st.integers(0, 8), st.integers(0, 6), st.booleans(), st.integers(0, 2**32 - 1))
def test_align_recovers_constructed_2d(s0, s1, reflect, seed):
    rng = np.random.default_rng(seed)
    F = rng.normal(size=(9, 7)) + 1j * rng.normal(size=(9, 7))
    moved = dsp.AmbiguityTransform((s0, s1), reflect, 0.7).apply(F)
    _, back = dsp.align_ambiguities(moved, F)
    np.testing.assert_allclose(back, F, atol=1e-10)


def test_transform_invert_round_trip(rng):
    F = rng.normal(size=11) + 1j * rng.normal(size=11)
    tr = dsp.AmbiguityTransform((4,), True, 1.1)
    np.testing.assert_allclose(tr.invert(tr.apply(F)), F, atol=1e-12)
    assert dsp.AmbiguityTransform().is_identity


def test_peaks_and_matching():
    F = np.zeros(50)
    F[[3, 10, 30, 49]] = [5.0, 4.0, 0.3, 2.0]
    assert dsp.significant_peaks(F) == [3, 10, 49]
    res = dsp.peak_locations(F, 6, 2)
    assert res.bins[:4] == [3, 10, 49, 30] and res.incomplete
    assert dsp.match_peaks([3, 49, 20], [4, 0, 25], 50) == {3: 4, 49: 0, 20: None}


def test_spectrum_csv_rows():
    spec = dsp.Spectrum(np.array([1 + 1j, 2.0]), total_time=4.0)
    rows = dsp.spectrum_csv_rows(spec)
    assert rows[1][0] == 1 and rows[1][1] == pytest.approx(np.pi / 2)
    assert rows[0][2:] == (1.0, 1.0, pytest.approx(np.sqrt(2)))
