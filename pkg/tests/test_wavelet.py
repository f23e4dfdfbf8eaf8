import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from csecg.wavelet import (DB4_HIGHPASS, DB4_LOWPASS, WaveletCoeffs, WaveletLayoutError, analysis,
                           approx_range, check_layout, detail_range, dwt, idwt, subband_bounds,
                           synthesis, synthesis_column, synthesis_matrix)


def test_filter_taps_are_the_four_coefficient_daubechies_pair():
    s3 = np.sqrt(3.0)
    expected = np.array([1 + s3, 3 + s3, 3 - s3, 1 - s3]) / (4 * np.sqrt(2.0))
    np.testing.assert_allclose(DB4_LOWPASS, expected, rtol=0, atol=1e-15)
    assert np.isclose(DB4_LOWPASS.sum(), np.sqrt(2.0))
    assert np.isclose(np.sum(DB4_LOWPASS ** 2), 1.0)
    # two vanishing moments
    k = np.arange(4)
    assert abs(DB4_HIGHPASS.sum()) < 1e-15
    assert abs(np.sum(k * DB4_HIGHPASS)) < 1e-14


def test_subband_sizes_256_5():
    sizes = [b - a for a, b in subband_bounds(256, 5)]
    assert sizes == [128, 64, 32, 16, 8, 8]
    bounds = subband_bounds(256, 5)
    assert bounds[0][0] == 0 and bounds[-1][1] == 256
    assert all(bounds[i][1] == bounds[i + 1][0] for i in range(5))
    assert detail_range(256, 5, 3) == range(192, 224)
    assert approx_range(256, 5) == range(248, 256)


@pytest.mark.parametrize("n,levels", [(100, 3), (256, 9), (256, 0), (0, 1)])
def test_bad_layouts_rejected(n, levels):
    with pytest.raises(WaveletLayoutError):
        check_layout(n, levels)
    if n > 0:
        with pytest.raises(WaveletLayoutError):
            dwt(np.zeros(n), levels)


def test_zero_in_zero_out():
    assert not np.any(dwt(np.zeros(256), 5).data)
    assert not np.any(idwt(WaveletCoeffs(np.zeros(256), 5)))


def test_constant_signal_has_no_detail_energy():
    s = dwt(np.full(256, 3.7), 5)
    assert np.max(np.abs(s.data[:248])) <= 1e-10
    np.testing.assert_allclose(np.linalg.norm(s.approx), 3.7 * 16, rtol=1e-12)


def test_parseval_and_perfect_reconstruction_on_random_vectors(rng):
    x = rng.standard_normal((100, 256))
    s = analysis(x, 5)
    rel_energy = np.abs(np.linalg.norm(s, axis=1) / np.linalg.norm(x, axis=1) - 1)
    assert rel_energy.max() <= 1e-10
    back = synthesis(s, 5)
    rel_err = np.linalg.norm(back - x, axis=1) / np.linalg.norm(x, axis=1)
    assert rel_err.max() <= 1e-10


def test_orthonormality_at_64():
    psi = np.column_stack([synthesis_column(i, 64, 3) for i in range(64)])
    assert np.max(np.abs(psi.T @ psi - np.eye(64))) <= 1e-10
    np.testing.assert_allclose(psi, synthesis_matrix(64, 3), atol=1e-15)


@pytest.mark.parametrize("n,levels", [(256, 5), (128, 4), (32, 1)])
def test_orthonormality_of_full_basis(n, levels):
    psi = synthesis_matrix(n, levels)
    assert np.max(np.abs(psi.T @ psi - np.eye(n))) <= 1e-10


def test_d1_column_is_the_shifted_highpass_filter():
    n = 32
    for i in (0, 5, 15):
        col = synthesis_column(i, n, 3)
        expected = np.zeros(n)
        for m in range(4):
            expected[(2 * i + m) % n] += DB4_HIGHPASS[m]
        np.testing.assert_allclose(col, expected, atol=1e-15)


def test_scaling_column_has_unit_norm():
    col = synthesis_column(250, 256, 5)
    assert abs(np.linalg.norm(col) - 1) < 1e-12
    np.testing.assert_allclose(col, idwt(WaveletCoeffs(np.eye(256)[250], 5)), atol=1e-15)


def test_column_index_out_of_range():
    with pytest.raises(IndexError):
        synthesis_column(256, 256, 5)
    with pytest.raises(IndexError):
        synthesis_column(-1, 256, 5)


def test_coeffs_views():
    s = dwt(np.arange(256.0), 5)
    assert s.n == 256
    assert s.detail(1).size == 128 and s.detail(5).size == 8
    np.testing.assert_array_equal(s.approx, s.data[248:])
    with pytest.raises(WaveletLayoutError):
        WaveletCoeffs(np.zeros(100), 3)


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, 64, elements=st.floats(-1e3, 1e3)), st.integers(1, 6))
def test_round_trip_property(x, levels):
    s = analysis(x, levels)
    scale = max(np.linalg.norm(x), 1.0)
    assert np.linalg.norm(synthesis(s, levels) - x) <= 1e-10 * scale
    assert abs(np.linalg.norm(s) - np.linalg.norm(x)) <= 1e-10 * scale
