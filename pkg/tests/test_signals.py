import logging

import numpy as np
import pytest

from csecg.signals import DataError, ingest, load_stream, resample, resample_360_to_250, segment


def test_csv_of_2500_values(tmp_path, rng):
    x = rng.standard_normal(2500)
    path = tmp_path / "sig.csv"
    np.savetxt(path, x, fmt="%.17g")
    np.testing.assert_array_equal(ingest(path, "csv", 250), x)


def test_csv_header_and_column(tmp_path):
    path = tmp_path / "two.csv"
    path.write_text("time,mlii\n0,1.5\n1,2.5\n\n2,-3\n")
    np.testing.assert_array_equal(ingest(path, "csv", column=1), [1.5, 2.5, -3.0])


def test_csv_bad_row_is_named(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("1.0\n2.0\nabc\n4.0\n")
    with pytest.raises(DataError, match="row 3"):
        ingest(path)


def test_csv_nan_rejected_with_row(tmp_path):
    path = tmp_path / "nan.csv"
    path.write_text("1.0\nnan\n")
    with pytest.raises(DataError, match="row 2"):
        ingest(path)


def test_raw_i16_scaled(tmp_path):
    raw = np.array([200, -400, 1000, 0], dtype="<i2")
    path = tmp_path / "sig.i16"
    raw.tofile(path)
    np.testing.assert_allclose(ingest(path, "raw_i16", 360, scale=1 / 200), [1.0, -2.0, 5.0, 0.0])


def test_raw_f64(tmp_path, rng):
    x = rng.standard_normal(10)
    path = tmp_path / "sig.f64"
    x.astype("<f8").tofile(path)
    np.testing.assert_array_equal(ingest(path, "raw_f64"), x)


def test_unreadable_and_unknown_format(tmp_path):
    with pytest.raises(DataError):
        ingest(tmp_path / "missing.csv")
    with pytest.raises(DataError):
        ingest(tmp_path / "missing.csv", "wfdb")


def test_resample_lengths():
    assert resample_360_to_250(np.zeros(3600)).size == 2500
    assert resample_360_to_250(np.zeros(361)).size == 361 * 25 // 36
    x = np.arange(10.0)
    np.testing.assert_array_equal(resample(x, 250, 250), x)


def test_resample_dc():
    out = resample_360_to_250(np.full(3600, -1.7))
    core = out[64:-64]
    assert np.max(np.abs(core / -1.7 - 1)) <= 1e-6


def test_resample_sinusoid():
    t_in = np.arange(36_000) / 360
    out = resample_360_to_250(np.sin(2 * np.pi * 10 * t_in))
    t_out = np.arange(out.size) / 250
    core = slice(64, out.size - 64)
    # least-squares fit of amplitude and phase at 10 Hz
    basis = np.column_stack([np.sin(2 * np.pi * 10 * t_out[core]), np.cos(2 * np.pi * 10 * t_out[core])])
    coef, *_ = np.linalg.lstsq(basis, out[core], rcond=None)
    assert abs(np.hypot(*coef) - 1) <= 0.01
    assert np.max(np.abs(out[core] - basis[:, 0])) <= 0.01
    # dominant frequency is still 10 Hz
    spec = np.abs(np.fft.rfft(out[core] * np.hanning(out[core].size)))
    freqs = np.fft.rfftfreq(out[core].size, 1 / 250)
    assert abs(freqs[np.argmax(spec)] - 10) < 0.05


def test_load_stream_resamples(tmp_path):
    path = tmp_path / "r.csv"
    np.savetxt(path, np.ones(3600))
    assert load_stream(path, "csv", 360).size == 2500


def test_segment_counts(caplog):
    segs, dropped = segment(np.arange(2560.0))
    assert segs.shape == (10, 256) and dropped == 0
    segs, dropped = segment(np.arange(2570.0))
    assert segs.shape == (10, 256) and dropped == 10
    np.testing.assert_array_equal(segs[1], np.arange(256, 512))
    with caplog.at_level(logging.WARNING):
        segs, dropped = segment(np.array([]))
    assert segs.shape == (0, 256) and dropped == 0
    assert "shorter" in caplog.text
