"""Loading, resampling and segmenting ECG sample streams."""

import logging
from fractions import Fraction
from pathlib import Path

import numpy as np
from scipy.signal import firwin, resample_poly

log = logging.getLogger(__name__)

TARGET_RATE = 250
INPUT_FORMATS = ("csv", "raw_f64", "raw_i16")


class DataError(ValueError):
    pass


def _parse_csv(path: Path, column: int) -> np.ndarray:
    values = []
    with open(path, newline="") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text:
                continue
            cells = [c.strip() for c in text.replace(";", ",").split(",")]
            if column >= len(cells):
                raise DataError(f"{path}: row {lineno} has no column {column}")
            try:
                v = float(cells[column])
            except ValueError:
                if lineno == 1 and not values:
                    continue  # header line
                raise DataError(f"{path}: row {lineno} is not numeric: {text[:40]!r}") from None
            if not np.isfinite(v):
                raise DataError(f"{path}: row {lineno} holds a non-finite sample")
            values.append(v)
    return np.array(values, dtype=float)


def ingest(path, fmt: str = "csv", fs: float = TARGET_RATE, scale: float = 1.0, column: int = 0) -> np.ndarray:
    """Read a sample stream at its native rate.

    ``csv`` takes one sample per line (optional header; ``column`` picks a
    field of multi-column rows).  ``raw_f64`` and ``raw_i16`` are headerless
    little-endian arrays; every format is multiplied by ``scale``.
    """
    path = Path(path)
    if fmt not in INPUT_FORMATS:
        raise DataError(f"unknown input format {fmt!r}")
    if fs <= 0:
        raise DataError("sample rate must be positive")
    try:
        if fmt == "csv":
            x = _parse_csv(path, column)
        elif fmt == "raw_f64":
            x = np.fromfile(path, dtype="<f8")
        else:
            x = np.fromfile(path, dtype="<i2").astype(float)
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    bad = np.flatnonzero(~np.isfinite(x))
    if bad.size:
        raise DataError(f"{path}: sample {bad[0]} is not finite")
    return x * scale


def _design_filter(up: int, down: int, beta: float = 8.0, cutoff: float = 0.9) -> np.ndarray:
    ratio = max(up, down)
    taps = firwin(2 * 10 * ratio + 1, cutoff / ratio, window=("kaiser", beta))
    # give each polyphase branch exactly unit DC gain (resample_poly scales by up)
    padded = np.concatenate([taps, np.zeros(-taps.size % up)])
    branches = padded.reshape(-1, up)
    branches = branches / branches.sum(axis=0) / up
    return branches.ravel()[:taps.size]


def resample(x, fs_in: float, fs_out: float = TARGET_RATE) -> np.ndarray:
    """Rational polyphase resampling with a Kaiser (beta 8) windowed-sinc
    anti-aliasing filter cut at 0.9 of the lower Nyquist frequency.
    Output length is ``floor(len * fs_out / fs_in)``."""
    x = np.asarray(x, dtype=float)
    ratio = Fraction(fs_out).limit_denominator(10000) / Fraction(fs_in).limit_denominator(10000)
    up, down = ratio.numerator, ratio.denominator
    if up == down:
        return x.copy()
    if x.size == 0:
        return x.copy()
    out = resample_poly(x, up, down, window=_design_filter(up, down))
    return out[: (x.size * up) // down]


def resample_360_to_250(x) -> np.ndarray:
    return resample(x, 360, 250)


def segment(x, n: int = 256) -> tuple[np.ndarray, int]:
    """Split into consecutive non-overlapping windows.

    Returns ``(segments, dropped)`` where ``segments`` has shape ``(count, n)``
    and ``dropped`` counts trailing samples that did not fill a window.
    """
    x = np.asarray(x, dtype=float)
    count = x.size // n
    dropped = x.size - count * n
    if count == 0:
        log.warning("stream of %d samples is shorter than one %d-sample segment", x.size, n)
    if dropped:
        log.info("dropping %d trailing samples", dropped)
    return x[: count * n].reshape(count, n), dropped


def load_stream(path, fmt: str = "csv", fs: float = TARGET_RATE, scale: float = 1.0,
                column: int = 0) -> np.ndarray:
    """Ingest and bring a recording to the 250 Hz working rate."""
    x = ingest(path, fmt, fs, scale, column)
    return x if fs == TARGET_RATE else resample(x, fs, TARGET_RATE)
