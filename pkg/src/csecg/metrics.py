"""Reconstruction quality, compression accounting and support statistics."""

import csv
from dataclasses import asdict, dataclass, fields

import numpy as np

RSNR_CAP_DB = 300.0
ORIGINAL_BITS_PER_SAMPLE = 11


class MetricError(ValueError):
    pass


def _pair(x, x_hat):
    x = np.asarray(x, dtype=float)
    x_hat = np.asarray(x_hat, dtype=float)
    if x.shape != x_hat.shape:
        raise MetricError(f"shape mismatch {x.shape} vs {x_hat.shape}")
    return x, x_hat


def prd(x, x_hat) -> float:
    """Percentage root-mean-square difference."""
    x, x_hat = _pair(x, x_hat)
    ref = np.linalg.norm(x)
    if ref == 0:
        raise MetricError("PRD undefined for an all-zero reference")
    return float(100.0 * np.linalg.norm(x - x_hat) / ref)


def prdn(x, x_hat) -> float:
    """PRD with the reference mean removed from the denominator."""
    x, x_hat = _pair(x, x_hat)
    ref = np.linalg.norm(x - x.mean())
    if ref == 0:
        raise MetricError("PRDN undefined for a constant reference")
    return float(100.0 * np.linalg.norm(x - x_hat) / ref)


def rsnr(x, x_hat) -> float:
    """Reconstruction SNR in dB; exact reconstructions report ``RSNR_CAP_DB``."""
    x, x_hat = _pair(x, x_hat)
    err = float(np.sum((x - x_hat) ** 2))
    sig = float(np.sum(x * x))
    if sig == 0:
        raise MetricError("R-SNR undefined for an all-zero reference")
    if err == 0:
        return RSNR_CAP_DB
    return min(RSNR_CAP_DB, float(10.0 * np.log10(sig / err)))


def compression_ratio(original_bits, compressed_bits) -> float:
    if compressed_bits <= 0:
        raise MetricError("compressed size must be positive")
    return float(original_bits) / float(compressed_bits)


def original_bits(num_samples: int, bits_per_sample: int = ORIGINAL_BITS_PER_SAMPLE) -> int:
    return int(num_samples) * int(bits_per_sample)


def quality_score(cr: float, prd_value: float) -> float:
    if prd_value <= 0:
        return float("inf")
    return cr / prd_value


def support_overlap(current, previous) -> float:
    """Fraction of ``current`` that also appears in ``previous``."""
    cur = np.unique(np.asarray(current, dtype=np.int64))
    if cur.size == 0:
        raise MetricError("overlap undefined for an empty current support")
    prev = np.unique(np.asarray(previous, dtype=np.int64))
    return float(np.intersect1d(cur, prev, assume_unique=True).size / cur.size)


def largest_support(s, k: int) -> np.ndarray:
    """Indices of the ``k`` largest magnitudes (ties to the lowest index)."""
    order = np.argsort(-np.abs(np.asarray(s, dtype=float)), kind="stable")
    return np.sort(order[:k])


def residual_energy_curve(s) -> np.ndarray:
    """``C_K`` for ``K = 1..N``: energy left after keeping the ``K`` largest
    coefficients, relative to the total.  Entry ``K - 1`` holds ``C_K``."""
    e = np.sort(np.asarray(s, dtype=float) ** 2, kind="stable")[::-1]
    total = e.sum()
    if total == 0:
        raise MetricError("residual energy undefined for a zero vector")
    # accumulate from the small end so the tail is exact and C_N is exactly 0
    tail = np.concatenate([np.cumsum(e[::-1])[::-1][1:], [0.0]])
    return tail / total


def select_sparsity(curve, threshold: float = 1e-3) -> int:
    """Smallest ``K`` with ``C_K <= threshold``."""
    curve = np.asarray(curve, dtype=float)
    hits = np.flatnonzero(curve <= threshold)
    if hits.size == 0:
        raise MetricError("threshold never reached")
    return int(hits[0]) + 1


@dataclass
class SegmentReport:
    algorithm: str
    record: str
    seed: int
    m: int
    k_total: int
    cr: float
    prd: float
    prdn: float
    qs: float
    rsnr: float
    iterations: int
    segment: int = 0

    @classmethod
    def from_signals(cls, x, x_hat, *, cr: float, algorithm: str, record: str = "", seed: int = 0,
                     m: int = 0, k_total: int = 0, iterations: int = 0, segment: int = 0) -> "SegmentReport":
        p = prd(x, x_hat)
        try:
            pn = prdn(x, x_hat)
        except MetricError:
            pn = float("nan")
        return cls(algorithm, record, seed, m, k_total, cr, p, pn, quality_score(cr, p), rsnr(x, x_hat),
                   iterations, segment)


REPORT_COLUMNS = ("algorithm", "record", "seed", "M", "K_total", "CR", "PRD", "PRDN", "QS", "R-SNR",
                  "iterations")


def write_reports(path, reports, include_segment: bool = True):
    names = [f.name for f in fields(SegmentReport)]
    columns = list(REPORT_COLUMNS) + (["segment"] if include_segment else [])
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(columns)
        for r in reports:
            row = asdict(r)
            values = [row[n] for n in names[:11]] + ([row["segment"]] if include_segment else [])
            w.writerow([f"{v:.10g}" if isinstance(v, float) else v for v in values])
