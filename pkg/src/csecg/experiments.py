"""End-to-end pipelines behind the command-line tools.

Everything here is deterministic given the seeds it receives; trials can run
in worker processes and are gathered back in trial order.
"""

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import codec
from .metrics import (SegmentReport, compression_ratio, largest_support, original_bits, prd,
                      residual_energy_curve, rsnr, select_sparsity, support_overlap)
from .recovery import HaltingRule, RecoveryError, RecoveryResult, reconstruct, top_k_support
from .sensing import MatrixKind, SensingMatrix, ThetaOperator, default_q, generate
from .treemodel import SupportSet
from .wavelet import analysis

log = logging.getLogger(__name__)


def build_operator(kind, m: int, n: int, levels: int, seed: int, q: int | None = None) -> ThetaOperator:
    kind = MatrixKind.parse(kind)
    if kind is not MatrixKind.DENSE_BERNOULLI and q is None:
        q = default_q(n)
    return ThetaOperator(generate(kind, m, n, q, seed), levels)


def measure(segments, phi: SensingMatrix) -> np.ndarray:
    """``(count, N)`` segments to ``(count, M)`` measurement vectors."""
    segments = np.atleast_2d(np.asarray(segments, dtype=float))
    return phi.apply(segments.T).T


@dataclass
class StreamReconstruction:
    results: list[RecoveryResult | None]
    priors: list[SupportSet]
    errors: dict[int, str] = field(default_factory=dict)

    def signal(self, n: int) -> np.ndarray:
        out = [r.x_hat if r is not None else np.zeros(n) for r in self.results]
        return np.concatenate(out) if out else np.zeros(0)


def reconstruct_stream(measurements, theta: ThetaOperator, k_total: int, algorithm: str,
                       halt: HaltingRule = HaltingRule(), oracle_supports=None,
                       step: str = "normalized") -> StreamReconstruction:
    """Recover segments in order, passing each support on as the next prior.

    The first segment (and any segment after a failure) starts without a prior.
    """
    results, priors, errors = [], [], {}
    prior = SupportSet.empty()
    for t, y in enumerate(np.atleast_2d(measurements)):
        priors.append(prior)
        oracle = oracle_supports[t] if oracle_supports is not None else None
        try:
            res = reconstruct(algorithm, y, theta, k_total, prior=prior, halt=halt,
                              oracle_support=oracle, step=step)
        except RecoveryError as exc:
            log.error("segment %d: %s", t, exc)
            errors[t] = str(exc)
            results.append(None)
            prior = SupportSet.empty()
            continue
        results.append(res)
        prior = res.support
    return StreamReconstruction(results, priors, errors)


def oracle_supports_for(segments, k_total: int, levels: int) -> list[SupportSet]:
    return [top_k_support(analysis(seg, levels), k_total, levels) for seg in np.atleast_2d(segments)]


def compress_segments(segments, *, m: int, levels: int, k_total: int, kind, seed: int,
                      q: int | None = None) -> codec.EncodeReport:
    segments = np.atleast_2d(np.asarray(segments, dtype=float))
    n = segments.shape[1]
    kind = MatrixKind.parse(kind)
    if kind is not MatrixKind.DENSE_BERNOULLI and q is None:
        q = default_q(n)
    phi = generate(kind, m, n, q, seed)
    return codec.encode_measurements(measure(segments, phi), n=n, levels=levels, k_total=k_total,
                                     matrix_kind=kind, q=phi.q, seed=seed)


def per_segment_cr(n: int, frame_bits) -> np.ndarray:
    frame_bits = np.asarray(frame_bits, dtype=float)
    return original_bits(n) / np.maximum(frame_bits, 1.0)


def whole_run_cr(n: int, count: int, stream_bytes: int) -> float:
    return compression_ratio(original_bits(n * count), 8 * stream_bytes)


@dataclass
class DecodeOutcome:
    header: codec.StreamHeader
    measurements: np.ndarray
    reconstruction: StreamReconstruction
    frame_bits: np.ndarray


def decompress_stream(blob: bytes, algorithm: str, halt: HaltingRule = HaltingRule(),
                      oracle_supports=None, step: str = "normalized") -> DecodeOutcome:
    header, frames = codec.deserialize(blob)
    _, y = codec.decode_stream(blob)
    phi = generate(header.matrix_kind, header.m, header.n,
                   header.q if header.matrix_kind is not MatrixKind.DENSE_BERNOULLI else None, header.seed)
    theta = ThetaOperator(phi, header.levels)
    rec = reconstruct_stream(y, theta, header.k_total, algorithm, halt, oracle_supports, step)
    return DecodeOutcome(header, y, rec, np.array([f.nbits for f in frames], dtype=np.int64))


def segment_reports(segments, outcome: DecodeOutcome, algorithm: str, record: str = "") -> list[SegmentReport]:
    header = outcome.header
    crs = per_segment_cr(header.n, outcome.frame_bits)
    reports = []
    for t, (x, res) in enumerate(zip(np.atleast_2d(segments), outcome.reconstruction.results)):
        x_hat = res.x_hat if res is not None else np.zeros(header.n)
        iters = res.iterations if res is not None else 0
        reports.append(SegmentReport.from_signals(
            x, x_hat, cr=float(crs[t]), algorithm=algorithm, record=record, seed=header.seed,
            m=header.m, k_total=header.k_total, iterations=iters, segment=t))
    return reports


# ---------------------------------------------------------------------------
# sweeps


@dataclass(frozen=True)
class SweepSetup:
    levels: int = 5
    k_total: int = 34
    kind: str = "dense_bernoulli"
    q: int | None = None
    halt: HaltingRule = HaltingRule()
    step: str = "normalized"


def _oversampling_trial(args):
    records, m, algorithms, setup, seed = args
    rows = []
    for name, segments in records:
        n = segments.shape[1]
        theta = build_operator(setup.kind, m, n, setup.levels, seed, setup.q)
        y = measure(segments, theta.phi)
        oracle = oracle_supports_for(segments, setup.k_total, setup.levels)
        for alg in algorithms:
            rec = reconstruct_stream(y, theta, setup.k_total, alg, setup.halt,
                                     oracle if alg == "oracle" else None, setup.step)
            for t, res in enumerate(rec.results):
                x_hat = res.x_hat if res is not None else np.zeros(n)
                rows.append((alg, name, seed, m, t, rsnr(segments[t], x_hat), prd(segments[t], x_hat),
                             res.iterations if res is not None else 0))
    return rows


def _map(fn, jobs_args, jobs: int):
    if jobs <= 1:
        return [fn(a) for a in jobs_args]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, jobs_args))


def oversampling_sweep(records, ratios, algorithms, trials: int, base_seed: int = 0,
                       setup: SweepSetup = SweepSetup(), jobs: int = 1):
    """Mean R-SNR against ``M / K_total`` without the coding stages.

    ``records`` is a sequence of ``(name, segments)``.  Trial ``i`` draws the
    sensing matrix with seed ``base_seed + i``.  Returns ``(summary, rows)``
    where summary rows are ``(algorithm, ratio, M, mean R-SNR, mean PRD,
    mean iterations, count)``.
    """
    records = [(name, np.atleast_2d(seg)) for name, seg in records]
    n = records[0][1].shape[1]
    summary, all_rows = [], []
    for ratio in ratios:
        m = int(round(ratio * setup.k_total))
        if m >= n:
            raise ValueError(f"M/K={ratio} gives M={m} >= N={n}")
        args = [(records, m, tuple(algorithms), setup, base_seed + i) for i in range(trials)]
        rows = [r for chunk in _map(_oversampling_trial, args, jobs) for r in chunk]
        all_rows.extend(rows)
        for alg in algorithms:
            sel = [r for r in rows if r[0] == alg]
            summary.append((alg, ratio, m, float(np.mean([r[5] for r in sel])),
                            float(np.mean([r[6] for r in sel])), float(np.mean([r[7] for r in sel])), len(sel)))
    return summary, all_rows


def _compression_trial(args):
    records, m, algorithms, setup, seed = args
    rows = []
    for name, segments in records:
        n = segments.shape[1]
        enc = compress_segments(segments, m=m, levels=setup.levels, k_total=setup.k_total,
                                kind=setup.kind, seed=seed, q=setup.q)
        cr_seg = float(np.mean(per_segment_cr(n, enc.frame_bits)))
        cr_run = whole_run_cr(n, segments.shape[0], len(enc.stream))
        oracle = oracle_supports_for(segments, setup.k_total, setup.levels)
        for alg in algorithms:
            out = decompress_stream(enc.stream, alg, setup.halt, oracle if alg == "oracle" else None, setup.step)
            reports = segment_reports(segments, out, alg, name)
            rows.append((alg, name, seed, m, cr_seg, cr_run,
                         float(np.mean([r.prd for r in reports])), float(np.nanmean([r.prdn for r in reports])),
                         float(np.mean([r.rsnr for r in reports]))))
    return rows


def compression_sweep(records, m_grid, algorithms, trials: int, base_seed: int = 0,
                      setup: SweepSetup = SweepSetup(), jobs: int = 1):
    """PRD against achieved compression ratio through the full coding chain.

    Returns ``(summary, rows)``; summary rows are ``(algorithm, M, mean
    per-segment CR, mean whole-run CR, mean PRD, mean PRDN, mean QS, count)``.
    """
    records = [(name, np.atleast_2d(seg)) for name, seg in records]
    summary, all_rows = [], []
    for m in m_grid:
        args = [(records, int(m), tuple(algorithms), setup, base_seed + i) for i in range(trials)]
        rows = [r for chunk in _map(_compression_trial, args, jobs) for r in chunk]
        all_rows.extend(rows)
        for alg in algorithms:
            sel = [r for r in rows if r[0] == alg]
            cr = float(np.mean([r[4] for r in sel]))
            p = float(np.mean([r[6] for r in sel]))
            summary.append((alg, int(m), cr, float(np.mean([r[5] for r in sel])), p,
                            float(np.mean([r[7] for r in sel])), cr / p if p > 0 else float("inf"), len(sel)))
    return summary, all_rows


# ---------------------------------------------------------------------------
# signal statistics


def support_overlap_study(records, n: int = 2048, k: int = 225, levels: int = 5, sequences: int = 100):
    """Fraction of shared top-``k`` wavelet support between consecutive
    length-``n`` sequences.  Returns ``(t values, mean overlap per t,
    per-record overlap array)``; records shorter than ``sequences`` windows
    contribute what they have.
    """
    per_record = []
    for name, x in records:
        x = np.asarray(x, dtype=float).ravel()
        count = min(sequences, x.size // n)
        if count < 2:
            log.warning("record %s: fewer than two %d-sample sequences", name, n)
            continue
        supports = [largest_support(analysis(x[i * n:(i + 1) * n], levels), k) for i in range(count)]
        row = np.full(sequences - 1, np.nan)
        row[:count - 1] = [support_overlap(supports[t], supports[t - 1]) for t in range(1, count)]
        per_record.append(row)
    if not per_record:
        raise ValueError("no record long enough for the overlap study")
    table = np.vstack(per_record)
    valid = ~np.all(np.isnan(table), axis=0)
    t = np.arange(2, sequences + 1)[valid]
    return t, np.nanmean(table[:, valid], axis=0), table[:, valid]


def energy_curve_study(records, n: int = 256, levels: int = 5, segments_per_record: int = 300,
                       threshold: float = 1e-3):
    """Average residual-energy curve over segments and records; returns ``(curve, K)``."""
    curves = []
    for name, x in records:
        x = np.asarray(x, dtype=float).ravel()
        count = min(segments_per_record, x.size // n)
        for i in range(count):
            seg = x[i * n:(i + 1) * n]
            if not np.any(seg):
                continue
            curves.append(residual_energy_curve(analysis(seg, levels)))
    if not curves:
        raise ValueError("no usable segments for the energy curve")
    curve = np.mean(curves, axis=0)
    return curve, select_sparsity(curve, threshold)


def m_for_target_cr(segments, target_cr: float, *, levels: int = 5, k_total: int = 34,
                    kind="dense_bernoulli", seed: int = 0, q: int | None = None) -> tuple[int, float]:
    """Measurement count whose achieved per-segment CR is closest to ``target_cr``.

    Achieved CR falls as M grows, so an integer bisection on one matrix draw
    brackets the target; returns ``(M, achieved CR)``.
    """
    segments = np.atleast_2d(segments)
    n = segments.shape[1]

    def achieved(m):
        enc = compress_segments(segments, m=m, levels=levels, k_total=k_total, kind=kind, seed=seed, q=q)
        return float(np.mean(per_segment_cr(n, enc.frame_bits)))

    lo, hi = 2, n - 1
    cache = {}
    while hi - lo > 1:
        mid = (lo + hi) // 2
        cache[mid] = achieved(mid)
        if cache[mid] > target_cr:
            lo = mid
        else:
            hi = mid
    for m in (lo, hi):
        cache.setdefault(m, achieved(m))
    best = min((lo, hi), key=lambda m: abs(cache[m] - target_cr))
    return best, cache[best]
