"""Command-line driver.

Subcommands: ``compress``, ``decompress``, ``benchmark``, ``analyze-support``
and ``energy-curve``.  Every option can also come from a ``key = value`` file
given with ``--config``; flags on the command line win over the file.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 corrupt stream.
"""

import argparse
import csv
import hashlib
import json
import logging
import sys
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from . import __version__, experiments
from .codec import StreamError
from .metrics import MetricError, write_reports
from .recovery import ALGORITHMS, HaltingRule, top_k_support
from .sensing import MatrixKind, SensingError
from .signals import INPUT_FORMATS, TARGET_RATE, DataError, load_stream, segment
from .synthetic import ecg_like, model_sparse
from .treemodel import ModelError, SupportSet, tree_index
from .wavelet import WaveletLayoutError, analysis, check_layout

log = logging.getLogger("csecg")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_STREAM = 4

DEFAULT_M = 96


class ConfigError(ValueError):
    pass


def _floats(text) -> tuple[float, ...]:
    if isinstance(text, (list, tuple)):
        return tuple(float(v) for v in text)
    return tuple(float(v) for v in str(text).replace(";", ",").split(",") if v.strip())


def _ints(text) -> tuple[int, ...]:
    if isinstance(text, (list, tuple)):
        return tuple(int(v) for v in text)
    return tuple(int(v) for v in str(text).replace(";", ",").split(",") if v.strip())


def _names(text) -> tuple[str, ...]:
    if isinstance(text, (list, tuple)):
        return tuple(str(v) for v in text)
    return tuple(v.strip() for v in str(text).replace(";", ",").split(",") if v.strip())


def _opt(convert):
    def parse(text):
        if text is None or str(text).strip().lower() in ("", "none"):
            return None
        return convert(text)
    return parse


def _bool(text) -> bool:
    value = str(text).strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


@dataclass
class RunConfig:
    # data
    input: tuple[str, ...] = ()
    input_format: str = "csv"
    fs: float = TARGET_RATE
    scale: float = 1.0
    column: int = 0
    synthetic: float = 0.0          # seconds of generated signal; 0 means read ``input``
    synthetic_kind: str = "ecg"     # "ecg" or "model" (exactly tree-sparse segments)
    synthetic_seed: int = 0
    max_segments: int | None = None
    # model and sensing
    n: int = 256
    levels: int = 5
    k_total: int = 34
    m: int | None = None
    ratio: float | None = None      # M / N, used when m is not given
    matrix: str = "dense_bernoulli"
    q: int | None = None
    seed: int = 0
    # recovery
    algorithm: str = "mmb-iht"
    max_iters: int = 70
    residual_tol: float = 1e-3
    step: str = "normalized"
    # experiment control
    trials: int = 1
    jobs: int = 1
    mode: str = "both"
    ratios: tuple[float, ...] = (2.0, 3.0, 4.0, 5.0)
    m_grid: tuple[int, ...] = (64, 96, 128)
    target_cr: float | None = None
    algorithms: tuple[str, ...] = ALGORITHMS
    window: int = 2048
    k: int = 225
    sequences: int = 100
    segments_per_record: int = 300
    threshold: float = 1e-3
    # artifacts
    stream: str | None = None
    output: str | None = None
    report: str | None = None
    support_file: str | None = None
    support_out: str | None = None

    @property
    def measurements(self) -> int:
        if self.m is not None:
            return self.m
        if self.ratio is not None:
            return int(round(self.ratio * self.n))
        return DEFAULT_M

    @property
    def halt(self) -> HaltingRule:
        return HaltingRule(self.max_iters, self.residual_tol)

    def validate(self, command: str = ""):
        try:
            check_layout(self.n, self.levels)
        except WaveletLayoutError as exc:
            raise ConfigError(str(exc)) from None
        n_l = self.n >> self.levels
        if self.k_total < n_l:
            raise ConfigError(f"K_total={self.k_total} is below N/2^L={n_l}")
        if self.k_total - n_l > tree_index(self.n, self.levels).num_selectable:
            raise ConfigError(f"K_total={self.k_total} exceeds the tree size")
        if not 0 < self.measurements < self.n:
            raise ConfigError(f"need 0 < M < N, got M={self.measurements}, N={self.n}")
        try:
            MatrixKind.parse(self.matrix)
        except (ValueError, KeyError):
            raise ConfigError(f"unknown matrix kind {self.matrix!r}") from None
        for alg in (self.algorithm, *self.algorithms):
            if alg not in ALGORITHMS:
                raise ConfigError(f"unknown algorithm {alg!r}; choose from {', '.join(ALGORITHMS)}")
        if self.input_format not in INPUT_FORMATS:
            raise ConfigError(f"unknown input format {self.input_format!r}")
        if self.synthetic_kind not in ("ecg", "model"):
            raise ConfigError("synthetic_kind must be 'ecg' or 'model'")
        if self.step not in ("normalized", "unit"):
            raise ConfigError("step must be 'normalized' or 'unit'")
        if self.mode not in ("both", "oversampling", "compression"):
            raise ConfigError("mode must be both, oversampling or compression")
        if self.max_iters < 1 or not self.residual_tol > 0:
            raise ConfigError("halting needs max_iters >= 1 and residual_tol > 0")
        if self.trials < 1 or self.jobs < 1:
            raise ConfigError("trials and jobs must be positive")
        if command != "decompress" and not self.input and self.synthetic <= 0:
            raise ConfigError("no input: give --input or --synthetic SECONDS")


_CONVERTERS = {
    "input": lambda v: _names(v) if not isinstance(v, str) or "," in v else (v,),
    "input_format": str, "fs": float, "scale": float, "column": int, "synthetic": float,
    "synthetic_kind": str, "synthetic_seed": int, "max_segments": _opt(int),
    "n": int, "levels": int, "k_total": int, "m": _opt(int), "ratio": _opt(float),
    "matrix": str, "q": _opt(int), "seed": int,
    "algorithm": str, "max_iters": int, "residual_tol": float, "step": str,
    "trials": int, "jobs": int, "mode": str, "ratios": _floats, "m_grid": _ints,
    "target_cr": _opt(float), "algorithms": _names, "window": int, "k": int, "sequences": int,
    "segments_per_record": int, "threshold": float,
    "stream": _opt(str), "output": _opt(str), "report": _opt(str), "support_file": _opt(str),
    "support_out": _opt(str),
}
assert set(_CONVERTERS) == {f.name for f in fields(RunConfig)}


def _coerce(key: str, value):
    key = key.strip().replace("-", "_")
    if key not in _CONVERTERS:
        raise ConfigError(f"unknown configuration key {key!r}")
    try:
        return key, _CONVERTERS[key](value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value for {key}: {value!r} ({exc})") from None


def read_config_file(path) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    values = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        key, value = line.split("=", 1)
        key, value = _coerce(key, value.strip())
        values[key] = value
    return values


def build_config(file_values: dict, flag_values: dict) -> RunConfig:
    merged = dict(file_values)
    for key, value in flag_values.items():
        merged.update([_coerce(key, value)])
    return RunConfig(**merged)


# ---------------------------------------------------------------------------
# data


def load_records(cfg: RunConfig) -> list[tuple[str, np.ndarray]]:
    """Working-rate sample streams, one per input (or one synthetic stream)."""
    if cfg.synthetic > 0:
        count = int(round(cfg.synthetic * TARGET_RATE))
        if cfg.synthetic_kind == "model":
            segs, _ = synthetic_model_segments(cfg)
            return [("synthetic-model", segs.ravel())]
        return [("synthetic", ecg_like(count, fs=TARGET_RATE, seed=cfg.synthetic_seed))]
    records = []
    for path in cfg.input:
        x = load_stream(path, cfg.input_format, cfg.fs, cfg.scale, cfg.column)
        records.append((Path(path).stem, x))
    return records


def synthetic_model_segments(cfg: RunConfig) -> tuple[np.ndarray, list[SupportSet]]:
    count = max(1, int(round(cfg.synthetic * TARGET_RATE)) // cfg.n)
    rng = np.random.default_rng(cfg.synthetic_seed)
    draws = [model_sparse(cfg.n, cfg.levels, cfg.k_total, rng) for _ in range(count)]
    return np.array([d[0] for d in draws]), [d[2] for d in draws]


def segmented_records(cfg: RunConfig) -> list[tuple[str, np.ndarray]]:
    out = []
    for name, x in load_records(cfg):
        segs, dropped = segment(x, cfg.n)
        if dropped:
            log.info("%s: %d trailing samples dropped", name, dropped)
        if cfg.max_segments is not None:
            segs = segs[: cfg.max_segments]
        if segs.shape[0] == 0:
            raise DataError(f"{name}: shorter than one {cfg.n}-sample segment")
        out.append((name, segs))
    if not out:
        raise DataError("no input records")
    return out


def true_supports(cfg: RunConfig, segments) -> list[SupportSet]:
    if cfg.synthetic > 0 and cfg.synthetic_kind == "model":
        return synthetic_model_segments(cfg)[1][: len(segments)]
    return [top_k_support(analysis(seg, cfg.levels), cfg.k_total, cfg.levels) for seg in segments]


def write_support_file(path, supports):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["segment", "support"])
        for t, sup in enumerate(supports):
            w.writerow([t, " ".join(str(i) for i in sup.indices)])


def read_support_file(path, n: int, levels: int) -> list[SupportSet]:
    supports = []
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise DataError(f"cannot read support file {path}: {exc}") from None
    for lineno, row in enumerate(rows, start=1):
        if not row or (lineno == 1 and row[0] == "segment"):
            continue
        try:
            idx = np.array([int(v) for v in row[-1].split()], dtype=np.int64)
            supports.append(SupportSet.from_indices(idx, n, levels))
        except (ValueError, IndexError) as exc:
            raise DataError(f"{path}: row {lineno}: {exc}") from None
    return supports


# ---------------------------------------------------------------------------
# artifacts


def _sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def write_manifest(path, command: str, cfg: RunConfig, artifacts, results=None):
    config = {k: list(v) if isinstance(v, tuple) else v for k, v in asdict(cfg).items()}
    manifest = {
        "command": command,
        "version": __version__,
        "config": config,
        "artifacts": {str(p): _sha256(p) for p in artifacts},
        "results": results or {},
    }
    Path(path).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([f"{v:.10g}" if isinstance(v, float) else v for v in row])


def _require(value, flag: str):
    if not value:
        raise ConfigError(f"{flag} is required")
    return value


# ---------------------------------------------------------------------------
# commands


def cmd_compress(cfg: RunConfig) -> int:
    out = Path(_require(cfg.output, "--output"))
    records = segmented_records(cfg)
    if len(records) != 1:
        raise ConfigError("compress takes exactly one input")
    name, segments = records[0]
    m = cfg.measurements
    enc = experiments.compress_segments(segments, m=m, levels=cfg.levels, k_total=cfg.k_total,
                                        kind=cfg.matrix, seed=cfg.seed, q=cfg.q)
    out.write_bytes(enc.stream)
    count = segments.shape[0]
    crs = experiments.per_segment_cr(cfg.n, enc.frame_bits)
    run_cr = experiments.whole_run_cr(cfg.n, count, len(enc.stream))
    h = enc.header
    log_path = out.with_name(out.name + ".log")
    lines = [
        f"record {name}",
        f"N={h.n} M={h.m} L={h.levels} K_total={h.k_total} segments={h.segment_count}",
        f"matrix={h.matrix_kind.label} q={h.q} seed={h.seed}",
        f"codebook_levels={enc.codebook.levels.size} degenerate={enc.codebook.degenerate}",
    ]
    lines += [f"frame {t} bits={int(b)} cr={c:.6f}" for t, (b, c) in enumerate(zip(enc.frame_bits, crs))]
    lines += [f"mean_segment_cr={float(np.mean(crs)):.6f}", f"total_bytes={len(enc.stream)}",
              f"run_cr={run_cr:.6f}"]
    log_path.write_text("\n".join(lines) + "\n")
    artifacts = [out, log_path]
    if cfg.support_out:
        write_support_file(cfg.support_out, true_supports(cfg, segments))
        artifacts.append(Path(cfg.support_out))
    write_manifest(out.with_name(out.name + ".manifest.json"), "compress", cfg, artifacts,
                   {"mean_segment_cr": float(np.mean(crs)), "run_cr": run_cr, "segments": count})
    log.info("wrote %d frames, mean CR %.3f (whole file %.3f)", count, float(np.mean(crs)), run_cr)
    print(f"compressed {count} segments: mean CR {float(np.mean(crs)):.3f}, file CR {run_cr:.3f}")
    return EXIT_OK


def cmd_decompress(cfg: RunConfig) -> int:
    stream_path = Path(_require(cfg.stream, "stream path"))
    out = Path(_require(cfg.output, "--output"))
    oracle = None
    if cfg.algorithm == "oracle":
        if not cfg.support_file:
            raise ConfigError("the oracle algorithm needs --support-file with ground-truth supports")
    try:
        blob = stream_path.read_bytes()
    except OSError as exc:
        raise DataError(f"cannot read {stream_path}: {exc}") from None
    if cfg.algorithm == "oracle":
        from .codec import deserialize
        header, _ = deserialize(blob)
        oracle = read_support_file(cfg.support_file, header.n, header.levels)
        if len(oracle) < header.segment_count:
            raise DataError(f"support file lists {len(oracle)} segments, stream has {header.segment_count}")
    outcome = experiments.decompress_stream(blob, cfg.algorithm, cfg.halt, oracle, cfg.step)
    header, rec = outcome.header, outcome.reconstruction

    x_hat = rec.signal(header.n)
    with open(out, "w") as fh:
        fh.write("sample\n")
        fh.writelines(f"{v:.17g}\n" for v in x_hat)
    support_log = out.with_name(out.name + ".supports.csv")
    with open(support_log, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["segment", "iterations", "halted_by", "prior", "support", "error"])
        for t, (res, prior) in enumerate(zip(rec.results, rec.priors)):
            w.writerow([t, res.iterations if res else 0, res.halted_by if res else "error",
                        " ".join(map(str, prior.indices)),
                        " ".join(map(str, res.support.indices)) if res else "", rec.errors.get(t, "")])
    artifacts = [out, support_log]
    results = {"segments": header.segment_count, "failed_segments": sorted(rec.errors)}

    if cfg.report:
        if not cfg.input and cfg.synthetic <= 0:
            raise ConfigError("--report needs the original signal via --input or --synthetic")
        _, reference = segmented_records(cfg)[0]
        if reference.shape[0] < header.segment_count or reference.shape[1] != header.n:
            raise DataError("reference signal does not match the stream's segments")
        reports = experiments.segment_reports(reference[: header.segment_count], outcome, cfg.algorithm,
                                              record=Path(cfg.input[0]).stem if cfg.input else "synthetic")
        write_reports(cfg.report, reports)
        artifacts.append(Path(cfg.report))
        results["mean_prd"] = float(np.mean([r.prd for r in reports]))
        results["mean_cr"] = float(np.mean([r.cr for r in reports]))
        print(f"{cfg.algorithm}: mean PRD {results['mean_prd']:.4f} at mean CR {results['mean_cr']:.3f}")
    write_manifest(out.with_name(out.name + ".manifest.json"), "decompress", cfg, artifacts, results)
    return EXIT_OK


def cmd_benchmark(cfg: RunConfig) -> int:
    out = Path(_require(cfg.output, "--output"))
    out.mkdir(parents=True, exist_ok=True)
    records = segmented_records(cfg)
    setup = experiments.SweepSetup(cfg.levels, cfg.k_total, cfg.matrix, cfg.q, cfg.halt, cfg.step)
    artifacts, results = [], {}
    if cfg.mode in ("both", "oversampling"):
        summary, rows = experiments.oversampling_sweep(records, cfg.ratios, cfg.algorithms, cfg.trials,
                                                       cfg.seed, setup, cfg.jobs)
        path = out / "oversampling.csv"
        _write_csv(path, ["algorithm", "M_over_K", "M", "RSNR", "PRD", "iterations", "count"], summary)
        trials_path = out / "oversampling_segments.csv"
        _write_csv(trials_path, ["algorithm", "record", "seed", "M", "segment", "RSNR", "PRD", "iterations"], rows)
        artifacts += [path, trials_path]
    if cfg.mode in ("both", "compression"):
        grid = cfg.m_grid
        if cfg.target_cr is not None:
            m, achieved = experiments.m_for_target_cr(np.vstack([s for _, s in records]), cfg.target_cr,
                                                      levels=cfg.levels, k_total=cfg.k_total, kind=cfg.matrix,
                                                      seed=cfg.seed, q=cfg.q)
            grid = (m,)
            results["target_cr_m"] = m
            results["target_cr_achieved"] = achieved
        summary, rows = experiments.compression_sweep(records, grid, cfg.algorithms, cfg.trials, cfg.seed,
                                                      setup, cfg.jobs)
        path = out / "compression.csv"
        _write_csv(path, ["algorithm", "M", "CR", "CR_file", "PRD", "PRDN", "QS", "count"], summary)
        trials_path = out / "compression_trials.csv"
        _write_csv(trials_path, ["algorithm", "record", "seed", "M", "CR", "CR_file", "PRD", "PRDN", "RSNR"], rows)
        artifacts += [path, trials_path]
    write_manifest(out / "manifest.json", "benchmark", cfg, artifacts, results)
    print(f"benchmark written to {out}")
    return EXIT_OK


def cmd_analyze_support(cfg: RunConfig) -> int:
    out = Path(_require(cfg.output, "--output"))
    records = load_records(cfg)
    try:
        check_layout(cfg.window, cfg.levels)
    except WaveletLayoutError as exc:
        raise ConfigError(str(exc)) from None
    if not 0 < cfg.k <= cfg.window:
        raise ConfigError("need 0 < k <= window")
    try:
        t, mean, table = experiments.support_overlap_study(records, cfg.window, cfg.k, cfg.levels, cfg.sequences)
    except ValueError as exc:
        raise DataError(str(exc)) from None
    names = [name for name, x in records if min(cfg.sequences, np.asarray(x).size // cfg.window) >= 2]
    rows = [[int(ti), float(mi), *map(float, table[:, i])] for i, (ti, mi) in enumerate(zip(t, mean))]
    rows.append(["all", float(np.mean(mean)), *map(float, np.nanmean(table, axis=1))])
    _write_csv(out, ["t", "mean_overlap", *names], rows)
    results = {"mean_overlap": float(np.mean(mean)), "min_overlap": float(np.min(mean))}
    write_manifest(out.with_name(out.name + ".manifest.json"), "analyze-support", cfg, [out], results)
    print(f"mean overlap {results['mean_overlap']:.4f} (min over t {results['min_overlap']:.4f})")
    return EXIT_OK


def cmd_energy_curve(cfg: RunConfig) -> int:
    out = Path(_require(cfg.output, "--output"))
    records = load_records(cfg)
    try:
        curve, k = experiments.energy_curve_study(records, cfg.n, cfg.levels, cfg.segments_per_record,
                                                  cfg.threshold)
    except (ValueError, MetricError) as exc:
        raise DataError(str(exc)) from None
    _write_csv(out, ["K", "C_K"], [[i + 1, float(c)] for i, c in enumerate(curve)])
    write_manifest(out.with_name(out.name + ".manifest.json"), "energy-curve", cfg, [out], {"selected_k": k})
    print(f"selected K = {k} at threshold {cfg.threshold:g}")
    return EXIT_OK


COMMANDS = {
    "compress": cmd_compress,
    "decompress": cmd_decompress,
    "benchmark": cmd_benchmark,
    "analyze-support": cmd_analyze_support,
    "energy-curve": cmd_energy_curve,
}


# ---------------------------------------------------------------------------
# argument parsing


def _add_common(p: argparse.ArgumentParser):
    S = argparse.SUPPRESS
    p.add_argument("--config", default=None, help="key = value file with any of the options below")
    p.add_argument("-v", "--verbose", action="count", default=0)
    g = p.add_argument_group("data")
    g.add_argument("--input", action="append", default=S, help="input file (repeat for several records)")
    g.add_argument("--input-format", choices=INPUT_FORMATS, default=S)
    g.add_argument("--fs", type=float, default=S, help="input sample rate in Hz")
    g.add_argument("--scale", type=float, default=S, help="gain applied to every sample (e.g. 0.005)")
    g.add_argument("--column", type=int, default=S, help="CSV column holding the samples")
    g.add_argument("--synthetic", type=float, default=S, metavar="SECONDS",
                   help="use a generated signal of this length instead of --input")
    g.add_argument("--synthetic-kind", choices=("ecg", "model"), default=S)
    g.add_argument("--synthetic-seed", type=int, default=S)
    g.add_argument("--max-segments", type=int, default=S)
    g = p.add_argument_group("model and sensing")
    g.add_argument("--n", type=int, default=S, help="segment length")
    g.add_argument("--levels", type=int, default=S, help="wavelet decomposition levels")
    g.add_argument("--k-total", type=int, default=S)
    g.add_argument("--m", type=int, default=S, help=f"measurements per segment (default {DEFAULT_M})")
    g.add_argument("--ratio", type=float, default=S, help="M / N, used when --m is absent")
    g.add_argument("--matrix", default=S, help="dense_bernoulli, sparse_binary_i or sparse_binary_ii")
    g.add_argument("--q", type=int, default=S, help="nonzeros per column of sparse matrices")
    g.add_argument("--seed", type=int, default=S, help="matrix seed (first trial seed in benchmarks)")
    g = p.add_argument_group("recovery")
    g.add_argument("--algorithm", choices=ALGORITHMS, default=S)
    g.add_argument("--max-iters", type=int, default=S)
    g.add_argument("--residual-tol", type=float, default=S)
    g.add_argument("--step", choices=("normalized", "unit"), default=S)
    g = p.add_argument_group("outputs")
    g.add_argument("--output", "-o", default=S)
    g.add_argument("--jobs", type=int, default=S, help="worker processes")


def build_parser() -> argparse.ArgumentParser:
    S = argparse.SUPPRESS
    parser = argparse.ArgumentParser(prog="csecg", description="Compressed-sensing ECG codec and benchmarks.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compress", help="encode a recording into a CSEB stream")
    _add_common(p)
    p.add_argument("--support-out", default=S, help="also write ground-truth supports for the oracle")

    p = sub.add_parser("decompress", help="decode a stream and reconstruct the signal")
    _add_common(p)
    p.add_argument("stream", nargs="?", default=S)
    p.add_argument("--report", default=S, help="per-segment metrics CSV (needs the original signal)")
    p.add_argument("--support-file", default=S, help="ground-truth supports for the oracle algorithm")

    p = sub.add_parser("benchmark", help="oversampling and compression sweeps")
    _add_common(p)
    p.add_argument("--mode", choices=("both", "oversampling", "compression"), default=S)
    p.add_argument("--trials", type=int, default=S)
    p.add_argument("--ratios", default=S, help="comma-separated M/K_total values")
    p.add_argument("--m-grid", default=S, help="comma-separated measurement counts")
    p.add_argument("--target-cr", type=float, default=S, help="pick M to hit this compression ratio")
    p.add_argument("--algorithms", default=S, help="comma-separated algorithm names")

    p = sub.add_parser("analyze-support", help="overlap of consecutive wavelet supports")
    _add_common(p)
    p.add_argument("--window", type=int, default=S, help="sequence length (default 2048)")
    p.add_argument("--k", type=int, default=S, help="support size (default 225)")
    p.add_argument("--sequences", type=int, default=S, help="consecutive sequences per record")

    p = sub.add_parser("energy-curve", help="residual energy against sparsity")
    _add_common(p)
    p.add_argument("--segments-per-record", type=int, default=S)
    p.add_argument("--threshold", type=float, default=S)
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    flags = {k: v for k, v in vars(args).items() if k not in ("command", "config", "verbose")}
    try:
        file_values = read_config_file(args.config) if args.config else {}
        cfg = build_config(file_values, flags)
        cfg.validate(args.command)
        return COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except StreamError as exc:
        print(f"corrupt stream: {exc}", file=sys.stderr)
        return EXIT_STREAM
    except (DataError, MetricError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (SensingError, ModelError, WaveletLayoutError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
