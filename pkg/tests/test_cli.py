import csv
import hashlib
import json

import numpy as np
import pytest

from csecg.cli import (EXIT_CONFIG, EXIT_DATA, EXIT_OK, EXIT_STREAM, ConfigError, RunConfig, build_config,
                       read_config_file, run)
from csecg.codec import decode_stream, deserialize
from csecg.experiments import compress_segments
from csecg.synthetic import ecg_like
from csecg.wavelet import synthesis_column


def _csv(path, x):
    np.savetxt(path, x, fmt="%.17g")
    return str(path)


def _rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


@pytest.fixture
def ecg_csv(tmp_path):
    return _csv(tmp_path / "ecg.csv", ecg_like(2560, seed=4))


class TestConfig:
    def test_defaults_follow_the_working_point(self):
        cfg = RunConfig()
        assert (cfg.n, cfg.levels, cfg.k_total, cfg.max_iters, cfg.residual_tol) == (256, 5, 34, 70, 1e-3)

    def test_file_then_flags(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("# comment\nm = 80\nseed=7\nalgorithms = iht, cosamp\ninput = a.csv, b.csv\n")
        values = read_config_file(path)
        cfg = build_config(values, {"seed": 9})
        assert (cfg.m, cfg.seed, cfg.algorithms, cfg.input) == (80, 9, ("iht", "cosamp"), ("a.csv", "b.csv"))

    def test_ratio_sets_measurements(self):
        assert build_config({}, {"ratio": 0.25}).measurements == 64

    @pytest.mark.parametrize("bad", ["colour = red\n", "m = many\n", "no equals sign\n"])
    def test_bad_files(self, tmp_path, bad):
        path = tmp_path / "bad.cfg"
        path.write_text(bad)
        with pytest.raises(ConfigError):
            read_config_file(path)

    @pytest.mark.parametrize("kw", [{"n": 250}, {"m": 256}, {"k_total": 7}, {"algorithm": "bpdn"},
                                    {"matrix": "gaussian"}, {"levels": 9}])
    def test_invariants(self, kw):
        with pytest.raises(ConfigError):
            RunConfig(synthetic=5, **kw).validate()


class TestCompress:
    def test_ten_segments_at_96(self, tmp_path, ecg_csv, capsys):
        out = tmp_path / "s.cseb"
        assert run(["compress", "--input", ecg_csv, "--m", "96", "-o", str(out)]) == EXIT_OK
        header, frames = deserialize(out.read_bytes())
        assert header.segment_count == len(frames) == 10 and header.m == 96
        log = (tmp_path / "s.cseb.log").read_text()
        assert "N=256 M=96 L=5 K_total=34 segments=10" in log
        assert "run_cr=" in log
        assert "mean CR" in capsys.readouterr().out

    def test_decoder_measurements_match_encoder(self, tmp_path, ecg_csv):
        out = tmp_path / "s.cseb"
        run(["compress", "--input", ecg_csv, "--m", "80", "--seed", "5", "-o", str(out)])
        segs = np.loadtxt(ecg_csv).reshape(10, 256)
        report = compress_segments(segs, m=80, levels=5, k_total=34, kind="dense_bernoulli", seed=5)
        assert report.stream == out.read_bytes()
        _, decoded = decode_stream(out.read_bytes())
        np.testing.assert_array_equal(decoded, report.encoder_states)

    def test_cr_grows_as_m_shrinks(self, tmp_path, ecg_csv):
        crs = []
        for m in (128, 96, 64):
            out = tmp_path / f"s{m}.cseb"
            assert run(["compress", "--input", ecg_csv, "--m", str(m), "-o", str(out)]) == EXIT_OK
            crs.append(json.loads((tmp_path / f"s{m}.cseb.manifest.json").read_text())["results"]["mean_segment_cr"])
        assert crs[0] < crs[1] < crs[2]

    def test_bad_input_is_a_data_error(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("1\n2\nthree\n")
        assert run(["compress", "--input", str(bad), "-o", str(tmp_path / "x")]) == EXIT_DATA
        assert run(["compress", "--input", str(tmp_path / "none.csv"), "-o", str(tmp_path / "x")]) == EXIT_DATA

    def test_config_errors(self, tmp_path, ecg_csv):
        assert run(["compress", "--input", ecg_csv, "--m", "300", "-o", str(tmp_path / "x")]) == EXIT_CONFIG
        assert run(["compress", "--input", ecg_csv]) == EXIT_CONFIG
        assert run(["compress", "-o", str(tmp_path / "x")]) == EXIT_CONFIG
        cfg = tmp_path / "c.cfg"
        cfg.write_text("unknown_key = 1\n")
        assert run(["compress", "--config", str(cfg), "--synthetic", "5", "-o", str(tmp_path / "x")]) == EXIT_CONFIG

    def test_config_file_drives_a_run(self, tmp_path, ecg_csv):
        cfg = tmp_path / "c.cfg"
        cfg.write_text(f"input = {ecg_csv}\nm = 70\nmatrix = sparse_binary_ii\nseed = 3\noutput = {tmp_path / 'c.cseb'}\n")
        assert run(["compress", "--config", str(cfg)]) == EXIT_OK
        header, _ = deserialize((tmp_path / "c.cseb").read_bytes())
        assert (header.m, header.matrix_kind.label, header.q, header.seed) == (70, "sparse_binary_ii", 6, 3)


class TestDecompress:
    def _compress(self, tmp_path, *extra):
        out = tmp_path / "s.cseb"
        assert run(["compress", "--synthetic", "12", "--m", "96", "-o", str(out), *extra]) == EXIT_OK
        return out

    def test_model_sparse_stream_mmb_beats_iht(self, tmp_path):
        out = tmp_path / "m.cseb"
        common = ["--synthetic", "12", "--synthetic-kind", "model"]
        assert run(["compress", *common, "--m", "96", "-o", str(out)]) == EXIT_OK
        prds = {}
        for alg in ("mmb-iht", "iht"):
            rep = tmp_path / f"{alg}.csv"
            assert run(["decompress", str(out), *common, "--algorithm", alg, "-o", str(tmp_path / f"{alg}.rec"),
                        "--report", str(rep)]) == EXIT_OK
            prds[alg] = np.mean([float(r["PRD"]) for r in _rows(rep)])
        assert prds["mmb-iht"] < prds["iht"]

    def test_support_threading_cross_check(self, tmp_path):
        out = self._compress(tmp_path)
        rec = tmp_path / "rec.csv"
        assert run(["decompress", str(out), "-o", str(rec), "--algorithm", "mmb-cosamp"]) == EXIT_OK
        rows = _rows(tmp_path / "rec.csv.supports.csv")
        assert rows[0]["prior"] == ""
        for prev, cur in zip(rows, rows[1:]):
            assert cur["prior"] == prev["support"]
        assert np.loadtxt(rec, skiprows=1).size == 256 * len(rows)

    def test_oracle_requires_support_file(self, tmp_path):
        out = self._compress(tmp_path, "--support-out", str(tmp_path / "sup.csv"))
        assert run(["decompress", str(out), "-o", str(tmp_path / "r"), "--algorithm", "oracle"]) == EXIT_CONFIG
        assert run(["decompress", str(out), "-o", str(tmp_path / "r"), "--algorithm", "oracle",
                    "--support-file", str(tmp_path / "sup.csv"), "--synthetic", "12",
                    "--report", str(tmp_path / "o.csv")]) == EXIT_OK
        assert len(_rows(tmp_path / "o.csv")) == 11

    def test_truncated_stream_names_the_frame(self, tmp_path, capsys):
        out = self._compress(tmp_path)
        cut = tmp_path / "cut.cseb"
        cut.write_bytes(out.read_bytes()[:-50])
        assert run(["decompress", str(cut), "-o", str(tmp_path / "r")]) == EXIT_STREAM
        assert "frame 10" in capsys.readouterr().err

    def test_not_a_stream(self, tmp_path):
        junk = tmp_path / "junk"
        junk.write_bytes(b"hello world")
        assert run(["decompress", str(junk), "-o", str(tmp_path / "r")]) == EXIT_STREAM
        assert run(["decompress", str(tmp_path / "missing"), "-o", str(tmp_path / "r")]) == EXIT_DATA

    def test_report_without_reference_is_a_config_error(self, tmp_path):
        out = self._compress(tmp_path)
        assert run(["decompress", str(out), "-o", str(tmp_path / "r"), "--report", str(tmp_path / "x.csv")]) == EXIT_CONFIG


def _digest(folder):
    return {p.name: hashlib.sha256(p.read_bytes()).hexdigest() for p in sorted(folder.iterdir())}


def test_runs_are_byte_identical_and_manifests_hash_artifacts(tmp_path):
    digests = []
    for attempt in ("a", "b"):
        folder = tmp_path / attempt
        folder.mkdir()
        stream = folder / "s.cseb"
        assert run(["compress", "--synthetic", "8", "--matrix", "sparse_binary_i", "--seed", "21",
                    "-o", str(stream)]) == EXIT_OK
        assert run(["decompress", str(stream), "--synthetic", "8", "-o", str(folder / "rec.csv"),
                    "--report", str(folder / "rep.csv")]) == EXIT_OK
        manifest = json.loads((folder / "rec.csv.manifest.json").read_text())
        for path, digest in manifest["artifacts"].items():
            assert hashlib.sha256(open(path, "rb").read()).hexdigest() == digest
        assert manifest["command"] == "decompress"
        assert json.loads((folder / "s.cseb.manifest.json").read_text())["config"]["seed"] == 21
        digests.append({k: v for k, v in _digest(folder).items() if "manifest" not in k})
    assert digests[0] == digests[1]


class TestBenchmark:
    def test_small_sweeps(self, tmp_path):
        out = tmp_path / "bench"
        assert run(["benchmark", "--synthetic", "4", "--trials", "3", "--ratios", "2,5", "--m-grid", "64,128",
                    "--algorithms", "mmb-iht,iht", "-o", str(out)]) == EXIT_OK
        over = _rows(out / "oversampling.csv")
        assert [r["algorithm"] for r in over] == ["mmb-iht", "iht", "mmb-iht", "iht"]
        for alg in ("mmb-iht", "iht"):
            vals = [float(r["RSNR"]) for r in over if r["algorithm"] == alg]
            assert vals[1] >= vals[0]
        comp = _rows(out / "compression.csv")
        crs = [float(r["CR"]) for r in comp if r["algorithm"] == "mmb-iht"]
        assert crs[0] > crs[1]
        manifest = json.loads((out / "manifest.json").read_text())
        assert set(manifest["artifacts"]) == {str(out / n) for n in
                                              ("oversampling.csv", "oversampling_segments.csv",
                                               "compression.csv", "compression_trials.csv")}

    def test_parallel_matches_serial(self, tmp_path):
        args = ["benchmark", "--synthetic", "3", "--trials", "2", "--mode", "oversampling", "--ratios", "3",
                "--algorithms", "mmb-cosamp"]
        assert run([*args, "-o", str(tmp_path / "s")]) == EXIT_OK
        assert run([*args, "--jobs", "2", "-o", str(tmp_path / "p")]) == EXIT_OK
        assert (tmp_path / "s/oversampling.csv").read_bytes() == (tmp_path / "p/oversampling.csv").read_bytes()

    def test_target_cr(self, tmp_path):
        out = tmp_path / "t"
        assert run(["benchmark", "--synthetic", "6", "--mode", "compression", "--target-cr", "6.4",
                    "--algorithms", "mmb-iht", "-o", str(out)]) == EXIT_OK
        cr = float(_rows(out / "compression.csv")[0]["CR"])
        assert abs(cr - 6.4) < 0.3


class TestAnalyzeSupport:
    def test_repeated_segment_overlaps_fully(self, tmp_path, rng):
        block = rng.standard_normal(2048)
        path = _csv(tmp_path / "rep.csv", np.tile(block, 10))
        out = tmp_path / "ov.csv"
        assert run(["analyze-support", "--input", path, "-o", str(out)]) == EXIT_OK
        rows = _rows(out)
        assert len(rows) == 10     # nine consecutive pairs plus the average row
        assert all(float(r["mean_overlap"]) == 1.0 for r in rows)

    def test_white_noise_overlap_is_k_over_n(self, tmp_path, rng):
        path = _csv(tmp_path / "noise.csv", rng.standard_normal(2048 * 100))
        out = tmp_path / "ov.csv"
        assert run(["analyze-support", "--input", path, "--k", "225", "--window", "2048", "-o", str(out)]) == EXIT_OK
        mean = float(_rows(out)[-1]["mean_overlap"])
        # 99 pairs of independent 225-subsets: sd of the mean about 0.0031
        assert abs(mean - 225 / 2048) < 0.02

    def test_too_short(self, tmp_path):
        path = _csv(tmp_path / "short.csv", np.ones(3000))
        assert run(["analyze-support", "--input", path, "-o", str(tmp_path / "o.csv")]) == EXIT_DATA


class TestEnergyCurve:
    def test_curve_ends_at_zero(self, tmp_path, capsys):
        out = tmp_path / "c.csv"
        assert run(["energy-curve", "--synthetic", "30", "-o", str(out)]) == EXIT_OK
        rows = _rows(out)
        assert len(rows) == 256 and float(rows[-1]["C_K"]) == 0.0
        vals = [float(r["C_K"]) for r in rows]
        assert all(b <= a for a, b in zip(vals, vals[1:]))
        selected = json.loads((tmp_path / "c.csv.manifest.json").read_text())["results"]["selected_k"]
        assert f"selected K = {selected}" in capsys.readouterr().out

    def test_one_sparse_segments(self, tmp_path):
        path = _csv(tmp_path / "atom.csv", np.tile(synthesis_column(200, 256, 5), 4))
        out = tmp_path / "c.csv"
        assert run(["energy-curve", "--input", path, "-o", str(out)]) == EXIT_OK
        assert float(_rows(out)[0]["C_K"]) < 1e-20
        assert json.loads((tmp_path / "c.csv.manifest.json").read_text())["results"]["selected_k"] == 1
