"""End-to-end command-line runs in temporary directories."""

import json

import numpy as np
import pytest

from wavesc.cli import main
from wavesc.fileio import read_pgm, read_series_csv, write_pgm, \
    write_series_csv
from wavesc.shrinkage import ThresholdPolicy, WaveletShrinker
from wavesc.wavelets import WaveletSpec


def run(*argv):
    return main([str(a) for a in argv])


def read_json(path):
    return json.loads(path.read_text())


@pytest.fixture()
def sample_series(tmp_path):
    """A 256-point noisy series with 25% of rows unobserved."""
    rng = np.random.default_rng(9)
    x = np.arange(256) / 256.0
    y = np.sin(2.0 * np.pi * x) * 3.0 + 0.3 * rng.standard_normal(256)
    observed = np.ones(256, dtype=bool)
    observed[rng.choice(256, size=64, replace=False)] = False
    path = tmp_path / "data.csv"
    write_series_csv(path, y, observed)
    return path


# ---------------------------------------------------------------------------
# denoise1d
# ---------------------------------------------------------------------------

def test_denoise1d_produces_fit_report_eta_manifest(tmp_path, sample_series):
    out = tmp_path / "fit"
    code = run("denoise1d", sample_series, "--algo", "refa", "--interp",
               "linear", "--eta", "--seed", "3", "--out", out)
    assert code == 0
    assert {p.name for p in out.iterdir()} == {"fhat.csv", "report.json",
                                               "eta.csv", "manifest.json"}
    report = read_json(out / "report.json")
    assert report["algorithm"] == "RefAI"
    assert isinstance(report["converged"], bool)
    assert len(report["f_hat"]) == 256
    lines = (out / "fhat.csv").read_text().splitlines()
    assert lines[0] == "index,x,f_hat" and len(lines) == 257
    manifest = read_json(out / "manifest.json")
    assert manifest["command"] == "denoise1d"
    assert manifest["seed"] == 3
    assert set(manifest["inputs"]) == {"input"}


def test_denoise1d_rerun_is_bit_identical(tmp_path, sample_series):
    a, b = tmp_path / "a", tmp_path / "b"
    assert run("denoise1d", sample_series, "--algo", "misc", "--M", "10",
               "--seed", "5", "--out", a) == 0
    assert run("denoise1d", sample_series, "--algo", "misc", "--M", "10",
               "--seed", "5", "--out", b) == 0
    for name in ("fhat.csv", "report.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    ma, mb = read_json(a / "manifest.json"), read_json(b / "manifest.json")
    ma.pop("wall_clock_seconds"), mb.pop("wall_clock_seconds")
    assert ma == mb


def test_denoise1d_fully_observed_sim_is_one_complete_shrink(tmp_path):
    rng = np.random.default_rng(11)
    y = rng.standard_normal(128)
    path = tmp_path / "full.csv"
    write_series_csv(path, y, np.ones(128, dtype=bool))
    out = tmp_path / "fit"
    assert run("denoise1d", path, "--algo", "sim", "--threshold",
               "universal", "--out", out) == 0
    report = read_json(out / "report.json")
    assert report["iterations"] == 1 and report["converged"] is True
    spec = WaveletSpec.from_name("db5", 3)
    baseline = WaveletShrinker()(y, spec, ThresholdPolicy("universal",
                                                          "hard"))
    np.testing.assert_allclose(report["f_hat"], baseline, atol=1e-12)


def test_denoise1d_error_paths(tmp_path):
    out = tmp_path / "o"
    bad = tmp_path / "bad.csv"
    bad.write_text("index,y,observed\n0,1.0,1\n1,2.0\n")
    assert run("denoise1d", bad, "--out", out) == 2

    nondyadic = tmp_path / "n.csv"
    nondyadic.write_text("index,y,observed\n0,1.0,1\n1,2.0,1\n2,3.0,1\n")
    assert run("denoise1d", nondyadic, "--out", out) == 2

    starved = tmp_path / "s.csv"
    starved.write_text("index,y,observed\n" + "".join(
        f"{i},,0\n" for i in range(8)))
    assert run("denoise1d", starved, "--out", out) == 2
    assert not out.exists()  # no partial outputs on validation failure


def test_denoise1d_numerical_failure_exit_code(tmp_path):
    # The log-corrected threshold has no real value at this tiny size.
    rng = np.random.default_rng(12)
    path = tmp_path / "tiny.csv"
    write_series_csv(path, rng.standard_normal(16), np.ones(16, dtype=bool))
    out = tmp_path / "o"
    code = run("denoise1d", path, "--threshold", "adjusted",
               "--primary-level", "2", "--out", out)
    assert code == 3


def test_denoise1d_overwrite_refusal_and_force(tmp_path, sample_series):
    out = tmp_path / "fit"
    assert run("denoise1d", sample_series, "--out", out) == 0
    assert run("denoise1d", sample_series, "--out", out) == 2
    assert run("denoise1d", sample_series, "--out", out, "--force") == 0


def test_seed_env_fallback(tmp_path, sample_series, monkeypatch):
    flagged, enved = tmp_path / "flag", tmp_path / "env"
    assert run("denoise1d", sample_series, "--algo", "misc", "--M", "5",
               "--seed", "77", "--out", flagged) == 0
    monkeypatch.setenv("WAVESC_SEED", "77")
    assert run("denoise1d", sample_series, "--algo", "misc", "--M", "5",
               "--out", enved) == 0
    assert (flagged / "fhat.csv").read_bytes() \
        == (enved / "fhat.csv").read_bytes()
    monkeypatch.setenv("WAVESC_SEED", "seven")
    assert run("denoise1d", sample_series, "--algo", "misc",
               "--out", tmp_path / "bad") == 2


# ---------------------------------------------------------------------------
# denoise2d
# ---------------------------------------------------------------------------

@pytest.fixture()
def sample_image(tmp_path):
    rng = np.random.default_rng(13)
    base = np.add.outer(np.linspace(50.0, 200.0, 32),
                        np.linspace(0.0, 30.0, 32))
    img = base + 4.0 * rng.standard_normal((32, 32))
    img_path = tmp_path / "img.pgm"
    write_pgm(img_path, img, 255, "P5")
    observed = rng.random((32, 32)) > 0.1
    mask_path = tmp_path / "mask.pgm"
    write_pgm(mask_path, np.where(observed, 255, 0), 255, "P2")
    return img_path, mask_path


def test_denoise2d_reconstructs_and_reports(tmp_path, sample_image):
    img_path, mask_path = sample_image
    out = tmp_path / "fit2d"
    assert run("denoise2d", img_path, mask_path, "--algo", "refa",
               "--wavelet", "db2", "--primary-level", "2",
               "--out", out) == 0
    recon, maxval, magic = read_pgm(out / "recon.pgm")
    assert recon.shape == (32, 32) and maxval == 255 and magic == "P5"
    report = read_json(out / "report.json")
    assert len(report["f_hat"]) == 32 and len(report["f_hat"][0]) == 32


def test_denoise2d_all_observed_equals_complete_shrink(tmp_path):
    rng = np.random.default_rng(14)
    img = np.clip(128.0 + 20.0 * rng.standard_normal((16, 16)), 0, 255)
    img_path = tmp_path / "img.pgm"
    write_pgm(img_path, img, 255, "P2")
    mask_path = tmp_path / "mask.pgm"
    write_pgm(mask_path, np.full((16, 16), 255.0), 255, "P2")
    out = tmp_path / "fit"
    assert run("denoise2d", img_path, mask_path, "--algo", "sim",
               "--wavelet", "haar", "--primary-level", "1",
               "--threshold", "universal", "--out", out) == 0
    report = read_json(out / "report.json")
    quantized, _, _ = read_pgm(img_path)
    spec = WaveletSpec.from_name("haar", 1)
    baseline = WaveletShrinker()(quantized, spec,
                                 ThresholdPolicy("universal", "hard"))
    np.testing.assert_allclose(np.asarray(report["f_hat"]), baseline,
                               atol=1e-10)
    assert report["iterations"] == 1


def test_denoise2d_shape_mismatch_is_an_input_error(tmp_path, sample_image):
    img_path, _ = sample_image
    small_mask = tmp_path / "small.pgm"
    write_pgm(small_mask, np.full((16, 16), 255.0), 255, "P2")
    assert run("denoise2d", img_path, small_mask,
               "--out", tmp_path / "o") == 2


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------

def test_simulate_emits_consistent_files(tmp_path):
    out = tmp_path / "sim"
    assert run("simulate", "--function", "doppler", "--n", "512", "--snr",
               "7", "--missing", "0.3", "--seed", "21", "--out", out) == 0
    y, observed = read_series_csv(out / "data.csv")
    assert y.size == 512
    assert int((~observed).sum()) == 154  # round(0.3 * 512)
    truth_lines = (out / "truth.csv").read_text().splitlines()
    assert truth_lines[0] == "index,x,f" and len(truth_lines) == 513
    again = tmp_path / "sim2"
    assert run("simulate", "--function", "doppler", "--n", "512", "--snr",
               "7", "--missing", "0.3", "--seed", "21", "--out", again) == 0
    assert (out / "data.csv").read_bytes() == (again / "data.csv").read_bytes()


def test_simulate_zero_missing_and_bad_parameters(tmp_path):
    out = tmp_path / "sim"
    assert run("simulate", "--missing", "0", "--n", "64", "--out", out) == 0
    _, observed = read_series_csv(out / "data.csv")
    assert observed.all()
    assert run("simulate", "--n", "100", "--out", tmp_path / "x") == 2
    assert run("simulate", "--missing", "1.5", "--out", tmp_path / "y") == 2
    assert run("simulate", "--snr", "-1", "--out", tmp_path / "z") == 2


def test_simulated_data_feeds_denoise1d(tmp_path):
    sim = tmp_path / "sim"
    assert run("simulate", "--n", "256", "--seed", "4", "--out", sim) == 0
    fit = tmp_path / "fit"
    assert run("denoise1d", sim / "data.csv", "--algo", "ref",
               "--out", fit) == 0
    assert read_json(fit / "report.json")["algorithm"] == "Ref"


# ---------------------------------------------------------------------------
# bench
# ---------------------------------------------------------------------------

def test_bench_writes_tables_and_respects_overrides(tmp_path):
    cfg = tmp_path / "scenario.cfg"
    cfg.write_text("function = heavisine\nn = 128\nreplicates = 3\n"
                   "algorithms = Sim,UniComp\nmissing = 0.3\nM = 5\n"
                   "seed = 6\n")
    out = tmp_path / "bench"
    assert run("bench", "--config", cfg, "--replicates", "4",
               "--out", out) == 0
    lines = (out / "metrics.csv").read_text().splitlines()
    assert lines[0].startswith("algorithm,replicate,")
    assert len(lines) == 1 + 4 * 2  # overridden replicates x algorithms
    summary = read_json(out / "summary.json")
    assert summary["scenario"]["replicates"] == 4
    assert summary["scenario"]["n"] == 128
    assert (out / "ranks.csv").read_text().splitlines()[0] \
        == "metric,algorithm,rank,median"


def test_bench_rerun_matches_except_timing(tmp_path):
    args = ("bench", "--function", "heavisine", "--n", "128",
            "--replicates", "3", "--algorithms", "Sim,RefA", "--missing",
            "0.25", "--seed", "8")
    a, b = tmp_path / "a", tmp_path / "b"
    assert run(*args, "--out", a) == 0
    assert run(*args, "--out", b) == 0

    def strip_runtime(text):
        rows = [line.split(",") for line in text.splitlines()]
        return [row[:6] + row[7:] for row in rows]

    assert strip_runtime((a / "metrics.csv").read_text()) \
        == strip_runtime((b / "metrics.csv").read_text())


def test_bench_rejects_unknown_keys_and_algorithms(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("wobble = 3\n")
    assert run("bench", "--config", cfg, "--out", tmp_path / "o") == 2
    assert run("bench", "--algorithms", "Sim,Quux", "--replicates", "2",
               "--out", tmp_path / "p") == 2


# ---------------------------------------------------------------------------
# poisson-demo
# ---------------------------------------------------------------------------

def test_poisson_demo_synthetic_run(tmp_path):
    out = tmp_path / "demo"
    assert run("poisson-demo", "--n", "128", "--missing", "0.05", "--M",
               "10", "--max-iter", "15", "--seed", "2", "--out", out) == 0
    lines = (out / "curves.csv").read_text().splitlines()
    assert lines[0] == ("index,x,intensity,counts,observed,"
                        "f_complete,f_missing")
    assert len(lines) == 129
    flags = [row.split(",")[4] for row in lines[1:]]
    assert flags.count("0") == round(0.05 * 128)
    report = read_json(out / "report.json")
    assert report["algorithm"] == "MISC"


def test_poisson_demo_user_counts_validation(tmp_path):
    partial = tmp_path / "partial.csv"
    partial.write_text("index,y,observed\n0,3,1\n1,,0\n2,4,1\n3,1,1\n")
    assert run("poisson-demo", "--counts", partial,
               "--out", tmp_path / "a") == 2
    negative = tmp_path / "neg.csv"
    negative.write_text("index,y,observed\n0,3,1\n1,-1,1\n2,4,1\n3,1,1\n")
    assert run("poisson-demo", "--counts", negative,
               "--out", tmp_path / "b") == 2


def test_poisson_demo_user_counts_run(tmp_path):
    rng = np.random.default_rng(15)
    counts = rng.poisson(12.0, size=128).astype(float)
    path = tmp_path / "counts.csv"
    write_series_csv(path, counts, np.ones(128, dtype=bool))
    out = tmp_path / "demo"
    assert run("poisson-demo", "--counts", path, "--M", "10", "--max-iter",
               "10", "--seed", "3", "--out", out) == 0
    lines = (out / "curves.csv").read_text().splitlines()
    assert lines[1].split(",")[2] == ""  # no known intensity column


# ---------------------------------------------------------------------------
# top level
# ---------------------------------------------------------------------------

def test_no_command_prints_help_and_fails(capsys):
    assert main([]) == 2
    assert "COMMAND" in capsys.readouterr().out


def test_version_flag():
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
