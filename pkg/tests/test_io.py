import json
import subprocess
import sys

import numpy as np
import pytest

from nce import Classifier, Config, Dataset, make_blobs
from nce import io as nio
from nce.cli import main
from nce.errors import ConfigError, DatasetValidationError, SchemaError

from schemas import BENCH, CORRECTION_ROW, METRICS, TRACE, VERIFICATION_ROW, validate, validate_csv


def test_dataset_round_trip_is_bitwise(tmp_path, rng):
    X = rng.standard_normal((50, 4)) * 10.0 ** rng.integers(-200, 200, (50, 4))
    ds = Dataset(X, rng.integers(0, 3, 50), 3, true_labels=rng.integers(0, 3, 50))
    path = tmp_path / "d.csv"
    nio.write_dataset(ds, path)
    assert nio.read_dataset(path, 3) == ds
    raw = path.read_bytes()
    assert b"\r" not in raw and raw.startswith(b"f0,f1,f2,f3,given_label,true_label\n")


def test_dataset_without_truth(tmp_path):
    ds = Dataset(np.eye(3), [0, 1, 2], 3)
    nio.write_dataset(ds, tmp_path / "d.csv")
    back = nio.read_dataset(tmp_path / "d.csv")
    assert back == ds and not back.has_true_labels


@pytest.mark.parametrize("text, needle", [
    ("f0,f1,label\n1,2,0\n", "given_label"),
    ("f0,f2,given_label\n1,2,0\n", "line 1"),
    ("f0,given_label\n1.0,0\n2.0\n", "line 3"),
    ("f0,given_label\n1.0,0\nabc,1\n", "line 3"),
    ("f0,given_label\n1.0,0\ninf,1\n", "line 3"),
    ("", "empty"),
])
def test_schema_errors(tmp_path, text, needle):
    path = tmp_path / "bad.csv"
    path.write_text(text)
    with pytest.raises(SchemaError, match=needle):
        nio.read_dataset(path)


def test_label_out_of_range(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("f0,given_label\n1.0,0\n2.0,7\n")
    with pytest.raises(DatasetValidationError):
        nio.read_dataset(path, num_classes=3)


def test_large_file_smoke(tmp_path):
    ds = make_blobs(4, 25_000, 8, 0.3, seed=0)
    path = tmp_path / "big.csv"
    nio.write_dataset(ds, path)
    back = nio.read_dataset(path, 4)
    assert back.n_samples == 100_000 and back == ds


def test_config_round_trip():
    cfg = Config(K=7, tau=0.6, apply_lab_to_clean=True, feature_source="embed", eta=1 / 3)
    assert nio.parse_config(nio.format_config(cfg)) == cfg


def test_config_parsing():
    cfg = nio.parse_config("# comment\nK = 5   # trailing\n\ntau=0.5\nuse_mixup = false\n")
    assert (cfg.K, cfg.tau, cfg.use_mixup) == (5, 0.5, False)
    for bad in ("nope = 1", "K = five", "tau = 1.5", "K 5", "use_mixup = maybe"):
        with pytest.raises(ConfigError):
            nio.parse_config(bad)


def test_checkpoint_round_trip(tmp_path, rng):
    for hidden in (0, 6):
        model = Classifier.init(5, 3, hidden, seed=4)
        nio.save_checkpoint(model, tmp_path / "m.ckpt")
        back = nio.load_checkpoint(tmp_path / "m.ckpt")
        X = rng.standard_normal((10, 5))
        assert np.array_equal(back.predict_proba(X), model.predict_proba(X))
    (tmp_path / "x.ckpt").write_text('{"format": "other"}')
    with pytest.raises(SchemaError):
        nio.load_checkpoint(tmp_path / "x.ckpt")


# ---- command line ------------------------------------------------------------

@pytest.fixture
def workdir(tmp_path):
    assert main(["gen", "--per-class", "100", "--noise-ratio", "0.4", "--seed", "3",
                 "--out", str(tmp_path / "d.csv"), "--test-out", str(tmp_path / "t.csv")]) == 0
    (tmp_path / "c.cfg").write_text("T_wu = 15\nT_tr = 40\nB = 32\nK = 10\ntau = 0.55\nhidden_dim = 32\n")
    return tmp_path


def test_cli_gen_train_eval(workdir):
    d = workdir
    assert main(["train", "--data", str(d / "d.csv"), "--config", str(d / "c.cfg"),
                 "--out", str(d / "m.ckpt"), "--trace", str(d / "trace.json"),
                 "--test", str(d / "t.csv")]) == 0
    assert main(["eval", "--data", str(d / "t.csv"), "--model", str(d / "m.ckpt"),
                 "--out", str(d / "metrics.json")]) == 0
    metrics = json.loads((d / "metrics.json").read_text())
    validate(metrics, METRICS)
    validate(json.loads((d / "trace.json").read_text()), TRACE)
    assert metrics["test_accuracy"] > 0.85


def test_cli_train_on_defaults(tmp_path):
    assert main(["gen", "--per-class", "50", "--out", str(tmp_path / "d.csv")]) == 0
    assert main(["train", "--data", str(tmp_path / "d.csv"), "--out", str(tmp_path / "m.ckpt")]) == 0
    assert main(["eval", "--data", str(tmp_path / "d.csv"), "--model", str(tmp_path / "m.ckpt"),
                 "--out", str(tmp_path / "metrics.json")]) == 0
    validate(json.loads((tmp_path / "metrics.json").read_text()), METRICS)


def test_cli_reports_validate(workdir):
    d = workdir
    assert main(["verify", "--data", str(d / "d.csv"), "--config", str(d / "c.cfg"),
                 "--out", str(d / "v.csv")]) == 0
    rows = validate_csv(d / "v.csv", VERIFICATION_ROW)
    assert len(rows) == 400
    assert main(["correct", "--data", str(d / "d.csv"), "--config", str(d / "c.cfg"),
                 "--tau-prime", "0.05", "--out", str(d / "c.csv")]) == 0
    cor = validate_csv(d / "c.csv", CORRECTION_ROW)
    assert {r["sample_id"] for r in cor} == {r["sample_id"] for r in rows if r["verdict"] == "noisy"}


def test_cli_verify_tau_zero_flags_everything(workdir):
    d = workdir
    assert main(["verify", "--data", str(d / "d.csv"), "--config", str(d / "c.cfg"),
                 "--tau", "0", "--out", str(d / "v.csv")]) == 0
    rows = validate_csv(d / "v.csv", VERIFICATION_ROW)
    assert all(r["verdict"] == "noisy" for r in rows)


def test_cli_is_bit_reproducible(workdir):
    d = workdir
    outs = []
    for run in ("a", "b"):
        assert main(["train", "--data", str(d / "d.csv"), "--config", str(d / "c.cfg"),
                     "--seed", "5", "--out", str(d / f"{run}.ckpt"),
                     "--trace", str(d / f"{run}.json")]) == 0
        trace = nio.strip_metadata(json.loads((d / f"{run}.json").read_text()))
        outs.append(((d / f"{run}.ckpt").read_bytes(), json.dumps(trace)))
    assert outs[0] == outs[1]


def test_cli_bench_output_validates(tmp_path, monkeypatch):
    from nce import bench
    tiny = bench.Preset("tiny", (bench.SETTINGS["sym-0.5"],), ("ce", "nce"),
                        train_per_class=40, test_per_class=20,
                        config=Config(T_wu=2, T_tr=3, hidden_dim=8, K=5, B=32))
    monkeypatch.setitem(bench.PRESETS, "table1-desk", tiny)
    assert main(["bench", "--seeds", "1", "--out", str(tmp_path / "r.json")]) == 0
    validate(json.loads((tmp_path / "r.json").read_text()), BENCH)


@pytest.mark.parametrize("argv", [
    ["gen", "--bogus"],
    ["train", "--data", "/nonexistent.csv", "--out", "x"],
])
def test_cli_failures_exit_nonzero(argv, tmp_path):
    proc = subprocess.run([sys.executable, "-m", "nce", *argv], capture_output=True,
                          text=True, cwd=tmp_path)
    assert proc.returncode != 0 and proc.stderr


def test_cli_invalid_config_value(workdir, capsys):
    (workdir / "bad.cfg").write_text("tau = 2\n")
    code = main(["verify", "--data", str(workdir / "d.csv"), "--config", str(workdir / "bad.cfg"),
                 "--out", str(workdir / "v.csv")])
    assert code == 1 and "tau" in capsys.readouterr().err
