import json
import subprocess
import sys

import pytest

from noisyqnn.cli import main

TINY = ["--seeds", "2", "--epochs", "1", "--layers", "1", "--grid-min-exp", "-2", "--grid-step", "1"]


def test_calibrate(capsys):
    assert main(["calibrate", "--t1", "25us", "--t2", "28us", "--tgate", "240ns"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0].startswith("gamma_ad=9.55e-03")
    doc = json.loads(out[1])
    assert doc["gamma_ad"] == pytest.approx(9.55e-3, rel=0.01)
    assert doc["gamma_pd"] == pytest.approx(8.54e-3, rel=0.01)


def test_baselines(capsys):
    assert main(["baselines", "--format", "json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["loss_at_one"] == pytest.approx(1.706, abs=0.1)
    assert doc["loss_at_zero"] == pytest.approx(0.278, abs=0.05)


def test_usage_errors_exit_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["sweep", "--channel", "bitflip"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["train", "--noise-after-encoding", "maybe"])
    assert exc.value.code == 2


def test_data_errors_exit_1(tmp_path, capsys):
    bad = tmp_path / "bad.tab"
    bad.write_text("A\tB\n1\t2\n")
    assert main(["baselines", "--data", str(bad)]) == 1
    assert "bad.tab:1" in capsys.readouterr().err
    assert main(["baselines", "--data", str(tmp_path / "missing.tab")]) == 1
    assert main(["noisemap", "--sweep-dir", str(tmp_path), "--out", str(tmp_path / "o"), *TINY]) == 1


def test_train_outputs(tmp_path, capsys):
    out = tmp_path / "t"
    assert main(["train", "--channel", "pd", "--gamma", "0.01", "--epochs", "2", "--layers", "1", "--out", str(out)]) == 0
    lines = (out / "epochal.csv").read_text().splitlines()
    assert lines[0] == "channel,gamma,seed,epoch,train_mse,val_mse"
    assert len(lines) == 3 and lines[1].startswith("pd,0.01,")
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["command"] == "train"
    assert manifest["parameters"]["gamma"] == 0.01
    assert manifest["parameters"]["argv"][:2] == ["noisyqnn", "train"]
    assert "val_mse" in capsys.readouterr().out


def test_sweep_noisemap_depthstudy(tmp_path):
    sw = tmp_path / "sw"
    assert main(["sweep", "--channel", "ad,dp", *TINY, "--out", str(sw)]) == 0
    summary = (sw / "summary.csv").read_text().splitlines()
    assert summary[0] == "channel,gamma,mean_final_train_mse,mean_final_val_mse,stderr_val"
    assert len(summary) == 1 + 2 * 4
    nm = tmp_path / "nm"
    assert main(["noisemap", "--channel", "dp", "--sweep-dir", str(sw), *TINY, "--out", str(nm)]) == 0
    rows = (nm / "noisemap.csv").read_text().splitlines()
    assert rows[0] == "channel,gamma_train,gamma_eval,mean_val_mse"
    assert len(rows) == 1 + 16
    ds = tmp_path / "ds"
    assert main(["depthstudy", "--channel", "pd", "--layers-set", "1,2", *TINY, "--out", str(ds)]) == 0
    depth = (ds / "depth.csv").read_text().splitlines()
    assert depth[0] == "channel,layers,gamma_opt,mean_final_val_mse_at_opt,val_mse_noiseless"
    assert [r.split(",")[1] for r in depth[1:]] == ["1", "2"]
    assert (ds / "summary_L2.csv").exists() and (ds / "manifest.json").exists()


def test_noisemap_reuse_matches_fresh_run(tmp_path):
    sw, a, b = tmp_path / "sw", tmp_path / "a", tmp_path / "b"
    assert main(["sweep", "--channel", "ad", *TINY, "--out", str(sw)]) == 0
    assert main(["noisemap", "--channel", "ad", "--sweep-dir", str(sw), *TINY, "--out", str(a)]) == 0
    assert main(["noisemap", "--channel", "ad", *TINY, "--out", str(b)]) == 0
    assert (a / "noisemap.csv").read_bytes() == (b / "noisemap.csv").read_bytes()


def test_manifest_replay(tmp_path):
    out = tmp_path / "r"
    assert main(["sweep", "--channel", "pd", *TINY, "--out", str(out)]) == 0
    first = (out / "summary.csv").read_bytes()
    argv = json.loads((out / "manifest.json").read_text())["parameters"]["argv"]
    (out / "summary.csv").unlink()
    assert main(argv[1:]) == 0
    assert (out / "summary.csv").read_bytes() == first


def test_module_entry_point():
    res = subprocess.run(
        [sys.executable, "-m", "noisyqnn", "calibrate", "--t1", "10s", "--t2", "1s", "--tgate", "600us", "--format", "json"],
        capture_output=True,
        text=True,
        check=True,
    )
    doc = json.loads(res.stdout)
    assert doc["gamma_ad"] == pytest.approx(6.0e-5, rel=0.01)
