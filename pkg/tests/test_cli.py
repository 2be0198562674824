import json

import numpy as np
import pytest

from qnnsim import cli

from test_data_io import write_idx


@pytest.fixture
def image_dir(tmp_path):
    """A data dir with a tiny synthetic 'mnist' pool (classes 1 and 9)."""
    rng = np.random.default_rng(0)
    m = 40
    images = rng.integers(0, 256, size=(m, 28, 28)).astype(np.uint8)
    labels = np.array([1 if i % 2 == 0 else 9 for i in range(m)], np.uint8)
    sub = tmp_path / "mnist"
    sub.mkdir()
    write_idx(sub, images, labels, name="t")
    # _find_idx_pair looks for the plain names
    (sub / "t-images-idx3-ubyte").rename(sub / "images-idx3-ubyte")
    (sub / "t-labels-idx1-ubyte").rename(sub / "labels-idx1-ubyte")
    return tmp_path


def spt_train_args(tmp_path, out, extra=()):
    return [
        "train", "--dataset", "spt4", "--depth", "1", "--ent", "cx",
        "--spt-step", "0.25", "--num-train", "6", "--num-test", "2",
        "--batch", "2", "--iters", "2", "--eval-every", "1",
        "--data-dir", str(tmp_path), "--out", str(out), *extra,
    ]


def test_gen_spt_writes_file(tmp_path, capsys):
    out = tmp_path / "spt3.qnnspt"
    rc = cli.main([
        "gen-spt", "--qubits", "3", "--step", "0.1", "--out", str(out),
    ])
    assert rc == 0
    assert out.exists()
    captured = capsys.readouterr().out
    assert "wrote 20 ground states" in captured
    assert "gap: min=" in captured


def test_gen_spt_rejects_zero_step(tmp_path):
    with pytest.raises(SystemExit):
        cli.main(["gen-spt", "--qubits", "3", "--step", "0"])


def test_train_rejects_zero_iters(tmp_path):
    args = spt_train_args(tmp_path, tmp_path / "o")
    args[args.index("--iters") + 1] = "0"
    with pytest.raises(SystemExit):
        cli.main(args)


def test_train_t_evo_needs_analog(tmp_path):
    with pytest.raises(SystemExit):
        cli.main(spt_train_args(tmp_path, tmp_path / "o", ["--t-evo", "0.5"]))


def test_train_analog_needs_t_evo(tmp_path):
    args = spt_train_args(tmp_path, tmp_path / "o")
    args[args.index("cx")] = "analog"
    with pytest.raises(SystemExit):
        cli.main(args)


def test_grad_check_rejects_zero_trials():
    with pytest.raises(SystemExit):
        cli.main(["grad-check", "--trials", "0"])


def test_train_on_spt_runs(tmp_path, capsys):
    out = tmp_path / "out"
    rc = cli.main(spt_train_args(tmp_path, out))
    assert rc == 0
    captured = capsys.readouterr().out
    assert "final train_acc=" in captured
    runs = (out / "runs.csv").read_text().strip().split("\n")
    assert runs[0].startswith("dataset,encoding,ent_kind,depth")
    # snapshots at 0, 1, 2
    assert len(runs) == 4
    assert (tmp_path / "spt" / "spt4_step0.25.qnnspt").exists()  # cached


def test_train_deterministic_bytes(tmp_path):
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    assert cli.main(spt_train_args(tmp_path, out_a)) == 0
    assert cli.main(spt_train_args(tmp_path, out_b)) == 0
    assert (out_a / "runs.csv").read_bytes() == (out_b / "runs.csv").read_bytes()


def test_train_scale_warning_with_amplitude(tmp_path, capsys):
    out = tmp_path / "out"
    rc = cli.main(spt_train_args(tmp_path, out, ["--scale", "2.0"]))
    assert rc == 0
    assert "ignored" in capsys.readouterr().err
    # the ignored flag must not leak into the CSV
    line = (out / "runs.csv").read_text().split("\n")[1]
    assert line.split(",")[4] == ""  # scale column empty


def test_train_unknown_dataset(tmp_path, capsys):
    rc = cli.main([
        "train", "--dataset", "cifar", "--depth", "1",
        "--data-dir", str(tmp_path), "--out", str(tmp_path / "o"),
    ])
    assert rc == 1
    assert "unknown dataset" in capsys.readouterr().err


def test_train_on_images_infers_qubits(image_dir, capsys):
    out = image_dir / "out"
    rc = cli.main([
        "train", "--dataset", "mnist", "--depth", "1",
        "--num-train", "16", "--num-test", "4", "--batch", "4",
        "--iters", "2", "--eval-every", "2",
        "--data-dir", str(image_dir), "--out", str(out),
    ])
    assert rc == 0
    assert "final train_acc=" in capsys.readouterr().out


def test_train_qubit_override_too_small(image_dir, capsys):
    rc = cli.main([
        "train", "--dataset", "mnist", "--depth", "1", "--qubits", "3",
        "--num-train", "16", "--num-test", "4", "--batch", "4",
        "--iters", "1", "--data-dir", str(image_dir),
        "--out", str(image_dir / "o"),
    ])
    assert rc == 1
    assert "do not fit" in capsys.readouterr().err


def test_train_block_defaults_scale(image_dir):
    out = image_dir / "out"
    rc = cli.main([
        "train", "--dataset", "mnist", "--encoding", "block",
        "--depth", "9", "--num-train", "8", "--num-test", "2",
        "--batch", "2", "--iters", "1", "--eval-every", "1",
        "--data-dir", str(image_dir), "--out", str(out),
    ])
    assert rc == 0
    line = (out / "runs.csv").read_text().strip().split("\n")[1]
    cells = line.split(",")
    assert cells[1] == "block" and cells[4] == "2.0"


def test_sweep_end_to_end(tmp_path, capsys):
    spec = {
        "dataset": "spt4",
        "spt_step": 0.25,
        "depths": [1, 2],
        "seeds": 2,
        "num_train": 6,
        "num_test": 2,
        "batch": 2,
        "iters": 2,
        "eval_every": 2,
    }
    spec_path = tmp_path / "sweep.json"
    spec_path.write_text(json.dumps(spec))
    out = tmp_path / "out"
    rc = cli.main([
        "sweep", "--spec", str(spec_path), "--out", str(out),
        "--data-dir", str(tmp_path),
    ])
    assert rc == 0
    assert "4 runs over 2 cells (0 aborted)" in capsys.readouterr().out
    summary = (out / "summary_depth.csv").read_text().strip().split("\n")
    assert len(summary) == 3  # header + one row per depth
    header = summary[0].split(",")
    rows = [dict(zip(header, ln.split(","))) for ln in summary[1:]]
    assert [r["depth"] for r in rows] == ["1", "2"]
    assert all(r["n_runs"] == "2" for r in rows)
    # cell seeds follow seed_base + cell_index * 10007 + rep
    assert rows[0]["seeds"] == "0;1"
    assert rows[1]["seeds"] == "10007;10008"


def test_sweep_seeds_override(tmp_path):
    spec = {
        "dataset": "spt4", "spt_step": 0.25, "depths": [1], "seeds": 3,
        "num_train": 6, "num_test": 2, "batch": 2, "iters": 1,
        "eval_every": 1,
    }
    spec_path = tmp_path / "sweep.json"
    spec_path.write_text(json.dumps(spec))
    out = tmp_path / "out"
    rc = cli.main([
        "sweep", "--spec", str(spec_path), "--out", str(out),
        "--data-dir", str(tmp_path), "--seeds", "1",
    ])
    assert rc == 0
    runs = (out / "runs.csv").read_text().strip().split("\n")
    assert len(runs) == 1 + 1 * 2  # one run, snapshots at 0 and 1


def test_sweep_empty_axis_rejected(tmp_path):
    spec_path = tmp_path / "sweep.json"
    spec_path.write_text(json.dumps({"dataset": "spt4", "depths": []}))
    with pytest.raises(SystemExit):
        cli.main(["sweep", "--spec", str(spec_path)])


def test_sweep_needs_axis(tmp_path):
    spec_path = tmp_path / "sweep.json"
    spec_path.write_text(json.dumps({"dataset": "spt4"}))
    with pytest.raises(SystemExit):
        cli.main(["sweep", "--spec", str(spec_path)])


def test_grad_check_passes(capsys):
    rc = cli.main(["grad-check", "--trials", "5", "--seed", "1"])
    assert rc == 0
    out = capsys.readouterr().out
    assert "worst deviation" in out


def test_grad_check_fixed_shape(capsys):
    rc = cli.main([
        "grad-check", "--trials", "2", "--qubits", "3", "--depth", "2",
    ])
    assert rc == 0


def test_resolve_data_dir_precedence(monkeypatch, tmp_path):
    monkeypatch.delenv("QNN_DATA_DIR", raising=False)
    assert cli.resolve_data_dir(None) == cli.Path("data")
    monkeypatch.setenv("QNN_DATA_DIR", str(tmp_path))
    assert cli.resolve_data_dir(None) == tmp_path
    assert cli.resolve_data_dir("elsewhere") == cli.Path("elsewhere")
