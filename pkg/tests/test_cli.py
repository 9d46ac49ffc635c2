"""The command-line interface: outputs, schemas, determinism, exit codes."""

import json
from pathlib import Path

import numpy as np
import pytest

from xordlab.cli import main


def run(argv):
    return main([str(a) for a in argv])


def test_bounds_prints_paper_figures(tmp_path, capsys):
    rc = run(["bounds", "--p-plus", "0.98", "--p-minus", "0.98",
              "--out-dir", tmp_path])
    out = capsys.readouterr().out
    assert rc == 0
    assert "m1 = 2" in out
    m2 = float(out.split("m2 = ")[1].split()[0])
    assert abs(m2 - 129) <= 10
    payload = json.loads((tmp_path / "bounds.json").read_text())
    assert payload["m1_bound"] == 2
    assert (tmp_path / "manifest.json").exists()


def test_bounds_rejects_bad_delta(tmp_path):
    rc = run(["bounds", "--p-plus", "0.98", "--p-minus", "0.98",
              "--delta", "0.001", "--out-dir", tmp_path])
    assert rc == 2


def test_missing_config_exits_2(tmp_path):
    rc = run(["xord-sweep", "--config", tmp_path / "nope.yaml",
              "--out-dir", tmp_path])
    assert rc == 2


def test_unknown_subcommand_exits_2():
    with pytest.raises(SystemExit) as exc:
        run(["frobnicate"])
    assert exc.value.code == 2


def test_dist_probe(tmp_path, capsys):
    rc = run(["dist-probe", "--d", "4", "--out-dir", tmp_path])
    assert rc == 0
    payload = json.loads((tmp_path / "probe.json").read_text())
    assert payload["p_plus_as_printed"] == 0.09375
    assert payload["p_plus_conditional"] == 0.1
    assert payload["p_minus_as_printed"] == payload["p_minus_conditional"]
    lines = (tmp_path / "classes.csv").read_text().splitlines()
    assert lines[0].startswith("# schema=xordlab/dist-classes/")
    assert len(lines) == 2 + 1 + 15  # two comments, header, 15 classes


def test_xor_run_outputs(tmp_path):
    rc = run(["xor-run", "--k", "30", "--seed", "3", "--out-dir", tmp_path])
    assert rc == 0
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["endpoint"] == "GlobalMin"
    filters = (tmp_path / "filters.csv").read_text().splitlines()
    assert filters[0] == "# schema=xordlab/filters/v1"
    # 2 stages x 2 groups x 30 filters
    assert len(filters) == 2 + 1 + 2 * 2 * 30
    trace = (tmp_path / "trace.csv").read_text().splitlines()
    assert trace[0].startswith("# schema=xordlab/trace/")


def test_xor_montecarlo_small(tmp_path, capsys):
    rc = run(["xor-montecarlo", "--k", "2", "--trials", "60",
              "--init-trials", "500", "--seed", "7", "--out-dir", tmp_path])
    assert rc == 0
    out = capsys.readouterr().out
    assert "local-min fraction" in out
    payload = json.loads((tmp_path / "montecarlo.json").read_text())
    assert payload["trials"] == 60


def test_xord_symmetry_cli(tmp_path):
    rc = run(["xord-symmetry", "--trials", "3", "--iters", "50",
              "--seed", "1", "--out-dir", tmp_path])
    assert rc == 0
    payload = json.loads((tmp_path / "symmetry.json").read_text())
    assert payload["failures"] == []


def test_xord_theorem_small_cli(tmp_path):
    rc = run(["xord-theorem-small", "--trials", "8", "--seed", "5",
              "--out-dir", tmp_path])
    assert rc == 0
    trials = sorted((tmp_path / "trials").glob("trial_*.json"))
    assert len(trials) == 8
    payload = json.loads(trials[0].read_text())
    assert payload["schema_version"] == 1


def test_xord_sweep_deterministic_outputs(tmp_path):
    cfg = tmp_path / "sweep.yaml"
    cfg.write_text("channels: [4, 20]\nruns: 4\n")
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert run(["xord-sweep", "--config", cfg, "--seed", "9",
                "--out-dir", out1]) == 0
    assert run(["xord-sweep", "--config", cfg, "--seed", "9",
                "--out-dir", out2, "--threads", "2"]) == 0
    assert (out1 / "sweep.csv").read_bytes() == (out2 / "sweep.csv").read_bytes()
    assert (out1 / "runs.csv").read_bytes() == (out2 / "runs.csv").read_bytes()
    header = (out1 / "sweep.csv").read_text().splitlines()
    assert header[1].startswith("# config_hash=")


def test_xord_sweep_rejects_unknown_key(tmp_path):
    cfg = tmp_path / "sweep.yaml"
    cfg.write_text("chanels: [4]\n")
    rc = run(["xord-sweep", "--config", cfg, "--out-dir", tmp_path])
    assert rc == 2


def test_xord_decoy_cli(tmp_path):
    rc = run(["xord-decoy", "--variant", "all-diverse", "--k", "2", "--k", "40",
              "--seed", "1", "--out-dir", tmp_path])
    assert rc == 0
    filters = (tmp_path / "filters.csv").read_text().splitlines()
    rows = [l for l in filters if l and not l.startswith("#")][1:]
    # per run: 2 stages x 2 sign groups x k filters
    assert len(rows) == 2 * 2 * 2 + 2 * 2 * 40
    assert (tmp_path / "report_k2.json").exists()
    assert (tmp_path / "report_k40.json").exists()


def test_mnist_cli_train_and_cluster(tmp_path, digit_data):
    # write the session digit data as IDX files for the CLI
    from xordlab.mnist.idx import write_idx_images, write_idx_labels

    train, test = digit_data
    data_dir = tmp_path / "data"
    data_dir.mkdir()
    write_idx_images(data_dir / "train-images-idx3-ubyte",
                     (train.images * 255).astype(np.uint8))
    write_idx_labels(data_dir / "train-labels-idx1-ubyte",
                     train.labels.astype(np.uint8))
    write_idx_images(data_dir / "t10k-images-idx3-ubyte",
                     (test.images * 255).astype(np.uint8))
    write_idx_labels(data_dir / "t10k-labels-idx1-ubyte",
                     test.labels.astype(np.uint8))

    cfg = tmp_path / "train.yaml"
    cfg.write_text("channels: 8\nn_train: 400\nepochs: 2\n")
    out = tmp_path / "train_out"
    rc = run(["mnist-train", "--data-dir", data_dir, "--config", cfg,
              "--seed", "2", "--out-dir", out])
    assert rc == 0
    metrics = (out / "metrics.csv").read_text().splitlines()
    assert metrics[2].split(",")[0] == "epoch"
    bank = json.loads((out / "filters.f32.json").read_text())
    assert bank["shape"] == [8, 3, 3]

    out2 = tmp_path / "cluster_out"
    rc = run(["mnist-cluster", "--data-dir", data_dir, "--config", cfg,
              "--seed", "2", "--out-dir", out2])
    assert rc == 0
    angles = (out2 / "angles.csv").read_text().splitlines()
    assert angles[0] == "# schema=xordlab/angle-histogram/v1"
    assert len([l for l in angles if l.startswith("trained")]) == 8
    centers_meta = json.loads((out2 / "centers.f32.json").read_text())
    assert centers_meta["shape"] == [4, 9]

    out3 = tmp_path / "ci_out"
    rc = run(["mnist-cluster-init", "--data-dir", data_dir,
              "--centers", out2 / "centers.f32", "--sizes", "200",
              "--runs", "1", "--seed", "2", "--out-dir", out3])
    assert rc == 0
    acc = (out3 / "acc_vs_size.csv").read_text().splitlines()
    assert acc[0] == "# schema=xordlab/accuracy-vs-trainsize/v1"
    assert acc[2].split(",")[0] == "n_train"
