"""End-to-end CLI pipeline on tiny configurations."""
import json

import pytest

from delaysnn.cli import main


def run(argv):
    return main(argv)


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    """gen-data + a quickly trained model shared by the CLI tests."""
    ws = tmp_path_factory.mktemp("cli")
    assert run(["gen-data", "--out", str(ws / "data.jsonl"), "--n", "30", "--seed", "1"]) == 0
    assert run([
        "train", "--data", str(ws / "data.jsonl"), "--out", str(ws / "model.dsnn"),
        "--widths", "2,4,4,3", "--d-max", "6", "--epochs", "2", "--lr", "1e-2",
        "--seed", "0", "--log", str(ws / "train.log"),
    ]) == 0
    return ws


def test_gen_data_and_train_artifacts(workspace):
    assert (workspace / "model.dsnn").exists()
    lines = (workspace / "train.log").read_text().strip().splitlines()
    assert len(lines) == 2
    rec = json.loads(lines[0])
    assert set(rec) == {"epoch", "loss", "accuracy"}


def test_prune_finetune_quantize(workspace):
    ws = workspace
    assert run([
        "prune", "--model", str(ws / "model.dsnn"), "--out", str(ws / "pruned.dsnn"),
        "--mode", "axonal", "--target", "3",
    ]) == 0
    assert run([
        "finetune", "--model", str(ws / "pruned.dsnn"), "--data", str(ws / "data.jsonl"),
        "--out", str(ws / "tuned.dsnn"), "--epochs", "1", "--seed", "0",
    ]) == 0
    assert run([
        "quantize", "--model", str(ws / "tuned.dsnn"), "--out", str(ws / "q.dsnn"),
        "--scheme", "int8",
    ]) == 0
    assert (ws / "q.dsnn").exists()


def test_sim_and_compare_backends(workspace):
    ws = workspace
    for backend in ("dense", "scdq"):
        assert run([
            "sim", "--model", str(ws / "model.dsnn"), "--data", str(ws / "data.jsonl"),
            "--backend", backend, "--out", str(ws / f"{backend}.json"), "--full",
            "--trace", str(ws / f"{backend}.trace"),
        ]) == 0
    assert run([
        "compare", "--ref", str(ws / "dense.json"), "--test", str(ws / "scdq.json"),
        "--out", str(ws / "cmp.json"),
    ]) == 0
    report = json.loads((ws / "cmp.json").read_text())
    assert report["consistency"] == 100.0
    assert all(r == 0 for r in report["vmem_rmse"])
    # event logs are line-oriented "sample conn t source d"
    line = (ws / "scdq.trace").read_text().splitlines()[0]
    assert len(line.split()) == 5


def test_unknown_backend_is_usage_error(workspace):
    with pytest.raises(SystemExit) as exc:
        run([
            "sim", "--model", str(workspace / "model.dsnn"),
            "--data", str(workspace / "data.jsonl"), "--backend", "warp",
        ])
    assert exc.value.code == 2


def test_missing_model_is_diagnostic_exit(workspace, capsys):
    code = run([
        "sim", "--model", str(workspace / "nope.dsnn"),
        "--data", str(workspace / "data.jsonl"),
    ])
    assert code == 1
    assert "error:" in capsys.readouterr().err


def test_report_memory_numbers(capsys, tmp_path):
    assert run(["report", "--memory", "--preset", "truenorth"]) == 0
    out = capsys.readouterr().out
    assert "34816" in out and "7936" in out
    assert run([
        "report", "--memory", "--preset", "all", "--out", str(tmp_path / "mem.json"),
        "--sweep", str(tmp_path / "sweep.csv"), "--sweep-max-levels", "8",
    ]) == 0
    reports = json.loads((tmp_path / "mem.json").read_text())
    by_preset = {r["preset"]: r for r in reports}
    assert by_preset["loihi"]["ring_bits"] == 24576
    assert by_preset["loihi"]["scdq_bits"] == 97536
    assert (tmp_path / "sweep.csv").read_text().startswith("num_levels,")


def test_cli_determinism(tmp_path):
    args_data = ["gen-data", "--out", None, "--n", "18", "--seed", "5"]
    outs = []
    for name in ("a", "b"):
        data = tmp_path / f"{name}.jsonl"
        model = tmp_path / f"{name}.dsnn"
        args_data[2] = str(data)
        assert run(args_data) == 0
        assert run([
            "train", "--data", str(data), "--out", str(model),
            "--widths", "2,4,3", "--d-max", "4", "--epochs", "2", "--seed", "3",
        ]) == 0
        outs.append((data.read_bytes(), model.read_bytes()))
    assert outs[0] == outs[1]
