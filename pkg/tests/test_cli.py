"""Tests for CLI commands."""

import json

import pytest
from click.testing import CliRunner
from conftest import make_record

from advbench.cli import main
from advbench.datasets import save_dataset
from advbench.modelfile import save_model
from advbench.store import load_record, save_record


@pytest.fixture
def cli_runner():
    """Create a CLI test runner."""
    return CliRunner()


@pytest.fixture
def bench_files(temp_dir, linear_model, line_dataset):
    """A model file and a dataset CSV on disk."""
    model_path = temp_dir / "linear.abnet"
    data_path = temp_dir / "points.csv"
    save_model(linear_model, model_path)
    save_dataset(line_dataset, data_path)
    return model_path, data_path


@pytest.fixture
def records_dir(temp_dir):
    """Two records for one model with known optimality scores."""
    directory = temp_dir / "records"
    save_record(make_record("A", {"h1": 0.0, "h2": 0.4, "h3": 1.2}), directory / "A.json")
    save_record(make_record("B", {"h1": 0.0, "h2": 0.8, "h3": None}), directory / "B.json")
    return directory


class TestRunCommand:
    """Tests for the run command."""

    def test_run_writes_record(self, cli_runner, mock_settings, bench_files, temp_dir):
        """Test a preset run writes a record within budget."""
        model_path, data_path = bench_files
        out = temp_dir / "fgsm.json"
        result = cli_runner.invoke(main, [
            "run",
            "--attack", "FGSM",
            "--model", str(model_path),
            "--dataset", str(data_path),
            "--budget", "2000",
            "--out", str(out),
        ])
        assert result.exit_code == 0, result.output
        assert "Wrote" in result.output
        record = load_record(out)
        assert record.model == "linear"
        assert len(record.records) == 5
        assert all(r.queries <= 2000 for r in record.records.values())

    def test_config_file_attack(self, cli_runner, mock_settings, bench_files, temp_dir):
        """Test an attack given as a JSON config file."""
        model_path, data_path = bench_files
        config = temp_dir / "attack.json"
        config.write_text(json.dumps({
            "name": "custom", "p": "l2", "direction": "norm", "steps": 20, "step_size": 0.05,
        }))
        out = temp_dir / "custom.json"
        result = cli_runner.invoke(main, [
            "run", "--attack", str(config), "--model", str(model_path),
            "--dataset", str(data_path), "--out", str(out),
        ])
        assert result.exit_code == 0, result.output
        assert load_record(out).attack == "custom"

    def test_unknown_preset(self, cli_runner, mock_settings, bench_files, temp_dir):
        """Test an unknown preset exits with the config error code."""
        model_path, data_path = bench_files
        result = cli_runner.invoke(main, [
            "run", "--attack", "NOPE", "--model", str(model_path),
            "--dataset", str(data_path), "--out", str(temp_dir / "x.json"),
        ])
        assert result.exit_code == 2
        assert "Unknown preset" in result.output

    def test_norm_mismatch(self, cli_runner, mock_settings, bench_files, temp_dir):
        """Test a norm that disagrees with the attack exits with code 2."""
        model_path, data_path = bench_files
        result = cli_runner.invoke(main, [
            "run", "--attack", "FGSM", "--norm", "l2", "--model", str(model_path),
            "--dataset", str(data_path), "--out", str(temp_dir / "x.json"),
        ])
        assert result.exit_code == 2

    def test_missing_dataset(self, cli_runner, mock_settings, bench_files, temp_dir):
        """Test an unreadable dataset exits with the I/O code."""
        model_path, _ = bench_files
        result = cli_runner.invoke(main, [
            "run", "--attack", "FGSM", "--model", str(model_path),
            "--dataset", str(temp_dir / "absent.csv"), "--out", str(temp_dir / "x.json"),
        ])
        assert result.exit_code == 4

    def test_malformed_model(self, cli_runner, mock_settings, bench_files, temp_dir):
        """Test a corrupt model file exits with the data error code."""
        _, data_path = bench_files
        bad = temp_dir / "bad.abnet"
        bad.write_bytes(b"")
        result = cli_runner.invoke(main, [
            "run", "--attack", "FGSM", "--model", str(bad),
            "--dataset", str(data_path), "--out", str(temp_dir / "x.json"),
        ])
        assert result.exit_code == 3


class TestRankCommand:
    """Tests for the rank command."""

    def test_rank(self, cli_runner, records_dir):
        """Test ranking prints GO per attack and writes the leaderboard."""
        result = cli_runner.invoke(main, ["rank", "--records-dir", str(records_dir)])
        assert result.exit_code == 0, result.output
        rows = [line.split() for line in result.output.splitlines() if line[:2] in ("A ", "B ")]
        assert [row[:2] for row in rows] == [["A", "1.0000"], ["B", "0.5000"]]
        board = json.loads((records_dir / "leaderboard.json").read_text())
        assert board["boards"][0]["norm"] == "l2"

    def test_rank_single_record(self, cli_runner, temp_dir):
        """Test a lone record ranks with GO one."""
        save_record(make_record("A", {"h1": 0.3}), temp_dir / "A.json")
        result = cli_runner.invoke(main, ["rank", "--records-dir", str(temp_dir)])
        assert result.exit_code == 0, result.output
        assert "1.0000" in result.output

    def test_rank_empty(self, cli_runner, temp_dir):
        """Test an empty records directory exits with the data error code."""
        result = cli_runner.invoke(main, ["rank", "--records-dir", str(temp_dir)])
        assert result.exit_code == 3

    def test_rank_mismatched_samples(self, cli_runner, temp_dir):
        """Test records over different samples exit with the data error code."""
        save_record(make_record("A", {"h1": 0.3}), temp_dir / "A.json")
        save_record(make_record("B", {"h2": 0.3}), temp_dir / "B.json")
        result = cli_runner.invoke(main, ["rank", "--records-dir", str(temp_dir)])
        assert result.exit_code == 3
        assert "B" in result.output


class TestCurvesCommand:
    """Tests for the curves command."""

    def test_curves(self, cli_runner, records_dir, temp_dir):
        """Test curves are written per attack plus the ensemble."""
        out_dir = temp_dir / "curves"
        result = cli_runner.invoke(main, [
            "curves", "--records-dir", str(records_dir), "--model", "m",
            "--norm", "l2", "--out-dir", str(out_dir),
        ])
        assert result.exit_code == 0, result.output
        assert sorted(p.name for p in out_dir.iterdir()) == ["A.csv", "B.csv", "ensemble.csv"]

    def test_curves_no_match(self, cli_runner, records_dir, temp_dir):
        """Test asking for an unknown model exits with the data error code."""
        result = cli_runner.invoke(main, [
            "curves", "--records-dir", str(records_dir), "--model", "other",
            "--norm", "l2", "--out-dir", str(temp_dir / "curves"),
        ])
        assert result.exit_code == 3


class TestMergeCommand:
    """Tests for the merge command."""

    def test_merge(self, cli_runner, mock_settings, records_dir, temp_dir):
        """Test merging two records builds the store leaderboard."""
        store = temp_dir / "store"
        for name in ("A", "B"):
            result = cli_runner.invoke(main, [
                "merge", "--store", str(store), "--record", str(records_dir / f"{name}.json"),
            ])
            assert result.exit_code == 0, result.output
        board = json.loads((store / "leaderboard.json").read_text())
        goes = {e["attack"]: e["GO"] for e in board["boards"][0]["entries"]}
        assert goes["A"] == pytest.approx(1.0)
        assert goes["B"] == pytest.approx(0.5)


class TestTrainZooCommand:
    """Tests for the train-zoo command."""

    def test_train_zoo_reproducible(self, cli_runner, mock_settings, temp_dir):
        """Test two zoo builds with the same seed write identical files."""
        outputs = []
        for name in ("first", "second"):
            out_dir = temp_dir / name
            result = cli_runner.invoke(main, [
                "train-zoo", "--dataset", "blobs", "--out-dir", str(out_dir), "--seed", "3",
            ])
            assert result.exit_code == 0, result.output
            outputs.append({p.name: p.read_bytes() for p in out_dir.iterdir()})
        assert set(outputs[0]) == {"plain.abnet", "adv.abnet", "zoo.json"}
        assert outputs[0] == outputs[1]
        manifest = json.loads(outputs[0]["zoo.json"])
        assert [m["id"] for m in manifest["models"]] == ["plain", "adv"]

    def test_train_zoo_bad_preset(self, cli_runner, mock_settings, temp_dir):
        """Test adversarial training with a min-norm preset exits with code 2."""
        result = cli_runner.invoke(main, [
            "train-zoo", "--out-dir", str(temp_dir / "zoo"), "--adv-preset", "DDN",
        ])
        assert result.exit_code == 2
