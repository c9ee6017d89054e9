import json

import numpy as np
import pytest

from tsnovelty.cli import (
    EXIT_CONTRACT,
    EXIT_IO,
    EXIT_OK,
    EXIT_USAGE,
    main,
)


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def train_args(data, out, **extra):
    argv = ["train", "--data", str(data), "--out", str(out),
            "--m", "3", "--n", "5", "--batch-size", "8",
            "--epochs", "2", "--n-critic", "1", "--seed", "0"]
    for k, v in extra.items():
        argv += [f"--{k.replace('_', '-')}", str(v)]
    return argv


@pytest.fixture
def small_run(tmp_path, capsys):
    data = tmp_path / "series.csv"
    code, _, _ = run(capsys, "generate", "--kind", "lar", "--phi", "0.5",
                     "--len", "400", "--seed", "18", "--out", str(data))
    assert code == EXIT_OK
    ckpt = tmp_path / "model.json"
    code, _, _ = run(capsys, *train_args(data, ckpt))
    assert code == EXIT_OK
    return data, ckpt


class TestGenerate:
    def test_writes_csv_and_summary(self, tmp_path, capsys):
        out = tmp_path / "ma.csv"
        code, stdout, _ = run(capsys, "generate", "--kind", "ma",
                              "--len", "500", "--out", str(out))
        assert code == EXIT_OK
        summary = json.loads(stdout)
        assert summary["rows"] == 500
        assert len(out.read_text().strip().split("\n")) == 500

    def test_mc_output_is_binary(self, tmp_path, capsys):
        out = tmp_path / "mc.csv"
        code, _, _ = run(capsys, "generate", "--kind", "mc", "--p00", "0.6",
                         "--len", "200", "--out", str(out))
        assert code == EXIT_OK
        vals = {line for line in out.read_text().strip().split("\n")}
        assert vals <= {"0.0", "1.0"}

    def test_gmm_injection_changes_output(self, tmp_path, capsys):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        run(capsys, "generate", "--kind", "lar", "--len", "100", "--out", str(a))
        run(capsys, "generate", "--kind", "lar", "--len", "100", "--out", str(b),
            "--inject-gmm")
        assert a.read_text() != b.read_text()

    def test_missing_len_is_usage_error(self, tmp_path):
        with pytest.raises(SystemExit) as exc:
            main(["generate", "--kind", "ma"])
        assert exc.value.code == EXIT_USAGE

    def test_unstable_phi_is_contract_error(self, tmp_path, capsys):
        code, _, err = run(capsys, "generate", "--kind", "lar", "--phi", "1.5",
                           "--len", "100", "--out", str(tmp_path / "x.csv"))
        assert code == EXIT_CONTRACT
        assert "error" in err


class TestTrain:
    def test_checkpoint_written_with_summary(self, small_run, capsys):
        data, ckpt = small_run
        assert ckpt.exists()
        doc = json.loads(ckpt.read_text())
        assert doc["format_version"] == 1
        assert doc["config"]["epochs"] == 2

    def test_rerun_is_byte_identical(self, tmp_path, capsys):
        data = tmp_path / "d.csv"
        run(capsys, "generate", "--kind", "ma", "--len", "300",
            "--out", str(data))
        c1, c2 = tmp_path / "c1.json", tmp_path / "c2.json"
        assert run(capsys, *train_args(data, c1))[0] == EXIT_OK
        assert run(capsys, *train_args(data, c2))[0] == EXIT_OK
        assert c1.read_bytes() == c2.read_bytes()

    def test_epochs_zero_checkpoints_initial_model(self, tmp_path, capsys):
        data = tmp_path / "d.csv"
        run(capsys, "generate", "--kind", "ma", "--len", "300",
            "--out", str(data))
        ckpt = tmp_path / "c.json"
        code, stdout, _ = run(capsys, *train_args(data, ckpt, epochs=0))
        assert code == EXIT_OK
        assert json.loads(stdout)["final_losses"] == {}

    def test_loss_log_rows(self, tmp_path, capsys):
        data = tmp_path / "d.csv"
        run(capsys, "generate", "--kind", "ma", "--len", "300",
            "--out", str(data))
        log = tmp_path / "loss.csv"
        argv = train_args(data, tmp_path / "c.json") + ["--loss-log", str(log)]
        assert run(capsys, *argv)[0] == EXIT_OK
        lines = log.read_text().strip().split("\n")
        assert lines[0] == "epoch,critic_nu_loss,critic_x_loss,gen_loss"
        assert len(lines) == 3

    def test_case_preset_recorded(self, tmp_path, capsys):
        data = tmp_path / "d.csv"
        run(capsys, "generate", "--kind", "ma", "--len", "300",
            "--out", str(data))
        ckpt = tmp_path / "c.json"
        argv = train_args(data, ckpt) + ["--case", "ma"]
        assert run(capsys, *argv)[0] == EXIT_OK
        cfg = json.loads(ckpt.read_text())["config"]
        assert cfg["lambda2"] == 1.6
        assert cfg["mu"] == 1.0

    def test_flag_overrides_case_preset(self, tmp_path, capsys):
        data = tmp_path / "d.csv"
        run(capsys, "generate", "--kind", "ma", "--len", "300",
            "--out", str(data))
        ckpt = tmp_path / "c.json"
        argv = train_args(data, ckpt, lambda2="2.0") + ["--case", "ma"]
        assert run(capsys, *argv)[0] == EXIT_OK
        assert json.loads(ckpt.read_text())["config"]["lambda2"] == 2.0

    def test_missing_data_is_io_error(self, tmp_path, capsys):
        code, _, err = run(capsys, *train_args(tmp_path / "nope.csv",
                                               tmp_path / "c.json"))
        assert code == EXIT_IO

    def test_bad_config_key_is_contract_error(self, tmp_path, capsys):
        data = tmp_path / "d.csv"
        run(capsys, "generate", "--kind", "ma", "--len", "300",
            "--out", str(data))
        cfg = tmp_path / "cfg.json"
        cfg.write_text('{"learning_rate": 0.1}')
        code, _, _ = run(capsys, "train", "--data", str(data),
                         "--out", str(tmp_path / "c.json"),
                         "--config", str(cfg))
        assert code == EXIT_CONTRACT


class TestDetect:
    def test_scores_jsonl_and_summary(self, small_run, tmp_path, capsys):
        data, ckpt = small_run
        out = tmp_path / "scores.jsonl"
        code, stdout, _ = run(capsys, "detect", "--checkpoint", str(ckpt),
                              "--data", str(data), "--block", "20",
                              "--out", str(out))
        assert code == EXIT_OK
        summary = json.loads(stdout)
        lines = out.read_text().strip().split("\n")
        # 400 samples, m=3 -> 398 innovations -> 19 disjoint blocks of 20
        assert summary["blocks"] == len(lines) == 19
        first = json.loads(lines[0])
        assert set(first) == {"block_index", "start", "statistic", "p_value",
                              "decision"}

    def test_block_count_formula(self, small_run, tmp_path, capsys):
        data, ckpt = small_run
        out = tmp_path / "s.jsonl"
        _, stdout, _ = run(capsys, "detect", "--checkpoint", str(ckpt),
                           "--data", str(data), "--block", "50",
                           "--stride", "25", "--out", str(out))
        # floor((400 - 3 - 50 + 1)/25) + 1
        assert json.loads(stdout)["blocks"] == (400 - 3 - 50 + 1) // 25 + 1

    def test_missing_checkpoint_is_io_error(self, small_run, tmp_path, capsys):
        data, _ = small_run
        code, _, _ = run(capsys, "detect", "--checkpoint",
                         str(tmp_path / "nope.json"), "--data", str(data),
                         "--out", str(tmp_path / "s.jsonl"))
        assert code == EXIT_IO

    def test_domain_mismatch_warns(self, small_run, tmp_path, capsys):
        data, ckpt = small_run
        shifted = tmp_path / "shifted.csv"
        vals = [float(line) + 100.0
                for line in data.read_text().strip().split("\n")]
        shifted.write_text("\n".join(repr(v) for v in vals) + "\n")
        code, _, err = run(capsys, "detect", "--checkpoint", str(ckpt),
                           "--data", str(shifted), "--block", "20",
                           "--out", str(tmp_path / "s.jsonl"))
        assert code == EXIT_OK
        assert "normalization range" in err


class TestEval:
    def make_scores(self, path, p_values):
        rows = [json.dumps({"block_index": i, "start": i, "statistic": 1.0,
                            "p_value": p, "decision": "normal"})
                for i, p in enumerate(p_values)]
        path.write_text("\n".join(rows) + "\n")

    def test_roc_mode_perfect_separation(self, tmp_path, capsys):
        h0, h1 = tmp_path / "h0.jsonl", tmp_path / "h1.jsonl"
        self.make_scores(h0, [0.5, 0.6, 0.9])
        self.make_scores(h1, [0.001, 0.002])
        csv_out = tmp_path / "roc.csv"
        code, stdout, _ = run(capsys, "eval", "--mode", "roc",
                              "--scores-h0", str(h0), "--scores-h1", str(h1),
                              "--out-csv", str(csv_out))
        assert code == EXIT_OK
        assert json.loads(stdout)["auroc"] == 1.0
        assert csv_out.read_text().startswith("fpr,tpr\n")

    def test_roc_mode_requires_both_score_files(self, tmp_path, capsys):
        h0 = tmp_path / "h0.jsonl"
        self.make_scores(h0, [0.5])
        code, _, _ = run(capsys, "eval", "--mode", "roc",
                         "--scores-h0", str(h0))
        assert code == EXIT_CONTRACT

    def test_representation_mode_report(self, small_run, tmp_path, capsys):
        data, ckpt = small_run
        code, stdout, _ = run(capsys, "eval", "--mode", "representation",
                              "--checkpoint", str(ckpt), "--data", str(data),
                              "--w-repeats", "1", "--w-steps", "5")
        assert code == EXIT_OK
        report = json.loads(stdout)
        assert set(report) == {"p", "W_mean", "W_std", "W_marginal"}
        assert 0.0 <= report["p"] <= 1.0

    def test_reconstruction_mode_report(self, small_run, tmp_path, capsys):
        data, ckpt = small_run
        code, stdout, _ = run(capsys, "eval", "--mode", "reconstruction",
                              "--checkpoint", str(ckpt), "--data", str(data),
                              "--w-repeats", "1", "--w-steps", "5")
        assert code == EXIT_OK
        assert set(json.loads(stdout)) == {"W_mean", "W_std"}


class TestUsage:
    def test_no_subcommand(self):
        with pytest.raises(SystemExit) as exc:
            main([])
        assert exc.value.code == EXIT_USAGE

    def test_unknown_flag(self):
        with pytest.raises(SystemExit) as exc:
            main(["generate", "--kind", "ma", "--len", "10", "--frobnicate"])
        assert exc.value.code == EXIT_USAGE
