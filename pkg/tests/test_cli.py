import os

import pytest

from idsaug import dataio
from idsaug.cli import RunConfig, build_run_config, main, parse_config_file



@pytest.fixture
def bench_csv(tmp_path):
    path = tmp_path / "bench.csv"
    code = main(["synthbench", "--out", str(path), "--counts", "300,24,6",
                 "--dim", "6", "--seed", "3"])
    assert code == 0
    return path


FAST_FLAGS = [
    "--scarce-min-ir", "5", "--rare-min-ir", "30",
    "--san-epochs", "6", "--san-pairs", "128",
    "--scgan-epochs", "40", "--clf-epochs", "8",
]


def run_all(bench_csv, out, method="baseline", seed="0", extra=()):
    return main(["run-all", "--dataset", str(bench_csv), "--out", str(out),
                 "--method", method, "--seed", seed, *FAST_FLAGS, *extra])


class TestConfigHandling:
    def test_invalid_ratio_fails_before_any_work(self, tmp_path, capsys):
        code = main(["run-all", "--dataset", str(tmp_path / "missing.csv"),
                     "--train-ratio", "1.5", "--out", str(tmp_path / "r")])
        assert code == 2
        assert "train_ratio" in capsys.readouterr().err

    def test_unknown_config_key_rejected(self, tmp_path, capsys):
        config = tmp_path / "cfg.txt"
        config.write_text("not_a_key = 1\n")
        code = main(["run-all", "--config", str(config), "--out", str(tmp_path / "r")])
        assert code == 2
        assert "not_a_key" in capsys.readouterr().err

    def test_flags_override_config_file(self, tmp_path):
        config = tmp_path / "cfg.txt"
        config.write_text("method = baseline\nmaster_seed = 4\nskn_k = 9\n")
        merged = build_run_config(parse_config_file(config),
                                  {"method": "smote", "master_seed": None})
        assert merged.method == "smote"   # flag wins
        assert merged.master_seed == 4    # file value survives
        assert merged.skn_k == 9

    def test_bool_and_comment_parsing(self, tmp_path):
        config = tmp_path / "cfg.txt"
        config.write_text("# comment\nemit_pca = true\nstratified = false\n")
        merged = build_run_config(parse_config_file(config), {})
        assert merged.emit_pca is True
        assert merged.stratified is False

    def test_invalid_method_rejected(self):
        from idsaug.errors import ConfigError
        with pytest.raises(ConfigError):
            RunConfig(method="magic").validate()

    def test_snapshot_round_trips_through_parser(self, tmp_path):
        config = RunConfig(method="ros", master_seed=11, eta=0.3)
        path = tmp_path / "snap.txt"
        path.write_text(config.snapshot())
        rebuilt = build_run_config(parse_config_file(path), {})
        assert rebuilt.method == "ros"
        assert rebuilt.master_seed == 11
        assert rebuilt.eta == 0.3


class TestSynthbench:
    def test_deterministic_output(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        for path in (a, b):
            assert main(["synthbench", "--out", str(path), "--counts", "50,10,4",
                         "--dim", "5", "--seed", "1"]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_header_width(self, tmp_path):
        path = tmp_path / "bench.csv"
        main(["synthbench", "--out", str(path), "--counts", "30,5,2", "--dim", "7"])
        assert len(path.read_text().splitlines()[0].split(",")) == 8


class TestRunAll:
    def test_baseline_produces_report_and_identity_augmentation(self, bench_csv,
                                                                tmp_path, capsys):
        out = tmp_path / "base"
        assert run_all(bench_csv, out) == 0
        assert "macro" in capsys.readouterr().out
        for name in ("config.txt", "levels.csv", "augmented.csv", "norm.json",
                     "classifier.ckpt", "metrics/metrics.json", "stage_report.txt",
                     "test_fingerprint.txt", "split_train.csv", "split_test.csv"):
            assert (out / name).exists(), name
        augmented, _ = dataio.load_dataset(out / "augmented.csv",
                                           ignore_columns=("provenance",))
        train, _ = dataio.load_dataset(out / "split_train.csv")
        assert augmented.n_rows == train.n_rows

    def test_s2cgan_method_tops_up_counts(self, bench_csv, tmp_path):
        out = tmp_path / "gan"
        assert run_all(bench_csv, out, method="s2cgan") == 0
        augmented, _ = dataio.load_dataset(out / "augmented.csv",
                                           ignore_columns=("provenance",))
        counts = {augmented.label_names[c]: n for c, n in augmented.class_counts().items()}
        # 240 train rows of the majority; both minority classes topped up
        assert counts["class_1"] == counts["class_0"]
        assert counts["class_2"] == 19  # scarce train count (24 * 0.8 rounds to 19)
        assert (out / "san.ckpt").exists()
        text = (out / "augmented.csv").read_text()
        assert "scgan" in text and "skn" in text

    def test_ros_and_smote_methods_run(self, bench_csv, tmp_path):
        for method in ("ros", "smote"):
            assert run_all(bench_csv, tmp_path / method, method=method) == 0

    def test_missing_dataset_flag_is_config_error(self, tmp_path):
        assert main(["run-all", "--out", str(tmp_path / "r")]) == 2

    def test_nonexistent_dataset_path_is_config_error(self, tmp_path, capsys):
        code = main(["run-all", "--dataset", str(tmp_path / "nope.csv"),
                     "--out", str(tmp_path / "r")])
        assert code == 2
        assert "does not exist" in capsys.readouterr().err

    def test_env_var_sets_default_output_root(self, bench_csv, tmp_path, monkeypatch):
        monkeypatch.setenv("IDSAUG_OUT", str(tmp_path / "root"))
        assert main(["preprocess", "--dataset", str(bench_csv), "--seed", "6",
                     *FAST_FLAGS]) == 0
        assert (tmp_path / "root" / "s2cgan-seed6" / "split_train.csv").exists()


class TestStageCommands:
    def test_full_stagewise_flow(self, bench_csv, tmp_path, capsys):
        run = str(tmp_path / "staged")
        base = ["--dataset", str(bench_csv), "--out", run, "--seed", "5", *FAST_FLAGS]
        assert main(["preprocess", *base]) == 0
        assert main(["levels", "--run", run, *FAST_FLAGS]) == 0
        assert main(["train-san", "--run", run, *FAST_FLAGS]) == 0
        assert main(["train-scgan", "--run", run, "--seed", "5", *FAST_FLAGS]) == 0
        assert main(["augment", "--run", run, "--method", "s2cgan", "--seed", "5",
                     *FAST_FLAGS]) == 0
        assert main(["train-clf", "--run", run, "--seed", "5", *FAST_FLAGS]) == 0
        assert main(["eval", "--run", run, *FAST_FLAGS]) == 0
        out = capsys.readouterr().out
        assert "macro" in out
        assert os.path.exists(os.path.join(run, "metrics", "metrics.json"))

    def test_eval_before_preprocess_fails_cleanly(self, tmp_path, capsys):
        run = tmp_path / "empty"
        run.mkdir()
        assert main(["eval", "--run", str(run)]) == 1

    def test_tampered_test_split_detected_at_eval(self, bench_csv, tmp_path, capsys):
        out = tmp_path / "run"
        assert run_all(bench_csv, out) == 0
        split = out / "split_test.csv"
        lines = split.read_text().splitlines()
        del lines[1]
        split.write_text("\n".join(lines) + "\n")
        assert main(["eval", "--run", str(out), *FAST_FLAGS]) == 1
        assert "fingerprint" in capsys.readouterr().err

    def test_augment_requires_checkpoints_or_trains(self, bench_csv, tmp_path):
        run = str(tmp_path / "nockpt")
        base = ["--dataset", str(bench_csv), "--out", run, "--seed", "2", *FAST_FLAGS]
        assert main(["preprocess", *base]) == 0
        # no train-san / train-scgan: augment falls back to training in place
        assert main(["augment", "--run", run, "--method", "s2cgan", "--seed", "2",
                     *FAST_FLAGS]) == 0
        assert os.path.exists(os.path.join(run, "augmented.csv"))


class TestRunDirSelfDescription:
    def test_snapshotted_config_reproduces_reports_byte_for_byte(self, bench_csv,
                                                                 tmp_path):
        first = tmp_path / "first"
        assert run_all(bench_csv, first, method="s2cgan", seed="3") == 0
        second = tmp_path / "second"
        code = main(["run-all", "--config", str(first / "config.txt"),
                     "--out", str(second)])
        assert code == 0
        for name in ("metrics/metrics.json", "metrics/per_class.csv", "augmented.csv"):
            assert (first / name).read_bytes() == (second / name).read_bytes(), name

    def test_full_scope_level_report(self, bench_csv, tmp_path):
        out = tmp_path / "run"
        assert run_all(bench_csv, out) == 0
        assert (out / "levels_full.csv").exists()
        assert main(["levels", "--run", str(out), "--scope", "full",
                     *FAST_FLAGS]) == 0
        # full-scope counts cover train plus test rows
        full_rows = (out / "levels_full.csv").read_text().splitlines()[1:]
        train_rows = (out / "levels.csv").read_text().splitlines()[1:]
        full_total = sum(int(r.split(",")[1]) for r in full_rows)
        train_total = sum(int(r.split(",")[1]) for r in train_rows)
        assert full_total == 330 and train_total == 264

    def test_pca_emission_flag(self, bench_csv, tmp_path):
        out = tmp_path / "run"
        assert run_all(bench_csv, out, extra=("--emit-pca", "true")) == 0
        pca = (out / "metrics" / "pca.csv").read_text().splitlines()
        assert pca[0] == "x,y,label"
        assert len(pca) > 1

    def test_scgan_histories_written(self, bench_csv, tmp_path):
        out = tmp_path / "gan"
        assert run_all(bench_csv, out, method="s2cgan") == 0
        histories = [p for p in os.listdir(out) if p.startswith("history_scgan_")]
        assert histories
        lines = (out / histories[0]).read_text().splitlines()
        assert lines[0] == "epoch,d_loss,g_loss"
        assert len(lines) == 41  # one row per epoch at --scgan-epochs 40


class TestCompare:
    def test_same_split_comparison(self, bench_csv, tmp_path, capsys):
        base_dir = tmp_path / "base"
        other_dir = tmp_path / "ros"
        assert run_all(bench_csv, base_dir) == 0
        assert run_all(bench_csv, other_dir, method="ros") == 0
        out_dir = tmp_path / "cmp"
        code = main(["compare", "--baseline", str(base_dir), "--runs",
                     str(other_dir), "--out", str(out_dir)])
        assert code == 0
        deltas = (out_dir / "deltas.csv").read_text()
        assert "ros" in deltas
        assert (out_dir / "aggregates.csv").exists()

    def test_self_comparison_is_zero(self, bench_csv, tmp_path):
        base_dir = tmp_path / "base"
        assert run_all(bench_csv, base_dir) == 0
        out_dir = tmp_path / "cmp"
        assert main(["compare", "--baseline", str(base_dir), "--runs",
                     str(base_dir), "--out", str(out_dir)]) == 0
        rows = (out_dir / "deltas.csv").read_text().splitlines()
        for row in rows[1:4]:
            parts = row.split(",")
            assert float(parts[2]) == 0.0 and float(parts[4]) == 0.0

    def test_mismatched_split_rejected(self, bench_csv, tmp_path, capsys):
        a_dir = tmp_path / "a"
        b_dir = tmp_path / "b"
        assert run_all(bench_csv, a_dir, seed="0") == 0
        assert run_all(bench_csv, b_dir, seed="1") == 0  # different split
        code = main(["compare", "--baseline", str(a_dir), "--runs", str(b_dir)])
        assert code == 1
        assert "differ" in capsys.readouterr().err
