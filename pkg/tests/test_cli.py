"""End-to-end tests of the command-line application."""

import json
import os

import pytest

import config
from main import main, parse_n_list
from modules.errors import ValidationError

SMALL_CASE_TWO = [
    "--n-samples", "40", "--n-seeds", "3", "--dups-per-seed", "2", "--n-bad", "15",
    "--seed-noise-var", "0.05", "--dup-noise-var", "0.01", "--bad-noise-var", "1.0",
]


@pytest.fixture
def simulated(tmp_path):
    out = str(tmp_path / "data")
    assert main(["simulate", "--case", "two", "--seed", "7", "--out", out] + SMALL_CASE_TWO) == 0
    return out


def cv_args(data_dir, out, *extra):
    return [
        "cv",
        "--genotypes", os.path.join(data_dir, "genotypes.csv"),
        "--phenotype", os.path.join(data_dir, "phenotype.csv"),
        "--labels", os.path.join(data_dir, "labels.csv"),
        "--methods", "all,mrmr,mint",
        "--n-list", "3..9:3",
        "--folds", "5",
        "--seed", "2",
        "--out", out,
    ] + list(extra)


def without_timing(path):
    with open(path, encoding="utf-8") as f:
        document = json.load(f)
    document.pop("timing")
    return document


class TestEnvironmentSettings:
    def test_integer_value_is_read(self, monkeypatch):
        monkeypatch.setenv("MINT_THREADS", "4")
        assert config.env_int("MINT_THREADS", 1) == 4

    @pytest.mark.parametrize("value", ["many", "2.5", ""])
    def test_unparseable_value_falls_back(self, monkeypatch, value):
        monkeypatch.setenv("MINT_THREADS", value)
        assert config.env_int("MINT_THREADS", 1) == 1


class TestParseNList:
    def test_range_with_default_step(self):
        assert parse_n_list("150..550") == [150, 250, 350, 450, 550]

    def test_range_with_step(self):
        assert parse_n_list("3..9:3") == [3, 6, 9]

    def test_comma_list(self):
        assert parse_n_list("10, 20,30") == [10, 20, 30]

    @pytest.mark.parametrize("text", ["", "a,b", "9..3"])
    def test_invalid_lists_rejected(self, text):
        with pytest.raises(ValidationError):
            parse_n_list(text)


class TestSimulateCommand:
    def test_same_seed_gives_identical_files(self, tmp_path, simulated):
        again = str(tmp_path / "again")
        assert main(["simulate", "--case", "two", "--seed", "7", "--out", again] + SMALL_CASE_TWO) == 0
        for name in ("genotypes.csv", "phenotype.csv", "labels.csv", "metadata.json"):
            with open(os.path.join(simulated, name), "rb") as a, open(os.path.join(again, name), "rb") as b:
                assert a.read() == b.read()

    def test_invalid_override_exits_with_validation_code(self, tmp_path):
        assert main(["simulate", "--case", "one", "--out", str(tmp_path / "x"), "--n-good", "0"]) == 2

    def test_option_for_other_case_exits_with_validation_code(self, tmp_path, capsys):
        assert main(["simulate", "--case", "two", "--out", str(tmp_path / "x"), "--n-good", "5"]) == 2
        assert "does not apply" in capsys.readouterr().err
        assert not os.path.exists(tmp_path / "x" / "genotypes.csv")


class TestSelectCommand:
    def test_zero_features_rejected(self, simulated, tmp_path, capsys):
        code = main([
            "select", "--genotypes", os.path.join(simulated, "genotypes.csv"),
            "--phenotype", os.path.join(simulated, "phenotype.csv"),
            "--method", "mint", "--n", "0", "--out", str(tmp_path / "r.json"),
        ])
        assert code == 2
        assert "must be >= 1" in capsys.readouterr().err

    def test_report_contents(self, simulated, tmp_path):
        out = str(tmp_path / "select.json")
        code = main([
            "select", "--genotypes", os.path.join(simulated, "genotypes.csv"),
            "--phenotype", os.path.join(simulated, "phenotype.csv"),
            "--test-genotypes", os.path.join(simulated, "genotypes.csv"),
            "--method", "mint", "--n", "4", "--out", out,
        ])
        assert code == 0
        with open(out, encoding="utf-8") as f:
            document = json.load(f)
        entry = document["results"][0]
        assert document["kind"] == "select"
        assert len(entry["ranking_ids"]) == 4
        assert entry["mi_eval_count"] == 24 + 23 + 22 + 21
        assert entry["phi"] == pytest.approx(entry["relevance_mean"] - entry["redundancy_mean"])

    def test_mint_without_test_rows_warns(self, simulated, tmp_path, caplog):
        code = main([
            "select", "--genotypes", os.path.join(simulated, "genotypes.csv"),
            "--phenotype", os.path.join(simulated, "phenotype.csv"),
            "--method", "mint", "--n", "2", "--out", str(tmp_path / "r.json"),
        ])
        assert code == 0
        assert "equivalent to mrmr" in caplog.text


class TestCvCommand:
    def test_report_schema(self, simulated, tmp_path):
        out = str(tmp_path / "cv.json")
        csv_path = str(tmp_path / "cv.csv")
        assert main(cv_args(simulated, out, "--csv", csv_path)) == 0
        with open(out, encoding="utf-8") as f:
            document = json.load(f)
        assert set(document) >= {"schema_version", "tool_version", "config", "results", "timing"}
        assert document["config"]["experiment"]["lambda_policy"] == "gcv"
        assert [(r["method"], r["n"]) for r in document["results"]] == [
            ("all-features", 24), ("mrmr", 3), ("mrmr", 6), ("mrmr", 9), ("mint", 3), ("mint", 6), ("mint", 9),
        ]
        for entry in document["results"]:
            assert len(entry["fold_r2"]) == 5
            assert entry["mean_r2"] == pytest.approx(sum(entry["fold_r2"]) / 5, abs=1e-12)
        assert os.path.exists(csv_path)

    def test_thread_count_does_not_change_report(self, simulated, tmp_path):
        first, second = str(tmp_path / "one.json"), str(tmp_path / "two.json")
        assert main(cv_args(simulated, first, "--threads", "1")) == 0
        assert main(cv_args(simulated, second, "--threads", "3")) == 0
        assert without_timing(first) == without_timing(second)

    def test_threads_from_environment(self, simulated, tmp_path, monkeypatch):
        monkeypatch.setenv("MINT_THREADS", "2")
        out = str(tmp_path / "env.json")
        assert main(cv_args(simulated, out)) == 0
        with open(out, encoding="utf-8") as f:
            assert json.load(f)["timing"]["threads"] == 2

    def test_non_integer_thread_environment_is_a_usage_error(self, simulated, tmp_path, monkeypatch, capsys):
        monkeypatch.setenv("MINT_THREADS", "many")
        assert main(cv_args(simulated, str(tmp_path / "r.json"))) == 2
        assert "--threads" in capsys.readouterr().err

    def test_replay_reproduces_numbers(self, simulated, tmp_path):
        first, replayed = str(tmp_path / "first.json"), str(tmp_path / "replayed.json")
        assert main(cv_args(simulated, first)) == 0
        assert main(["replay", first, "--out", replayed]) == 0
        assert without_timing(first) == without_timing(replayed)

    def test_unknown_method_exits_with_validation_code(self, simulated, tmp_path):
        args = cv_args(simulated, str(tmp_path / "r.json"))
        args[args.index("all,mrmr,mint")] = "all,lasso"
        assert main(args) == 2

    def test_missing_input_file(self, tmp_path):
        args = cv_args(str(tmp_path / "nowhere"), str(tmp_path / "r.json"))
        assert main(args) == 2


class TestExitCodes:
    def test_unknown_flag(self):
        assert main(["cv", "--no-such-flag"]) == 2

    def test_unknown_command(self):
        assert main(["train"]) == 2

    def test_help(self, capsys):
        assert main(["--help"]) == 0
        assert "simulate" in capsys.readouterr().out
