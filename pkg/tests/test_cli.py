"""End-to-end command-line tests: subcommand wiring, CSV schemas,
determinism and exit codes."""

import csv
import json

import numpy as np
import pytest

from relgrad.cli import (
    DEFAULT_CONFIG,
    EXIT_CONFIG,
    EXIT_OK,
    ConfigError,
    aggregate_runs,
    cmd_compress_demo,
    cmd_pep,
    cmd_run,
    load_config,
    main,
)

FAST_RUN_CONFIG = {
    "problem": {"n_samples": 60, "n_features": 4},
    "iterations": 20,
    "seeds": [0, 1],
    "inexactness": {"kind": "adversarial", "delta_grid": [0.0, 0.2]},
    "smoothness_probe_steps": 20,
}


def write_config(tmp_path, overrides):
    path = tmp_path / "config.json"
    path.write_text(json.dumps(overrides))
    return str(path)


def read_csv(path):
    with open(path, newline="") as handle:
        return list(csv.DictReader(handle))


class TestConfig:
    def test_defaults_load(self):
        config = load_config(None)
        assert config == DEFAULT_CONFIG

    def test_override_merging(self, tmp_path):
        path = write_config(tmp_path, {"iterations": 7, "pep": {"n_iterations": 2}})
        config = load_config(path)
        assert config["iterations"] == 7
        assert config["pep"]["n_iterations"] == 2
        assert config["pep"]["delta_grid"] == DEFAULT_CONFIG["pep"]["delta_grid"]

    def test_unknown_key_rejected(self, tmp_path):
        path = write_config(tmp_path, {"no_such_key": 1})
        with pytest.raises(ConfigError):
            load_config(path)

    def test_bad_json_rejected(self, tmp_path):
        path = tmp_path / "config.json"
        path.write_text("{not json")
        with pytest.raises(ConfigError):
            load_config(str(path))

    def test_invalid_delta_grid_exits_2(self, tmp_path):
        path = write_config(tmp_path, {"inexactness": {"delta_grid": [1.5]}})
        code = main(["run", "--config", path, "--out-dir", str(tmp_path / "out")])
        assert code == EXIT_CONFIG

    def test_missing_dataset_exits_2(self, tmp_path):
        path = write_config(
            tmp_path, {"problem": {"kind": "csv", "path": str(tmp_path / "nope.csv")}}
        )
        code = main(["run", "--config", path, "--out-dir", str(tmp_path / "out")])
        assert code == EXIT_CONFIG


class TestRunCommand:
    def test_csv_schemas_and_aggregation(self, tmp_path):
        config = load_config(write_config(tmp_path, FAST_RUN_CONFIG))
        out = tmp_path / "out"
        report = cmd_run(config, out)
        runs = read_csv(out / "runs.csv")
        means = read_csv(out / "report.csv")
        # 4 methods x 2 deltas x 2 variants x 2 seeds
        assert len(runs) == 4 * 2 * 2 * 2
        assert len(means) == 4 * 2 * 2
        assert set(runs[0]) == {
            "method", "shortened", "delta", "seed", "best_grad_norm_sq",
            "best_train_acc", "test_acc_at_best_train", "total_bits",
        }
        # aggregation is the arithmetic mean of the per-seed rows
        for mean_row in means:
            matching = [
                float(r["best_grad_norm_sq"])
                for r in runs
                if (r["method"], r["shortened"], r["delta"])
                == (mean_row["method"], mean_row["shortened"], mean_row["delta"])
            ]
            assert float(mean_row["mean_best_grad_norm_sq"]) == pytest.approx(
                np.mean(matching), rel=1e-15
            )
        assert all(0.0 <= float(r["mean_best_train_acc"]) <= 1.0 for r in means)
        assert len(report.rows) == len(means)

    def test_deterministic_output_bitwise(self, tmp_path):
        config = load_config(write_config(tmp_path, FAST_RUN_CONFIG))
        out1, out2 = tmp_path / "a", tmp_path / "b"
        cmd_run(config, out1)
        cmd_run(config, out2)
        assert (out1 / "runs.csv").read_bytes() == (out2 / "runs.csv").read_bytes()
        assert (out1 / "report.csv").read_bytes() == (out2 / "report.csv").read_bytes()

    def test_delta_zero_variants_identical(self, tmp_path):
        config = load_config(write_config(tmp_path, FAST_RUN_CONFIG))
        cmd_run(config, tmp_path / "out")
        runs = read_csv(tmp_path / "out" / "runs.csv")
        at_zero = [r for r in runs if float(r["delta"]) == 0.0]
        original = {
            (r["method"], r["seed"]): r["best_grad_norm_sq"]
            for r in at_zero
            if r["shortened"] == "false"
        }
        for r in at_zero:
            if r["shortened"] == "true":
                assert r["best_grad_norm_sq"] == original[(r["method"], r["seed"])]

    def test_compressed_protocol_deltas(self, tmp_path):
        overrides = dict(FAST_RUN_CONFIG)
        overrides["inexactness"] = {"kind": "compressed", "n_bits": [0, 1, 2, 3]}
        config = load_config(write_config(tmp_path, overrides))
        cmd_run(config, tmp_path / "out")
        runs = read_csv(tmp_path / "out" / "runs.csv")
        deltas = sorted({float(r["delta"]) for r in runs})
        assert deltas == [0.0625, 0.125, 0.25, 0.5]  # (1/2)^(n_bit+1)
        for row in runs:
            assert int(row["total_bits"]) > 0

    def test_exact_runs_report_zero_bits(self, tmp_path):
        overrides = dict(FAST_RUN_CONFIG)
        overrides["inexactness"] = {"kind": "exact"}
        config = load_config(write_config(tmp_path, overrides))
        cmd_run(config, tmp_path / "out")
        runs = read_csv(tmp_path / "out" / "runs.csv")
        assert all(int(r["total_bits"]) == 0 for r in runs)

    def test_cli_entry_point(self, tmp_path):
        path = write_config(tmp_path, FAST_RUN_CONFIG)
        code = main(
            ["run", "--config", path, "--out-dir", str(tmp_path / "out"), "--seeds", "0"]
        )
        assert code == EXIT_OK
        runs = read_csv(tmp_path / "out" / "runs.csv")
        assert {r["seed"] for r in runs} == {"0"}

    def test_verbose_mode_audits_oracle_pairs(self, tmp_path):
        path = write_config(tmp_path, FAST_RUN_CONFIG)
        code = main(
            [
                "run", "--config", path, "--out-dir", str(tmp_path / "out"),
                "--seeds", "0", "--verbose",
            ]
        )
        assert code == EXIT_OK  # every emitted pair passed the bound check

    def test_smoothness_override_used_verbatim(self, tmp_path):
        overrides = dict(FAST_RUN_CONFIG)
        overrides["smoothness_override"] = 123.0
        config = load_config(write_config(tmp_path, overrides))
        from relgrad.cli import build_datasets, estimate_problem_smoothness
        from relgrad.problems import LogisticProblem

        train, _ = build_datasets(config)
        assert estimate_problem_smoothness(config, LogisticProblem(train)) == 123.0


class TestPepCommand:
    def test_sweep_csv(self, tmp_path):
        config = load_config(
            write_config(
                tmp_path,
                {
                    "methods": ["constant"],
                    "pep": {"n_iterations": 2, "delta_grid": [0.0, 0.2]},
                },
            )
        )
        rows, all_solved = cmd_pep(config, tmp_path / "out")
        assert all_solved
        table = read_csv(tmp_path / "out" / "pep_rates.csv")
        assert table[0]["method"] == "tau0_baseline"
        assert float(table[0]["tau"]) == pytest.approx(2.0, abs=1e-6)
        assert len(table) == 1 + 2 * 2  # baseline + 2 deltas x 2 variants
        assert set(table[0]) == {"method", "delta", "N", "shortened", "tau", "status"}

    def test_desk_scale_cap(self, tmp_path):
        config = load_config(
            write_config(tmp_path, {"pep": {"n_iterations": 30, "desk_scale_cap": 25}})
        )
        with pytest.raises(ConfigError):
            cmd_pep(config, tmp_path / "out")

    def test_monotone_tau_column(self, tmp_path):
        config = load_config(
            write_config(
                tmp_path,
                {
                    "methods": ["constant"],
                    "pep": {"n_iterations": 3, "delta_grid": [0.0, 0.2, 0.4]},
                },
            )
        )
        rows, _ = cmd_pep(config, tmp_path / "out")
        original = [r["tau"] for r in rows if r["method"] == "constant" and not r["shortened"]]
        assert original == sorted(original)


class TestCompressDemo:
    def test_bit_accounting_and_csv(self, tmp_path):
        config = load_config(
            write_config(
                tmp_path,
                {
                    "problem": {"n_samples": 40, "n_features": 3},
                    "smoothness_probe_steps": 20,
                    "compress_demo": {"n_bits": [1, 0], "budget_bits": 20_000},
                },
            )
        )
        rows = cmd_compress_demo(config, tmp_path / "out")
        table = read_csv(tmp_path / "out" / "compress_demo.csv")
        assert len(table) == len(rows)
        dimension = 4  # 3 features + bias
        by_variant = {}
        for row in table:
            by_variant.setdefault(row["variant"], []).append(row)
        assert set(by_variant) == {"full_precision", "compressed_1bit", "compressed_0bit"}
        # full precision spends 32 bits per component, 0-bit spends 9
        full = by_variant["full_precision"]
        zero = by_variant["compressed_0bit"]
        assert int(full[1]["total_bits"]) == 32 * dimension
        assert int(zero[1]["total_bits"]) == 9 * dimension
        # compressed variants fit more iterations into the same budget
        assert len(zero) > len(full)
        # convergent runs: loss curves nonincreasing
        for rows_ in by_variant.values():
            losses = [float(r["loss"]) for r in rows_]
            assert all(b <= a + 1e-9 for a, b in zip(losses, losses[1:]))

    def test_budget_must_cover_one_iteration(self, tmp_path):
        config = load_config(
            write_config(tmp_path, {"compress_demo": {"budget_bits": 10}})
        )
        with pytest.raises(ConfigError):
            cmd_compress_demo(config, tmp_path / "out")


class TestEstimateLCommand:
    def test_prints_estimate_and_verdict(self, tmp_path, capsys):
        path = write_config(
            tmp_path,
            {
                "problem": {"n_samples": 50, "n_features": 4},
                "smoothness_probe_steps": 25,
                "iterations": 30,
            },
        )
        code = main(["estimate-l", "--config", path])
        assert code == EXIT_OK
        output = capsys.readouterr().out
        assert "estimated smoothness L" in output
        assert "consistent" in output


class TestAggregation:
    def test_mean_of_rows(self):
        rows = [
            {"method": "constant", "shortened": False, "delta": 0.1,
             "best_grad_norm_sq": 1.0, "best_train_acc": 0.5,
             "test_acc_at_best_train": 0.25, "total_bits": 10},
            {"method": "constant", "shortened": False, "delta": 0.1,
             "best_grad_norm_sq": 3.0, "best_train_acc": 1.0,
             "test_acc_at_best_train": 0.75, "total_bits": 30},
        ]
        report = aggregate_runs(rows)
        assert len(report.rows) == 1
        row = report.rows[0]
        assert row["mean_best_grad_norm_sq"] == 2.0
        assert row["mean_best_train_acc"] == 0.75
        assert row["mean_test_acc"] == 0.5
        assert row["mean_total_bits"] == 20.0
