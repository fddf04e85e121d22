"""The bench command-line client, driven end to end through the service."""

import json

import pytest
from click.testing import CliRunner

from coordpf.cli import main

TINY_CONFIG = """\
dims = [1, 2]
rhos = [0.0, 0.4]
filters = ["pf", "cpf_dirac"]
n_pf = 40
steps = 8
runs = 2
master_seed = 13
"""


@pytest.fixture
def runner():
    return CliRunner()


def write_config(tmp_path, text=TINY_CONFIG):
    path = tmp_path / "exp.toml"
    path.write_text(text)
    return path


class TestGridCommand:
    def test_writes_artifacts(self, runner, tmp_path):
        cfg = write_config(tmp_path)
        out = tmp_path / "out"
        result = runner.invoke(main, ["grid", "--config", str(cfg), "--out", str(out)])
        assert result.exit_code == 0, result.output
        assert (out / "cells.csv").exists()
        assert (out / "winprob.csv").exists()
        assert (out / "winprob_pf_vs_cpf_dirac.svg").exists()
        assert len((out / "cells.csv").read_text().splitlines()) == 1 + 8

    def test_byte_identical_across_invocations_and_workers(self, runner, tmp_path):
        cfg = write_config(tmp_path)
        outs = []
        for name, workers in (("a", "1"), ("b", "2")):
            out = tmp_path / name
            result = runner.invoke(
                main,
                ["grid", "--config", str(cfg), "--out", str(out), "--workers", workers],
            )
            assert result.exit_code == 0, result.output
            outs.append(out)
        for fname in ("cells.csv", "winprob.csv", "winprob_pf_vs_cpf_dirac.svg"):
            assert (outs[0] / fname).read_bytes() == (outs[1] / fname).read_bytes()

    def test_unknown_config_key_fails_with_diagnostic(self, runner, tmp_path):
        cfg = write_config(tmp_path, "dims = [1]\nwarp_speed = 3\n")
        result = runner.invoke(
            main, ["grid", "--config", str(cfg), "--out", str(tmp_path / "o")]
        )
        assert result.exit_code != 0
        assert "warp_speed" in result.output

    def test_invalid_value_fails_with_diagnostic(self, runner, tmp_path):
        cfg = write_config(tmp_path, "dims = [1]\nruns = 1\n")
        result = runner.invoke(
            main, ["grid", "--config", str(cfg), "--out", str(tmp_path / "o")]
        )
        assert result.exit_code != 0
        assert "runs" in result.output

    def test_missing_config_file(self, runner, tmp_path):
        result = runner.invoke(
            main,
            ["grid", "--config", str(tmp_path / "nope.toml"), "--out", str(tmp_path)],
        )
        assert result.exit_code != 0


class TestCellCommand:
    def test_emits_cell_json(self, runner):
        result = runner.invoke(
            main,
            [
                "cell", "--dim", "2", "--rho", "0.4", "--filter", "cpf-dirac",
                "--particles", "40", "--steps", "8", "--runs", "2", "--seed", "13",
            ],
        )
        assert result.exit_code == 0, result.output
        body = json.loads(result.output)
        assert body["filter"] == "cpf_dirac"
        assert body["n_particles"] == 20
        assert body["runs"] == 2
        assert body["rmse_mean"] > 0

    def test_filter_spelling_is_hyphenated(self, runner):
        result = runner.invoke(
            main, ["cell", "--dim", "1", "--rho", "0.0", "--filter", "cpf_dirac"]
        )
        assert result.exit_code != 0  # click rejects the underscore spelling

    def test_flags_reach_the_service(self, runner):
        args = [
            "cell", "--dim", "2", "--rho", "0.0", "--filter", "cpf-dirac",
            "--particles", "40", "--steps", "5", "--runs", "2",
            "--no-budget-parity", "--no-intra-resample",
            "--ess-fraction", "0.25", "--resampler", "multinomial",
            "--dimension-order", "random",
        ]
        result = runner.invoke(main, args)
        assert result.exit_code == 0, result.output
        body = json.loads(result.output)
        assert body["n_particles"] == 40  # parity disabled

    def test_config_error_is_diagnosed(self, runner):
        result = runner.invoke(
            main,
            ["cell", "--dim", "100", "--rho", "0.0", "--filter", "pf",
             "--particles", "50", "--runs", "2"],
        )
        assert result.exit_code != 0
        assert "budget parity" in result.output


class TestBlocksCommand:
    def test_sweeps_object_counts(self, runner, tmp_path):
        out = tmp_path / "blocks"
        result = runner.invoke(
            main,
            [
                "blocks", "--k", "1", "--k", "2", "--block-size", "2",
                "--block-rho", "0.5", "--particles", "40", "--steps", "5",
                "--runs", "2", "--out", str(out),
            ],
        )
        assert result.exit_code == 0, result.output
        lines = (out / "cells.csv").read_text().splitlines()
        assert len(lines) == 1 + 2 * 2  # two K values x two default filters
        assert "block" in lines[1]
        assert "dim=2" in result.output and "dim=4" in result.output

    def test_summary_only_without_out(self, runner):
        result = runner.invoke(
            main,
            ["blocks", "--k", "1", "--block-size", "2", "--particles", "20",
             "--steps", "5", "--runs", "2"],
        )
        assert result.exit_code == 0, result.output
        assert "rmse" in result.output


class TestHelp:
    def test_group_help_lists_commands(self, runner):
        result = runner.invoke(main, ["--help"])
        assert result.exit_code == 0
        for command in ("grid", "cell", "blocks", "serve"):
            assert command in result.output
