"""CLI surface: subcommands, JSON output, exit codes."""

import json
import math

import numpy as np
import pytest

from sopool.cli import main
from sopool.tensorfile import read_tensor, write_tensor


def _run(capsys, argv):
    rc = main(argv)
    captured = capsys.readouterr()
    return rc, captured.out, captured.err


def _write_e1(tmp_path):
    # single pixel, feature vector e1, rank 3 layout d x H x W
    data = np.zeros((2, 1, 1))
    data[0, 0, 0] = 1.0
    path = tmp_path / "e1.bin"
    write_tensor(path, data)
    return path


class TestPool:
    def test_average_single_indicator(self, capsys, tmp_path):
        inp = _write_e1(tmp_path)
        out = tmp_path / "psi.bin"
        rc, stdout, _ = _run(capsys, [
            "pool", str(inp), "-o", str(out),
            "--kind", "Average", "--alpha", "0", "--Z", "3",
        ])
        assert rc == 0
        summary = json.loads(stdout)
        assert summary["kind"] == "Average"
        assert summary["dim"] == 8
        assert summary["trace"] == pytest.approx(1.0)
        assert summary["max_eigenvalue"] == pytest.approx(1.0)
        assert summary["min_eigenvalue"] == pytest.approx(0.0, abs=1e-12)
        expected = np.zeros((8, 8))
        expected[0, 0] = 1.0
        np.testing.assert_array_equal(read_tensor(out), expected)

    def test_sigme_single_indicator(self, capsys, tmp_path):
        inp = _write_e1(tmp_path)
        out = tmp_path / "psi.bin"
        rc, stdout, _ = _run(capsys, [
            "pool", str(inp), "-o", str(out),
            "--kind", "SigmE", "--alpha", "0", "--Z", "3",
        ])
        assert rc == 0
        Psi = read_tensor(out)
        saturated = 2.0 / (1.0 + math.exp(-20.0)) - 1.0
        assert Psi[0, 0] == pytest.approx(saturated, abs=1e-15)
        off = Psi.copy()
        off[0, 0] = 0.0
        np.testing.assert_array_equal(off, np.zeros((8, 8)))

    def test_repeat_run_bit_identical(self, capsys, tmp_path):
        rng = np.random.default_rng(3)
        inp = tmp_path / "feat.bin"
        write_tensor(inp, rng.uniform(0.0, 1.0, size=(3, 4, 5)))
        out1, out2 = tmp_path / "a.bin", tmp_path / "b.bin"
        for out in (out1, out2):
            rc, _, _ = _run(capsys, [
                "pool", str(inp), "-o", str(out), "--kind", "MaxExp", "--Z", "3",
            ])
            assert rc == 0
        assert out1.read_bytes() == out2.read_bytes()

    def test_column_permutation_invariance(self, capsys, tmp_path):
        # alpha 0 drops the location codes, so column order cannot matter
        rng = np.random.default_rng(11)
        Phi = rng.uniform(0.0, 1.0, size=(3, 12))
        perm = rng.permutation(12)
        files = {}
        for name, cols in (("a", Phi), ("b", Phi[:, perm])):
            inp = tmp_path / f"{name}.bin"
            write_tensor(inp, cols)
            out = tmp_path / f"{name}_psi.bin"
            rc, _, _ = _run(capsys, [
                "pool", str(inp), "--grid", "4", "3", "--alpha", "0",
                "--kind", "SigmE", "-o", str(out),
            ])
            assert rc == 0
            files[name] = read_tensor(out)
        np.testing.assert_allclose(files["a"], files["b"], rtol=0, atol=1e-12)

    def test_spectral_flag(self, capsys, tmp_path):
        rng = np.random.default_rng(5)
        inp = tmp_path / "feat.bin"
        write_tensor(inp, rng.uniform(0.0, 1.0, size=(3, 2, 2)))
        rc, stdout, _ = _run(capsys, [
            "pool", str(inp), "--kind", "MaxExp", "--spectral", "--Z", "3",
        ])
        assert rc == 0
        summary = json.loads(stdout)
        assert summary["spectral"] is True
        # MaxExp maps eigenvalues into [0, 1]
        assert summary["max_eigenvalue"] <= 1.0 + 1e-12
        assert summary["min_eigenvalue"] >= -1e-12

    def test_rank2_needs_grid(self, capsys, tmp_path):
        inp = tmp_path / "flat.bin"
        write_tensor(inp, np.ones((3, 12)))
        rc, _, err = _run(capsys, ["pool", str(inp)])
        assert rc == 1
        assert "--grid" in err

    def test_grid_column_mismatch(self, capsys, tmp_path):
        inp = tmp_path / "flat.bin"
        write_tensor(inp, np.ones((3, 12)))
        rc, _, err = _run(capsys, ["pool", str(inp), "--grid", "5", "3"])
        assert rc == 1
        assert "15" in err

    def test_gamma_beta_conflict(self, capsys, tmp_path):
        inp = _write_e1(tmp_path)
        rc, _, _ = _run(capsys, [
            "pool", str(inp), "--kind", "Gamma", "--beta", "0.5",
        ])
        assert rc == 1

    def test_missing_file(self, capsys, tmp_path):
        rc, _, err = _run(capsys, ["pool", str(tmp_path / "nope.bin")])
        assert rc == 3
        assert "error" in err

    def test_corrupt_file(self, capsys, tmp_path):
        bad = tmp_path / "bad.bin"
        bad.write_bytes(b"XXXX" + b"\x00" * 20)
        rc, _, err = _run(capsys, ["pool", str(bad)])
        assert rc == 3
        assert "byte offset 0" in err


class TestVerify:
    def test_probmodel_suites_pass(self, capsys):
        rc, stdout, _ = _run(capsys, ["verify", "--suite", "probmodel"])
        assert rc == 0
        rows = [json.loads(line) for line in stdout.strip().splitlines()]
        assert {r["suite"] for r in rows} == {"probmodel-binomial", "probmodel-multinomial"}
        assert all(r["passed"] for r in rows)

    def test_fault_injection_fails(self, capsys):
        rc, stdout, _ = _run(capsys, [
            "verify", "--suite", "gradcheck-elementwise", "--break-sign",
        ])
        assert rc == 2
        row = json.loads(stdout.strip().splitlines()[-1])
        assert row["passed"] is False

    def test_unknown_suite(self, capsys):
        rc, _, err = _run(capsys, ["verify", "--suite", "nonsense"])
        assert rc == 1
        assert "available" in err


class TestBench:
    def test_row_schema_and_ratio(self, capsys):
        rc, stdout, _ = _run(capsys, ["bench", "--dims", "16", "--reps", "3"])
        assert rc == 0
        rows = [json.loads(line) for line in stdout.strip().splitlines()]
        assert len(rows) == 3
        for row in rows:
            assert set(row) == {"dim", "kind", "path", "median_ns", "reps"}
            assert row["dim"] == 16
            assert row["reps"] == 3
        paths = [r["path"] for r in rows]
        assert paths == ["elementwise", "spectral", "ratio"]
        assert rows[2]["median_ns"] >= 1.0

    def test_dims_out_of_range(self, capsys):
        rc, _, err = _run(capsys, ["bench", "--dims", "8"])
        assert rc == 1
        assert "16" in err

    def test_usage_error_is_validation(self, capsys):
        rc, _, err = _run(capsys, ["bench", "--dims", "16,32"])
        assert rc == 1
        assert "invalid" in err

    def test_zero_reps_rejected(self, capsys):
        # reps=0 would emit NaN medians instead of failing
        rc, _, err = _run(capsys, ["bench", "--dims", "16", "--reps", "0"])
        assert rc == 1
        assert "reps" in err


class TestDemoTrain:
    ARGS = ["demo-train", "--epochs", "3", "--classes", "2",
            "--samples", "8", "--seed", "4"]

    def test_zero_lr_freezes_loss(self, capsys):
        rc, stdout, _ = _run(capsys, self.ARGS + ["--lr", "0.0"])
        assert rc == 0
        losses = json.loads(stdout)["losses"]
        assert len(losses) == 3
        assert losses == [losses[0]] * 3

    def test_fixed_seed_reproducible(self, capsys):
        rc1, out1, _ = _run(capsys, self.ARGS)
        rc2, out2, _ = _run(capsys, self.ARGS)
        assert rc1 == rc2 == 0
        assert out1 == out2

    def test_degenerate_sizes_rejected(self, capsys):
        # both would crash mid-loop: empty loss list, division by zero
        for args in (["--epochs", "0"], ["--samples", "0"]):
            rc, _, err = _run(capsys, ["demo-train", "--classes", "2"] + args)
            assert rc == 1
            assert "at least 1" in err


class TestTopLevel:
    def test_help_exits_zero(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["--help"])
        assert exc.value.code == 0
        assert "pool" in capsys.readouterr().out

    def test_no_command_is_usage_error(self, capsys):
        rc, _, err = _run(capsys, [])
        assert rc == 1
        assert "required" in err
