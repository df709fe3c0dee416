"""Command-line interface: exit codes, reports, determinism.

All invocations go through main(argv) in-process; the heavier subcommands
are exercised on a coarse config file so the CLI tests stay cheap.
"""

import json

import pytest

from dskrein.cli import RunConfig, main


@pytest.fixture()
def coarse_cfg(tmp_path):
    path = tmp_path / "coarse.cfg"
    path.write_text(
        "# coarse grid for fast checks\n"
        "n_tau = 32\n"
        "n_theta = 24\n"
        "basis_size = 4\n"
        f"out = {tmp_path / 'out'}\n"
    )
    return str(path)


def test_kernel_scan_writes_csv(tmp_path):
    out = tmp_path / "out"
    rc = main(["kernel", "--out", str(out), "--count", "16"])
    assert rc == 0
    csv_path = out / "kernel_massless.csv"
    lines = csv_path.read_text().splitlines()
    assert lines[0].startswith("# {")  # config line embedded as a comment
    assert lines[1] == "lambda,re,im"
    assert len(lines) == 18


def test_kernel_rejects_cut_range(tmp_path, capsys):
    rc = main(["kernel", "--out", str(tmp_path), "--lambda-min", "-2.0"])
    assert rc == 2
    assert "lambda > -1" in capsys.readouterr().err


def test_usage_error_exit_code():
    assert main(["no-such-command"]) == 2
    assert main([]) == 2


def test_config_unknown_key(tmp_path, capsys):
    path = tmp_path / "bad.cfg"
    path.write_text("n_tau = 32\nnn_theta = 24\n")
    rc = main(["kernel", "--config", str(path), "--out", str(tmp_path)])
    assert rc == 2
    assert "unknown key" in capsys.readouterr().err


def test_config_bad_line(tmp_path, capsys):
    path = tmp_path / "bad.cfg"
    path.write_text("n_tau 32\n")
    rc = main(["kernel", "--config", str(path), "--out", str(tmp_path)])
    assert rc == 2
    assert "expected key = value" in capsys.readouterr().err


def test_config_precedence(tmp_path):
    path = tmp_path / "a.cfg"
    path.write_text("seed = 5\nout = from_file\n")
    cfg = RunConfig.load(str(path), {"out": str(tmp_path), "seed": None})
    assert cfg.seed == 5  # file value survives a None override
    assert cfg.out == str(tmp_path)
    assert cfg.n_tau == 128  # untouched default


def test_global_flags_after_subcommand(tmp_path):
    rc = main(["kernel", "--count", "4", "--out", str(tmp_path / "o"),
               "--convention", "paper"])
    assert rc == 0
    body = (tmp_path / "o" / "kernel_massless.csv").read_text()
    assert '"convention": "paper"' in body


def test_limit_report_and_determinism(coarse_cfg, tmp_path, capsys):
    rc = main(["limit", "--config", coarse_cfg])
    assert rc == 0
    report = tmp_path / "out" / "limit.json"
    first = report.read_bytes()
    body = json.loads(first)
    assert body["pass"] is True
    assert all({"name", "eq", "value", "tolerance", "pass"} <= set(c) for c in body["checks"])
    assert "PASS" in capsys.readouterr().out

    rc = main(["limit", "--config", coarse_cfg])
    assert rc == 0
    assert report.read_bytes() == first  # same config and seed, same bytes


def test_charge_report_passes(tmp_path):
    # the charge checks are derivative-limited, so run them on the half grid
    # with the matching relaxed tolerances rather than the coarse test config
    assert main(["charge", "--out", str(tmp_path / "out"), "--resolution", "half"]) == 0
    body = json.loads((tmp_path / "out" / "charge.json").read_text())
    names = [c["name"] for c in body["checks"]]
    assert "winding_vs_minus_8pi_J" in names
    slice_csv = (tmp_path / "out" / "slice_charge.csv").read_text().splitlines()
    assert slice_csv[1] == "tau,J_real,J_imag,spread"
