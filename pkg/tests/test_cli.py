"""Command-line client: grid parsing, artifact files, exit codes, seeds,
thread-count determinism, and the remote-server mode.
"""

from __future__ import annotations

import json
import math
import os
import shutil
import subprocess
import sys
import time

import httpx
import pytest

from polylab.cli import main, parse_float_grid, parse_int_grid
from polylab.errors import ConfigError
from polylab.reporting import CSV_HEADER, emit_csv, emit_svg_loglog
from polylab.experiments.config import RunRecord
from polylab.service.api import run_point_experiment
from polylab.service.schemas import ExperimentRequest
from polylab.stats import fit_power_law


# ---------------------------------------------------------------------------
# grid parsing


def test_int_grid_geometric():
    assert parse_int_grid("32:1024:x2") == [32, 64, 128, 256, 512, 1024]
    assert parse_int_grid("10:80:x2") == [10, 20, 40, 80]
    assert parse_int_grid("7:7:x2") == [7]


def test_int_grid_list_and_scalar():
    assert parse_int_grid("32,64,128") == [32, 64, 128]
    assert parse_int_grid("256") == [256]
    assert parse_int_grid(" 16 , 32 ") == [16, 32]


def test_int_grid_errors():
    for bad in ("1024:32:x2", "32:64:2", "32:64:x1", "abc", "3.5", "8:64:xq"):
        with pytest.raises(ConfigError):
            parse_int_grid(bad)


def test_float_grid():
    grid = parse_float_grid("1e-6:1e-3:x10")
    assert len(grid) == 4
    for got, expected in zip(grid, (1e-6, 1e-5, 1e-4, 1e-3)):
        assert got == pytest.approx(expected, rel=1e-9)
    assert parse_float_grid("0.05,0.1,0.2") == [0.05, 0.1, 0.2]
    assert parse_float_grid("0.25") == [0.25]
    with pytest.raises(ConfigError):
        parse_float_grid("0.5:0.1:x2")
    with pytest.raises(ConfigError):
        parse_float_grid("nope")


# ---------------------------------------------------------------------------
# file emitters


def test_emit_csv_single_record(tmp_path):
    path = tmp_path / "one.csv"
    emit_csv(path, "exp", "ball(1)", 2, [RunRecord(8, 0, 2, 1.5)])
    lines = path.read_text(encoding="utf-8").split("\n")
    assert lines[0] == CSV_HEADER
    assert lines[1] == "exp,ball(1),2,2,8,0,1.5,"
    assert lines[2] == ""


def test_emit_csv_empty_records_is_header_only(tmp_path):
    path = tmp_path / "empty.csv"
    emit_csv(path, "exp", "ball(1)", 2, [])
    assert path.read_bytes() == (CSV_HEADER + "\n").encode("utf-8")


def test_emit_csv_seventeen_digit_round_trip(tmp_path):
    value = math.pi / 7.0
    aux = 1.0 / 3.0
    path = tmp_path / "rt.csv"
    emit_csv(path, "exp", "ball(1)", 2, [RunRecord(8, 0, 2, value, aux)])
    row = path.read_text(encoding="utf-8").split("\n")[1].split(",")
    assert float(row[6]) == value
    assert float(row[7]) == aux


def test_emit_csv_deterministic_bytes(tmp_path):
    records = [RunRecord(8, i, 2, 0.1 * i) for i in range(5)]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    emit_csv(a, "exp", "ball(1)", 2, records)
    emit_csv(b, "exp", "ball(1)", 2, records)
    assert a.read_bytes() == b.read_bytes()


def test_svg_slope_annotation_and_markers(tmp_path):
    fit = fit_power_law([(float(n), float(n) ** -5.0) for n in (32, 64, 128, 256, 512, 1024)])
    path = tmp_path / "plot.svg"
    emit_svg_loglog(path, [("ell=2", fit)], title="t", reference_slope=-3.0)
    svg = path.read_text(encoding="utf-8")
    assert "slope=-5.00" in svg
    assert svg.count("<circle") == 6
    assert 'stroke-dasharray="6 4"' in svg
    assert "reference slope=-3.00" in svg


def test_svg_without_series_carries_note(tmp_path):
    path = tmp_path / "none.svg"
    emit_svg_loglog(path, [], note="no containment failures observed")
    svg = path.read_text(encoding="utf-8")
    assert "no containment failures observed" in svg
    assert "<circle" not in svg


# ---------------------------------------------------------------------------
# subcommand runs


def _variance_args(out, extra=()):
    return [
        "variance",
        "--body",
        "ball",
        "--d",
        "2",
        "--ell",
        "1,2",
        "--n",
        "4:32:x2",
        "--reps",
        "120",
        "--seed",
        "3",
        "--out",
        str(out),
        *extra,
    ]


def test_variance_command_writes_three_files(tmp_path, capsys):
    assert main(_variance_args(tmp_path, ("--name", "v"))) == 0
    assert (tmp_path / "v_records.csv").exists()
    assert (tmp_path / "v_summary.json").exists()
    assert (tmp_path / "v_loglog.svg").exists()
    out = capsys.readouterr().out
    assert out.count("wrote ") == 3

    lines = (tmp_path / "v_records.csv").read_text(encoding="utf-8").rstrip("\n").split("\n")
    assert lines[0] == CSV_HEADER
    assert len(lines) == 1 + 4 * 120 * 2

    summary = json.loads((tmp_path / "v_summary.json").read_text(encoding="utf-8"))
    assert summary["name"] == "v"
    assert summary["config"]["n_grid"] == [4, 8, 16, 32]
    assert "ell=2" in summary["fits"]
    assert "records" not in summary

    svg = (tmp_path / "v_loglog.svg").read_text(encoding="utf-8")
    assert "slope=" in svg
    assert svg.count("<circle") == 8  # two series, four grid points each
    assert 'stroke-dasharray="6 4"' in svg  # reference exponent line


def test_csv_values_match_service_layer_exactly(tmp_path):
    assert main(_variance_args(tmp_path, ("--name", "w"))) == 0
    rows = (tmp_path / "w_records.csv").read_text(encoding="utf-8").rstrip("\n").split("\n")[1:]
    request = ExperimentRequest(
        body={"kind": "ball", "dim": 2},
        ell=[1, 2],
        n_grid=[4, 8, 16, 32],
        replications=120,
        master_seed=3,
    )
    response = run_point_experiment("variance", request)
    assert len(rows) == len(response.records)
    for row, record in zip(rows, response.records):
        cells = row.split(",")
        assert float(cells[6]) == record[3]


def test_caps_command_with_check_passes(tmp_path, capsys):
    code = main(
        ["caps", "--d", "2", "--eps", "1e-6:1e-3:x10", "--out", str(tmp_path), "--check"]
    )
    assert code == 0
    out = capsys.readouterr().out
    assert "[PASS] caps: cap slope volume-to-boundary" in out
    assert "[FAIL]" not in out


def test_containment_check_failure_exits_three(tmp_path, capsys):
    code = main(
        [
            "containment",
            "--body",
            "ball",
            "--d",
            "2",
            "--n",
            "16",
            "--reps",
            "100",
            "--c-alpha",
            "0.01",
            "--out",
            str(tmp_path),
            "--check",
        ]
    )
    assert code == 3
    assert "[FAIL]" in capsys.readouterr().out
    # The artifacts are still written for inspection.
    assert (tmp_path / "containment_records.csv").exists()


def test_grassmann_command(tmp_path):
    code = main(
        [
            "grassmann",
            "--d",
            "3",
            "--ell",
            "1",
            "--a-grid",
            "0.05:0.5:x1.8",
            "--samples",
            "20000",
            "--out",
            str(tmp_path),
        ]
    )
    assert code == 0
    summary = json.loads((tmp_path / "grassmann_summary.json").read_text(encoding="utf-8"))
    assert summary["config"]["d"] == 3


def test_config_error_exits_two(tmp_path, capsys):
    # n below dim + 1 is a domain error raised by the service layer.
    code = main(
        [
            "variance",
            "--d",
            "2",
            "--ell",
            "2",
            "--n",
            "2,8,16",
            "--reps",
            "120",
            "--out",
            str(tmp_path),
        ]
    )
    assert code == 2
    assert "error:" in capsys.readouterr().err


def test_bad_grid_exits_two(tmp_path, capsys):
    code = main(
        [
            "variance",
            "--d",
            "2",
            "--ell",
            "2",
            "--n",
            "32:8:x2",
            "--reps",
            "100",
            "--out",
            str(tmp_path),
        ]
    )
    assert code == 2
    assert "error:" in capsys.readouterr().err


def test_unwritable_output_exits_two(tmp_path, capsys):
    target = tmp_path / "blocked"
    target.write_text("just a file")
    code = main(["caps", "--d", "2", "--eps", "1e-5,1e-4,1e-3", "--out", str(target)])
    assert code == 2
    assert "error:" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# seed handling


def test_env_seed_overrides_flag(tmp_path, monkeypatch):
    monkeypatch.delenv("POLYLAB_SEED", raising=False)
    main(_variance_args(tmp_path / "flag42", ("--name", "s", "--seed", "42")))
    monkeypatch.setenv("POLYLAB_SEED", "42")
    main(_variance_args(tmp_path / "env42", ("--name", "s", "--seed", "3")))
    monkeypatch.delenv("POLYLAB_SEED")
    main(_variance_args(tmp_path / "flag3", ("--name", "s", "--seed", "3")))

    flag42 = (tmp_path / "flag42" / "s_records.csv").read_bytes()
    env42 = (tmp_path / "env42" / "s_records.csv").read_bytes()
    flag3 = (tmp_path / "flag3" / "s_records.csv").read_bytes()
    assert env42 == flag42
    assert env42 != flag3


def test_invalid_env_seed_exits_two(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("POLYLAB_SEED", "not-a-number")
    assert main(_variance_args(tmp_path)) == 2
    assert "POLYLAB_SEED" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# campaigns


def _campaign_file(tmp_path, threads: int = 1, seed: int = 9):
    config = {
        "experiments": [
            {
                "kind": "variance",
                "name": "cv",
                "body": {"kind": "ball", "dim": 2},
                "ell": [2],
                "n_grid": [4, 8, 16, 32],
                "replications": 120,
                "master_seed": seed,
            },
            {"kind": "caps", "name": "cc", "d": 2, "eps_grid": [1e-6, 1e-5, 1e-4]},
        ],
        "threads": threads,
    }
    path = tmp_path / "campaign.json"
    path.write_text(json.dumps(config), encoding="utf-8")
    return path


def test_campaign_runs_all_entries(tmp_path):
    config = _campaign_file(tmp_path)
    out = tmp_path / "out"
    assert main(["campaign", "--config", str(config), "--out", str(out)]) == 0
    for name in ("cv", "cc"):
        for suffix in ("_records.csv", "_summary.json", "_loglog.svg"):
            assert (out / f"{name}{suffix}").exists()


def test_campaign_missing_config_exits_two(tmp_path, capsys):
    code = main(["campaign", "--config", str(tmp_path / "missing.json")])
    assert code == 2
    assert "does not exist" in capsys.readouterr().err


def test_campaign_invalid_json_exits_two(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json", encoding="utf-8")
    assert main(["campaign", "--config", str(bad)]) == 2
    assert "not valid JSON" in capsys.readouterr().err


def test_campaign_duplicate_names_exit_two(tmp_path, capsys):
    config = {
        "experiments": [
            {"kind": "caps", "d": 2, "eps_grid": [1e-5, 1e-4, 1e-3]},
            {"kind": "caps", "d": 3, "eps_grid": [1e-5, 1e-4, 1e-3]},
        ]
    }
    path = tmp_path / "dup.json"
    path.write_text(json.dumps(config), encoding="utf-8")
    assert main(["campaign", "--config", str(path)]) == 2
    assert "unique" in capsys.readouterr().err


def test_campaign_output_dir_from_file(tmp_path):
    out = tmp_path / "from-file"
    config = {
        "experiments": [
            {"kind": "caps", "name": "cf", "d": 2, "eps_grid": [1e-5, 1e-4, 1e-3]}
        ],
        "output_dir": str(out),
    }
    path = tmp_path / "c.json"
    path.write_text(json.dumps(config), encoding="utf-8")
    assert main(["campaign", "--config", str(path)]) == 0
    assert (out / "cf_records.csv").exists()


def test_campaign_env_seed_applies_to_every_entry(tmp_path, monkeypatch):
    config = _campaign_file(tmp_path, seed=1)
    monkeypatch.setenv("POLYLAB_SEED", "9")
    out_env = tmp_path / "env"
    assert main(["campaign", "--config", str(config), "--out", str(out_env)]) == 0
    monkeypatch.delenv("POLYLAB_SEED")
    config9 = _campaign_file(tmp_path, seed=9)
    out_direct = tmp_path / "direct"
    assert main(["campaign", "--config", str(config9), "--out", str(out_direct)]) == 0
    assert (out_env / "cv_records.csv").read_bytes() == (
        out_direct / "cv_records.csv"
    ).read_bytes()


def test_thread_counts_produce_identical_bytes(tmp_path):
    config = _campaign_file(tmp_path)
    out1, out8 = tmp_path / "t1", tmp_path / "t8"
    assert main(["campaign", "--config", str(config), "--out", str(out1), "--threads", "1"]) == 0
    assert main(["campaign", "--config", str(config), "--out", str(out8), "--threads", "8"]) == 0
    for name in ("cv_records.csv", "cv_summary.json", "cc_records.csv", "cc_summary.json"):
        assert (out1 / name).read_bytes() == (out8 / name).read_bytes(), name


def test_summary_config_round_trips_through_campaign(tmp_path):
    first_out = tmp_path / "first"
    assert main(_variance_args(first_out, ("--name", "rt"))) == 0
    summary = json.loads((first_out / "rt_summary.json").read_text(encoding="utf-8"))

    campaign = {"experiments": [summary["config"]]}
    config_path = tmp_path / "replay.json"
    config_path.write_text(json.dumps(campaign), encoding="utf-8")
    second_out = tmp_path / "second"
    assert main(["campaign", "--config", str(config_path), "--out", str(second_out)]) == 0

    assert (first_out / "rt_records.csv").read_bytes() == (
        second_out / "rt_records.csv"
    ).read_bytes()


# ---------------------------------------------------------------------------
# console entry point and server mode


def test_console_script_help():
    exe = shutil.which("polylab")
    argv = [exe, "--help"] if exe else [sys.executable, "-m", "polylab.cli", "--help"]
    proc = subprocess.run(argv, capture_output=True, text=True)
    assert proc.returncode == 0
    assert "campaign" in proc.stdout


@pytest.fixture(scope="module")
def live_server():
    port = 8731
    proc = subprocess.Popen(
        [
            sys.executable,
            "-m",
            "uvicorn",
            "--factory",
            "polylab.service.app:create_app",
            "--host",
            "127.0.0.1",
            "--port",
            str(port),
            "--log-level",
            "warning",
        ],
        stdout=subprocess.DEVNULL,
        stderr=subprocess.DEVNULL,
    )
    url = f"http://127.0.0.1:{port}"
    try:
        deadline = time.monotonic() + 30.0
        while True:
            try:
                if httpx.get(url + "/health", timeout=1.0).status_code == 200:
                    break
            except httpx.HTTPError:
                pass
            if time.monotonic() > deadline:
                raise RuntimeError("service did not come up in time")
            time.sleep(0.2)
        yield url
    finally:
        proc.terminate()
        proc.wait(timeout=10)


def test_server_mode_matches_in_process(tmp_path, live_server):
    local, remote = tmp_path / "local", tmp_path / "remote"
    args = ["caps", "--d", "3", "--eps", "1e-6:1e-3:x10", "--name", "srv"]
    assert main(args + ["--out", str(local)]) == 0
    assert main(args + ["--out", str(remote), "--server", live_server]) == 0
    assert (local / "srv_records.csv").read_bytes() == (
        remote / "srv_records.csv"
    ).read_bytes()
    assert (local / "srv_summary.json").read_bytes() == (
        remote / "srv_summary.json"
    ).read_bytes()


def test_server_mode_domain_error_exits_two(tmp_path, live_server, capsys):
    code = main(
        [
            "variance",
            "--d",
            "2",
            "--ell",
            "2",
            "--n",
            "2,8,16",
            "--reps",
            "120",
            "--out",
            str(tmp_path),
            "--server",
            live_server,
        ]
    )
    assert code == 2
    assert "server rejected" in capsys.readouterr().err
