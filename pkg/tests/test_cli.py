from __future__ import annotations

import json

import pytest

from seasonal_cusum.cli import EXIT_INPUT, EXIT_OK, main
from seasonal_cusum.ingest import write_daily_csv, write_slot_csv


@pytest.fixture(scope="module")
def workspace(tmp_path_factory, train_dataset):
    """CSV inputs plus a fitted model directory, produced through the CLI."""
    root = tmp_path_factory.mktemp("cli")
    daily = root / "daily.csv"
    slots = root / "slots.csv"
    holidays = root / "holidays.txt"
    write_daily_csv(train_dataset.daily, daily)
    write_slot_csv(train_dataset.slots, slots)
    holidays.write_text("".join(f"{d.isoformat()}\n" for d in sorted(train_dataset.holidays)))
    fit_dir = root / "fit"
    rc = main(
        [
            "fit",
            "--daily", str(daily),
            "--slots", str(slots),
            "--holidays", str(holidays),
            "--out", str(fit_dir),
        ]
    )
    assert rc == EXIT_OK
    return {
        "root": root,
        "daily": daily,
        "slots": slots,
        "holidays": holidays,
        "model": fit_dir / "model.json",
        "fit_dir": fit_dir,
    }


def test_fit_outputs(workspace):
    report = json.loads((workspace["fit_dir"] / "fit_report.json").read_text())
    assert len(report["bic_table"]) == 5
    assert set(report["selected_factors"]) >= {"month", "day_of_week"}
    assert not report["profile_fallback_uniform"]
    manifest = json.loads((workspace["fit_dir"] / "manifest.json").read_text())
    assert manifest["command"] == "fit"
    assert (workspace["model"]).exists()


def test_fit_without_slots_falls_back_to_uniform(workspace, tmp_path):
    rc = main(["fit", "--daily", str(workspace["daily"]), "--out", str(tmp_path / "fit2")])
    assert rc == EXIT_OK
    report = json.loads((tmp_path / "fit2" / "fit_report.json").read_text())
    assert report["profile_fallback_uniform"]


def test_fit_empty_training_set_errors(workspace, tmp_path, capsys):
    rc = main(
        [
            "fit",
            "--daily", str(workspace["daily"]),
            "--split-date", "2016-01-04",  # first record date: empty train half
            "--out", str(tmp_path / "fit3"),
        ]
    )
    assert rc == EXIT_INPUT
    assert "error" in capsys.readouterr().err


def test_simulate_roundtrips_through_detect(workspace, tmp_path):
    sim_dir = tmp_path / "sim"
    rc = main(
        [
            "simulate",
            "--model", str(workspace["model"]),
            "--start-date", "2018-01-01",
            "--days", "14",
            "--seed", "3",
            "--out", str(sim_dir),
        ]
    )
    assert rc == EXIT_OK
    det_dir = tmp_path / "det"
    rc = main(
        [
            "detect",
            "--model", str(workspace["model"]),
            "--series", str(sim_dir / "slots.csv"),
            "--rho", "1.2",
            "--m", "40.0",
            "--out", str(det_dir),
        ]
    )
    assert rc == EXIT_OK
    vpath = (det_dir / "vpath.csv").read_text().splitlines()
    series_rows = (sim_dir / "slots.csv").read_text().splitlines()
    assert len(vpath) == len(series_rows)  # header for header, row for row
    assert vpath[0] == "timestamp,v,lambda_increment,count,alarm_flag"
    assert (det_dir / "alarms.jsonl").exists()


def test_detect_is_byte_deterministic(workspace, tmp_path):
    sim_dir = tmp_path / "sim"
    main(
        [
            "simulate",
            "--model", str(workspace["model"]),
            "--start-date", "2018-01-01",
            "--days", "7",
            "--seed", "5",
            "--out", str(sim_dir),
        ]
    )
    out = tmp_path / "det"
    argv = [
        "detect",
        "--model", str(workspace["model"]),
        "--series", str(sim_dir / "slots.csv"),
        "--rho", "1.2",
        "--m", "38.7",
        "--out", str(out),
    ]
    assert main(argv) == EXIT_OK
    first = {f.name: f.read_bytes() for f in out.iterdir()}
    assert main(argv) == EXIT_OK
    second = {f.name: f.read_bytes() for f in out.iterdir()}
    assert first == second


def test_simulate_is_byte_deterministic(workspace, tmp_path):
    out = tmp_path / "sim"
    argv = [
        "simulate",
        "--model", str(workspace["model"]),
        "--start-date", "2018-02-01",
        "--days", "10",
        "--seed", "11",
        "--rho", "1.5",
        "--theta", "2018-02-06T09:00",
        "--out", str(out),
    ]
    assert main(argv) == EXIT_OK
    first = {f.name: f.read_bytes() for f in out.iterdir()}
    assert main(argv) == EXIT_OK
    second = {f.name: f.read_bytes() for f in out.iterdir()}
    assert first == second


def test_calibrate_pi_one(workspace, tmp_path):
    out = tmp_path / "cal"
    rc = main(
        [
            "calibrate",
            "--model", str(workspace["model"]),
            "--rho", "1.2",
            "--pi", "1",
            "--start-date", "2018-01-01",
            "--days", "7",
            "--replications", "200",
            "--out", str(out),
        ]
    )
    assert rc == EXIT_OK
    doc = json.loads((out / "calibration.json").read_text())
    assert doc["threshold_m"] <= 1.0
    assert doc["arl_estimate"] == 1.0


def test_detect_with_pi_calibrates_first(workspace, tmp_path):
    sim_dir = tmp_path / "sim"
    main(
        [
            "simulate",
            "--model", str(workspace["model"]),
            "--start-date", "2018-04-02",
            "--days", "7",
            "--seed", "13",
            "--out", str(sim_dir),
        ]
    )
    out = tmp_path / "detpi"
    rc = main(
        [
            "detect",
            "--model", str(workspace["model"]),
            "--series", str(sim_dir / "slots.csv"),
            "--rho", "1.2",
            "--pi", "500",
            "--replications", "300",
            "--seed", "7",
            "--out", str(out),
        ]
    )
    assert rc == EXIT_OK
    assert (out / "vpath.csv").exists()


def test_detect_requires_exactly_one_of_m_or_pi(workspace, tmp_path):
    with pytest.raises(SystemExit):
        main(
            [
                "detect",
                "--model", str(workspace["model"]),
                "--series", "x.csv",
                "--rho", "1.2",
                "--out", str(tmp_path / "z"),
            ]
        )


def test_detect_missing_series_is_input_error(workspace, tmp_path, capsys):
    rc = main(
        [
            "detect",
            "--model", str(workspace["model"]),
            "--series", str(tmp_path / "missing.csv"),
            "--rho", "1.2",
            "--m", "10",
            "--out", str(tmp_path / "q"),
        ]
    )
    assert rc == EXIT_INPUT


def test_double_sided_detect_outputs(workspace, tmp_path):
    sim_dir = tmp_path / "sim"
    main(
        [
            "simulate",
            "--model", str(workspace["model"]),
            "--start-date", "2018-03-05",
            "--days", "7",
            "--seed", "8",
            "--out", str(sim_dir),
        ]
    )
    out = tmp_path / "ds"
    rc = main(
        [
            "detect",
            "--model", str(workspace["model"]),
            "--series", str(sim_dir / "slots.csv"),
            "--rho", "1.2",
            "--m", "38.7",
            "--double-sided",
            "--out", str(out),
        ]
    )
    assert rc == EXIT_OK
    assert (out / "vpath_up.csv").exists()
    assert (out / "vpath_down.csv").exists()
    assert (out / "alarms.jsonl").exists()


def test_evaluate_command(workspace, tmp_path):
    out = tmp_path / "eval"
    rc = main(
        [
            "evaluate",
            "--model", str(workspace["model"]),
            "--rho", "3.0",
            "--m", "10.0",
            "--theta-grid", "2018-01-03T09:00,40.0",
            "--start-date", "2018-01-01",
            "--days", "7",
            "--replications", "40",
            "--seed", "2",
            "--out", str(out),
        ]
    )
    assert rc == EXIT_OK
    doc = json.loads((out / "delay_report.json").read_text())
    assert len(doc["per_theta"]) == 2
    assert (out / "per_theta.csv").exists()
