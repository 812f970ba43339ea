"""Command-line pipeline: fit, calibrate, simulate, detect, evaluate.

Every command writes its artifacts plus a manifest (arguments, seeds,
schema versions) under the output directory; re-running with the same
manifest reproduces identical bytes. Figures are emitted as tidy CSVs for
external plotting. Exit codes: 0 ran (alarms are data, not failures),
2 input error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from datetime import date, datetime, timedelta
from pathlib import Path

from . import __version__
from .calibrate import CalibrationTarget, calibrate_threshold
from .daycal import DEFAULT_ORIGIN, read_holidays
from .detect import (
    AGGREGATED_COUNTS,
    DECREASE,
    EVENT_TIMES,
    INCREASE,
    DetectorConfig,
    double_sided_run,
    run_detector,
    write_alarms_jsonl,
    write_vpath_csv,
)
from .errors import (
    BracketingError,
    ConvergenceError,
    HorizonTooShortError,
    SeasonalCusumError,
    SingularDesignError,
)
from .evaluate import worst_case_delay, write_delay_report_json, write_delay_table_csv
from .ingest import load_dataset, parse_slot_csv, split_train_test, write_slot_csv
from .intensity import IntensityModel, fit_intensity_model
from .simulate import (
    POSTPONE_THIRD_TUESDAY,
    ChangeSpec,
    ScenarioTransform,
    apply_scenario,
    simulate_events,
    simulate_slot_counts,
)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERIC = 3

MANIFEST_SCHEMA_VERSION = 1


def _write_manifest(out_dir: Path, command: str, args: argparse.Namespace) -> None:
    doc = {
        "schema_version": MANIFEST_SCHEMA_VERSION,
        "package_version": __version__,
        "command": command,
        "arguments": {
            k: (v.isoformat() if isinstance(v, (date, datetime)) else v)
            for k, v in sorted(vars(args).items())
            if k != "func"
        },
    }
    (out_dir / "manifest.json").write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _date_range(start: date, days: int) -> list[date]:
    return [start + timedelta(days=i) for i in range(days)]


def _load_model(args) -> IntensityModel:
    model = IntensityModel.load(args.model)
    if getattr(args, "naive_lambda", False):
        model = model.as_naive()
    return model


def cmd_fit(args) -> int:
    out = _out_dir(args)
    holidays = read_holidays(args.holidays) if args.holidays else frozenset()
    dataset = load_dataset(
        args.daily,
        slot_path=args.slots,
        holidays=holidays,
        origin=args.origin,
        split_date=args.split_date,
    )
    if args.split_date is not None:
        train, _ = split_train_test(dataset, args.split_date)
    else:
        train = dataset
    model, report = fit_intensity_model(train)
    model.save(out / "model.json")
    (out / "fit_report.json").write_text(json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n")
    _write_manifest(out, "fit", args)
    print(f"selected factors: {sorted(report.selected)}")
    print(f"model written to {out / 'model.json'}")
    return EXIT_OK


def _detector_config(args, direction: str, threshold: float) -> DetectorConfig:
    rho = args.rho if direction == INCREASE else 1.0 / args.rho
    return DetectorConfig(
        rho=rho,
        threshold_m=threshold,
        direction=direction,
        mode=AGGREGATED_COUNTS,
        reset_on_alarm=args.reset_on_alarm,
    )


def _calibrated_m(args, model: IntensityModel, dates: list[date], direction: str) -> float:
    timeline = model.timeline(dates)
    rho = args.rho if direction == INCREASE else 1.0 / args.rho
    config = DetectorConfig(rho=rho, threshold_m=1.0, direction=direction, mode=EVENT_TIMES)
    target = CalibrationTarget(pi=args.pi, replications=args.replications)
    result = calibrate_threshold(timeline, config, target, seed=args.seed)
    return result.threshold_m


def cmd_detect(args) -> int:
    out = _out_dir(args)
    model = _load_model(args)
    series = list(parse_slot_csv(args.series))
    if args.scenario == POSTPONE_THIRD_TUESDAY:
        series = apply_scenario(series, ScenarioTransform(kind=POSTPONE_THIRD_TUESDAY))
    dates = sorted({r.date for r in series})

    if args.m is not None:
        m_up = m_down = args.m
    else:
        m_up = _calibrated_m(args, model, dates, INCREASE)
        m_down = _calibrated_m(args, model, dates, DECREASE) if args.double_sided else m_up

    if args.double_sided:
        up, down, merged = double_sided_run(
            series,
            model,
            _detector_config(args, INCREASE, m_up),
            _detector_config(args, DECREASE, m_down),
        )
        write_vpath_csv(up.records, out / "vpath_up.csv")
        write_vpath_csv(down.records, out / "vpath_down.csv")
        write_alarms_jsonl(merged, out / "alarms.jsonl")
        n_alarms = len(merged)
    else:
        run = run_detector(series, model, _detector_config(args, INCREASE, m_up))
        write_vpath_csv(run.records, out / "vpath.csv")
        write_alarms_jsonl(run.alarms, out / "alarms.jsonl")
        n_alarms = len(run.alarms)
    _write_manifest(out, "detect", args)
    print(f"{n_alarms} alarm(s); outputs in {out}")
    return EXIT_OK


def cmd_calibrate(args) -> int:
    out = _out_dir(args)
    model = _load_model(args)
    timeline = model.timeline(_date_range(args.start_date, args.days))
    direction = INCREASE if args.rho > 1 else DECREASE
    mode = AGGREGATED_COUNTS if args.aggregated else EVENT_TIMES
    config = DetectorConfig(rho=args.rho, threshold_m=1.0, direction=direction, mode=mode)
    target = CalibrationTarget(
        pi=args.pi,
        replications=args.replications,
        horizon_cap=args.horizon_cap,
    )
    result = calibrate_threshold(timeline, config, target, seed=args.seed)
    doc = result.to_dict()
    # Convenience: the same budget expressed in open half-hours of calendar.
    doc["expected_open_halfhours_to_false_alarm"] = args.pi / (timeline.total_mean / timeline.total_time)
    (out / "calibration.json").write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    _write_manifest(out, "calibrate", args)
    print(f"threshold m = {result.threshold_m!r} (ARL {result.arl_estimate:.1f} events)")
    return EXIT_OK


def cmd_simulate(args) -> int:
    out = _out_dir(args)
    model = _load_model(args)
    timeline = model.timeline(_date_range(args.start_date, args.days))
    if args.theta is not None:
        theta_dt = datetime.fromisoformat(args.theta)
        change = ChangeSpec(theta=timeline.locate(theta_dt.date(), theta_dt.time()), rho=args.rho)
    else:
        change = ChangeSpec()
    if args.events:
        path = simulate_events(timeline, change, seed=args.seed)
        lines = ["event_time"]
        lines += [repr(t) for t in path.event_times]
        (out / "events.csv").write_text("\n".join(lines) + "\n")
    else:
        path = simulate_slot_counts(timeline, change, seed=args.seed)
    records = path.to_slot_records()
    if args.scenario == POSTPONE_THIRD_TUESDAY:
        records = apply_scenario(records, ScenarioTransform(kind=POSTPONE_THIRD_TUESDAY))
    write_slot_csv(records, out / "slots.csv")
    sidecar = {
        "seed": args.seed,
        "change": {"theta": None if change.in_control else change.theta, "rho": change.rho},
        "scenario": args.scenario,
    }
    (out / "sim_info.json").write_text(json.dumps(sidecar, indent=2, sort_keys=True) + "\n")
    _write_manifest(out, "simulate", args)
    print(f"simulated series in {out / 'slots.csv'}")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    out = _out_dir(args)
    model = _load_model(args)
    timeline = model.timeline(_date_range(args.start_date, args.days))
    thetas = []
    for tok in args.theta_grid.split(","):
        tok = tok.strip()
        try:
            thetas.append(float(tok))
        except ValueError:
            dt = datetime.fromisoformat(tok)
            thetas.append(timeline.locate(dt.date(), dt.time()))
    config = DetectorConfig(
        rho=args.rho,
        threshold_m=args.m,
        direction=INCREASE if args.rho > 1 else DECREASE,
        mode=AGGREGATED_COUNTS,
        reset_on_alarm=args.reset_on_alarm,
    )
    report = worst_case_delay(
        timeline,
        rho=args.rho,
        theta_grid=thetas,
        config=config,
        replications=args.replications,
        seed=args.seed,
    )
    write_delay_report_json(report, out / "delay_report.json")
    write_delay_table_csv(report, out / "per_theta.csv")
    _write_manifest(out, "evaluate", args)
    print(f"worst-case mean delay {report.worst_case_delay_events!r} events; report in {out}")
    return EXIT_OK


def _add_common_out(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", required=True, help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="seasonal-cusum",
        description="Quickest detection of proportional rate changes in seasonal count data.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_fit = sub.add_parser("fit", help="fit the seasonal intensity model from CSVs")
    p_fit.add_argument("--daily", required=True, help="daily counts CSV (date,count)")
    p_fit.add_argument("--slots", default=None, help="half-hour counts CSV (date,slot_start,count)")
    p_fit.add_argument("--holidays", default=None, help="holiday list, one ISO date per line")
    p_fit.add_argument("--split-date", type=date.fromisoformat, default=None)
    p_fit.add_argument("--origin", type=date.fromisoformat, default=DEFAULT_ORIGIN)
    _add_common_out(p_fit)
    p_fit.set_defaults(func=cmd_fit)

    p_cal = sub.add_parser("calibrate", help="choose the alarm threshold for a false-alarm budget")
    p_cal.add_argument("--model", required=True)
    p_cal.add_argument("--rho", type=float, required=True)
    p_cal.add_argument("--pi", type=float, required=True, help="expected events to false alarm")
    p_cal.add_argument("--start-date", type=date.fromisoformat, required=True)
    p_cal.add_argument("--days", type=int, required=True)
    p_cal.add_argument("--replications", type=int, default=2000)
    p_cal.add_argument("--horizon-cap", type=float, default=None)
    p_cal.add_argument("--seed", type=int, default=0)
    p_cal.add_argument("--aggregated", action="store_true", help="calibrate at half-hour granularity")
    p_cal.add_argument("--naive-lambda", action="store_true")
    _add_common_out(p_cal)
    p_cal.set_defaults(func=cmd_calibrate)

    p_sim = sub.add_parser("simulate", help="draw a synthetic series from a model")
    p_sim.add_argument("--model", required=True)
    p_sim.add_argument("--start-date", type=date.fromisoformat, required=True)
    p_sim.add_argument("--days", type=int, required=True)
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.add_argument("--rho", type=float, default=1.0)
    p_sim.add_argument("--theta", default=None, help="change instant, ISO datetime")
    p_sim.add_argument("--events", action="store_true", help="also write exact event times")
    p_sim.add_argument("--scenario", choices=[POSTPONE_THIRD_TUESDAY], default=None)
    p_sim.add_argument("--naive-lambda", action="store_true")
    _add_common_out(p_sim)
    p_sim.set_defaults(func=cmd_simulate)

    p_det = sub.add_parser("detect", help="run the detector over a slot series")
    p_det.add_argument("--model", required=True)
    p_det.add_argument("--series", required=True, help="slot counts CSV")
    p_det.add_argument("--rho", type=float, required=True)
    group = p_det.add_mutually_exclusive_group(required=True)
    group.add_argument("--m", type=float, default=None, help="alarm threshold")
    group.add_argument("--pi", type=float, default=None, help="calibrate the threshold to this budget")
    p_det.add_argument("--replications", type=int, default=2000, help="calibration replications")
    p_det.add_argument("--seed", type=int, default=0)
    p_det.add_argument("--naive-lambda", action="store_true", help="constant baseline rate")
    p_det.add_argument("--double-sided", action="store_true")
    p_det.add_argument("--reset-on-alarm", action=argparse.BooleanOptionalAction, default=True)
    p_det.add_argument("--scenario", choices=[POSTPONE_THIRD_TUESDAY], default=None)
    _add_common_out(p_det)
    p_det.set_defaults(func=cmd_detect)

    p_eval = sub.add_parser("evaluate", help="delay and false-alarm statistics by simulation")
    p_eval.add_argument("--model", required=True)
    p_eval.add_argument("--rho", type=float, required=True)
    p_eval.add_argument("--m", type=float, required=True)
    p_eval.add_argument("--theta-grid", required=True, help="comma list: open-time floats or ISO datetimes")
    p_eval.add_argument("--start-date", type=date.fromisoformat, required=True)
    p_eval.add_argument("--days", type=int, required=True)
    p_eval.add_argument("--replications", type=int, default=200)
    p_eval.add_argument("--seed", type=int, default=0)
    p_eval.add_argument("--reset-on-alarm", action=argparse.BooleanOptionalAction, default=True)
    p_eval.add_argument("--naive-lambda", action="store_true")
    _add_common_out(p_eval)
    p_eval.set_defaults(func=cmd_evaluate)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConvergenceError, SingularDesignError, BracketingError, HorizonTooShortError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (SeasonalCusumError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
