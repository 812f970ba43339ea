"""Detector performance on simulated ground truth.

Delays are measured in events, (N at alarm - N at the change)+, per the
run-length view of the detector; the worst case over a grid of change
times approximates the sup over change points, with per-path maxima kept
as a pessimistic companion to the means.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .detect import EVENT_TIMES, DetectorConfig, TimelineRun, run_aggregated, run_events
from .errors import ValidationError
from .simulate import ChangeSpec, simulate_events, simulate_slot_counts
from .timeline import SlotTimeline


def exceedance_fraction(v_path: Sequence[float], m: float) -> float:
    """Fraction of steps at or above the threshold (boundary counts)."""
    v = np.asarray(v_path, dtype=float)
    if v.size == 0:
        raise ValidationError("empty path")
    return float(np.mean(v >= m))


def _run(timeline: SlotTimeline, change: ChangeSpec, config: DetectorConfig, seed: int, rep: int) -> tuple[TimelineRun, object]:
    if config.mode == EVENT_TIMES:
        path = simulate_events(timeline, change, seed, rep)
        return run_events(timeline, path.event_times, config), path
    path = simulate_slot_counts(timeline, change, seed, rep)
    return run_aggregated(timeline, path.counts, config), path


def _pre_change_events(path, timeline: SlotTimeline, theta: float, mode: str) -> int:
    if mode == EVENT_TIMES:
        return int(np.searchsorted(np.asarray(path.event_times), theta, side="left"))
    # Aggregated observation: only whole slots ending by theta are attributable.
    ends = timeline.ends
    counts = np.asarray(path.counts)
    return int(counts[ends <= theta].sum())


@dataclass(frozen=True)
class DelayStats:
    theta: float
    mean_delay_events: float  # NaN when nothing was detected
    stderr: float
    detect_probability: float
    max_delay_events: float
    replications: int
    mean_delay_time: float = math.nan  # convenience: open-time units (half-hour slots)


def detection_delay(
    timeline: SlotTimeline,
    change: ChangeSpec,
    config: DetectorConfig,
    replications: int = 200,
    seed: int = 0,
) -> DelayStats:
    """Post-change run length (N_alarm - N_change)+ over simulated paths.

    The first alarm at or after the change defines the delay; with resets
    disabled, a path already in alarm before the change counts as a zero
    delay (the alarm is standing when the change arrives).
    """
    if change.in_control:
        raise ValidationError("detection delay needs a finite change time")
    delays = []
    time_delays = []
    detected = 0
    for rep in range(replications):
        run, path = _run(timeline, change, config, seed, rep)
        n_theta = _pre_change_events(path, timeline, change.theta, config.mode)
        post = [a for a in run.alarms if float(a.time) >= change.theta]
        if post:
            detected += 1
            delays.append(max(0, post[0].events_at_alarm - n_theta))
            time_delays.append(float(post[0].time) - change.theta)
        elif run.alarms and not config.reset_on_alarm:
            detected += 1
            delays.append(0)
            time_delays.append(0.0)
    if detected == 0:
        return DelayStats(change.theta, math.nan, math.nan, 0.0, math.nan, replications)
    arr = np.array(delays, dtype=float)
    stderr = float(arr.std(ddof=1) / math.sqrt(len(arr))) if len(arr) > 1 else 0.0
    return DelayStats(
        theta=change.theta,
        mean_delay_events=float(arr.mean()),
        stderr=stderr,
        detect_probability=detected / replications,
        max_delay_events=float(arr.max()),
        replications=replications,
        mean_delay_time=float(np.mean(time_delays)),
    )


@dataclass(frozen=True)
class DelayReport:
    per_theta: list[DelayStats]
    worst_case_delay_events: float
    worst_case_max_delay_events: float
    false_alarm_rate: float  # alarms per unit open time, in control
    exceedance_fraction: float  # in-control fraction of steps at/above m
    rho: float

    def to_dict(self) -> dict:
        return {
            "rho": self.rho,
            "worst_case_delay_events": self.worst_case_delay_events,
            "worst_case_max_delay_events": self.worst_case_max_delay_events,
            "false_alarm_rate_per_unit_time": self.false_alarm_rate,
            "in_control_exceedance_fraction": self.exceedance_fraction,
            "per_theta": [
                {
                    "theta": d.theta,
                    "mean_delay_events": None if math.isnan(d.mean_delay_events) else d.mean_delay_events,
                    "stderr": None if math.isnan(d.stderr) else d.stderr,
                    "detect_probability": d.detect_probability,
                    "max_delay_events": None if math.isnan(d.max_delay_events) else d.max_delay_events,
                    "mean_delay_open_slots": None if math.isnan(d.mean_delay_time) else d.mean_delay_time,
                    "replications": d.replications,
                }
                for d in self.per_theta
            ],
        }


def worst_case_delay(
    timeline: SlotTimeline,
    rho: float,
    theta_grid: Sequence[float],
    config: DetectorConfig,
    replications: int = 200,
    seed: int = 0,
    in_control_replications: int = 50,
) -> DelayReport:
    """Delay statistics across a grid of change times, plus in-control rates."""
    if not theta_grid:
        raise ValidationError("theta grid is empty")
    per_theta = [
        detection_delay(timeline, ChangeSpec(theta=float(t), rho=rho), config, replications, seed)
        for t in theta_grid
    ]
    means = [d.mean_delay_events for d in per_theta if not math.isnan(d.mean_delay_events)]
    maxes = [d.max_delay_events for d in per_theta if not math.isnan(d.max_delay_events)]

    alarm_count = 0
    exceed_steps = 0
    total_steps = 0
    for rep in range(in_control_replications):
        run, _ = _run(timeline, ChangeSpec(), config, seed + 1, rep)
        alarm_count += len(run.alarms)
        exceed_steps += int(np.sum(run.v >= config.threshold_m))
        total_steps += len(run.v)
    return DelayReport(
        per_theta=per_theta,
        worst_case_delay_events=max(means) if means else math.nan,
        worst_case_max_delay_events=max(maxes) if maxes else math.nan,
        false_alarm_rate=alarm_count / (in_control_replications * timeline.total_time),
        exceedance_fraction=exceed_steps / total_steps if total_steps else math.nan,
        rho=rho,
    )


def write_delay_report_json(report: DelayReport, path: str | Path) -> None:
    Path(path).write_text(json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n")


def write_delay_table_csv(report: DelayReport, path: str | Path) -> None:
    lines = ["theta,mean_delay_events,stderr,detect_probability,max_delay_events"]
    for d in report.per_theta:
        mean = "" if math.isnan(d.mean_delay_events) else repr(d.mean_delay_events)
        se = "" if math.isnan(d.stderr) else repr(d.stderr)
        mx = "" if math.isnan(d.max_delay_events) else repr(d.max_delay_events)
        lines.append(f"{d.theta!r},{mean},{se},{d.detect_probability!r},{mx}")
    Path(path).write_text("\n".join(lines) + "\n")
