"""Reflected CUSUM detector for proportional intensity changes.

The detector tracks the drift-normalized log-ratio statistic and its
reflection at zero. With per-event jumps of +1 and decay at rate
beta(rho) * lambda between events, the reflected statistic stays near zero
while arrivals match the model and climbs once the rate grows by the
factor rho; an alarm fires at the first passage over the threshold.
Aggregated counts drive the same statistic interval by interval.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from datetime import datetime
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from .daycal import slot_timestamp
from .errors import ValidationError
from .ingest import SlotRecord
from .intensity import IntensityModel
from .timeline import SlotTimeline

INCREASE = "increase"
DECREASE = "decrease"
EVENT_TIMES = "events"
AGGREGATED_COUNTS = "aggregated"


def beta(rho: float) -> float:
    """Drift normalizer (rho - 1) / ln(rho); > 1 above rho = 1, < 1 below."""
    if rho <= 0 or rho == 1:
        raise ValueError(f"rho must be positive and different from 1, got {rho}")
    return (rho - 1.0) / math.log(rho)


@dataclass(frozen=True)
class DetectorConfig:
    rho: float
    threshold_m: float
    direction: str = INCREASE
    mode: str = AGGREGATED_COUNTS
    reset_on_alarm: bool = True

    def __post_init__(self):
        if self.direction not in (INCREASE, DECREASE):
            raise ValidationError(f"unknown direction {self.direction!r}")
        if self.mode not in (EVENT_TIMES, AGGREGATED_COUNTS):
            raise ValidationError(f"unknown mode {self.mode!r}")
        if self.threshold_m <= 0:
            raise ValidationError("threshold must be positive")
        beta(self.rho)  # domain check
        if self.direction == INCREASE and self.rho <= 1:
            raise ValidationError("increase detection needs rho > 1")
        if self.direction == DECREASE and self.rho >= 1:
            raise ValidationError("decrease detection needs rho < 1")

    @property
    def beta(self) -> float:
        return beta(self.rho)


@dataclass(frozen=True)
class CusumState:
    """Running detector state; v is the reflected statistic, u its free walk."""

    v: float = 0.0
    u: float = 0.0
    u_min: float = 0.0
    events_seen: int = 0
    clock: object = None
    armed: bool = True

    @classmethod
    def initial(cls, clock: object = None) -> "CusumState":
        return cls(clock=clock)


@dataclass(frozen=True)
class AlarmEvent:
    time: object
    v_at_alarm: float
    events_at_alarm: int
    direction: str = INCREASE


def _resolve_alarm(state: CusumState, config: DetectorConfig, time: object) -> tuple[CusumState, AlarmEvent | None]:
    if not (state.armed and state.v >= config.threshold_m):
        return state, None
    alarm = AlarmEvent(
        time=time,
        v_at_alarm=state.v,
        events_at_alarm=state.events_seen,
        direction=config.direction,
    )
    if config.reset_on_alarm:
        state = replace(state, v=0.0, u_min=state.u, armed=True)
    else:
        state = replace(state, armed=False)
    return state, alarm


def step_aggregated(
    state: CusumState,
    count: int,
    lambda_increment: float,
    config: DetectorConfig,
    clock: object = None,
) -> tuple[CusumState, AlarmEvent | None]:
    """Advance over one observation interval with an aggregated count.

    The one-step update is v' = max(0, v + count - beta * dLambda) for the
    increase direction and v' = max(0, v + beta * dLambda - count) for the
    decrease direction; u and its running minimum track the unreflected walk.
    """
    if count < 0:
        raise ValidationError(f"negative count {count}")
    if lambda_increment < 0:
        raise ValidationError(f"negative intensity increment {lambda_increment}")
    if config.direction == INCREASE:
        x = count - config.beta * lambda_increment
    else:
        x = config.beta * lambda_increment - count
    u = state.u + x
    new = replace(
        state,
        v=max(0.0, state.v + x),
        u=u,
        u_min=min(state.u_min, u),
        events_seen=state.events_seen + int(count),
        clock=state.clock if clock is None else clock,
    )
    return _resolve_alarm(new, config, new.clock)


def _drift_crossing(t0: float, t1: float, needed: float, cum: Callable[[float, float], float]) -> float:
    """Instant in (t0, t1] where the cumulative intensity reaches `needed`."""
    lo, hi = t0, t1
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if cum(t0, mid) < needed:
            lo = mid
        else:
            hi = mid
    return hi


def step_events(
    state: CusumState,
    event_times: Sequence[float],
    config: DetectorConfig,
    interval: tuple[float, float],
    cum_intensity: Callable[[float, float], float],
) -> tuple[CusumState, AlarmEvent | None]:
    """Advance over one interval from exact event times.

    Between events the statistic drifts by beta * dLambda (down for the
    increase direction, up for decrease) with reflection at zero; each event
    contributes a unit jump. Increase alarms can only trigger at a jump;
    decrease alarms may trigger mid-drift, at the exact crossing instant.
    """
    t0, t1 = interval
    if t1 < t0:
        raise ValidationError("interval end precedes start")
    times = list(event_times)
    if any(b < a for a, b in zip(times, times[1:])):
        raise ValidationError("event times must be sorted")
    if times and (times[0] < t0 or times[-1] > t1):
        raise ValidationError("event times outside the interval")

    b = config.beta
    sign = 1.0 if config.direction == INCREASE else -1.0
    first_alarm: AlarmEvent | None = None

    def drift(state: CusumState, a: float, t: float) -> tuple[CusumState, AlarmEvent | None]:
        dlam = cum_intensity(a, t)
        if config.direction == INCREASE:
            x = -b * dlam
            u = state.u + x
            return replace(state, v=max(0.0, state.v + x), u=u, u_min=min(state.u_min, u)), None
        # Decrease: upward drift can cross the threshold inside the segment.
        alarm = None
        if state.armed and state.v + b * dlam >= config.threshold_m:
            t_star = _drift_crossing(a, t, (config.threshold_m - state.v) / b, cum_intensity)
            crossed = replace(state, v=config.threshold_m, u=state.u + (config.threshold_m - state.v))
            crossed, alarm = _resolve_alarm(crossed, config, t_star)
            if not config.reset_on_alarm:
                rest = b * cum_intensity(t_star, t)
                return replace(crossed, v=crossed.v + rest, u=crossed.u + rest), alarm
            # Re-armed at zero; remaining drift may cross again, fold it in recursively.
            tail, later = drift(crossed, t_star, t)
            return tail, alarm or later
        x = b * dlam
        return replace(state, v=state.v + x, u=state.u + x), alarm

    prev = t0
    for ev in times:
        state, alarm = drift(state, prev, ev)
        first_alarm = first_alarm or alarm
        u = state.u + sign * 1.0
        state = replace(
            state,
            v=max(0.0, state.v + sign * 1.0),
            u=u,
            u_min=min(state.u_min, u),
            events_seen=state.events_seen + 1,
        )
        state, alarm = _resolve_alarm(state, config, ev)
        first_alarm = first_alarm or alarm
        prev = ev
    state, alarm = drift(state, prev, t1)
    first_alarm = first_alarm or alarm
    state = replace(state, clock=t1)
    return state, first_alarm


@dataclass
class TimelineRun:
    """V sampled at slot boundaries plus every alarm raised along the way."""

    v: np.ndarray
    alarms: list[AlarmEvent]
    state: CusumState


def run_aggregated(
    timeline: SlotTimeline,
    counts: Sequence[int],
    config: DetectorConfig,
    state: CusumState | None = None,
) -> TimelineRun:
    if len(counts) != len(timeline):
        raise ValidationError("counts length must match the timeline")
    state = state or CusumState.initial(clock=float(timeline.starts[0]))
    v = np.empty(len(counts))
    alarms = []
    for i, count in enumerate(counts):
        state, alarm = step_aggregated(state, int(count), float(timeline.means[i]), config, clock=float(timeline.ends[i]))
        # Record the pre-reset level so the path shows the actual excursion.
        v[i] = alarm.v_at_alarm if alarm is not None else state.v
        if alarm is not None:
            alarms.append(alarm)
    return TimelineRun(v=v, alarms=alarms, state=state)


def run_events(
    timeline: SlotTimeline,
    event_times: Sequence[float],
    config: DetectorConfig,
    state: CusumState | None = None,
) -> TimelineRun:
    """Run from exact event times; v is sampled at every slot boundary."""
    times = np.asarray(event_times, dtype=float)
    state = state or CusumState.initial(clock=float(timeline.starts[0]))
    v = np.empty(len(timeline))
    alarms = []
    for i in range(len(timeline)):
        a, bnd = float(timeline.starts[i]), float(timeline.ends[i])
        inside = times[(times > a) & (times <= bnd)] if i > 0 else times[(times >= a) & (times <= bnd)]
        state, alarm = step_events(state, inside.tolist(), config, (a, bnd), timeline.cumulative)
        if alarm is not None:
            alarms.append(alarm)
        v[i] = state.v
    return TimelineRun(v=v, alarms=alarms, state=state)


@dataclass(frozen=True)
class StepRecord:
    timestamp: datetime
    v: float
    lambda_increment: float
    count: int
    alarm: bool


@dataclass
class DetectorRun:
    records: list[StepRecord]
    alarms: list[AlarmEvent]
    state: CusumState


def run_detector(
    series: Iterable[SlotRecord],
    model: IntensityModel,
    config: DetectorConfig,
    state: CusumState | None = None,
) -> DetectorRun:
    """Run the aggregated detector over calendar slot records.

    Records are processed in time order; dates absent from the series
    (gaps, closed days) leave the state untouched.
    """
    state = state or CusumState.initial()
    records: list[StepRecord] = []
    alarms: list[AlarmEvent] = []
    for rec in sorted(series):
        dlam = model.slot_rate(rec.date, rec.slot_index)
        end = slot_timestamp(rec.date, rec.slot_index, end=True)
        state, alarm = step_aggregated(state, rec.count, dlam, config, clock=end)
        if alarm is not None:
            alarms.append(alarm)
        records.append(
            StepRecord(
                timestamp=end,
                v=alarm.v_at_alarm if alarm is not None else state.v,
                lambda_increment=dlam,
                count=rec.count,
                alarm=alarm is not None,
            )
        )
    return DetectorRun(records=records, alarms=alarms, state=state)


def double_sided_run(
    series: Iterable[SlotRecord],
    model: IntensityModel,
    config_up: DetectorConfig,
    config_down: DetectorConfig,
) -> tuple[DetectorRun, DetectorRun, list[AlarmEvent]]:
    """Advance an increase and a decrease detector independently on one stream."""
    if config_up.direction != INCREASE or config_down.direction != DECREASE:
        raise ValidationError("double-sided run needs one increase and one decrease config")
    series = sorted(series)
    up = run_detector(series, model, config_up)
    down = run_detector(series, model, config_down)
    merged = sorted(up.alarms + down.alarms, key=lambda a: a.time)
    return up, down, merged


def _format_time(value: object) -> str:
    if isinstance(value, datetime):
        return value.isoformat()
    return repr(float(value))


def write_vpath_csv(records: Iterable[StepRecord], path: str | Path) -> None:
    """V-path output: timestamp,v,lambda_increment,count,alarm_flag."""
    lines = ["timestamp,v,lambda_increment,count,alarm_flag"]
    for r in records:
        lines.append(
            f"{_format_time(r.timestamp)},{r.v!r},{r.lambda_increment!r},{r.count},{int(r.alarm)}"
        )
    Path(path).write_text("\n".join(lines) + "\n")


def write_alarms_jsonl(alarms: Iterable[AlarmEvent], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for a in alarms:
            fh.write(
                json.dumps(
                    {
                        "time": _format_time(a.time),
                        "direction": a.direction,
                        "v_at_alarm": a.v_at_alarm,
                        "events_at_alarm": a.events_at_alarm,
                    },
                    sort_keys=True,
                )
                + "\n"
            )
